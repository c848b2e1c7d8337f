"""Command-line entry point: ``poisson-flats {analytic,simulate,study}``.

Exit codes: 0 success, 1 usage or configuration error, 2 a study ran but at
least one row failed its tolerance.
"""

from __future__ import annotations

import argparse
import csv
import sys

from .errors import ConfigError, DomainError, ResourceError
from .geometry import SpaceSpec, ball_volume, slice_volume
from .limit import cumulant_Z, g_profile, levy_density, proof_constant
from .measures import (ProcessSpec, c_dk, crofton_constant, flat_measure_of_ball, mean_F,
                       multi_intersection_constant, slice_power_integral, variance_F)
from .sampling import RngStream, sample_process
from .studies import STUDIES, StudyConfig, default_configs, run_study


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _space(a):
    return SpaceSpec(a.kappa, a.d)


def _proc(a):
    return ProcessSpec(_space(a), a.k, a.t, a.m)


# name -> (required arguments, evaluator)
_ANALYTIC = {
    "ball_volume": (("kappa", "d", "r"), lambda a: ball_volume(_space(a), a.r)),
    "slice_volume": (("kappa", "d", "j", "r", "s"), lambda a: slice_volume(_space(a), a.j, a.r, a.s)),
    "flat_measure": (("kappa", "d", "k", "r"), lambda a: flat_measure_of_ball(_space(a), a.k, a.r)),
    "slice_power_integral": (("kappa", "d", "j", "l", "r"),
                             lambda a: slice_power_integral(_space(a), a.j, a.l, a.r)),
    "crofton_constant": (("d", "k", "i"), lambda a: crofton_constant(a.d, a.k, a.i)),
    "c_dk": (("d", "k"), lambda a: c_dk(a.d, a.k)),
    "multi_intersection_constant": (("d", "k", "m"), lambda a: multi_intersection_constant(a.d, a.k, a.m)),
    "mean_F": (("kappa", "d", "k", "r"), lambda a: mean_F(_proc(a), a.r)),
    "variance_F": (("kappa", "d", "k", "r"), lambda a: variance_F(_proc(a), a.r)),
    "cumulant_Z": (("d", "k", "l"), lambda a: cumulant_Z(a.d, a.k, a.l)),
    "g_profile": (("d", "k", "s"), lambda a: g_profile(a.d, a.k, a.s)),
    "levy_density": (("d", "k", "y"), lambda a: levy_density(a.d, a.k, a.y)),
    "limit_prefactor": (("k",), lambda a: proof_constant(a.k)),
}


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="poisson-flats", description="Poisson k-flat processes in space forms.")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    an = sub.add_parser("analytic", help="print a closed-form or quadrature quantity")
    an.add_argument("quantity", choices=sorted(_ANALYTIC))
    for name, typ in (("kappa", int), ("d", int), ("k", int), ("m", int), ("i", int), ("j", int),
                      ("l", int), ("r", float), ("s", float), ("t", float), ("y", float)):
        an.add_argument(f"--{name}", type=typ, default=None)

    sim = sub.add_parser("simulate", help="write one Poisson flat process sample as CSV")
    sim.add_argument("--kappa", type=int, default=-1)
    sim.add_argument("--d", type=int, default=2)
    sim.add_argument("--k", type=int, default=1)
    sim.add_argument("--t", type=float, default=1.0)
    sim.add_argument("--r", type=float, default=1.0)
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--out", default=None)

    st = sub.add_parser("study", help="run a study and write its CSV report")
    st.add_argument("name", choices=STUDIES)
    st.add_argument("--config", default=None, help="JSON study configuration")
    st.add_argument("--seed", type=int, default=None)
    st.add_argument("--out", default=None)
    st.add_argument("--replicates", type=int, default=None)
    st.add_argument("--quiet", action="store_true")
    return p


def _cmd_analytic(a) -> int:
    needed, fn = _ANALYTIC[a.quantity]
    missing = [n for n in needed if getattr(a, n) is None]
    if missing:
        raise ConfigError(f"{a.quantity} needs --" + ", --".join(missing))
    a.t = 1.0 if a.t is None else a.t
    a.m = 1 if a.m is None else a.m
    print(repr(float(fn(a))))
    return 0


def _cmd_simulate(a) -> int:
    sample = sample_process(_space(a), a.k, a.t, a.r, RngStream(a.seed, 0))
    fh = open(a.out, "w", encoding="utf-8", newline="") if a.out else sys.stdout
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["distance"] + [f"u{i + 1}" for i in range(a.d)])
        for s, u in zip(sample.arrays.dist, sample.arrays.u):
            w.writerow([repr(float(s))] + [repr(float(x)) for x in u])
    finally:
        if a.out:
            fh.close()
    return 0


def _cmd_study(a) -> int:
    if a.config:
        cfgs = [StudyConfig.from_json(a.config)]
        if cfgs[0].study != a.name:
            raise ConfigError(f"config is for study {cfgs[0].study!r}, not {a.name!r}")
    else:
        cfgs = default_configs(a.name)
    for i, c in enumerate(cfgs):
        if a.seed is not None:
            c.seed = a.seed + i
        if a.replicates is not None:
            c.replicates = a.replicates
        c.__post_init__()
    out = a.out or cfgs[0].output_path
    texts, ok = [], True
    for c in cfgs:
        rep = run_study(c)
        ok &= rep.passed
        texts.append(rep.to_csv())
        if not a.quiet:
            for r in rep.rows:
                flag = "PASS" if r.passed else "FAIL"
                print(f"{flag} {c.study} {r.name}: estimate={r.estimate:.6g} target={r.analytic_target:.6g}"
                      f" se={r.std_error:.3g}", file=sys.stderr)
            print(f"# wall_time {rep.metadata['wall_time']:.2f}s", file=sys.stderr)
    body = "".join(texts)
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(body)
    else:
        sys.stdout.write(body)
    return 0 if ok else 2


def main(argv=None) -> int:
    parser = build_parser()
    a = parser.parse_args(argv)
    try:
        if a.command == "analytic":
            return _cmd_analytic(a)
        if a.command == "simulate":
            return _cmd_simulate(a)
        return _cmd_study(a)
    except (ConfigError, DomainError, ResourceError) as exc:
        print(f"poisson-flats: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
