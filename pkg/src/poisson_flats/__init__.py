"""Isotropic Poisson k-flat processes in the space forms of curvature -1, 0 and +1.

Submodules:

``geometry``     models, flats, distances, slice volumes, intersections
``measures``     invariant flat measures, integral-geometric constants, moments
``sampling``     reproducible random flats, Poisson flat processes
``functionals``  intersection-volume functionals on sampled configurations
``limit``        the non-Gaussian limit law for 2k > d+1
``stats``        Kolmogorov distance, k-statistics, empirical characteristic functions
``studies``      seeded studies with CSV reports (driven by ``cli``)
"""

__version__ = "0.1.0"

from .errors import ConfigError, DimensionMismatchError, DomainError, FrameError, ResourceError
from .geometry import (DEGENERATE, EMPTY, Flat, QuadratureSpec, SpaceSpec, ball_volume, distance,
                       flat_distance_to_origin, flat_from_foot, intersect_flats, slice_volume)
from .measures import ProcessSpec, flat_measure_of_ball, mean_F, variance_F
from .sampling import RngStream, sample_flat, sample_process
from .functionals import Ball, General, intersection_functional
