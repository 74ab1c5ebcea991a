"""Elliptic dielectric microcavities: rays, resonances, Husimi maps and self-energy analysis."""
from .errors import (CollisionError, ConfigError, DegenerateInputError, DomainError, EllipcavError,
                     EmptyChannelError, InconsistencyError, NotAResonanceError, NumericalError,
                     ParityMismatchError)
from .geometry import EllipseGeometry, boundary_point, make_ellipse
from .wavesolver import (CavityConfig, ModeLabel, Resonance, circle_billiard_k, circle_cavity_k,
                         quality_factor, resonance_search, solve_circle_mode)
from .tracker import ModeTrajectory, detect_crossings, track_mode, track_modes
from .husimi import HusimiMap, husimi_incident, husimi_peak, restrict_below_critical
from .analysis import (bhattacharyya, classify_mode, compare_pair, delta_self_energy,
                       self_energy)

__version__ = "0.1.0"
