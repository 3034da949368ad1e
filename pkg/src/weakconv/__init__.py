"""Numerical toolkit for weakly convex sets in finite-dimensional p-norm spaces."""

from .errors import (ConditionNotSatisfied, DomainError, EmptySetError, HypothesisViolation,
                     PreconditionError, SceneError, TubeError, UnboundedSetError, WeakConvError)
from .mappings import (IntersectionFamily, SetValuedMap, Splitter, estimate_continuity_modulus,
                       intersection_hausdorff_bound, intersection_stability_bound, selection,
                       selection_modulus, split, transfer_point)
from .moduli import (certify_weak_convexity, check_cavern_bounds, check_sigma_laws, modulus_convexity,
                     modulus_nonconvexity, sigma_modulus)
from .projection import (check_projection_stability, connect_by_midpoint_iteration, make_tube,
                         project_in_tube, retract)
from .reports import Report
from .roots import ConditionSolver
from .sets import (Affine, Ball, Cavern, CurveRegion2D, Intersection, MinkowskiSum, PointCloud, Polytope,
                   Union, hausdorff_distance, load_scene)
from .space import BallModulus, ModulusCurve, PNormSpace, check_day_nordlander, space_modulus_delta
from .surfaces import (SmoothCurve2D, check_surface_gamma_bound, curvature_radius, epsilon0,
                       estimate_alpha, normal_field_continuity)

__version__ = "0.1.0"
