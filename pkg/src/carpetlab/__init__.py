"""carpetlab: numerical verification of Sierpinski-carpet Julia set criteria
for explicit rational-map families, with parameter solving and rendering."""

__version__ = "0.1.0"

from .polynomials import Poly, poly_add, poly_derivative, poly_eval, poly_mul, poly_roots, poly_scale
from .ratmap import (RationalMap, SpherePoint, chordal_distance, critical_points,
                     derivative_at, eval_sphere, fixed_points, map_degree)
from .families import (FamilySpec, build_family, family_F, family_G, family_general,
                       family_mcmullen, family_morosawa_pilgrim, family_parabolic,
                       family_period2, semiconjugacy_residual, spec_from_config,
                       spec_to_config, verify_orbit_schema)
from .dynamics import (ComponentMask, OrbitRecord, TrapConfig, basin_component_mask,
                       detect_cycle, iterate_classify, same_component)
from .criterion import CriterionReport, evaluate_criterion
from .geometry import (JordanCurveSamples, RegionSpec, compactly_contained,
                       interval_monotone_image, map_curve, proper_degree,
                       pullback_component_boundary, region_disjoint, sample_boundary,
                       winding_number)
from .solve import ParamProblem, solve_parameter, verify_constant
from .render import RasterImage, render_julia, render_param_plane, write_image
