"""Finite-variable reductions of the dispersionless Toda hierarchy:
Landau-Ginzburg potentials, their Lax expansions, Loewner data, hodograph
solutions and the associated diagonal metrics.
"""
from ._kernels import BACKEND
from .errors import (ConvergenceError, DegeneracyError, DTodaError, FrameError, ResidualError,
                     SeriesError, ValidationError, WindowError)
from .frobenius import (FlatChart, TangentVector, cubic, euler_homogeneity_residual, flat_coordinates,
                        flat_metric_report, metric_matrix, pairing, product_structure)
from .geometry import MetricFrame, geometry_residuals, metric_frames, rotation_check
from .hydro import (HodographData, SolutionField, SpaceTimePoint, hodograph_residual, hodograph_solve,
                    hodograph_sweep, lax_flow_residual, pde_residual, speed_structure_residual, speeds)
from .lax import LaxExpansion, evolution_rhs, expand_lax, generator
from .loewner import LownerFrame, alpha_coeffs, gt_residual, loewner_residual, potential_relations_residual
from .potential import (CriticalFrame, LGPotential, critical_frame, envelope_jacobian, params_from_lambda,
                        validate_potential)
from .series import (AT_INFINITY, AT_ZERO, Center, TruncatedSeries, series_arith, series_compose,
                     series_revert, series_transcend)

__version__ = "0.1.0"
