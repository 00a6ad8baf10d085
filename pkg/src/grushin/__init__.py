"""Geodesics, cut loci and distortion coefficients of the alpha-Grushin plane."""

__version__ = "0.1.0"

from .errors import (ConvergenceError, CutLocusError, DegenerateInputError,  # noqa: E402
                     DomainError, GrushinError, StepSizeError)
from .gentrig import (PQ, Alpha, TrigContext, F_pq, arc_alpha, as_alpha,  # noqa: E402
                      cos_alpha, even_power, odd_power, pi_pq, sin_alpha, sincos_alpha)
from .geodesics import (Covector, GeodesicSpec, Point, PolarParams, connect,  # noqa: E402
                        from_polar, geodesic_flow, geodesic_point, integrate_hamiltonian,
                        make_spec, param_derivatives, to_polar)
from .cutlocus import (CutInfo, conjugate_det, conjugate_det_dt, cut_time,  # noqa: E402
                       in_cut_locus)
from .distortion import (Branch, DistortionResult, aux_vderivatives, beta,  # noqa: E402
                         beta_horizontal, beta_monte_carlo, beta_singular,
                         fd_jacobian_oracle, jacobian_polar, jacobian_xuv)
from .mcp import (McpConstants, SweepReport, check_bound, f_max, n_crit,  # noqa: E402
                  sigma_tau, solve_m)
