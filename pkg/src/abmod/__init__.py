"""Exact computations with (a,b)-modules: truncated series, operators in a and b,
module presentations, changes of variable and classification invariants."""

from .errors import *  # noqa: F401,F403
from .series import (TruncSeries, series_exp, series_inv, series_mul,
                     solve_linear_b_ode)
from .ore import (OreOperator, commuting_rewrite, op_from_factors, op_invert_unit,
                  op_left_divmod, op_monic, op_mul, standard_computation)
from .module import (AbModule, FrescoPresentation, JordanHolderData, annihilator_of_generator,
                     apply_operator, delta_and_depth, jh_subquotient, kernel_dim,
                     module_from_presentation, module_xi, modules_isomorphic, phi_weight,
                     presentation_from_module, principal_jh, quotient_by_normal_rank1,
                     saturate_and_bernstein, simple_pole_normalize)
from .change import (ChangeOfVariable, alpha_beta_matrices, alpha_factor_through,
                     module_pushforward, pushforward, rank1_eigen_series,
                     s_rho_lambda_recursion)
from .classify import (InvariantReport, SemisimplicityWitness, cross_ratio, empirical_L,
                       extract_gamma, find_L, invariant_report, make_E_gamma,
                       rank2_theme_param, semisimplicity_witness)

__version__ = "0.1.0"
