"""Dimension reduction for non-negativity and convexity tests of k-symmetric polynomials."""

__version__ = "0.1.0"

from .poly import Polynomial, add, degree, evaluate, format_polynomial, mul, parse_polynomial, partial
from .multisym import (PowerSumExpr, exponent_profile, is_k_symmetric, monomial_function, power_sum,
                       rewrite_in_power_sums, substitute_power_sums, symmetrize, weighted_degree)
from .bounds import (BoundNotApplicable, KappaBound, Method, Simplex, best_kappa, count_partitions,
                     fit_simplex, fit_simplex_exact, kappa_column_degrees, kappa_degree_power,
                     kappa_half_degree_k1, kappa_simplex, kappa_weighted)
from .convexity import (hessian_form, h_profile, kappa_hessian_degree, kappa_hessian_refined,
                        kappa_hessian_simplex, kappa_hessian_weighted)
from .reduce import (ReducedInstance, enumerate_partitions, enumerate_subspaces_up_to, reduction_plan,
                     restrict)
from .verify import (MinReport, SphereSpec, kappa_consistency_experiment, min_on_reduced, min_on_sphere,
                     nonneg_check)
from .expr import parse
