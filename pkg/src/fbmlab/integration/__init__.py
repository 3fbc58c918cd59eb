from fbmlab.integration.operator import (
    corollary_representation_check,
    g_operator,
    g_operator_l2_distance,
    g_operator_norm_ratio,
    g_operator_values,
)
from fbmlab.integration.riemann import (
    IntegralEstimate,
    IntegrandSample,
    quadratic_variation,
    riemann_integral,
)

__all__ = [
    "IntegrandSample",
    "IntegralEstimate",
    "riemann_integral",
    "quadratic_variation",
    "g_operator",
    "g_operator_values",
    "g_operator_l2_distance",
    "g_operator_norm_ratio",
    "corollary_representation_check",
]
