"""Truncated power series engine for products prod_j (1 - c_j t)**mu_j and
exact checks on the signs of their coefficients."""

from .numeric import EXACT, Domain, DomainError, binom_real, float_domain, format_scalar, parse_rational, sign_of, widen
from .series import (
    TruncatedSeries,
    binomial_factor,
    coefficient,
    exp_series,
    geometric,
    log_series,
    mul,
    power,
)
from .theorem import (
    DCoefficients,
    InstanceError,
    ProblemInstance,
    Verdict,
    d1_closed_form,
    d_series,
    parse_instance_file,
    partial_product,
    reduce_drop_zero,
    reduce_merge_equal,
    scale_rho,
    verify_positivity,
)

__version__ = "0.1.0"
