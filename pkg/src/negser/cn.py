"""The last base ``c_n`` treated as a variable ``x``.

With ``c_1..c_{n-1}`` and all exponents frozen, each ``D_m`` is a
polynomial of degree <= m in ``x``. This module builds that polynomial,
looks at its signs at ``x = 0`` and ``x = c_{n-1}``, scans
``[0, c_{n-1}]`` for sign changes, and checks the first-order behaviour
of ``-D_m`` when ``c_n`` moves to ``c_n + eps``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .numeric import Domain, format_scalar, sign_of, widen
from .series import TruncatedSeries, binomial_factor, geometric, mul
from .theorem import (
    DCoefficients,
    ProblemInstance,
    d_series,
    factor_products,
    partial_product,
)

DEFAULT_GRID = 2**10
DEFAULT_REL_WIDTH = Fraction(1, 2**40)
DEFAULT_LADDER = (10, 11)  # eps = 2**-10 .. 2**-20


class PreconditionError(ValueError):
    pass


@dataclass(frozen=True)
class CnPolynomial:
    """``D_m`` as a polynomial in ``x = c_n``; ``coeffs[k]`` multiplies ``x**k``."""

    coeffs: tuple
    m: int
    prefix: ProblemInstance
    mu_n: object

    @property
    def domain(self) -> Domain:
        return self.prefix.domain

    @property
    def c_prev(self):
        return self.prefix.c[-1]

    def __call__(self, x):
        return self.evaluate(x)

    def evaluate(self, x):
        dom = self.domain
        x = dom.convert(x)
        with dom.arith():
            acc = dom.zero
            for a in reversed(self.coeffs):
                acc = acc * x + a
        return acc

    def derivative(self) -> tuple:
        with self.domain.arith():
            return tuple(k * a for k, a in enumerate(self.coeffs) if k > 0)

    def evaluate_derivative(self, x):
        dom = self.domain
        x = dom.convert(x)
        with dom.arith():
            acc = dom.zero
            for a in reversed(self.derivative()):
                acc = acc * x + a
        return acc

    def __str__(self):
        terms = [f"({format_scalar(a)})*x^{k}" for k, a in enumerate(self.coeffs) if a != 0]
        return " + ".join(terms) or "0"


def split_instance(inst: ProblemInstance) -> tuple[ProblemInstance, object]:
    """Separate the frozen ``n - 1`` factor prefix from ``mu_n``."""
    if inst.n < 2:
        raise PreconditionError("c_n analysis needs at least two factors")
    prefix = inst.replace(c=inst.c[:-1], mu=inst.mu[:-1])
    return prefix, inst.mu[-1]


def dm_polynomial(prefix: ProblemInstance, mu_n, m: int, order: int | None = None) -> CnPolynomial:
    """``D_m(x) = -sum_k {L_{n-1}}_{m-k} binom(mu_n, k) (-1)**k x**k``."""
    order = m if order is None else order
    if m < 1:
        raise PreconditionError("D_m is defined for m >= 1")
    if m > order:
        raise PreconditionError(f"m = {m} exceeds the order {order}")
    dom = prefix.domain
    mu_n = dom.convert(mu_n)
    N = max(m, 1)
    L = partial_product(prefix, prefix.n, N)
    # coefficients of (1 - t)**mu_n are binom(mu_n, k) (-1)**k
    unit = binomial_factor(1, mu_n, N, dom)
    with dom.arith():
        coeffs = tuple(-L[m - k] * unit[k] for k in range(m + 1))
    return CnPolynomial(coeffs, m, prefix, mu_n)


def cn_polynomial(inst: ProblemInstance, m: int) -> CnPolynomial:
    prefix, mu_n = split_instance(inst)
    return dm_polynomial(prefix, mu_n, m)


def endpoint_signs(poly: CnPolynomial, c_prev=None, tol=None) -> tuple[int, int]:
    """Signs of ``-D_m`` at ``x = 0`` and ``x = c_{n-1}``."""
    dom = poly.domain
    if c_prev is None:
        c_prev = poly.c_prev
    if tol is None:
        tol = dom.default_tol
    with dom.arith():
        at0 = -poly.evaluate(0)
        at_prev = -poly.evaluate(c_prev)
    return sign_of(at0, tol), sign_of(at_prev, tol)


def isolate_largest_root(poly: CnPolynomial, lo=0, hi=None, grid: int = DEFAULT_GRID,
                         rel_width=DEFAULT_REL_WIDTH):
    """Rightmost sign change of ``poly`` on ``[lo, hi]`` as a bracket.

    The grid is scanned from ``hi`` downward; grid points where the value
    is exactly zero are skipped when comparing signs, so a tangential
    zero (even multiplicity) is not reported. A crossing found on the
    grid is refined by bisection until the bracket is narrower than
    ``rel_width * (hi - lo)``. Returns ``None`` when no change is seen.
    An exact zero that separates opposite signs gives a bracket ``(z, z)``.
    """
    dom = poly.domain
    lo = dom.convert(lo)
    hi = poly.c_prev if hi is None else dom.convert(hi)
    if not 0 <= lo < hi:
        raise ValueError("need 0 <= lo < hi")
    if grid < 1:
        raise ValueError("grid must have at least one cell")
    with dom.arith():
        span = hi - lo
        points = [lo + span * i / grid for i in range(grid + 1)]
        points[-1] = hi
        right_x, right_s = None, 0
        zero_between = None
        for x in reversed(points):
            s = sign_of(poly.evaluate(x), dom.default_tol)
            if s == 0:
                if right_s != 0 and zero_between is None:
                    zero_between = x
                continue
            if right_s != 0 and s != right_s:
                if zero_between is not None:
                    return zero_between, zero_between
                return _bisect(poly, x, right_x, s, span * _as_domain_ratio(rel_width, dom))
            right_x, right_s = x, s
            zero_between = None
    return None


def _as_domain_ratio(r, dom: Domain):
    if dom.exact:
        return dom.convert(Fraction(r))
    return widen(Fraction(r), dom.precision)


def _bisect(poly: CnPolynomial, a, b, sign_a: int, width):
    dom = poly.domain
    while b - a >= width:
        mid = (a + b) / 2
        s = sign_of(poly.evaluate(mid), dom.default_tol)
        if s == 0:
            return mid, mid
        if s == sign_a:
            a = mid
        else:
            b = mid
        if not dom.exact and (mid == a and mid == b):
            break
    return a, b


def grid_zeros(poly: CnPolynomial, lo=0, hi=None, grid: int = DEFAULT_GRID) -> list:
    """Grid points where ``poly`` vanishes exactly (tangential zeros show up here)."""
    dom = poly.domain
    lo = dom.convert(lo)
    hi = poly.c_prev if hi is None else dom.convert(hi)
    with dom.arith():
        span = hi - lo
        pts = [lo + span * i / grid for i in range(grid + 1)]
    return [x for x in pts if sign_of(poly.evaluate(x), dom.default_tol) == 0]


def dcn_derivative_series(inst: ProblemInstance, order: int | None = None) -> TruncatedSeries:
    """``dL_n/dc_n = -mu_n t L_n / (1 - c_n t)`` as a truncated series.

    Coefficient ``k`` is the derivative of ``{L_n}_k = -D_k`` in ``c_n``.
    """
    order = order or inst.order
    dom = inst.domain
    L = partial_product(inst, inst.n, order)
    g = geometric(inst.c[-1], order, dom)
    with dom.arith():
        return mul(g, L).shift(1).scale(-inst.mu[-1])


@dataclass(frozen=True)
class PerturbationRecord:
    """First-order change of ``-D_m`` when ``c_n`` moves to ``c_n + eps``.

    ``rate`` is the exact derivative of ``-D_m`` in ``c_n``; ``bound_rate``
    keeps only the ``D_1`` term, ``mu_n c_n**(m-2) (D_1 - c_n)``.
    ``lhs_increment`` and ``bound_term`` are those rates times ``eps``;
    ``exact_increment`` is the true change of ``-D_m`` and
    ``remainder`` its deviation from ``lhs_increment`` (second order).
    """

    m: int
    c_point: object
    epsilon: object
    epsilon_star: object
    rate: object
    bound_rate: object
    lhs_increment: object
    bound_term: object
    exact_increment: object
    remainder: object
    satisfied: bool

    FIELDS = ("m", "c_point", "epsilon", "epsilon_star", "rate", "bound_rate",
              "lhs_increment", "bound_term", "exact_increment", "remainder", "satisfied")

    def row(self) -> list[str]:
        out = []
        for name in self.FIELDS:
            v = getattr(self, name)
            if isinstance(v, bool):
                out.append("true" if v else "false")
            elif isinstance(v, int):
                out.append(str(v))
            else:
                out.append(format_scalar(v))
        return out


def perturbation_rates(inst: ProblemInstance, m: int, D: DCoefficients | None = None):
    """``(rate, bound_rate)`` for index ``m``; requires D_1..D_{m-1} > 0."""
    if m < 2:
        raise PreconditionError("the bound needs m >= 2")
    dom = inst.domain
    if D is None or D.order < m:
        D = d_series(inst, m)
    for j in range(1, m):
        if sign_of(D[j], dom.default_tol) <= 0:
            raise PreconditionError(f"D_{j} = {format_scalar(D[j])} is not positive (j < m = {m})")
    c, mu_n = inst.c[-1], inst.mu[-1]
    with dom.arith():
        acc = dom.zero
        cpow = dom.one
        for k in range(m - 1):
            acc += cpow * D[m - 1 - k]
            if k < m - 2:
                cpow *= c
        # cpow is now c**(m-2)
        rate = mu_n * (acc - cpow * c)
        bound_rate = mu_n * cpow * (D[1] - c)
    return rate, bound_rate


def rm_bound_check(inst: ProblemInstance, m: int, epsilon=None, D: DCoefficients | None = None) -> PerturbationRecord:
    """Compare the exact first-order rate of ``-D_m`` with the bound that
    drops every term except the one carrying ``D_1``."""
    dom = inst.domain
    rate, bound_rate = perturbation_rates(inst, m, D)
    if epsilon is None:
        epsilon = Fraction(1, 2**DEFAULT_LADDER[0])
    eps = _as_domain_ratio(epsilon, dom) if isinstance(epsilon, (Fraction, int)) else dom.convert(epsilon)
    if eps <= 0:
        raise ValueError("epsilon must be positive")
    c = inst.c[-1]
    poly = cn_polynomial(inst, m)
    with dom.arith():
        eps_star = inst.mu[-1] * eps
        lhs = eps * rate
        bound = eps * bound_rate
        exact = poly.evaluate(c) - poly.evaluate(c + eps)
        remainder = exact - lhs
    return PerturbationRecord(m, c, eps, eps_star, rate, bound_rate, lhs, bound,
                              exact, remainder, bool(rate >= bound_rate))


def perturb_ladder(inst: ProblemInstance, m: int, start: int = DEFAULT_LADDER[0],
                   steps: int = DEFAULT_LADDER[1]) -> list[PerturbationRecord]:
    D = d_series(inst, m)
    return [rm_bound_check(inst, m, Fraction(1, 2**(start + s)), D) for s in range(steps)]


def finite_difference_errors(inst: ProblemInstance, order: int = 20, start: int = DEFAULT_LADDER[0],
                             steps: int = DEFAULT_LADDER[1], precision: int = 128):
    """Max coefficient error of the central difference of ``L_n`` in ``c_n``
    against :func:`dcn_derivative_series`, for eps = 2**-start, 2**-(start+1), ...

    Exact instances are widened to ``precision`` bits first. Returns a list
    of ``(eps, error)`` pairs.
    """
    if inst.domain.exact:
        dom = Domain(precision)
        inst = inst.replace(c=[widen(x, precision) for x in inst.c],
                            mu=[widen(x, precision) for x in inst.mu], domain=dom)
    dom = inst.domain
    analytic = dcn_derivative_series(inst, order)
    head_c, head_mu = inst.c[:-1], inst.mu
    cn = inst.c[-1]
    out = []
    for s in range(steps):
        eps = widen(Fraction(1, 2**(start + s)), dom.precision)
        with dom.arith():
            up = factor_products(head_c + (cn + eps,), head_mu, order, dom)[-1]
            down = factor_products(head_c + (cn - eps,), head_mu, order, dom)[-1]
            err = max(abs((u - d) / (2 * eps) - a) for u, d, a in zip(up, down, analytic))
        out.append((eps, err))
    return out


def error_ratios(errors) -> list:
    """Ratios err(eps) / err(eps/2) along a ladder."""
    return [errors[i][1] / errors[i + 1][1] for i in range(len(errors) - 1)]
