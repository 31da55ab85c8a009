"""Truncated formal power series in one variable ``t``.

A :class:`TruncatedSeries` holds ``a_0 .. a_N`` and stands for the class of
all series agreeing with it modulo ``t**(N+1)``. Every coefficient lives in
one :class:`~negser.numeric.Domain`; binary operations insist on equal
order and equal domain rather than silently truncating or widening.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

from .numeric import EXACT, Domain, DomainError, format_scalar

DEFAULT_ORDER = 64


class SeriesError(ValueError):
    pass


@dataclass(frozen=True)
class TruncatedSeries:
    coeffs: tuple
    domain: Domain = EXACT

    def __post_init__(self):
        if len(self.coeffs) < 2:
            raise SeriesError("a truncated series needs order >= 1 (at least two coefficients)")
        conv = tuple(self.domain.convert(a) for a in self.coeffs)
        object.__setattr__(self, "coeffs", conv)

    @classmethod
    def from_list(cls, values: Sequence, domain: Domain | None = None) -> "TruncatedSeries":
        if domain is None:
            domain = Domain.of(values[0])
        return cls(tuple(values), domain)

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    def __len__(self):
        return len(self.coeffs)

    def __iter__(self):
        return iter(self.coeffs)

    def __getitem__(self, k):
        return self.coeffs[k]

    def __repr__(self):
        body = ", ".join(format_scalar(a) for a in self.coeffs)
        return f"TruncatedSeries([{body}], {self.domain.describe()})"

    def __neg__(self):
        with self.domain.arith():
            return TruncatedSeries(tuple(-a for a in self.coeffs), self.domain)

    def __add__(self, other):
        _check_compatible(self, other)
        with self.domain.arith():
            return TruncatedSeries(tuple(a + b for a, b in zip(self, other)), self.domain)

    def __sub__(self, other):
        _check_compatible(self, other)
        with self.domain.arith():
            return TruncatedSeries(tuple(a - b for a, b in zip(self, other)), self.domain)

    def __mul__(self, other):
        if isinstance(other, TruncatedSeries):
            return mul(self, other)
        return self.scale(other)

    __rmul__ = __mul__

    def __pow__(self, rho):
        return power(self, rho)

    def scale(self, s) -> "TruncatedSeries":
        s = self.domain.convert(s)
        with self.domain.arith():
            return TruncatedSeries(tuple(s * a for a in self.coeffs), self.domain)

    def shift(self, k: int = 1) -> "TruncatedSeries":
        """Multiply by ``t**k`` keeping the order."""
        zero = self.domain.zero
        return TruncatedSeries((zero,) * k + self.coeffs[: len(self.coeffs) - k], self.domain)

    def truncate(self, order: int) -> "TruncatedSeries":
        if order > self.order:
            raise SeriesError(f"cannot extend order {self.order} to {order}")
        return TruncatedSeries(self.coeffs[: order + 1], self.domain)

    def to_json(self) -> str:
        return json.dumps([format_scalar(a) for a in self.coeffs])

    @classmethod
    def from_json(cls, text: str, domain: Domain = EXACT) -> "TruncatedSeries":
        return cls(tuple(json.loads(text)), domain)


def _check_compatible(a: TruncatedSeries, b: TruncatedSeries):
    if not isinstance(b, TruncatedSeries):
        raise TypeError(f"expected TruncatedSeries, got {type(b).__name__}")
    if a.domain != b.domain:
        raise DomainError(f"domain mismatch: {a.domain.describe()} vs {b.domain.describe()}")
    if a.order != b.order:
        raise SeriesError(f"order mismatch: {a.order} vs {b.order}")


def one(order: int = DEFAULT_ORDER, domain: Domain = EXACT) -> TruncatedSeries:
    return TruncatedSeries((domain.one,) + (domain.zero,) * order, domain)


def zero(order: int = DEFAULT_ORDER, domain: Domain = EXACT) -> TruncatedSeries:
    return TruncatedSeries((domain.zero,) * (order + 1), domain)


def binomial_factor(c, mu, order: int = DEFAULT_ORDER, domain: Domain | None = None) -> TruncatedSeries:
    """Expansion of ``(1 - c t)**mu`` through ``t**order``.

    ``c = 0`` is allowed (it gives the identity series); the reductions
    need it. Coefficients follow a_{k+1} = a_k (-c)(mu - k)/(k + 1).
    """
    if domain is None:
        domain = Domain.of(c)
    c, mu = domain.convert(c), domain.convert(mu)
    if c < 0:
        raise SeriesError(f"binomial_factor needs c >= 0, got {format_scalar(c)}")
    if mu <= 0:
        raise SeriesError(f"binomial_factor needs mu > 0, got {format_scalar(mu)}")
    with domain.arith():
        a = [domain.one]
        for k in range(order):
            a.append(a[-1] * (-c) * (mu - k) / (k + 1))
    return TruncatedSeries(tuple(a), domain)


def mul(A: TruncatedSeries, B: TruncatedSeries) -> TruncatedSeries:
    """Cauchy product truncated at the common order."""
    _check_compatible(A, B)
    a, b = A.coeffs, B.coeffs
    dom = A.domain
    out = []
    with dom.arith():
        for k in range(len(a)):
            acc = dom.zero
            for i in range(k + 1):
                acc += a[i] * b[k - i]
            out.append(acc)
    return TruncatedSeries(tuple(out), dom)


def _require_unit(A: TruncatedSeries, what: str):
    if A.coeffs[0] != 1:
        raise SeriesError(f"{what} needs constant term 1, got {format_scalar(A.coeffs[0])}")


def power(A: TruncatedSeries, rho) -> TruncatedSeries:
    """``A**rho`` for ``A_0 = 1`` and any rho in the domain.

    Uses the recurrence from B' A = rho A' B:
    b_k = (1/k) sum_{i=1..k} (i (rho + 1) - k) a_i b_{k-i}.
    """
    _require_unit(A, "power")
    dom = A.domain
    rho = dom.convert(rho)
    a = A.coeffs
    b = [dom.one]
    with dom.arith():
        rho1 = rho + 1
        for k in range(1, len(a)):
            acc = dom.zero
            for i in range(1, k + 1):
                if a[i]:
                    acc += (i * rho1 - k) * a[i] * b[k - i]
            b.append(acc / k)
    return TruncatedSeries(tuple(b), dom)


def log_series(A: TruncatedSeries) -> TruncatedSeries:
    """Formal logarithm of a series with constant term 1."""
    _require_unit(A, "log_series")
    dom = A.domain
    a = A.coeffs
    out = [dom.zero]
    with dom.arith():
        for k in range(1, len(a)):
            acc = k * a[k]
            for i in range(1, k):
                acc -= i * out[i] * a[k - i]
            out.append(acc / k)
    return TruncatedSeries(tuple(out), dom)


def exp_series(A: TruncatedSeries) -> TruncatedSeries:
    """Formal exponential of a series with constant term 0."""
    if A.coeffs[0] != 0:
        raise SeriesError(f"exp_series needs constant term 0, got {format_scalar(A.coeffs[0])}")
    dom = A.domain
    a = A.coeffs
    e = [dom.one]
    with dom.arith():
        for k in range(1, len(a)):
            acc = dom.zero
            for i in range(1, k + 1):
                acc += i * a[i] * e[k - i]
            e.append(acc / k)
    return TruncatedSeries(tuple(e), dom)


def coefficient(A: TruncatedSeries, k: int):
    """The coefficient of ``t**k``."""
    if not 0 <= k <= A.order:
        raise SeriesError(f"coefficient index {k} outside 0..{A.order}")
    return A.coeffs[k]


def geometric(c, order: int = DEFAULT_ORDER, domain: Domain | None = None) -> TruncatedSeries:
    """``1/(1 - c t)``, i.e. coefficients ``c**k``."""
    if domain is None:
        domain = Domain.of(c)
    c = domain.convert(c)
    with domain.arith():
        a = [domain.one]
        for _ in range(order):
            a.append(a[-1] * c)
    return TruncatedSeries(tuple(a), domain)


def polynomial(coeffs: Sequence, order: int, domain: Domain = EXACT) -> TruncatedSeries:
    """A polynomial padded (or cut) to the given order."""
    vals = [domain.convert(a) for a in coeffs][: order + 1]
    vals += [domain.zero] * (order + 1 - len(vals))
    return TruncatedSeries(tuple(vals), domain)

