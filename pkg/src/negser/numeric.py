"""Scalar arithmetic for the two computation domains.

Exact values are ``gmpy2.mpq`` rationals (always canonical: positive
denominator, reduced). Float values are ``gmpy2.mpfr`` numbers at a
precision fixed by the :class:`Domain` they belong to; all float
arithmetic runs inside that domain's context so results never pick up a
different precision from whatever context happens to be active.
"""

from __future__ import annotations

import contextlib
import math
import re
from dataclasses import dataclass
from fractions import Fraction

import gmpy2
from gmpy2 import mpfr, mpq

DEFAULT_PRECISION = 128
DEFAULT_FLOAT_TOL = 1e-25

_RATIONAL_RE = re.compile(r"^\s*([-−]?)(\d+)(?:\s*/\s*(\d+))?\s*$")


class DomainError(TypeError):
    """Raised when exact and float values would be combined implicitly."""


class RationalFormatError(ValueError):
    """Raised for text that is not of the form ``p/q`` or ``p``."""


@dataclass(frozen=True)
class Domain:
    """Either the exact rational domain (``precision=None``) or a float
    domain with a fixed number of mantissa bits."""

    precision: int | None = None

    def __post_init__(self):
        if self.precision is not None and self.precision < 53:
            raise ValueError(f"float precision must be >= 53 bits, got {self.precision}")

    @property
    def exact(self) -> bool:
        return self.precision is None

    @property
    def name(self) -> str:
        return "rational" if self.exact else "float"

    @property
    def default_tol(self):
        return 0 if self.exact else DEFAULT_FLOAT_TOL

    @property
    def zero(self):
        return self.convert(0)

    @property
    def one(self):
        return self.convert(1)

    def arith(self):
        """Context manager under which float arithmetic for this domain runs."""
        if self.exact:
            return contextlib.nullcontext()
        return gmpy2.context(precision=self.precision, round=gmpy2.RoundToNearest)

    def owns(self, x) -> bool:
        if self.exact:
            return isinstance(x, mpq)
        return isinstance(x, mpfr) and x.precision == self.precision

    def check(self, x):
        if not self.owns(x):
            raise DomainError(f"{x!r} does not belong to the {self.describe()} domain")
        return x

    def convert(self, x):
        """Bring ``x`` into this domain without any cross-domain widening.

        Integers and rational text are accepted everywhere; decimal text
        and Python floats only in float domains. Exact rationals going
        into a float domain must pass through :func:`widen` explicitly.
        """
        if self.owns(x):
            return x
        if isinstance(x, bool):
            raise DomainError(f"refusing to convert bool {x!r}")
        if self.exact:
            if isinstance(x, (int, Fraction, mpq)):
                return mpq(x)
            if isinstance(x, str):
                return parse_rational(x)
            raise DomainError(f"cannot place {type(x).__name__} {x!r} in the rational domain")
        if isinstance(x, int):
            return mpfr(x, self.precision)
        if isinstance(x, str):
            if _RATIONAL_RE.match(x):
                return widen(parse_rational(x), self.precision)
            try:
                return mpfr(x.strip(), self.precision)
            except ValueError:
                raise RationalFormatError(f"malformed number {x!r}") from None
        if isinstance(x, float):
            return mpfr(x, self.precision)
        if isinstance(x, mpfr):
            raise DomainError(
                f"float of precision {x.precision} used in a {self.precision}-bit domain"
            )
        raise DomainError(f"cannot place {type(x).__name__} {x!r} in a float domain (use widen)")

    def describe(self) -> str:
        return "rational" if self.exact else f"float/{self.precision}"

    @classmethod
    def of(cls, x) -> "Domain":
        """Infer the domain of a scalar. Plain ints count as exact."""
        if isinstance(x, mpfr):
            return cls(x.precision)
        if isinstance(x, (int, Fraction, mpq)):
            return EXACT
        raise DomainError(f"no domain for {type(x).__name__}")

    @classmethod
    def from_name(cls, name: str, precision: int | None = None) -> "Domain":
        if name in ("rational", "exact"):
            return EXACT
        if name == "float":
            return cls(precision or DEFAULT_PRECISION)
        raise ValueError(f"unknown domain {name!r} (expected 'rational' or 'float')")


EXACT = Domain()


def float_domain(precision: int = DEFAULT_PRECISION) -> Domain:
    return Domain(precision)


def parse_rational(text: str):
    """Parse ``"p/q"``, ``"p"`` or ``"-p/q"`` into a canonical mpq.

    Both ASCII hyphen and U+2212 are accepted as the minus sign.
    """
    m = _RATIONAL_RE.match(text) if isinstance(text, str) else None
    if m is None:
        raise RationalFormatError(f"malformed rational {text!r}")
    sign, p, q = m.groups()
    den = int(q) if q is not None else 1
    if den == 0:
        raise RationalFormatError(f"zero denominator in {text!r}")
    value = mpq(int(p), den)
    return -value if sign else value


def sign_of(s, tol=0) -> int:
    """Sign of a scalar: exact for rationals, tolerance-banded for floats."""
    if tol < 0:
        raise ValueError("tolerance must be nonnegative")
    if isinstance(s, mpfr):
        if abs(s) <= tol:
            return 0
        return 1 if s > 0 else -1
    if isinstance(s, (int, Fraction, mpq)):
        if tol != 0:
            raise ValueError("a nonzero tolerance makes no sense for an exact value")
        return (s > 0) - (s < 0)
    raise DomainError(f"sign_of: unsupported scalar {s!r}")


def widen(r, precision_bits: int = DEFAULT_PRECISION):
    """Round an exact rational to the nearest float at ``precision_bits``
    (ties to even)."""
    if precision_bits < 53:
        raise ValueError(f"precision must be >= 53 bits, got {precision_bits}")
    with gmpy2.context(precision=precision_bits, round=gmpy2.RoundToNearest):
        return mpfr(mpq(r), precision_bits)


def binom_real(mu, k: int):
    """Generalized binomial coefficient mu(mu-1)...(mu-k+1)/k!."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    dom = Domain.of(mu)
    mu = dom.convert(mu)
    with dom.arith():
        acc = dom.one
        for i in range(k):
            acc = acc * (mu - i) / (i + 1)
    return acc


def format_scalar(x) -> str:
    """Text form used in every report: ``p/q`` for rationals, a
    round-trippable scientific decimal for floats."""
    if isinstance(x, mpq):
        return str(x)
    if isinstance(x, int):
        return str(x)
    if isinstance(x, mpfr):
        return _format_mpfr(x)
    raise DomainError(f"cannot format {x!r}")


def _format_mpfr(x) -> str:
    ndigits = 1 + math.ceil(x.precision * math.log10(2))
    if x == 0:
        return "0." + "0" * (ndigits - 1) + "e+00"
    if not gmpy2.is_finite(x):
        return str(x)
    mant, exp, _ = x.digits(10, ndigits)
    sign = ""
    if mant.startswith("-"):
        sign, mant = "-", mant[1:]
    e = exp - 1
    return f"{sign}{mant[0]}.{mant[1:]}e{'+' if e >= 0 else '-'}{abs(e):02d}"


def parse_scalar(text: str, domain: Domain):
    return domain.convert(text)
