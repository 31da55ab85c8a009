"""Problem instances for prod_j (1 - c_j t)**mu_j and the checks run on them.

The product is written ``L_n = 1 - sum_j D_j t**j``. The functions here
compute the partial products ``L_k``, the coefficients ``D_j``, the
positivity verdict, the closed form of ``D_1``, the rescaling of the
exponent sum, and the two ways of collapsing an ``n``-factor instance
to ``n - 1`` factors.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .numeric import (
    EXACT,
    Domain,
    DomainError,
    RationalFormatError,
    format_scalar,
    sign_of,
)
from .series import (
    DEFAULT_ORDER,
    TruncatedSeries,
    binomial_factor,
    exp_series,
    log_series,
    mul,
    one,
    power,
)

DEFAULT_MIN_GAP = 1e-12


class InstanceError(ValueError):
    """An instance violates one of its invariants.

    ``code`` names the violated invariant and ``index`` (1-based) points at
    the offending entry when there is one.
    """

    def __init__(self, code: str, message: str, index: int | None = None):
        super().__init__(message)
        self.code = code
        self.index = index


@dataclass(frozen=True)
class ProblemInstance:
    """``n`` factors with bases ``c_1 > ... > c_n > 0`` and exponents
    ``mu_k > 0`` summing to ``rho <= 1``.

    Values are converted into ``domain`` on construction; ``order`` is
    the truncation order used when callers do not pass one.
    """

    c: tuple
    mu: tuple
    domain: Domain = EXACT
    order: int = DEFAULT_ORDER
    label: str | None = None
    min_gap: float = DEFAULT_MIN_GAP
    rho: object = field(init=False, compare=False)

    def __post_init__(self):
        c = tuple(_convert(self.domain, x, "c", i) for i, x in enumerate(self.c, 1))
        mu = tuple(_convert(self.domain, x, "mu", i) for i, x in enumerate(self.mu, 1))
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "mu", mu)
        if not c:
            raise InstanceError("empty", "an instance needs at least one factor")
        if len(c) != len(mu):
            raise InstanceError("length_mismatch", f"{len(c)} bases but {len(mu)} exponents")
        if self.order < 1:
            raise InstanceError("order", f"order must be >= 1, got {self.order}")
        dom = self.domain
        gap = 0 if dom.exact else self.min_gap
        with dom.arith():
            for i in range(1, len(c)):
                if not c[i - 1] - c[i] > gap:
                    what = "strictly descending" if dom.exact else f"descending with gap > {gap}"
                    raise InstanceError(
                        "ordering",
                        f"ordering violated at index {i + 1}: c_{i}={format_scalar(c[i - 1])} "
                        f"and c_{i + 1}={format_scalar(c[i])} are not {what}",
                        index=i + 1,
                    )
            if c[-1] <= 0:
                raise InstanceError("nonpositive_c", f"c_{len(c)} must be > 0", index=len(c))
            for i, m in enumerate(mu, 1):
                if m <= 0:
                    raise InstanceError("nonpositive_mu", f"mu_{i} = {format_scalar(m)} must be > 0", index=i)
            rho = dom.zero
            for m in mu:
                rho += m
            excess = rho - 1
        if sign_of(excess, dom.default_tol) > 0:
            raise InstanceError("rho_exceeds_one", f"rho = {format_scalar(rho)} > 1")
        object.__setattr__(self, "rho", rho)

    @property
    def n(self) -> int:
        return len(self.c)

    @property
    def theorem_applicable(self) -> bool:
        """True for n >= 2, or n = 1 with mu_1 < 1."""
        if self.n >= 2:
            return True
        with self.domain.arith():
            return sign_of(self.mu[0] - 1, self.domain.default_tol) < 0

    @property
    def rho_is_one(self) -> bool:
        with self.domain.arith():
            return sign_of(self.rho - 1, self.domain.default_tol) == 0

    def replace(self, c=None, mu=None, **kw) -> "ProblemInstance":
        return ProblemInstance(
            self.c if c is None else tuple(c),
            self.mu if mu is None else tuple(mu),
            kw.pop("domain", self.domain),
            kw.pop("order", self.order),
            kw.pop("label", self.label),
            kw.pop("min_gap", self.min_gap),
        )

    def scaled_mu(self, factor) -> "ProblemInstance":
        factor = self.domain.convert(factor)
        with self.domain.arith():
            return self.replace(mu=[factor * m for m in self.mu])

    def to_dict(self) -> dict:
        d = {
            "c": [format_scalar(x) for x in self.c],
            "mu": [format_scalar(x) for x in self.mu],
            "order": self.order,
            "domain": self.domain.name,
        }
        if not self.domain.exact:
            d["precision_bits"] = self.domain.precision
        if self.label is not None:
            d["label"] = self.label
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"


def _convert(domain: Domain, x, name: str, index: int):
    try:
        return domain.convert(x)
    except RationalFormatError as exc:
        raise InstanceError("malformed_rational", f"{name}_{index}: {exc}", index=index) from None
    except DomainError as exc:
        raise InstanceError("domain", f"{name}_{index}: {exc}", index=index) from None


def instance_from_dict(data: dict) -> ProblemInstance:
    if not isinstance(data, dict):
        raise InstanceError("schema", "instance JSON must be an object")
    for key in ("c", "mu"):
        if key not in data:
            raise InstanceError("schema", f"missing field {key!r}")
        if not isinstance(data[key], list) or not all(isinstance(v, str) for v in data[key]):
            raise InstanceError("schema", f"field {key!r} must be a list of rational strings")
    unknown = set(data) - {"c", "mu", "order", "domain", "precision_bits", "label"}
    if unknown:
        raise InstanceError("schema", f"unknown fields: {', '.join(sorted(unknown))}")
    try:
        domain = Domain.from_name(data.get("domain", "rational"), data.get("precision_bits"))
    except ValueError as exc:
        raise InstanceError("schema", str(exc)) from None
    order = data.get("order", DEFAULT_ORDER)
    if not isinstance(order, int) or isinstance(order, bool):
        raise InstanceError("schema", "field 'order' must be an integer")
    return ProblemInstance(data["c"], data["mu"], domain, order, data.get("label"))


def parse_instance(text: str) -> ProblemInstance:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceError("schema", f"invalid JSON: {exc}") from None
    return instance_from_dict(data)


def parse_instance_file(path) -> ProblemInstance:
    """Read and validate an instance file. I/O errors propagate as OSError."""
    path = Path(path)
    inst = parse_instance(path.read_text())
    if inst.label is None:
        inst = inst.replace(label=path.stem)
    return inst


# --- products --------------------------------------------------------------


def factor_products(c: Sequence, mu: Sequence, order: int, domain: Domain) -> list[TruncatedSeries]:
    """``[L_1, ..., L_n]`` for raw parameter lists, no instance validation.

    Used directly when checking substitutions such as ``c_n = 0`` that a
    valid instance cannot express.
    """
    out = []
    acc = one(order, domain)
    for cj, mj in zip(c, mu):
        acc = mul(acc, binomial_factor(cj, mj, order, domain))
        out.append(acc)
    return out


def partial_products(inst: ProblemInstance, order: int | None = None) -> list[TruncatedSeries]:
    return factor_products(inst.c, inst.mu, order or inst.order, inst.domain)


def partial_product(inst: ProblemInstance, k: int, order: int | None = None) -> TruncatedSeries:
    """``L_k``, the product of the first ``k`` factors."""
    if not 1 <= k <= inst.n:
        raise IndexError(f"k = {k} outside 1..{inst.n}")
    return factor_products(inst.c[:k], inst.mu[:k], order or inst.order, inst.domain)[-1]


def log_exp_product(inst: ProblemInstance, order: int | None = None) -> TruncatedSeries:
    """``L_n`` computed as exp(sum_j mu_j log(1 - c_j t)); independent of
    the binomial recurrence and the Cauchy products."""
    order = order or inst.order
    dom = inst.domain
    total = [dom.zero] * (order + 1)
    with dom.arith():
        for cj, mj in zip(inst.c, inst.mu):
            lin = TruncatedSeries((dom.one, -cj) + (dom.zero,) * (order - 1), dom)
            lg = log_series(lin)
            total = [s + mj * a for s, a in zip(total, lg)]
    return exp_series(TruncatedSeries(tuple(total), dom))


@dataclass(frozen=True)
class DCoefficients:
    """``D_1 .. D_N``; ``d[j - 1]`` holds ``D_j``. Index with ``D[j]``."""

    d: tuple
    domain: Domain = EXACT
    source: ProblemInstance | None = None

    def __post_init__(self):
        object.__setattr__(self, "d", tuple(self.domain.convert(x) for x in self.d))

    @property
    def order(self) -> int:
        return len(self.d)

    def __getitem__(self, j: int):
        if not 1 <= j <= len(self.d):
            raise IndexError(f"D index {j} outside 1..{len(self.d)}")
        return self.d[j - 1]

    def __iter__(self):
        return iter(self.d)

    def __len__(self):
        return len(self.d)

    def as_series(self) -> TruncatedSeries:
        """``1 - sum_j D_j t**j``."""
        with self.domain.arith():
            return TruncatedSeries((self.domain.one,) + tuple(-x for x in self.d), self.domain)

    @classmethod
    def from_series(cls, L: TruncatedSeries, source: ProblemInstance | None = None) -> "DCoefficients":
        with L.domain.arith():
            return cls(tuple(-x for x in L.coeffs[1:]), L.domain, source)


def d_series(inst: ProblemInstance, order: int | None = None) -> DCoefficients:
    L = partial_product(inst, inst.n, order)
    return DCoefficients.from_series(L, inst)


@dataclass(frozen=True)
class Verdict:
    all_positive: bool
    first_failure: int | None
    min_index: int
    min_value: object
    order: int
    theorem_applicable: bool | None = None

    @property
    def excluded_case(self) -> bool:
        return self.theorem_applicable is False

    @property
    def status(self) -> str:
        if self.all_positive:
            return "pass"
        if self.excluded_case:
            return "excluded case"
        return "fail"

    def to_dict(self) -> dict:
        return {
            "status": self.status,
            "all_positive": self.all_positive,
            "first_failure": self.first_failure,
            "min_D_index": self.min_index,
            "min_D_value": format_scalar(self.min_value),
            "order": self.order,
            "theorem_applicable": self.theorem_applicable,
        }


def verify_positivity(D: DCoefficients, tol=None) -> Verdict:
    """Check D_j > 0 for every computed j; report the smallest failing index."""
    if tol is None:
        tol = D.domain.default_tol
    first = None
    min_idx, min_val = 1, D.d[0]
    for j, x in enumerate(D.d, 1):
        if first is None and sign_of(x, tol) <= 0:
            first = j
        if x < min_val:
            min_idx, min_val = j, x
    applicable = D.source.theorem_applicable if D.source is not None else None
    return Verdict(first is None, first, min_idx, min_val, D.order, applicable)


def d1_closed_form(inst: ProblemInstance):
    """sum_j c_j mu_j."""
    dom = inst.domain
    with dom.arith():
        acc = dom.zero
        for cj, mj in zip(inst.c, inst.mu):
            acc += cj * mj
    return acc


def scale_rho(D: DCoefficients, rho_prime) -> DCoefficients:
    """Coefficients of ``(1 - sum D_j t**j)**rho'`` for a rho = 1 source."""
    dom = D.domain
    rho_prime = dom.convert(rho_prime)
    if not 0 < rho_prime < 1:
        raise ValueError(f"rho' must lie in (0, 1), got {format_scalar(rho_prime)}")
    if D.source is not None and not D.source.rho_is_one:
        raise ValueError(f"source instance has rho = {format_scalar(D.source.rho)}, expected 1")
    scaled = power(D.as_series(), rho_prime)
    source = D.source.scaled_mu(rho_prime) if D.source is not None else None
    return DCoefficients.from_series(scaled, source)


def reduce_drop_zero(inst: ProblemInstance) -> ProblemInstance:
    """Remove the last factor, which is what ``c_n = 0`` amounts to."""
    if inst.n == 1:
        raise ValueError("cannot drop the only factor")
    return inst.replace(c=inst.c[:-1], mu=inst.mu[:-1])


def reduce_merge_equal(inst: ProblemInstance) -> ProblemInstance:
    """Fold the last factor into the previous one, as if ``c_n = c_{n-1}``."""
    if inst.n <= 1:
        raise ValueError("merging needs at least two factors")
    with inst.domain.arith():
        merged = inst.mu[-2] + inst.mu[-1]
    return inst.replace(c=inst.c[:-1], mu=inst.mu[:-2] + (merged,))


def substituted_d(inst: ProblemInstance, last_c, order: int | None = None) -> DCoefficients:
    """D series of ``inst`` with ``c_n`` replaced by ``last_c`` (no ordering check)."""
    c = inst.c[:-1] + (inst.domain.convert(last_c),)
    L = factor_products(c, inst.mu, order or inst.order, inst.domain)[-1]
    return DCoefficients.from_series(L, None)
