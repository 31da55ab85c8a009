"""Seeded random instances, bulk verification and the fixed boundary set."""

from __future__ import annotations

import csv
import io
import json
import os
import random
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from functools import partial

from gmpy2 import mpq

from .numeric import EXACT, Domain, format_scalar, sign_of, widen
from .theorem import (
    DCoefficients,
    ProblemInstance,
    Verdict,
    d1_closed_form,
    d_series,
    reduce_drop_zero,
    reduce_merge_equal,
    scale_rho,
    verify_positivity,
)

C_DRAW_MAX = 10**4
C_SCALE = 10**3
WEIGHT_MAX = 10**3
RHO_MODES = ("exactly_one", "strict_less", "random")
FLOAT_REL_TOL = mpq(1, 10**20)

REPORT_COLUMNS = ("instance_id", "n", "rho", "order", "domain", "min_D_index", "min_D_value",
                  "all_positive", "lemma2_ok", "lemma1_ok", "elapsed_micros")


@dataclass(frozen=True)
class SweepConfig:
    n_range: tuple = (2, 5)
    rho_mode: str = "exactly_one"
    rho_value: str | None = None
    order: int = 40
    count: int = 100
    seed: int = 7
    domain: str = "rational"
    precision_bits: int | None = None

    def __post_init__(self):
        lo, hi = self.n_range
        object.__setattr__(self, "n_range", (int(lo), int(hi)))
        if lo < 1 or hi < lo:
            raise ValueError(f"bad n_range {self.n_range}")
        if self.count < 1:
            raise ValueError("count must be >= 1")
        if self.order < 1:
            raise ValueError("order must be >= 1")
        if self.rho_mode not in RHO_MODES:
            raise ValueError(f"rho_mode must be one of {RHO_MODES}")
        if self.rho_mode == "strict_less":
            if self.rho_value is None:
                raise ValueError("strict_less needs rho_value")
            if not 0 < self.rho_fixed <= 1:
                raise ValueError("rho_value must lie in (0, 1]")
        Domain.from_name(self.domain, self.precision_bits)

    @property
    def rho_fixed(self):
        return EXACT.convert(str(self.rho_value))

    @property
    def dom(self) -> Domain:
        return Domain.from_name(self.domain, self.precision_bits)

    @classmethod
    def from_dict(cls, data: dict) -> "SweepConfig":
        data = dict(data)
        if "n_range" in data:
            data["n_range"] = tuple(data["n_range"])
        if data.get("rho_value") is not None:
            data["rho_value"] = str(data["rho_value"])
        return cls(**data)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["n_range"] = list(self.n_range)
        return d


@dataclass
class SweepRecord:
    instance_id: int
    instance: ProblemInstance | None
    verdict: Verdict | None
    lemma2_ok: bool | None
    lemma1_ok: bool | None
    elapsed_micros: int
    error: str | None = None

    @property
    def excluded(self) -> bool:
        return self.instance is not None and not self.instance.theorem_applicable

    @property
    def failed(self) -> bool:
        """A theorem-applicable instance with some D_j <= 0."""
        return self.verdict is not None and not self.excluded and not self.verdict.all_positive


@dataclass
class SweepResult:
    config: SweepConfig
    records: list = field(default_factory=list)

    @property
    def failures(self) -> list:
        return [r for r in self.records if r.failed]

    def summary(self) -> dict:
        recs = self.records
        ok = [r for r in recs if r.verdict is not None]
        best = None
        for r in ok:
            if r.excluded:
                continue
            if best is None or r.verdict.min_value < best.verdict.min_value:
                best = r
        return {
            "config": self.config.to_dict(),
            "instances": len(recs),
            "failures": len(self.failures),
            "failure_ids": [r.instance_id for r in self.failures],
            "excluded": sum(r.excluded for r in recs),
            "errors": sum(r.error is not None for r in recs),
            "lemma2_failures": sum(r.lemma2_ok is False for r in recs),
            "lemma1_failures": sum(r.lemma1_ok is False for r in recs),
            "lemma1_checked": sum(r.lemma1_ok is not None for r in recs),
            "global_min_D": None if best is None else {
                "instance_id": best.instance_id,
                "index": best.verdict.min_index,
                "value": format_scalar(best.verdict.min_value),
            },
        }


def instance_rng(seed: int, instance_id: int) -> random.Random:
    """Independent stream per (seed, instance_id); string seeding is
    hashed with SHA-512 and so is stable across platforms."""
    return random.Random(f"negser:{seed}:{instance_id}")


def random_instance(rng: random.Random, config: SweepConfig, label: str | None = None) -> ProblemInstance:
    n = rng.randint(*config.n_range)
    ints: set[int] = set()
    while len(ints) < n:
        ints.add(rng.randint(1, C_DRAW_MAX))
    c = [mpq(k, C_SCALE) for k in sorted(ints, reverse=True)]
    w = [rng.randint(1, WEIGHT_MAX) for _ in range(n)]
    if config.rho_mode == "exactly_one":
        rho = mpq(1)
    elif config.rho_mode == "strict_less":
        rho = config.rho_fixed
    else:
        rho = mpq(rng.randint(1, 1000), 1000)
    total = sum(w)
    mu = [rho * wk / total for wk in w]
    dom = config.dom
    if not dom.exact:
        c = [widen(x, dom.precision) for x in c]
        mu = [widen(x, dom.precision) for x in mu]
    return ProblemInstance(tuple(c), tuple(mu), dom, config.order, label)


def _agree(a, b, dom: Domain) -> bool:
    if dom.exact:
        return a == b
    with dom.arith():
        return abs(a - b) <= FLOAT_REL_TOL * max(1, abs(b))


def lemma2_holds(inst: ProblemInstance, D: DCoefficients) -> bool:
    d1 = D[1]
    if not _agree(d1, d1_closed_form(inst), inst.domain):
        return False
    if inst.rho_is_one:
        with inst.domain.arith():
            return sign_of(d1 - inst.c[-1], inst.domain.default_tol) > 0
    return True


def lemma1_holds(inst: ProblemInstance, D: DCoefficients) -> bool | None:
    """Compare the direct D series of a rho < 1 instance with the rescaled
    series of its rho = 1 normalization. ``None`` when rho = 1."""
    if inst.rho_is_one:
        return None
    dom = inst.domain
    with dom.arith():
        normal = inst.scaled_mu(1 / inst.rho)
    via = scale_rho(d_series(normal, D.order), inst.rho)
    return all(_agree(a, b, dom) for a, b in zip(via, D))


def evaluate_instance(config: SweepConfig, instance_id: int) -> SweepRecord:
    t0 = time.perf_counter()
    inst = None
    try:
        inst = random_instance(instance_rng(config.seed, instance_id), config, f"sweep-{instance_id}")
        D = d_series(inst, config.order)
        verdict = verify_positivity(D)
        l2 = lemma2_holds(inst, D)
        l1 = lemma1_holds(inst, D)
        err = None
    except Exception as exc:  # recorded, never fatal for the sweep
        verdict, l2, l1, err = None, None, None, f"{type(exc).__name__}: {exc}"
    micros = int((time.perf_counter() - t0) * 1e6)
    return SweepRecord(instance_id, inst, verdict, l2, l1, micros, err)


def resolve_workers(workers: int | None = None) -> int:
    cap = os.environ.get("NEGSER_THREADS")
    n = workers or os.cpu_count() or 1
    if cap:
        n = min(n, max(1, int(cap)))
    return max(1, n)


def run_sweep(config: SweepConfig, workers: int | None = None) -> SweepResult:
    """Evaluate ``config.count`` instances; records come back in id order
    whatever the scheduling."""
    ids = range(config.count)
    job = partial(evaluate_instance, config)
    n = resolve_workers(workers)
    if n == 1:
        records = [job(i) for i in ids]
    else:
        with ProcessPoolExecutor(max_workers=n) as pool:
            records = list(pool.map(job, ids, chunksize=max(1, config.count // (4 * n))))
    records.sort(key=lambda r: r.instance_id)
    return SweepResult(config, records)


def _flag(v) -> str:
    return "" if v is None else ("true" if v else "false")


def report_csv(result: SweepResult, timing: bool = False) -> str:
    """Per-instance CSV. Timing is left blank unless asked for, so the
    default report is a pure function of the config."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(REPORT_COLUMNS)
    cfg = result.config
    for r in result.records:
        inst, v = r.instance, r.verdict
        w.writerow([
            r.instance_id,
            inst.n if inst else "",
            format_scalar(inst.rho) if inst else "",
            cfg.order,
            cfg.dom.name,
            v.min_index if v else "",
            format_scalar(v.min_value) if v else "",
            _flag(v.all_positive if v else None),
            _flag(r.lemma2_ok),
            _flag(r.lemma1_ok),
            r.elapsed_micros if timing else "",
        ])
    return buf.getvalue()


def summary_json(result: SweepResult, timing: bool = False) -> str:
    s = result.summary()
    if timing:
        s["elapsed_micros_total"] = sum(r.elapsed_micros for r in result.records)
    return json.dumps(s, indent=2, sort_keys=True) + "\n"


@dataclass(frozen=True)
class BoundaryCase:
    """A stress instance and the instance it should be compared with."""

    label: str
    instance: ProblemInstance
    counterpart: ProblemInstance
    relation: str  # "near_merge", "near_drop", "rho_scaled", "tight_gaps"


def boundary_suite(order: int = 40) -> list[BoundaryCase]:
    q = mpq
    tiny = q(1, 10**6)
    cases = []

    near = ProblemInstance((2, 1, 1 - tiny), (q(1, 3), q(1, 3), q(1, 3)), order=order, label="near-merge-n3")
    cases.append(BoundaryCase(near.label, near, reduce_merge_equal(near), "near_merge"))
    near2 = ProblemInstance((1, 1 - tiny), (q(1, 2), q(1, 2)), order=order, label="near-merge-n2")
    cases.append(BoundaryCase(near2.label, near2, reduce_merge_equal(near2), "near_merge"))
    near2b = ProblemInstance((3, 3 - tiny), (q(1, 4), q(3, 4)), order=order, label="near-merge-n2-skew")
    cases.append(BoundaryCase(near2b.label, near2b, reduce_merge_equal(near2b), "near_merge"))

    gaps = ProblemInstance((1 + 3 * tiny, 1 + 2 * tiny, 1 + tiny, 1), (q(1, 4),) * 4, order=order,
                           label="tight-gaps")
    cases.append(BoundaryCase(gaps.label, gaps, reduce_merge_equal(gaps), "tight_gaps"))

    small_mu = ProblemInstance((2, 1, q(1, 2)), (q(1, 2), q(1, 2) - tiny, tiny), order=order,
                               label="small-mu-n")
    cases.append(BoundaryCase(small_mu.label, small_mu, reduce_drop_zero(small_mu), "near_drop"))
    small_c = ProblemInstance((2, 1, tiny), (q(1, 3), q(1, 3), q(1, 3)), order=order, label="small-c-n")
    cases.append(BoundaryCase(small_c.label, small_c, reduce_drop_zero(small_c), "near_drop"))

    shape = ProblemInstance((3, 2, 1), (q(1, 2), q(1, 3), q(1, 6)), order=order, label="rho-one")
    almost = shape.scaled_mu(1 - tiny).replace(label="rho-almost-one")
    cases.append(BoundaryCase(almost.label, almost, shape, "rho_scaled"))
    return cases

