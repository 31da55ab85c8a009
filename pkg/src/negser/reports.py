"""Text outputs of the command-line tools, built as plain strings so the
same bytes can be produced from library code."""

from __future__ import annotations

import csv
import io
import json

from .cn import (
    PerturbationRecord,
    PreconditionError,
    cn_polynomial,
    endpoint_signs,
    isolate_largest_root,
    perturb_ladder,
    perturbation_rates,
    DEFAULT_GRID,
)
from .numeric import format_scalar
from .theorem import DCoefficients, ProblemInstance, Verdict, d_series, verify_positivity

EXIT_OK = 0
EXIT_THEOREM_FAILURE = 1
EXIT_USAGE = 2
EXIT_IO = 3

ANALYZE_COLUMNS = ("instance_id", "m", "endpoint_sign_0", "endpoint_sign_prev", "root_found",
                   "rate", "bound_term", "satisfied")


def _writer(buf):
    return csv.writer(buf, lineterminator="\n")


def coeffs_csv(D: DCoefficients) -> str:
    buf = io.StringIO()
    w = _writer(buf)
    w.writerow(("j", "D_j"))
    for j, x in enumerate(D, 1):
        w.writerow((j, format_scalar(x)))
    return buf.getvalue()


def verify_report(inst: ProblemInstance, order: int | None = None,
                  d_override: DCoefficients | None = None) -> tuple[int, str, Verdict]:
    """Exit code, verdict JSON and the verdict itself.

    ``d_override`` replaces the computed coefficients; it exists so the
    failure path can be exercised with a hand-made series.
    """
    D = d_override if d_override is not None else d_series(inst, order)
    if D.source is None:
        D = DCoefficients(D.d, D.domain, inst)
    verdict = verify_positivity(D)
    body = {"instance": inst.label, "n": inst.n, "rho": format_scalar(inst.rho)}
    body.update(verdict.to_dict())
    code = EXIT_OK
    if not verdict.all_positive:
        tail_zero = all(x == 0 for x in D.d[1:])
        if verdict.excluded_case and tail_zero:
            body["warning"] = "theorem hypotheses exclude n = 1 with mu_1 = 1; D_j = 0 for j >= 2"
        else:
            if verdict.excluded_case:
                body["status"] = "fail"
            code = EXIT_THEOREM_FAILURE
    return code, json.dumps(body, indent=2, sort_keys=True) + "\n", verdict


def analyze_cn_csv(inst: ProblemInstance, m_lo: int = 1, m_hi: int | None = None,
                   grid: int = DEFAULT_GRID) -> str:
    """One row per m: endpoint signs of -D_m, rightmost sign change of D_m
    on [0, c_{n-1}], and the first-order rate against its bound."""
    if m_hi is None:
        m_hi = inst.order
    if not 1 <= m_lo <= m_hi:
        raise ValueError(f"bad m range {m_lo}..{m_hi}")
    D = d_series(inst, m_hi)
    buf = io.StringIO()
    w = _writer(buf)
    w.writerow(ANALYZE_COLUMNS)
    ident = inst.label or ""
    for m in range(m_lo, m_hi + 1):
        poly = cn_polynomial(inst, m)
        s0, sp = endpoint_signs(poly)
        bracket = isolate_largest_root(poly, 0, poly.c_prev, grid=grid)
        root = "none" if bracket is None else f"{format_scalar(bracket[0])}..{format_scalar(bracket[1])}"
        rate = bound = sat = ""
        if m >= 2:
            try:
                r, b = perturbation_rates(inst, m, D)
                rate, bound, sat = format_scalar(r), format_scalar(b), "true" if r >= b else "false"
            except PreconditionError:
                sat = "n/a"
        w.writerow((ident, m, s0, sp, root, rate, bound, sat))
    return buf.getvalue()


def perturb_csv(records: list[PerturbationRecord]) -> str:
    buf = io.StringIO()
    w = _writer(buf)
    w.writerow(PerturbationRecord.FIELDS)
    for rec in records:
        w.writerow(rec.row())
    return buf.getvalue()


def perturb_report(inst: ProblemInstance, m: int, start: int, steps: int) -> str:
    return perturb_csv(perturb_ladder(inst, m, start, steps))
