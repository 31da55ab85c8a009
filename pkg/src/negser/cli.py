"""``negser`` command line.

Exit codes: 0 pass, 1 theorem failure, 2 usage or invalid input, 3 I/O.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import reports
from .numeric import Domain, RationalFormatError, widen
from .sweep import SweepConfig, report_csv, run_sweep, summary_json
from .theorem import DCoefficients, InstanceError, ProblemInstance, d_series, parse_instance_file

log = logging.getLogger("negser")


class UsageError(Exception):
    pass


def _range(text: str) -> tuple[int, int]:
    try:
        a, b = text.split("..")
        return int(a), int(b)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected A..B, got {text!r}") from None


def _ladder(text: str) -> tuple[int, int]:
    try:
        a, b = text.split(",")
        start, steps = int(a), int(b)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected START,STEPS, got {text!r}") from None
    if start < 0 or steps < 2:
        raise argparse.ArgumentTypeError("ladder needs START >= 0 and STEPS >= 2")
    return start, steps


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="negser", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def instance_cmd(name, help_):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("instance", help="instance JSON file")
        sp.add_argument("--order", type=int, help="truncation order (default: the file's)")
        sp.add_argument("--domain", choices=("rational", "float"), help="override the file's domain")
        sp.add_argument("--precision", type=int, help="float mantissa bits (default 128)")
        sp.add_argument("--out", help="output file (default: stdout)")
        return sp

    instance_cmd("coeffs", "write D_1..D_N as CSV")
    v = instance_cmd("verify", "check D_j > 0 for j <= N")
    v.add_argument("--d-override", help=argparse.SUPPRESS)

    a = instance_cmd("analyze-cn", "treat c_n as a variable: endpoint signs, roots, rates")
    a.add_argument("--m-range", type=_range, help="A..B (default 1..order)")
    a.add_argument("--grid", type=int, default=reports.DEFAULT_GRID, help="root scan grid cells")

    pt = instance_cmd("perturb", "first-order bound on -D_m along an eps ladder")
    pt.add_argument("--m", type=int, required=True)
    pt.add_argument("--eps-ladder", type=_ladder, default=(10, 11),
                    help="START,STEPS: eps = 2^-START .. 2^-(START+STEPS-1)")

    s = sub.add_parser("sweep", help="seeded random verification sweep")
    s.add_argument("--config", help="JSON file with SweepConfig fields")
    s.add_argument("--seed", type=int)
    s.add_argument("--count", type=int)
    s.add_argument("--order", type=int)
    s.add_argument("--n-range", type=_range)
    s.add_argument("--rho", help="'1' (default), 'random', or a rational in (0, 1)")
    s.add_argument("--domain", choices=("rational", "float"))
    s.add_argument("--precision", type=int)
    s.add_argument("--workers", type=int, help="worker processes (capped by NEGSER_THREADS)")
    s.add_argument("--timing", action="store_true", help="fill elapsed_micros (breaks byte determinism)")
    s.add_argument("--out", required=True, help="output directory")
    return p


def _load(args) -> ProblemInstance:
    inst = parse_instance_file(args.instance)
    if args.order is not None:
        if args.order < 1:
            raise UsageError("--order must be >= 1")
        inst = inst.replace(order=args.order)
    if args.domain is not None or args.precision is not None:
        dom = Domain.from_name(args.domain or inst.domain.name, args.precision)
        if dom != inst.domain:
            inst = _redomain(inst, dom)
    return inst


def _redomain(inst: ProblemInstance, dom: Domain) -> ProblemInstance:
    if not inst.domain.exact:
        raise UsageError("only rational instances can be moved to another domain")
    return inst.replace(c=[widen(x, dom.precision) for x in inst.c],
                        mu=[widen(x, dom.precision) for x in inst.mu], domain=dom)


def _emit(text: str, out: str | None):
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def cmd_coeffs(args) -> int:
    inst = _load(args)
    _emit(reports.coeffs_csv(d_series(inst)), args.out)
    return reports.EXIT_OK


def cmd_verify(args) -> int:
    inst = _load(args)
    override = None
    if args.d_override:
        values = json.loads(Path(args.d_override).read_text())
        override = DCoefficients(tuple(values), inst.domain, inst)
    code, text, verdict = reports.verify_report(inst, d_override=override)
    if verdict.excluded_case and code == reports.EXIT_OK and not verdict.all_positive:
        log.warning("%s: excluded case (n = 1, mu_1 = 1)", inst.label)
    _emit(text, args.out)
    return code


def cmd_analyze_cn(args) -> int:
    inst = _load(args)
    lo, hi = args.m_range or (1, inst.order)
    _emit(reports.analyze_cn_csv(inst, lo, hi, args.grid), args.out)
    return reports.EXIT_OK


def cmd_perturb(args) -> int:
    inst = _load(args)
    start, steps = args.eps_ladder
    _emit(reports.perturb_report(inst, args.m, start, steps), args.out)
    return reports.EXIT_OK


def sweep_config(args) -> SweepConfig:
    data = {}
    if args.config:
        data = json.loads(Path(args.config).read_text())
    for key, val in (("seed", args.seed), ("count", args.count), ("order", args.order),
                     ("n_range", args.n_range), ("domain", args.domain),
                     ("precision_bits", args.precision)):
        if val is not None:
            data[key] = val
    if args.rho is not None:
        if args.rho in ("1", "one"):
            data["rho_mode"], data["rho_value"] = "exactly_one", None
        elif args.rho == "random":
            data["rho_mode"], data["rho_value"] = "random", None
        else:
            data["rho_mode"], data["rho_value"] = "strict_less", args.rho
    try:
        return SweepConfig.from_dict(data)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"bad sweep config: {exc}") from None


def cmd_sweep(args) -> int:
    config = sweep_config(args)
    result = run_sweep(config, args.workers)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.csv").write_text(report_csv(result, args.timing))
    (out / "summary.json").write_text(summary_json(result, args.timing))
    failures = result.failures
    if failures and config.dom.exact:
        repro = out / "reproducers"
        repro.mkdir(exist_ok=True)
        for r in failures:
            (repro / f"instance-{r.instance_id}.json").write_text(r.instance.to_json())
        log.error("%d counterexample(s); reproducers in %s", len(failures), repro)
    for r in result.records:
        if r.error:
            log.error("instance %d: %s", r.instance_id, r.error)
    return reports.EXIT_THEOREM_FAILURE if failures else reports.EXIT_OK


COMMANDS = {
    "coeffs": cmd_coeffs,
    "verify": cmd_verify,
    "analyze-cn": cmd_analyze_cn,
    "perturb": cmd_perturb,
    "sweep": cmd_sweep,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0) and reports.EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except InstanceError as exc:
        print(f"error[{exc.code}]: {exc}", file=sys.stderr)
        return reports.EXIT_USAGE
    except (UsageError, RationalFormatError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return reports.EXIT_USAGE
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return reports.EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
