"""
BFMLIFT — Command-line front end

    bfmlift run <job.json> [--seed N] [--novikov unit|formal] [--assume-reduced]
                           [--budget STEPS] [--emit report.json|plots]...
    bfmlift validate <job.json>
    bfmlift schema

The report goes to stdout unless --emit names a file; logs and the rich
summary go to stderr. Exit codes: 0 pass, 1 input error, 2 obstructed or
failed, 3 inconclusive or budget exceeded.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import List, Optional, Sequence

import orjson
import structlog
from rich.console import Console
from rich.markup import escape
from rich.table import Table

from bfmlift.core.config import get_settings
from bfmlift.core.exceptions import BfmliftError, GroebnerBudgetExceeded, JobValidationError
from bfmlift.core.observability import configure_logging, get_metrics
from bfmlift.core.schemas import (
    JobSpec,
    NovikovModeEnum,
    PresentationEnum,
    Report,
    StageEnum,
    job_json_schema,
    parse_job,
    semantic_diagnostics,
    validate_document,
)
from bfmlift.services import pipeline

logger = structlog.get_logger(__name__)

PLOTS = "plots"


def _read(path: Path) -> bytes:
    try:
        return path.read_bytes()
    except OSError as e:
        raise JobValidationError([f"{path}: {e.strerror or e}"], "cannot read job document") from None


def _stages(value: str) -> List[StageEnum]:
    try:
        return [StageEnum(s.strip()) for s in value.split(",") if s.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"invalid stage list {value!r}; choose from {', '.join(s.value for s in StageEnum)}"
        ) from None


def apply_overrides(job: JobSpec, args: argparse.Namespace) -> JobSpec:
    """Command-line flags win over the job's options."""
    update = {}
    if args.seed is not None:
        update["seed"] = args.seed
    if args.novikov is not None:
        update["novikov"] = NovikovModeEnum(args.novikov)
    if args.assume_reduced:
        update["assume_reduced"] = True
    if args.budget is not None:
        update["budget"] = args.budget
    if args.stages is not None:
        update["stages"] = args.stages
    if args.presentation is not None:
        update["presentation"] = PresentationEnum(args.presentation)
    if not update:
        return job
    return job.model_copy(update={"options": job.options.model_copy(update=update)})


# ============================================
# SUMMARY
# ============================================

def print_summary(report: Report, console: Console) -> None:
    table = Table(title=f"bfmlift {report.tool.version}", show_lines=False)
    table.add_column("check")
    table.add_column("result")
    table.add_column("detail", overflow="fold")

    if report.mirror:
        table.add_row("superpotential", "", report.mirror.superpotential)
        table.add_row("image ideal", "", ", ".join(report.mirror.image or ["(budget exceeded)"]))
    if report.weyl:
        table.add_row("Weyl invariance", report.weyl.verdict, report.weyl.reason or "")
    if report.lift:
        for c in report.lift.certificates:
            detail = f"cofactor {c.cofactor}" if c.cofactor else (c.reason or "")
            table.add_row(f"root {c.root}", c.status, detail)
        table.add_row("lift", report.lift.verdict, f"normality {report.lift.normality}")
    if report.verify:
        crit = report.verify.critical
        table.add_row("critical points", crit.status, f"{len(crit.points)} via {crit.method}")
        morse = [m.morse for m in crit.morse]
        if morse:
            table.add_row("Morse", "yes" if all(morse) else "no", f"{sum(morse)}/{len(morse)} non-degenerate")
        for s in report.verify.constrained:
            ok = all(k.ok for k in s.kernel)
            table.add_row(s.constraint, "pass" if ok else "fail", f"{len(s.points)} points, {s.status}")
        table.add_row("verify", report.verify.verdict, "")
    v = report.verdict
    style = {0: "green", 2: "red", 3: "yellow"}.get(v.exit_code, "")
    table.add_row("overall", f"[{style}]{v.overall}[/{style}]" if style else v.overall, f"exit {v.exit_code}")
    console.print(table)


# ============================================
# COMMANDS
# ============================================

def cmd_run(args: argparse.Namespace, err: Console) -> int:
    job = apply_overrides(parse_job(_read(args.job)), args)
    problems = semantic_diagnostics(job)
    if problems:
        raise JobValidationError(problems)

    report = pipeline.run(job, timing=not args.no_timing)
    logger.debug("run_metrics", **get_metrics().snapshot())
    payload = report.to_json()

    report_paths = [Path(e) for e in args.emit if e != PLOTS]
    if report_paths:
        for path in report_paths:
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_bytes(payload + b"\n")
            logger.info("report_written", path=str(path))
    else:
        sys.stdout.buffer.write(payload + b"\n")
        sys.stdout.flush()

    if PLOTS in args.emit:
        from bfmlift.services.plots import critical_plot

        folder = report_paths[0].parent if report_paths else Path.cwd()
        try:
            critical_plot(report, folder / f"{args.job.stem}.critical.svg")
        except ValueError as e:
            logger.warning("plot_skipped", reason=str(e))

    if not args.quiet:
        print_summary(report, err)
    return report.verdict.exit_code


def cmd_validate(args: argparse.Namespace, err: Console) -> int:
    try:
        diagnostics = validate_document(_read(args.job))
    except JobValidationError as e:
        diagnostics = e.diagnostics
    sys.stdout.buffer.write(orjson.dumps({"valid": not diagnostics, "diagnostics": diagnostics},
                                         option=orjson.OPT_INDENT_2) + b"\n")
    return pipeline.EXIT_OK if not diagnostics else pipeline.EXIT_INPUT


def cmd_schema(args: argparse.Namespace, err: Console) -> int:
    sys.stdout.buffer.write(orjson.dumps(job_json_schema(), option=orjson.OPT_INDENT_2) + b"\n")
    return pipeline.EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bfmlift", description="Toric SYZ Lagrangians and their BFM lift")
    parser.add_argument("--version", action="version", version=f"%(prog)s {get_settings().version}")
    parser.add_argument("--log-level", default=None, help="Override BFMLIFT_LOG_LEVEL")
    parser.add_argument("--log-console", action="store_true", help="Human-readable logs instead of JSON")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="Run a job document and emit its report")
    run.add_argument("job", type=Path)
    run.add_argument("--seed", type=int, default=None)
    run.add_argument("--novikov", choices=[m.value for m in NovikovModeEnum], default=None)
    run.add_argument("--assume-reduced", action="store_true")
    run.add_argument("--budget", type=int, default=None, help="Groebner step bound (default BFMLIFT_BUDGET)")
    run.add_argument("--stages", type=_stages, default=None, help="Comma list of mirror,lift,verify,all")
    run.add_argument("--presentation", choices=[p.value for p in PresentationEnum], default=None)
    run.add_argument("--emit", action="append", default=[], metavar="report.json|plots",
                     help="Write the report to a file, or 'plots' for the critical-value SVG; repeatable")
    run.add_argument("--no-timing", action="store_true", help="Omit the timing section")
    run.add_argument("--quiet", action="store_true", help="No summary table on stderr")
    run.set_defaults(handler=cmd_run)

    validate = sub.add_parser("validate", help="Check a job document without running any algebra")
    validate.add_argument("job", type=Path)
    validate.set_defaults(handler=cmd_validate)

    schema = sub.add_parser("schema", help="Print the job document JSON schema")
    schema.set_defaults(handler=cmd_schema)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    settings = get_settings()
    configure_logging(args.log_level or settings.log_level, json=settings.log_json and not args.log_console)
    err = Console(stderr=True)
    try:
        return args.handler(args, err)
    except JobValidationError as e:
        for line in e.diagnostics:
            err.print(f"[red]error[/red] {escape(line)}", highlight=False)
        return pipeline.EXIT_INPUT
    except GroebnerBudgetExceeded as e:
        err.print(f"[yellow]inconclusive[/yellow] {escape(str(e))}", highlight=False)
        return pipeline.EXIT_INCONCLUSIVE
    except BfmliftError as e:
        err.print(f"[red]error[/red] {escape(str(e))}", highlight=False)
        return pipeline.EXIT_INPUT


if __name__ == "__main__":
    raise SystemExit(main())
