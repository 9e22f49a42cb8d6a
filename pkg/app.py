"""
Bohr Recurrence Lab - Command Line Application
Builds the S_m construction, its coloring and the projection to Z, and audits every checkable inequality
"""

import sys
import json
import argparse
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence

from pydantic import BaseModel, ValidationError as ModelValidationError

# Local imports
from circle_math import CircleOverflowError, sagitta
from construction import (
    CapacityError,
    ConstructionViolation,
    Params,
    ParamsError,
    eta,
    is_member,
    require_valid,
    sample,
    validate_params,
)
from coloring import PreconditionError, assert_blocked, cell_count
from bohr import NeedLargerM, TorusBohrSet, build_witness
from l1_space import DimensionError
from genpoly import GenPolyError, NilBohrNbhd, SpecialGenPoly
from projection import (
    ScheduleConfigError,
    build_schedule,
    density_check,
    enumerate_set,
    revalidate,
)
from verify import AuditError, ScheduleColorer, audit_3ap, cayley_audit, discrepancy, nilbohr_hit, recheck_hit
from config import ConfigError, RunConfig, config_manager
from data_processor import DataProcessor
from utils import setup_logging, InputValidator, ValidationError, DataExporter, ExportError

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_INPUT = 2

# Failures of a check the construction guarantees, or of a schedule precondition
CHECK_ERRORS = (
    ParamsError,
    CapacityError,
    ConstructionViolation,
    PreconditionError,
    NeedLargerM,
    ScheduleConfigError,
    CircleOverflowError,
    AuditError,
)

# Problems with what the user handed in
INPUT_ERRORS = (
    ConfigError,
    DimensionError,
    ValidationError,
    ModelValidationError,
    GenPolyError,
    json.JSONDecodeError,
    OSError,
    ExportError,
)

SQRT2_MINUS_1 = 2.0 ** 0.5 - 1.0


@dataclass
class RunContext:
    """Everything a command needs"""

    config: RunConfig
    command: str
    out_dir: Path
    workers: int
    seed: int
    record: bool
    scan_bound: int

    @property
    def params(self) -> Params:
        return self.config.params

    def emit(self, name: str, report: Any, extra_header: Optional[Dict[str, Any]] = None) -> Path:
        """Write the JSON envelope for report"""
        payload = DataExporter.envelope(report, self.command, self.config.fingerprint, extra_header)
        return DataExporter.to_json(payload, self.out_dir / DataExporter.get_filename(name, "json"))

    def table(self, name: str, df) -> Optional[Path]:
        if not self.config.output.write_csv:
            return None
        path = self.out_dir / DataExporter.get_filename(name, "csv")
        DataExporter.to_csv(df, path)
        return path


class SamplingSummary(BaseModel):
    """Torus-level harness over seeded samples"""

    seeds: int
    first_seed: int
    members: int
    blocked: int
    min_modulus: float
    max_modulus: float
    lower_bound: float
    upper_bound: float


def _read_json(path: str) -> Dict[str, Any]:
    with open(path, "r", encoding="utf-8") as handle:
        return json.load(handle)


def _schedule(ctx: RunContext):
    return build_schedule(ctx.config.schedule, ctx.params, ctx.scan_bound)


def _load_golden(ctx: RunContext) -> Dict[str, Any]:
    if not ctx.config.golden_path:
        return {}
    path = config_manager.resolve_relative(ctx.config.golden_path)
    if not path.exists():
        return {}
    return _read_json(str(path))


def _check_golden(ctx: RunContext, observed: Dict[str, Any]) -> bool:
    """
    Record observed values with --record, else compare them with the golden file

    Returns:
        False on a mismatch; absent golden entries are skipped
    """
    if not ctx.config.golden_path:
        return True
    path = config_manager.resolve_relative(ctx.config.golden_path)
    golden = _load_golden(ctx)

    if ctx.record:
        golden.update(observed)
        golden["scan_bound"] = ctx.scan_bound
        golden["generator"] = ctx.config.schedule.generator
        DataExporter.to_json(golden, path)
        logger.info(f"Recorded golden values {sorted(observed)} to {path}")
        return True

    if golden.get("scan_bound") != ctx.scan_bound or golden.get("generator") != ctx.config.schedule.generator:
        logger.warning("Golden file recorded for a different scan; comparison skipped")
        return True

    ok = True
    for key, value in observed.items():
        if key not in golden:
            logger.warning(f"No golden value for {key}; run with --record to add it")
            continue
        if golden[key] != value:
            logger.error(f"Golden mismatch for {key}: expected {golden[key]}, observed {value}")
            ok = False
    return ok


def cmd_validate(ctx: RunContext, args: argparse.Namespace) -> int:
    """Parameter clauses, eta policy and schedule certification"""
    p = ctx.params
    report = validate_params(p.delta1, p.delta2, p.tol)
    eta_value, underflow = eta(p.m, p.eta_policy)
    if underflow:
        logger.warning(f"eta_m underflows for m={p.m}; using 0")

    body: Dict[str, Any] = {
        "params": report.model_dump(mode="json"),
        "eta": {"value": eta_value, "underflow": underflow},
        "sagitta_delta1": sagitta(p.delta1),
        "color_cells": cell_count(p),
    }
    certified = False
    if report.valid:
        sched = _schedule(ctx)
        certificate = sched.decay_certificate()
        certified = bool(certificate["certified"])
        body["schedule"] = {
            "generator": sched.generator,
            "truncation": sched.m,
            "tail_bound": sched.tail_bound,
            "ratio_bound": sched.ratio_bound,
            "fingerprint": sched.fingerprint,
            "decay": certificate,
        }
    ctx.emit("validate", body)

    if not report.valid:
        print(f"validate: FAILED clause ({report.failed_clause}): {report.message}")
        return EXIT_FAILED
    if not certified:
        print("validate: FAILED schedule decay certificate")
        return EXIT_FAILED
    print(f"validate: OK (lower margin {report.lower_margin:.6g}, upper margin {report.upper_margin:.6g})")
    return EXIT_OK


def cmd_sample(ctx: RunContext, args: argparse.Namespace) -> int:
    """Seeded S_m samples: membership round-trip and the second-difference window"""
    p = ctx.params
    seeds = ctx.config.scan.sample_seeds
    members = 0
    blocked = 0
    moduli: List[float] = []
    lower = upper = 0.0
    for offset in range(seeds):
        s = sample(p, ctx.seed + offset)
        if is_member(s, p).is_member:
            members += 1
        x = sample(p, ctx.seed + seeds + offset)
        record = assert_blocked(x, s, p)
        blocked += int(record.blocked)
        moduli.append(record.modulus)
        lower, upper = record.lower_bound, record.upper_bound

    summary = SamplingSummary(
        seeds=seeds,
        first_seed=ctx.seed,
        members=members,
        blocked=blocked,
        min_modulus=min(moduli),
        max_modulus=max(moduli),
        lower_bound=lower,
        upper_bound=upper,
    )
    ctx.emit("sample", summary)
    print(f"sample: {members}/{seeds} members, {blocked}/{seeds} blocked, modulus in [{summary.min_modulus:.6f}, {summary.max_modulus:.6f}]")
    return EXIT_OK if members == seeds and blocked == seeds else EXIT_FAILED


def cmd_witness(ctx: RunContext, args: argparse.Namespace) -> int:
    """Constructive S_m witness inside a Bohr set read from file"""
    B = TorusBohrSet.from_payload(_read_json(args.bohr))
    report = build_witness(B, ctx.params)
    ctx.emit("witness", report)
    print(f"witness: anchor {report.anchor}, |f(v)| = {report.sup_norm:.3e}, chain bound {report.chain_bound:.3e}")
    return EXIT_OK


def cmd_enumerate(ctx: RunContext, args: argparse.Namespace) -> int:
    """Enumerate S_N, re-validate at larger truncations and compare golden values"""
    p = ctx.params
    sched = _schedule(ctx)
    report = enumerate_set(
        ctx.scan_bound,
        p,
        sched,
        guard_fraction=ctx.config.schedule.guard_fraction,
        workers=ctx.workers,
        chunk_size=ctx.config.scan.chunk_size,
    )
    df = DataProcessor.integer_set_to_dataframe(report)
    stats = DataProcessor.get_summary_stats(df)
    recheck = revalidate(report.elements, p, sched)

    ctx.emit("enumerate", report, {"summary": stats})
    ctx.emit("revalidate", recheck)
    ctx.table("enumerate", df)

    golden_ok = _check_golden(ctx, {
        "first_element": stats["first_element"],
        "element_count": stats["element_count"],
    })
    print(
        f"enumerate: {stats['element_count']} elements in [1, {ctx.scan_bound}], "
        f"margins [{stats['min_margin']}, {stats['max_margin']}]"
    )
    return EXIT_OK if recheck.all_persisted and golden_ok else EXIT_FAILED


def cmd_color(ctx: RunContext, args: argparse.Namespace) -> int:
    """Colors used on [1, N] and properness of the 3-AP hypergraph"""
    p = ctx.params
    sched = _schedule(ctx)
    elements = enumerate_set(
        ctx.scan_bound, p, sched, guard_fraction=ctx.config.schedule.guard_fraction, workers=ctx.workers
    ).elements
    report = cayley_audit(ctx.scan_bound, elements, ScheduleColorer(p, sched), workers=ctx.workers)
    ctx.emit("color", report, {"runtime_seconds": report.audit.runtime_seconds})
    ctx.table("color_occupancy", DataProcessor.occupancy_to_dataframe(report))

    golden_ok = _check_golden(ctx, {"color_count": report.color_count})
    print(f"color: {report.color_count} colors on [1, {ctx.scan_bound}], proper={report.proper}")
    return EXIT_OK if report.proper and golden_ok else EXIT_FAILED


def cmd_audit(ctx: RunContext, args: argparse.Namespace) -> int:
    """Exhaustive 3-AP audit with the enumerated difference set"""
    p = ctx.params
    sched = _schedule(ctx)
    elements = enumerate_set(
        ctx.scan_bound, p, sched, guard_fraction=ctx.config.schedule.guard_fraction, workers=ctx.workers
    ).elements
    report = audit_3ap(
        ctx.scan_bound,
        elements,
        ScheduleColorer(p, sched),
        workers=ctx.workers,
        max_recorded=ctx.config.scan.max_recorded_violations,
    )
    ctx.emit("audit", report, {"runtime_seconds": report.runtime_seconds})
    ctx.table("audit_violations", DataProcessor.audit_to_dataframe(report))
    print(
        f"audit: {report.progressions_checked} progressions over {report.difference_count} differences, "
        f"{report.violation_count} violations, {report.boundary_flags} boundary flags"
    )
    return EXIT_OK if report.clean else EXIT_FAILED


def cmd_nilbohr(ctx: RunContext, args: argparse.Namespace) -> int:
    """Hit searches for configured (or given) nil-Bohr neighborhoods"""
    p = ctx.params
    sched = _schedule(ctx)
    if args.nbhd:
        entries = [(Path(args.nbhd).stem, args.nbhd, True)]
    else:
        entries = [
            (entry.name, str(config_manager.resolve_relative(entry.path)), entry.require_hit)
            for entry in ctx.config.neighborhoods
        ]

    integer_set = enumerate_set(
        ctx.scan_bound, p, sched, guard_fraction=ctx.config.schedule.guard_fraction, workers=ctx.workers
    )
    reports = {}
    ok = True
    for name, path, required in entries:
        nbhd = NilBohrNbhd.from_payload(_read_json(path))
        report = nilbohr_hit(nbhd, ctx.scan_bound, p, sched, integer_set=integer_set)
        if report.found and not recheck_hit(report, nbhd, p, sched):
            logger.error(f"Witness {report.witness} for {name} failed re-validation")
            ok = False
        if required and not report.found:
            logger.error(f"Required hit for {name} not found up to {ctx.scan_bound}")
            ok = False
        reports[name] = report
        print(f"nilbohr: {name}: witness {report.witness} after {report.candidates_scanned} candidates")

    ctx.emit("nilbohr", {name: r.model_dump(mode="json") for name, r in reports.items()})
    ctx.table("nilbohr", DataProcessor.hits_to_dataframe(reports))
    return EXIT_OK if ok else EXIT_FAILED


def cmd_stats(ctx: RunContext, args: argparse.Namespace) -> int:
    """Equidistribution smoke tests and the density check"""
    p = ctx.params
    tol = ctx.config.tolerances
    N = ctx.scan_bound
    sched = _schedule(ctx)
    elements = enumerate_set(
        N, p, sched, guard_fraction=ctx.config.schedule.guard_fraction, workers=ctx.workers
    ).elements

    linear = NilBohrNbhd(polys=(SpecialGenPoly.single(1, SQRT2_MINUS_1),), epsilon=0.5, degree_bound=1)
    quadratic = NilBohrNbhd(polys=(SpecialGenPoly.single(2, SQRT2_MINUS_1),), epsilon=0.5, degree_bound=2)

    reports = {"range": discrepancy(linear, range(1, N + 1), tol.bins, sched, 1, tol.joint_cells)}
    ok = N > 0 and reports["range"].sup_discrepancy[0] < tol.linear_discrepancy
    if elements:
        reports["integer_set"] = discrepancy(quadratic, elements, tol.bins, sched, 0, tol.joint_cells)
        ok = ok and reports["integer_set"].sup_discrepancy[0] < tol.set_discrepancy
    else:
        logger.warning("S_N is empty; skipping the restricted discrepancy")

    threshold = tol.density_fraction.get(sched.generator)
    if threshold is None:
        logger.error(f"No density_fraction configured for generator {sched.generator}")
        raise ConfigError(f"tolerances.density_fraction has no entry for {sched.generator}")
    density = density_check(N, sched, tol.density_coords, tol.density_cells)
    ok = ok and density.fraction >= threshold

    ctx.emit("stats", {
        "discrepancy": {name: r.model_dump(mode="json") for name, r in reports.items()},
        "density": {**density.model_dump(mode="json"), "generator": sched.generator, "threshold": threshold},
    })
    ctx.table("stats", DataProcessor.discrepancy_to_dataframe(reports))
    for name, report in reports.items():
        print(f"stats: {name}: sup-discrepancy {report.sup_discrepancy[0]:.5f} over {report.sample_size} samples")
    print(
        f"stats: density {density.occupied}/{density.cells ** density.coords} "
        f"({sched.generator}, need {threshold:.2f})"
    )
    return EXIT_OK if ok else EXIT_FAILED


COMMANDS: Dict[str, Callable[[RunContext, argparse.Namespace], int]] = {
    "validate": cmd_validate,
    "sample": cmd_sample,
    "witness": cmd_witness,
    "enumerate": cmd_enumerate,
    "color": cmd_color,
    "audit": cmd_audit,
    "nilbohr": cmd_nilbohr,
    "stats": cmd_stats,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bohr-lab",
        description="Verify the S_m construction, its coloring and the projection to the integers",
    )
    parser.add_argument("--config", help="Configuration JSON (default: $BOHR_LAB_CONFIG or config/default.json)")
    parser.add_argument("--out", help="Report directory (default: output.directory from the config)")
    parser.add_argument("--seed", type=int, default=0, help="Base seed, unsigned 64-bit")
    parser.add_argument("--workers", type=int, help="Worker threads (default: scan.workers)")
    parser.add_argument("--record", action="store_true", help="Record golden values instead of comparing")

    sub = parser.add_subparsers(dest="command", required=True)
    for name, handler in COMMANDS.items():
        command = sub.add_parser(name, help=handler.__doc__)
        if name in {"enumerate", "color", "audit", "nilbohr", "stats"}:
            command.add_argument("--n", type=int, dest="scan_bound", help="Scan bound N (default: scan.bound)")
        if name == "witness":
            command.add_argument("--bohr", required=True, help="Bohr set JSON {dual, epsilon}")
        if name == "nilbohr":
            command.add_argument("--nbhd", help="Neighborhood JSON; default: the configured neighborhoods")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Main application function"""
    parser = build_parser()
    args = parser.parse_args(argv)

    try:
        config = config_manager.load_config(args.config)
        setup_logging(config.logging.level, config.logging.to_file, config.logging.directory)

        workers = args.workers if args.workers is not None else config.scan.workers
        if workers < 1:
            raise ValidationError(f"--workers must be at least 1, got {workers}")
        scan_bound = getattr(args, "scan_bound", None)
        if scan_bound is None:
            scan_bound = config.scan.bound
        if scan_bound < 0:
            raise ValidationError(f"--n must be nonnegative, got {scan_bound}")

        ctx = RunContext(
            config=config,
            command=args.command,
            out_dir=Path(args.out or config.output.directory),
            workers=workers,
            seed=InputValidator.validate_seed(args.seed),
            record=args.record,
            scan_bound=scan_bound,
        )
        config_manager.save_config(config, ctx.out_dir / "run_config.json")
        if args.command != "validate":
            require_valid(config.params)
        return COMMANDS[args.command](ctx, args)

    except CHECK_ERRORS as e:
        logger.error(f"{args.command} failed: {str(e)}")
        print(f"{args.command}: FAILED: {str(e)}", file=sys.stderr)
        return EXIT_FAILED
    except INPUT_ERRORS as e:
        logger.error(f"{args.command} input error: {str(e)}")
        print(f"{args.command}: INPUT ERROR: {str(e)}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
