"""Command-line front end: run an optimization, export its fields, or check gradients.

Usage:
    python -m app.cli config.json [--iterations N] [--out DIR] [--export vtk,csv,pgm]
    python -m app.cli --benchmark gripper-2mat --nelx 100 --nely 50
    python -m app.cli --fd-check
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

from app.core.config import settings
from app.core.exceptions import ConfigurationError, TopOptError
from app.core.logging import configure_logging
from app.core.presets import deep_merge, list_presets
from app.schemas.config import RunConfig
from app.schemas.enums import ExportFormat, Realization
from app.schemas.results import RunSummary
from app.services.analysis_service import MechanismAnalysis
from app.services.config_service import build_config
from app.services.export_service import export_snapshot, mirror_full_design, snapshot_from_states
from app.services.gradient_check import TOLERANCE, run_gradient_check
from app.services.mesh_service import mirror_axes
from app.services.optimizer_service import OptimizationResult, TopologyOptimizer
from app.services.run_store import RunStore

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2


def _export_formats(value: str) -> List[ExportFormat]:
    try:
        return [ExportFormat(item.strip()) for item in value.split(",") if item.strip()]
    except ValueError:
        choices = ", ".join(f.value for f in ExportFormat)
        raise argparse.ArgumentTypeError(f"unknown export format in '{value}'; choose from {choices}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="python -m app.cli",
        description="Pneumatic multi-material topology optimization",
    )
    parser.add_argument("config", nargs="?", help="JSON run configuration")
    parser.add_argument(
        "--benchmark",
        metavar="PRESET",
        help=f"built-in preset, values in CONFIG take precedence ({', '.join(list_presets())})",
    )
    parser.add_argument("--iterations", type=int, help="maximum optimizer iterations")
    parser.add_argument("--nelx", type=int, help="elements in x")
    parser.add_argument("--nely", type=int, help="elements in y")
    parser.add_argument("--out", help="results root directory (default: RESULTS_DIR)")
    parser.add_argument(
        "--export", type=_export_formats, default="vtk,csv,pgm", help="comma-separated formats: vtk,csv,pgm"
    )
    parser.add_argument("--fd-check", action="store_true", help="validate gradients on a small mesh and exit")
    parser.add_argument("--seed", type=int, help="seed of the initial design")
    parser.add_argument("--run-id", help="name of the run directory (default: <name>-<timestamp>)")
    parser.add_argument("--log-level", default=None, help="DEBUG, INFO, WARNING or ERROR")
    return parser


def _overrides(args: argparse.Namespace) -> Dict[str, Any]:
    overrides: Dict[str, Any] = {}
    if args.iterations is not None:
        overrides["optimizer"] = {"max_iterations": args.iterations}
    mesh = {key: getattr(args, key) for key in ("nelx", "nely") if getattr(args, key) is not None}
    if mesh:
        overrides["mesh"] = mesh
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.out is not None:
        overrides["output_dir"] = args.out
    return overrides


def load_run_config(args: argparse.Namespace) -> RunConfig:
    """Merge preset, file and flag values into one validated configuration."""
    raw: Dict[str, Any] = {}
    source = "command line"
    if args.config:
        path = Path(args.config)
        try:
            raw = json.loads(path.read_text(encoding="utf-8"))
        except OSError as e:
            raise ConfigurationError(f"cannot read config file {path}: {e}", key="config") from e
        except json.JSONDecodeError as e:
            raise ConfigurationError(f"{path} is not valid JSON: {e}", key="config") from e
        if not isinstance(raw, dict):
            raise ConfigurationError(f"{path}: top level must be a mapping", key="config")
        source = str(path)
    if args.benchmark:
        raw.setdefault("preset", args.benchmark)
    return build_config(deep_merge(raw, _overrides(args)), source=source)


def fd_check(seed: int) -> int:
    worst = 0.0
    for n_materials in (1, 2, 3):
        report = run_gradient_check(n_materials, seed=seed)
        worst = max(worst, report.max_relative_error)
        print(f"m={n_materials}: max relative gradient error {report.max_relative_error:.3e}")
    print(f"max relative gradient error {worst:.3e} (tolerance {TOLERANCE:g})")
    return EXIT_OK if worst <= TOLERANCE else EXIT_FAILURE


def build_summary(
    run_id: str,
    config: RunConfig,
    analysis: MechanismAnalysis,
    result: OptimizationResult,
    files: List[Path],
    full_shape: Tuple[Optional[int], Optional[int]] = (None, None),
) -> RunSummary:
    eroded = result.final[Realization.ERODED]
    blueprint = result.final[Realization.BLUEPRINT]
    return RunSummary(
        run_id=run_id,
        name=config.name,
        benchmark=config.benchmark,
        n_materials=config.n_materials,
        nelx=analysis.mesh.nelx,
        nely=analysis.mesh.nely,
        iterations=result.iterations,
        converged=result.converged,
        termination_reason=result.termination_reason,
        f0=result.f0,
        u_out_eroded=eroded.u_out,
        u_out_blueprint=blueprint.u_out,
        strain_energy=eroded.strain_energy,
        se_star=result.se_star,
        g2=result.g2,
        volumes=result.volumes,
        volume_limits=result.volume_limits,
        beta=result.beta,
        full_nelx=full_shape[0],
        full_nely=full_shape[1],
        files=[p.name for p in files],
    )


def execute(config: RunConfig, run_id: Optional[str], formats: Sequence[ExportFormat]) -> RunSummary:
    """Run one optimization and persist config, history, exports and summary."""
    store = RunStore(config.output_dir or settings.results_dir)
    run_id = run_id or RunStore.new_run_id(config.name)
    run_dir = store.run_dir(run_id, create=True)
    store.write_config(run_id, config)
    logger.info(f"Run {run_id} in {run_dir}")

    analysis = MechanismAnalysis.from_config(config)
    n_volumes = len(config.volume_fractions)
    with store.history_writer(run_id, n_volumes) as history:
        optimizer = TopologyOptimizer(config, analysis, on_iteration=history, checkpoint_dir=run_dir)
        result = optimizer.run()

    snapshot = snapshot_from_states(analysis.mesh, result.final)
    files = export_snapshot(snapshot, run_dir, formats)
    axes = mirror_axes(config.benchmark)
    full_shape = (None, None)
    if axes:
        full = mirror_full_design(snapshot, axes)
        files += export_snapshot(full, run_dir, formats, prefix="full_")
        full_shape = (full.nelx, full.nely)

    summary = build_summary(run_id, config, analysis, result, files, full_shape)
    store.write_summary(run_id, summary)
    return summary


def run_cli(argv: Optional[Sequence[str]] = None) -> int:
    """Parse ``argv``, run, and return the process exit status."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code not in (0, None) else EXIT_OK

    configure_logging(args.log_level)

    if args.fd_check:
        try:
            return fd_check(args.seed if args.seed is not None else settings.default_seed)
        except TopOptError as e:
            print(f"error: {e}", file=sys.stderr)
            return EXIT_FAILURE

    if not args.config and not args.benchmark:
        parser.print_usage(sys.stderr)
        print("error: a config file or --benchmark is required", file=sys.stderr)
        return EXIT_USAGE
    if args.config and not Path(args.config).is_file():
        parser.print_usage(sys.stderr)
        print(f"error: config file {args.config} not found", file=sys.stderr)
        return EXIT_USAGE

    try:
        config = load_run_config(args)
        summary = execute(config, args.run_id, args.export)
    except TopOptError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_FAILURE

    print(
        f"{summary.run_id}: u_out eroded={summary.u_out_eroded:.6e} m, "
        f"blueprint={summary.u_out_blueprint:.6e} m, g2={summary.g2:.4f}, "
        f"{summary.iterations} iterations ({summary.termination_reason})"
    )
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(run_cli())
