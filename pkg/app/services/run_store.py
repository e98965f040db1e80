"""Per-run result directories: config, history, timings, summary and checkpoints."""

import json
import logging
import re
from datetime import datetime, timezone
from pathlib import Path
from typing import List, Optional, TextIO, Union

from pydantic import ValidationError

from app.core.exceptions import ConfigurationError, ExportError, RunNotFoundError
from app.schemas.config import RunConfig
from app.schemas.results import IterationRecord, RunSummary

logger = logging.getLogger(__name__)

RUN_ID_PATTERN = re.compile(r"^[A-Za-z0-9][A-Za-z0-9._-]{0,127}$")

CONFIG_FILE = "config.json"
HISTORY_FILE = "history.csv"
TIMINGS_FILE = "timings.csv"
SUMMARY_FILE = "summary.json"
CHECKPOINT_FILE = "checkpoint.npz"


def history_columns(n_volumes: int) -> List[str]:
    return (
        ["iteration", "f0", "u_out_eroded", "u_out_blueprint", "strain_energy", "se_star", "g2"]
        + [f"volume_{k + 1}" for k in range(n_volumes)]
        + ["beta", "change"]
    )


def _format(value: float) -> str:
    return f"{value:.17g}"


class HistoryWriter:
    """Appends IterationRecord rows to history.csv and timings.csv, flushing each row.

    history.csv holds no wall time so identical runs produce identical bytes.
    """

    def __init__(self, run_dir: Path, n_volumes: int):
        self.columns = history_columns(n_volumes)
        self._history: Optional[TextIO] = None
        self._timings: Optional[TextIO] = None
        try:
            self._history = open(run_dir / HISTORY_FILE, "w", encoding="ascii", newline="\n")
            self._timings = open(run_dir / TIMINGS_FILE, "w", encoding="ascii", newline="\n")
        except OSError as e:
            self.close()
            raise ExportError(f"cannot open history files in {run_dir}: {e}", run_dir) from e
        self._history.write(",".join(self.columns) + "\n")
        self._timings.write("iteration,wall_time\n")
        self._last_iteration = 0

    def __call__(self, record: IterationRecord) -> None:
        self.write(record)

    def write(self, record: IterationRecord) -> None:
        if record.iteration <= self._last_iteration:
            raise ExportError(
                f"iteration {record.iteration} written after {self._last_iteration}", None
            )
        values = [
            record.f0,
            record.u_out_eroded,
            record.u_out_blueprint,
            record.strain_energy,
            record.se_star,
            record.g2,
            *record.volumes,
            record.beta,
            record.change,
        ]
        self._history.write(f"{record.iteration}," + ",".join(_format(v) for v in values) + "\n")
        self._history.flush()
        self._timings.write(f"{record.iteration},{_format(record.wall_time or 0.0)}\n")
        self._timings.flush()
        self._last_iteration = record.iteration

    def close(self) -> None:
        for handle in (self._history, self._timings):
            if handle is not None and not handle.closed:
                handle.close()

    def __enter__(self) -> "HistoryWriter":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


class RunStore:
    """Result directories under one root, one sub-directory per run id."""

    def __init__(self, root: Union[str, Path]):
        self.root = Path(root)

    @staticmethod
    def new_run_id(name: str) -> str:
        stamp = datetime.now(timezone.utc).strftime("%Y%m%dT%H%M%S")
        slug = re.sub(r"[^A-Za-z0-9._-]+", "-", name).strip("-") or "run"
        return f"{slug}-{stamp}"

    def _check_id(self, run_id: str) -> str:
        if not RUN_ID_PATTERN.match(run_id):
            raise ConfigurationError(f"invalid run id '{run_id}'", key="run_id")
        return run_id

    def run_dir(self, run_id: str, create: bool = False) -> Path:
        path = self.root / self._check_id(run_id)
        if create:
            try:
                path.mkdir(parents=True, exist_ok=True)
            except OSError as e:
                raise ExportError(f"cannot create {path}: {e}", path) from e
        return path

    def _existing(self, run_id: str) -> Path:
        path = self.run_dir(run_id)
        if not path.is_dir():
            raise RunNotFoundError(f"run '{run_id}' not found under {self.root}")
        return path

    def checkpoint_path(self, run_id: str) -> Path:
        return self.run_dir(run_id) / CHECKPOINT_FILE

    def write_config(self, run_id: str, config: RunConfig) -> Path:
        path = self.run_dir(run_id, create=True) / CONFIG_FILE
        self._write_json(path, config.model_dump(mode="json"))
        return path

    def history_writer(self, run_id: str, n_volumes: int) -> HistoryWriter:
        return HistoryWriter(self.run_dir(run_id, create=True), n_volumes)

    def write_summary(self, run_id: str, summary: RunSummary) -> Path:
        path = self.run_dir(run_id, create=True) / SUMMARY_FILE
        self._write_json(path, summary.model_dump(mode="json"))
        logger.info(f"Summary written to {path}")
        return path

    def list_runs(self) -> List[str]:
        if not self.root.is_dir():
            return []
        return sorted(p.name for p in self.root.iterdir() if p.is_dir() and RUN_ID_PATTERN.match(p.name))

    def read_summary(self, run_id: str) -> RunSummary:
        path = self._existing(run_id) / SUMMARY_FILE
        if not path.is_file():
            raise RunNotFoundError(f"run '{run_id}' has no summary yet")
        try:
            return RunSummary.model_validate(json.loads(path.read_text(encoding="utf-8")))
        except (OSError, ValueError, ValidationError) as e:
            raise ExportError(f"cannot read {path}: {e}", path) from e

    def read_config(self, run_id: str) -> RunConfig:
        path = self._existing(run_id) / CONFIG_FILE
        try:
            return RunConfig.model_validate(json.loads(path.read_text(encoding="utf-8")))
        except (OSError, ValueError, ValidationError) as e:
            raise ExportError(f"cannot read {path}: {e}", path) from e

    def read_history(self, run_id: str) -> List[IterationRecord]:
        """Parse history.csv back into records; wall times are not stored there."""
        path = self._existing(run_id) / HISTORY_FILE
        if not path.is_file():
            raise RunNotFoundError(f"run '{run_id}' has no history yet")
        try:
            lines = path.read_text(encoding="ascii").splitlines()
        except OSError as e:
            raise ExportError(f"cannot read {path}: {e}", path) from e
        columns = lines[0].split(",") if lines else []
        n_volumes = sum(1 for c in columns if c.startswith("volume_"))
        if columns != history_columns(n_volumes):
            raise ExportError(f"unexpected history header in {path}", path)
        records = []
        for line in lines[1:]:
            row = dict(zip(columns, line.split(",")))
            try:
                records.append(
                    IterationRecord(
                        iteration=int(row["iteration"]),
                        f0=float(row["f0"]),
                        u_out_eroded=float(row["u_out_eroded"]),
                        u_out_blueprint=float(row["u_out_blueprint"]),
                        strain_energy=float(row["strain_energy"]),
                        se_star=float(row["se_star"]),
                        g2=float(row["g2"]),
                        volumes=[float(row[f"volume_{k + 1}"]) for k in range(n_volumes)],
                        beta=float(row["beta"]),
                        change=float(row["change"]),
                    )
                )
            except (KeyError, ValueError, ValidationError) as e:
                raise ExportError(f"malformed history row in {path}: {e}", path) from e
        return records

    @staticmethod
    def _write_json(path: Path, payload: dict) -> None:
        try:
            path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        except OSError as e:
            raise ExportError(f"cannot write {path}: {e}", path) from e
