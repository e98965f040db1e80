"""Tests for run directories, history files and summaries."""

import pytest

from app.core.exceptions import ConfigurationError, ExportError, RunNotFoundError
from app.schemas.config import RunConfig
from app.schemas.results import IterationRecord, RunSummary
from app.services.run_store import RUN_ID_PATTERN, RunStore, history_columns


def make_record(iteration: int, wall_time: float = 0.25) -> IterationRecord:
    return IterationRecord(
        iteration=iteration,
        f0=-1.5e-3 / iteration,
        u_out_eroded=-1.5e-3 / iteration,
        u_out_blueprint=-1.7e-3 / iteration,
        strain_energy=0.31,
        se_star=0.5,
        g2=0.62,
        volumes=[0.98, 1.0],
        beta=1.0,
        change=0.1 / iteration,
        wall_time=wall_time,
    )


def make_summary(run_id: str) -> RunSummary:
    return RunSummary(
        run_id=run_id, name="patch-run", benchmark="patch", n_materials=2, nelx=6, nely=4,
        iterations=2, converged=False, termination_reason="max_iterations",
        f0=-7.5e-4, u_out_eroded=-7.5e-4, u_out_blueprint=-8.5e-4, strain_energy=0.31,
        se_star=0.5, g2=0.62, volumes=[0.98, 1.0], volume_limits=[0.3, 0.1], beta=1.0,
        files=["fields.vtk"],
    )


@pytest.fixture
def store(tmp_path):
    return RunStore(tmp_path / "results")


class TestRunIds:
    def test_new_run_id_is_valid(self):
        run_id = RunStore.new_run_id("gripper 2mat / test")
        assert RUN_ID_PATTERN.match(run_id)
        assert run_id.startswith("gripper-2mat-test-")

    @pytest.mark.parametrize("run_id", ["../escape", "", "a/b", ".hidden"])
    def test_invalid_run_id(self, store, run_id):
        with pytest.raises(ConfigurationError) as exc_info:
            store.run_dir(run_id)
        assert exc_info.value.key == "run_id"


class TestHistoryWriter:
    def test_columns(self):
        assert history_columns(2) == [
            "iteration", "f0", "u_out_eroded", "u_out_blueprint", "strain_energy",
            "se_star", "g2", "volume_1", "volume_2", "beta", "change",
        ]

    def test_round_trip_without_wall_time(self, store):
        records = [make_record(1), make_record(2)]
        with store.history_writer("run-a", 2) as writer:
            for record in records:
                writer(record)
        restored = store.read_history("run-a")
        assert [r.model_dump(exclude={"wall_time"}) for r in restored] == [
            r.model_dump(exclude={"wall_time"}) for r in records
        ]
        assert all(r.wall_time is None for r in restored)

    def test_timings_are_separate(self, store):
        with store.history_writer("run-a", 2) as writer:
            writer(make_record(1, wall_time=0.5))
            writer(make_record(2, wall_time=0.75))
        run_dir = store.run_dir("run-a")
        assert (run_dir / "timings.csv").read_text().splitlines() == ["iteration,wall_time", "1,0.5", "2,0.75"]
        assert "wall_time" not in (run_dir / "history.csv").read_text()

    def test_identical_records_give_identical_bytes(self, store):
        for run_id, wall_time in (("run-a", 0.1), ("run-b", 9.0)):
            with store.history_writer(run_id, 2) as writer:
                writer(make_record(1, wall_time))
        a = (store.run_dir("run-a") / "history.csv").read_bytes()
        b = (store.run_dir("run-b") / "history.csv").read_bytes()
        assert a == b

    def test_rows_are_flushed_per_iteration(self, store):
        writer = store.history_writer("run-a", 2)
        writer(make_record(1))
        lines = (store.run_dir("run-a") / "history.csv").read_text().splitlines()
        assert len(lines) == 2
        writer.close()

    def test_non_increasing_iteration(self, store):
        with store.history_writer("run-a", 2) as writer:
            writer(make_record(2))
            with pytest.raises(ExportError):
                writer(make_record(2))


class TestRunStore:
    def test_summary_round_trip(self, store):
        summary = make_summary("run-a")
        path = store.write_summary("run-a", summary)
        assert path.name == "summary.json"
        assert store.read_summary("run-a").model_dump() == summary.model_dump()

    def test_config_round_trip(self, store):
        config = RunConfig.model_validate(
            {"benchmark": "patch", "materials": {"moduli": [1e7]}, "volume_fractions": [0.3]}
        )
        store.write_config("run-a", config)
        assert store.read_config("run-a").model_dump() == config.model_dump()

    def test_list_runs(self, store):
        assert store.list_runs() == []
        store.run_dir("run-b", create=True)
        store.run_dir("run-a", create=True)
        assert store.list_runs() == ["run-a", "run-b"]

    def test_unknown_run(self, store):
        with pytest.raises(RunNotFoundError):
            store.read_summary("missing")
        with pytest.raises(RunNotFoundError):
            store.read_history("missing")

    def test_run_without_summary(self, store):
        store.run_dir("run-a", create=True)
        with pytest.raises(RunNotFoundError):
            store.read_summary("run-a")

    def test_malformed_summary(self, store):
        (store.run_dir("run-a", create=True) / "summary.json").write_text("{not json")
        with pytest.raises(ExportError):
            store.read_summary("run-a")

    def test_malformed_history_header(self, store):
        (store.run_dir("run-a", create=True) / "history.csv").write_text("iteration,wrong\n")
        with pytest.raises(ExportError):
            store.read_history("run-a")

    def test_checkpoint_path(self, store):
        assert store.checkpoint_path("run-a") == store.root / "run-a" / "checkpoint.npz"
