import json

import pytest

from errors import InputError
from run_config import RunConfig, load_run_config, save_run_config
from run_log import log_run_event


class TestRunConfig:
    def test_defaults(self):
        cfg = RunConfig()
        assert cfg.epsilon == 0.1
        assert cfg.partition == "auto"
        assert cfg.explicit_n_a is None
        assert not cfg.use_bound
        assert cfg.formats == ["json", "csv"]

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"epsilon": 0.0},
            {"epsilon": 1.0},
            {"r_mult_b": 0},
            {"partition": "half"},
            {"partition": 0},
            {"partition": True},
            {"beta_c": -1.0},
            {"schedule_bound": "loose"},
            {"grid_points": 1},
            {"shots": -3},
            {"formats": ["json", "xml"]},
        ],
    )
    def test_validation(self, kwargs):
        with pytest.raises(InputError):
            RunConfig(**kwargs)

    def test_unknown_keys_rejected(self):
        with pytest.raises(InputError, match="epsilonn"):
            RunConfig.from_dict({"epsilonn": 0.2})

    def test_overrides_skip_none(self):
        cfg = RunConfig(epsilon=0.2).with_overrides(epsilon=None, partition=3, schedule_bound="norm")
        assert cfg.epsilon == 0.2
        assert cfg.explicit_n_a == 3
        assert cfg.use_bound

    def test_override_is_validated(self):
        with pytest.raises(InputError):
            RunConfig().with_overrides(epsilon=2.0)

    def test_save_load(self, tmp_path):
        path = tmp_path / "cfg" / "run.json"
        cfg = RunConfig(epsilon=0.05, partition=4, shots=10, formats=["json"])
        save_run_config(path, cfg)
        assert load_run_config(path) == cfg

    def test_partial_file(self, tmp_path):
        path = tmp_path / "run.json"
        path.write_text(json.dumps({"r_mult_c": 8}), encoding="utf-8")
        cfg = load_run_config(path)
        assert cfg.r_mult_c == 8
        assert cfg.r_mult_a == 4.0

    def test_missing_and_corrupt(self, tmp_path):
        with pytest.raises(InputError):
            load_run_config(tmp_path / "none.json")
        bad = tmp_path / "bad.json"
        bad.write_text("{", encoding="utf-8")
        with pytest.raises(InputError):
            load_run_config(bad)


def _events(path):
    return [json.loads(line) for line in path.read_text(encoding="utf-8").splitlines() if line.strip()]


class TestRunLog:
    def test_append(self, tmp_path):
        out = tmp_path / "out"
        log_run_event(str(out), "inst", "run_started", label="x")
        log_run_event(str(out), "inst", "run_done", status="ok")
        events = _events(out / "inst_events.jsonl")
        assert [e["event"] for e in events] == ["run_started", "run_done"]
        assert events[1]["status"] == "ok"
        assert events[0]["run_id"] == "inst"

    def test_empty_run_id_ignored(self, tmp_path):
        log_run_event(str(tmp_path), "", "run_started")
        assert list(tmp_path.iterdir()) == []

    def test_unserializable_values_as_text(self, tmp_path):
        log_run_event(str(tmp_path), "inst", "census_done", where=tmp_path)
        assert _events(tmp_path / "inst_events.jsonl")[0]["where"] == str(tmp_path)

    def test_trace_flag_default_off(self):
        assert RunConfig().trace is False
        assert RunConfig().with_overrides(trace=None).trace is False
        assert RunConfig.from_dict({"trace": True}).trace is True
