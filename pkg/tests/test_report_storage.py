import json

import pytest

from evolve import ErrorBudget
from hilbert_spectrum import default_grid, grover_profile
from report_storage import (
    BUDGET_COLUMNS,
    budget_row,
    meta_path,
    read_csv,
    save_budget_csv,
    save_profile_csv,
    save_trace_csv,
    write_csv,
    write_json,
)
from report_text import build_verify_text


def _budget(**kw):
    base = dict(
        total_time=8.0,
        steps=32,
        h_diff_norm=0.9,
        commutator_norm=0.4,
        piecewise_bound=0.67,
        trotter_bound_scale=0.8,
        measured_piecewise=0.1,
        measured_trotter=0.05,
    )
    base.update(kw)
    return ErrorBudget(**base)


def test_csv_is_deterministic_and_lf(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    rows = [(0.1, True, 3), (1 / 3, False, 4)]
    write_csv(a, ("x", "flag", "n"), rows)
    write_csv(b, ("x", "flag", "n"), rows)
    assert a.read_bytes() == b.read_bytes()
    assert b"\r\n" not in a.read_bytes()
    assert read_csv(a)[1] == {"x": "0.333333333333", "flag": "false", "n": "4"}


def test_meta_sidecar(tmp_path):
    path = tmp_path / "report.json"
    write_json(path, {"a": 1})
    meta = json.loads(meta_path(path).read_text(encoding="utf-8"))
    assert meta_path(path).name == "report.meta.json"
    assert set(meta) == {"created_ts", "version"}
    assert "created_ts" not in json.loads(path.read_text(encoding="utf-8"))


def test_budget_csv(tmp_path):
    path = tmp_path / "budget.csv"
    save_budget_csv(path, [budget_row("A", _budget()), budget_row("C", _budget(measured_trotter=9.0))])
    rows = read_csv(path)
    assert list(rows[0]) == list(BUDGET_COLUMNS)
    assert rows[0]["trotter_ok"] == "true"
    assert rows[1]["trotter_ok"] == "false"
    assert float(rows[0]["trotter_constant"]) == pytest.approx(0.05 / 0.8)


def test_profile_csv(tmp_path):
    path = tmp_path / "profile.csv"
    save_profile_csv(path, grover_profile(0.25, default_grid(5)))
    rows = read_csv(path)
    assert len(rows) == 5
    assert float(rows[2]["g"]) == pytest.approx(0.5)


def test_trace_csv(tmp_path):
    path = tmp_path / "trace_C.csv"
    save_trace_csv(path, [(1, 0.125, 0.999), (2, 0.875, 0.98)])
    rows = read_csv(path)
    assert list(rows[0]) == ["step", "s", "ground_fidelity"]
    assert rows[1] == {"step": "2", "s": "0.875", "ground_fidelity": "0.98"}
    assert meta_path(path).exists()


def test_verify_text_flags():
    rows = [{"pair": "A", **_budget().to_dict()}, {"pair": "B", **_budget(measured_piecewise=1.0).to_dict()}]
    text = build_verify_text(rows, {"h_diff_norm_subspace": 0.8, "h_diff_norm_full": 1.0})
    lines = text.splitlines()
    assert lines[0].startswith("1: A")
    assert "FAIL" in lines[1]
    assert lines[2].startswith("3: C") and lines[2].endswith("< 1 OK")
