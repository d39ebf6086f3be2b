"""Прогоны по сетке параметров: оси n_ab, N, r, epsilon, beta.

Каждая точка — изолированное вычисление; точки считаются в пуле потоков,
строки выводятся в порядке значений оси независимо от порядка завершения.
"""

from __future__ import annotations

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np

from analysis import ScalingFit, fit_scaling
from csp import generate_random_ksat
from errors import InputError, NestedSearchError
from evolve import error_budget, evolve_discretized, evolve_reference
from hilbert import DiagonalMarked, RankOneUniform, uniform_state
from hilbert_spectrum import default_grid, grover_profile
from nested import run_nested
from run_config import RunConfig
from schedule import local_schedule

log = logging.getLogger(__name__)

AXES = ("n_ab", "N", "r", "epsilon", "beta")
SWEEP_COLUMNS = ("axis_value", "mean_time_model", "mean_fidelity", "trotter_error", "instances", "failed")

# Эталонная эволюция для оси N считается только до этой размерности
_REFERENCE_CAP = 2 ** 12


@dataclass(frozen=True)
class SweepSpec:
    """Описание сетки.

    Оси:
      n_ab    — вложенные прогоны на случайных k-SAT, clauses = round(beta * n_ab);
      beta    — то же при фиксированном n_ab;
      epsilon — вложенные прогоны при разных epsilon;
      N       — неструктурированный поиск marked из N (время и эталонная верность);
      r       — ошибка произведения экспонент на паре Гровера размера size при фиксированном T.
    """

    axis: str
    values: Tuple[float, ...]
    instances: int = 1
    k: int = 3
    n_ab: int = 8
    beta: float = 2.0
    size: int = 16
    marked: int = 1
    seed: int = 0
    config: RunConfig = field(default_factory=RunConfig)

    def __post_init__(self) -> None:
        if self.axis not in AXES:
            raise InputError(f"ось: одна из {AXES}, получено {self.axis!r}")
        if len(self.values) < 2:
            raise InputError(f"ось {self.axis}: нужно >= 2 значений, получено {len(self.values)}")
        if self.instances < 1:
            raise InputError(f"instances должен быть >= 1, получено {self.instances}")
        if self.axis in ("n_ab", "N", "r") and any(float(v) != int(v) or v < 1 for v in self.values):
            raise InputError(f"ось {self.axis}: значения должны быть целыми >= 1")
        if not 1 <= self.marked <= self.size:
            raise InputError(f"marked вне [1, size]: {self.marked}")

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "SweepSpec":
        if not isinstance(data, dict):
            raise InputError("SweepSpec.from_dict ожидает dict")
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise InputError(f"неизвестные ключи сетки: {', '.join(unknown)}")
        clean = dict(data)
        if "axis" not in clean or "values" not in clean:
            raise InputError("в описании сетки нужны поля axis и values")
        clean["values"] = tuple(clean["values"])
        clean["config"] = RunConfig.from_dict(clean.get("config") or {})
        try:
            return cls(**clean)
        except TypeError as e:
            raise InputError(f"некорректное описание сетки: {e}") from e

    def to_dict(self) -> Dict[str, Any]:
        data = {f.name: getattr(self, f.name) for f in fields(self)}
        data["values"] = list(self.values)
        data["config"] = self.config.to_dict()
        return data


def load_sweep_spec(path: Union[str, Path]) -> SweepSpec:
    path = Path(path)
    if not path.exists():
        raise InputError(f"файл сетки не найден: {path}")
    try:
        data = json.loads(path.read_text(encoding="utf-8") or "{}")
    except json.JSONDecodeError as e:
        raise InputError(f"повреждённый JSON в {path}: {e}") from e
    return SweepSpec.from_dict(data)


@dataclass(frozen=True)
class SweepRow:
    axis_value: float
    mean_time_model: float
    mean_fidelity: float
    trotter_error: Optional[float]
    instances: int
    failed: bool

    def as_tuple(self) -> tuple:
        return (
            self.axis_value,
            self.mean_time_model,
            self.mean_fidelity,
            "" if self.trotter_error is None else self.trotter_error,
            self.instances,
            self.failed,
        )


@dataclass(frozen=True)
class SweepResult:
    spec: SweepSpec
    rows: List[SweepRow]
    fit: Optional[ScalingFit]

    @property
    def failed_count(self) -> int:
        return sum(1 for r in self.rows if r.failed)

    def csv_rows(self) -> List[tuple]:
        rows = [r.as_tuple() for r in self.rows]
        rows.append(("fit_exponent", "" if self.fit is None else self.fit.exponent, "", "", "", ""))
        return rows


# ---------- ТОЧКИ ----------


def _grover_pair(size: int, marked: int):
    return RankOneUniform(size), DiagonalMarked.from_indices(size, range(marked))


def _point_unstructured(spec: SweepSpec, n_total: int) -> SweepRow:
    cfg = spec.config
    profile = grover_profile(spec.marked / n_total, default_grid(cfg.grid_points))
    schedule = local_schedule(profile, cfg.epsilon, use_bound=cfg.use_bound, min_time=0.0) if spec.marked < n_total else None
    total = schedule.total_time if schedule else 0.0

    fidelity = 1.0
    if schedule is not None and n_total <= _REFERENCE_CAP:
        h_i, h_f = _grover_pair(n_total, spec.marked)
        v0 = uniform_state(n_total, 1)
        fidelity = evolve_reference(h_i, h_f, schedule, v0).fidelity_to_ground
    return SweepRow(float(n_total), total, fidelity, None, 1, False)


def _point_steps(spec: SweepSpec, r: int) -> SweepRow:
    cfg = spec.config
    profile = grover_profile(spec.marked / spec.size, default_grid(cfg.grid_points))
    schedule = local_schedule(profile, cfg.epsilon, use_bound=cfg.use_bound)
    h_i, h_f = _grover_pair(spec.size, spec.marked)
    budget = error_budget(h_i, h_f, schedule, r, seed=spec.seed)
    fidelity = evolve_discretized(h_i, h_f, schedule, r, uniform_state(spec.size, 1)).fidelity_to_ground
    return SweepRow(float(r), schedule.total_time, fidelity, budget.measured_trotter, 1, False)


def _point_nested(spec: SweepSpec, value: float) -> SweepRow:
    n_ab, beta, cfg = spec.n_ab, spec.beta, spec.config
    if spec.axis == "n_ab":
        n_ab = int(value)
    elif spec.axis == "beta":
        beta = float(value)
    else:
        cfg = replace(cfg, epsilon=float(value))

    times: List[float] = []
    masses: List[float] = []
    for i in range(spec.instances):
        instance = generate_random_ksat(n_ab, int(round(beta * n_ab)), spec.k, seed=spec.seed + i)
        report = run_nested(instance, cfg)
        if report.status != "ok":
            log.debug("Сетка: %s — статус %s, точка пропущена", instance.label, report.status)
            continue
        times.append(report.wall_time_model)
        masses.append(report.final_solution_mass)

    if not times:
        raise NestedSearchError(f"ни одной разрешимой задачи в точке {spec.axis}={value}")
    return SweepRow(float(value), float(np.mean(times)), float(np.mean(masses)), None, len(times), False)


def run_point(spec: SweepSpec, value: float) -> SweepRow:
    """Одна точка; любая ошибка превращается в строку с failed=true."""
    try:
        if spec.axis == "N":
            return _point_unstructured(spec, int(value))
        if spec.axis == "r":
            return _point_steps(spec, int(value))
        return _point_nested(spec, value)
    except Exception as e:  # noqa: BLE001
        log.warning("Сетка: точка %s=%s не посчитана: %s", spec.axis, value, e)
        return SweepRow(float(value), float("nan"), float("nan"), None, 0, True)


def _fit(spec: SweepSpec, rows: List[SweepRow]) -> Optional[ScalingFit]:
    ok = [r for r in rows if not r.failed]
    if spec.axis == "r":
        pts = [(r.axis_value, r.trotter_error) for r in ok if r.trotter_error and r.trotter_error > 0]
    elif spec.axis == "n_ab":
        base = 2.0
        pts = [(base ** r.axis_value, r.mean_time_model) for r in ok if r.mean_time_model > 0]
    else:
        pts = [(r.axis_value, r.mean_time_model) for r in ok if r.mean_time_model > 0]
    try:
        return fit_scaling([p[0] for p in pts], [p[1] for p in pts])
    except InputError as e:
        log.warning("Сетка: фит степени не построен: %s", e)
        return None


def run_sweep(spec: SweepSpec, jobs: int = 1) -> SweepResult:
    if jobs < 1:
        raise InputError(f"jobs должен быть >= 1, получено {jobs}")
    log.info("Сетка по %s: %d точек, jobs=%d", spec.axis, len(spec.values), jobs)
    with ThreadPoolExecutor(max_workers=jobs) as executor:
        futures = [executor.submit(run_point, spec, v) for v in spec.values]
        rows = [f.result() for f in futures]
    return SweepResult(spec=spec, rows=rows, fit=_fit(spec, rows))
