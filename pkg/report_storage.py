from __future__ import annotations

import csv
import json
import logging
import time
from pathlib import Path
from typing import Any, Dict, Iterable, Sequence, Union

from analysis import MODEL_COLUMNS
from config import APP_VERSION
from csp import satisfies
from csp_models import CspInstance, digits_of
from evolve import TRACE_COLUMNS, ErrorBudget
from hilbert_spectrum import PROFILE_COLUMNS, GapProfile
from nested_models import NestedRunReport
from schedule import SCHEDULE_COLUMNS, Schedule
from sweep import SWEEP_COLUMNS, SweepResult

log = logging.getLogger(__name__)

PathLike = Union[str, Path]

HISTOGRAM_COLUMNS = ("index", "assignment", "probability", "is_solution")
BUDGET_COLUMNS = (
    "pair",
    "T",
    "r",
    "h_diff_norm",
    "commutator_norm",
    "piecewise_bound",
    "measured_piecewise",
    "piecewise_ok",
    "trotter_bound_scale",
    "measured_trotter",
    "trotter_constant",
    "trotter_ok",
    "estimated",
)


def _fmt(value: Any) -> Any:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.12g}"
    return value


def meta_path(path: PathLike) -> Path:
    """<name>.meta.json рядом с основным файлом."""
    path = Path(path)
    return path.with_name(f"{path.stem}.meta.json")


def write_meta(path: PathLike, **extra: Any) -> None:
    """Метка времени и версия живут только в sidecar-файле, основной вывод детерминирован."""
    data: Dict[str, Any] = {"created_ts": int(time.time()), "version": APP_VERSION}
    data.update(extra)
    target = meta_path(path)
    target.write_text(json.dumps(data, ensure_ascii=False, indent=2) + "\n", encoding="utf-8")


def write_json(path: PathLike, data: Dict[str, Any], *, meta: bool = True) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(data, ensure_ascii=False, indent=2) + "\n", encoding="utf-8")
    if meta:
        write_meta(path)


def write_csv(path: PathLike, header: Sequence[str], rows: Iterable[Sequence[Any]], *, meta: bool = True) -> None:
    """CSV с заголовком, запятая, точка как десятичный разделитель, LF."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])
    if meta:
        write_meta(path)


def read_csv(path: PathLike) -> list:
    with Path(path).open("r", encoding="utf-8", newline="") as f:
        return list(csv.DictReader(f))


def save_report(path: PathLike, report: NestedRunReport) -> None:
    write_json(path, report.to_dict())
    log.info("Отчёт сохранён: %s", path)


def histogram_rows(report: NestedRunReport, instance: CspInstance) -> list:
    rows = []
    for index, prob in sorted(report.measurement_histogram.items()):
        digits = digits_of(index, instance.d, instance.n_ab)
        rows.append(
            (
                index,
                "".join(str(x) for x in digits),
                prob,
                satisfies(instance, instance.n_ab, digits),
            )
        )
    return rows


def save_histogram_csv(path: PathLike, report: NestedRunReport, instance: CspInstance) -> None:
    write_csv(path, HISTOGRAM_COLUMNS, histogram_rows(report, instance))


def save_profile_csv(path: PathLike, profile: GapProfile) -> None:
    write_csv(path, PROFILE_COLUMNS, profile.rows())


def save_schedule_csv(path: PathLike, schedule: Schedule) -> None:
    write_csv(path, SCHEDULE_COLUMNS, schedule.rows())


def save_model_csv(path: PathLike, rows: Sequence[Sequence[Any]]) -> None:
    write_csv(path, MODEL_COLUMNS, rows)


def save_trace_csv(path: PathLike, rows: Sequence[Sequence[Any]]) -> None:
    """Трасса стадии: шаг, s_j и верность основному уровню H(s_j)."""
    write_csv(path, TRACE_COLUMNS, rows)


def budget_row(pair: str, budget: ErrorBudget) -> tuple:
    return (
        pair,
        budget.total_time,
        budget.steps,
        budget.h_diff_norm,
        budget.commutator_norm,
        budget.piecewise_bound,
        budget.measured_piecewise,
        budget.piecewise_ok,
        budget.trotter_bound_scale,
        budget.measured_trotter,
        budget.trotter_constant,
        budget.trotter_ok,
        budget.estimated,
    )


def save_budget_csv(path: PathLike, rows: Sequence[tuple]) -> None:
    write_csv(path, BUDGET_COLUMNS, rows)


def save_sweep_csv(path: PathLike, result: SweepResult) -> None:
    """Строки точек в порядке оси и последняя строка fit_exponent."""
    write_csv(path, SWEEP_COLUMNS, result.csv_rows())
    log.info("Сетка сохранена: %s (%d точек, ошибок: %d)", path, len(result.rows), result.failed_count)
