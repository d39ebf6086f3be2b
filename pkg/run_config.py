from __future__ import annotations

import json
import logging
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from config import (
    DEFAULT_BETA_C,
    DEFAULT_EPSILON,
    DEFAULT_GRID_POINTS,
    DEFAULT_R_MULTIPLIER,
    DENSE_NORM_CAP,
    ENUM_CAP,
    OUTPUT_DIR,
)
from errors import InputError

log = logging.getLogger(__name__)

SCHEDULE_BOUNDS = ("matrix_element", "norm")
OUTPUT_FORMATS = ("json", "csv")


@dataclass
class RunConfig:
    """Настройки одного прогона (JSON-файл или флаги командной строки).

    partition: "auto" (через optimal_partition и beta_c) или явное n_a.
    schedule_bound: "matrix_element" — точный матричный элемент в локальном
    расписании, "norm" — грубая оценка ‖H_f − H_i‖.
    diagnostics_cap: до какой размерности считаются плотные проверки.
    shots: 0 — без выборки измерений.
    trace: писать по каждой стадии CSV с верностью основному уровню H(s_j)
    (только при размерности не выше diagnostics_cap).
    """

    epsilon: float = DEFAULT_EPSILON
    r_mult_a: float = DEFAULT_R_MULTIPLIER
    r_mult_b: float = DEFAULT_R_MULTIPLIER
    r_mult_c: float = DEFAULT_R_MULTIPLIER
    partition: Union[str, int] = "auto"
    beta_c: float = DEFAULT_BETA_C
    schedule_bound: str = "matrix_element"
    grid_points: int = DEFAULT_GRID_POINTS
    seed: int = 0
    shots: int = 0
    enum_cap: int = ENUM_CAP
    diagnostics_cap: int = DENSE_NORM_CAP
    trace: bool = False
    output_dir: str = OUTPUT_DIR
    formats: List[str] = field(default_factory=lambda: list(OUTPUT_FORMATS))

    def __post_init__(self) -> None:
        self.validate()

    def validate(self) -> None:
        if not 0.0 < float(self.epsilon) < 1.0:
            raise InputError(f"epsilon вне (0, 1): {self.epsilon}")
        for name in ("r_mult_a", "r_mult_b", "r_mult_c"):
            if not float(getattr(self, name)) > 0:
                raise InputError(f"{name} должен быть > 0")
        if isinstance(self.partition, str):
            if self.partition != "auto":
                raise InputError(f"partition: 'auto' или целое n_a, получено {self.partition!r}")
        elif isinstance(self.partition, bool) or not isinstance(self.partition, int) or self.partition < 1:
            raise InputError(f"partition: n_a должно быть целым >= 1, получено {self.partition!r}")
        if not float(self.beta_c) > 0:
            raise InputError(f"beta_c должен быть > 0, получено {self.beta_c}")
        if self.schedule_bound not in SCHEDULE_BOUNDS:
            raise InputError(f"schedule_bound: одно из {SCHEDULE_BOUNDS}, получено {self.schedule_bound!r}")
        if int(self.grid_points) < 2:
            raise InputError(f"grid_points должен быть >= 2, получено {self.grid_points}")
        if int(self.shots) < 0:
            raise InputError(f"shots должен быть >= 0, получено {self.shots}")
        if int(self.enum_cap) < 1 or int(self.diagnostics_cap) < 1:
            raise InputError("лимиты enum_cap и diagnostics_cap должны быть >= 1")
        bad = [f for f in self.formats if f not in OUTPUT_FORMATS]
        if bad:
            raise InputError(f"неизвестные форматы вывода: {bad}")

    @property
    def use_bound(self) -> bool:
        return self.schedule_bound == "norm"

    @property
    def explicit_n_a(self) -> Optional[int]:
        return None if self.partition == "auto" else int(self.partition)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "RunConfig":
        """Строгий разбор: неизвестные ключи — ошибка ввода."""
        if not isinstance(data, dict):
            raise InputError("RunConfig.from_dict ожидает dict")
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise InputError(f"неизвестные ключи конфигурации: {', '.join(unknown)}")
        try:
            return cls(**data)
        except TypeError as e:
            raise InputError(f"некорректная конфигурация: {e}") from e

    def with_overrides(self, **overrides: Any) -> "RunConfig":
        """Копия с заменой полей, у которых значение не None (флаги CLI)."""
        clean = {k: v for k, v in overrides.items() if v is not None}
        return replace(self, **clean)


def load_run_config(path: Union[str, Path]) -> RunConfig:
    path = Path(path)
    if not path.exists():
        raise InputError(f"файл конфигурации не найден: {path}")
    try:
        data = json.loads(path.read_text(encoding="utf-8") or "{}")
    except json.JSONDecodeError as e:
        raise InputError(f"повреждённый JSON в {path}: {e}") from e
    return RunConfig.from_dict(data)


def save_run_config(path: Union[str, Path], cfg: RunConfig) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(cfg.to_dict(), ensure_ascii=False, indent=2) + "\n", encoding="utf-8")
