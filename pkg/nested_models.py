from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Dict, List, Literal, Optional, Tuple

import numpy as np

from config import DEFAULT_GRID_POINTS
from csp_models import Partition, SolutionCensus
from errors import ContractError
from evolve import Step, apply_steps

RunStatus = Literal["ok", "unsatisfiable", "no_partial_solutions"]
ScheduleBound = Literal["matrix_element", "norm"]


@dataclass(frozen=True)
class StagePlan:
    """Времена и числа шагов трёх стадий."""

    partition: Partition
    epsilon: float
    t_a: float
    t_b: float
    t_c: float
    r_a: int
    r_b: int
    r_c: int
    schedule_bound: ScheduleBound = "matrix_element"
    grid_points: int = DEFAULT_GRID_POINTS

    def __post_init__(self) -> None:
        for name in ("t_a", "t_b", "t_c"):
            if not getattr(self, name) > 0:
                raise ContractError(f"StagePlan: {name} должно быть > 0")
        for name in ("r_a", "r_b", "r_c"):
            if getattr(self, name) < 1:
                raise ContractError(f"StagePlan: {name} должно быть >= 1")

    @property
    def use_bound(self) -> bool:
        return self.schedule_bound == "norm"

    @property
    def rc_ratio(self) -> float:
        """r_C / T_C — насколько число шагов стадии C соизмеримо с её временем."""
        return self.r_c / self.t_c

    @property
    def wall_time_model(self) -> float:
        """T = (T_A + T_B) * r_C."""
        return (self.t_a + self.t_b) * self.r_c

    def to_dict(self) -> Dict[str, Any]:
        return {
            "partition": self.partition.to_dict(),
            "epsilon": self.epsilon,
            "t_a": self.t_a,
            "t_b": self.t_b,
            "t_c": self.t_c,
            "r_a": self.r_a,
            "r_b": self.r_b,
            "r_c": self.r_c,
            "rc_ratio": self.rc_ratio,
            "schedule_bound": self.schedule_bound,
            "grid_points": self.grid_points,
        }


@dataclass(frozen=True, eq=False)
class UProgram:
    """Последовательность примитивных экспонент стадий A и B.

    forward — U, backward — U† (обратный порядок, углы с минусом).
    """

    dim: int
    steps: Tuple[Step, ...]

    def __post_init__(self) -> None:
        for h, _ in self.steps:
            if h.dim != self.dim:
                raise ContractError(f"UProgram: шаг на {h.dim} в программе на {self.dim}")

    def __len__(self) -> int:
        return len(self.steps)

    def forward(self, block: np.ndarray) -> np.ndarray:
        return apply_steps(list(self.steps), block)

    def backward(self, block: np.ndarray) -> np.ndarray:
        for h, theta in reversed(self.steps):
            block = h.expm_block(-theta, block)
        return block


@dataclass(frozen=True)
class StageDiagnostics:
    stage: str
    total_time: float
    steps: int
    fidelity: float
    route: str
    extra: Dict[str, Any] = field(default_factory=dict)
    # (шаг, s_j, верность основному уровню H(s_j)); в to_dict не входит
    trace: List[Tuple[int, float, float]] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        data = {
            "stage": self.stage,
            "total_time": self.total_time,
            "steps": self.steps,
            "fidelity": self.fidelity,
            "route": self.route,
        }
        data.update(self.extra)
        return data


@dataclass(frozen=True)
class NestedRunReport:
    """Итог одного вложенного прогона.

    measurement_histogram: {базисный индекс: вероятность}, только p >= HISTOGRAM_FLOOR.
    """

    status: RunStatus
    label: str
    partition: Partition
    census: SolutionCensus
    config: Dict[str, Any]
    plan: Optional[StagePlan] = None
    fidelity_after_a: float = 0.0
    fidelity_after_b: float = 0.0
    branch_phases: Dict[int, float] = field(default_factory=dict)
    final_solution_mass: float = 0.0
    measurement_histogram: Dict[int, float] = field(default_factory=dict)
    wall_time_model: float = 0.0
    eq36_scale: float = 0.0
    oracle_assisted: bool = True
    stages: List[StageDiagnostics] = field(default_factory=list)
    samples: Dict[int, int] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.measurement_histogram:
            total = sum(self.measurement_histogram.values())
            if abs(total - 1.0) > 1e-9:
                raise ContractError(f"гистограмма не нормирована: сумма {total:.12f}")

    @property
    def exit_code(self) -> int:
        return {"ok": 0, "unsatisfiable": 3, "no_partial_solutions": 4}[self.status]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "status": self.status,
            "label": self.label,
            "partition": self.partition.to_dict(),
            "census": self.census.to_dict(),
            "config": self.config,
            "plan": self.plan.to_dict() if self.plan else None,
            "fidelity_after_a": self.fidelity_after_a,
            "fidelity_after_b": self.fidelity_after_b,
            "branch_phases": {str(a): p for a, p in sorted(self.branch_phases.items())},
            "final_solution_mass": self.final_solution_mass,
            "measurement_histogram": {
                str(i): p for i, p in sorted(self.measurement_histogram.items())
            },
            "wall_time_model": self.wall_time_model,
            "eq36_scale": self.eq36_scale,
            "oracle_assisted": self.oracle_assisted,
            "stages": [s.to_dict() for s in self.stages],
            "samples": {str(i): c for i, c in sorted(self.samples.items())},
        }
