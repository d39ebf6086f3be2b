from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import List, Literal, Sequence, Tuple, Union

import numpy as np
from scipy.integrate import cumulative_trapezoid, trapezoid

from config import DEFAULT_EPSILON, MIN_STAGE_TIME
from errors import InputError, ScheduleError
from hilbert_spectrum import GapProfile, grover_profile

log = logging.getLogger(__name__)

ScheduleKind = Literal["linear", "local"]

# Колонки CSV-экспорта расписания
SCHEDULE_COLUMNS = ("t", "s")


def _check_epsilon(epsilon: float) -> float:
    epsilon = float(epsilon)
    if not 0.0 < epsilon < 1.0:
        raise InputError(f"epsilon должен лежать в (0, 1), получено {epsilon}")
    return epsilon


@dataclass(frozen=True)
class AdiabaticParams:
    """Глобальные параметры адиабатического условия: epsilon, g_min, D_max."""

    epsilon: float
    g_min: float
    d_max: float

    def __post_init__(self) -> None:
        _check_epsilon(self.epsilon)
        if not self.g_min > 0:
            raise InputError(f"g_min должен быть > 0, получено {self.g_min}")
        if self.d_max < 0:
            raise InputError(f"d_max должен быть >= 0, получено {self.d_max}")

    @classmethod
    def from_profile(cls, profile: GapProfile, epsilon: float = DEFAULT_EPSILON) -> "AdiabaticParams":
        if profile.has_degenerate:
            raise ScheduleError("профиль содержит точки без возбуждённого уровня")
        return cls(epsilon=epsilon, g_min=profile.min_gap, d_max=profile.d_max)

    def global_time(self) -> float:
        """T = D_max / (epsilon * g_min^2) для линейного прохода."""
        return self.d_max / (self.epsilon * self.g_min ** 2)


@dataclass(frozen=True, eq=False)
class Schedule:
    """Монотонная таблица (t_j, s_j) с s(0)=0, s(T)=1.

    dt_ds — плотность времени на узлах (сколько времени тратится на единицу s).
    """

    kind: ScheduleKind
    total_time: float
    t_knots: np.ndarray
    s_knots: np.ndarray
    dt_ds: np.ndarray
    stretched: bool = False

    def __post_init__(self) -> None:
        t = np.asarray(self.t_knots, dtype=np.float64)
        s = np.asarray(self.s_knots, dtype=np.float64)
        if t.shape != s.shape or t.size < 2:
            raise ScheduleError("таблица расписания: размеры t и s не совпадают")
        if s[0] != 0.0 or s[-1] != 1.0:
            raise ScheduleError("таблица расписания должна начинаться в s=0 и заканчиваться в s=1")
        if np.any(np.diff(s) <= 0):
            raise ScheduleError("s в таблице расписания должно строго возрастать")
        if np.any(np.diff(t) < 0) or t[0] != 0.0:
            raise ScheduleError("t в таблице расписания должно начинаться с 0 и не убывать")
        if not self.total_time > 0:
            raise ScheduleError(f"полное время должно быть > 0, получено {self.total_time}")
        object.__setattr__(self, "t_knots", t)
        object.__setattr__(self, "s_knots", s)

    def s_at(self, t):
        """s(t); t вне [0, T] прижимается к концам."""
        return np.interp(t, self.t_knots, self.s_knots)

    def t_at(self, s):
        return np.interp(s, self.s_knots, self.t_knots)

    def density(self, s):
        """dt/ds в точке s."""
        return np.interp(s, self.s_knots, self.dt_ds)

    def step_points(self, r: int) -> np.ndarray:
        """s_j = s(j T / r), j = 1..r (правый конец каждого интервала)."""
        if r < 1:
            raise InputError(f"число шагов r должно быть >= 1, получено {r}")
        t = self.total_time * np.arange(1, r + 1) / r
        s = np.asarray(self.s_at(t), dtype=np.float64)
        s[-1] = 1.0
        return s

    def rows(self) -> List[Tuple[float, float]]:
        return [(float(t), float(s)) for t, s in zip(self.t_knots, self.s_knots)]


def linear_schedule(total_time: float, points: int = 2) -> Schedule:
    """s(t) = t / T."""
    if not total_time > 0:
        raise InputError(f"T должно быть > 0, получено {total_time}")
    s = np.linspace(0.0, 1.0, max(2, points))
    return Schedule(
        kind="linear",
        total_time=float(total_time),
        t_knots=s * total_time,
        s_knots=s,
        dt_ds=np.full(s.shape, float(total_time)),
    )


def global_schedule(params: AdiabaticParams, *, min_time: float = MIN_STAGE_TIME) -> Schedule:
    """Линейный проход с временем из глобального условия."""
    total = params.global_time()
    if total < min_time:
        log.debug("global_schedule: T=%.4g меньше минимума, берём %.4g", total, min_time)
        total = min_time
    return linear_schedule(total)


def _integrand(profile: GapProfile, epsilon: float, use_bound: bool) -> np.ndarray:
    if profile.has_degenerate:
        bad = float(profile.s[np.flatnonzero(profile.degenerate)[0]])
        raise ScheduleError(f"щель не определена в s={bad:.6f}: интегрировать через неё нельзя")
    if np.any(profile.g <= 0):
        raise ScheduleError("щель закрывается на сетке")
    d = np.full(profile.s.shape, profile.dbound) if use_bound else profile.dmat
    return d / (epsilon * profile.g ** 2)


def schedule_integral(profile: GapProfile, epsilon: float, *, use_bound: bool = False) -> float:
    """(1/epsilon) * интеграл dmat/g^2 ds по трапециям."""
    epsilon = _check_epsilon(epsilon)
    rate = _integrand(profile, epsilon, use_bound)
    return float(trapezoid(rate, profile.s))


def local_schedule(
    profile: GapProfile,
    epsilon: float = DEFAULT_EPSILON,
    *,
    use_bound: bool = False,
    min_time: float = MIN_STAGE_TIME,
) -> Schedule:
    """Локально адиабатическое расписание: ds/dt = epsilon * g(s)^2 / D(s).

    D(s) — точный матричный элемент, при use_bound=True — грубая оценка ‖H_f − H_i‖.
    Если интеграл меньше min_time (тривиальный поиск, M = N), к t добавляется
    равномерный запас (min_time − T) * s.
    """
    epsilon = _check_epsilon(epsilon)
    rate = _integrand(profile, epsilon, use_bound)
    t = cumulative_trapezoid(rate, profile.s, initial=0.0)
    total = float(t[-1])

    stretched = False
    if total < min_time:
        slack = min_time - total
        t = t + slack * profile.s
        rate = rate + slack
        total = float(t[-1])
        stretched = True
        log.debug("local_schedule: интеграл меньше %.4g, расписание растянуто", min_time)

    return Schedule(
        kind="local",
        total_time=total,
        t_knots=t,
        s_knots=profile.s,
        dt_ds=rate,
        stretched=stretched,
    )


def time_for_unstructured(
    n_total: int,
    n_marked: int,
    epsilon: float = DEFAULT_EPSILON,
    grid: Union[Sequence[float], np.ndarray, None] = None,
) -> float:
    """Полное время локального расписания для поиска M из N по аналитическому профилю.

    При M = N интеграл равен нулю: искать нечего.
    """
    if n_total < 1 or n_marked < 1:
        raise InputError(f"N и M должны быть >= 1: N={n_total}, M={n_marked}")
    if n_marked > n_total:
        raise InputError(f"M > N: M={n_marked}, N={n_total}")
    profile = grover_profile(n_marked / n_total, grid)
    return schedule_integral(profile, epsilon)
