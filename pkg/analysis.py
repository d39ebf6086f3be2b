"""Модель сложности вложенного поиска: p(n), корень alpha, предсказанное время, фиты."""

from __future__ import annotations

import logging
import math
import sys
from dataclasses import dataclass
from typing import Dict, Iterable, List, Sequence, Tuple

import numpy as np
from scipy.optimize import bisect, minimize_scalar

from config import DEFAULT_BETA_C
from csp import beta_of, solution_mask
from csp_models import CspInstance
from errors import InputError

log = logging.getLogger(__name__)

# ln наибольшего конечного float
MAX_LOG_FLOAT = math.log(sys.float_info.max)

MODEL_COLUMNS = ("x", "predicted_time", "log2_time", "exponent")

# Минимум точек для фита степени
MIN_FIT_POINTS = 4


@dataclass(frozen=True)
class ComplexityModel:
    """Параметры оценки: a = sqrt(d^n_ab), beta_ratio = beta / beta_c."""

    d: int
    n_ab: int
    k: int
    beta: float
    beta_c: float = DEFAULT_BETA_C

    def __post_init__(self) -> None:
        if self.d < 2 or self.n_ab < 1 or self.k < 1:
            raise InputError(f"модель: d={self.d}, n_ab={self.n_ab}, k={self.k} вне допустимых значений")
        if self.beta < 0 or not self.beta_c > 0:
            raise InputError(f"модель: beta={self.beta} < 0 или beta_c={self.beta_c} <= 0")

    @classmethod
    def for_instance(cls, instance: CspInstance, beta_c: float = DEFAULT_BETA_C) -> "ComplexityModel":
        return cls(d=instance.d, n_ab=instance.n_ab, k=instance.k, beta=beta_of(instance), beta_c=beta_c)

    @property
    def beta_ratio(self) -> float:
        return self.beta / self.beta_c

    @property
    def log_a(self) -> float:
        """ln a = (n_ab / 2) ln d."""
        return 0.5 * self.n_ab * math.log(self.d)

    @property
    def alpha(self) -> float:
        return solve_alpha(self.k, self.beta_ratio)


def _check_fraction(x: float) -> float:
    x = float(x)
    if not 0.0 <= x <= 1.0:
        raise InputError(f"доля x вне [0, 1]: {x}")
    return x


def p_model(n: int, model: ComplexityModel) -> float:
    """p(n) ~ d^(−n_ab * beta_ratio * (n / n_ab)^k)."""
    if not 0 <= n <= model.n_ab:
        raise InputError(f"n={n} вне [0, {model.n_ab}]")
    exponent = model.n_ab * model.beta_ratio * (n / model.n_ab) ** model.k
    return float(model.d ** (-exponent))


def solve_alpha(k: int, beta_ratio: float) -> float:
    """Единственный корень beta_ratio * x^k + x − 1 = 0 на [0, 1]."""
    if k < 1:
        raise InputError(f"k должен быть >= 1, получено {k}")
    if beta_ratio < 0:
        raise InputError(f"beta_ratio должен быть >= 0, получено {beta_ratio}")
    if beta_ratio == 0:
        return 1.0
    return float(bisect(lambda x: beta_ratio * x ** k + x - 1.0, 0.0, 1.0, xtol=1e-12))


def predicted_log_time(model: ComplexityModel, x: float) -> float:
    """ln T(x), T(x) = (a^x + a^(1 − beta_ratio x^k)) / a^(1 − beta_ratio)."""
    x = _check_fraction(x)
    la = model.log_a
    r = model.beta_ratio
    return float(np.logaddexp(x * la, (1.0 - r * x ** model.k) * la) - (1.0 - r) * la)


def predicted_time(model: ComplexityModel, x: float) -> float:
    """T(x); math.inf, если T не помещается в float (большие n_ab). Для сравнений — predicted_log_time."""
    log_t = predicted_log_time(model, x)
    if log_t > MAX_LOG_FLOAT:
        return math.inf
    return math.exp(log_t)


def predicted_exponent(model: ComplexityModel, x: float) -> float:
    """Асимптотический показатель по основанию 2 на одну переменную.

    T ~ 2^(e * n_ab), e = (log2 d / 2) * (max(x, 1 − beta_ratio x^k) − (1 − beta_ratio)).
    """
    x = _check_fraction(x)
    r = model.beta_ratio
    return 0.5 * math.log2(model.d) * (max(x, 1.0 - r * x ** model.k) - (1.0 - r))


def optimal_fraction_exact(model: ComplexityModel) -> float:
    """Минимум неупрощённого T(x) на [0, 1].

    Внутренний минимум удовлетворяет beta_ratio * k * x^(k−1) = a^(beta_ratio x^k + x − 1).
    """
    res = minimize_scalar(
        lambda x: predicted_log_time(model, min(1.0, max(0.0, x))),
        bounds=(0.0, 1.0),
        method="bounded",
        options={"xatol": 1e-10},
    )
    return float(res.x)


def compare_alpha(model: ComplexityModel) -> Dict[str, float]:
    """Корень упрощённого уравнения против точного минимума T(x)."""
    reduced = model.alpha
    exact = optimal_fraction_exact(model)
    return {
        "alpha_reduced": reduced,
        "alpha_exact": exact,
        "difference": exact - reduced,
        "exponent_reduced": predicted_exponent(model, reduced),
    }


def optimal_partition(n_ab: int, k: int, beta_ratio: float) -> int:
    """n_a = round(alpha * n_ab), прижатое к [1, n_ab − 1]."""
    if n_ab < 2:
        raise InputError(f"разбиение требует n_ab >= 2, получено {n_ab}")
    alpha = solve_alpha(k, beta_ratio)
    n_a = int(math.floor(alpha * n_ab + 0.5))
    return min(max(n_a, 1), n_ab - 1)


@dataclass(frozen=True)
class ScalingFit:
    sizes: Tuple[float, ...]
    times: Tuple[float, ...]
    exponent: float
    intercept: float
    residual: float


def fit_scaling(sizes: Sequence[float], times: Sequence[float]) -> ScalingFit:
    """Наклон МНК для log(time) против log(size)."""
    x = np.asarray(sizes, dtype=np.float64)
    y = np.asarray(times, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise InputError("fit_scaling: размеры sizes и times не совпадают")
    if x.size < MIN_FIT_POINTS:
        raise InputError(f"fit_scaling: нужно >= {MIN_FIT_POINTS} точек, получено {x.size}")
    if np.any(np.diff(x) <= 0):
        raise InputError("fit_scaling: размеры должны строго возрастать")
    if np.any(x <= 0) or np.any(y <= 0):
        raise InputError("fit_scaling: размеры и времена должны быть > 0")

    lx, ly = np.log(x), np.log(y)
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    return ScalingFit(
        sizes=tuple(float(v) for v in x),
        times=tuple(float(v) for v in y),
        exponent=float(slope),
        intercept=float(intercept),
        residual=float(np.sqrt(np.mean(resid ** 2))),
    )


def empirical_partial_fraction(instances: Iterable[CspInstance], n: int) -> float:
    """Средняя по ансамблю доля M_A / d^n удовлетворяющих присваиваний префикса длины n."""
    fractions: List[float] = []
    for inst in instances:
        mask = solution_mask(inst, n)
        fractions.append(float(mask.sum()) / mask.size)
    if not fractions:
        raise InputError("пустой ансамбль задач")
    return float(np.mean(fractions))


def model_table(model: ComplexityModel, xs: Sequence[float]) -> List[Tuple[float, float, float, float]]:
    """Строки (x, T(x), log2 T(x), асимптотический показатель) для CSV."""
    rows = []
    for x in xs:
        lt = predicted_log_time(model, x)
        rows.append((float(x), predicted_time(model, x), lt / math.log(2), predicted_exponent(model, x)))
    return rows
