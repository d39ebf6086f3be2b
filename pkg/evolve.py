from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from scipy import linalg
from scipy.sparse.linalg import expm_multiply

from config import (
    DEFAULT_EPSILON,
    DEFAULT_GRID_POINTS,
    DEFAULT_R_MULTIPLIER,
    DEFAULT_SUBSTEP_MULTIPLIER,
    DEGENERACY_TOL,
    DENSE_CAP,
    DENSE_NORM_CAP,
    ESTIMATE_BATCH,
)
from errors import ContractError, InputError, ResourceError
from hilbert import (
    StateVector,
    StructuredHamiltonian,
    commutator,
    dense_propagator,
    operator_norm,
    to_dense,
)
from hilbert_spectrum import default_grid, gap_profile, invariant_subspace, reduce
from schedule import Schedule, local_schedule

log = logging.getLogger(__name__)

# Допустимый дрейф нормы за полный прогон
NORM_DRIFT_TOL = 1e-9

# Колонки CSV-трассы дискретной эволюции
TRACE_COLUMNS = ("step", "s", "ground_fidelity")

# Примитивный шаг: множитель-гамильтониан и угол theta в e^{-i theta H}
Step = Tuple[StructuredHamiltonian, float]


@dataclass(frozen=True, eq=False)
class EvolutionResult:
    final_state: StateVector
    steps: int
    fidelity_to_ground: float
    s_points: np.ndarray
    total_time: float
    engine: str
    norm_drift: float = 0.0
    trace: List[Tuple[int, float, float]] = field(default_factory=list)

    def __post_init__(self) -> None:
        if self.steps < 1:
            raise ContractError(f"число шагов эволюции {self.steps} < 1")


@dataclass(frozen=True)
class ErrorBudget:
    """Аналитические оценки ошибок дискретизации и их измеренные значения.

    piecewise — замена H(t) кусочно-постоянным H'(t), ‖U − U'‖;
    trotter   — замена e^{-iH'(s_j)ΔT} произведением двух экспонент, ‖U' − ΠU''‖.
    estimated=True — нормы оценены на пачке случайных состояний, а не точно.
    """

    total_time: float
    steps: int
    h_diff_norm: float
    commutator_norm: float
    piecewise_bound: float
    trotter_bound_scale: float
    measured_piecewise: float
    measured_trotter: float
    estimated: bool = False

    @property
    def trotter_constant(self) -> float:
        if self.trotter_bound_scale <= 0:
            return 0.0
        return self.measured_trotter / self.trotter_bound_scale

    @property
    def piecewise_ok(self) -> bool:
        return self.measured_piecewise <= self.piecewise_bound + 1e-12

    @property
    def trotter_ok(self) -> bool:
        return self.measured_trotter <= 10.0 * self.trotter_bound_scale + 1e-12

    def to_dict(self) -> Dict[str, Any]:
        return {
            "total_time": self.total_time,
            "steps": self.steps,
            "h_diff_norm": self.h_diff_norm,
            "commutator_norm": self.commutator_norm,
            "piecewise_bound": self.piecewise_bound,
            "trotter_bound_scale": self.trotter_bound_scale,
            "measured_piecewise": self.measured_piecewise,
            "measured_trotter": self.measured_trotter,
            "trotter_constant": self.trotter_constant,
            "piecewise_ok": self.piecewise_ok,
            "trotter_ok": self.trotter_ok,
            "estimated": self.estimated,
        }


def default_steps(total_time: float, multiplier: float = DEFAULT_R_MULTIPLIER) -> int:
    """r = max(1, ceil(multiplier * T))."""
    return max(1, math.ceil(multiplier * total_time))


def default_substeps(total_time: float) -> int:
    return DEFAULT_SUBSTEP_MULTIPLIER * default_steps(total_time)


def _check_state(h_i: StructuredHamiltonian, h_f: StructuredHamiltonian, v0: StateVector) -> None:
    if h_i.dim != h_f.dim:
        raise InputError(f"размерности H_i ({h_i.dim}) и H_f ({h_f.dim}) не совпадают")
    if v0.dim != h_i.dim:
        raise InputError(f"размерность состояния {v0.dim} != {h_i.dim}")


def _finish(v: np.ndarray, engine: str) -> Tuple[StateVector, float]:
    drift = abs(float(np.linalg.norm(v)) - 1.0)
    if drift > NORM_DRIFT_TOL:
        log.warning("%s: дрейф нормы %.3e превышает %.0e", engine, drift, NORM_DRIFT_TOL)
    return StateVector.normalized(v), drift


def ground_space_mass(h: StructuredHamiltonian, v: StateVector, *, tol: float = DEGENERACY_TOL) -> float:
    """Квадрат нормы проекции v на всё основное пространство h."""
    if v.dim != h.dim:
        raise InputError(f"размерность состояния {v.dim} != {h.dim}")
    mask = h.ground_mask()
    if mask is not None:
        return float(np.sum(np.abs(v.amplitudes[mask]) ** 2))
    w, vecs = linalg.eigh(to_dense(h))
    ground = vecs[:, w <= w[0] + tol]
    return float(np.sum(np.abs(ground.conj().T @ v.amplitudes) ** 2))


def product_formula_steps(
    h_i: StructuredHamiltonian,
    h_f: StructuredHamiltonian,
    schedule: Schedule,
    r: int,
) -> List[Step]:
    """Примитивы [(H_f, s_j ΔT), (H_i, (1 − s_j) ΔT)] для j = 1..r.

    Порядок — порядок применения к состоянию: сначала множитель H_f, потом H_i.
    """
    for h in (h_i, h_f):
        if not h.supports_exponential:
            raise ContractError(f"{type(h).__name__}: нет замкнутой экспоненты для шага")
    dt = schedule.total_time / r
    steps: List[Step] = []
    for s_j in schedule.step_points(r):
        steps.append((h_f, float(s_j) * dt))
        steps.append((h_i, (1.0 - float(s_j)) * dt))
    return steps


def apply_steps(steps: List[Step], block: np.ndarray) -> np.ndarray:
    for h, theta in steps:
        block = h.expm_block(theta, block)
    return block


def evolve_discretized(
    h_i: StructuredHamiltonian,
    h_f: StructuredHamiltonian,
    schedule: Schedule,
    r: int,
    v0: StateVector,
    *,
    trace: bool = False,
) -> EvolutionResult:
    """Π_j e^{-i(1−s_j)H_iΔT} e^{-i s_j H_f ΔT} |v0>, без экспонент от H(s).

    trace=True дополнительно пишет мгновенную верность основному уровню H(s_j)
    (плотное разложение, только малые размерности).
    """
    _check_state(h_i, h_f, v0)
    steps = product_formula_steps(h_i, h_f, schedule, r)
    s_points = schedule.step_points(r)

    rows: List[Tuple[int, float, float]] = []
    dense_pair = None
    if trace:
        dense_pair = (to_dense(h_i), to_dense(h_f))

    block = v0.amplitudes[:, None].copy()
    for j in range(r):
        block = apply_steps(steps[2 * j : 2 * j + 2], block)
        if dense_pair is not None:
            s_j = float(s_points[j])
            w, vecs = linalg.eigh((1.0 - s_j) * dense_pair[0] + s_j * dense_pair[1])
            ground = vecs[:, w <= w[0] + DEGENERACY_TOL]
            mass = float(np.sum(np.abs(ground.conj().T @ block[:, 0]) ** 2))
            rows.append((j + 1, s_j, mass))

    final, drift = _finish(block[:, 0], "evolve_discretized")
    log.debug("evolve_discretized: dim=%d, r=%d, T=%.4g", h_i.dim, r, schedule.total_time)
    return EvolutionResult(
        final_state=final,
        steps=r,
        fidelity_to_ground=ground_space_mass(h_f, final),
        s_points=s_points,
        total_time=schedule.total_time,
        engine="discretized",
        norm_drift=drift,
        trace=rows,
    )


def _midpoint_s(schedule: Schedule, substeps: int) -> np.ndarray:
    t = schedule.total_time * (np.arange(substeps) + 0.5) / substeps
    return np.asarray(schedule.s_at(t), dtype=np.float64)


def _propagate_reduced(a_i: np.ndarray, a_f: np.ndarray, s_mid: np.ndarray, dt: float, c: np.ndarray) -> np.ndarray:
    """Кусочно-постоянная эволюция в редуцированном базисе по средним точкам."""
    k = a_i.shape[0]
    chunk = max(1, (1 << 20) // max(1, k * k))
    for start in range(0, s_mid.size, chunk):
        ss = s_mid[start : start + chunk]
        stack = (1.0 - ss)[:, None, None] * a_i[None] + ss[:, None, None] * a_f[None]
        w_all, v_all = np.linalg.eigh(stack)
        for w, vecs in zip(w_all, v_all):
            c = vecs @ (np.exp(-1j * dt * w) * (vecs.conj().T @ c))
    return c


def evolve_reference(
    h_i: StructuredHamiltonian,
    h_f: StructuredHamiltonian,
    schedule: Schedule,
    v0: StateVector,
    substeps: Optional[int] = None,
) -> EvolutionResult:
    """Эталонная (непрерывная) эволюция под H(s(t)).

    Динамика точно сводится к инвариантному подпространству v0 относительно H_i и H_f;
    там берутся мелкие кусочно-постоянные шаги в средних точках с разложением H(s).
    """
    _check_state(h_i, h_f, v0)
    n = substeps if substeps is not None else default_substeps(schedule.total_time)
    if n < 1:
        raise InputError(f"substeps должно быть >= 1, получено {n}")

    basis = invariant_subspace(h_i, h_f, v0)
    a_i = reduce(h_i, basis)
    a_f = reduce(h_f, basis)
    c0 = basis.conj().T @ v0.amplitudes

    dt = schedule.total_time / n
    c = _propagate_reduced(a_i, a_f, _midpoint_s(schedule, n), dt, c0)
    final, drift = _finish(basis @ c, "evolve_reference")
    log.debug("evolve_reference: подпространство %d, подшагов %d", basis.shape[1], n)
    return EvolutionResult(
        final_state=final,
        steps=n,
        fidelity_to_ground=ground_space_mass(h_f, final),
        s_points=schedule.step_points(n),
        total_time=schedule.total_time,
        engine="reference",
        norm_drift=drift,
    )


def adiabatic_reference(
    h_i: StructuredHamiltonian,
    h_f: StructuredHamiltonian,
    v0: StateVector,
    epsilon: float = DEFAULT_EPSILON,
    *,
    use_bound: bool = True,
    grid_points: int = DEFAULT_GRID_POINTS,
    substeps: Optional[int] = None,
) -> EvolutionResult:
    """Эталонный адиабатический прогон от v0: профиль на подпространстве v0,
    локальное расписание, evolve_reference.

    По умолчанию расписание строится по оценке ‖H_f − H_i‖: с точным матричным
    элементом итоговая верность около 1 − 4ε² (0.96 при ε = 0.1 для N >= 64),
    с оценкой нормы не ниже 1 − ε².
    """
    profile = gap_profile(h_i, h_f, default_grid(grid_points), start=v0)
    schedule = local_schedule(profile, epsilon, use_bound=use_bound)
    return evolve_reference(h_i, h_f, schedule, v0, substeps)


def minimal_steps(
    h_i: StructuredHamiltonian,
    h_f: StructuredHamiltonian,
    schedule: Schedule,
    v0: StateVector,
    target_fidelity: float,
    *,
    r_max: int = 1 << 16,
) -> int:
    """Наименьшее r, при котором дискретная эволюция даёт верность >= target.

    Удвоение до первого успеха, затем бисекция (предполагается монотонность по r).
    """
    if not 0.0 < target_fidelity <= 1.0:
        raise InputError(f"целевая верность вне (0, 1]: {target_fidelity}")

    def reached(r: int) -> bool:
        return evolve_discretized(h_i, h_f, schedule, r, v0).fidelity_to_ground >= target_fidelity

    hi = 1
    while not reached(hi):
        if hi >= r_max:
            raise ContractError(f"верность {target_fidelity} не достигнута при r <= {r_max}")
        hi = min(2 * hi, r_max)
    lo = hi // 2
    if lo < 1:
        return hi
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if reached(mid):
            hi = mid
        else:
            lo = mid
    return hi


# ---------- ОЦЕНКИ ОШИБОК ----------


def _dense_reference_propagator(
    m_i: np.ndarray, m_f: np.ndarray, schedule: Schedule, substeps: int
) -> np.ndarray:
    dt = schedule.total_time / substeps
    u = np.eye(m_i.shape[0], dtype=np.complex128)
    for s in _midpoint_s(schedule, substeps):
        u = dense_propagator((1.0 - s) * m_i + s * m_f, dt) @ u
    return u


def _dense_piecewise_propagator(m_i: np.ndarray, m_f: np.ndarray, s_points: np.ndarray, dt: float) -> np.ndarray:
    u = np.eye(m_i.shape[0], dtype=np.complex128)
    for s in s_points:
        u = dense_propagator((1.0 - s) * m_i + s * m_f, dt) @ u
    return u


def _estimated_distances(
    m_i: np.ndarray,
    m_f: np.ndarray,
    steps: List[Step],
    schedule: Schedule,
    r: int,
    substeps: int,
    seed: int,
) -> Tuple[float, float]:
    """max ‖(U − U')ψ‖ и max ‖(U' − ΠU'')ψ‖ по пачке случайных состояний."""
    rng = np.random.default_rng(seed)
    dim = m_i.shape[0]
    psi = rng.normal(size=(dim, ESTIMATE_BATCH)) + 1j * rng.normal(size=(dim, ESTIMATE_BATCH))
    psi /= np.linalg.norm(psi, axis=0, keepdims=True)

    dt_fine = schedule.total_time / substeps
    u_ref = psi.copy()
    for s in _midpoint_s(schedule, substeps):
        u_ref = expm_multiply(-1j * dt_fine * ((1.0 - s) * m_i + s * m_f), u_ref)

    dt = schedule.total_time / r
    u_pw = psi.copy()
    for s in schedule.step_points(r):
        u_pw = expm_multiply(-1j * dt * ((1.0 - s) * m_i + s * m_f), u_pw)

    u_pf = apply_steps(steps, psi.copy())
    return (
        float(np.linalg.norm(u_ref - u_pw, axis=0).max()),
        float(np.linalg.norm(u_pw - u_pf, axis=0).max()),
    )


def error_budget(
    h_i: StructuredHamiltonian,
    h_f: StructuredHamiltonian,
    schedule: Schedule,
    r: int,
    *,
    substeps: Optional[int] = None,
    seed: int = 0,
) -> ErrorBudget:
    """Обе аналитические оценки и обе измеренные нормы разностей пропагаторов.

    Точные операторные нормы — при dim <= DENSE_NORM_CAP, до DENSE_CAP — оценка
    на ESTIMATE_BATCH случайных состояниях, выше — ResourceError.
    """
    if h_i.dim != h_f.dim:
        raise InputError(f"размерности H_i ({h_i.dim}) и H_f ({h_f.dim}) не совпадают")
    if r < 1:
        raise InputError(f"число шагов r должно быть >= 1, получено {r}")
    dim = h_i.dim
    if dim > DENSE_CAP:
        raise ResourceError(f"оценка ошибок для dim={dim} превышает лимит {DENSE_CAP}")

    m_i = to_dense(h_i)
    m_f = to_dense(h_f)
    h_diff_norm = operator_norm(m_f - m_i)
    comm_norm = operator_norm(commutator(m_i, m_f))
    total = schedule.total_time
    n_fine = substeps if substeps is not None else DEFAULT_SUBSTEP_MULTIPLIER * r

    steps = product_formula_steps(h_i, h_f, schedule, r)
    if dim <= DENSE_NORM_CAP:
        u_ref = _dense_reference_propagator(m_i, m_f, schedule, n_fine)
        u_pw = _dense_piecewise_propagator(m_i, m_f, schedule.step_points(r), total / r)
        u_pf = apply_steps(steps, np.eye(dim, dtype=np.complex128))
        measured_pw = operator_norm(u_ref - u_pw)
        measured_tr = operator_norm(u_pw - u_pf)
        estimated = False
    else:
        log.info("error_budget: dim=%d > %d, нормы оцениваются на %d состояниях", dim, DENSE_NORM_CAP, ESTIMATE_BATCH)
        measured_pw, measured_tr = _estimated_distances(m_i, m_f, steps, schedule, r, n_fine, seed)
        estimated = True

    budget = ErrorBudget(
        total_time=total,
        steps=r,
        h_diff_norm=h_diff_norm,
        commutator_norm=comm_norm,
        piecewise_bound=math.sqrt(2.0 * (total / r) * h_diff_norm),
        trotter_bound_scale=(total ** 2 / r) * comm_norm,
        measured_piecewise=measured_pw,
        measured_trotter=measured_tr,
        estimated=estimated,
    )
    log.debug(
        "error_budget: T=%.4g r=%d piecewise %.3e/%.3e trotter %.3e/%.3e",
        total,
        r,
        budget.measured_piecewise,
        budget.piecewise_bound,
        budget.measured_trotter,
        budget.trotter_bound_scale,
    )
    return budget
