"""Вложенный адиабатический поиск: стадии A, B, C и программа U.

Регистр A — младшие разряды базиса: полный индекс = a + N_A * b,
поэтому вектор на AB раскладывается как reshape(N_B, N_A), столбец a — ветвь m_A.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Any, Callable, Dict, Optional, Tuple

import numpy as np

from analysis import optimal_partition
from config import DEFAULT_GRID_POINTS, DENSE_NORM_CAP, ENUM_CAP, HISTOGRAM_FLOOR
from csp import beta_of, census_from_masks, solution_mask
from csp_models import CspInstance, Partition, SolutionCensus
from errors import (
    ContractError,
    InputError,
    NoPartialSolutionsError,
    ResourceError,
    UnsatisfiableError,
)
from evolve import EvolutionResult, default_steps, evolve_discretized, product_formula_steps
from hilbert import (
    Conjugated,
    DiagonalMarked,
    RankOneProjector,
    RankOneUniform,
    StateVector,
    StructuredHamiltonian,
    TensorExtended,
    commutator,
    kron_state,
    operator_norm,
    to_dense,
    uniform_state,
)
from hilbert_spectrum import GapProfile, default_grid, gap_profile, grover_profile, invariant_subspace, reduce
from nested_models import NestedRunReport, StageDiagnostics, StagePlan, UProgram
from run_config import RunConfig
from schedule import Schedule, local_schedule

log = logging.getLogger(__name__)

Pair = Tuple[StructuredHamiltonian, StructuredHamiltonian]
EventHook = Callable[..., None]


@dataclass(frozen=True, eq=False)
class NestedProblem:
    """Задача, разбиение и точные маски решений (A-префикса и всей задачи)."""

    instance: CspInstance
    partition: Partition
    census: Optional[SolutionCensus]
    mask_a: np.ndarray
    mask_ab: np.ndarray

    @classmethod
    def prepare(cls, instance: CspInstance, partition: Partition, *, cap: int = ENUM_CAP) -> "NestedProblem":
        if partition.n_ab != instance.n_ab:
            raise InputError(f"разбиение на {partition.n_ab} переменных для задачи с n_ab={instance.n_ab}")
        if instance.dim > cap:
            raise ResourceError(f"перебор {instance.dim} присваиваний превышает лимит {cap}")
        mask_a = solution_mask(instance, partition.n_a, cap=cap)
        mask_ab = solution_mask(instance, instance.n_ab, cap=cap)
        census = census_from_masks(mask_a, mask_ab)
        log.debug(
            "Задача %s: n_a=%d, M_A=%d, M_AB=%d, M_A^S=%d",
            instance.label,
            partition.n_a,
            census.m_a,
            census.m_ab,
            census.m_a_s,
        )
        return cls(instance=instance, partition=partition, census=census, mask_a=mask_a, mask_ab=mask_ab)

    @property
    def n_a_dim(self) -> int:
        return self.partition.dims(self.instance.d)[0]

    @property
    def n_b_dim(self) -> int:
        return self.partition.dims(self.instance.d)[1]

    @property
    def dim(self) -> int:
        return self.n_a_dim * self.n_b_dim

    def require_census(self) -> SolutionCensus:
        if self.census is None:
            raise ContractError("для расписаний нужен census задачи")
        return self.census


def resolve_partition(instance: CspInstance, config: RunConfig) -> Partition:
    """Явное n_a из конфигурации или optimal_partition с beta_c."""
    n_a = config.explicit_n_a
    if n_a is None:
        n_a = optimal_partition(instance.n_ab, instance.k, beta_of(instance) / config.beta_c)
        log.info("Автоматическое разбиение: n_a=%d из %d", n_a, instance.n_ab)
    return Partition.for_instance(instance, n_a)


def eq36_scale(problem: NestedProblem) -> float:
    """(sqrt(N_A) + sqrt(M_A N_B)) / sqrt(M_AB)."""
    c = problem.require_census()
    if c.m_ab == 0:
        return math.inf
    return (math.sqrt(problem.n_a_dim) + math.sqrt(c.m_a * problem.n_b_dim)) / math.sqrt(c.m_ab)


# ---------- ГАМИЛЬТОНИАНЫ И РАСПИСАНИЯ СТАДИЙ ----------


def stage_a_pair(problem: NestedProblem) -> Pair:
    return RankOneUniform(problem.n_a_dim), DiagonalMarked(problem.mask_a)


def stage_b_pair(problem: NestedProblem) -> Pair:
    """H_i = I_A ⊗ (I − |s_B><s_B|), H_f = H_AB − H_A ⊗ I_B.

    H_f диагонален: 0 там, где a не из M_A или (a, b) — решение, иначе 1.
    """
    h_i = TensorExtended(RankOneUniform(problem.n_b_dim), outer_dim=problem.n_a_dim, on_low=False)
    sat_a = np.tile(problem.mask_a, problem.n_b_dim)
    return h_i, DiagonalMarked(~sat_a | problem.mask_ab)


def stage_a_profile(problem: NestedProblem, grid_points: int = DEFAULT_GRID_POINTS) -> GapProfile:
    census = problem.require_census()
    if census.m_a == 0:
        raise NoPartialSolutionsError("нет ни одного частичного решения на переменных A")
    return grover_profile(census.m_a / problem.n_a_dim, default_grid(grid_points))


def stage_b_profile(problem: NestedProblem, grid_points: int = DEFAULT_GRID_POINTS) -> GapProfile:
    """Размер по min M_B/m_A среди ветвей с решениями; ветви без решений не участвуют."""
    census = problem.require_census()
    fraction = census.min_extensions / problem.n_b_dim if census.m_a_s else 1.0
    return grover_profile(fraction, default_grid(grid_points))


def stage_c_profile(
    problem: NestedProblem, grid_points: int = DEFAULT_GRID_POINTS, *, subspace_cap: int = DENSE_NORM_CAP
) -> GapProfile:
    """Профиль идеальной пары (I − |ψ_AB><ψ_AB|, H_AB).

    До subspace_cap — численно на инвариантном подпространстве ψ_AB,
    выше — аналитическая форма Гровера с долей M_A^S / M_A.
    """
    census = problem.require_census()
    if census.m_a_s == 0:
        raise UnsatisfiableError("у задачи нет ни одного полного решения")
    grid = default_grid(grid_points)
    if census.m_a_s == census.m_a or problem.dim > subspace_cap:
        return grover_profile(census.m_a_s / census.m_a, grid)
    psi = ideal_psi_ab(problem)
    return gap_profile(RankOneProjector(psi.amplitudes), DiagonalMarked(problem.mask_ab), grid, start=psi)


def stage_a_schedule(
    problem: NestedProblem, epsilon: float, *, use_bound: bool = False, grid_points: int = DEFAULT_GRID_POINTS
) -> Schedule:
    return local_schedule(stage_a_profile(problem, grid_points), epsilon, use_bound=use_bound)


def stage_b_schedule(
    problem: NestedProblem, epsilon: float, *, use_bound: bool = False, grid_points: int = DEFAULT_GRID_POINTS
) -> Schedule:
    return local_schedule(stage_b_profile(problem, grid_points), epsilon, use_bound=use_bound)


def stage_c_schedule(
    problem: NestedProblem,
    epsilon: float,
    *,
    use_bound: bool = False,
    grid_points: int = DEFAULT_GRID_POINTS,
    subspace_cap: int = DENSE_NORM_CAP,
) -> Tuple[Schedule, str]:
    profile = stage_c_profile(problem, grid_points, subspace_cap=subspace_cap)
    return local_schedule(profile, epsilon, use_bound=use_bound), profile.route


def plan_stages(
    problem: NestedProblem,
    epsilon: float,
    *,
    r_multipliers: Tuple[float, float, float] = (4.0, 4.0, 4.0),
    schedule_bound: str = "matrix_element",
    grid_points: int = DEFAULT_GRID_POINTS,
) -> StagePlan:
    """T_X — полное время локального расписания, r_X = max(1, ceil(mult_X * T_X))."""
    use_bound = schedule_bound == "norm"
    kw = dict(use_bound=use_bound, grid_points=grid_points)
    t_a = stage_a_schedule(problem, epsilon, **kw).total_time
    t_b = stage_b_schedule(problem, epsilon, **kw).total_time
    t_c = stage_c_schedule(problem, epsilon, **kw)[0].total_time
    plan = StagePlan(
        partition=problem.partition,
        epsilon=epsilon,
        t_a=t_a,
        t_b=t_b,
        t_c=t_c,
        r_a=default_steps(t_a, r_multipliers[0]),
        r_b=default_steps(t_b, r_multipliers[1]),
        r_c=default_steps(t_c, r_multipliers[2]),
        schedule_bound=schedule_bound,  # type: ignore[arg-type]
        grid_points=grid_points,
    )
    log.info(
        "План: T_A=%.3f T_B=%.3f T_C=%.3f, r=(%d, %d, %d)",
        t_a,
        t_b,
        t_c,
        plan.r_a,
        plan.r_b,
        plan.r_c,
    )
    return plan


# ---------- ЦЕЛЕВЫЕ СОСТОЯНИЯ И ДИАГНОСТИКА ВЕТВЕЙ ----------


def ideal_psi_ab(problem: NestedProblem, phases: Optional[Dict[int, float]] = None) -> StateVector:
    """Целевое состояние после стадии B.

    Ветвь m_A с решениями — равномерная суперпозиция продолжений,
    ветвь без решений — |s_B>; каждая ветвь с фазой e^{i phi_{m_A}}.
    """
    census = problem.require_census()
    if census.m_a == 0:
        raise NoPartialSolutionsError("нет ни одного частичного решения на переменных A")
    n_a, n_b = problem.n_a_dim, problem.n_b_dim
    sol = problem.mask_ab.reshape(n_b, n_a)
    psi = np.zeros((n_b, n_a), dtype=np.complex128)
    for a, m in census.m_b_given.items():
        if m >= 1:
            column = sol[:, a] / math.sqrt(m)
        else:
            column = np.full(n_b, n_b ** -0.5)
        phase = np.exp(1j * phases.get(a, 0.0)) if phases else 1.0
        psi[:, a] = phase * column
    return StateVector(psi.ravel() / math.sqrt(census.m_a))


def branch_analysis(problem: NestedProblem, before: StateVector, after: StateVector) -> Dict[str, Any]:
    """Разбор состояния на AB по ветвям m_A.

    fidelity — верность ψ_AB с наилучшими фазами ветвей (Σ|o_a|)^2 / M_A,
    phases — arg o_a, leakage — max изменение нормы ветви,
    ns_deviation — max отклонение ветви без решений от |s_B>.
    """
    census = problem.require_census()
    n_a, n_b = problem.n_a_dim, problem.n_b_dim
    v_after = after.amplitudes.reshape(n_b, n_a)
    v_before = before.amplitudes.reshape(n_b, n_a)
    norms_after = np.sum(np.abs(v_after) ** 2, axis=0)
    norms_before = np.sum(np.abs(v_before) ** 2, axis=0)
    sol = problem.mask_ab.reshape(n_b, n_a)

    phases: Dict[int, float] = {}
    per_branch: Dict[int, float] = {}
    total_overlap = 0.0
    ns_deviation = 0.0
    for a, m in sorted(census.m_b_given.items()):
        target = sol[:, a] / math.sqrt(m) if m >= 1 else np.full(n_b, n_b ** -0.5)
        overlap = complex(np.vdot(target, v_after[:, a]))
        phases[a] = float(np.angle(overlap))
        total_overlap += abs(overlap)
        norm = float(norms_after[a])
        per_branch[a] = abs(overlap) ** 2 / norm if norm > 0 else 0.0
        if m == 0:
            ns_deviation = max(ns_deviation, 1.0 - per_branch[a])

    return {
        "fidelity": min(1.0, total_overlap ** 2 / census.m_a),
        "phases": phases,
        "branch_fidelities": per_branch,
        "leakage": float(np.max(np.abs(norms_after - norms_before))),
        "ns_deviation": ns_deviation,
    }


def decoupling_residuals(
    problem: NestedProblem,
    s_values: Tuple[float, ...] = (0.0, 0.25, 0.5, 0.75, 1.0),
    *,
    cap: int = DENSE_NORM_CAP,
) -> Dict[str, float]:
    """Два структурных свойства H(s) стадии B прямой проверкой матричных элементов.

    offdiag_max     — max |<j, m_A| H(s) |m_A', j'>| при m_A != m_A' из M_A;
    annihilation_max — max ‖H(s) (|i> ⊗ |s_B>)‖ при i не из M_A.
    """
    h_i, h_f = stage_b_pair(problem)
    m_i = to_dense(h_i, cap=cap)
    m_f = to_dense(h_f, cap=cap)
    n_a, n_b = problem.n_a_dim, problem.n_b_dim
    idx = np.flatnonzero(problem.mask_a)
    outside = np.flatnonzero(~problem.mask_a)

    cross = ~np.eye(idx.size, dtype=bool)[None, :, None, :]
    test_states = np.zeros((n_b, n_a, outside.size), dtype=np.complex128)
    test_states[:, outside, np.arange(outside.size)] = n_b ** -0.5
    test_states = test_states.reshape(n_a * n_b, outside.size)

    offdiag = 0.0
    annihilation = 0.0
    for s in s_values:
        h = (1.0 - s) * m_i + s * m_f
        blocks = h.reshape(n_b, n_a, n_b, n_a)[:, idx][:, :, :, idx]
        if idx.size > 1:
            offdiag = max(offdiag, float(np.max(np.abs(blocks) * cross)))
        if outside.size:
            annihilation = max(annihilation, float(np.max(np.linalg.norm(h @ test_states, axis=0))))
    return {"offdiag_max": offdiag, "annihilation_max": annihilation}


# ---------- СТАДИИ ----------


def stage_a(
    problem: NestedProblem,
    epsilon: float,
    r_a: int,
    *,
    use_bound: bool = False,
    grid_points: int = DEFAULT_GRID_POINTS,
    trace: bool = False,
) -> Tuple[StateVector, StageDiagnostics]:
    """Адиабатический поиск на регистре A от |s_A> к суперпозиции M_A."""
    census = problem.require_census()
    schedule = stage_a_schedule(problem, epsilon, use_bound=use_bound, grid_points=grid_points)
    h_i, h_f = stage_a_pair(problem)
    v0 = uniform_state(problem.instance.d, problem.partition.n_a)
    result = evolve_discretized(h_i, h_f, schedule, r_a, v0, trace=trace)

    target = problem.mask_a / math.sqrt(census.m_a)
    fidelity = float(abs(np.vdot(target, result.final_state.amplitudes)) ** 2)
    diag = StageDiagnostics(
        stage="A",
        total_time=schedule.total_time,
        steps=r_a,
        fidelity=fidelity,
        route="analytic",
        extra={
            "ground_mass": result.fidelity_to_ground,
            "norm_drift": result.norm_drift,
            "stretched": schedule.stretched,
        },
        trace=result.trace,
    )
    log.info("Стадия A: T=%.3f r=%d верность=%.6f", schedule.total_time, r_a, fidelity)
    return result.final_state, diag


def stage_b(
    problem: NestedProblem,
    state_a: StateVector,
    epsilon: float,
    r_b: int,
    *,
    use_bound: bool = False,
    grid_points: int = DEFAULT_GRID_POINTS,
    trace: bool = False,
    diagnostics_cap: int = DENSE_NORM_CAP,
) -> Tuple[StateVector, StageDiagnostics]:
    """Условное продолжение: |ψ_A> ⊗ |s_B> -> Σ_{m_A} |m_A> |ψ_{B/m_A}> с фазами ветвей."""
    problem.require_census()
    if state_a.dim != problem.n_a_dim:
        raise InputError(f"состояние A размерности {state_a.dim}, ожидалось {problem.n_a_dim}")
    schedule = stage_b_schedule(problem, epsilon, use_bound=use_bound, grid_points=grid_points)
    h_i, h_f = stage_b_pair(problem)
    v0 = kron_state(state_a, uniform_state(problem.instance.d, problem.partition.n_b))
    result = evolve_discretized(h_i, h_f, schedule, r_b, v0, trace=trace)

    branches = branch_analysis(problem, v0, result.final_state)
    extra: Dict[str, Any] = {
        "phases": branches["phases"],
        "branch_fidelities": {str(a): f for a, f in branches["branch_fidelities"].items()},
        "leakage": branches["leakage"],
        "ns_deviation": branches["ns_deviation"],
        "norm_drift": result.norm_drift,
        "stretched": schedule.stretched,
    }
    if problem.dim <= diagnostics_cap:
        extra.update(decoupling_residuals(problem, cap=diagnostics_cap))
    if branches["leakage"] > 1e-9:
        log.warning("Стадия B: утечка между ветвями %.3e", branches["leakage"])

    diag = StageDiagnostics(
        stage="B",
        total_time=schedule.total_time,
        steps=r_b,
        fidelity=branches["fidelity"],
        route="analytic",
        extra=extra,
        trace=result.trace,
    )
    log.info("Стадия B: T=%.3f r=%d верность=%.6f", schedule.total_time, r_b, branches["fidelity"])
    return result.final_state, diag


def build_u(problem: NestedProblem, plan: StagePlan) -> UProgram:
    """U = (шаги стадии B) · (шаги стадии A ⊗ I_B), в порядке применения."""
    kw = dict(use_bound=plan.use_bound, grid_points=plan.grid_points)
    h_i_a, h_f_a = stage_a_pair(problem)
    lifted = {
        id(h): TensorExtended(h, outer_dim=problem.n_b_dim, on_low=True) for h in (h_i_a, h_f_a)
    }
    steps_a = product_formula_steps(h_i_a, h_f_a, stage_a_schedule(problem, plan.epsilon, **kw), plan.r_a)
    h_i_b, h_f_b = stage_b_pair(problem)
    steps_b = product_formula_steps(h_i_b, h_f_b, stage_b_schedule(problem, plan.epsilon, **kw), plan.r_b)

    steps = [(lifted[id(h)], theta) for h, theta in steps_a] + steps_b
    log.debug("UProgram: %d примитивов", len(steps))
    return UProgram(dim=problem.dim, steps=tuple(steps))


def stage_c_pair(problem: NestedProblem, u: UProgram) -> Pair:
    """H_i = U (I − |s><s|) U†, H_f = H_AB."""
    if u.dim != problem.dim:
        raise InputError(f"UProgram на {u.dim}, задача на {problem.dim}")
    return Conjugated(u, RankOneUniform(problem.dim)), DiagonalMarked(problem.mask_ab)


def initial_state_c(problem: NestedProblem, u: UProgram) -> StateVector:
    s = uniform_state(problem.instance.d, problem.instance.n_ab)
    return StateVector.normalized(u.forward(s.amplitudes[:, None])[:, 0])


def stage_c_norms(problem: NestedProblem, u: UProgram, *, cap: int = DENSE_NORM_CAP) -> Dict[str, float]:
    """‖H_i − H_f‖ и ‖[H_i, H_f]‖ стадии C на всём пространстве и на динамическом подпространстве."""
    census = problem.require_census()
    h_i, h_f = stage_c_pair(problem, u)
    m_i = to_dense(h_i, cap=cap)
    m_f = to_dense(h_f, cap=cap)
    basis = invariant_subspace(h_i, h_f, initial_state_c(problem, u))
    a_i, a_f = reduce(h_i, basis), reduce(h_f, basis)
    return {
        "h_diff_norm_full": operator_norm(m_i - m_f),
        "h_diff_norm_subspace": operator_norm(a_i - a_f),
        "commutator_norm_full": operator_norm(commutator(m_i, m_f)),
        "commutator_norm_subspace": operator_norm(commutator(a_i, a_f)),
        "commutator_reference": math.sqrt(census.m_a_s / census.m_a),
    }


def conjugation_check(
    problem: NestedProblem, u: UProgram, t: float = 1.0, *, cap: int = DENSE_NORM_CAP
) -> Dict[str, float]:
    """‖e^{-iH_i t} − e^{-it(I − |ψ><ψ|)}‖, ψ — идеальная цель с измеренными фазами ветвей.

    Для двух ранг-один проекторов расстояние равно |1 − e^{-it}| sqrt(1 − F), F = |<φ|ψ>|^2.
    """
    if problem.dim > cap:
        raise ResourceError(f"плотная проверка сопряжения для dim={problem.dim} превышает {cap}")
    phi = initial_state_c(problem, u)
    branches = branch_analysis(problem, phi, phi)
    psi = ideal_psi_ab(problem, branches["phases"])

    eye = np.eye(problem.dim, dtype=np.complex128)
    h_i, _ = stage_c_pair(problem, u)
    measured = h_i.expm_block(t, eye)
    ideal = RankOneProjector(psi.amplitudes).expm_block(t, eye)
    fidelity = float(abs(np.vdot(psi.amplitudes, phi.amplitudes)) ** 2)
    return {
        "conjugation_time": t,
        "conjugation_distance": operator_norm(measured - ideal),
        "conjugation_expected": abs(1.0 - np.exp(-1j * t)) * math.sqrt(max(0.0, 1.0 - fidelity)),
        "conjugation_fidelity": fidelity,
        # 2(1 − F) ограничивает расстояние только при sin(t/2) <= sqrt(1 − F)
        "conjugation_bound": 2.0 * (1.0 - fidelity),
    }


def stage_c(
    problem: NestedProblem,
    u: UProgram,
    epsilon: float,
    r_c: int,
    *,
    use_bound: bool = False,
    grid_points: int = DEFAULT_GRID_POINTS,
    trace: bool = False,
    diagnostics_cap: int = DENSE_NORM_CAP,
) -> Tuple[EvolutionResult, StageDiagnostics]:
    """Глобальный поиск с сопряжённым начальным гамильтонианом.

    Каждый шаг: e^{-i s_j H_AB ΔT}, затем U† -> e^{-i(1−s_j)H_0 ΔT} -> U.
    """
    schedule, route = stage_c_schedule(problem, epsilon, use_bound=use_bound, grid_points=grid_points)
    h_i, h_f = stage_c_pair(problem, u)
    result = evolve_discretized(h_i, h_f, schedule, r_c, initial_state_c(problem, u), trace=trace)

    extra: Dict[str, Any] = {"norm_drift": result.norm_drift, "stretched": schedule.stretched}
    if problem.dim <= diagnostics_cap:
        extra.update(stage_c_norms(problem, u, cap=diagnostics_cap))
        extra.update(conjugation_check(problem, u, cap=diagnostics_cap))

    diag = StageDiagnostics(
        stage="C",
        total_time=schedule.total_time,
        steps=r_c,
        fidelity=result.fidelity_to_ground,
        route=route,
        extra=extra,
        trace=result.trace,
    )
    log.info("Стадия C: T=%.3f r=%d масса решений=%.6f", schedule.total_time, r_c, result.fidelity_to_ground)
    return result, diag


# ---------- ПРОГОН ЦЕЛИКОМ ----------


def measurement_histogram(state: StateVector) -> Dict[int, float]:
    """Точные вероятности |amp|^2 выше порога."""
    probs = state.probabilities()
    floor = min(HISTOGRAM_FLOOR, 1e-10 / state.dim)
    return {int(i): float(probs[i]) for i in np.flatnonzero(probs >= floor)}


def sample_measurements(histogram: Dict[int, float], shots: int, seed: Optional[int] = None) -> Dict[int, int]:
    """Выборка измерений из гистограммы (демонстрация, детерминирована по seed)."""
    if shots < 1:
        raise InputError(f"shots должен быть >= 1, получено {shots}")
    if not histogram:
        raise InputError("пустая гистограмма")
    keys = np.array(sorted(histogram), dtype=np.int64)
    p = np.array([histogram[k] for k in keys], dtype=np.float64)
    rng = np.random.default_rng(seed)
    draws = rng.choice(keys.size, size=shots, p=p / p.sum())
    counts = np.bincount(draws, minlength=keys.size)
    return {int(keys[i]): int(c) for i, c in enumerate(counts) if c}


def run_nested(
    instance: CspInstance,
    config: Optional[RunConfig] = None,
    partition: Optional[Partition] = None,
    on_event: Optional[EventHook] = None,
) -> NestedRunReport:
    """census -> A -> B -> U -> C -> измерение.

    Задачи без решений дают отчёт со статусом, а не исключение.
    on_event(event, **поля) вызывается после census и каждой стадии.
    """
    emit = on_event or (lambda event, **fields: None)
    config = config or RunConfig()
    partition = partition or resolve_partition(instance, config)
    problem = NestedProblem.prepare(instance, partition, cap=config.enum_cap)
    census = problem.require_census()
    emit("census_done", n_a=partition.n_a, m_a=census.m_a, m_ab=census.m_ab, m_a_s=census.m_a_s)
    base = dict(label=instance.label, partition=partition, census=census, config=config.to_dict())

    if census.m_a == 0:
        log.warning("Задача %s: нет частичных решений на A", instance.label)
        return NestedRunReport(status="no_partial_solutions", **base)
    if census.m_ab == 0:
        log.warning("Задача %s: нет полных решений", instance.label)
        return NestedRunReport(status="unsatisfiable", **base)

    kw = dict(use_bound=config.use_bound, grid_points=config.grid_points)
    plan = plan_stages(
        problem,
        config.epsilon,
        r_multipliers=(config.r_mult_a, config.r_mult_b, config.r_mult_c),
        schedule_bound=config.schedule_bound,
        grid_points=config.grid_points,
    )
    # трасса требует плотного разложения H(s_j) на каждом шаге
    kw["trace"] = config.trace and problem.dim <= config.diagnostics_cap
    state_a, diag_a = stage_a(problem, plan.epsilon, plan.r_a, **kw)
    emit("stage_a_done", fidelity=diag_a.fidelity, steps=plan.r_a)
    _, diag_b = stage_b(problem, state_a, plan.epsilon, plan.r_b, diagnostics_cap=config.diagnostics_cap, **kw)
    emit("stage_b_done", fidelity=diag_b.fidelity, steps=plan.r_b)
    u = build_u(problem, plan)
    result_c, diag_c = stage_c(problem, u, plan.epsilon, plan.r_c, diagnostics_cap=config.diagnostics_cap, **kw)
    emit("stage_c_done", mass=result_c.fidelity_to_ground, steps=plan.r_c, route=diag_c.route)

    final = result_c.final_state
    histogram = measurement_histogram(final)
    solution_mass = float(final.probabilities()[problem.mask_ab].sum())
    samples = sample_measurements(histogram, config.shots, config.seed) if config.shots else {}

    return NestedRunReport(
        status="ok",
        plan=plan,
        fidelity_after_a=diag_a.fidelity,
        fidelity_after_b=diag_b.fidelity,
        branch_phases=dict(diag_b.extra["phases"]),
        final_solution_mass=solution_mass,
        measurement_histogram=histogram,
        wall_time_model=plan.wall_time_model,
        eq36_scale=eq36_scale(problem),
        stages=[diag_a, diag_b, diag_c],
        samples=samples,
        **base,
    )
