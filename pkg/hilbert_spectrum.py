from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from config import DEFAULT_GRID_POINTS, DEGENERACY_TOL, DENSE_CAP, SUBSPACE_CAP
from errors import InputError, ResourceError
from hilbert import StateVector, StructuredHamiltonian, operator_norm, to_dense

log = logging.getLogger(__name__)

# Колонки CSV-экспорта профиля
PROFILE_COLUMNS = ("s", "E0", "E1", "g", "dmat")

# Порог отсечения при замыкании подпространства
_CLOSURE_TOL = 1e-10

# Сколько элементов (точки сетки * k * k) разрешаем собирать в одну пачку eigh
_BATCH_ELEMENTS = 1 << 22


@dataclass(frozen=True, eq=False)
class GapProfile:
    """Щель и матричный элемент dH/ds на сетке по s.

    route:
      "dense"    — плотное разложение на всём пространстве,
      "subspace" — разложение на инвариантном подпространстве стартового вектора,
      "analytic" — двухуровневая формула для пары Гровера.

    dbound — ‖H_f − H_i‖ на том пространстве, где считался профиль.
    degenerate — точки, где первого возбуждённого уровня нет (щель не определена).
    """

    s: np.ndarray
    e0: np.ndarray
    e1: np.ndarray
    g: np.ndarray
    dmat: np.ndarray
    dbound: float
    degenerate: np.ndarray
    route: str = "dense"

    @property
    def min_gap(self) -> float:
        ok = ~self.degenerate
        if not ok.any():
            return 0.0
        return float(self.g[ok].min())

    @property
    def d_max(self) -> float:
        return float(self.dmat.max()) if self.dmat.size else 0.0

    @property
    def has_degenerate(self) -> bool:
        return bool(self.degenerate.any())

    @property
    def argmin_s(self) -> float:
        """Точка сетки с минимальной щелью."""
        g = np.where(self.degenerate, np.inf, self.g)
        return float(self.s[int(np.argmin(g))])

    def rows(self) -> List[Tuple[float, float, float, float, float]]:
        return [
            (float(s), float(e0), float(e1), float(g), float(dm))
            for s, e0, e1, g, dm in zip(self.s, self.e0, self.e1, self.g, self.dmat)
        ]


def default_grid(points: int = DEFAULT_GRID_POINTS) -> np.ndarray:
    if points < 2:
        raise InputError(f"сетка требует >= 2 точек, получено {points}")
    return np.linspace(0.0, 1.0, points)


def _check_grid(grid: Union[Sequence[float], np.ndarray, None]) -> np.ndarray:
    s = default_grid() if grid is None else np.asarray(grid, dtype=np.float64)
    if s.ndim != 1 or s.size < 2:
        raise InputError("сетка по s должна содержать >= 2 точек")
    if s[0] != 0.0 or s[-1] != 1.0:
        raise InputError(f"сетка должна покрывать [0, 1], получено [{s[0]}, {s[-1]}]")
    if np.any(np.diff(s) <= 0):
        raise InputError("сетка по s должна строго возрастать")
    return s


def invariant_subspace(
    h_i: StructuredHamiltonian,
    h_f: StructuredHamiltonian,
    start: Union[StateVector, np.ndarray],
    *,
    cap: int = SUBSPACE_CAP,
) -> np.ndarray:
    """Ортонормированный базис наименьшего подпространства, содержащего start
    и замкнутого относительно h_i и h_f. Столбцы — базисные векторы.

    Для пары "ранг один + диагональный проектор" подпространство двумерно.
    """
    v = start.amplitudes if isinstance(start, StateVector) else np.asarray(start, dtype=np.complex128)
    if v.shape[0] != h_i.dim or h_i.dim != h_f.dim:
        raise InputError("invariant_subspace: размерности не совпадают")

    basis = np.zeros((h_i.dim, min(cap, h_i.dim) + 1), dtype=np.complex128)
    basis[:, 0] = v / np.linalg.norm(v)
    size = 1
    frontier = 0
    while frontier < size:
        q = basis[:, frontier : frontier + 1]
        frontier += 1
        for h in (h_i, h_f):
            w = h.apply_block(q)[:, 0]
            q_cur = basis[:, :size]
            # двойной проход Грама–Шмидта
            for _ in range(2):
                w = w - q_cur @ (q_cur.conj().T @ w)
            norm = float(np.linalg.norm(w))
            if norm <= _CLOSURE_TOL:
                continue
            if size >= cap or size >= h_i.dim:
                raise ResourceError(f"инвариантное подпространство больше лимита {cap}")
            basis[:, size] = w / norm
            size += 1

    log.debug("Инвариантное подпространство: dim=%d из %d", size, h_i.dim)
    return basis[:, :size]


def reduce(h: StructuredHamiltonian, basis: np.ndarray) -> np.ndarray:
    """Q† H Q — матрица оператора на подпространстве."""
    a = basis.conj().T @ h.apply_block(basis)
    return (a + a.conj().T) / 2


def _profile_from_matrices(
    a_i: np.ndarray,
    a_f: np.ndarray,
    s: np.ndarray,
    route: str,
    tol: float,
) -> GapProfile:
    k = a_i.shape[0]
    diff = a_f - a_i
    e0 = np.zeros_like(s)
    e1 = np.zeros_like(s)
    g = np.zeros_like(s)
    dmat = np.zeros_like(s)
    degenerate = np.zeros(s.shape, dtype=bool)

    chunk = max(1, _BATCH_ELEMENTS // max(1, k * k))
    for start in range(0, s.size, chunk):
        ss = s[start : start + chunk]
        stack = (1.0 - ss)[:, None, None] * a_i[None] + ss[:, None, None] * a_f[None]
        w_all, v_all = np.linalg.eigh(stack)
        for off, (w, vecs) in enumerate(zip(w_all, v_all)):
            j = start + off
            e0[j] = w[0]
            above = np.flatnonzero(w > w[0] + tol)
            if above.size == 0:
                degenerate[j] = True
                e1[j] = w[0]
                continue
            first = int(above[0])
            e1[j] = w[first]
            g[j] = w[first] - w[0]
            ground = vecs[:, :first]
            excited = vecs[:, first : first + np.count_nonzero(np.abs(w - w[first]) <= tol)]
            # норма блока <E1|dH/ds|E0> не зависит от выбора базиса в вырожденных уровнях
            block = excited.conj().T @ (diff @ ground)
            dmat[j] = float(np.linalg.norm(block, 2)) if block.size else 0.0

    if degenerate.any():
        log.warning("Профиль (%s): %d точек без возбуждённого уровня", route, int(degenerate.sum()))

    return GapProfile(
        s=s,
        e0=e0,
        e1=e1,
        g=g,
        dmat=dmat,
        dbound=operator_norm(diff, cap=max(DENSE_CAP, k)),
        degenerate=degenerate,
        route=route,
    )


def gap_profile(
    h_i: StructuredHamiltonian,
    h_f: StructuredHamiltonian,
    grid: Union[Sequence[float], np.ndarray, None] = None,
    *,
    start: Optional[Union[StateVector, np.ndarray]] = None,
    cap: int = DENSE_CAP,
    tol: float = DEGENERACY_TOL,
) -> GapProfile:
    """Две нижние энергии (1−s)H_i + sH_f и |<E1|H_f − H_i|E0>| на сетке.

    Без start — плотное разложение всего пространства (dim <= cap).
    Со start — точная редукция на инвариантное подпространство стартового
    вектора: уровни, не связанные с динамикой, не портят щель.
    """
    if h_i.dim != h_f.dim:
        raise InputError(f"gap_profile: размерности {h_i.dim} и {h_f.dim} не совпадают")
    s = _check_grid(grid)

    if start is None:
        a_i = to_dense(h_i, cap=cap)
        a_f = to_dense(h_f, cap=cap)
        route = "dense"
    else:
        basis = invariant_subspace(h_i, h_f, start)
        a_i = reduce(h_i, basis)
        a_f = reduce(h_f, basis)
        route = "subspace"

    log.debug("gap_profile: route=%s, k=%d, точек=%d", route, a_i.shape[0], s.size)
    return _profile_from_matrices(a_i, a_f, s, route, tol)


def grover_profile(fraction: float, grid: Union[Sequence[float], np.ndarray, None] = None) -> GapProfile:
    """Аналитический профиль пары Гровера с долей помеченных m = M/N.

    g(s) = sqrt(1 − 4(1−m)s(1−s)), dmat(s) = sqrt(m(1−m)) / g(s).
    """
    m = float(fraction)
    if not 0.0 < m <= 1.0:
        raise InputError(f"доля помеченных состояний вне (0, 1]: {m}")
    s = _check_grid(grid)
    g = np.sqrt(1.0 - 4.0 * (1.0 - m) * s * (1.0 - s))
    return GapProfile(
        s=s,
        e0=(1.0 - g) / 2,
        e1=(1.0 + g) / 2,
        g=g,
        dmat=np.sqrt(m * (1.0 - m)) / g,
        dbound=float(np.sqrt(1.0 - m)),
        degenerate=np.zeros(s.shape, dtype=bool),
        route="analytic",
    )
