from __future__ import annotations

import logging
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from config import ENUM_CAP
from csp_models import Assignment, Constraint, CspInstance, Partition, SolutionCensus
from errors import DimacsParseError, InputError, ResourceError

log = logging.getLogger(__name__)

# Перебор идёт кусками, чтобы не держать в памяти все d^n индексов сразу
_CHUNK = 1 << 20


def _constraints_within(instance: CspInstance, subset_size: int) -> List[Constraint]:
    """Ограничения, все переменные которых лежат в [0, subset_size)."""
    return [
        c
        for c in instance.constraints
        if c.nogoods and max(c.variables, default=-1) < subset_size
    ]


def satisfies(instance: CspInstance, subset_size: int, x: Sequence[int]) -> bool:
    """f_A для A = первые subset_size переменных.

    True, если x не нарушает ни одного ограничения, целиком лежащего в префиксе.
    """
    if not 0 <= subset_size <= instance.n_ab:
        raise InputError(f"subset_size={subset_size} вне [0, {instance.n_ab}]")
    if len(x) != subset_size:
        raise InputError(f"присваивание длины {len(x)} при subset_size={subset_size}")

    for c in _constraints_within(instance, subset_size):
        local = tuple(int(x[v]) for v in c.variables)
        if local in c.nogoods:
            return False
    return True


def solution_mask(instance: CspInstance, subset_size: int, *, cap: int = ENUM_CAP) -> np.ndarray:
    """Булева маска удовлетворяющих присваиваний префикса длины subset_size.

    Индексация базиса: sum digit_i * d^i, переменная 0 — младший разряд.
    """
    if not 0 <= subset_size <= instance.n_ab:
        raise InputError(f"subset_size={subset_size} вне [0, {instance.n_ab}]")

    d = instance.d
    dim = d ** subset_size
    if dim > cap:
        raise ResourceError(f"перебор {d}^{subset_size} = {dim} превышает лимит {cap}")

    prepared: List[Tuple[np.ndarray, np.ndarray, np.ndarray]] = []
    for c in _constraints_within(instance, subset_size):
        var_pows = np.array([d ** v for v in c.variables], dtype=np.int64)
        pos_pows = np.array([d ** t for t in range(len(c.variables))], dtype=np.int64)
        codes = np.array(
            sorted(sum(x * d ** t for t, x in enumerate(ng)) for ng in c.nogoods),
            dtype=np.int64,
        )
        prepared.append((var_pows, pos_pows, codes))

    mask = np.ones(dim, dtype=bool)
    for start in range(0, dim, _CHUNK):
        stop = min(dim, start + _CHUNK)
        idx = np.arange(start, stop, dtype=np.int64)
        ok = mask[start:stop]
        for var_pows, pos_pows, codes in prepared:
            code = np.zeros_like(idx)
            for vp, pp in zip(var_pows, pos_pows):
                code += ((idx // vp) % d) * pp
            ok &= ~np.isin(code, codes)

    return mask


def generate_random_ksat(n: int, clause_count: int, k: int, seed: Optional[int] = None) -> CspInstance:
    """Случайная k-SAT формула: k различных переменных и случайные знаки на клаузу.

    Каждая клауза даёт ровно один nogood — единственное опровергающее её присваивание.
    Порядок переменных в клаузе не сортируется.
    """
    if k < 1:
        raise InputError(f"k должен быть >= 1, получено {k}")
    if n < k:
        raise InputError(f"n < k: n={n}, k={k}")
    if clause_count < 0:
        raise InputError(f"clause_count должен быть >= 0, получено {clause_count}")

    rng = np.random.default_rng(seed)
    constraints: List[Constraint] = []
    for _ in range(clause_count):
        variables = tuple(int(v) for v in rng.choice(n, size=k, replace=False))
        nogood = tuple(int(x) for x in rng.integers(0, 2, size=k))
        constraints.append(Constraint(variables=variables, nogoods=frozenset([nogood])))

    instance = CspInstance(
        d=2,
        n_ab=n,
        k=k,
        constraints=tuple(constraints),
        label=f"random-{k}sat n={n} m={clause_count} seed={seed}",
    )
    log.debug("Сгенерирована задача %s, xi=%d", instance.label, instance.xi)
    return instance


def read_dimacs(text: Union[bytes, str], label: str = "dimacs") -> CspInstance:
    """Разбор DIMACS CNF в CspInstance с d=2.

    Каждая клауза становится ограничением с одним nogood — присваиванием,
    при котором все её литералы ложны. Строки `c`, пустые строки и хвост
    после `%` (формат SATLIB) пропускаются.
    """
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as e:
            raise DimacsParseError(f"не UTF-8: {e}") from e

    n_vars: Optional[int] = None
    n_clauses_declared = 0
    constraints: List[Constraint] = []
    pending: List[int] = []
    pending_line = 0
    lineno = 0

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        if line.startswith("%"):
            break
        if line.startswith("p"):
            if n_vars is not None:
                raise DimacsParseError("повторный заголовок", lineno)
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise DimacsParseError(f"некорректный заголовок: {line!r}", lineno)
            try:
                n_vars = int(parts[2])
                n_clauses_declared = int(parts[3])
            except ValueError as e:
                raise DimacsParseError(f"некорректный заголовок: {line!r}", lineno) from e
            if n_vars < 1 or n_clauses_declared < 0:
                raise DimacsParseError(f"некорректный заголовок: {line!r}", lineno)
            continue

        if n_vars is None:
            raise DimacsParseError("клауза до заголовка `p cnf`", lineno)

        for token in line.split():
            try:
                lit = int(token)
            except ValueError as e:
                raise DimacsParseError(f"некорректный литерал {token!r}", lineno) from e
            if lit == 0:
                constraint = _clause_to_constraint(pending)
                if constraint is not None:
                    constraints.append(constraint)
                pending = []
                continue
            if abs(lit) > n_vars:
                raise DimacsParseError(f"литерал {lit} вне [1, {n_vars}]", lineno)
            if not pending:
                pending_line = lineno
            pending.append(lit)

    if n_vars is None:
        raise DimacsParseError("нет заголовка `p cnf`", lineno or None)
    if pending:
        raise DimacsParseError("клауза без завершающего 0", pending_line)
    if len(constraints) != n_clauses_declared:
        log.warning(
            "DIMACS: в заголовке %d клауз, прочитано %d (тавтологии пропущены)",
            n_clauses_declared,
            len(constraints),
        )

    k = max((len(c.variables) for c in constraints), default=1)
    return CspInstance(d=2, n_ab=n_vars, k=max(k, 1), constraints=tuple(constraints), label=label)


def _clause_to_constraint(literals: Sequence[int]) -> Optional[Constraint]:
    """Клауза -> ограничение; тавтология (x и -x) даёт None."""
    seen = {}
    for lit in literals:
        var = abs(lit) - 1
        falsifying = 0 if lit > 0 else 1
        if var in seen and seen[var] != falsifying:
            return None
        seen[var] = falsifying
    variables = tuple(seen.keys())
    nogood: Assignment = tuple(seen[v] for v in variables)
    return Constraint(variables=variables, nogoods=frozenset([nogood]))


def to_dimacs(instance: CspInstance) -> str:
    """CNF-запись задачи с d=2: каждый nogood становится одной клаузой."""
    if instance.d != 2:
        raise InputError(f"DIMACS поддерживает только d=2, получено d={instance.d}")

    clauses: List[str] = []
    for c in instance.constraints:
        for ng in sorted(c.nogoods):
            lits = [(v + 1) if x == 0 else -(v + 1) for v, x in zip(c.variables, ng)]
            clauses.append(" ".join(str(lit) for lit in lits + [0]))

    lines = [f"c {instance.label}"] if instance.label else []
    lines.append(f"p cnf {instance.n_ab} {len(clauses)}")
    lines.extend(clauses)
    return "\n".join(lines) + "\n"


def census(instance: CspInstance, partition: Partition, *, cap: int = ENUM_CAP) -> SolutionCensus:
    """Точный перебор всех d^n_ab присваиваний и счётчики M_A, M_AB, M_B/m_A."""
    if partition.n_ab != instance.n_ab:
        raise InputError(
            f"разбиение на {partition.n_ab} переменных для задачи с n_ab={instance.n_ab}"
        )
    if instance.dim > cap:
        raise ResourceError(f"перебор {instance.dim} присваиваний превышает лимит {cap}")

    mask_a = solution_mask(instance, partition.n_a, cap=cap)
    mask_ab = solution_mask(instance, instance.n_ab, cap=cap)
    return census_from_masks(mask_a, mask_ab)


def census_from_masks(mask_a: np.ndarray, mask_ab: np.ndarray) -> SolutionCensus:
    """Census по готовым маскам префикса A и полной задачи."""
    n_a_dim = len(mask_a)
    n_b_dim = len(mask_ab) // n_a_dim
    # индекс = a + N_A * b -> строки b, столбцы a
    per_branch = mask_ab.reshape(n_b_dim, n_a_dim).sum(axis=0)

    m_b_given = {int(a): int(per_branch[a]) for a in np.flatnonzero(mask_a)}
    m_a_s = sum(1 for m in m_b_given.values() if m >= 1)
    return SolutionCensus(
        m_a=int(mask_a.sum()),
        m_ab=int(mask_ab.sum()),
        m_b_given=m_b_given,
        m_a_s=m_a_s,
        m_a_ns=len(m_b_given) - m_a_s,
    )


def beta_of(instance: CspInstance) -> float:
    """beta = xi / n_ab."""
    return instance.xi / instance.n_ab
