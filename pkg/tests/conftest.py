"""Общие фикстуры: закреплённые задачи и независимые оракулы подсчёта."""

from itertools import product
from typing import List, Sequence

import numpy as np
import pytest

from csp_models import Constraint, CspInstance


def _unary(var: int, bad: int) -> Constraint:
    return Constraint(variables=(var,), nogoods=frozenset([(bad,)]))


def backtrack_count(instance: CspInstance, n: int) -> int:
    """Число присваиваний первых n переменных без нарушений — рекурсивный перебор
    с проверкой ограничения в момент, когда назначена его последняя переменная."""
    inside = [c for c in instance.constraints if c.nogoods and max(c.variables) < n]
    by_last = {}
    for c in inside:
        by_last.setdefault(max(c.variables), []).append(c)

    x = [0] * n

    def rec(i: int) -> int:
        if i == n:
            return 1
        total = 0
        for v in range(instance.d):
            x[i] = v
            if all(tuple(x[u] for u in c.variables) not in c.nogoods for c in by_last.get(i, [])):
                total += rec(i + 1)
        return total

    return rec(0)


def cnf_satisfied(clauses: Sequence[Sequence[int]], bits: Sequence[int]) -> bool:
    """Прямая проверка CNF: литерал v>0 истинен при bits[v−1]=1."""
    for clause in clauses:
        if not any((bits[abs(l) - 1] == 1) == (l > 0) for l in clause):
            return False
    return True


def cnf_count(clauses: Sequence[Sequence[int]], n: int) -> int:
    """Полный перебор 2^n векторами numpy: бит v−1 индекса — значение переменной v."""
    idx = np.arange(2 ** n, dtype=np.int64)
    ok = np.ones(idx.size, dtype=bool)
    for clause in clauses:
        sat = np.zeros(idx.size, dtype=bool)
        for lit in clause:
            bit = (idx >> (abs(lit) - 1)) & 1
            sat |= (bit == 1) if lit > 0 else (bit == 0)
        ok &= sat
    return int(ok.sum())


@pytest.fixture
def regression_instance() -> CspInstance:
    """n_ab=6, при n_a=3: M_A=4, M_AB=1, M_A^S=1.

    x0 = 0 на A; x3 = x4 = x5 = 0; пары (1,3) и (2,4) запрещают x1 = 1 и x2 = 1.
    """
    cross = frozenset([(1, 0), (1, 1)])
    constraints = (
        _unary(0, 1),
        _unary(3, 1),
        _unary(4, 1),
        _unary(5, 1),
        Constraint(variables=(1, 3), nogoods=cross),
        Constraint(variables=(2, 4), nogoods=cross),
    )
    return CspInstance(d=2, n_ab=6, k=2, constraints=constraints, label="regression")


@pytest.fixture
def single_solution_instance() -> CspInstance:
    """Единственное решение 101001 (x0=1, x2=1, x5=1), индекс 1 + 4 + 32 = 37."""
    target = (1, 0, 1, 0, 0, 1)
    constraints = tuple(_unary(v, 1 - bit) for v, bit in enumerate(target))
    return CspInstance(d=2, n_ab=6, k=1, constraints=constraints, label="pinned")


@pytest.fixture
def unsat_instance() -> CspInstance:
    """x5 не может быть ни 0, ни 1; префикс A свободен."""
    both = Constraint(variables=(5,), nogoods=frozenset([(0,), (1,)]))
    return CspInstance(d=2, n_ab=6, k=1, constraints=(both,), label="unsat")


@pytest.fixture
def multi_extension_instance() -> CspInstance:
    """d=3, n_ab=4: при n_a=2 M_A=4; ветви с x0=0 имеют 3 продолжения, с x0=1 — 6."""
    constraints = (
        Constraint(variables=(0,), nogoods=frozenset([(2,)])),
        Constraint(variables=(1,), nogoods=frozenset([(0,)])),
        Constraint(variables=(3,), nogoods=frozenset([(1,)])),
        Constraint(variables=(0, 3), nogoods=frozenset([(0, 0)])),
    )
    return CspInstance(d=3, n_ab=4, k=2, constraints=constraints, label="multi")


def all_solutions(instance: CspInstance) -> List[tuple]:
    out = []
    for digits in product(range(instance.d), repeat=instance.n_ab):
        if all(tuple(digits[v] for v in c.variables) not in c.nogoods for c in instance.constraints):
            out.append(digits)
    return out
