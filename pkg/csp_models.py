from __future__ import annotations

from dataclasses import dataclass, field, asdict
from typing import Any, Dict, FrozenSet, List, Sequence, Tuple

from errors import InputError

# Присваивание подмножеству переменных: по одной цифре из [0, d) на переменную
Assignment = Tuple[int, ...]


@dataclass(frozen=True)
class Constraint:
    """Ограничение: кортеж переменных и множество запрещённых (nogood) локальных присваиваний.

    Цифры nogood идут в порядке переменных кортежа.
    """

    variables: Tuple[int, ...]
    nogoods: FrozenSet[Assignment]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "vars": list(self.variables),
            "nogoods": [list(ng) for ng in sorted(self.nogoods)],
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "Constraint":
        if not isinstance(data, dict):
            raise InputError("Constraint.from_dict ожидает dict")
        try:
            variables = tuple(int(v) for v in data["vars"])
            nogoods = frozenset(tuple(int(x) for x in ng) for ng in data.get("nogoods", []))
        except (KeyError, TypeError, ValueError) as e:
            raise InputError(f"повреждённое ограничение: {data!r}") from e
        return cls(variables=variables, nogoods=nogoods)


@dataclass(frozen=True)
class CspInstance:
    """Задача удовлетворения ограничений.

    d      — размер домена каждой переменной,
    n_ab   — число переменных,
    k      — максимум переменных в одном ограничении,
    label  — произвольная подпись (генератор, исходный файл).

    Дубликаты ограничений допустимы и считаются в xi отдельно.
    """

    d: int
    n_ab: int
    k: int
    constraints: Tuple[Constraint, ...] = ()
    label: str = ""

    def __post_init__(self) -> None:
        if self.d < 2:
            raise InputError(f"d должен быть >= 2, получено {self.d}")
        if self.n_ab < 1:
            raise InputError(f"n_ab должен быть >= 1, получено {self.n_ab}")
        for c in self.constraints:
            if len(c.variables) > self.k:
                raise InputError(
                    f"ограничение на {len(c.variables)} переменных при k={self.k}"
                )
            if len(set(c.variables)) != len(c.variables):
                raise InputError(f"повтор переменной в ограничении {c.variables}")
            for v in c.variables:
                if not 0 <= v < self.n_ab:
                    raise InputError(f"переменная {v} вне [0, {self.n_ab})")
            for ng in c.nogoods:
                if len(ng) != len(c.variables):
                    raise InputError(f"nogood {ng} не совпадает по длине с {c.variables}")
                if any(not 0 <= x < self.d for x in ng):
                    raise InputError(f"цифра nogood {ng} вне [0, {self.d})")

    @property
    def xi(self) -> int:
        """Общее число nogood-экземпляров."""
        return sum(len(c.nogoods) for c in self.constraints)

    @property
    def dim(self) -> int:
        return self.d ** self.n_ab

    def to_dict(self) -> Dict[str, Any]:
        return {
            "d": self.d,
            "n_ab": self.n_ab,
            "k": self.k,
            "constraints": [c.to_dict() for c in self.constraints],
            "label": self.label,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "CspInstance":
        """Создаёт задачу из dict (нативный JSON-формат); лишние ключи игнорируются."""
        if not isinstance(data, dict):
            raise InputError("CspInstance.from_dict ожидает dict")
        try:
            d = int(data["d"])
            n_ab = int(data["n_ab"])
            raw_constraints = data.get("constraints") or []
        except (KeyError, TypeError, ValueError) as e:
            raise InputError(f"нет обязательного поля задачи: {e}") from e

        constraints = tuple(Constraint.from_dict(c) for c in raw_constraints)
        # k в старых файлах может отсутствовать, тогда берём по фактическим ограничениям
        k_default = max((len(c.variables) for c in constraints), default=1)
        k = int(data.get("k", k_default) or k_default)
        return cls(
            d=d,
            n_ab=n_ab,
            k=k,
            constraints=constraints,
            label=str(data.get("label") or ""),
        )


@dataclass(frozen=True)
class Partition:
    """Разбиение переменных: первичные [0, n_a) и вторичные [n_a, n_ab)."""

    n_a: int
    n_b: int

    def __post_init__(self) -> None:
        if self.n_a < 1 or self.n_b < 1:
            raise InputError(f"разбиение требует n_a >= 1 и n_b >= 1: {self.n_a}/{self.n_b}")

    @property
    def n_ab(self) -> int:
        return self.n_a + self.n_b

    def dims(self, d: int) -> Tuple[int, int]:
        """(N_A, N_B) для домена d."""
        return d ** self.n_a, d ** self.n_b

    @classmethod
    def for_instance(cls, instance: CspInstance, n_a: int) -> "Partition":
        if not 1 <= n_a < instance.n_ab:
            raise InputError(f"n_a={n_a} вне [1, {instance.n_ab - 1}]")
        return cls(n_a=n_a, n_b=instance.n_ab - n_a)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "Partition":
        return cls(n_a=int(data["n_a"]), n_b=int(data["n_b"]))


@dataclass(frozen=True)
class SolutionCensus:
    """Точные счётчики решений для разбиения.

    m_b_given: {индекс m_A в регистре A: M_B/m_A} для каждого частичного решения,
    включая нулевые значения (ветви без продолжения).
    """

    m_a: int
    m_ab: int
    m_b_given: Dict[int, int] = field(default_factory=dict)
    m_a_s: int = 0
    m_a_ns: int = 0

    def __post_init__(self) -> None:
        if self.m_a_s + self.m_a_ns != self.m_a:
            raise InputError("census: m_a_s + m_a_ns != m_a")
        if sum(self.m_b_given.values()) != self.m_ab:
            raise InputError("census: сумма M_B/m_A != m_ab")
        if sum(1 for v in self.m_b_given.values() if v >= 1) != self.m_a_s:
            raise InputError("census: m_a_s не совпадает с ветвями, имеющими решения")

    @property
    def extendable(self) -> List[int]:
        """Индексы m_A из M_A^S по возрастанию."""
        return sorted(a for a, m in self.m_b_given.items() if m >= 1)

    @property
    def dead_ends(self) -> List[int]:
        """Индексы m_A из M_A^NS по возрастанию."""
        return sorted(a for a, m in self.m_b_given.items() if m == 0)

    @property
    def min_extensions(self) -> int:
        """min M_B/m_A по ветвям с решениями (0, если таких нет)."""
        values = [m for m in self.m_b_given.values() if m >= 1]
        return min(values) if values else 0

    @property
    def single_extension(self) -> bool:
        """Условие M_B/m_A = 1 для всех m_A из M_A^S."""
        return self.m_a_s > 0 and all(m == 1 for m in self.m_b_given.values() if m >= 1)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "m_a": self.m_a,
            "m_ab": self.m_ab,
            "m_a_s": self.m_a_s,
            "m_a_ns": self.m_a_ns,
            "m_b_given": {str(a): m for a, m in sorted(self.m_b_given.items())},
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "SolutionCensus":
        return cls(
            m_a=int(data["m_a"]),
            m_ab=int(data["m_ab"]),
            m_b_given={int(a): int(m) for a, m in (data.get("m_b_given") or {}).items()},
            m_a_s=int(data["m_a_s"]),
            m_a_ns=int(data["m_a_ns"]),
        )


def index_of(digits: Sequence[int], d: int) -> int:
    """Индекс базисного состояния: sum digit_i * d^i, переменная 0 — младший разряд."""
    idx = 0
    for i, x in enumerate(digits):
        idx += int(x) * d ** i
    return idx


def digits_of(index: int, d: int, n: int) -> Assignment:
    """Обратное к index_of."""
    out = []
    for _ in range(n):
        out.append(index % d)
        index //= d
    return tuple(out)
