"""Векторы состояний и проекторные гамильтонианы без плотных матриц.

Порядок базиса: индекс = sum digit_i * d^i, переменная 0 — младший разряд.
Регистр A занимает младшие разряды, поэтому полный индекс = a + N_A * b.

Все гамильтонианы работают с "блоками" — массивами формы (dim, batch),
так что одно и то же применение годится и для вектора, и для набора векторов,
и для единичной матрицы (плотное разложение).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional, Protocol, Tuple, Union

import numpy as np
from scipy import linalg

from config import DENSE_CAP, MATRIX_FREE_CAP
from errors import ContractError, InputError, ResourceError

log = logging.getLogger(__name__)

# Допуск нормировки StateVector
NORM_TOL = 1e-10


class UnitaryProgram(Protocol):
    """Унитарная программа, которую можно проиграть вперёд (U) и назад (U†)."""

    dim: int

    def forward(self, block: np.ndarray) -> np.ndarray: ...

    def backward(self, block: np.ndarray) -> np.ndarray: ...


@dataclass(frozen=True, eq=False)
class StateVector:
    """Нормированный вектор амплитуд над d^n базисными состояниями."""

    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        amps = np.asarray(self.amplitudes, dtype=np.complex128)
        if amps.ndim != 1:
            raise InputError(f"StateVector ожидает одномерный массив, получено {amps.shape}")
        norm = float(np.linalg.norm(amps))
        if abs(norm - 1.0) > NORM_TOL:
            raise InputError(f"StateVector не нормирован: |v| = {norm:.12f}")
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def normalized(cls, v: np.ndarray) -> "StateVector":
        """Нормирует произвольный ненулевой вектор."""
        v = np.asarray(v, dtype=np.complex128)
        norm = float(np.linalg.norm(v))
        if norm == 0.0:
            raise InputError("нулевой вектор нельзя нормировать")
        return cls(v / norm)

    @property
    def dim(self) -> int:
        return int(self.amplitudes.shape[0])

    def overlap(self, other: "StateVector") -> complex:
        """<other|self>."""
        return complex(np.vdot(other.amplitudes, self.amplitudes))

    def fidelity(self, other: "StateVector") -> float:
        """|<other|self>|^2, не зависит от глобальной фазы."""
        return float(abs(self.overlap(other)) ** 2)

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2


VectorLike = Union[StateVector, np.ndarray]


# ---------- ГАМИЛЬТОНИАНЫ ----------


class StructuredHamiltonian:
    """Общий интерфейс: применение к блоку, экспонента, след, базисное основное пространство."""

    @property
    def dim(self) -> int:
        raise NotImplementedError

    @property
    def supports_exponential(self) -> bool:
        return False

    def apply_block(self, block: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def expm_block(self, theta: float, block: np.ndarray) -> np.ndarray:
        raise ContractError(f"{type(self).__name__}: нет замкнутой формы e^(-i theta H)")

    def trace(self) -> float:
        raise NotImplementedError

    def ground_mask(self) -> Optional[np.ndarray]:
        """Маска базисных состояний, натягивающих основное пространство, если оно базисное."""
        return None


@dataclass(frozen=True, eq=False)
class DiagonalMarked(StructuredHamiltonian):
    """H = I - sum_{m in S} |m><m|; marked — булева маска S."""

    marked: np.ndarray

    def __post_init__(self) -> None:
        marked = np.asarray(self.marked, dtype=bool)
        if marked.ndim != 1 or marked.size == 0:
            raise InputError("DiagonalMarked ожидает непустую одномерную маску")
        object.__setattr__(self, "marked", marked)
        object.__setattr__(self, "_weights", (~marked).astype(np.float64))

    @classmethod
    def from_indices(cls, dim: int, indices) -> "DiagonalMarked":
        mask = np.zeros(dim, dtype=bool)
        mask[np.asarray(list(indices), dtype=np.int64)] = True
        return cls(mask)

    @property
    def dim(self) -> int:
        return int(self.marked.shape[0])

    @property
    def marked_count(self) -> int:
        return int(self.marked.sum())

    @property
    def supports_exponential(self) -> bool:
        return True

    def apply_block(self, block: np.ndarray) -> np.ndarray:
        return block * self._weights[:, None]

    def expm_block(self, theta: float, block: np.ndarray) -> np.ndarray:
        phases = np.where(self.marked, 1.0 + 0.0j, np.exp(-1j * theta))
        return block * phases[:, None]

    def trace(self) -> float:
        return float(self.dim - self.marked_count)

    def ground_mask(self) -> Optional[np.ndarray]:
        if self.marked_count == 0:
            # H = I: всё пространство вырождено
            return np.ones(self.dim, dtype=bool)
        return self.marked


class _RankOne(StructuredHamiltonian):
    """H = I - |phi><phi|; наследники задают только проекцию <phi|v>|phi>."""

    def _projection(self, block: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    @property
    def supports_exponential(self) -> bool:
        return True

    def apply_block(self, block: np.ndarray) -> np.ndarray:
        return block - self._projection(block)

    def expm_block(self, theta: float, block: np.ndarray) -> np.ndarray:
        phase = np.exp(-1j * theta)
        return phase * block + (1.0 - phase) * self._projection(block)

    def trace(self) -> float:
        return float(self.dim - 1)


@dataclass(frozen=True, eq=False)
class RankOneUniform(_RankOne):
    """H = I - |s><s| для равномерной суперпозиции |s> размерности size."""

    size: int

    def __post_init__(self) -> None:
        if self.size < 1:
            raise InputError(f"RankOneUniform: размерность {self.size} < 1")

    @property
    def dim(self) -> int:
        return self.size

    def _projection(self, block: np.ndarray) -> np.ndarray:
        # <s|v>|s> = (sum v / N) в каждой компоненте
        return np.broadcast_to(block.mean(axis=0, keepdims=True), block.shape)


@dataclass(frozen=True, eq=False)
class RankOneProjector(_RankOne):
    """H = I - |phi><phi| для произвольного нормированного |phi>."""

    reference: np.ndarray

    def __post_init__(self) -> None:
        ref = np.asarray(self.reference, dtype=np.complex128)
        norm = float(np.linalg.norm(ref))
        if ref.ndim != 1 or abs(norm - 1.0) > NORM_TOL:
            raise InputError("RankOneProjector ожидает нормированный вектор")
        object.__setattr__(self, "reference", ref)

    @property
    def dim(self) -> int:
        return int(self.reference.shape[0])

    def _projection(self, block: np.ndarray) -> np.ndarray:
        coeffs = self.reference.conj() @ block
        return self.reference[:, None] * coeffs[None, :]


@dataclass(frozen=True, eq=False)
class TensorExtended(StructuredHamiltonian):
    """inner ⊗ I на остальном регистре.

    on_low=True  — inner действует на младшие разряды (регистр A),
    on_low=False — на старшие (регистр B).
    """

    inner: StructuredHamiltonian
    outer_dim: int
    on_low: bool = True

    def __post_init__(self) -> None:
        if self.outer_dim < 1:
            raise InputError(f"TensorExtended: outer_dim={self.outer_dim} < 1")

    @property
    def dim(self) -> int:
        return self.inner.dim * self.outer_dim

    @property
    def supports_exponential(self) -> bool:
        return self.inner.supports_exponential

    def _to_inner(self, block: np.ndarray) -> np.ndarray:
        batch = block.shape[1]
        n_in = self.inner.dim
        if self.on_low:
            x = block.reshape(self.outer_dim, n_in, batch).transpose(1, 0, 2)
            return x.reshape(n_in, self.outer_dim * batch)
        return block.reshape(n_in, self.outer_dim * batch)

    def _from_inner(self, x: np.ndarray, batch: int) -> np.ndarray:
        n_in = self.inner.dim
        if self.on_low:
            x = x.reshape(n_in, self.outer_dim, batch).transpose(1, 0, 2)
        return x.reshape(self.dim, batch)

    def apply_block(self, block: np.ndarray) -> np.ndarray:
        return self._from_inner(self.inner.apply_block(self._to_inner(block)), block.shape[1])

    def expm_block(self, theta: float, block: np.ndarray) -> np.ndarray:
        if not self.inner.supports_exponential:
            raise ContractError(f"TensorExtended({type(self.inner).__name__}): нет экспоненты")
        x = self.inner.expm_block(theta, self._to_inner(block))
        return self._from_inner(x, block.shape[1])

    def trace(self) -> float:
        return self.inner.trace() * self.outer_dim

    def ground_mask(self) -> Optional[np.ndarray]:
        mask = self.inner.ground_mask()
        if mask is None:
            return None
        if self.on_low:
            return np.tile(mask, self.outer_dim)
        return np.repeat(mask, self.outer_dim)


@dataclass(frozen=True, eq=False)
class Affine(StructuredHamiltonian):
    """c_i * H_i + c_f * H_f."""

    c_i: float
    h_i: StructuredHamiltonian
    c_f: float
    h_f: StructuredHamiltonian

    def __post_init__(self) -> None:
        if self.h_i.dim != self.h_f.dim:
            raise InputError(f"Affine: размерности {self.h_i.dim} и {self.h_f.dim} не совпадают")

    @property
    def dim(self) -> int:
        return self.h_i.dim

    def apply_block(self, block: np.ndarray) -> np.ndarray:
        return self.c_i * self.h_i.apply_block(block) + self.c_f * self.h_f.apply_block(block)

    def trace(self) -> float:
        return self.c_i * self.h_i.trace() + self.c_f * self.h_f.trace()


@dataclass(frozen=True, eq=False)
class Conjugated(StructuredHamiltonian):
    """U H U†, где U задан программой примитивных экспонент."""

    program: UnitaryProgram
    inner: StructuredHamiltonian

    def __post_init__(self) -> None:
        if self.program.dim != self.inner.dim:
            raise InputError(
                f"Conjugated: программа на {self.program.dim}, гамильтониан на {self.inner.dim}"
            )

    @property
    def dim(self) -> int:
        return self.inner.dim

    @property
    def supports_exponential(self) -> bool:
        return self.inner.supports_exponential

    def apply_block(self, block: np.ndarray) -> np.ndarray:
        return self.program.forward(self.inner.apply_block(self.program.backward(block)))

    def expm_block(self, theta: float, block: np.ndarray) -> np.ndarray:
        if not self.inner.supports_exponential:
            raise ContractError(f"Conjugated({type(self.inner).__name__}): нет экспоненты")
        # U e^{-i theta H} U† : назад, экспонента, вперёд
        x = self.program.backward(block)
        x = self.inner.expm_block(theta, x)
        return self.program.forward(x)

    def trace(self) -> float:
        return self.inner.trace()


def interpolate(h_i: StructuredHamiltonian, h_f: StructuredHamiltonian, s: float) -> Affine:
    """H(s) = (1 - s) H_i + s H_f."""
    return Affine(1.0 - s, h_i, s, h_f)


# ---------- ОПЕРАЦИИ ----------


def _as_block(v: VectorLike, dim: int) -> Tuple[np.ndarray, bool]:
    arr = v.amplitudes if isinstance(v, StateVector) else np.asarray(v, dtype=np.complex128)
    if arr.shape[0] != dim:
        raise InputError(f"размерность вектора {arr.shape[0]} != размерности гамильтониана {dim}")
    if arr.ndim == 1:
        return arr[:, None], True
    if arr.ndim == 2:
        return arr, False
    raise InputError(f"ожидается вектор или блок, получено {arr.shape}")


def uniform_state(d: int, n: int, *, cap: int = MATRIX_FREE_CAP) -> StateVector:
    """Равномерная суперпозиция по d^n базисным состояниям."""
    dim = d ** n
    if dim > cap:
        raise ResourceError(f"состояние размерности {dim} превышает лимит {cap}")
    return StateVector(np.full(dim, dim ** -0.5, dtype=np.complex128))


def basis_state(dim: int, index: int) -> StateVector:
    if not 0 <= index < dim:
        raise InputError(f"индекс {index} вне [0, {dim})")
    v = np.zeros(dim, dtype=np.complex128)
    v[index] = 1.0
    return StateVector(v)


def kron_state(low: StateVector, high: StateVector) -> StateVector:
    """|low>_A ⊗ |high>_B при индексе a + N_A * b."""
    return StateVector(np.outer(high.amplitudes, low.amplitudes).ravel())


def apply(h: StructuredHamiltonian, v: VectorLike) -> np.ndarray:
    """H v без плотной матрицы; результат не нормирован."""
    block, flat = _as_block(v, h.dim)
    out = h.apply_block(block)
    return out[:, 0] if flat else out


def exact_exponential(h: StructuredHamiltonian, theta: float, v: VectorLike) -> VectorLike:
    """e^{-i theta H} v в замкнутой форме.

    Поддерживаются DiagonalMarked, ранг-один проекторы и их TensorExtended/Conjugated.
    """
    if not h.supports_exponential:
        raise ContractError(f"{type(h).__name__}: экспонента не поддерживается")
    block, flat = _as_block(v, h.dim)
    out = h.expm_block(theta, block)
    if isinstance(v, StateVector):
        return StateVector(out[:, 0])
    return out[:, 0] if flat else out


def to_dense(h: StructuredHamiltonian, *, cap: int = DENSE_CAP) -> np.ndarray:
    """Плотная матрица оператора (оракул для проверки)."""
    if h.dim > cap:
        raise ResourceError(f"плотная матрица {h.dim}x{h.dim} превышает лимит {cap}")
    return np.ascontiguousarray(h.apply_block(np.eye(h.dim, dtype=np.complex128)))


def dense_propagator(matrix: np.ndarray, t: float) -> np.ndarray:
    """e^{-i t M} для эрмитовой M через спектральное разложение."""
    w, vecs = linalg.eigh(matrix)
    return (vecs * np.exp(-1j * t * w)[None, :]) @ vecs.conj().T


def operator_norm(a: np.ndarray, *, cap: int = DENSE_CAP) -> float:
    """Операторная норма — наибольшее сингулярное число."""
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InputError(f"ожидается квадратная матрица, получено {a.shape}")
    if a.shape[0] > cap:
        raise ResourceError(f"матрица {a.shape[0]}x{a.shape[0]} превышает лимит {cap}")
    if a.size == 0 or not np.any(a):
        return 0.0
    return float(np.linalg.norm(a, 2))


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a
