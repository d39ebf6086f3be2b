"""Структурированные гамильтонианы против плотных матриц."""

import numpy as np
import pytest
from scipy.linalg import expm

from errors import ContractError, InputError, ResourceError
from hilbert import (
    Affine,
    Conjugated,
    DiagonalMarked,
    RankOneProjector,
    RankOneUniform,
    StateVector,
    TensorExtended,
    apply,
    basis_state,
    commutator,
    dense_propagator,
    exact_exponential,
    interpolate,
    kron_state,
    operator_norm,
    to_dense,
    uniform_state,
)


def _random_state(dim, seed):
    rng = np.random.default_rng(seed)
    return StateVector.normalized(rng.normal(size=dim) + 1j * rng.normal(size=dim))


class _Shift:
    """Циклический сдвиг базиса как унитарная программа."""

    def __init__(self, dim, k=1):
        self.dim = dim
        self.k = k

    def forward(self, block):
        return np.roll(block, self.k, axis=0)

    def backward(self, block):
        return np.roll(block, -self.k, axis=0)


def _hamiltonians():
    mask = np.zeros(8, dtype=bool)
    mask[[1, 6]] = True
    ref = _random_state(8, 1).amplitudes
    return [
        DiagonalMarked(mask),
        RankOneUniform(8),
        RankOneProjector(ref),
        TensorExtended(RankOneUniform(4), outer_dim=2, on_low=True),
        TensorExtended(RankOneUniform(4), outer_dim=2, on_low=False),
        Conjugated(_Shift(8, 3), DiagonalMarked(mask)),
    ]


class TestStateVector:
    def test_rejects_unnormalized(self):
        with pytest.raises(InputError):
            StateVector(np.array([1.0, 1.0]))

    def test_normalized_and_fidelity(self):
        v = StateVector.normalized(np.array([1.0, 1.0j]))
        assert v.fidelity(basis_state(2, 0)) == pytest.approx(0.5)
        assert v.probabilities().sum() == pytest.approx(1.0)

    def test_zero_vector(self):
        with pytest.raises(InputError):
            StateVector.normalized(np.zeros(3))

    def test_uniform_cap(self):
        with pytest.raises(ResourceError):
            uniform_state(2, 10, cap=512)

    def test_kron_order(self):
        # индекс = a + N_A * b
        v = kron_state(basis_state(4, 1), basis_state(2, 1))
        assert np.argmax(np.abs(v.amplitudes)) == 1 + 4 * 1


class TestDenseAgreement:
    @pytest.mark.parametrize("h", _hamiltonians(), ids=lambda h: type(h).__name__)
    def test_hermitian_projector_spectrum(self, h):
        m = to_dense(h)
        assert np.allclose(m, m.conj().T)
        w = np.linalg.eigvalsh(m)
        assert np.allclose(w[np.abs(w) > 1e-9], 1.0)
        assert np.trace(m).real == pytest.approx(h.trace())

    @pytest.mark.parametrize("h", _hamiltonians(), ids=lambda h: type(h).__name__)
    @pytest.mark.parametrize("theta", [0.0, 0.37, np.pi, 5.1])
    def test_exponential_matches_expm(self, h, theta):
        v = _random_state(h.dim, 7)
        got = exact_exponential(h, theta, v)
        want = expm(-1j * theta * to_dense(h)) @ v.amplitudes
        assert isinstance(got, StateVector)
        assert np.allclose(got.amplitudes, want, atol=1e-12)

    def test_block_and_vector_agree(self):
        h = RankOneProjector(_random_state(6, 2).amplitudes)
        block = np.stack([_random_state(6, s).amplitudes for s in range(3)], axis=1)
        out = apply(h, block)
        for j in range(3):
            assert np.allclose(out[:, j], apply(h, block[:, j]))

    def test_tensor_extended_kron(self):
        inner = to_dense(RankOneUniform(4))
        low = to_dense(TensorExtended(RankOneUniform(4), outer_dim=3, on_low=True))
        high = to_dense(TensorExtended(RankOneUniform(4), outer_dim=3, on_low=False))
        # младшие разряды: правый множитель kron
        assert np.allclose(low, np.kron(np.eye(3), inner))
        assert np.allclose(high, np.kron(inner, np.eye(3)))

    def test_affine_and_commutator(self):
        h_i = RankOneUniform(4)
        h_f = DiagonalMarked.from_indices(4, [2])
        m = to_dense(interpolate(h_i, h_f, 0.3))
        assert np.allclose(m, 0.7 * to_dense(h_i) + 0.3 * to_dense(h_f))
        # для пары Гровера ‖[H_i, H_f]‖ = sqrt(m (1 − m))
        c = commutator(to_dense(h_i), to_dense(h_f))
        assert operator_norm(c) == pytest.approx(np.sqrt(0.25 * 0.75))

    def test_affine_has_no_exponential(self):
        h = Affine(0.5, RankOneUniform(4), 0.5, DiagonalMarked.from_indices(4, [0]))
        with pytest.raises(ContractError):
            exact_exponential(h, 1.0, uniform_state(2, 2))

    def test_dense_propagator(self):
        m = to_dense(RankOneUniform(4))
        assert np.allclose(dense_propagator(m, 0.8), expm(-0.8j * m))


class TestGroundMask:
    def test_diagonal(self):
        h = DiagonalMarked.from_indices(4, [3])
        assert h.ground_mask().tolist() == [False, False, False, True]

    def test_empty_marked_is_identity(self):
        h = DiagonalMarked(np.zeros(4, dtype=bool))
        assert h.ground_mask().all()

    def test_tensor_extended_layout(self):
        inner = DiagonalMarked.from_indices(2, [1])
        low = TensorExtended(inner, outer_dim=3, on_low=True).ground_mask()
        high = TensorExtended(inner, outer_dim=3, on_low=False).ground_mask()
        assert np.flatnonzero(low).tolist() == [1, 3, 5]
        assert np.flatnonzero(high).tolist() == [3, 4, 5]
        assert np.allclose(np.diag(to_dense(TensorExtended(inner, 3, on_low=False))).real, ~high)

    def test_rank_one_has_no_basis_mask(self):
        assert RankOneUniform(4).ground_mask() is None


class TestLimits:
    def test_to_dense_cap(self):
        with pytest.raises(ResourceError):
            to_dense(RankOneUniform(64), cap=32)

    def test_dimension_mismatch(self):
        with pytest.raises(InputError):
            apply(RankOneUniform(4), np.ones(5))

    def test_operator_norm_zero(self):
        assert operator_norm(np.zeros((3, 3))) == 0.0

    def test_conjugated_dimension_check(self):
        with pytest.raises(InputError):
            Conjugated(_Shift(4), RankOneUniform(8))
