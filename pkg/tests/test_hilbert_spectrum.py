import numpy as np
import pytest
from scipy.linalg import eigh

from errors import InputError
from hilbert import DiagonalMarked, RankOneProjector, RankOneUniform, to_dense, uniform_state
from hilbert_spectrum import (
    PROFILE_COLUMNS,
    default_grid,
    gap_profile,
    grover_profile,
    invariant_subspace,
    reduce,
)


def _grover(n, marked):
    return RankOneUniform(n), DiagonalMarked.from_indices(n, range(marked))


class TestGroverProfile:
    @pytest.mark.parametrize("n, m", [(16, 1), (64, 1), (32, 4)])
    def test_min_gap_closed_form(self, n, m):
        profile = grover_profile(m / n, default_grid(1025))
        assert profile.min_gap == pytest.approx(np.sqrt(m / n), rel=1e-9)
        assert profile.argmin_s == pytest.approx(0.5)
        assert profile.route == "analytic"

    def test_full_fraction(self):
        profile = grover_profile(1.0, default_grid(11))
        assert np.allclose(profile.g, 1.0)
        assert np.allclose(profile.dmat, 0.0)
        assert profile.dbound == 0.0

    @pytest.mark.parametrize("fraction", [0.0, -0.1, 1.5])
    def test_fraction_range(self, fraction):
        with pytest.raises(InputError):
            grover_profile(fraction)

    def test_rows_columns(self):
        rows = grover_profile(0.25, default_grid(5)).rows()
        assert len(rows) == 5 and len(rows[0]) == len(PROFILE_COLUMNS)
        assert rows[0][0] == 0.0 and rows[-1][0] == 1.0


class TestDenseRoute:
    def test_single_marked_matches_analytic(self):
        h_i, h_f = _grover(16, 1)
        grid = default_grid(65)
        dense = gap_profile(h_i, h_f, grid)
        analytic = grover_profile(1 / 16, grid)
        assert dense.route == "dense"
        assert np.allclose(dense.g, analytic.g, atol=1e-9)
        assert np.allclose(dense.dmat, analytic.dmat, atol=1e-9)
        assert dense.dbound == pytest.approx(analytic.dbound)

    def test_min_gap_scaling(self):
        for n in (16, 64, 256):
            h_i, h_f = _grover(n, 1)
            profile = gap_profile(h_i, h_f, default_grid(257))
            assert profile.min_gap == pytest.approx(1 / np.sqrt(n), rel=1e-6)

    def test_against_scipy_eigh(self):
        h_i, h_f = _grover(8, 2)
        m_i, m_f = to_dense(h_i), to_dense(h_f)
        profile = gap_profile(h_i, h_f, [0.0, 0.3, 1.0])
        w = eigh(0.7 * m_i + 0.3 * m_f, eigvals_only=True)
        assert profile.e0[1] == pytest.approx(w[0])

    def test_degenerate_endpoints_flagged(self):
        # M > 1: при s = 1 основной уровень M-кратно вырожден, но E1 лежит выше
        h_i, h_f = _grover(8, 2)
        profile = gap_profile(h_i, h_f, default_grid(9))
        assert not profile.has_degenerate
        assert profile.g[-1] == pytest.approx(1.0)

    def test_fully_degenerate_point(self):
        h = DiagonalMarked(np.zeros(4, dtype=bool))
        profile = gap_profile(h, h, [0.0, 1.0])
        assert profile.degenerate.all()
        assert profile.min_gap == 0.0


class TestSubspaceRoute:
    def test_two_dimensional_for_rank_one_pair(self):
        h_i, h_f = _grover(64, 5)
        basis = invariant_subspace(h_i, h_f, uniform_state(2, 6))
        assert basis.shape == (64, 2)
        assert np.allclose(basis.conj().T @ basis, np.eye(2), atol=1e-12)

    def test_matches_analytic_for_many_marked(self):
        h_i, h_f = _grover(64, 5)
        grid = default_grid(129)
        profile = gap_profile(h_i, h_f, grid, start=uniform_state(2, 6))
        analytic = grover_profile(5 / 64, grid)
        assert profile.route == "subspace"
        assert np.allclose(profile.g, analytic.g, atol=1e-9)
        assert np.allclose(profile.dmat, analytic.dmat, atol=1e-9)

    def test_general_projector_pair(self):
        rng = np.random.default_rng(3)
        ref = rng.normal(size=16) + 1j * rng.normal(size=16)
        ref /= np.linalg.norm(ref)
        target = DiagonalMarked.from_indices(16, [2, 9])
        h_i = RankOneProjector(ref)
        profile = gap_profile(h_i, target, default_grid(33), start=ref)
        # та же пара Гровера с долей ‖P ref‖²
        fraction = float(np.sum(np.abs(ref[[2, 9]]) ** 2))
        assert profile.min_gap == pytest.approx(np.sqrt(fraction), rel=1e-3)

    def test_reduce_is_hermitian(self):
        h_i, h_f = _grover(16, 3)
        basis = invariant_subspace(h_i, h_f, uniform_state(2, 4))
        a = reduce(h_i, basis)
        assert np.allclose(a, a.conj().T)


class TestGrid:
    @pytest.mark.parametrize("grid", [[0.0], [0.1, 1.0], [0.0, 0.9], [0.0, 0.5, 0.5, 1.0]])
    def test_bad_grid(self, grid):
        h_i, h_f = _grover(4, 1)
        with pytest.raises(InputError):
            gap_profile(h_i, h_f, grid)

    def test_dimension_mismatch(self):
        with pytest.raises(InputError):
            gap_profile(RankOneUniform(4), RankOneUniform(8))
