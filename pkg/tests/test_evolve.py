"""Дискретная и эталонная эволюция, оценки ошибок на поиске Гровера."""

import numpy as np
import pytest

from csp import generate_random_ksat, solution_mask
from errors import ContractError, InputError, ResourceError
from hilbert import Affine, DiagonalMarked, RankOneUniform, basis_state, uniform_state
from hilbert_spectrum import default_grid, grover_profile
from evolve import (
    TRACE_COLUMNS,
    adiabatic_reference,
    default_steps,
    default_substeps,
    error_budget,
    evolve_discretized,
    evolve_reference,
    ground_space_mass,
    minimal_steps,
    product_formula_steps,
)
from schedule import linear_schedule, local_schedule


def _grover(q, marked, eps):
    n = 2 ** q
    h_i = RankOneUniform(n)
    h_f = DiagonalMarked.from_indices(n, range(marked))
    schedule = local_schedule(grover_profile(marked / n, default_grid(1025)), eps)
    return h_i, h_f, schedule, uniform_state(2, q)


class TestReference:
    @pytest.mark.parametrize("n, marked", [(8, 1), (16, 1), (64, 1), (64, 4), (256, 3), (1024, 1)])
    def test_fidelity_at_eps_01(self, n, marked):
        h_i, h_f = RankOneUniform(n), DiagonalMarked.from_indices(n, range(marked))
        res = adiabatic_reference(h_i, h_f, uniform_state(n, 1), 0.1)
        assert res.engine == "reference"
        assert res.fidelity_to_ground >= 0.99
        assert res.norm_drift < 1e-9

    def test_random_ksat_instances(self):
        fidelities = []
        seed = 0
        while len(fidelities) < 20:
            n = 4 + seed % 7
            instance = generate_random_ksat(n, round(3.5 * n), 3, seed=seed)
            seed += 1
            mask = solution_mask(instance, n)
            if not 0 < mask.sum() < mask.size:
                continue
            h_i, h_f = RankOneUniform(mask.size), DiagonalMarked(mask)
            fidelities.append(adiabatic_reference(h_i, h_f, uniform_state(2, n)).fidelity_to_ground)
        assert min(fidelities) >= 0.99

    @pytest.mark.parametrize("q, marked", [(4, 1), (6, 1), (6, 4), (8, 3)])
    def test_matrix_element_schedule(self, q, marked):
        # точный матричный элемент: быстрее, но верность только около 1 − 4ε²
        h_i, h_f, schedule, v0 = _grover(q, marked, 0.1)
        assert evolve_reference(h_i, h_f, schedule, v0).fidelity_to_ground >= 1 - 4 * 0.1 ** 2
        bound = adiabatic_reference(h_i, h_f, v0, 0.1)
        assert bound.total_time > schedule.total_time

    def test_high_fidelity_at_small_eps(self):
        h_i, h_f, schedule, v0 = _grover(6, 1, 0.04)
        assert evolve_reference(h_i, h_f, schedule, v0).fidelity_to_ground >= 0.99

    def test_substeps_default(self):
        assert default_substeps(2.0) == 64 * 8
        assert default_steps(0.01) == 1
        assert default_steps(2.3) == 10

    def test_bad_substeps(self):
        h_i, h_f, schedule, v0 = _grover(3, 1, 0.2)
        with pytest.raises(InputError):
            evolve_reference(h_i, h_f, schedule, v0, substeps=0)

    def test_dimension_mismatch(self):
        h_i, h_f, schedule, _ = _grover(3, 1, 0.2)
        with pytest.raises(InputError):
            evolve_reference(h_i, h_f, schedule, uniform_state(2, 4))


class TestDiscretized:
    def test_converges_to_reference(self):
        h_i, h_f, schedule, v0 = _grover(4, 1, 0.1)
        ref = evolve_reference(h_i, h_f, schedule, v0).final_state
        dists = [
            np.linalg.norm(evolve_discretized(h_i, h_f, schedule, r, v0).final_state.amplitudes - ref.amplitudes)
            for r in (200, 800, 3200)
        ]
        assert dists[0] > dists[1] > dists[2]
        assert dists[2] < 0.05

    def test_large_r_fidelity(self):
        h_i, h_f, schedule, v0 = _grover(5, 2, 0.1)
        res = evolve_discretized(h_i, h_f, schedule, 4000, v0)
        assert res.engine == "discretized"
        assert res.fidelity_to_ground >= 1 - 4 * 0.1 ** 2
        assert res.norm_drift < 1e-9

    def test_step_order(self):
        h_i, h_f, schedule, _ = _grover(3, 1, 0.2)
        steps = product_formula_steps(h_i, h_f, schedule, 3)
        assert len(steps) == 6
        assert steps[0][0] is h_f and steps[1][0] is h_i
        dt = schedule.total_time / 3
        # последний шаг при s = 1: множитель H_i с нулевым углом
        assert steps[-2][1] == pytest.approx(dt)
        assert steps[-1][1] == pytest.approx(0.0)

    def test_affine_rejected(self):
        h_i, h_f, schedule, v0 = _grover(3, 1, 0.2)
        mixed = Affine(0.5, h_i, 0.5, h_f)
        with pytest.raises(ContractError):
            evolve_discretized(mixed, h_f, schedule, 4, v0)

    def test_trace_rows(self):
        h_i, h_f, schedule, v0 = _grover(3, 1, 0.2)
        res = evolve_discretized(h_i, h_f, schedule, 20, v0, trace=True)
        assert len(res.trace) == 20
        assert len(res.trace[0]) == len(TRACE_COLUMNS)
        step, s, mass = res.trace[-1]
        assert step == 20 and s == 1.0
        assert mass == pytest.approx(res.fidelity_to_ground, abs=1e-9)
        assert np.all(np.diff([row[1] for row in res.trace]) > 0)

    def test_minimal_steps(self):
        h_i, h_f, schedule, v0 = _grover(4, 1, 0.1)
        target = evolve_reference(h_i, h_f, schedule, v0).fidelity_to_ground - 0.01
        r = minimal_steps(h_i, h_f, schedule, v0, target)
        assert r >= 1
        assert evolve_discretized(h_i, h_f, schedule, r, v0).fidelity_to_ground >= target
        if r > 1:
            assert evolve_discretized(h_i, h_f, schedule, r - 1, v0).fidelity_to_ground < target

    def test_minimal_steps_unreachable(self):
        h_i, h_f, schedule, v0 = _grover(4, 1, 0.5)
        with pytest.raises(ContractError):
            minimal_steps(h_i, h_f, schedule, v0, 1.0, r_max=4)
        with pytest.raises(InputError):
            minimal_steps(h_i, h_f, schedule, v0, 1.5)


class TestGroundMass:
    def test_basis_mask(self):
        h = DiagonalMarked.from_indices(4, [1, 2])
        assert ground_space_mass(h, uniform_state(2, 2)) == pytest.approx(0.5)
        assert ground_space_mass(h, basis_state(4, 1)) == pytest.approx(1.0)

    def test_rank_one_via_eigh(self):
        assert ground_space_mass(RankOneUniform(8), uniform_state(2, 3)) == pytest.approx(1.0)
        assert ground_space_mass(RankOneUniform(8), basis_state(8, 0)) == pytest.approx(1 / 8)


class TestErrorBudget:
    def test_bounds_hold(self):
        h_i, h_f, schedule, _ = _grover(3, 1, 0.2)
        budget = error_budget(h_i, h_f, schedule, 64)
        m = 1 / 8
        assert budget.h_diff_norm == pytest.approx(np.sqrt(1 - m))
        assert budget.commutator_norm == pytest.approx(np.sqrt(m * (1 - m)))
        assert budget.piecewise_bound == pytest.approx(np.sqrt(2 * schedule.total_time / 64 * budget.h_diff_norm))
        assert budget.piecewise_ok
        assert budget.trotter_ok
        assert not budget.estimated
        assert budget.to_dict()["steps"] == 64

    def test_trotter_error_halves_with_r(self):
        h_i, h_f, schedule, _ = _grover(2, 1, 0.2)
        errs = [error_budget(h_i, h_f, schedule, r, substeps=1).measured_trotter for r in (64, 128, 256, 512)]
        for a, b in zip(errs, errs[1:]):
            assert 0.375 <= b / a <= 0.625

    def test_same_hamiltonians_have_no_trotter_error(self):
        h = DiagonalMarked.from_indices(8, [3])
        budget = error_budget(h, h, linear_schedule(5.0), 16)
        assert budget.commutator_norm == 0.0
        assert budget.trotter_bound_scale == 0.0
        assert budget.trotter_constant == 0.0
        assert budget.measured_trotter < 1e-10
        assert budget.measured_piecewise < 1e-10

    def test_estimated_above_dense_cap(self):
        h_i, h_f = RankOneUniform(1100), DiagonalMarked.from_indices(1100, [7])
        budget = error_budget(h_i, h_f, linear_schedule(1.0), 4, substeps=8)
        assert budget.estimated
        assert budget.measured_trotter >= 0.0

    def test_resource_cap(self):
        h_i, h_f = RankOneUniform(8192), DiagonalMarked.from_indices(8192, [0])
        with pytest.raises(ResourceError):
            error_budget(h_i, h_f, linear_schedule(1.0), 4)

    def test_bad_r(self):
        h_i, h_f, schedule, _ = _grover(3, 1, 0.2)
        with pytest.raises(InputError):
            error_budget(h_i, h_f, schedule, 0)
