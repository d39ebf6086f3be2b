import math

import numpy as np
import pytest

from analysis import (
    MODEL_COLUMNS,
    ComplexityModel,
    compare_alpha,
    empirical_partial_fraction,
    fit_scaling,
    model_table,
    optimal_partition,
    p_model,
    predicted_exponent,
    predicted_log_time,
    predicted_time,
    solve_alpha,
)
from csp import generate_random_ksat
from errors import InputError


class TestAlpha:
    def test_no_constraints(self):
        assert solve_alpha(3, 0.0) == 1.0

    @pytest.mark.parametrize("k", [1, 2, 3, 5])
    @pytest.mark.parametrize("ratio", [0.1, 0.5, 1.0, 3.0])
    def test_root(self, k, ratio):
        x = solve_alpha(k, ratio)
        assert 0.0 < x < 1.0
        assert ratio * x ** k + x - 1.0 == pytest.approx(0.0, abs=1e-10)

    def test_golden_ratio_for_k2(self):
        # x^2 + x − 1 = 0
        assert solve_alpha(2, 1.0) == pytest.approx((math.sqrt(5) - 1) / 2)

    def test_decreases_with_density(self):
        roots = [solve_alpha(3, r) for r in (0.2, 0.5, 1.0, 2.0)]
        assert all(a > b for a, b in zip(roots, roots[1:]))

    def test_grows_with_k(self):
        roots = [solve_alpha(k, 1.0) for k in (2, 3, 5, 8, 16)]
        assert all(a < b for a, b in zip(roots, roots[1:]))
        assert roots[-1] < 1.0

    def test_k3_exponent(self):
        assert 0.5 * solve_alpha(3, 1.0) == pytest.approx(0.34, abs=0.005)

    @pytest.mark.parametrize("k, ratio", [(0, 0.5), (3, -0.1)])
    def test_bad_args(self, k, ratio):
        with pytest.raises(InputError):
            solve_alpha(k, ratio)


class TestPartition:
    def test_rounding(self):
        # корень x^3 + x − 1 около 0.6823
        assert optimal_partition(10, 3, 1.0) == 7

    def test_clamped(self):
        assert optimal_partition(2, 3, 0.0) == 1
        assert optimal_partition(5, 1, 100.0) == 1

    def test_too_small(self):
        with pytest.raises(InputError):
            optimal_partition(1, 3, 0.5)


class TestModel:
    def test_p_model_limits(self):
        model = ComplexityModel(d=2, n_ab=20, k=3, beta=2.5)
        assert p_model(0, model) == 1.0
        assert p_model(20, model) == pytest.approx(2 ** (-20 * 2.5 / 4.25))
        with pytest.raises(InputError):
            p_model(21, model)

    def test_p_model_tracks_ensemble(self):
        n_ab, beta = 20, 2.5
        model = ComplexityModel(d=2, n_ab=n_ab, k=3, beta=beta, beta_c=4.25)
        ensemble = [generate_random_ksat(n_ab, round(beta * n_ab), 3, seed=s) for s in range(200)]
        for n in range(4, 11):
            emp = empirical_partial_fraction(ensemble, n)
            pred = p_model(n, model)
            assert pred / 3 <= emp <= pred * 3

    def test_empty_ensemble(self):
        with pytest.raises(InputError):
            empirical_partial_fraction([], 3)

    def test_invalid_model(self):
        with pytest.raises(InputError):
            ComplexityModel(d=1, n_ab=4, k=3, beta=1.0)
        with pytest.raises(InputError):
            ComplexityModel(d=2, n_ab=4, k=3, beta=1.0, beta_c=0.0)

    def test_for_instance(self):
        inst = generate_random_ksat(10, 42, 3, seed=7)
        model = ComplexityModel.for_instance(inst, 4.2)
        assert model.beta_ratio == pytest.approx(1.0)
        assert model.log_a == pytest.approx(5 * math.log(2))

    def test_exponent_at_alpha(self):
        model = ComplexityModel(d=2, n_ab=40, k=3, beta=2.0)
        a = model.alpha
        assert predicted_exponent(model, a) == pytest.approx(0.5 * (a - 1 + model.beta_ratio))

    def test_compare_alpha_large_n(self):
        model = ComplexityModel(d=2, n_ab=100, k=3, beta=0.5 * 4.25)
        res = compare_alpha(model)
        assert abs(res["difference"]) < 0.05
        assert res["alpha_reduced"] == pytest.approx(solve_alpha(3, 0.5))
        # точный минимум не хуже упрощённого корня
        assert predicted_log_time(model, res["alpha_exact"]) <= predicted_log_time(model, res["alpha_reduced"]) + 1e-9

    def test_predicted_time_endpoints(self):
        # a = 2^5, beta_ratio = 0.5
        model = ComplexityModel(d=2, n_ab=10, k=3, beta=0.5 * 4.25)
        assert predicted_time(model, 0.0) == pytest.approx(33 / 32 ** 0.5)
        assert predicted_time(model, 1.0) == pytest.approx(32 ** 0.5 + 1)

    def test_predicted_time_overflow(self):
        model = ComplexityModel(d=2, n_ab=5000, k=3, beta=3.0)
        assert predicted_time(model, 0.9) == math.inf
        assert math.isfinite(predicted_log_time(model, 0.9))
        rows = model_table(model, [0.5, 0.9])
        assert rows[1][1] == math.inf
        assert math.isfinite(rows[1][2])

    def test_fraction_range(self):
        model = ComplexityModel(d=2, n_ab=10, k=3, beta=2.0)
        with pytest.raises(InputError):
            predicted_log_time(model, 1.2)

    def test_model_table(self):
        model = ComplexityModel(d=2, n_ab=16, k=3, beta=3.0)
        rows = model_table(model, np.linspace(0.1, 0.9, 9))
        assert len(rows) == 9
        assert len(rows[0]) == len(MODEL_COLUMNS)
        for x, t, log2_t, _ in rows:
            assert math.log2(t) == pytest.approx(log2_t)
            assert t == pytest.approx(math.exp(predicted_log_time(model, x)))


class TestFit:
    def test_exact_power_law(self):
        sizes = [2.0, 4.0, 8.0, 16.0, 32.0]
        fit = fit_scaling(sizes, [3.0 * s ** 0.5 for s in sizes])
        assert fit.exponent == pytest.approx(0.5)
        assert fit.intercept == pytest.approx(math.log(3.0))
        assert fit.residual == pytest.approx(0.0, abs=1e-12)

    @pytest.mark.parametrize(
        "sizes, times",
        [
            ([1, 2, 3], [1, 2, 3]),
            ([1, 2, 2, 3], [1, 2, 3, 4]),
            ([1, 2, 3, 4], [1, 0, 3, 4]),
            ([1, 2, 3, 4], [1, 2, 3]),
        ],
    )
    def test_validation(self, sizes, times):
        with pytest.raises(InputError):
            fit_scaling(sizes, times)
