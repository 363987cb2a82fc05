import numpy as np
import pytest

from bellopt.lhv import critical_noise_fraction
from bellopt.quantum import PhaseSettings, SgDirections, probability_table_multiport, probability_table_sg_spin1
from bellopt.search import (
    AmoebaConfig,
    SearchAbortError,
    nelder_mead,
    optimize_general,
    optimize_multiport,
    optimize_sg_spin1,
)

TWO_QUBIT_THRESHOLD = 1.0 - 1.0 / np.sqrt(2.0)
QUICK = AmoebaConfig(max_evals=4000, restarts=4, seed=11)


class TestNelderMead:
    cfg = AmoebaConfig(max_evals=3000, spread_tol=1e-10, restarts=1, seed=0)

    def test_sphere_maximum(self):
        x, f = nelder_mead(lambda v: -np.sum(v**2), np.array([1.0, 1.0, 1.0]), self.cfg)
        assert np.linalg.norm(x) < 1e-3
        assert f > -1e-5

    def test_flat_function_terminates(self):
        x, f = nelder_mead(lambda v: 0.5, np.array([0.0, 0.0]), self.cfg)
        assert f == 0.5

    def test_anisotropic_quadratic(self):
        x, f = nelder_mead(
            lambda v: -((v[0] - 2.0) ** 2) - 10.0 * (v[1] - 3.0) ** 2, np.array([0.0, 0.0]), self.cfg
        )
        assert np.max(np.abs(x - np.array([2.0, 3.0]))) < 1e-3

    def test_budget_respected(self):
        calls = 0

        def counting(v):
            nonlocal calls
            calls += 1
            return -np.sum(v**2)

        nelder_mead(counting, np.zeros(5), AmoebaConfig(max_evals=50, restarts=1))
        assert calls <= 50 + 5  # a shrink step may finish its sweep

    def test_aborts_on_nonfinite(self):
        def bad(v):
            return np.nan if v[0] > 1.2 else float(v[0])

        with pytest.raises(SearchAbortError) as err:
            nelder_mead(bad, np.array([1.0, 1.0]), self.cfg)
        assert err.value.point.shape == (2,)

    def test_config_validation(self):
        with pytest.raises(ValueError):
            AmoebaConfig(reflection=-1.0)
        with pytest.raises(ValueError):
            AmoebaConfig(expansion=0.5)
        with pytest.raises(ValueError):
            AmoebaConfig(contraction=1.5)
        with pytest.raises(ValueError):
            AmoebaConfig(restarts=0)


class TestOptimizeMultiport:
    def test_two_qubit_threshold(self):
        result = optimize_multiport(2, AmoebaConfig(restarts=10, seed=42))
        assert result.best_f == pytest.approx(TWO_QUBIT_THRESHOLD, abs=1e-4)

    def test_result_invariants(self):
        result = optimize_multiport(2, QUICK)
        assert result.best_f == max(result.restart_bests)
        assert 0.0 <= result.best_f <= 1.0
        assert len(result.restart_bests) == QUICK.restarts
        assert result.seed == QUICK.seed
        assert isinstance(result.best_settings, PhaseSettings)

    def test_reproducible(self):
        first = optimize_multiport(2, QUICK)
        second = optimize_multiport(2, QUICK)
        assert first.best_f == second.best_f
        assert first.evaluations == second.evaluations
        assert np.array_equal(first.best_settings.phases_a, second.best_settings.phases_a)
        assert first.restart_bests == second.restart_bests

    def test_restart_dominance(self):
        # the seed stream is per restart, so more restarts keep earlier bests
        few = optimize_multiport(2, AmoebaConfig(max_evals=2000, restarts=3, seed=5))
        many = optimize_multiport(2, AmoebaConfig(max_evals=2000, restarts=6, seed=5))
        assert many.restart_bests[:3] == few.restart_bests
        assert many.best_f >= few.best_f

    def test_rejects_dim_below_two(self):
        with pytest.raises(ValueError):
            optimize_multiport(1, QUICK)


class TestGaugeInvariance:
    def test_constant_shift_per_setting(self):
        rng = np.random.default_rng(8)
        s = PhaseSettings(3, rng.uniform(0, 2 * np.pi, (2, 3)), rng.uniform(0, 2 * np.pi, (2, 3)))
        base = critical_noise_fraction(probability_table_multiport(s)).f_min
        shifted = PhaseSettings(
            3, s.phases_a + np.array([[0.9], [2.1]]), s.phases_b + np.array([[0.4], [5.0]])
        )
        moved = critical_noise_fraction(probability_table_multiport(shifted)).f_min
        assert moved == pytest.approx(base, abs=1e-10)

    def test_gauge_fixed_form_equivalent(self):
        rng = np.random.default_rng(9)
        s = PhaseSettings(4, rng.uniform(0, 2 * np.pi, (2, 4)), rng.uniform(0, 2 * np.pi, (2, 4)))
        base = critical_noise_fraction(probability_table_multiport(s)).f_min
        fixed = critical_noise_fraction(probability_table_multiport(s.gauge_fixed())).f_min
        assert fixed == pytest.approx(base, abs=1e-10)


class TestOptimizeGeneral:
    def test_two_qubit_threshold(self):
        result = optimize_general(2, AmoebaConfig(restarts=6, seed=42))
        assert result.best_f == pytest.approx(TWO_QUBIT_THRESHOLD, abs=1e-4)

    def test_contains_multiport_family(self):
        general = optimize_general(2, AmoebaConfig(restarts=6, seed=3))
        multiport = optimize_multiport(2, AmoebaConfig(restarts=6, seed=3))
        assert general.best_f >= multiport.best_f - 1e-4


class TestOptimizeSgSpin1:
    def test_identical_axes_are_classical(self):
        axes = np.array([[0.8, 1.2], [0.8, 1.2]])
        table = probability_table_sg_spin1(SgDirections(axes, axes))
        assert critical_noise_fraction(table).f_min == pytest.approx(0.0, abs=1e-10)

    def test_search_stays_below_two_qubit_value(self):
        result = optimize_sg_spin1(AmoebaConfig(max_evals=4000, restarts=6, seed=7))
        assert result.best_f < TWO_QUBIT_THRESHOLD
        assert isinstance(result.best_settings, SgDirections)
