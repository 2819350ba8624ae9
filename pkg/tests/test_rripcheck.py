import numpy as np
import pytest

from miht.measure import MeasurementMap, RANK_ONE, make_dense_map, make_rank_one_map
from miht.rripcheck import (RripEstimate, concentration_curve,
                            estimate_constants, sample_rank_r, summarize_curve)

from _oracles import grid_constants_rank_one_2x2


class TestSampleRankR:
    def test_unit_frobenius_norm(self):
        for r in (1, 2, 4):
            Z = sample_rank_r(4, 4, r, 9)
            assert np.linalg.norm(Z, "fro") == pytest.approx(1.0, abs=1e-12)

    def test_rank_one_2x2_singular_values(self):
        sv = np.linalg.svd(sample_rank_r(2, 2, 1, 3), compute_uv=False)
        assert sv[0] == pytest.approx(1.0, abs=1e-10)
        assert sv[1] <= 1e-10

    def test_sampled_rank_never_exceeds_r(self):
        # svd oracle over a large sample: third singular value vanishes at r = 2
        for i in range(10_000):
            Z = sample_rank_r(6, 6, 2, [5, i])
            sv = np.linalg.svd(Z, compute_uv=False)
            assert sv[2] <= 1e-10

    def test_deterministic_per_seed(self):
        np.testing.assert_array_equal(sample_rank_r(3, 5, 2, 11), sample_rank_r(3, 5, 2, 11))

    def test_rank_out_of_range(self):
        with pytest.raises(ValueError):
            sample_rank_r(3, 5, 4, 0)


class TestEstimateConstants:
    def test_identity_like_map_gives_unit_constants(self):
        one = np.ones((1, 1))
        mp = MeasurementMap(RANK_ONE, 1, 1, 1, a_vecs=one, b_vecs=one)
        est = estimate_constants(mp, 1, 50, 0)
        assert est.alpha_hat == pytest.approx(1.0, abs=1e-12)
        assert est.beta_hat == pytest.approx(1.0, abs=1e-12)
        assert est.gamma_hat == pytest.approx(1.0, abs=1e-12)

    def test_ordering_invariant(self):
        mp = make_rank_one_map(6, 6, 40, 4)
        est = estimate_constants(mp, 2, 300, 1)
        assert 0 < est.alpha_hat <= est.beta_hat
        assert est.gamma_hat >= 1.0

    def test_monotone_refinement_under_fixed_stream(self):
        mp = make_rank_one_map(5, 5, 30, 8)
        small = estimate_constants(mp, 1, 400, 2, keep_samples=True)
        large = estimate_constants(mp, 1, 900, 2, keep_samples=True)
        assert large.alpha_hat <= small.alpha_hat
        assert large.beta_hat >= small.beta_hat
        np.testing.assert_array_equal(large.sample_l1_values[:400], small.sample_l1_values)

    def test_scaling_map_scales_extremes_not_ratio(self):
        mp = make_rank_one_map(4, 4, 20, 6)
        doubled = MeasurementMap(RANK_ONE, 4, 4, 20, a_vecs=2.0 * mp.a_vecs, b_vecs=mp.b_vecs)
        e1 = estimate_constants(mp, 2, 200, 3)
        e2 = estimate_constants(doubled, 2, 200, 3)
        assert e2.alpha_hat == pytest.approx(2.0 * e1.alpha_hat, rel=1e-12)
        assert e2.beta_hat == pytest.approx(2.0 * e1.beta_hat, rel=1e-12)
        assert e2.gamma_hat == pytest.approx(e1.gamma_hat, rel=1e-12)

    def test_batch_means_agree_for_rotation_invariant_ensemble(self):
        # dense gaussian: E ||A(Z)||_1 is the same for every unit-norm Z, so
        # disjoint sample batches must agree to within 3 standard errors
        mp = make_dense_map(8, 8, 60, "gaussian", 12)
        a = estimate_constants(mp, 2, 600, 100, keep_samples=True).sample_l1_values
        b = estimate_constants(mp, 2, 600, 101, keep_samples=True).sample_l1_values
        se = np.sqrt(a.var() / a.size + b.var() / b.size)
        assert abs(a.mean() - b.mean()) <= 3.0 * se

    def test_gamma_close_to_exhaustive_sweep_on_tiny_manifold(self):
        # 2x2 rank-one matrices form a 2-parameter manifold; a fine angle
        # grid brute-forces the true constants to compare against
        mp = make_rank_one_map(2, 2, 3, 77)
        est = estimate_constants(mp, 1, 100_000, 1)
        alpha_g, beta_g, gamma_g = grid_constants_rank_one_2x2(mp, 1500)
        assert est.gamma_hat == pytest.approx(gamma_g, rel=0.05)
        assert est.alpha_hat >= alpha_g - 1e-9   # interior estimate
        assert est.beta_hat <= beta_g + 1e-9

    def test_desk_scale_rank_one_ensemble_is_well_conditioned(self):
        mp = make_rank_one_map(20, 20, 400, 2024)
        est = estimate_constants(mp, 2, 500, 7)
        assert est.gamma_hat <= 3.5

    def test_needs_two_samples(self):
        mp = make_rank_one_map(2, 2, 3, 0)
        with pytest.raises(ValueError):
            estimate_constants(mp, 1, 1, 0)


class TestConcentrationCurve:
    def test_single_cell_single_trial(self):
        rows = concentration_curve("gaussian", 6, 1, [12], 1, 5, n_samples=50)
        assert len(rows) == 1
        assert set(rows[0]) == {"m", "trial", "alpha_hat", "beta_hat", "gamma_hat"}

    def test_gamma_median_stabilizes_as_m_grows(self):
        grid = (30, 60, 120, 240)
        rows = concentration_curve("gaussian", 15, 1, grid, 10, 3)
        med = [float(np.median([r["gamma_hat"] for r in rows if r["m"] == m])) for m in grid]
        inversions = [(a, b) for a, b in zip(med, med[1:]) if b > a * 1.05]
        assert len(inversions) <= 1

    def test_laplace_stays_within_twice_gaussian(self):
        grid = (30, 60, 120, 240)
        g = concentration_curve("gaussian", 15, 1, grid, 10, 3)
        l = concentration_curve("laplace", 15, 1, grid, 10, 3)
        for m in grid:
            mg = np.median([r["gamma_hat"] for r in g if r["m"] == m])
            ml = np.median([r["gamma_hat"] for r in l if r["m"] == m])
            assert ml <= 2.0 * mg

    def test_adding_trials_keeps_existing_rows(self):
        few = concentration_curve("gaussian", 6, 1, [12, 24], 2, 9, n_samples=64)
        more = concentration_curve("gaussian", 6, 1, [12, 24], 4, 9, n_samples=64)
        for m in (12, 24):
            a = [r for r in few if r["m"] == m]
            b = [r for r in more if r["m"] == m][: len(a)]
            assert a == b

    def test_empty_grid_rejected(self):
        with pytest.raises(ValueError):
            concentration_curve("gaussian", 6, 1, [], 1, 0)

    def test_summary_reduces_to_median_and_max(self):
        rows = [{"m": 12, "trial": 0, "gamma_hat": 2.0},
                {"m": 12, "trial": 1, "gamma_hat": 4.0},
                {"m": 12, "trial": 2, "gamma_hat": 3.0},
                {"m": 24, "trial": 0, "gamma_hat": 1.5}]
        summary = summarize_curve(rows)
        assert summary == [{"m": 12, "gamma_hat_median": 3.0, "gamma_hat_max": 4.0},
                           {"m": 24, "gamma_hat_median": 1.5, "gamma_hat_max": 1.5}]
