"""1D inertial tolerancing tests.

Derived expectations are frozen from independent oracles: the point-wise
quadratic-mean definition of inertia on synthetic samples, textbook normal
tables for tail rates, and stacked Monte Carlo draws for the allocations.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from inertol import inertia1d as i1


class TestInertia:
    def test_centred_batch(self):
        assert i1.inertia(i1.Batch1D(0.0, 0.020)) == pytest.approx(0.020)

    def test_dispersion_free_batch(self):
        assert i1.inertia(i1.Batch1D(0.015, 0.0)) == pytest.approx(0.015)

    def test_quadratic_mean_oracle(self):
        # A two-point sample {mu - s, mu + s} has mean mu and population std s
        # exactly; the point-wise quadratic mean must equal the batch inertia.
        mu, s = 0.010, 0.020
        sample = np.array([mu - s, mu + s])
        oracle = math.sqrt(float(np.mean(sample**2)))
        value = i1.inertia(i1.Batch1D(mu, s))
        assert value == pytest.approx(oracle, rel=1e-12)
        assert value == pytest.approx(0.022360679, rel=1e-7)

    def test_negative_std_rejected(self):
        with pytest.raises(ValueError):
            i1.Batch1D(0.0, -1e-9)

    @given(
        st.tuples(
            st.floats(-1, 1), st.floats(0, 1), st.floats(-1, 1), st.floats(0, 1)
        )
    )
    @settings(max_examples=200, deadline=None)
    def test_norm_properties(self, quad):
        m1, s1, m2, s2 = quad
        a = i1.Batch1D(m1, s1)
        b = i1.Batch1D(m2, s2)
        summed = i1.Batch1D(m1 + m2, s1 + s2)
        assert i1.inertia(summed) <= i1.inertia(a) + i1.inertia(b) + 1e-12
        lam = 0.37
        scaled = i1.Batch1D(lam * m1, lam * s1)
        assert i1.inertia(scaled) == pytest.approx(lam * i1.inertia(a), abs=1e-15)

    def test_zero_iff_perfect(self):
        assert i1.inertia(i1.Batch1D(0.0, 0.0)) == 0.0
        assert i1.inertia(i1.Batch1D(1e-12, 0.0)) > 0.0


class TestCpi:
    def test_inertia_equals_tolerance(self):
        batch = i1.Batch1D(0.0, 0.020)
        assert i1.cpi(batch, i1.InertialTolerance(0.020)) == pytest.approx(1.0)

    def test_centred_half_spread(self):
        batch = i1.Batch1D(0.0, 0.010)
        assert i1.cpi(batch, i1.InertialTolerance(0.020)) == pytest.approx(2.0)

    def test_off_centred_unit_capability(self):
        batch = i1.Batch1D(0.010, 0.020)
        assert i1.cpi(batch, i1.InertialTolerance(0.022360)) == pytest.approx(1.0, rel=1e-4)

    def test_zero_inertia_signalled(self):
        with pytest.raises(i1.InfiniteCapabilityError):
            i1.cpi(i1.Batch1D(0.0, 0.0), i1.InertialTolerance(0.02))


class TestAcceptanceLimits:
    def test_degenerate_std(self):
        tol = i1.InertialTolerance(0.035)
        assert i1.max_mean_offset(tol, 1.0, 0.0) == pytest.approx(0.035)

    def test_centred(self):
        tol = i1.InertialTolerance(0.035)
        assert i1.max_std(tol, 1.0, 0.0) == pytest.approx(0.035)

    def test_boundary_batch_has_unit_capability(self):
        tol = i1.InertialTolerance(0.035)
        mu_max = i1.max_mean_offset(tol, 1.0, 0.020)
        assert mu_max == pytest.approx(0.028723, rel=1e-4)
        boundary = i1.Batch1D(mu_max, 0.020)
        assert i1.cpi(boundary, tol) == pytest.approx(1.0, rel=1e-12)

    def test_no_admissible_batch(self):
        tol = i1.InertialTolerance(0.035)
        with pytest.raises(i1.NoAdmissibleBatchError):
            i1.max_mean_offset(tol, 1.0, 0.036)
        with pytest.raises(i1.NoAdmissibleBatchError):
            i1.max_std(tol, 2.0, 0.020)

    def test_curve_membership_matches_capability(self):
        tol = i1.InertialTolerance(0.035)
        rng = np.random.default_rng(5)
        for _ in range(300):
            mean = rng.uniform(-0.05, 0.05)
            std = rng.uniform(0.0, 0.05)
            batch = i1.Batch1D(mean, std)
            capable = i1.cpi(batch, tol) >= 1.0
            try:
                inside = abs(mean) <= i1.max_mean_offset(tol, 1.0, std)
            except i1.NoAdmissibleBatchError:
                inside = False
            assert capable == inside


class TestAllocation:
    def test_three_link_case_study(self):
        tols = i1.allocate_uniform(0.2, 3)
        assert [t.value for t in tols] == pytest.approx([0.019245] * 3, rel=1e-4)

    def test_single_link(self):
        (tol,) = i1.allocate_uniform(0.2, 1)
        assert tol.value == pytest.approx(0.2 / 6.0)

    def test_nine_links(self):
        tols = i1.allocate_uniform(0.6, 9)
        assert tols[0].value == pytest.approx(0.0333333, rel=1e-5)

    def test_stacked_spread_monte_carlo(self):
        n, fr = 9, 0.6
        sigma = i1.allocate_uniform(fr, n)[0].value
        rng = np.random.default_rng(11)
        draws = 1_000_000
        total = rng.standard_normal((draws, n)).sum(axis=1) * sigma
        observed = total.std()
        target = fr / 6.0
        band = 3.0 * target / math.sqrt(2.0 * draws)
        assert abs(observed - target) <= band

    def test_weighted_reduces_to_uniform(self):
        inp = i1.AllocationInput(0.2, (1.0, 1.0, 1.0), (1.0, 1.0, 1.0))
        weighted = [t.value for t in i1.allocate_weighted(inp)]
        uniform = [t.value for t in i1.allocate_uniform(0.2, 3)]
        assert weighted == pytest.approx(uniform, rel=1e-14)

    def test_weighted_double_feasibility(self):
        inp = i1.AllocationInput(0.2, (1.0, 1.0, 1.0), (1.0, 2.0, 2.0))
        values = [t.value for t in i1.allocate_weighted(inp)]
        assert values[1] == pytest.approx(2 * values[0], rel=1e-14)
        assert values[2] == pytest.approx(2 * values[0], rel=1e-14)
        assert sum(v * v for v in values) == pytest.approx((0.2 / 6.0) ** 2, rel=1e-14)

    def test_stacked_variance_identity(self):
        rng = np.random.default_rng(2)
        for _ in range(20):
            n = rng.integers(1, 6)
            alphas = tuple(rng.uniform(0.2, 5.0, n))
            betas = tuple(rng.uniform(0.2, 5.0, n))
            inp = i1.AllocationInput(0.4, alphas, betas)
            values = [t.value for t in i1.allocate_weighted(inp)]
            stacked = sum((a * v) ** 2 for a, v in zip(alphas, values))
            assert stacked == pytest.approx((0.4 / 6.0) ** 2, rel=1e-12)

    def test_input_validation(self):
        with pytest.raises(ValueError):
            i1.AllocationInput(0.2, (0.0,), (1.0,))
        with pytest.raises(ValueError):
            i1.AllocationInput(0.2, (1.0,), (0.0,))
        with pytest.raises(ValueError):
            i1.AllocationInput(0.2, (1.0, 2.0), (1.0,))


class TestCapabilityGuarantee:
    def test_case_study_value(self):
        assert i1.cpi_for_cpk(1.10, 3) == pytest.approx(1.24, abs=0.005)

    def test_small_cpk_limit(self):
        assert i1.cpi_for_cpk(1e-9, 9) == pytest.approx(1.0, rel=1e-9)

    def test_monotonicity(self):
        values = [i1.cpi_for_cpk(c, n) for c in (0.8, 1.0, 1.2) for n in (1, 3)]
        assert i1.cpi_for_cpk(1.0, 3) > i1.cpi_for_cpk(0.8, 3)
        assert i1.cpi_for_cpk(1.0, 4) > i1.cpi_for_cpk(1.0, 3)
        assert all(v > 0 for v in values)

    def test_worst_offcentring_stays_under_target(self):
        # smaller sibling of the acceptance sweep: the guaranteed bound holds
        cpi_req = i1.cpi_for_cpk(1.10, 3)
        fractions = np.linspace(0.0, 1.0, 11)
        ncrs = i1.offcentred_chain_ncr(
            0.2, cpi_req, 3, fractions, draws=200_000, seed=3, one_sided=True
        )
        target = i1.ncr_from_cpk(1.10)
        band = 3.0 * i1.ncr_std(target, 200_000)
        assert ncrs.max() <= target + band


class TestNcrConversions:
    def test_case_study_pair(self):
        assert i1.cpk_from_ncr(500.0) == pytest.approx(1.10, abs=0.01)
        assert i1.ncr_from_cpk(1.0968422) == pytest.approx(500.0, rel=1e-4)

    def test_unit_capability_rate(self):
        # Phi(-3) = 0.001349898... from standard normal tables
        assert i1.ncr_from_cpk(1.0) == pytest.approx(1349.898, rel=1e-5)

    def test_median(self):
        assert i1.cpk_from_ncr(500_000.0) == pytest.approx(0.0, abs=1e-12)

    def test_round_trip_identity(self):
        for ppm in (0.5, 1.0, 10.0, 500.0, 1349.9, 77_000.0, 500_000.0, 999_000.0):
            back = i1.ncr_from_cpk(i1.cpk_from_ncr(ppm))
            assert back == pytest.approx(ppm, rel=1e-9)

    def test_domain_errors(self):
        for bad in (0.0, -5.0, 1e6, 2e6):
            with pytest.raises(ValueError):
                i1.cpk_from_ncr(bad)


class TestNcrStd:
    def test_zero_rate(self):
        assert i1.ncr_std(0.0, 1000) == 0.0

    def test_full_rate(self):
        assert i1.ncr_std(1e6, 1000) == 0.0

    def test_direct_evaluation(self):
        assert i1.ncr_std(3060.0, 1_000_000) == pytest.approx(55.2326, rel=1e-5)

    def test_symmetric_maximum(self):
        assert i1.ncr_std(500_000.0, 101) == pytest.approx(50_000.0)

    def test_draw_count_validation(self):
        with pytest.raises(ValueError):
            i1.ncr_std(100.0, 1)
