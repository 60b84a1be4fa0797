import numpy as np
import pytest

from innereig.governor import ToleranceGovernor, compute_c_prime


class TestCPrime:
    def test_dimension_one(self):
        assert compute_c_prime(1.0, 0.0, np.array([2.0 + 0j]), 1) == 1.0

    def test_two_values(self):
        vals = np.array([0.9 + 0j, 2.0 + 0j])
        assert compute_c_prime(1.0, 0.0, vals, 2) == pytest.approx(4.0)

    def test_three_values_max(self):
        vals = np.array([0.9 + 0j, 2.0 + 0j, -1.0 + 0j])
        # terms: 2*|2|/|2-1| = 4 and 2*|-1|/|-1-1| = 1 -> 4
        assert compute_c_prime(1.0, 0.0, vals, 3) == pytest.approx(4.0)

    def test_degenerate_terms_skipped(self):
        vals = np.array([0.9 + 0j, 1.0 + 0j, 3.0 + 0j])  # second equals rho
        got = compute_c_prime(1.0, 0.0, vals, 3)
        assert got == pytest.approx(2.0 * 3.0 / 2.0)

    def test_all_degenerate_is_inf(self):
        vals = np.array([0.9 + 0j, 1.0 + 0j])
        assert compute_c_prime(1.0, 0.0, vals, 2) == np.inf


class TestGovernor:
    def test_cap_engages(self):
        g = ToleranceGovernor("adaptive", eps_tilde=1e-3)
        assert g.inner_tolerance(200.0) == 0.1
        assert g.last_capped and g.count_capped == 1

    def test_no_cap(self):
        g = ToleranceGovernor("adaptive", eps_tilde=1e-4)
        assert g.inner_tolerance(1.0) == pytest.approx(1e-4)
        assert not g.last_capped

    def test_exact_mode(self):
        g = ToleranceGovernor("exact")
        for c in (1.0, 1e6, np.inf):
            assert g.inner_tolerance(c) == 1e-14
        assert g.count_capped == 0 and g.count_total == 3

    def test_fixed_mode(self):
        g = ToleranceGovernor("fixed", fixed_eps=1e-2)
        assert g.inner_tolerance(1e9) == 1e-2

    def test_p01_bookkeeping(self):
        g = ToleranceGovernor("adaptive", eps_tilde=1e-3)
        cs = [1.0, 500.0, 2.0, np.inf, 50.0]
        for c in cs:
            g.inner_tolerance(c)
        assert g.count_total == len(cs)
        assert g.count_capped == 2  # 500 and inf engage the cap
        assert g.p_01 == pytest.approx(2 / 5)

    def test_rule_property(self):
        rng = np.random.default_rng(70)
        g = ToleranceGovernor("adaptive", eps_tilde=1e-3)
        for _ in range(200):
            c = float(np.exp(rng.uniform(-2, 12)))
            eps = g.inner_tolerance(c)
            assert eps == min(c * 1e-3, 0.1)
            assert eps <= 0.1

    def test_validation(self):
        with pytest.raises(ValueError):
            ToleranceGovernor("adaptive", eps_tilde=2.0)
        with pytest.raises(ValueError):
            ToleranceGovernor("fixed")
        with pytest.raises(ValueError):
            ToleranceGovernor("loose")
