"""Truncated-Fock reference implementation: state constructors, block-exact
beam splitter, POVMs and moments."""

import numpy as np
import pytest
from scipy.special import erf

from vacfilter import fock, gaussian


class TestConstructors:
    def test_vacuum(self):
        st = fock.vacuum_state(10)
        assert st.vec[0] == 1.0
        assert np.sum(np.abs(st.vec)) == 1.0
        assert st.trace() == pytest.approx(1.0)

    def test_coherent_mean_photons(self):
        st = fock.coherent_state(1.0, 30)
        assert fock.mean_photon(st, 0) == pytest.approx(1.0, abs=1e-10)
        assert st.deficit < 1e-10

    def test_coherent_cutoff_guard(self):
        with pytest.raises(fock.TruncationError):
            fock.coherent_state(4.0, 12)

    def test_tmsv_reduced_variance(self):
        st = fock.tmsv_state(1.2, 30)
        rho_a = fock.reduced_density(st, 0)
        n = np.arange(31)
        n_bar = float(np.real(np.diag(rho_a) @ n))
        assert 2 * n_bar + 1 == pytest.approx(1.2, abs=1e-8)

    def test_tmsv_covariance_matches_gaussian_form(self):
        st = fock.tmsv_state(1.3, 30)
        np.testing.assert_allclose(
            fock.covariance_matrix(st), gaussian.two_mode_squeezed_cm(1.3), atol=1e-8
        )

    def test_thermal_moments(self):
        st = fock.thermal_state(0.25, 60)
        assert fock.mean_photon(st, 0) == pytest.approx(0.25, abs=1e-10)
        cm = fock.covariance_matrix(st)
        np.testing.assert_allclose(cm, 1.5 * np.eye(2), atol=1e-10)

    def test_number_state_moments(self):
        st = fock.number_state([2], 10)
        np.testing.assert_allclose(fock.covariance_matrix(st), 5.0 * np.eye(2), atol=1e-12)

    def test_coherent_mean_vector_convention(self):
        st = fock.coherent_state(0.5 + 0.3j, 25)
        np.testing.assert_allclose(fock.mean_vector(st), [1.0, 0.6], atol=1e-10)


class TestBeamSplitter:
    def test_coherent_through_splitter_is_product(self):
        alpha, t = 1.1 - 0.2j, 0.7
        st = fock.tensor(fock.coherent_state(alpha, 30), fock.vacuum_state(30))
        out = fock.fock_beamsplitter(st, 0, 1, t)
        target = fock.tensor(
            fock.coherent_state(np.sqrt(t) * alpha, 30),
            fock.coherent_state(-np.sqrt(1 - t) * alpha, 30),
        )
        assert fock.fidelity(out, target) > 1.0 - 1e-10

    def test_identity_transmissivity(self):
        st = fock.tmsv_state(1.4, 20)
        st = fock.tensor(st, fock.vacuum_state(20))
        out = fock.fock_beamsplitter(st, 1, 2, 1.0)
        np.testing.assert_allclose(out.vec, st.vec, atol=1e-12)

    def test_norm_preserved_within_sectors(self):
        st = fock.tensor(fock.coherent_state(1.0, 25), fock.coherent_state(0.5, 25))
        out = fock.fock_beamsplitter(st, 0, 1, 0.35)
        assert out.trace() + out.deficit == pytest.approx(1.0, abs=1e-9)

    def test_density_route_matches_pure_route(self):
        # same physical state via vec and via rho
        st = fock.tensor(fock.coherent_state(0.8, 15), fock.vacuum_state(15))
        pure = fock.fock_beamsplitter(st, 0, 1, 0.6)
        rho_in = np.tensordot(st.vec, st.vec.conj(), axes=0)  # ket x bra tensor
        rho_state = fock.FockState(15, rho=rho_in)
        mixed = fock.fock_beamsplitter(rho_state, 0, 1, 0.6)
        np.testing.assert_allclose(
            fock.covariance_matrix(mixed), fock.covariance_matrix(pure), atol=1e-10
        )


class TestPovms:
    def test_vacuum_never_clicks_perfect_detector(self):
        st = fock.vacuum_state(10)
        prob, _ = fock.povm_expectation(st, 0, fock.NoClick(1.0, 0.0))
        assert prob == pytest.approx(1.0, rel=1e-12)

    def test_noclick_on_coherent_matches_geometric_series(self):
        eta, beta = 0.63, 0.9
        st = fock.coherent_state(beta, 40)
        prob, cond = fock.povm_expectation(st, 0, fock.NoClick(eta, 0.0))
        assert prob == pytest.approx(np.exp(-eta * beta**2), abs=1e-10)
        assert cond.trace() == pytest.approx(1.0, abs=1e-10)

    def test_dark_count_exponent_discrepancy_is_quantified(self):
        # the microscopic no-click probability (1-p_d) exp(-eta |b|^2) differs
        # from the acceptance-model complement (1-p_d) exp(-eta (1-p_d) |b|^2)
        # by about (1-p_d) e^{-eta b^2} eta b^2 p_d
        eta, pd, beta = 0.63, 5e-3, np.sqrt(1.65)
        st = fock.coherent_state(beta, 40)
        prob, _ = fock.povm_expectation(st, 0, fock.NoClick(eta, pd))
        model = (1 - pd) * np.exp(-eta * (1 - pd) * beta**2)
        discrepancy = model - prob
        estimate = (1 - pd) * np.exp(-eta * beta**2) * eta * beta**2 * pd
        assert discrepancy == pytest.approx(estimate, rel=0.05)
        assert abs(discrepancy) < 2e-3

    def test_click_then_condition_keeps_unit_trace(self):
        st = fock.tmsv_state(1.3, 25)
        prob, cond = fock.povm_expectation(st, 1, fock.Click(0.8, 0.0))
        assert 0.0 < prob < 1.0
        assert cond.trace() == pytest.approx(1.0, abs=1e-10)

    def test_zero_probability_conditioning_raises(self):
        st = fock.vacuum_state(10)
        with pytest.raises(ValueError, match="zero-probability"):
            fock.povm_expectation(st, 0, fock.Click(1.0, 0.0))

    def test_quadrature_interval_on_vacuum(self):
        # symmetric interval around zero carries erf(sqrt2 B) of the vacuum
        B = 0.8
        st = fock.vacuum_state(30)
        prob, _ = fock.povm_expectation(st, 0, fock.QuadratureInterval(-B, B))
        assert prob == pytest.approx(erf(np.sqrt(2) * B), abs=1e-10)

    def test_quadrature_interval_on_coherent(self):
        # coherent quadrature distribution is N(Re beta, 1/4)
        from scipy.stats import norm

        beta, lo, hi = 0.6, -0.2, 1.1
        st = fock.coherent_state(beta, 40)
        prob, _ = fock.povm_expectation(st, 0, fock.QuadratureInterval(lo, hi))
        expected = norm.cdf(hi, loc=beta, scale=0.5) - norm.cdf(lo, loc=beta, scale=0.5)
        assert prob == pytest.approx(expected, abs=1e-9)

    def test_probabilities_in_unit_interval(self):
        rng = np.random.default_rng(3)
        for _ in range(10):
            beta = rng.uniform(0, 1.5) + 1j * rng.uniform(-1, 1)
            st = fock.coherent_state(beta, 35)
            for povm in (fock.NoClick(rng.uniform(0.1, 1.0), rng.uniform(0, 0.01)),
                         fock.QuadratureInterval(-1.0, 0.5)):
                prob, cond = fock.povm_expectation(st, 0, povm)
                assert 0.0 <= prob <= 1.0
                assert cond.trace() == pytest.approx(1.0, abs=1e-10)


class TestDisplacementAndRotation:
    def test_displace_vacuum_gives_coherent(self):
        st = fock.displace(fock.vacuum_state(30), 0, 0.7 - 0.3j)
        target = fock.coherent_state(0.7 - 0.3j, 30)
        assert fock.fidelity(st, target) > 1.0 - 1e-10

    def test_phase_rotation_moves_mean(self):
        st = fock.coherent_state(1.0, 30)
        out = fock.phase_rotate(st, 0, np.pi / 2)
        np.testing.assert_allclose(fock.mean_vector(out), [0.0, 2.0], atol=1e-10)


class TestTruncationConvergence:
    def test_doubling_cutoff_changes_nothing(self):
        # acceptance-suite style input: TMSV tap conditioning
        vals = []
        for n_max in (20, 40):
            st = fock.tensor(fock.tmsv_state(1.1, n_max), fock.vacuum_state(n_max))
            st = fock.fock_beamsplitter(st, 1, 2, 0.5)
            prob, cond = fock.povm_expectation(st, 2, fock.NoClick(0.63, 0.005))
            vals.append((prob, fock.covariance_matrix(cond)[:4, :4]))
        assert vals[0][0] == pytest.approx(vals[1][0], abs=1e-8)
        np.testing.assert_allclose(vals[0][1], vals[1][1], atol=1e-8)

    def test_entropy_of_pure_state_is_zero(self):
        assert fock.von_neumann_entropy(fock.tmsv_state(1.5, 20)) == 0.0
