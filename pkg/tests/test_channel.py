import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_system, uncorrelated_ris_system
from starmimo.channel import (
    StarConfig,
    SystemDims,
    SystemModel,
    UserMeta,
    aggregated_covariance,
    covariance_scalars,
    pbm_quadratic_diag,
    phase_dependent_trace,
    sample_realization,
)
from starmimo.correlation import CorrelationPair, LinkGains


def dense_trace(r_ris, amplitudes, phases):
    """O(N^3) reference: materialize the products."""
    phi = np.diag(np.asarray(amplitudes) * np.asarray(phases))
    return np.trace(r_ris @ phi @ r_ris @ phi.conj().T)


class TestStarConfig:
    def test_equal_split_feasible(self, rng):
        StarConfig.equal_split(8, rng).validate()
        StarConfig.equal_split(8).validate()

    def test_random_feasible(self, rng):
        StarConfig.random(16, rng).validate()

    def test_rejects_modulus_violation(self):
        cfg = StarConfig.equal_split(4)
        cfg.theta_t[0] = 2.0
        with pytest.raises(ValueError, match="unit modulus"):
            cfg.validate()

    def test_rejects_energy_violation(self):
        cfg = StarConfig.equal_split(4)
        cfg.beta_t[0] = 1.0
        with pytest.raises(ValueError, match="energy"):
            cfg.validate()

    def test_ms_requires_binary(self):
        cfg = StarConfig.equal_split(4)
        cfg.protocol = "ms"
        with pytest.raises(ValueError, match="binary"):
            cfg.validate()
        binary = StarConfig(
            theta_t=np.ones(2), theta_r=np.ones(2),
            beta_t=np.array([1.0, 0.0]), beta_r=np.array([0.0, 1.0]),
            protocol="ms",
        )
        binary.validate()

    def test_signed_amplitudes_allowed(self):
        cfg = StarConfig.equal_split(4)
        cfg.beta_t[1] *= -1.0
        cfg.validate()  # energy conservation holds with signed entries

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            StarConfig(theta_t=np.ones(3), theta_r=np.ones(2),
                       beta_t=np.ones(3), beta_r=np.ones(3))


class TestPhaseDependentTrace:
    def test_identity_correlation_gives_energy_sum(self, rng):
        # with uncorrelated elements the trace is just the amplitude energy
        beta = rng.uniform(-1, 1, 6)
        theta = np.exp(1j * rng.uniform(0, 2 * np.pi, 6))
        value = phase_dependent_trace(np.eye(6), beta, theta)
        assert value == pytest.approx(np.sum(beta**2), rel=1e-12)

    def test_two_element_example_aligned(self):
        r = np.array([[1.0, 0.5], [0.5, 1.0]])
        value = phase_dependent_trace(r, np.ones(2), np.ones(2, dtype=complex))
        assert value == pytest.approx(2.5, rel=1e-12)

    def test_two_element_example_opposed(self):
        r = np.array([[1.0, 0.5], [0.5, 1.0]])
        theta = np.array([1.0, np.exp(1j * np.pi)])
        value = phase_dependent_trace(r, np.ones(2), theta)
        assert value == pytest.approx(1.5, rel=1e-12)

    @pytest.mark.parametrize("n", [2, 7, 16, 32])
    def test_matches_dense_product(self, n, rng):
        b = rng.standard_normal((n, n))
        r = b @ b.T
        d = np.sqrt(np.diag(r))
        r /= np.outer(d, d)
        beta = rng.uniform(-1, 1, n)
        theta = np.exp(1j * rng.uniform(0, 2 * np.pi, n))
        fast = phase_dependent_trace(r, beta, theta)
        ref = dense_trace(r, beta, theta)
        assert abs(ref.imag) < 1e-10
        assert fast == pytest.approx(ref.real, rel=1e-10)

    def test_matches_dense_complex_hermitian(self, rng):
        a = rng.standard_normal((9, 9)) + 1j * rng.standard_normal((9, 9))
        r = a @ a.conj().T
        beta = rng.uniform(0, 1, 9)
        theta = np.exp(1j * rng.uniform(0, 2 * np.pi, 9))
        fast = phase_dependent_trace(r, beta, theta)
        assert fast == pytest.approx(dense_trace(r, beta, theta).real, rel=1e-10)

    def test_common_rotation_invariance(self, rng):
        r = np.abs(rng.standard_normal((5, 5)))
        r = (r + r.T) / 2
        np.fill_diagonal(r, 1.0)
        beta = rng.uniform(0, 1, 5)
        theta = np.exp(1j * rng.uniform(0, 2 * np.pi, 5))
        base = phase_dependent_trace(r, beta, theta)
        rotated = phase_dependent_trace(r, beta, theta * np.exp(1j * 0.73))
        assert rotated == pytest.approx(base, rel=1e-12)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError, match="mismatch"):
            pbm_quadratic_diag(np.eye(3), np.ones(4))

    @settings(max_examples=30, deadline=None)
    @given(seed=st.integers(0, 2**31 - 1))
    def test_non_negative_for_any_configuration(self, seed):
        # squared Frobenius norm of R^(1/2) Phi R^(1/2), so >= 0 even with
        # signed amplitudes
        local = np.random.default_rng(seed)
        n = local.integers(1, 9)
        b = local.standard_normal((n, n))
        r = b @ b.T
        beta = local.uniform(-2, 2, n)
        theta = np.exp(1j * local.uniform(0, 2 * np.pi, n))
        assert phase_dependent_trace(r, beta, theta) >= -1e-10


class TestAggregatedCovariance:
    def test_single_active_element(self):
        corr = CorrelationPair.from_matrices(np.eye(3), np.eye(4))
        beta_t = np.zeros(4)
        beta_t[0] = 1.0
        config = StarConfig(
            theta_t=np.ones(4, dtype=complex), theta_r=np.ones(4, dtype=complex),
            beta_t=beta_t, beta_r=np.sqrt(1 - beta_t**2),
        )
        user = UserMeta(mode="t", beta_bar=0.5, beta_hat=0.25)
        cov = aggregated_covariance(user, config, corr)
        assert cov.alpha == pytest.approx(0.75, rel=1e-12)
        np.testing.assert_allclose(cov.materialize(), 0.75 * np.eye(3))

    def test_zero_cascaded_gain(self, rng):
        system = random_system(rng)
        corr = system.corr
        config = StarConfig.random(system.dims.n, rng)
        user = UserMeta(mode="r", beta_bar=0.3, beta_hat=0.0)
        assert aggregated_covariance(user, config, corr).alpha == pytest.approx(0.3)

    def test_dark_region_contributes_nothing(self, rng):
        system = random_system(rng)
        config = StarConfig.random(system.dims.n, rng)
        config.beta_t[:] = 0.0
        config.beta_r[:] = 1.0
        user = UserMeta(mode="t", beta_bar=0.4, beta_hat=5.0)
        assert aggregated_covariance(user, config, system.corr).alpha == pytest.approx(0.4)

    def test_phase_independence_without_ris_correlation(self, rng):
        system = uncorrelated_ris_system(rng)
        beta = StarConfig.random(system.dims.n, rng)
        alphas = []
        for _ in range(10):
            draw = StarConfig.random(system.dims.n, rng)
            draw.beta_t = beta.beta_t.copy()
            draw.beta_r = beta.beta_r.copy()
            alphas.append(covariance_scalars(system, draw))
        spread = np.ptp(np.array(alphas), axis=0)
        assert np.max(spread) < 1e-12


class TestSampleRealization:
    def test_zero_gains_give_zero_channel(self, rng):
        system = random_system(rng, m=4, n=4, k_t=1, k_r=1)
        gains = LinkGains(beta_g=0.0, beta_bar=np.zeros(2), beta_tilde=np.zeros(2))
        system = SystemModel(
            dims=system.dims, corr=system.corr, gains=gains, modes=system.modes,
            rho=system.rho, pilot_power=system.pilot_power, sigma2=system.sigma2,
        )
        real = sample_realization(system, StarConfig.equal_split(4, rng), rng)
        np.testing.assert_array_equal(real.h, np.zeros((2, 4)))

    def test_direct_only_when_surface_dark(self, rng):
        corr = CorrelationPair.from_matrices(np.eye(4), np.eye(4))
        dims = SystemDims(m=4, n=4, k_t=1, k_r=1, tau_c=100, tau=2)
        system = SystemModel(
            dims=dims, corr=corr,
            gains=LinkGains(beta_g=1.0, beta_bar=np.array([1.0, 1.0]),
                            beta_tilde=np.array([1.0, 1.0])),
            modes=("t", "r"), rho=1.0, pilot_power=1.0, sigma2=0.1,
        )
        config = StarConfig(
            theta_t=np.ones(4, dtype=complex), theta_r=np.ones(4, dtype=complex),
            beta_t=np.zeros(4), beta_r=np.zeros(4),
        )
        real = sample_realization(system, config, rng)
        np.testing.assert_array_equal(real.h, real.d)

    def test_empirical_covariance_matches_closed_form(self, rng):
        # law of large numbers against the covariance scalar, M = N = 4
        system = random_system(rng, m=4, n=4, k_t=1, k_r=1, complex_bs=False)
        config = StarConfig.random(4, rng)
        alphas = covariance_scalars(system, config)
        n_draws = 50_000
        acc = np.zeros((2, 4, 4), dtype=complex)
        for _ in range(n_draws):
            real = sample_realization(system, config, rng)
            acc += real.h[:, :, None] * real.h.conj()[:, None, :]
        acc /= n_draws
        for k in range(2):
            target = alphas[k] * system.corr.r_bs
            err = np.linalg.norm(acc[k] - target) / np.linalg.norm(target)
            assert err < 0.05

    def test_assembly_identity(self, rng):
        # h_k must equal d_k + G Phi q_k exactly as constructed
        system = random_system(rng, m=5, n=6, k_t=1, k_r=2)
        config = StarConfig.random(6, rng)
        real = sample_realization(system, config, rng)
        for k, mode in enumerate(system.modes):
            expected = real.d[k] + real.g @ (config.phi(mode) * real.q[k])
            np.testing.assert_allclose(real.h[k], expected, atol=1e-14)
