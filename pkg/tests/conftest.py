"""Shared builders for synthetic and deployment-style systems."""

import numpy as np
import pytest

from starmimo.channel import SystemDims, SystemModel
from starmimo.correlation import CorrelationPair, LinkGains, build_bs_correlation


def random_system(rng, m=6, n=5, k_t=2, k_r=1, complex_bs=True, rho=None,
                  sigma2=None):
    """Synthetic instance with O(1) gains; exercises general Hermitian inputs."""
    k = k_t + k_r
    if complex_bs:
        a = rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))
        r_bs = a @ a.conj().T
        r_bs /= np.trace(r_bs).real / m
    else:
        r_bs = build_bs_correlation(m, "exponential", 0.6)
    b = rng.standard_normal((n, n))
    r_ris = b @ b.T
    d = np.sqrt(np.diag(r_ris))
    r_ris = r_ris / np.outer(d, d)
    corr = CorrelationPair.from_matrices(r_bs, r_ris)
    gains = LinkGains(
        beta_g=rng.uniform(0.5, 1.5),
        beta_bar=rng.uniform(0.2, 1.0, k),
        beta_tilde=rng.uniform(0.2, 1.0, k),
    )
    dims = SystemDims(m=m, n=n, k_t=k_t, k_r=k_r, tau_c=200, tau=max(k, 4))
    modes = tuple(["t"] * k_t + ["r"] * k_r)
    return SystemModel(
        dims=dims, corr=corr, gains=gains, modes=modes,
        rho=rho if rho is not None else rng.uniform(1.0, 4.0),
        pilot_power=rng.uniform(0.5, 2.0),
        sigma2=sigma2 if sigma2 is not None else rng.uniform(0.1, 0.5),
    )


def uncorrelated_ris_system(rng, m=6, n=8, k_t=2, k_r=2):
    """R_RIS = I variant: the configuration's phases must not matter."""
    system = random_system(rng, m=m, n=n, k_t=k_t, k_r=k_r, complex_bs=False)
    corr = CorrelationPair.from_matrices(system.corr.r_bs, np.eye(n))
    return SystemModel(
        dims=system.dims, corr=corr, gains=system.gains, modes=system.modes,
        rho=system.rho, pilot_power=system.pilot_power, sigma2=system.sigma2,
    )


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
