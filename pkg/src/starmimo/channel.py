"""STAR surface configuration and the aggregated-channel statistics.

Each surface element splits the impinging wave into a transmitted (t) and a
reflected (r) component with independent phases and energy-conserving
amplitudes.  Under the Kronecker fading model the aggregated BS-user channel
has covariance ``alpha_k * R_BS`` where the scalar ``alpha_k`` carries the
whole dependence on the surface configuration; this module computes that
scalar and samples channel realizations for the Monte Carlo oracle.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .correlation import CorrelationPair, LinkGains

ES = "es"
MS = "ms"

UNIT_MODULUS_TOL = 1e-10
ENERGY_TOL = 1e-10


@dataclass
class StarConfig:
    """Amplitudes and phase shifts of every surface element, both regions.

    ``theta_t``/``theta_r`` are unit-modulus complex vectors, ``beta_t``/
    ``beta_r`` real amplitudes with ``beta_t**2 + beta_r**2 = 1`` per element.
    Amplitudes may be negative while an optimizer is running (a sign flip of
    amplitude and phase together does not change any rate); finalized MS
    configurations are exactly binary.
    """

    theta_t: np.ndarray
    theta_r: np.ndarray
    beta_t: np.ndarray
    beta_r: np.ndarray
    protocol: str = ES

    def __post_init__(self):
        self.theta_t = np.asarray(self.theta_t, dtype=complex)
        self.theta_r = np.asarray(self.theta_r, dtype=complex)
        self.beta_t = np.asarray(self.beta_t, dtype=float)
        self.beta_r = np.asarray(self.beta_r, dtype=float)
        if not (self.theta_t.shape == self.theta_r.shape == self.beta_t.shape == self.beta_r.shape):
            raise ValueError("all four configuration vectors must share one length N")
        if self.protocol not in (ES, MS):
            raise ValueError(f"protocol must be {ES!r} or {MS!r}, got {self.protocol!r}")

    @property
    def n(self) -> int:
        return self.theta_t.shape[0]

    def validate(self):
        """Check unit modulus, energy conservation, and MS binarity."""
        for name, theta in (("theta_t", self.theta_t), ("theta_r", self.theta_r)):
            err = np.max(np.abs(np.abs(theta) - 1.0))
            if err > UNIT_MODULUS_TOL:
                raise ValueError(f"{name} is not unit modulus (max deviation {err:.2e})")
        energy_err = np.max(np.abs(self.beta_t**2 + self.beta_r**2 - 1.0))
        if energy_err > ENERGY_TOL:
            raise ValueError(f"energy conservation violated (max deviation {energy_err:.2e})")
        if self.protocol == MS:
            for name, beta in (("beta_t", self.beta_t), ("beta_r", self.beta_r)):
                if not np.all((beta == 0.0) | (beta == 1.0)):
                    raise ValueError(f"MS protocol requires binary amplitudes in {name}")
        return self

    def amplitudes(self, mode: str) -> np.ndarray:
        return self.beta_t if mode == "t" else self.beta_r

    def phases(self, mode: str) -> np.ndarray:
        return self.theta_t if mode == "t" else self.theta_r

    def phi(self, mode: str) -> np.ndarray:
        """Diagonal of the passive beamforming matrix for one region."""
        return self.amplitudes(mode) * self.phases(mode)

    def copy(self) -> "StarConfig":
        return replace(
            self,
            theta_t=self.theta_t.copy(),
            theta_r=self.theta_r.copy(),
            beta_t=self.beta_t.copy(),
            beta_r=self.beta_r.copy(),
        )

    @classmethod
    def equal_split(cls, n: int, rng: np.random.Generator | None = None) -> "StarConfig":
        """Canonical starting point: amplitudes sqrt(1/2), phases uniform (or zero)."""
        if rng is None:
            theta_t = np.ones(n, dtype=complex)
            theta_r = np.ones(n, dtype=complex)
        else:
            theta_t = np.exp(1j * rng.uniform(0.0, 2.0 * np.pi, n))
            theta_r = np.exp(1j * rng.uniform(0.0, 2.0 * np.pi, n))
        amp = np.full(n, np.sqrt(0.5))
        return cls(theta_t=theta_t, theta_r=theta_r, beta_t=amp, beta_r=amp.copy())

    @classmethod
    def random(cls, n: int, rng: np.random.Generator) -> "StarConfig":
        """Random feasible point: uniform phases, uniform split angle per element."""
        chi = rng.uniform(0.0, np.pi / 2.0, n)
        return cls(
            theta_t=np.exp(1j * rng.uniform(0.0, 2.0 * np.pi, n)),
            theta_r=np.exp(1j * rng.uniform(0.0, 2.0 * np.pi, n)),
            beta_t=np.cos(chi),
            beta_r=np.sin(chi),
        )


@dataclass(frozen=True)
class SystemDims:
    """Antenna/user counts and frame split of the coherence block."""

    m: int
    n: int
    k_t: int
    k_r: int
    tau_c: int
    tau: int

    def __post_init__(self):
        if min(self.m, self.n, self.tau_c, self.tau) < 1 or self.k_t < 0 or self.k_r < 0:
            raise ValueError("dimensions must be positive (user counts non-negative)")
        if self.k_t + self.k_r < 1:
            raise ValueError("at least one user required")
        if self.tau > self.tau_c:
            raise ValueError("pilot length cannot exceed the coherence block")

    @property
    def k(self) -> int:
        return self.k_t + self.k_r

    @property
    def prelog(self) -> float:
        return (self.tau_c - self.tau) / self.tau_c


@dataclass(frozen=True)
class UserMeta:
    """Per-user view: region tag and the two large-scale gains."""

    mode: str
    beta_bar: float
    beta_hat: float


@dataclass(frozen=True)
class AggregatedCovariance:
    """Covariance of the aggregated channel, stored as (scalar, shared R_BS).

    The full matrix ``alpha * r_bs`` is never materialized on the fast path;
    everything downstream works on ``alpha`` and the cached eigenvalues.
    """

    alpha: float
    corr: CorrelationPair

    def materialize(self) -> np.ndarray:
        return self.alpha * self.corr.r_bs


@dataclass(frozen=True)
class SystemModel:
    """Immutable bundle of everything the rate expressions need besides the
    surface configuration: dimensions, correlation, gains, region tags,
    powers, and the pilot parameters."""

    dims: SystemDims
    corr: CorrelationPair
    gains: LinkGains
    modes: tuple  # 't' / 'r' per user, length K
    rho: float  # downlink power budget (W)
    pilot_power: float  # per-symbol pilot power (W)
    sigma2: float  # noise power (W)

    def __post_init__(self):
        if len(self.modes) != self.dims.k:
            raise ValueError("one region tag per user required")
        if any(mode not in ("t", "r") for mode in self.modes):
            raise ValueError("region tags must be 't' or 'r'")
        if sum(1 for mode in self.modes if mode == "t") != self.dims.k_t:
            raise ValueError("region tags disagree with (k_t, k_r)")
        if self.gains.k != self.dims.k:
            raise ValueError("gains must have one entry per user")
        if self.corr.m != self.dims.m or self.corr.n != self.dims.n:
            raise ValueError("correlation matrices disagree with the stated dimensions")
        if self.dims.tau < self.dims.k:
            raise ValueError("orthogonal pilots need tau >= K")
        if self.rho <= 0 or self.pilot_power <= 0 or self.sigma2 <= 0:
            raise ValueError("powers must be positive")

    @property
    def epsilon(self) -> float:
        """Effective estimation-noise variance sigma^2 / (tau * P)."""
        return self.sigma2 / (self.dims.tau * self.pilot_power)

    def user(self, k: int) -> UserMeta:
        return UserMeta(
            mode=self.modes[k],
            beta_bar=float(self.gains.beta_bar[k]),
            beta_hat=float(self.gains.beta_hat[k]),
        )

    def users_in(self, mode: str) -> np.ndarray:
        return np.flatnonzero(np.asarray(self.modes) == mode)


def pbm_quadratic_diag(r_ris: np.ndarray, phi: np.ndarray) -> np.ndarray:
    """diag(R_RIS diag(phi) R_RIS) in O(N^2).

    For Hermitian R the (n, n) entry is sum_m |R[n, m]|^2 phi[m], i.e. a
    matvec with the elementwise squared-magnitude kernel.
    """
    r_ris = np.asarray(r_ris)
    phi = np.asarray(phi)
    if r_ris.shape[0] != r_ris.shape[1] or r_ris.shape[0] != phi.shape[0]:
        raise ValueError(
            f"dimension mismatch: R_RIS {r_ris.shape} vs phi {phi.shape}"
        )
    return (np.abs(r_ris) ** 2) @ phi


def phase_dependent_trace(r_ris: np.ndarray, amplitudes: np.ndarray,
                          phases: np.ndarray) -> float:
    """tr(R_RIS Phi R_RIS Phi^H) for the diagonal Phi = diag(amplitudes * phases).

    Real and non-negative (it is a squared Frobenius norm); computed in
    O(N^2) without forming any matrix product.
    """
    phi = np.asarray(amplitudes) * np.asarray(phases)
    value = np.vdot(phi, pbm_quadratic_diag(r_ris, phi))
    return float(value.real)


def aggregated_covariance(user: UserMeta, config: StarConfig,
                          corr: CorrelationPair) -> AggregatedCovariance:
    """Covariance scalar of the aggregated channel for one user.

    ``alpha = beta_bar + beta_hat * tr(R_RIS Phi R_RIS Phi^H)`` with the
    passive beamforming matrix of the user's own region; the direct-link term
    is included so that ``R_k = alpha * R_BS`` holds exactly.
    """
    trace = phase_dependent_trace(
        corr.r_ris, config.amplitudes(user.mode), config.phases(user.mode)
    )
    return AggregatedCovariance(alpha=user.beta_bar + user.beta_hat * trace, corr=corr)


def covariance_scalars(system: SystemModel, config: StarConfig) -> np.ndarray:
    """All per-user covariance scalars, reusing one trace per region."""
    ris_abs2 = system.corr.ris_abs2
    traces = {}
    for mode in ("t", "r"):
        phi = config.phi(mode)
        traces[mode] = float(np.vdot(phi, ris_abs2 @ phi).real)
    beta_hat = system.gains.beta_hat
    return np.array([
        system.gains.beta_bar[k] + beta_hat[k] * traces[system.modes[k]]
        for k in range(system.dims.k)
    ])


@dataclass
class ChannelRealization:
    """One draw of all fast-fading links plus the assembled aggregated channels."""

    g: np.ndarray  # (M, N) BS-surface channel
    q: np.ndarray  # (K, N) surface-user channels
    d: np.ndarray  # (K, M) direct channels
    h: np.ndarray  # (K, M) aggregated channels

    modes: tuple = field(default=())


def complex_normal(rng: np.random.Generator, shape) -> np.ndarray:
    """CN(0, 1) entries: variance 1/2 per real and imaginary part."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def sample_realization(system: SystemModel, config: StarConfig,
                       rng: np.random.Generator) -> ChannelRealization:
    """Draw one correlated-Rayleigh realization of every link.

    ``G = sqrt(beta_g) R_BS^{1/2} D R_RIS^{1/2}`` with iid CN(0,1) entries in
    ``D``; user links analogous.  The aggregated channel is assembled with
    the passive beamforming matrix of each user's region.
    """
    m, n, k = system.dims.m, system.dims.n, system.dims.k
    bs_sqrt = system.corr.bs_sqrt
    ris_sqrt = system.corr.ris_sqrt

    d_fast = complex_normal(rng, (m, n))
    g = np.sqrt(system.gains.beta_g) * (bs_sqrt @ d_fast @ ris_sqrt)

    c = complex_normal(rng, (k, n))
    q = np.sqrt(system.gains.beta_tilde)[:, None] * (c @ ris_sqrt.T)

    c_bar = complex_normal(rng, (k, m))
    d = np.sqrt(system.gains.beta_bar)[:, None] * (c_bar @ bs_sqrt.T)

    h = np.empty((k, m), dtype=complex)
    for i in range(k):
        phi = config.phi(system.modes[i])
        h[i] = d[i] + g @ (phi * q[i])
    return ChannelRealization(g=g, q=q, d=d, h=h, modes=tuple(system.modes))
