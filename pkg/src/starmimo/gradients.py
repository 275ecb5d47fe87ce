"""Closed-form gradients of the sum-SE objective in the surface variables.

Gradient convention: derivative with respect to the conjugated phase vector
(for real objectives this is the direction of steepest ascent after the
2*[Re, Im] pairing with real coordinates).  Every trace scalar reduces to an
O(M) sum over the shared BS eigenvalues; a dense-matrix evaluation of the
same scalars is kept behind ``method='dense'`` for verification, and a
central finite-difference oracle adjudicates the whole assembly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import StarConfig, SystemModel, covariance_scalars, pbm_quadratic_diag

LN2 = np.log(2.0)


class DegenerateInterferenceError(ValueError):
    """Raised when some user has a zero interference-plus-noise term, which
    makes the SINR quotient rule undefined."""


@dataclass
class GradientPair:
    """Stacked gradients: phases of both regions, then amplitudes of both."""

    d_theta: np.ndarray  # (2N,) complex, [t-region; r-region]
    d_beta: np.ndarray   # (2N,) real

    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.d_theta) ** 2) + np.sum(self.d_beta**2)))


@dataclass
class GradientWorkspace:
    """Everything the gradient assembly reads, recomputed per configuration.

    ``a_t``/``a_r`` are the diagonals of R_RIS Phi_u R_RIS (the only part of
    those products ever needed).  ``nu``, ``nu_bar``, ``nu_tilde`` are the
    real trace scalars weighting the signal and interference directions.
    """

    config: StarConfig
    system: SystemModel
    a_t: np.ndarray          # (N,) diag of A_t
    a_r: np.ndarray          # (N,) diag of A_r
    alphas: np.ndarray       # (K,)
    psi: np.ndarray          # (K, M) estimate-covariance eigenvalues
    qr_gain: np.ndarray      # (K, M) eigenvalues of Q_k R_k
    s: np.ndarray            # (K,) signal terms
    i_tilde: np.ndarray      # (K,) interference terms
    gamma: np.ndarray        # (K,)
    nu: np.ndarray           # (K,)
    nu_bar: np.ndarray       # (K,)
    nu_tilde: np.ndarray     # (K, K), entry (k, i)

    def interference_coefficient(self, k: int, region: str) -> float:
        """Scalar multiplying diag(A_u) in the interference gradient of user k."""
        members = self.system.users_in(region)
        coef = float(np.sum(self.nu_tilde[k, members]))
        if self.system.modes[k] == region:
            coef += float(self.nu_bar[k])
        return coef


def build_workspace(config: StarConfig, system: SystemModel,
                    method: str = "eig") -> GradientWorkspace:
    """Assemble all shared intermediates for one configuration.

    ``method='dense'`` recomputes the nu scalars from explicit matrix
    products instead of eigenvalue sums; results agree to roundoff and the
    dense route exists only to validate the fast algebra.
    """
    if method not in ("eig", "dense"):
        raise ValueError(f"unknown method {method!r}")
    dims = system.dims
    sigma = system.corr.bs_eigvals                      # (M,)
    eps = system.epsilon
    noise_lift = dims.k * system.sigma2 / system.rho    # added to R_k inside R_bar

    a_t = pbm_quadratic_diag(system.corr.r_ris, config.phi("t"))
    a_r = pbm_quadratic_diag(system.corr.r_ris, config.phi("r"))
    alphas = covariance_scalars(system, config)

    scaled = alphas[:, None] * sigma[None, :]           # (K, M) alpha_k s_m
    denom = scaled + eps
    psi = scaled**2 / denom
    qr_gain = scaled / denom

    s = psi.sum(axis=1) ** 2
    psi_bar = psi.sum(axis=0)
    i_tilde = (
        alphas * np.sum(sigma * psi_bar)
        - np.sum(psi**2, axis=1)
        + noise_lift * psi_bar.sum()
    )
    gamma = np.where(i_tilde > 0, s / np.maximum(i_tilde, 1e-300), 0.0)

    beta_hat = system.gains.beta_hat
    if method == "eig":
        nu, nu_bar, nu_tilde = _nu_scalars_eig(
            sigma, alphas, psi, qr_gain, beta_hat, noise_lift
        )
    else:
        nu, nu_bar, nu_tilde = _nu_scalars_dense(system, alphas, eps, noise_lift)

    return GradientWorkspace(
        config=config, system=system, a_t=a_t, a_r=a_r, alphas=alphas,
        psi=psi, qr_gain=qr_gain, s=s, i_tilde=i_tilde, gamma=gamma,
        nu=nu, nu_bar=nu_bar, nu_tilde=nu_tilde,
    )


def _nu_scalars_eig(sigma, alphas, psi, qr_gain, beta_hat, noise_lift):
    """All trace scalars as O(M) eigenvalue sums."""
    # nu_k = 2 bhat_k tr(Psi_k) tr((QR + RQ - Q R^2 Q) R_BS)
    t_lin = np.sum(qr_gain * sigma, axis=1)             # tr(Q_k R_k R_BS)
    t_quad = np.sum(qr_gain**2 * sigma, axis=1)         # tr(Q_k R_k^2 Q_k R_BS)
    nu = 2.0 * beta_hat * psi.sum(axis=1) * (2.0 * t_lin - t_quad)

    # nu_bar_k = bhat_k tr(Psi_check_k R_BS) with
    # Psi_check = sum_i Psi_i - 2 (QR Psi + Psi RQ - QR Psi RQ)
    trace_psi_rbs = np.sum(sigma * psi.sum(axis=0))
    correction = np.sum(sigma * psi * (2.0 * qr_gain - qr_gain**2), axis=1)
    nu_bar = beta_hat * (trace_psi_rbs - 2.0 * correction)

    # nu_tilde[k, i] = bhat_i tr(R_tilde_ki R_BS); R_bar_k = R_k + noise_lift I
    r_bar = alphas[:, None] * sigma[None, :] + noise_lift       # (K, M)
    mix = (2.0 * qr_gain - qr_gain**2) * sigma                  # (K=i, M)
    nu_tilde = beta_hat[None, :] * (r_bar @ mix.T)              # (k, i)
    return nu, nu_bar, nu_tilde


def _nu_scalars_dense(system, alphas, eps, noise_lift):
    """Verification route: the same scalars from materialized matrices."""
    m = system.dims.m
    k_users = system.dims.k
    r_bs = system.corr.r_bs
    eye = np.eye(m)
    beta_hat = system.gains.beta_hat

    r_mats, q_mats, psi_mats = [], [], []
    for alpha in alphas:
        r_k = alpha * r_bs
        q_k = np.linalg.inv(r_k + eps * eye)
        r_mats.append(r_k)
        q_mats.append(q_k)
        psi_mats.append(r_k @ q_k @ r_k)
    psi_total = np.sum(psi_mats, axis=0)

    nu = np.empty(k_users)
    nu_bar = np.empty(k_users)
    nu_tilde = np.empty((k_users, k_users))
    for k in range(k_users):
        r_k, q_k, psi_k = r_mats[k], q_mats[k], psi_mats[k]
        qr = q_k @ r_k
        inner = qr + r_k @ q_k - q_k @ r_k @ r_k @ q_k
        nu[k] = 2.0 * beta_hat[k] * np.trace(psi_k).real * np.trace(inner @ r_bs).real

        psi_check = psi_total - 2.0 * (qr @ psi_k + psi_k @ r_k @ q_k
                                       - qr @ psi_k @ r_k @ q_k)
        nu_bar[k] = beta_hat[k] * np.trace(psi_check @ r_bs).real

        r_bar = r_k + noise_lift * eye
        for i in range(k_users):
            qr_i = q_mats[i] @ r_mats[i]
            r_tilde = qr_i @ r_bar - qr_i @ r_bar @ r_mats[i] @ q_mats[i] \
                + r_bar @ r_mats[i] @ q_mats[i]
            nu_tilde[k, i] = beta_hat[i] * np.trace(r_tilde @ r_bs).real
    return nu, nu_bar, nu_tilde


def grad_signal_theta(k: int, workspace: GradientWorkspace, region: str) -> np.ndarray:
    """Phase gradient of the signal term: nonzero only in the user's region."""
    if workspace.system.modes[k] != region:
        return np.zeros(workspace.config.n, dtype=complex)
    a_diag = workspace.a_t if region == "t" else workspace.a_r
    beta = workspace.config.amplitudes(region)
    return workspace.nu[k] * a_diag * beta


def grad_interference_theta(k: int, workspace: GradientWorkspace, region: str) -> np.ndarray:
    """Phase gradient of the interference term, via the region coefficient."""
    a_diag = workspace.a_t if region == "t" else workspace.a_r
    beta = workspace.config.amplitudes(region)
    return workspace.interference_coefficient(k, region) * a_diag * beta


def grad_signal_beta(k: int, workspace: GradientWorkspace, region: str) -> np.ndarray:
    if workspace.system.modes[k] != region:
        return np.zeros(workspace.config.n)
    a_diag = workspace.a_t if region == "t" else workspace.a_r
    theta = workspace.config.phases(region)
    return 2.0 * workspace.nu[k] * np.real(np.conj(a_diag) * theta)


def grad_interference_beta(k: int, workspace: GradientWorkspace, region: str) -> np.ndarray:
    a_diag = workspace.a_t if region == "t" else workspace.a_r
    theta = workspace.config.phases(region)
    coef = workspace.interference_coefficient(k, region)
    return 2.0 * coef * np.real(np.conj(a_diag) * theta)


def grad_beta(k: int, workspace: GradientWorkspace) -> tuple[np.ndarray, np.ndarray]:
    """Amplitude gradients (t-region, r-region) of user k's SINR pair,
    assembled by the same quotient rule as the objective."""
    out = []
    for region in ("t", "r"):
        ds = grad_signal_beta(k, workspace, region)
        di = grad_interference_beta(k, workspace, region)
        out.append(_quotient_weight(workspace, k, ds, di))
    return out[0], out[1]


def _quotient_weight(workspace: GradientWorkspace, k: int,
                     d_s: np.ndarray, d_i: np.ndarray) -> np.ndarray:
    i_k = workspace.i_tilde[k]
    return (i_k * d_s - workspace.s[k] * d_i) / ((1.0 + workspace.gamma[k]) * i_k**2)


def grad_objective(config: StarConfig, system: SystemModel,
                   method: str = "eig") -> GradientPair:
    """Full stacked gradient of the sum-SE objective.

    Raises :class:`DegenerateInterferenceError` if any user has a zero
    interference term (the quotient rule is undefined there).
    """
    ws = build_workspace(config, system, method=method)
    return grad_objective_from_workspace(ws)


def grad_objective_from_workspace(ws: GradientWorkspace) -> GradientPair:
    if np.any(ws.i_tilde <= 0):
        bad = int(np.argmin(ws.i_tilde))
        raise DegenerateInterferenceError(
            f"user {bad} has non-positive interference term {ws.i_tilde[bad]:.3e}"
        )
    dims = ws.system.dims
    prefactor = dims.prelog / LN2
    n = ws.config.n

    d_theta = np.zeros(2 * n, dtype=complex)
    d_beta = np.zeros(2 * n)
    for offset, region in ((0, "t"), (n, "r")):
        a_diag = ws.a_t if region == "t" else ws.a_r
        beta = ws.config.amplitudes(region)
        theta = ws.config.phases(region)
        theta_dir = a_diag * beta
        beta_dir = 2.0 * np.real(np.conj(a_diag) * theta)
        # Every per-user term is a scalar multiple of the same direction, so
        # the user sum collapses to one weight per block.
        weight = 0.0
        for k in range(dims.k):
            nu_s = ws.nu[k] if ws.system.modes[k] == region else 0.0
            coef_i = ws.interference_coefficient(k, region)
            weight += (ws.i_tilde[k] * nu_s - ws.s[k] * coef_i) / (
                (1.0 + ws.gamma[k]) * ws.i_tilde[k] ** 2
            )
        d_theta[offset:offset + n] = prefactor * weight * theta_dir
        d_beta[offset:offset + n] = prefactor * weight * beta_dir
    return GradientPair(d_theta=d_theta, d_beta=d_beta)


def finite_difference_gradient(config: StarConfig, system: SystemModel,
                               step: float = 1e-6) -> GradientPair:
    """Central-difference oracle for the full gradient.

    Real and imaginary parts of every phase entry are perturbed as free real
    coordinates; the complex gradient is (df/dx + i df/dy) / 2, matching the
    conjugate-derivative convention of the closed form.  Stays independent of
    the analytic gradient path: only the objective is evaluated.
    """
    from .rate import sum_se  # local import keeps module load order flat

    n = config.n

    def objective(theta: np.ndarray, beta: np.ndarray) -> float:
        trial = StarConfig(
            theta_t=theta[:n], theta_r=theta[n:],
            beta_t=beta[:n], beta_r=beta[n:],
        )
        return sum_se(trial, system).sum_se

    theta0 = np.concatenate([config.theta_t, config.theta_r])
    beta0 = np.concatenate([config.beta_t, config.beta_r])

    d_theta = np.zeros(2 * n, dtype=complex)
    for j in range(2 * n):
        for unit in (1.0, 1.0j):
            plus = theta0.copy()
            minus = theta0.copy()
            plus[j] += step * unit
            minus[j] -= step * unit
            deriv = (objective(plus, beta0) - objective(minus, beta0)) / (2.0 * step)
            d_theta[j] += 0.5 * deriv * unit

    d_beta = np.zeros(2 * n)
    for j in range(2 * n):
        plus = beta0.copy()
        minus = beta0.copy()
        plus[j] += step
        minus[j] -= step
        d_beta[j] = (objective(theta0, plus) - objective(theta0, minus)) / (2.0 * step)
    return GradientPair(d_theta=d_theta, d_beta=d_beta)
