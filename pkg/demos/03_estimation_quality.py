"""Pilot-based estimation of the aggregated channel.

The estimator never materializes a matrix inverse: in the base-station
eigenbasis every estimate eigenvalue is (alpha s)^2 / (alpha s + eps) with
eps the effective pilot noise.  More pilot power means eigenvalues closer to
the channel covariance and a smaller residual error.
"""


from starmimo import PilotSpec, error_covariance_trace, lmmse_stats
from starmimo.correlation import build_bs_correlation, eigendecompose_bs

_, sigma = eigendecompose_bs(build_bs_correlation(8, "exponential", 0.7))
alpha = 1.0

print("pilot quality sweep (alpha = 1, exponential BS correlation 0.7, M = 8)")
print(f"{'eps':>8} {'tr(estimate cov)':>18} {'tr(error cov)':>15} {'capture':>9}")
for eps in (10.0, 1.0, 0.1, 0.01, 1e-4):
    stats = lmmse_stats(alpha, sigma, PilotSpec(tau=1, p=1.0 / eps, sigma2=1.0))
    err = error_covariance_trace(alpha, sigma, stats)
    total = alpha * sigma.sum()
    print(f"{eps:8.0e} {stats.trace_psi:18.4f} {err:15.4f} {stats.trace_psi / total:9.1%}")

print("\nthe two traces always add up to the channel power", alpha * sigma.sum())
print("and the estimate eigenvalues never exceed the channel eigenvalues:")
stats = lmmse_stats(alpha, sigma, PilotSpec(tau=1, p=10.0, sigma2=1.0))
for s, p in zip(sigma, stats.eigvals_psi):
    print(f"  channel {s:6.3f}  estimate {p:6.3f}")
