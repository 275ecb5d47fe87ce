"""Config-driven experiment runner.

Each scenario lives in one JSON file: dimensions, deployment geometry,
powers, correlation knobs, the protocols to compare, optimizer/Monte Carlo
options, and an optional sweep.  Output is a CSV with one row per sweep
point per protocol, written in sweep order and flushed incrementally so a
failing sweep keeps its completed rows.  Same config + same seed gives a
byte-identical file (wall-clock timings are off unless requested, since they
are the one non-deterministic column).

Flags: ``--config <path> [--seed <u64>] [--out <path>] [--mc-trials <n>]
[--no-mc] [--timings]``; flags override the config file.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .channel import StarConfig, SystemDims, SystemModel
from .correlation import (
    ArrayGeometry,
    CorrelationPair,
    LinkGains,
    build_bs_correlation,
    build_ris_correlation,
    path_gain,
)
from .montecarlo import mc_sinr
from .optimizer import PgamOptions, canonicalize_signs, multi_start, pgam, round_to_ms
from .rate import sum_se

CSV_SCHEMA = 1
CSV_COLUMNS = (
    "sweep_parameter", "sweep_value", "scenario", "sum_se",
    "mc_sum_se", "mc_stderr", "iterations", "elapsed_s", "seed",
)
PROTOCOLS = ("es", "ms", "conventional", "random-phase", "es-no-direct")
SWEEP_PARAMETERS = ("n", "m", "snr_db", "rho_dbm", "ris_spacing")
LN2 = math.log(2.0)


class ConfigError(ValueError):
    """Invalid scenario configuration; the message names the offending field."""

    def __init__(self, fld: str, message: str):
        super().__init__(f"{fld}: {message}")
        self.field = fld


def noise_power(bandwidth_hz: float) -> float:
    """Thermal noise power in watts: -174 dBm/Hz plus 10 log10(bandwidth)."""
    if bandwidth_hz <= 0:
        raise ConfigError("powers.bandwidth_hz", "bandwidth must be positive")
    dbm = -174.0 + 10.0 * math.log10(bandwidth_hz)
    return 10.0 ** ((dbm - 30.0) / 10.0)


@dataclass
class ScenarioConfig:
    """Parsed, validated scenario description."""

    name: str
    kind: str                    # "sweep" or "convergence"
    m: int
    n: int
    k_t: int
    k_r: int
    tau_c: int
    tau: int
    bs_xy: tuple
    ris_xy: tuple
    d0: float
    rho_dbm: float | None
    snr_db: float | None
    pilot_power_dbm: float | None
    bandwidth_hz: float
    ris_exponent: float
    direct_exponent: float
    penetration_db: float
    wavelength_m: float
    element_area: float | None
    bs_model: str
    bs_param: float
    ris_spacing: float
    protocols: tuple
    conventional_t_fraction: float
    optimizer: PgamOptions
    mc_enabled: bool
    mc_trials: int
    sweep_parameter: str | None
    sweep_values: tuple
    seed: int
    out: str
    timings: bool = False

    @classmethod
    def from_file(cls, path: str | Path) -> "ScenarioConfig":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    @classmethod
    def from_dict(cls, raw: dict) -> "ScenarioConfig":
        def section(key, default=None):
            value = raw.get(key, {} if default is None else default)
            if not isinstance(value, dict):
                raise ConfigError(key, "must be a mapping")
            return value

        dims = section("dims")
        geometry = section("geometry")
        powers = section("powers")
        pathloss = section("pathloss")
        correlation = section("correlation")
        opt = section("optimizer")
        mc = section("mc")
        sweep = section("sweep")

        def require(sec, sec_name, key, kind):
            if key not in sec:
                raise ConfigError(f"{sec_name}.{key}", "missing required field")
            try:
                return kind(sec[key])
            except (TypeError, ValueError):
                raise ConfigError(f"{sec_name}.{key}",
                                  f"expected {kind.__name__}, got {sec[key]!r}") from None

        kind = raw.get("kind", "sweep")
        if kind not in ("sweep", "convergence"):
            raise ConfigError("kind", f"must be 'sweep' or 'convergence', got {kind!r}")

        protocols = tuple(raw.get("protocols", ["es"]))
        for proto in protocols:
            if proto not in PROTOCOLS:
                raise ConfigError("protocols", f"unknown protocol {proto!r}; "
                                  f"choose from {PROTOCOLS}")
        if len(protocols) != len(set(protocols)):
            raise ConfigError("protocols", "duplicate entries")

        sweep_parameter = sweep.get("parameter")
        in_vals = ()
        if kind == "sweep":
            if sweep_parameter is not None:
                if sweep_parameter not in SWEEP_PARAMETERS:
                    raise ConfigError("sweep.parameter",
                                      f"must be one of {SWEEP_PARAMETERS}")
                values = sweep.get("values")
                if not values:
                    raise ConfigError("sweep.values", "missing or empty")
                in_vals = tuple(values)
        cfg = cls(
            name=str(raw.get("name", "scenario")),
            kind=kind,
            m=require(dims, "dims", "m", int),
            n=require(dims, "dims", "n", int),
            k_t=require(dims, "dims", "k_t", int),
            k_r=require(dims, "dims", "k_r", int),
            tau_c=int(dims.get("tau_c", 200)),
            tau=int(dims.get("tau", dims.get("k_t", 0) + dims.get("k_r", 0))),
            bs_xy=tuple(geometry.get("bs_xy", (0.0, 0.0))),
            ris_xy=tuple(geometry.get("ris_xy", (50.0, 10.0))),
            d0=float(geometry.get("d0", 20.0)),
            rho_dbm=_optional_float(powers, "powers", "rho_dbm"),
            snr_db=(100.0 if "rho_dbm" not in powers and "snr_db" not in powers
                    else _optional_float(powers, "powers", "snr_db")),
            pilot_power_dbm=_optional_float(powers, "powers", "pilot_power_dbm"),
            bandwidth_hz=float(powers.get("bandwidth_hz", 200e3)),
            ris_exponent=float(pathloss.get("ris_exponent", 2.2)),
            direct_exponent=float(pathloss.get("direct_exponent", 3.5)),
            penetration_db=float(pathloss.get("penetration_db", 15.0)),
            wavelength_m=float(pathloss.get("wavelength_m", 0.1)),
            element_area=_optional_float(pathloss, "pathloss", "element_area"),
            bs_model=str(correlation.get("bs_model", "exponential")),
            bs_param=float(correlation.get("bs_param", 0.5)),
            ris_spacing=float(correlation.get("ris_spacing", 0.25)),
            protocols=protocols,
            conventional_t_fraction=float(
                section("conventional", {}).get("t_fraction", 0.5)),
            optimizer=PgamOptions(
                mu_init=float(opt.get("mu_init", 1.0)),
                kappa=float(opt.get("kappa", 0.5)),
                tol=float(opt.get("tol", 1e-5)),
                max_iters=int(opt.get("max_iters", 200)),
                max_backtracks=int(opt.get("max_backtracks", 60)),
                n_starts=int(opt.get("n_starts", 5)),
            ),
            mc_enabled=bool(mc.get("enabled", False)),
            mc_trials=int(mc.get("trials", 1000)),
            sweep_parameter=sweep_parameter,
            sweep_values=in_vals,
            seed=int(raw.get("seed", 0)),
            out=str(raw.get("out", "results.csv")),
            timings=bool(raw.get("timings", False)),
        )
        cfg.validate()
        return cfg

    def validate(self):
        if self.m < 1:
            raise ConfigError("dims.m", "must be >= 1")
        if self.k_t < 0 or self.k_r < 0 or self.k_t + self.k_r < 1:
            raise ConfigError("dims.k_t/k_r", "need at least one user")
        if self.tau < self.k_t + self.k_r:
            raise ConfigError("dims.tau", "orthogonal pilots need tau >= K")
        if self.tau_c < self.tau:
            raise ConfigError("dims.tau_c", "coherence block shorter than pilots")
        _square_side(self.n, "dims.n")
        if (self.rho_dbm is None) == (self.snr_db is None):
            raise ConfigError("powers", "set exactly one of rho_dbm or snr_db")
        if self.kind == "sweep" and self.sweep_parameter == "n":
            for value in self.sweep_values:
                _square_side(int(value), "sweep.values")
        if not 0.0 <= self.conventional_t_fraction <= 1.0:
            raise ConfigError("conventional.t_fraction", "must lie in [0, 1]")
        if self.mc_trials < 2:
            raise ConfigError("mc.trials", "needs at least 2 trials")
        return self


def _optional_float(sec: dict, sec_name: str, key: str) -> float | None:
    value = sec.get(key)
    if value is None:
        return None
    try:
        return float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{sec_name}.{key}", f"expected number, got {value!r}") from None


def _square_side(n: int, fld: str) -> int:
    side = math.isqrt(int(n))
    if side * side != n:
        raise ConfigError(fld, f"surface is a square array; {n} is not a perfect square")
    return side


def user_positions(cfg: ScenarioConfig) -> np.ndarray:
    """(K, 2) user coordinates: t-region users first, then r-region.

    Each region's users sit on a horizontal segment of length d0 centered on
    the surface's x-coordinate, offset +-d0/2 vertically (t above, r below),
    equally spaced with endpoints included; a lone user sits at the midpoint.
    """
    x_r, y_r = cfg.ris_xy

    def segment(count: int, y: float) -> np.ndarray:
        if count == 0:
            return np.empty((0, 2))
        if count == 1:
            return np.array([[x_r, y]])
        x = np.linspace(x_r - cfg.d0 / 2.0, x_r + cfg.d0 / 2.0, count)
        return np.column_stack([x, np.full(count, y)])

    top = segment(cfg.k_t, y_r + cfg.d0 / 2.0)
    bottom = segment(cfg.k_r, y_r - cfg.d0 / 2.0)
    return np.vstack([top, bottom])


def build_system(cfg: ScenarioConfig, *, n: int | None = None, m: int | None = None,
                 snr_db: float | None = None, rho_dbm: float | None = None,
                 ris_spacing: float | None = None,
                 no_direct: bool = False) -> SystemModel:
    """Assemble the immutable system model for one sweep point."""
    n = cfg.n if n is None else int(n)
    m = cfg.m if m is None else int(m)
    spacing = cfg.ris_spacing if ris_spacing is None else float(ris_spacing)
    side = _square_side(n, "dims.n")
    # element size equals spacing (gapless surface), so the per-element
    # aperture shrinks quadratically with denser packing
    area = cfg.element_area
    if area is None:
        area = (spacing * cfg.wavelength_m) ** 2

    sigma2 = noise_power(cfg.bandwidth_hz)
    if rho_dbm is not None:
        rho = 10.0 ** ((rho_dbm - 30.0) / 10.0)
    elif snr_db is not None:
        rho = 10.0 ** (snr_db / 10.0) * sigma2
    elif cfg.rho_dbm is not None:
        rho = 10.0 ** ((cfg.rho_dbm - 30.0) / 10.0)
    else:
        rho = 10.0 ** (cfg.snr_db / 10.0) * sigma2

    k = cfg.k_t + cfg.k_r
    pilot_power = rho / k if cfg.pilot_power_dbm is None \
        else 10.0 ** ((cfg.pilot_power_dbm - 30.0) / 10.0)

    geom = ArrayGeometry(n_h=side, n_v=side, spacing_h=spacing, spacing_v=spacing)
    corr = CorrelationPair.from_matrices(
        build_bs_correlation(m, cfg.bs_model, cfg.bs_param),
        build_ris_correlation(geom),
    )

    bs = np.asarray(cfg.bs_xy, dtype=float)
    ris = np.asarray(cfg.ris_xy, dtype=float)
    users = user_positions(cfg)
    d_br = float(np.linalg.norm(ris - bs))
    beta_g = path_gain(d_br, cfg.ris_exponent, area)
    beta_tilde = np.array([
        path_gain(float(np.linalg.norm(u - ris)), cfg.ris_exponent, area)
        for u in users
    ])
    if no_direct:
        beta_bar = np.zeros(k)
    else:
        beta_bar = np.array([
            path_gain(float(np.linalg.norm(u - bs)), cfg.direct_exponent,
                      area, cfg.penetration_db)
            for u in users
        ])

    dims = SystemDims(m=m, n=n, k_t=cfg.k_t, k_r=cfg.k_r, tau_c=cfg.tau_c, tau=cfg.tau)
    modes = tuple(["t"] * cfg.k_t + ["r"] * cfg.k_r)
    return SystemModel(
        dims=dims,
        corr=corr,
        gains=LinkGains(beta_g=beta_g, beta_bar=beta_bar, beta_tilde=beta_tilde),
        modes=modes,
        rho=rho,
        pilot_power=pilot_power,
        sigma2=sigma2,
    )


@dataclass
class ProtocolResult:
    config: StarConfig
    sum_se: float
    iterations: int


def derive_seed(*entropy) -> int:
    return int(np.random.SeedSequence(list(entropy)).generate_state(1)[0])


def run_protocol(protocol: str, cfg: ScenarioConfig, system: SystemModel,
                 opt_seed: int) -> ProtocolResult:
    """One scenario label at one sweep point; the seed is shared across
    protocols so cross-label comparisons see identical starting points."""
    options = PgamOptions(
        mu_init=cfg.optimizer.mu_init, kappa=cfg.optimizer.kappa,
        tol=cfg.optimizer.tol, max_iters=cfg.optimizer.max_iters,
        max_backtracks=cfg.optimizer.max_backtracks,
        n_starts=cfg.optimizer.n_starts, seed=opt_seed,
    )
    n = system.dims.n

    if protocol in ("es", "es-no-direct"):
        trace = multi_start(system, options)
        best = canonicalize_signs(trace.final_config)
        return ProtocolResult(best, sum_se(best, system).sum_se, trace.iterations)

    if protocol == "ms":
        trace = multi_start(system, options)
        rounded = round_to_ms(trace.final_config)
        return ProtocolResult(rounded, sum_se(rounded, system).sum_se, trace.iterations)

    if protocol == "conventional":
        n_t = int(round(cfg.conventional_t_fraction * n))
        beta_t = np.zeros(n)
        beta_t[:n_t] = 1.0
        beta_r = 1.0 - beta_t
        frozen = PgamOptions(
            mu_init=options.mu_init, kappa=options.kappa, tol=options.tol,
            max_iters=options.max_iters, max_backtracks=options.max_backtracks,
            n_starts=options.n_starts, seed=options.seed, freeze_amplitudes=True,
        )
        best = None
        for stream in np.random.SeedSequence(opt_seed).spawn(options.n_starts):
            rng = np.random.default_rng(stream)
            init = StarConfig(
                theta_t=np.exp(1j * rng.uniform(0.0, 2.0 * np.pi, n)),
                theta_r=np.exp(1j * rng.uniform(0.0, 2.0 * np.pi, n)),
                beta_t=beta_t.copy(), beta_r=beta_r.copy(),
            )
            trace = pgam(system, frozen, init)
            if best is None or trace.final_objective > best.final_objective:
                best = trace
        final = best.final_config
        return ProtocolResult(final, sum_se(final, system).sum_se, best.iterations)

    if protocol == "random-phase":
        # median of n_starts unoptimized draws: a typical configuration, and
        # the one the Monte Carlo column validates
        draws = []
        for stream in np.random.SeedSequence(opt_seed).spawn(options.n_starts):
            rng = np.random.default_rng(stream)
            draw = StarConfig.equal_split(n, rng)
            draws.append((sum_se(draw, system).sum_se, draw))
        draws.sort(key=lambda pair: pair[0])
        value, config = draws[(len(draws) - 1) // 2]
        return ProtocolResult(config, value, 0)

    raise ConfigError("protocols", f"unknown protocol {protocol!r}")


def _mc_columns(cfg: ScenarioConfig, system: SystemModel, result: ProtocolResult,
                mc_seed: int, trials: int):
    estimate = mc_sinr(system, result.config, trials, mc_seed)
    dse = system.dims.prelog / ((1.0 + estimate.gamma_hat) * LN2)
    stderr = float(np.sqrt(np.sum((dse * estimate.std_err) ** 2)))
    return estimate.sum_se_hat, stderr


def run_experiment(cfg: ScenarioConfig, writer=None) -> list[dict]:
    """Execute the scenario and return (and optionally stream) the CSV rows.

    ``writer`` is called with each row dict as soon as it is complete, which
    is how partial sweeps survive a failure mid-run.
    """
    rows = []

    def emit(row: dict):
        rows.append(row)
        if writer is not None:
            writer(row)

    if cfg.kind == "convergence":
        _run_convergence(cfg, emit)
        return rows

    sweep_values = cfg.sweep_values if cfg.sweep_parameter else (None,)
    for sweep_idx, value in enumerate(sweep_values):
        overrides = {}
        if cfg.sweep_parameter is not None:
            overrides[cfg.sweep_parameter] = value
        # one optimizer seed per sweep point, shared across protocols so
        # comparisons between scenario labels see identical starting points
        opt_seed = derive_seed(cfg.seed, sweep_idx)
        for proto_idx, protocol in enumerate(cfg.protocols):
            system = build_system(cfg, no_direct=(protocol == "es-no-direct"),
                                  **overrides)
            start = time.perf_counter()
            result = run_protocol(protocol, cfg, system, opt_seed)
            mc_se, mc_err = ("", "")
            if cfg.mc_enabled:
                mc_seed = derive_seed(cfg.seed, sweep_idx, proto_idx, 1)
                mc_se, mc_err = _mc_columns(cfg, system, result, mc_seed,
                                            cfg.mc_trials)
                mc_se = f"{mc_se:.10g}"
                mc_err = f"{mc_err:.4g}"
            elapsed = f"{time.perf_counter() - start:.3f}" if cfg.timings else ""
            emit({
                "sweep_parameter": cfg.sweep_parameter or "",
                "sweep_value": "" if value is None else value,
                "scenario": protocol,
                "sum_se": f"{result.sum_se:.10g}",
                "mc_sum_se": mc_se,
                "mc_stderr": mc_err,
                "iterations": result.iterations,
                "elapsed_s": elapsed,
                "seed": cfg.seed,
            })
    return rows


def _run_convergence(cfg: ScenarioConfig, emit):
    """Objective-versus-iteration rows, one scenario label per start."""
    system = build_system(cfg)
    options = cfg.optimizer
    for start_idx, stream in enumerate(
            np.random.SeedSequence(derive_seed(cfg.seed, 0)).spawn(options.n_starts)):
        rng = np.random.default_rng(stream)
        init = StarConfig.equal_split(system.dims.n, rng) if start_idx == 0 \
            else StarConfig.random(system.dims.n, rng)
        trace = pgam(system, options, init)
        for iteration, objective in enumerate(trace.objectives):
            emit({
                "sweep_parameter": "iteration",
                "sweep_value": iteration,
                "scenario": f"start{start_idx}",
                "sum_se": f"{objective:.10g}",
                "mc_sum_se": "",
                "mc_stderr": "",
                "iterations": trace.iterations,
                "elapsed_s": "",
                "seed": cfg.seed,
            })


def write_csv(cfg: ScenarioConfig, path: str | Path) -> list[dict]:
    """Run the scenario, streaming rows to ``path`` with the versioned header."""
    path = Path(path)
    if path.parent != Path(""):
        path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(f"# starmimo csv schema {CSV_SCHEMA}\n")
        out = csv.DictWriter(fh, fieldnames=CSV_COLUMNS)
        out.writeheader()

        def writer(row):
            out.writerow(row)
            fh.flush()

        return run_experiment(cfg, writer=writer)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="starmimo-run",
        description="Run one scenario config and write the sweep CSV.",
    )
    parser.add_argument("--config", required=True, help="scenario JSON file")
    parser.add_argument("--seed", type=int, default=None, help="override the config seed")
    parser.add_argument("--out", default=None, help="override the output CSV path")
    parser.add_argument("--mc-trials", type=int, default=None,
                        help="override the Monte Carlo trial count")
    parser.add_argument("--no-mc", action="store_true",
                        help="skip the Monte Carlo columns")
    parser.add_argument("--timings", action="store_true",
                        help="record wall-clock time per row (breaks byte-identity)")
    args = parser.parse_args(argv)

    try:
        cfg = ScenarioConfig.from_file(args.config)
    except (OSError, json.JSONDecodeError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    if args.seed is not None:
        cfg.seed = args.seed
    if args.out is not None:
        cfg.out = args.out
    if args.mc_trials is not None:
        cfg.mc_trials = args.mc_trials
    if args.no_mc:
        cfg.mc_enabled = False
    if args.timings:
        cfg.timings = True

    try:
        rows = write_csv(cfg, cfg.out)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"{cfg.name}: wrote {len(rows)} rows to {cfg.out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
