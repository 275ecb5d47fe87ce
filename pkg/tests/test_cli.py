import json

import numpy as np
import pytest

from starmimo.cli import (
    ConfigError,
    ScenarioConfig,
    build_system,
    main,
    noise_power,
    run_experiment,
    user_positions,
    write_csv,
)

DESK = {
    "name": "desk",
    "dims": {"m": 8, "n": 9, "k_t": 1, "k_r": 1, "tau_c": 200, "tau": 4},
    "powers": {"snr_db": 110.0},
    "protocols": ["es"],
    "optimizer": {"n_starts": 2, "max_iters": 15},
    "seed": 5,
}


class TestNoisePower:
    def test_reference_bandwidth(self):
        # -174 dBm/Hz over 200 kHz is -120.99 dBm
        assert noise_power(200e3) == pytest.approx(7.962e-16, rel=1e-3)

    def test_one_hertz(self):
        assert noise_power(1.0) == pytest.approx(10 ** ((-174.0 - 30.0) / 10.0))

    def test_ten_hertz_adds_ten_db(self):
        assert noise_power(10.0) / noise_power(1.0) == pytest.approx(10.0)

    def test_rejects_non_positive(self):
        with pytest.raises(ConfigError, match="bandwidth"):
            noise_power(0.0)


class TestScenarioConfig:
    def test_minimal_config_parses(self):
        cfg = ScenarioConfig.from_dict(DESK)
        assert cfg.m == 8 and cfg.n == 9
        assert cfg.snr_db == 110.0

    def test_pilot_length_defaults_to_user_count(self):
        raw = json.loads(json.dumps(DESK))
        raw["dims"] = {"m": 8, "n": 9, "k_t": 2, "k_r": 1, "tau_c": 200}
        cfg = ScenarioConfig.from_dict(raw)
        assert cfg.tau == 3

    def test_missing_dimension_names_field(self):
        raw = {k: v for k, v in DESK.items()}
        raw["dims"] = {"n": 9, "k_t": 1, "k_r": 1}
        with pytest.raises(ConfigError, match="dims.m"):
            ScenarioConfig.from_dict(raw)

    def test_non_square_surface_rejected(self):
        raw = json.loads(json.dumps(DESK))
        raw["dims"]["n"] = 7
        with pytest.raises(ConfigError, match="dims.n"):
            ScenarioConfig.from_dict(raw)

    def test_both_powers_rejected(self):
        raw = json.loads(json.dumps(DESK))
        raw["powers"] = {"snr_db": 100.0, "rho_dbm": 30.0}
        with pytest.raises(ConfigError, match="powers"):
            ScenarioConfig.from_dict(raw)

    def test_unknown_protocol_rejected(self):
        raw = json.loads(json.dumps(DESK))
        raw["protocols"] = ["es", "zf"]
        with pytest.raises(ConfigError, match="protocols"):
            ScenarioConfig.from_dict(raw)

    def test_sweep_values_validated(self):
        raw = json.loads(json.dumps(DESK))
        raw["sweep"] = {"parameter": "n", "values": [9, 12]}
        with pytest.raises(ConfigError, match="sweep.values"):
            ScenarioConfig.from_dict(raw)

    def test_unknown_sweep_parameter(self):
        raw = json.loads(json.dumps(DESK))
        raw["sweep"] = {"parameter": "k", "values": [1, 2]}
        with pytest.raises(ConfigError, match="sweep.parameter"):
            ScenarioConfig.from_dict(raw)


class TestGeometry:
    def test_single_user_at_midpoint(self):
        raw = json.loads(json.dumps(DESK))
        cfg = ScenarioConfig.from_dict(raw)
        pos = user_positions(cfg)
        # one t user above the surface, one r user below
        np.testing.assert_allclose(pos[0], [50.0, 20.0])
        np.testing.assert_allclose(pos[1], [50.0, 0.0])

    def test_equal_spacing_with_endpoints(self):
        raw = json.loads(json.dumps(DESK))
        raw["dims"] = {"m": 8, "n": 9, "k_t": 3, "k_r": 0, "tau_c": 200, "tau": 4}
        cfg = ScenarioConfig.from_dict(raw)
        pos = user_positions(cfg)
        np.testing.assert_allclose(pos[:, 0], [40.0, 50.0, 60.0])
        np.testing.assert_allclose(pos[:, 1], [20.0, 20.0, 20.0])

    def test_build_system_shapes(self):
        cfg = ScenarioConfig.from_dict(DESK)
        system = build_system(cfg)
        assert system.dims.m == 8
        assert system.corr.r_ris.shape == (9, 9)
        assert system.gains.k == 2
        # direct links carry the penetration loss, so they are weaker than
        # the same-distance unpenalized gain
        assert np.all(system.gains.beta_bar > 0)

    def test_no_direct_variant(self):
        cfg = ScenarioConfig.from_dict(DESK)
        system = build_system(cfg, no_direct=True)
        np.testing.assert_array_equal(system.gains.beta_bar, np.zeros(2))

    def test_element_area_follows_spacing(self):
        cfg = ScenarioConfig.from_dict(DESK)
        half = build_system(cfg, ris_spacing=0.5)
        quarter = build_system(cfg, ris_spacing=0.25)
        # aperture scales with the square of the element size
        assert half.gains.beta_g == pytest.approx(4.0 * quarter.gains.beta_g)


class TestRunExperiment:
    def test_rows_structure_and_determinism(self, tmp_path):
        raw = json.loads(json.dumps(DESK))
        raw["sweep"] = {"parameter": "m", "values": [4, 8]}
        raw["protocols"] = ["es", "random-phase"]
        cfg = ScenarioConfig.from_dict(raw)
        first = tmp_path / "a.csv"
        second = tmp_path / "b.csv"
        rows = write_csv(cfg, first)
        write_csv(cfg, second)
        assert first.read_bytes() == second.read_bytes()
        assert len(rows) == 4
        assert [r["scenario"] for r in rows] == ["es", "random-phase"] * 2
        assert rows[0]["sweep_value"] == 4
        header = first.read_text().splitlines()
        assert header[0].startswith("# starmimo csv schema")
        assert header[1].split(",")[0] == "sweep_parameter"

    def test_optimized_beats_random_phases(self):
        raw = json.loads(json.dumps(DESK))
        raw["dims"] = {"m": 8, "n": 16, "k_t": 1, "k_r": 1, "tau_c": 200, "tau": 4}
        raw["optimizer"] = {"n_starts": 3, "max_iters": 300}
        raw["protocols"] = ["es", "random-phase"]
        cfg = ScenarioConfig.from_dict(raw)
        rows = run_experiment(cfg)
        values = {r["scenario"]: float(r["sum_se"]) for r in rows}
        assert values["es"] >= values["random-phase"]

    def test_element_sweep_keeps_es_above_ms(self):
        # binary configurations are a subset of the energy-splitting set, so
        # a converged ES value sits above its rounding up to the stopping
        # tolerance (at low power the optimum is essentially binary and the
        # two coincide)
        raw = json.loads(json.dumps(DESK))
        raw["dims"] = {"m": 8, "n": 16, "k_t": 1, "k_r": 1, "tau_c": 200, "tau": 4}
        raw["powers"] = {"snr_db": 115.0}
        raw["optimizer"] = {"n_starts": 2, "max_iters": 20000, "tol": 1e-10}
        raw["protocols"] = ["es", "ms"]
        raw["sweep"] = {"parameter": "n", "values": [4, 9, 16]}
        cfg = ScenarioConfig.from_dict(raw)
        rows = run_experiment(cfg)
        for value in (4, 9, 16):
            pair = {r["scenario"]: float(r["sum_se"]) for r in rows
                    if r["sweep_value"] == value}
            assert pair["es"] >= pair["ms"] - 1e-7, f"N={value}: {pair}"

    def test_mc_columns_present_when_enabled(self):
        raw = json.loads(json.dumps(DESK))
        raw["dims"] = {"m": 4, "n": 4, "k_t": 1, "k_r": 1, "tau_c": 200, "tau": 4}
        raw["optimizer"] = {"n_starts": 1, "max_iters": 3}
        raw["mc"] = {"enabled": True, "trials": 50}
        cfg = ScenarioConfig.from_dict(raw)
        rows = run_experiment(cfg)
        assert rows[0]["mc_sum_se"] != ""
        assert float(rows[0]["mc_stderr"]) >= 0.0

    def test_partial_rows_flushed_on_failure(self, tmp_path, monkeypatch):
        import starmimo.cli as cli_module

        raw = json.loads(json.dumps(DESK))
        raw["sweep"] = {"parameter": "m", "values": [4, 8]}
        raw["optimizer"] = {"n_starts": 1, "max_iters": 2}
        cfg = ScenarioConfig.from_dict(raw)

        calls = {"count": 0}
        original = cli_module.run_protocol

        def explode_on_second(*args, **kwargs):
            calls["count"] += 1
            if calls["count"] == 2:
                raise RuntimeError("boom")
            return original(*args, **kwargs)

        monkeypatch.setattr(cli_module, "run_protocol", explode_on_second)
        out = tmp_path / "partial.csv"
        with pytest.raises(RuntimeError):
            write_csv(cfg, out)
        lines = out.read_text().splitlines()
        assert len(lines) == 3  # schema comment + header + first row

    def test_convergence_kind_rows(self):
        raw = json.loads(json.dumps(DESK))
        raw["kind"] = "convergence"
        raw["dims"] = {"m": 4, "n": 4, "k_t": 1, "k_r": 1, "tau_c": 200, "tau": 4}
        raw["optimizer"] = {"n_starts": 2, "max_iters": 5}
        cfg = ScenarioConfig.from_dict(raw)
        rows = run_experiment(cfg)
        starts = {r["scenario"] for r in rows}
        assert starts == {"start0", "start1"}
        first = [r for r in rows if r["scenario"] == "start0"]
        assert [r["sweep_value"] for r in first] == list(range(len(first)))
        values = [float(r["sum_se"]) for r in first]
        assert all(b >= a for a, b in zip(values, values[1:]))


class TestMain:
    def test_bad_config_returns_error(self, tmp_path, capsys):
        path = tmp_path / "bad.json"
        path.write_text("{\"dims\": {}}")
        assert main(["--config", str(path)]) == 2
        assert "dims.m" in capsys.readouterr().err

    def test_full_run_with_overrides(self, tmp_path, capsys):
        raw = json.loads(json.dumps(DESK))
        raw["dims"] = {"m": 4, "n": 4, "k_t": 1, "k_r": 1, "tau_c": 200, "tau": 4}
        raw["optimizer"] = {"n_starts": 1, "max_iters": 2}
        raw["mc"] = {"enabled": True, "trials": 500}
        config_path = tmp_path / "cfg.json"
        config_path.write_text(json.dumps(raw))
        out = tmp_path / "result.csv"
        code = main(["--config", str(config_path), "--out", str(out),
                     "--seed", "9", "--no-mc"])
        assert code == 0
        text = out.read_text()
        assert "es" in text
        rows = text.splitlines()
        assert rows[-1].split(",")[-1] == "9"  # overridden seed recorded

    def test_mc_trials_override(self, tmp_path):
        raw = json.loads(json.dumps(DESK))
        raw["dims"] = {"m": 4, "n": 4, "k_t": 1, "k_r": 1, "tau_c": 200, "tau": 4}
        raw["optimizer"] = {"n_starts": 1, "max_iters": 2}
        raw["mc"] = {"enabled": True, "trials": 1000}
        config_path = tmp_path / "cfg.json"
        config_path.write_text(json.dumps(raw))
        out = tmp_path / "result.csv"
        assert main(["--config", str(config_path), "--out", str(out),
                     "--mc-trials", "20"]) == 0
        assert out.exists()
