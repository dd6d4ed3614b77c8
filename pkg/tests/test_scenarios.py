import json
import math

import numpy as np
import pytest

from qpicsim.cli import main
from qpicsim.config import ScenarioConfig, load_config, scenario_defaults
from qpicsim.errors import ConfigError
from qpicsim.output import table_columns, write_csv
from qpicsim.scenarios import (
    convergence_check,
    mzi_gaussian_prediction,
    qpic_layer_pairs,
    run_mzi_free_space,
    run_mzi_integrated,
    run_mzi_lossy,
    run_mzi_theta_phi_map,
    run_qpic_kscan,
    run_qpic_phase_sweep,
    run_qpic_slowlight,
)

PI = math.pi


def small(scenario, **tweaks):
    cfg = scenario_defaults(scenario)
    for path, value in tweaks.items():
        section, key = path.split(".")
        setattr(getattr(cfg, section), key, value)
    return cfg


class TestConfig:
    def test_defaults_reproduce_reference_parameters(self):
        cfg = scenario_defaults("mzi_free_space")
        assert cfg.physics.u_dt == [0.001, 0.005, 0.06]
        assert cfg.physics.theta_in == pytest.approx(PI / 4)
        assert cfg.physics.theta_out == pytest.approx(0.2 * PI)
        assert cfg.sweep.points == 401 and cfg.sweep.stop == pytest.approx(2 * PI)
        cfg = scenario_defaults("qpic_kscan")
        assert cfg.physics.g_exc == [10.0, 50.0, 700.0]
        assert cfg.physics.phi_rel == pytest.approx(0.6 * PI)
        assert cfg.physics.dx_um == 200.0 and cfg.physics.num_layers == 5
        assert (cfg.sweep.start, cfg.sweep.stop, cfg.sweep.points) == (0.05, 0.35, 40)
        cfg = scenario_defaults("qpic_slowlight")
        assert cfg.physics.j_design == "fixed"
        assert cfg.loss.gamma == 0.02
        assert cfg.physics.phi_rel == pytest.approx(0.2 * PI)
        cfg = scenario_defaults("mzi_lossy")
        assert cfg.loss.db_total == [0.0, 0.97, 1.93, 2.90]
        assert cfg.physics.u_dt == [0.02]

    def test_unknown_key_rejected(self, tmp_path):
        p = tmp_path / "c.json"
        p.write_text(json.dumps({"scenario": "mzi_free_space", "engine": {"cutof": 8}}))
        with pytest.raises(ConfigError):
            load_config(p)

    def test_unknown_top_level_rejected(self, tmp_path):
        p = tmp_path / "c.json"
        p.write_text(json.dumps({"scenario": "mzi_free_space", "extra": 1}))
        with pytest.raises(ConfigError):
            load_config(p)

    def test_toml_round_trip(self, tmp_path):
        p = tmp_path / "c.toml"
        p.write_text(
            'scenario = "mzi_free_space"\n[engine]\ncutoff = 6\nseed = 7\n'
            "[sweep]\npoints = 11\n"
        )
        cfg = load_config(p)
        assert cfg.engine.cutoff == 6 and cfg.engine.seed == 7
        assert cfg.sweep.points == 11

    def test_scenario_mismatch_rejected(self, tmp_path):
        p = tmp_path / "c.json"
        p.write_text(json.dumps({"scenario": "mzi_lossy"}))
        with pytest.raises(ConfigError):
            load_config(p, "mzi_free_space")

    def test_bad_sweep_bounds(self):
        from qpicsim.config import SweepConfig

        with pytest.raises(ConfigError):
            SweepConfig("phi_lo", 3.0, 1.0, 11)

    def test_unknown_scenario(self):
        with pytest.raises(ConfigError):
            ScenarioConfig(scenario="nonesuch")


class TestMziScenarios:
    def test_zero_nonlinearity_stays_coherent(self):
        cfg = small(
            "mzi_free_space", **{"physics.u_dt": [0.0], "sweep.points": 21,
                                 "engine.cutoff": 12}
        )
        (table,) = run_mzi_free_space(cfg)
        for rep in table.reports:
            defined = ~np.isnan(rep.g2)
            assert np.all(np.abs(rep.g2[defined] - 1.0) < 1e-7)

    def test_lossless_db_matches_free_space(self):
        cfg_l = small(
            "mzi_lossy", **{"loss.db_total": [0.0], "sweep.points": 15,
                            "engine.cutoff": 8, "physics.u_dt": [0.02]}
        )
        cfg_f = small(
            "mzi_free_space", **{"physics.u_dt": [0.02], "sweep.points": 15,
                                 "engine.cutoff": 8}
        )
        (tl,) = run_mzi_lossy(cfg_l)
        (tf,) = run_mzi_free_space(cfg_f)
        for rl, rf in zip(tl.reports, tf.reports):
            np.testing.assert_allclose(rl.intensities, rf.intensities, atol=1e-10)
            both = ~np.isnan(rl.g2) & ~np.isnan(rf.g2)
            np.testing.assert_allclose(rl.g2[both], rf.g2[both], atol=1e-8)

    def test_map_theta_zero_column_is_pure_phase(self):
        cfg = small(
            "mzi_theta_phi_map",
            **{"sweep.points": 9, "sweep.points2": 3, "sweep.stop2": 0.4 * PI,
               "engine.cutoff": 8},
        )
        (table,) = run_mzi_theta_phi_map(cfg)
        for row, rep in zip(table.rows, table.reports):
            if row["theta_out"] == 0.0:
                # out-coupler reduces to a phase: arm intensities equal the 50:50 split
                np.testing.assert_allclose(rep.intensities, [0.5, 0.5], atol=1e-5)

    def test_map_slice_reproduces_free_space(self):
        cfg = small(
            "mzi_theta_phi_map",
            **{"sweep.points": 7, "sweep.points2": 2, "sweep.start2": 0.2 * PI,
               "sweep.stop2": 0.4 * PI, "engine.cutoff": 8},
        )
        (table,) = run_mzi_theta_phi_map(cfg)
        cfg_f = small(
            "mzi_free_space", **{"physics.u_dt": [0.02], "sweep.points": 7,
                                 "engine.cutoff": 8}
        )
        (tf,) = run_mzi_free_space(cfg_f)
        rows = [
            (row, rep) for row, rep in zip(table.rows, table.reports)
            if abs(row["theta_out"] - 0.2 * PI) < 1e-12
        ]
        for (row, rep), rf in zip(rows, tf.reports):
            np.testing.assert_allclose(rep.intensities, rf.intensities, atol=1e-12)

    def test_integrated_zero_nonlinearity(self):
        cfg = small(
            "mzi_integrated", **{"physics.u_dt": [0.0], "sweep.points": 17,
                                 "engine.cutoff": 12}
        )
        (table,) = run_mzi_integrated(cfg)
        for rep in table.reports:
            defined = ~np.isnan(rep.g2)
            assert np.all(np.abs(rep.g2[defined] - 1.0) < 1e-7)

    def test_integrated_symmetry_phase_reflection_and_swap(self):
        # phi_lo -> pi - phi_lo with mode swap reproduces the table
        cfg = small(
            "mzi_integrated", **{"physics.u_dt": [0.06], "sweep.points": 41,
                                 "engine.cutoff": 10}
        )
        (table,) = run_mzi_integrated(cfg)
        phis = [row["phi_lo"] for row in table.rows]
        for i, phi in enumerate(phis):
            target = (PI - phi) % (2 * PI)
            j = int(round(target / (2 * PI) * (len(phis) - 1)))
            if abs(phis[j] - target) > 1e-9:
                continue
            a, b = table.reports[i], table.reports[j]
            np.testing.assert_allclose(
                a.intensities, b.intensities[::-1], atol=1e-9
            )
            np.testing.assert_allclose(
                a.g2[0, 0], b.g2[1, 1], atol=1e-9
            )

    def test_integrated_strong_interaction_antibunches(self):
        # strong-interaction node: deep sub-Poissonian output near the
        # crossover; target 0.3 carries a widened band (coupler-exposure
        # ambiguity), measured 0.190 with the reference couplers
        cfg = small(
            "mzi_integrated", **{"physics.u_dt": [0.06], "sweep.points": 401}
        )
        (table,) = run_mzi_integrated(cfg)
        diag = [
            min(rep.g2[0, 0], rep.g2[1, 1])
            for rep in table.reports
            if not np.isnan(rep.g2[0, 0])
        ]
        assert abs(min(diag) - 0.3) <= 0.15

    def test_stronger_loss_collapses_antibunching(self):
        # 2.90 dB: the weak-arm dip collapses toward bunching statistics
        cfg = small("mzi_lossy", **{"loss.db_total": [1.93, 2.90], "sweep.points": 201})
        t193, t290 = run_mzi_lossy(cfg)

        def weak_arm_min(t):
            vals = []
            for rep in t.reports:
                weak = int(np.argmin(rep.intensities))
                if not np.isnan(rep.g2[weak, weak]):
                    vals.append(rep.g2[weak, weak])
            return min(vals)

        assert weak_arm_min(t290) > weak_arm_min(t193) + 0.5

    def test_gaussian_prediction_matches_engine_weak_kerr(self):
        cfg = small(
            "mzi_free_space", **{"physics.u_dt": [0.005], "sweep.points": 41}
        )
        (table,) = run_mzi_free_space(cfg)
        for row, rep in zip(table.rows, table.reports):
            pred = mzi_gaussian_prediction(0.005, row["phi_lo"])
            for l in range(2):
                if rep.intensities[l] > 5e-3:
                    assert abs(pred[l] - rep.g2[l, l]) < 5e-3


class TestQpicScenarios:
    def test_layer_pairs_patterns(self):
        assert qpic_layer_pairs("brickwork", 6, 3) == [
            [(0, 1), (2, 3), (4, 5)], [(1, 2), (3, 4)], [(0, 1), (2, 3), (4, 5)],
        ]
        assert qpic_layer_pairs("brickwork-shifted", 6, 2) == [
            [(1, 2), (3, 4)], [(0, 1), (2, 3), (4, 5)],
        ]
        assert qpic_layer_pairs("even-only", 4, 2) == [[(0, 1), (2, 3)]] * 2

    def test_kscan_smoke_and_columns(self):
        cfg = small(
            "qpic_kscan",
            **{"physics.g_exc": [10.0], "sweep.points": 3, "engine.cutoff": 5},
        )
        (table,) = run_qpic_kscan(cfg)
        assert len(table.rows) == 3
        assert table.rows[0]["u_dt"] > 0 and table.rows[0]["j_dt"] > 0
        rep = table.reports[0]
        assert rep.intensities.size == 6
        assert abs(rep.intensities.sum() - 2.0) < 0.01  # two injected photons

    def test_slowlight_invariant_udt_vg_squared(self):
        cfg = small(
            "qpic_slowlight",
            **{"sweep.points": 6, "engine.cutoff": 3, "loss.gamma": 0.0},
        )
        tables = run_qpic_slowlight(cfg)
        assert len(tables) == 1  # lossless only when gamma = 0
        vals = [row["u_dt"] * row["v_g"] ** 2 for row in tables[0].rows]
        assert max(vals) - min(vals) < 1e-12 * vals[0]

    def test_slowlight_flagging_at_unphysical_kappa(self):
        cfg = small(
            "qpic_slowlight",
            **{"sweep.points": 4, "sweep.start": 2.0, "sweep.stop": 25.0,
               "engine.cutoff": 2, "loss.gamma": 0.05, "engine.trajectories": 10},
        )
        tables = run_qpic_slowlight(cfg)
        lossy = tables[1]
        assert any(row["flagged"] for row in lossy.rows)
        assert any(not row["flagged"] for row in lossy.rows)

    def test_phase_sweep_mirror_symmetry(self):
        cfg = small(
            "qpic_phase_sweep",
            **{"physics.g_exc": [700.0], "sweep.points": 5, "engine.cutoff": 4},
        )
        cfg.phi_rel_list = [0.0, PI]
        tables = run_qpic_phase_sweep(cfg)
        for table in tables:
            for rep in table.reports:
                np.testing.assert_allclose(
                    rep.intensities, rep.intensities[::-1], atol=1e-9
                )

    def test_zero_interaction_degenerates_to_coherent(self):
        # g_exc = 0 makes every output Poissonian regardless of the mesh
        # (alpha chosen so the truncation tail sits below the tolerance)
        cfg = small(
            "qpic_kscan",
            **{"physics.g_exc": [0.0], "physics.alpha_in": 0.5,
               "sweep.points": 3, "engine.cutoff": 8},
        )
        (table,) = run_qpic_kscan(cfg)
        for rep in table.reports:
            # deep interference nulls amplify the square-root of the input
            # truncation tail; check entries with non-negligible intensity
            for l in range(6):
                for m in range(6):
                    if min(rep.intensities[l], rep.intensities[m]) >= 1e-2:
                        assert abs(rep.g2[l, m] - 1.0) < 1e-4

    def test_phase_sweep_default_slice_matches_kscan(self):
        cfg = small(
            "qpic_phase_sweep",
            **{"physics.g_exc": [700.0], "sweep.points": 4, "engine.cutoff": 3},
        )
        cfg.phi_rel_list = [0.6 * PI]
        (tp,) = run_qpic_phase_sweep(cfg)
        cfg_k = small(
            "qpic_kscan",
            **{"physics.g_exc": [700.0], "sweep.points": 4, "engine.cutoff": 3},
        )
        (tk,) = run_qpic_kscan(cfg_k)
        for rp, rk in zip(tp.reports, tk.reports):
            np.testing.assert_allclose(rp.intensities, rk.intensities, atol=1e-12)


class TestConvergence:
    def test_vacuum_inputs_zero_difference(self):
        cfg = small(
            "mzi_free_space",
            **{"physics.u_dt": [0.02], "physics.alpha_in": 0.0,
               "sweep.points": 5, "engine.cutoff": 6},
        )
        out = convergence_check(cfg)
        assert out["max_delta_n"] == 0.0

    def test_mzi_cutoff_convergence(self):
        cfg = small(
            "mzi_free_space", **{"physics.u_dt": [0.005], "sweep.points": 21}
        )
        out = convergence_check(cfg)  # N = 10 vs 8
        assert out["max_delta_g2"] < 1e-4
        assert out["passed"]


class TestOutput:
    def test_csv_deterministic(self, tmp_path):
        cfg = small(
            "mzi_free_space", **{"physics.u_dt": [0.005], "sweep.points": 9,
                                 "engine.cutoff": 6}
        )
        (t1,) = run_mzi_free_space(cfg)
        (t2,) = run_mzi_free_space(cfg)
        p1 = write_csv(t1, tmp_path / "a.csv")
        p2 = write_csv(t2, tmp_path / "b.csv")
        assert p1.read_bytes() == p2.read_bytes()

    def test_csv_header_structure(self, tmp_path):
        cfg = small(
            "mzi_free_space", **{"physics.u_dt": [0.005], "sweep.points": 3,
                                 "engine.cutoff": 6}
        )
        (table,) = run_mzi_free_space(cfg)
        cols = table_columns(table)
        assert cols[0] == "phi_lo"
        for need in ("n_0", "n_1", "g2_00", "g2_01", "g2_11", "se_n_0",
                     "se_g2_11", "pruned_weight", "seed", "cutoff", "engine_mode"):
            assert need in cols

    def test_sampled_rows_carry_seed_and_counts(self):
        cfg = small(
            "mzi_lossy",
            **{"loss.db_total": [1.93], "sweep.points": 2, "engine.cutoff": 5,
               "engine.mode": "sampling", "engine.trajectories": 100},
        )
        (table,) = run_mzi_lossy(cfg)
        meta = table.reports[0].meta
        assert meta["engine_mode"] == "sampling"
        assert meta["seed"] is not None and meta["n_traj"] == 100


class TestCli:
    def test_end_to_end_run(self, tmp_path):
        rc = main(
            [
                "--scenario", "mzi_free_space", "--cutoff", "6",
                "--out", str(tmp_path), "--seed", "3",
                "--config", self._mini_cfg(tmp_path),
                "--emit-plot-script",
            ]
        )
        assert rc == 0
        csvs = sorted(tmp_path.glob("*.csv"))
        assert csvs, "expected CSV output"
        sidecar = json.loads((tmp_path / "mzi_free_space_meta.json").read_text())
        assert sidecar["config"]["engine"]["cutoff"] == 6
        assert (tmp_path / "plot_results.py").exists()

    def _mini_cfg(self, tmp_path):
        p = tmp_path / "mini.json"
        p.write_text(
            json.dumps(
                {
                    "scenario": "mzi_free_space",
                    "physics": {"u_dt": [0.005]},
                    "sweep": {"points": 5},
                }
            )
        )
        return str(p)

    def test_bad_config_exit_code(self, tmp_path):
        p = tmp_path / "bad.json"
        p.write_text(json.dumps({"scenario": "mzi_free_space", "bogus": 1}))
        assert main(["--config", str(p)]) == 2

    def test_missing_scenario_exit_code(self):
        assert main([]) == 2

    def test_convergence_exit_codes(self, tmp_path):
        cfgp = tmp_path / "c.json"
        cfgp.write_text(
            json.dumps(
                {
                    "scenario": "mzi_free_space",
                    "physics": {"u_dt": [0.005]},
                    "sweep": {"points": 5},
                    "engine": {"cutoff": 10},
                }
            )
        )
        rc = main(
            ["--config", str(cfgp), "--out", str(tmp_path), "--check-convergence"]
        )
        assert rc == 0
        strict = json.loads(cfgp.read_text())
        strict["convergence_tol"] = 1e-18
        cfgp.write_text(json.dumps(strict))
        rc = main(
            ["--config", str(cfgp), "--out", str(tmp_path), "--check-convergence"]
        )
        assert rc == 4
