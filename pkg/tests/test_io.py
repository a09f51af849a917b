import json

import numpy as np
import pytest

from svcmsi.io import (
    ConfigError,
    FormatError,
    RunConfig,
    ScenarioSpec,
    config_from_dict,
    dump_config,
    load_config,
    read_coefficients_json,
    read_motion_csv,
    read_stimulus_csv,
    read_trace_csv,
    sinusoid_profile,
    write_coefficients_json,
    write_motion_csv,
    write_msi_svg,
    write_stimulus_csv,
    write_trace_csv,
)
from svcmsi.model import ModelParams
from svcmsi.profile import MotionProfile
from svcmsi.simulate import SicknessTrace, simulate
from svcmsi.stimulus import RegressionCoefficients, TrajectoryStimulus


def rel_drift(a, b):
    a, b = np.asarray(a), np.asarray(b)
    scale = np.maximum(np.abs(a), 1e-300)
    return float(np.max(np.where(a == b, 0.0, np.abs(a - b) / scale), initial=0.0))


class TestScenario:
    def test_quarter_period_peak(self):
        p = sinusoid_profile(ScenarioSpec(A=0.5, f_hz=0.25, duration=10.0, dt=0.1))
        assert p.accel[10, 0] == pytest.approx(0.5, abs=1e-15)
        assert p.accel[0, 0] == 0.0
        assert len(p) == 101
        assert np.all(p.ang_vel == 0) and np.all(p.accel[:, 1:] == 0)

    def test_grid_count_is_robust_to_rounding(self):
        assert len(sinusoid_profile(ScenarioSpec(duration=0.3, dt=0.1))) == 4
        assert len(sinusoid_profile(ScenarioSpec(duration=1800.0, dt=0.01))) == 180001

    def test_peak_amplitude(self):
        p = sinusoid_profile(ScenarioSpec(A=0.7, f_hz=0.25, duration=20.0, dt=0.01))
        assert np.max(np.abs(p.accel[:, 0])) == pytest.approx(0.7, abs=1e-12)

    @pytest.mark.parametrize(
        "kwargs, name",
        [({"A": -1.0}, "A"), ({"f_hz": 0.0}, "f_hz"), ({"duration": -5.0}, "duration"),
         ({"dt": 0.0}, "dt"), ({"dt": 2.0}, "dt")],
    )
    def test_validation(self, kwargs, name):
        with pytest.raises(ValueError, match=name):
            ScenarioSpec(**kwargs)


class TestMotionCsv:
    def test_round_trip(self, tmp_path, band_limited):
        rng = np.random.default_rng(0)
        n = 501
        accel = np.column_stack([band_limited(rng, n, 0.02, 1.0) for _ in range(3)])
        ang_vel = rng.normal(size=(n, 3))
        prof = MotionProfile(0.02, accel, ang_vel)
        write_motion_csv(prof, tmp_path / "m.csv")
        back = read_motion_csv(tmp_path / "m.csv")
        assert back.dt == pytest.approx(0.02, rel=1e-12)
        assert rel_drift(prof.accel, back.accel) <= 1e-12
        assert rel_drift(prof.ang_vel, back.ang_vel) <= 1e-12

    def test_header(self, tmp_path):
        write_motion_csv(MotionProfile.zeros(0.02, 0.01), tmp_path / "m.csv")
        text = (tmp_path / "m.csv").read_bytes()
        assert text.startswith(b"t,ax,ay,az,wx,wy,wz\n")
        assert b"\r" not in text

    def test_single_row_rejected(self, tmp_path):
        (tmp_path / "m.csv").write_text("t,ax,ay,az,wx,wy,wz\n0,0,0,0,0,0,0\n")
        with pytest.raises(FormatError, match="at least 2"):
            read_motion_csv(tmp_path / "m.csv")

    def test_nan_cell_names_line(self, tmp_path):
        (tmp_path / "m.csv").write_text("t,ax,ay,az,wx,wy,wz\n0,0,0,0,0,0,0\n0.1,nan,0,0,0,0,0\n")
        with pytest.raises(FormatError, match="line 3"):
            read_motion_csv(tmp_path / "m.csv")

    def test_missing_column(self, tmp_path):
        (tmp_path / "m.csv").write_text("t,ax,ay,az,wx,wy\n0,0,0,0,0,0\n0.1,0,0,0,0,0\n")
        with pytest.raises(FormatError, match="wz"):
            read_motion_csv(tmp_path / "m.csv")

    def test_non_uniform_grid(self, tmp_path):
        (tmp_path / "m.csv").write_text(
            "t,ax,ay,az,wx,wy,wz\n0,0,0,0,0,0,0\n0.1,0,0,0,0,0,0\n0.25,0,0,0,0,0,0\n0.3,0,0,0,0,0,0\n"
        )
        with pytest.raises(FormatError, match="not uniform"):
            read_motion_csv(tmp_path / "m.csv")

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            read_motion_csv(tmp_path / "absent.csv")


class TestTraceCsv:
    def test_round_trip(self, tmp_path, params):
        prof = sinusoid_profile(ScenarioSpec(duration=30.0))
        w = np.zeros((len(prof), 3))
        w[:, 1] = 0.05 * np.cos(np.arange(len(prof)) * 0.01)
        trace = simulate(prof, TrajectoryStimulus(prof.dt, w), params)
        write_trace_csv(trace, tmp_path / "t.csv", full_state=True)
        back = read_trace_csv(tmp_path / "t.csv")
        assert len(back) == len(trace) == 3001
        for name in ("msi", "d_v_norm", "phi", "omega_vis", "states", "time"):
            assert rel_drift(getattr(trace, name), getattr(back, name)) <= 1e-12, name
        assert np.max(np.abs(trace.msi - back.msi)) <= 1e-12

    def test_rows_equal_steps_plus_one(self, tmp_path, params):
        trace = simulate(MotionProfile.zeros(1.0, 0.1), None, params, sim_dt=0.05)
        write_trace_csv(trace, tmp_path / "t.csv")
        lines = (tmp_path / "t.csv").read_text().splitlines()
        assert lines[0] == "t,msi,dv_norm,phi,wvis_x,wvis_y,wvis_z"
        assert len(lines) - 1 == 21

    def test_empty_trace_is_header_only(self, tmp_path):
        empty = SicknessTrace(0.01, np.empty(0), np.empty(0), np.empty(0), np.empty(0),
                              np.empty((0, 3)), np.empty((0, 14)))
        write_trace_csv(empty, tmp_path / "t.csv")
        assert (tmp_path / "t.csv").read_text() == "t,msi,dv_norm,phi,wvis_x,wvis_y,wvis_z\n"
        assert len(read_trace_csv(tmp_path / "t.csv")) == 0


class TestStimulusFiles:
    def test_coefficients_round_trip(self, tmp_path):
        coeffs = RegressionCoefficients(np.random.default_rng(1).normal(size=11) * 1e-3)
        write_coefficients_json(coeffs, tmp_path / "c.json")
        doc = json.loads((tmp_path / "c.json").read_text())
        assert doc["n_terms"] == 10 and doc["axis"] == "pitch" and len(doc["h"]) == 11
        back, axis = read_coefficients_json(tmp_path / "c.json")
        assert back == coeffs
        assert axis == "pitch"

    def test_coefficients_inconsistent_order(self, tmp_path):
        (tmp_path / "c.json").write_text('{"n_terms": 3, "h": [0, 1], "axis": "pitch"}')
        with pytest.raises(FormatError, match="n_terms"):
            read_coefficients_json(tmp_path / "c.json")

    def test_trajectory_round_trip(self, tmp_path):
        stim = TrajectoryStimulus(0.5, np.random.default_rng(2).normal(size=(40, 3)))
        write_stimulus_csv(stim, tmp_path / "s.csv")
        back = read_stimulus_csv(tmp_path / "s.csv")
        assert rel_drift(stim.omega_vis, back.omega_vis) <= 1e-12
        assert back.dt == pytest.approx(0.5, rel=1e-12)


class TestConfig:
    def test_empty_config_uses_defaults(self, tmp_path):
        (tmp_path / "c.json").write_text("{}")
        cfg = load_config(tmp_path / "c.json")
        assert cfg.params == ModelParams()
        assert cfg.params.k_a == 0.1 and cfg.params.tau_d == 7.0 and cfg.params.p_max == 85.0
        assert cfg.sim_dt == 0.01

    def test_minutes_alias(self):
        assert config_from_dict({"tau_l_minutes": 12}).params.tau_l == 720.0

    def test_unknown_key(self):
        with pytest.raises(ConfigError, match="unknown key: k_q"):
            config_from_dict({"k_q": 1})

    def test_unknown_nested_key(self):
        with pytest.raises(ConfigError, match="unknown key: optimizer.speed"):
            config_from_dict({"optimizer": {"speed": 1}})

    def test_out_of_range(self):
        with pytest.raises(ConfigError, match="tau_d"):
            config_from_dict({"tau_d": -1})

    def test_wrong_type_names_key(self):
        with pytest.raises(ConfigError, match="k_a"):
            config_from_dict({"k_a": "big"})

    def test_malformed_json(self, tmp_path):
        (tmp_path / "c.json").write_text("{not json")
        with pytest.raises(ConfigError, match="malformed"):
            load_config(tmp_path / "c.json")

    def test_missing_referenced_file(self, tmp_path):
        with pytest.raises(ConfigError, match="motion"):
            config_from_dict({"motion": "nope.csv"}, tmp_path)

    def test_both_lag_units(self):
        with pytest.raises(ConfigError, match="tau_l"):
            config_from_dict({"tau_l": 600, "tau_l_minutes": 10})

    def test_dump_and_reload_is_identity(self, tmp_path):
        write_motion_csv(MotionProfile.zeros(1.0, 0.1), tmp_path / "m.csv")
        doc = {
            "k_omega_vis": 7.5,
            "tau_l_minutes": 6,
            "sim_dt": 0.005,
            "scenario": {"A": 0.4, "f_hz": 0.2, "duration": 600, "dt": 0.01},
            "optimizer": {"max_evaluations": 50, "seed": 3, "n_terms": 4, "knot_dt": 1.0, "bound": 1.5},
            "motion": "m.csv",
            "out": "out.json",
        }
        cfg = config_from_dict(doc, tmp_path)
        dump_config(cfg, tmp_path / "dumped.json")
        again = load_config(tmp_path / "dumped.json")
        assert again == cfg
        dump_config(again, tmp_path / "dumped2.json")
        assert (tmp_path / "dumped.json").read_bytes() == (tmp_path / "dumped2.json").read_bytes()

    def test_default_config(self):
        assert load_config(None) == RunConfig()


def test_svg_output(tmp_path, params):
    trace = simulate(sinusoid_profile(ScenarioSpec(duration=60.0)), None, params)
    write_msi_svg({"zero": trace}, tmp_path / "p.svg")
    text = (tmp_path / "p.svg").read_text()
    assert text.startswith("<svg") and "<polyline" in text and 'viewBox="0 0 640 360"' in text
