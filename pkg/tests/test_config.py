import math

import numpy as np
import pytest

from qrrt.config import (
    ConfigError,
    build_experiment,
    effective_items,
    emit_config,
    load_config,
    parse_config_text,
    preset_path,
)


def write_cfg(tmp_path, text, name="exp.cfg"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


class TestParsing:
    def test_minimal_diffdrive_gets_reference_defaults(self, tmp_path):
        cfg = load_config(write_cfg(tmp_path, "system = diffdrive\n"))
        p = cfg.planner
        assert p.schedule.goal_bias == 0.01
        assert p.schedule.quality_bias_increment == 0.003
        assert p.schedule.quality_bias_interval == 10
        assert p.learn.eta == 0.1
        assert p.learn.gamma == 0.99
        assert cfg.seeds == [0]

    def test_acrobot_preset_defaults(self, tmp_path):
        cfg = load_config(write_cfg(tmp_path, "system = acrobot\n"))
        assert cfg.planner.schedule.goal_bias == 0.05
        assert cfg.planner.schedule.quality_bias_increment == 0.01
        assert cfg.planner.schedule.quality_bias_interval == 200

    def test_nullspace_defaults(self, tmp_path):
        cfg = load_config(write_cfg(tmp_path, "system = nullspace\n"))
        assert cfg.planner.schedule.goal_bias == 0.10
        assert cfg.planner.schedule.quality_bias_increment == 0.02
        assert cfg.planner.schedule.rand_action_share == 0.9

    def test_unknown_key_named_in_error(self, tmp_path):
        with pytest.raises(ConfigError, match="foo"):
            load_config(write_cfg(tmp_path, "system = diffdrive\nfoo = 3\n"))

    def test_type_mismatch(self, tmp_path):
        with pytest.raises(ConfigError, match="maxEpisodes"):
            load_config(write_cfg(tmp_path, "maxEpisodes = many\n"))

    def test_comments_and_blank_lines(self, tmp_path):
        cfg = load_config(
            write_cfg(tmp_path, "# full line comment\n\nsystem = diffdrive  # trailing\nseed = 3\n")
        )
        assert cfg.planner.seed == 3

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="not found"):
            load_config(tmp_path / "absent.cfg")

    def test_missing_equals(self, tmp_path):
        with pytest.raises(ConfigError, match="key = value"):
            load_config(write_cfg(tmp_path, "system diffdrive\n"))

    def test_wrong_system_key_rejected(self, tmp_path):
        with pytest.raises(ConfigError, match="does not apply"):
            load_config(write_cfg(tmp_path, "system = diffdrive\ntauMax = 2\n"))

    def test_system_param_override(self, tmp_path):
        cfg = load_config(write_cfg(tmp_path, "system = diffdrive\nmaxLinearSpeed = 1.5\ndt = 0.25\n"))
        assert cfg.planner.system_params == {"max_linear_speed": 1.5, "dt": 0.25}

    def test_seeds_list(self, tmp_path):
        cfg = load_config(write_cfg(tmp_path, "system = diffdrive\nseeds = 0, 1, 2\n"))
        assert cfg.seeds == [0, 1, 2]

    def test_empty_seeds_rejected(self, tmp_path):
        with pytest.raises(ConfigError, match="seeds"):
            load_config(write_cfg(tmp_path, "system = diffdrive\nseeds =\n"))

    def test_matrix_value(self, tmp_path):
        cfg = load_config(
            write_cfg(tmp_path, "system = nullspace\nn = 3\nb = 1\ncouplingMatrix = 1,0,0\nthetaDesired = 0.1,0.2,0.3\n")
        )
        m = cfg.planner.system_params["coupling_matrix"]
        assert np.array_equal(m, [[1.0, 0.0, 0.0]])
        assert np.allclose(cfg.planner.system_params["theta_desired"], [0.1, 0.2, 0.3])

    def test_invariant_violation_propagates(self, tmp_path):
        with pytest.raises(ValueError):
            load_config(write_cfg(tmp_path, "system = diffdrive\ngoalBias = 0.8\nqualityBiasMax = 0.8\n"))


class TestRoundTrip:
    def test_emit_then_load_reproduces_effective_values(self, tmp_path):
        src = write_cfg(
            tmp_path,
            "system = diffdrive\nseeds = 1,2\nmaxEpisodes = 7\nlearningRate = 0.005\ndt = 0.25\n",
        )
        cfg = load_config(src)
        out = tmp_path / "effective.cfg"
        emit_config(cfg, out)
        again = load_config(out)
        assert effective_items(cfg) == effective_items(again)

    def test_defaults_present_in_emission(self, tmp_path):
        cfg = load_config(write_cfg(tmp_path, "system = acrobot\n"))
        out = tmp_path / "eff.cfg"
        emit_config(cfg, out)
        text = out.read_text()
        assert "goalBias = 0.05" in text
        assert "eta = 0.10000000000000001" in text or "eta = 0.1" in text
        assert "maxWallSeconds = inf" in text

    def test_inf_roundtrip(self, tmp_path):
        cfg = load_config(write_cfg(tmp_path, "system = diffdrive\nmaxWallSeconds = inf\n"))
        assert math.isinf(cfg.planner.max_wall_seconds)


class TestPresets:
    @pytest.mark.parametrize("name", ["diffdrive-paper", "acrobot-paper", "nullspace-default"])
    def test_packaged_presets_load(self, name):
        cfg = load_config(preset_path(name))
        assert cfg.label == name

    def test_unknown_preset(self):
        with pytest.raises(ConfigError):
            preset_path("no-such-preset")

    def test_diffdrive_paper_has_reference_parameters(self):
        cfg = load_config(preset_path("diffdrive-paper"))
        p = cfg.planner
        assert p.system_name == "diffdrive"
        assert p.schedule.goal_bias == 0.01
        assert p.schedule.quality_bias_increment == 0.003
        assert p.schedule.quality_bias_interval == 10
        assert p.learn.eta == 0.1
        assert p.max_episodes == 300
        assert len(cfg.seeds) >= 5

    def test_acrobot_paper_has_reference_parameters(self):
        cfg = load_config(preset_path("acrobot-paper"))
        assert cfg.planner.schedule.goal_bias == 0.05
        assert cfg.planner.schedule.quality_bias_increment == 0.01
        assert cfg.planner.schedule.quality_bias_interval == 200


def test_parse_config_text_standalone():
    values = parse_config_text("system = nullspace\nlambda = 2.5\n")
    assert values["lambda"] == 2.5
    cfg = build_experiment(values)
    assert cfg.planner.system_params == {"lam": 2.5}
