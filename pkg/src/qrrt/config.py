"""Flat key=value experiment configuration.

One `key = value` per line, `#` starts a comment, unknown keys are errors.
Selecting a system loads its published defaults (bias schedule, step-size)
so a config naming only `system` runs the reference setup for that system.
All numeric system parameters can be overridden by keys named after the
parameter fields.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .learning import LearnParams
from .mlp import TrainSettings
from .planner import BiasSchedule, PlannerConfig

# type tags: int, float, bool, str, int_list, float_list, matrix
PLANNER_KEYS = {
    "system": "str",
    "seed": "int",
    "goalBias": "float",
    "qualityBiasInitial": "float",
    "qualityBiasIncrement": "float",
    "qualityBiasInterval": "int",
    "qualityBiasMax": "float",
    "randActionShare": "float",
    "eta": "float",
    "gamma": "float",
    "goalReward": "float",
    "groupRadius": "float",
    "hidden": "int_list",
    "valueInitBias": "float",
    "learningRate": "float",
    "epochs": "int",
    "batchSize": "int",
    "bufferCap": "int",
    "maxIterations": "int",
    "maxEpisodes": "int",
    "maxWallSeconds": "float",
    "greedyRolloutSteps": "int",
    "greedyExtendSteps": "int",
}

HARNESS_KEYS = {
    "seeds": "int_list",
    "outputDir": "str",
    "emitTreeDump": "bool",
    "emitCheckpoints": "bool",
    "label": "str",
    "workers": "int",
}

SYSTEM_KEYS = {
    "diffdrive": {
        "axleWidth": ("float", "axle_width"),
        "wheelRadius": ("float", "wheel_radius"),
        "dt": ("float", "dt"),
        "maxLinearSpeed": ("float", "max_linear_speed"),
        "maxTurnRate": ("float", "max_turn_rate"),
        "workspaceX": ("float_list", "workspace_x"),
        "workspaceY": ("float_list", "workspace_y"),
        "steerGain": ("float", "steer_gain"),
        "goalRadius": ("float", "goal_radius"),
        "arcCostSamples": ("int", "arc_cost_samples"),
    },
    "acrobot": {
        "m1": ("float", "m1"),
        "m2": ("float", "m2"),
        "l1": ("float", "l1"),
        "l2": ("float", "l2"),
        "lc1": ("float", "lc1"),
        "lc2": ("float", "lc2"),
        "I1": ("float", "I1"),
        "I2": ("float", "I2"),
        "g": ("float", "g"),
        "tauMax": ("float", "tau_max"),
        "dt": ("float", "dt"),
        "substeps": ("int", "substeps"),
        "maxOmega1": ("float", "max_omega1"),
        "maxOmega2": ("float", "max_omega2"),
        "goalTipHeight": ("float", "goal_tip_height"),
        "goalMaxOmega": ("float", "goal_max_omega"),
    },
    "nullspace": {
        "n": ("int", "n"),
        "b": ("int", "b"),
        "lambda": ("float", "lam"),
        "dt": ("float", "dt"),
        "couplingSeed": ("int", "coupling_seed"),
        "couplingMatrix": ("matrix", "coupling_matrix"),
        "thetaDesired": ("float_list", "theta_desired"),
        "sampleAlphaMax": ("float", "sample_alpha_max"),
        "goalRadius": ("float", "goal_radius"),
        "goalOffsetNorm": ("float", "goal_offset_norm"),
    },
}

# Published experiment parameters applied when a key is absent.
SYSTEM_DEFAULTS = {
    "diffdrive": {
        "goalBias": 0.01,
        "qualityBiasIncrement": 0.003,
        "qualityBiasInterval": 10,
        "eta": 0.1,
        "randActionShare": 0.5,
    },
    "acrobot": {
        "goalBias": 0.05,
        "qualityBiasIncrement": 0.01,
        "qualityBiasInterval": 200,
        "eta": 0.1,
        "randActionShare": 0.5,
    },
    "nullspace": {
        "goalBias": 0.10,
        "qualityBiasIncrement": 0.02,
        "qualityBiasInterval": 200,
        "eta": 0.1,
        "randActionShare": 0.9,
    },
}

SHARED_DEFAULTS = {
    "seed": 0,
    "qualityBiasInitial": 0.0,
    "qualityBiasMax": 0.5,
    "gamma": 0.99,
    "goalReward": 0.0,
    "hidden": [32, 32],
    "valueInitBias": 0.0,
    "learningRate": 1e-3,
    "epochs": 50,
    "batchSize": 32,
    "bufferCap": 10_000,
    "maxIterations": 200_000,
    "maxEpisodes": 300,
    "maxWallSeconds": math.inf,
    "greedyRolloutSteps": 500,
    "greedyExtendSteps": 1,
    "seeds": [0],
    "outputDir": "runs",
    "emitTreeDump": False,
    "emitCheckpoints": False,
    "workers": 1,
}


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    planner: PlannerConfig
    seeds: list[int] = field(default_factory=lambda: [0])
    output_dir: str = "runs"
    emit_tree_dump: bool = False
    emit_checkpoints: bool = False
    label: str = ""
    workers: int = 1
    raw: dict = field(default_factory=dict)

    def validate(self):
        if not self.seeds:
            raise ConfigError("seeds must be nonempty")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        self.planner.validate()


def _parse_value(key: str, kind: str, text: str):
    text = text.strip()
    try:
        if kind == "int":
            return int(text)
        if kind == "float":
            return float(text)
        if kind == "bool":
            if text.lower() in ("true", "1", "yes"):
                return True
            if text.lower() in ("false", "0", "no"):
                return False
            raise ValueError(text)
        if kind == "str":
            return text
        if kind == "int_list":
            return [int(t) for t in text.split(",") if t.strip() != ""]
        if kind == "float_list":
            return [float(t) for t in text.split(",") if t.strip() != ""]
        if kind == "matrix":
            rows = [r for r in text.split(";") if r.strip() != ""]
            return [[float(t) for t in r.split(",")] for r in rows]
    except ValueError as exc:
        raise ConfigError(f"key {key!r}: cannot parse {text!r} as {kind}") from exc
    raise ConfigError(f"key {key!r}: unknown type tag {kind}")


def _format_value(kind: str, value) -> str:
    if kind == "int":
        return str(int(value))
    if kind == "float":
        v = float(value)
        return "inf" if math.isinf(v) and v > 0 else "%.17g" % v
    if kind == "bool":
        return "true" if value else "false"
    if kind == "str":
        return str(value)
    if kind == "int_list":
        return ",".join(str(int(v)) for v in value)
    if kind == "float_list":
        return ",".join("%.17g" % float(v) for v in value)
    if kind == "matrix":
        return ";".join(",".join("%.17g" % float(v) for v in row) for row in value)
    raise ConfigError(f"unknown type tag {kind}")


def parse_config_text(text: str, source: str = "<config>") -> dict:
    """Raw key -> typed value mapping with strict key checking."""
    values = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {line!r}")
        key, _, raw = stripped.partition("=")
        key = key.strip()
        kind = _key_kind(key, values.get("system"))
        values[key] = _parse_value(key, kind, raw)
    return values


def _key_kind(key: str, system_hint) -> str:
    # Whether a system key applies to the configured system is checked in
    # build_experiment, once the system is known; kinds never conflict.
    if key in PLANNER_KEYS:
        return PLANNER_KEYS[key]
    if key in HARNESS_KEYS:
        return HARNESS_KEYS[key]
    if system_hint in SYSTEM_KEYS and key in SYSTEM_KEYS[system_hint]:
        return SYSTEM_KEYS[system_hint][key][0]
    for keys in SYSTEM_KEYS.values():
        if key in keys:
            return keys[key][0]
    raise ConfigError(f"unknown config key {key!r}")


def build_experiment(values: dict) -> ExperimentConfig:
    """Typed config object from raw key values, with defaults filled in."""
    system = values.get("system", "diffdrive")
    if system not in SYSTEM_KEYS:
        raise ConfigError(f"unknown system {system!r}")

    def get(key, default):
        return values.get(key, default)

    defaults = dict(SHARED_DEFAULTS)
    defaults.update(SYSTEM_DEFAULTS[system])

    sys_params = {}
    for key, (kind, pyname) in SYSTEM_KEYS[system].items():
        if key in values:
            v = values[key]
            if kind == "matrix":
                v = np.asarray(v, dtype=float)
            elif kind == "float_list" and key == "thetaDesired":
                v = np.asarray(v, dtype=float)
            elif kind == "float_list":
                v = tuple(float(x) for x in v)
            sys_params[pyname] = v
    for key in values:
        if key in PLANNER_KEYS or key in HARNESS_KEYS or key in SYSTEM_KEYS[system]:
            continue
        raise ConfigError(f"key {key!r} does not apply to system {system!r}")

    schedule = BiasSchedule(
        goal_bias=get("goalBias", defaults["goalBias"]),
        quality_bias_initial=get("qualityBiasInitial", defaults["qualityBiasInitial"]),
        quality_bias_increment=get("qualityBiasIncrement", defaults["qualityBiasIncrement"]),
        quality_bias_interval=get("qualityBiasInterval", defaults["qualityBiasInterval"]),
        quality_bias_max=get("qualityBiasMax", defaults["qualityBiasMax"]),
        rand_action_share=get("randActionShare", defaults["randActionShare"]),
    )
    learn = LearnParams(
        eta=get("eta", defaults["eta"]),
        gamma=get("gamma", defaults["gamma"]),
        goal_reward=get("goalReward", defaults["goalReward"]),
        group_radius=values.get("groupRadius"),
    )
    train = TrainSettings(
        learning_rate=get("learningRate", defaults["learningRate"]),
        epochs=get("epochs", defaults["epochs"]),
        batch_size=get("batchSize", defaults["batchSize"]),
        buffer_cap=get("bufferCap", defaults["bufferCap"]),
    )
    planner = PlannerConfig(
        system_name=system,
        seed=get("seed", defaults["seed"]),
        schedule=schedule,
        learn=learn,
        hidden=tuple(get("hidden", defaults["hidden"])),
        value_init_bias=get("valueInitBias", defaults["valueInitBias"]),
        train=train,
        max_iterations=get("maxIterations", defaults["maxIterations"]),
        max_episodes=get("maxEpisodes", defaults["maxEpisodes"]),
        max_wall_seconds=get("maxWallSeconds", defaults["maxWallSeconds"]),
        greedy_rollout_steps=get("greedyRolloutSteps", defaults["greedyRolloutSteps"]),
        greedy_extend_steps=get("greedyExtendSteps", defaults["greedyExtendSteps"]),
        system_params=sys_params,
    )
    cfg = ExperimentConfig(
        planner=planner,
        seeds=list(get("seeds", defaults["seeds"])),
        output_dir=get("outputDir", defaults["outputDir"]),
        emit_tree_dump=get("emitTreeDump", defaults["emitTreeDump"]),
        emit_checkpoints=get("emitCheckpoints", defaults["emitCheckpoints"]),
        label=get("label", system),
        workers=get("workers", defaults["workers"]),
        raw=dict(values),
    )
    cfg.validate()
    return cfg


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    return build_experiment(parse_config_text(path.read_text(encoding="utf-8"), str(path)))


def effective_items(cfg: ExperimentConfig) -> list[tuple[str, str]]:
    """Every effective key=value pair, defaults included, as strings."""
    p = cfg.planner
    items = [
        ("system", _format_value("str", p.system_name)),
        ("seed", _format_value("int", p.seed)),
        ("seeds", _format_value("int_list", cfg.seeds)),
        ("label", _format_value("str", cfg.label)),
        ("outputDir", _format_value("str", cfg.output_dir)),
        ("emitTreeDump", _format_value("bool", cfg.emit_tree_dump)),
        ("emitCheckpoints", _format_value("bool", cfg.emit_checkpoints)),
        ("workers", _format_value("int", cfg.workers)),
        ("goalBias", _format_value("float", p.schedule.goal_bias)),
        ("qualityBiasInitial", _format_value("float", p.schedule.quality_bias_initial)),
        ("qualityBiasIncrement", _format_value("float", p.schedule.quality_bias_increment)),
        ("qualityBiasInterval", _format_value("int", p.schedule.quality_bias_interval)),
        ("qualityBiasMax", _format_value("float", p.schedule.quality_bias_max)),
        ("randActionShare", _format_value("float", p.schedule.rand_action_share)),
        ("eta", _format_value("float", p.learn.eta)),
        ("gamma", _format_value("float", p.learn.gamma)),
        ("goalReward", _format_value("float", p.learn.goal_reward)),
        ("hidden", _format_value("int_list", p.hidden)),
        ("valueInitBias", _format_value("float", p.value_init_bias)),
        ("learningRate", _format_value("float", p.train.learning_rate)),
        ("epochs", _format_value("int", p.train.epochs)),
        ("batchSize", _format_value("int", p.train.batch_size)),
        ("bufferCap", _format_value("int", p.train.buffer_cap)),
        ("maxIterations", _format_value("int", p.max_iterations)),
        ("maxEpisodes", _format_value("int", p.max_episodes)),
        ("maxWallSeconds", _format_value("float", p.max_wall_seconds)),
        ("greedyRolloutSteps", _format_value("int", p.greedy_rollout_steps)),
        ("greedyExtendSteps", _format_value("int", p.greedy_extend_steps)),
    ]
    if p.learn.group_radius is not None:
        items.append(("groupRadius", _format_value("float", p.learn.group_radius)))
    pyname_to_key = {pyname: (key, kind) for key, (kind, pyname) in SYSTEM_KEYS[p.system_name].items()}
    for pyname, value in p.system_params.items():
        key, kind = pyname_to_key[pyname]
        items.append((key, _format_value(kind, value)))
    return items


def emit_config(cfg: ExperimentConfig, path) -> None:
    lines = [f"{k} = {v}" for k, v in effective_items(cfg)]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def preset_path(name: str) -> Path:
    """Path of a packaged preset config (e.g. 'diffdrive-paper')."""
    ref = resources.files("qrrt").joinpath("presets", f"{name}.cfg")
    with resources.as_file(ref) as p:
        if not p.is_file():
            raise ConfigError(f"unknown preset {name!r}")
        return Path(p)
