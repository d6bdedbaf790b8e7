"""Experiment configuration: JSON schema, validation, q-sweeps.

A config names the experiment, fixes the model (dimension, box, boundary
condition and either a single q or a geometric sweep), picks the engine and
replica/seed bookkeeping, and passes per-experiment options through
untouched.  Geometric sweeps are specified as {"q0":..., "ratio":...,
"count":...} so that theta_q = log2(1/q) marches with a constant step and
slope fits get uniform abscissae.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .lattice import Box, BoundaryCondition, ModelParams


class ConfigError(ValueError):
    """Invalid experiment configuration (exit code 2 in the CLI)."""


ENGINES = ("exact", "mc", "both")


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    box: Box
    bc_label: str
    q_values: tuple[float, ...]
    engine: str
    replicas: int
    seed: int
    out: str
    options: dict = field(default_factory=dict)
    raw: dict = field(default_factory=dict)

    def boundary(self) -> BoundaryCondition:
        return BoundaryCondition.from_label(self.box, self.bc_label)

    def params(self, q: float) -> ModelParams:
        return ModelParams(q)

    def single_q(self) -> float:
        if len(self.q_values) != 1:
            raise ConfigError(
                f"experiment {self.experiment!r} needs a single q, got a sweep"
            )
        return self.q_values[0]


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise ConfigError(msg)


def parse_config(raw: dict) -> ExperimentConfig:
    _require(isinstance(raw, dict), "config must be a JSON object")
    _require("experiment" in raw, "missing 'experiment'")
    name = raw["experiment"]
    _require(isinstance(name, str) and name, "'experiment' must be a nonempty string")

    d = raw.get("d")
    _require(isinstance(d, int) and d >= 1, "'d' must be an integer >= 1")
    if "upper" in raw:
        upper = raw["upper"]
        lower = raw.get("lower", [1] * d)
    else:
        _require("L" in raw, "provide either 'upper' (with optional 'lower') or 'L'")
        L = raw["L"]
        _require(isinstance(L, int) and L >= 1, "'L' must be an integer >= 1")
        lower, upper = [1] * d, [L] * d
    _require(
        isinstance(lower, list) and isinstance(upper, list)
        and len(lower) == d and len(upper) == d,
        "'lower'/'upper' must be length-d integer lists",
    )
    try:
        box = Box(tuple(lower), tuple(upper))
    except ValueError as e:
        raise ConfigError(str(e)) from None

    bc_label = raw.get("bc", "minimal:e1")
    try:
        BoundaryCondition.from_label(box, bc_label)
    except ValueError as e:
        raise ConfigError(str(e)) from None

    if "q_sweep" in raw:
        sw = raw["q_sweep"]
        _require(
            isinstance(sw, dict) and {"q0", "ratio", "count"} <= set(sw),
            "'q_sweep' needs q0, ratio, count",
        )
        q0, ratio, count = sw["q0"], sw["ratio"], sw["count"]
        _require(0.0 < q0 < 1.0, "q0 must lie in (0,1)")
        _require(0.0 < ratio < 1.0 or 1.0 < ratio, "ratio must be positive and != 1")
        _require(isinstance(count, int) and count >= 1, "count must be a positive int")
        qs = tuple(q0 * ratio**k for k in range(count))
        _require(all(0.0 < q < 1.0 for q in qs), "sweep leaves (0,1)")
    else:
        q = raw.get("q")
        _require(q is not None, "provide 'q' or 'q_sweep'")
        qlist = q if isinstance(q, list) else [q]
        _require(
            all(isinstance(v, (int, float)) and 0.0 < v < 1.0 for v in qlist),
            "q values must lie in (0,1)",
        )
        qs = tuple(float(v) for v in qlist)

    engine = raw.get("engine", "exact")
    _require(engine in ENGINES, f"'engine' must be one of {ENGINES}")
    replicas = raw.get("replicas", 10000)
    _require(isinstance(replicas, int) and replicas >= 1, "'replicas' must be >= 1")
    seed = raw.get("seed", 0)
    _require(
        isinstance(seed, int) and 0 <= seed < (1 << 64), "'seed' must be a 64-bit int"
    )
    out = raw.get("out", "out")
    options = raw.get("options", {})
    _require(isinstance(options, dict), "'options' must be an object")
    return ExperimentConfig(
        name,
        box,
        bc_label,
        qs,
        engine,
        int(replicas),
        int(seed),
        str(out),
        dict(options),
        dict(raw),
    )


def load_config(path) -> ExperimentConfig:
    try:
        raw = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as e:
        raise ConfigError(f"config is not valid JSON: {e}") from None
    return parse_config(raw)
