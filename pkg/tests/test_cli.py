import json
from pathlib import Path

import numpy as np
import pytest

from eastlab.cli import EXIT_CONFIG, EXIT_INFEASIBLE, EXIT_OK, main
from eastlab.config import ConfigError, load_config, parse_config
from eastlab.reporting import SlopeFit, fmt, read_csv, slope_fit


def _write(tmp_path, name, payload):
    p = tmp_path / name
    p.write_text(json.dumps(payload))
    return str(p)


def test_gap_sweep_produces_rows_and_slope(tmp_path):
    cfg = _write(
        tmp_path,
        "gap.json",
        {
            "experiment": "gap-sweep",
            "d": 1,
            "L": 2,
            "bc": "minimal:e1",
            "q_sweep": {"q0": 2.0**-8, "ratio": 0.5, "count": 9},
            "out": str(tmp_path / "out"),
        },
    )
    assert main(["gap", "--config", cfg]) == EXIT_OK
    header, rows = read_csv(tmp_path / "out" / "gap.csv")
    assert header == ["d", "L", "bc", "q", "theta_q", "gap", "t_rel", "method", "residual"]
    assert len(rows) == 9
    sheader, srows = read_csv(tmp_path / "out" / "slope.csv")
    assert len(srows) == 1
    slope = float(srows[0][sheader.index("slope")])
    assert abs(slope - 1.0) < 0.1
    manifest = json.loads((tmp_path / "out" / "manifest.json").read_text())
    names = {e["file"] for e in manifest["files"]}
    assert {"gap.csv", "slope.csv"} <= names
    import hashlib

    for entry in manifest["files"]:
        digest = hashlib.sha256((tmp_path / "out" / entry["file"]).read_bytes()).hexdigest()
        assert digest == entry["sha256"]


def test_byte_identical_reruns(tmp_path):
    payload = {
        "experiment": "mc-hit",
        "d": 2,
        "L": 2,
        "bc": "minimal:e1",
        "q": 0.2,
        "engine": "mc",
        "replicas": 500,
        "seed": 7,
    }
    blobs = []
    for sub in ("a", "b"):
        payload["out"] = str(tmp_path / sub)
        cfg = _write(tmp_path, f"{sub}.json", payload)
        assert main(["hit", "--config", cfg]) == EXIT_OK
        blobs.append((tmp_path / sub / "hit_mc.csv").read_bytes())
    assert blobs[0] == blobs[1]


def test_hitting_sweep_slope_two(tmp_path):
    cfg = _write(
        tmp_path,
        "hit.json",
        {
            "experiment": "hit-sweep",
            "d": 2,
            "L": 2,
            "bc": "minimal:e1",
            "q_sweep": {"q0": 2.0**-8, "ratio": 0.5, "count": 9},
            "engine": "exact",
            "options": {"x": [2, 2]},
            "out": str(tmp_path / "out"),
        },
    )
    assert main(["hit", "--config", cfg]) == EXIT_OK
    header, rows = read_csv(tmp_path / "out" / "slope.csv")
    slope = float(rows[0][header.index("slope")])
    lo = float(rows[0][header.index("ci_low")])
    hi = float(rows[0][header.index("ci_high")])
    assert abs(slope - 2.0) < 0.15
    assert lo <= 2.0 + 0.15 and hi >= 2.0 - 0.15


def test_exit_codes(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["gap", "--config", str(bad)]) == EXIT_CONFIG
    missing = _write(tmp_path, "missing.json", {"experiment": "x", "d": 1})
    assert main(["gap", "--config", missing]) == EXIT_CONFIG
    huge = _write(
        tmp_path,
        "huge.json",
        {"experiment": "x", "d": 1, "L": 25, "q": 0.5, "out": str(tmp_path / "o")},
    )
    assert main(["gap", "--config", huge]) == EXIT_INFEASIBLE


def test_seed_and_out_overrides(tmp_path):
    cfg = _write(
        tmp_path,
        "c.json",
        {
            "experiment": "mc-hit",
            "d": 1,
            "L": 2,
            "q": 0.3,
            "engine": "mc",
            "replicas": 200,
            "seed": 1,
            "out": str(tmp_path / "ignored"),
        },
    )
    out = tmp_path / "chosen"
    assert main(["hit", "--config", cfg, "--seed", "99", "--out", str(out)]) == EXIT_OK
    header, rows = read_csv(out / "hit_mc.csv")
    assert rows[0][header.index("seed")] == "99"


def test_snapshot_writes_pgm(tmp_path):
    cfg = _write(
        tmp_path,
        "s.json",
        {
            "experiment": "snap",
            "d": 2,
            "L": 20,
            "bc": "minimal:e1",
            "q": 0.25,
            "seed": 3,
            "options": {"t_end": 30.0},
            "out": str(tmp_path / "out"),
        },
    )
    assert main(["snapshot", "--config", cfg]) == EXIT_OK
    pgms = list((tmp_path / "out").glob("snap_*.pgm"))
    assert len(pgms) == 1
    assert pgms[0].name == "snap_0.25_20_30.pgm"
    lines = pgms[0].read_text().splitlines()
    assert lines[0] == "P2" and lines[1] == "20 20"
    _, rows = read_csv(tmp_path / "out" / "extents.csv")
    assert len(rows) == 1


def test_bottleneck_subcommand(tmp_path):
    cfg = _write(
        tmp_path,
        "b.json",
        {
            "experiment": "bn",
            "d": 2,
            "L": 2,
            "q": [0.1, 0.05],
            "out": str(tmp_path / "out"),
        },
    )
    assert main(["bottleneck", "--config", cfg]) == EXIT_OK
    header, rows = read_csv(tmp_path / "out" / "bottleneck.csv")
    assert len(rows) == 2
    lower = float(rows[0][header.index("t_rel_lower_bound")])
    exact = float(rows[0][header.index("t_rel_exact")])
    assert lower <= exact
    traces = json.loads((tmp_path / "out" / "traces.json").read_text())
    assert len(traces) == 4
    assert all(t["S"] >= 2 for t in traces)


@pytest.mark.parametrize(
    "command,payload,expect",
    [
        ("reach", {"d": 1, "L": 8, "q": 0.2, "options": {"m": [1, 2, 3]}}, "reach.csv"),
        ("block", {"d": 1, "L": 2, "q": [0.3, 0.1], "options": {"ell": 2}}, "block.csv"),
        ("knight", {"d": 2, "lower": [0, 0], "upper": [8, 8], "q": 0.5}, "knight.csv"),
        ("tree", {"d": 2, "L": 2, "q": [0.3]}, "tree.csv"),
        ("renorm", {"d": 2, "L": 2, "q": 0.5, "options": {"map": "H", "iterations": 30}}, "renorm.csv"),
        ("sim", {"d": 1, "L": 4, "q": 0.3, "seed": 5, "options": {"t_end": 5.0}}, "sim.csv"),
        ("persist", {"d": 1, "L": 3, "q": 0.3, "engine": "both", "replicas": 400,
                     "seed": 2, "options": {"t_grid": [0.5, 1.0]}}, "persist_exact.csv"),
        ("flow", {"d": 2, "L": 3, "q": 0.25,
                  "options": {"x": [3, 3], "V": {"lower": [2, 2], "upper": [2, 2]}}}, "flow.csv"),
    ],
)
def test_subcommand_smoke(tmp_path, command, payload, expect):
    payload = {"experiment": command, **payload, "out": str(tmp_path / "out")}
    cfg = _write(tmp_path, "c.json", payload)
    assert main([command, "--config", cfg]) == EXIT_OK
    assert (tmp_path / "out" / expect).exists()
    manifest = json.loads((tmp_path / "out" / "manifest.json").read_text())
    for entry in manifest["files"]:
        assert (tmp_path / "out" / entry["file"]).exists()


def test_csv_round_trip_17_digits(tmp_path):
    from eastlab.reporting import write_csv

    val = 1.0 / 3.0
    path = write_csv(tmp_path / "x.csv", ["v"], [(val,)])
    _, rows = read_csv(path)
    assert float(rows[0][0]) == val
    assert fmt(val) == "0.33333333333333331"


def test_slope_fit_exact_line_and_errors():
    pts = [(t, 2.0 * t + 1.0) for t in (1.0, 2.0, 3.0, 4.0, 5.0)]
    fit = slope_fit(pts)
    assert fit.slope == pytest.approx(2.0, abs=1e-12)
    assert fit.residual_std == pytest.approx(0.0, abs=1e-10)
    with pytest.raises(ValueError, match="degenerate"):
        slope_fit([(1.0, 0.0), (1.0, 1.0), (1.0, 2.0), (1.0, 3.0)])
    with pytest.raises(ValueError, match="at least 4"):
        slope_fit([(0.0, 0.0), (1.0, 1.0), (2.0, 2.0)])


def test_slope_fit_noisy_synthetic_within_ci():
    rng = np.random.default_rng(12)
    n_target = 3.0
    pts = [(t, n_target * t - 4.5 + rng.normal(0, 0.05)) for t in np.linspace(8, 16, 9)]
    fit = slope_fit(pts)
    assert fit.covers(n_target)


def test_config_validation_messages():
    with pytest.raises(ConfigError, match="experiment"):
        parse_config({"d": 1, "L": 2, "q": 0.5})
    with pytest.raises(ConfigError, match="q"):
        parse_config({"experiment": "x", "d": 1, "L": 2})
    with pytest.raises(ConfigError, match="ergodic|boundary"):
        parse_config({"experiment": "x", "d": 1, "L": 2, "q": 0.5, "bc": "weird"})
    with pytest.raises(ConfigError, match="sweep"):
        parse_config(
            {"experiment": "x", "d": 1, "L": 2,
             "q_sweep": {"q0": 0.5, "ratio": 2.0, "count": 5}}
        )
    cfg = parse_config({"experiment": "x", "d": 1, "L": 2, "q": 0.5})
    assert cfg.engine == "exact" and cfg.q_values == (0.5,)
