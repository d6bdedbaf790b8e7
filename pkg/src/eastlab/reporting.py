"""CSV/manifest emission and ordinary least squares for slope trends.

All floats are written with 17 significant digits so round-tripping is
lossless; every experiment directory carries a manifest listing the sha256 of
each emitted file plus the configuration hash, so artifacts are
self-describing and byte-stable for a fixed seed.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import stats


def fmt(value) -> str:
    if isinstance(value, float) or isinstance(value, np.floating):
        return format(float(value), ".17g")
    return str(value)


def write_csv(path, header: list[str], rows) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])
    return path


def read_csv(path) -> tuple[list[str], list[list[str]]]:
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        header = next(r)
        return header, [row for row in r]


@dataclass(frozen=True)
class SlopeFit:
    """OLS fit of y against x with a 95% confidence interval on the slope."""

    n: int
    slope: float
    intercept: float
    ci_low: float
    ci_high: float
    residual_std: float

    def covers(self, target: float) -> bool:
        return self.ci_low <= target <= self.ci_high


def slope_fit(points) -> SlopeFit:
    """Least squares on (x, y) pairs; needs >= 4 points and spread abscissae."""
    pts = np.asarray(list(points), dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 4:
        raise ValueError("slope fit needs at least 4 (x, y) points")
    x, y = pts[:, 0], pts[:, 1]
    if np.ptp(x) == 0.0:
        raise ValueError("degenerate abscissae: all x equal")
    n = len(x)
    xm, ym = x.mean(), y.mean()
    sxx = float(np.sum((x - xm) ** 2))
    slope = float(np.sum((x - xm) * (y - ym)) / sxx)
    intercept = ym - slope * xm
    resid = y - (intercept + slope * x)
    dof = n - 2
    s2 = float(resid @ resid) / dof if dof > 0 else 0.0
    se = math.sqrt(s2 / sxx)
    tq = float(stats.t.ppf(0.975, dof)) if dof > 0 else math.inf
    return SlopeFit(
        n, slope, float(intercept), slope - tq * se, slope + tq * se, math.sqrt(s2)
    )


SLOPE_HEADER = ["experiment", "n_points", "slope", "intercept", "ci_low", "ci_high", "residual_std"]


def slope_row(experiment: str, fit: SlopeFit) -> list:
    return [experiment, fit.n, fit.slope, fit.intercept, fit.ci_low, fit.ci_high, fit.residual_std]


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def write_manifest(out_dir, config_raw: dict, files: list) -> Path:
    """Manifest with package/tool versions, config hash and per-file hashes."""
    import scipy

    import eastlab

    out_dir = Path(out_dir)
    cfg_blob = json.dumps(config_raw, sort_keys=True).encode()
    entries = []
    for f in sorted(Path(f) for f in files):
        entries.append({"file": f.name, "sha256": _sha256(f)})
    manifest = {
        "versions": {
            "eastlab": eastlab.__version__,
            "numpy": np.__version__,
            "scipy": scipy.__version__,
        },
        "config_sha256": hashlib.sha256(cfg_blob).hexdigest(),
        "files": entries,
    }
    path = out_dir / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return path
