"""Acceptance suite: the exit criteria of the laboratory, one function each.

Every criterion pins its tolerances here; run_all prints one pass/fail line
per criterion.  Criterion 8 carries a documented exception: the three
per-piece energy bounds of the flow recursion are claimed only under the
precondition |Lambda_x| <= 1/q, which the q = 0.25 instance violates, and
there they fail by construction (the exact prefactors are powers of 1/p
above e); the suite asserts the bounds whenever the precondition holds and
reports the measured ratios either way.  See the decisions ledger for the
analysis.
"""

from __future__ import annotations

import importlib.resources as resources
import itertools
import json
import math
import tempfile
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .lattice import Box, BoundaryCondition, ModelParams, east_boundary


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: str
    exceptions: tuple[str, ...] = ()
    seconds: float = 0.0


def _load_golden(name: str) -> dict:
    ref = resources.files("eastlab").joinpath("data").joinpath(name)
    return json.loads(ref.read_text())


def _boxes_up_to(max_sites: int = 9, max_d: int = 3):
    for d in range(1, max_d + 1):
        for dims in itertools.combinations_with_replacement(range(1, max_sites + 1), d):
            if math.prod(dims) <= max_sites:
                yield Box((1,) * d, dims)


def criterion_01_exact_equalities() -> CriterionResult:
    """Single-site gap, hitting identity, capacity = 1/flow-energy at 1e-9."""
    from .exact import (
        build_generator,
        hitting_set_vacancy,
        mean_hitting_time,
        spectral_gap,
        thomson_check,
    )

    qs = (0.5, 0.25, 0.1)
    worst_gap = 0.0
    for q in qs:
        b = Box.cube(1, 1)
        res = spectral_gap(build_generator(b, BoundaryCondition.minimal(b), ModelParams(q)))
        worst_gap = max(worst_gap, abs(res.gap - 1.0))
    checked = 0
    worst_hit = 0.0
    worst_thomson = 0.0
    for box in _boxes_up_to(9):
        for label in ("minimal:e1", "maximal"):
            sigma = BoundaryCondition.from_label(box, label)
            for q in qs:
                R = build_generator(box, sigma, ModelParams(q))
                full = R.n_states - 1
                B = hitting_set_vacancy(R, box.upper)
                h = mean_hitting_time(R, full, B, check_tol=1e-9)
                worst_hit = max(worst_hit, h.relative_error)
                rep = thomson_check(R, [full], B)
                r = 1.0 / rep.capacity
                worst_thomson = max(
                    worst_thomson, abs(rep.equilibrium_energy - r) / max(r, 1.0)
                )
                checked += 1
    ok = worst_gap <= 1e-9 and worst_hit <= 1e-9 and worst_thomson <= 1e-9
    return CriterionResult(
        1,
        "exact-equalities",
        ok,
        f"{checked} instances; |gap-1|<={worst_gap:.2e}, hitting identity "
        f"rel err<={worst_hit:.2e}, |E(flow)-R|/R<={worst_thomson:.2e}",
    )


def criterion_02_block_gap_equality() -> CriterionResult:
    """|gap(block) - gap(East, q*)| <= 1e-9 for d=1, ell=2, |J| in {2,3}."""
    from .renorm import gap_equality_check

    worst = 0.0
    for J in (2, 3):
        for q in (0.3, 0.1, 0.03):
            rep = gap_equality_check(Box.cube(J, 1), 2, ModelParams(q))
            worst = max(worst, rep.difference)
    return CriterionResult(
        2, "block-gap-equality", worst <= 1e-9, f"max |gap diff| = {worst:.3e}"
    )


def criterion_03_reachability() -> CriterionResult:
    """X(m) = 2^{m-1}, Y(m) = 2^m - 1 exactly."""
    from .renorm import reachable_set

    bad = []
    for m in range(1, 5):
        rs = reachable_set(Box.cube(15, 1), m)
        if rs.X != 2 ** (m - 1) or rs.Y != 2**m - 1:
            bad.append((1, m, rs.X, rs.Y))
    for m in range(1, 4):
        rs = reachable_set(Box.cube(7, 2), m)
        if rs.X != 2 ** (m - 1) or rs.Y != 2**m - 1:
            bad.append((2, m, rs.X, rs.Y))
    return CriterionResult(
        3,
        "vacancy-budget-reach",
        not bad,
        "X(m)=2^{m-1}, Y(m)=2^m-1 for d=1 m<=4 and d=2 m<=3"
        + (f"; violations {bad}" if bad else ""),
    )


def _all_ergodic_explicit(box: Box):
    bd = east_boundary(box)
    for bits in range(1 << len(bd)):
        assign = {x: (bits >> i) & 1 for i, x in enumerate(bd)}
        try:
            yield BoundaryCondition.explicit(box, assign)
        except ValueError:
            continue


def criterion_04_monotonicity() -> CriterionResult:
    """max <= sigma <= min relaxation-time sandwich; T_rel monotone in L."""
    from .exact import build_generator, spectral_gap

    box = Box.cube(2, 2)
    violations = []
    for q in (0.5, 0.1):
        mp = ModelParams(q)
        tmax = spectral_gap(build_generator(box, BoundaryCondition.maximal(box), mp)).relaxation_time
        tmin = spectral_gap(build_generator(box, BoundaryCondition.minimal(box), mp)).relaxation_time
        count = 0
        for sigma in _all_ergodic_explicit(box):
            t = spectral_gap(build_generator(box, sigma, mp)).relaxation_time
            count += 1
            if not (tmax <= t * (1 + 1e-12) and t <= tmin * (1 + 1e-12)):
                violations.append((q, sigma.values, t, tmax, tmin))
        if count != 12:  # 2^4 assignments, 12 of them ergodic
            violations.append((q, "ergodic count", count))
        prev = 0.0
        for L in range(1, 6):
            b = Box.cube(L, 1)
            t = spectral_gap(build_generator(b, BoundaryCondition.minimal(b), mp)).relaxation_time
            if t < prev * (1 - 1e-12):
                violations.append((q, "L-monotonicity", L, t, prev))
            prev = t
    return CriterionResult(
        4,
        "monotonicity",
        not violations,
        "12 ergodic boundary conditions sandwiched at q in {0.5, 0.1}; "
        "T_rel non-decreasing for d=1, L<=5"
        + (f"; violations {violations}" if violations else ""),
    )


def criterion_05_bottleneck() -> CriterionResult:
    """Removal dynamics endpoints, golden sets, trace contracts, masses,
    and the cut lower bound against the exact relaxation time."""
    from .bottleneck import (
        bottleneck_boundary,
        core_states,
        corner_state,
        full_state,
        removal_trace,
        special_vacancies,
    )
    from .exact import bottleneck_lower_bound, build_generator, spectral_gap

    problems = []
    notes = []
    for d, L in ((1, 2), (2, 2), (1, 4)):
        box = Box.cube(L, d)
        n_states = 1 << box.site_count
        finals = {removal_trace(box, s).final for s in range(n_states)}
        if not finals <= {full_state(box), corner_state(box)}:
            problems.append((d, L, "endpoint"))
        golden = _load_golden(f"bottleneck_golden_d{d}_L{L}.json")
        core = sorted(core_states(box))
        boundary = bottleneck_boundary(box)
        if core != golden["core"]:
            problems.append((d, L, "core mismatch"))
        if sorted([s, list(x)] for s, x in boundary) != sorted(golden["boundary"]):
            problems.append((d, L, "boundary mismatch"))
        n = L.bit_length() - 1
        for s, x in boundary:
            tr = special_vacancies(box, s, x)  # contracts asserted inside
            if tr.S < n + 1:
                problems.append((d, L, "short trace", s, x))
        member = np.zeros(n_states, dtype=bool)
        member[core] = True
        for q in (0.1, 0.05, 0.01):
            mp = ModelParams(q)
            R = build_generator(box, BoundaryCondition.maximal(box), mp)
            mass = float(R.pi[member].sum())
            if not (q / 2.0 <= mass < 0.5):
                problems.append((d, L, q, "mass", mass))
            lower = bottleneck_lower_bound(R, member)
            trel = spectral_gap(R).relaxation_time
            if lower > trel * (1 + 1e-9):
                problems.append((d, L, q, "bound exceeds exact", lower, trel))
            notes.append(f"d={d} L={L} q={q}: bound/exact={lower / trel:.3f}")
    return CriterionResult(
        5,
        "bottleneck-machinery",
        not problems,
        ("all endpoints in {full, corner}; goldens matched; traces certified; "
         + "; ".join(notes[:3]) + " ...")
        + (f"; PROBLEMS {problems}" if problems else ""),
    )


def criterion_06_slope_trends() -> CriterionResult:
    """Leading-order slopes of log2(time scale) against theta_q."""
    from .exact import build_generator, hitting_set_vacancy, mean_hitting_time, spectral_gap
    from .reporting import slope_fit

    qs = [2.0**-k for k in range(8, 17)]
    box = Box.cube(2, 2)
    sigma = BoundaryCondition.minimal(box)
    pts = []
    for q in qs:
        mp = ModelParams(q)
        R = build_generator(box, sigma, mp)
        h = mean_hitting_time(R, R.n_states - 1, hitting_set_vacancy(R, (2, 2)))
        pts.append((mp.theta_q, math.log2(h.value)))
    s_hit = slope_fit(pts).slope

    def trel_slope(box, sigma):
        pts = []
        for q in qs:
            mp = ModelParams(q)
            res = spectral_gap(build_generator(box, sigma, mp))
            pts.append((mp.theta_q, math.log2(res.relaxation_time)))
        return slope_fit(pts).slope

    b1 = Box.cube(2, 1)
    s_min = trel_slope(b1, BoundaryCondition.minimal(b1))
    s_max = trel_slope(box, BoundaryCondition.maximal(box))
    ok = abs(s_hit - 2.0) <= 0.15 and abs(s_min - 1.0) <= 0.10 and abs(s_max - 1.0) <= 0.15
    return CriterionResult(
        6,
        "slope-trends",
        ok,
        f"hitting d=2 x=(2,2): {s_hit:.4f} (2 +- 0.15); T_rel min d=1 L=2: "
        f"{s_min:.4f} (1 +- 0.1); T_rel max d=2 L=2: {s_max:.4f} (1 +- 0.15)",
    )


def criterion_07_persistence() -> CriterionResult:
    """Persistence/autocorrelation inequalities and the decay-rate sandwich."""
    from .exact import (
        autocorrelation,
        build_generator,
        fit_decay_rate,
        persistence_exact,
        spectral_gap,
    )

    slack = 1e-10
    ts = np.array([0.5, 1.0, 2.0, 5.0])
    problems = []
    for L in (1, 2, 3, 4):
        box = Box.cube(L, 1)
        sigma = BoundaryCondition.minimal(box)
        for q in (0.3, 0.5):
            mp = ModelParams(q)
            p = mp.p
            F = persistence_exact(box, sigma, mp, ts)
            A = autocorrelation(box, sigma, mp, ts)
            Ah = autocorrelation(box, sigma, mp, ts / 2.0)
            gap = spectral_gap(build_generator(box, sigma, mp)).gap
            if not np.all(Ah**2 / max(p, q) ** 2 <= F + slack):
                problems.append((L, q, "lower"))
            if not np.all(F <= A / min(p, q) + slack):
                problems.append((L, q, "upper"))
            if not np.all(F <= np.exp(-gap * ts) / min(p, q) + slack):
                problems.append((L, q, "gap-envelope"))
    box = Box.cube(4, 1)
    sigma = BoundaryCondition.minimal(box)
    mp = ModelParams(0.3)
    gap = spectral_gap(build_generator(box, sigma, mp)).gap
    grid = np.linspace(1.0, 48.0, 95)
    F = persistence_exact(box, sigma, mp, grid)
    rate, window = fit_decay_rate(grid, F)
    rate_ok = 0.95 * gap <= rate <= 1.05 * gap
    if not rate_ok:
        problems.append(("decay", rate, gap))
    return CriterionResult(
        7,
        "persistence",
        not problems,
        f"inequalities at t in {{0.5,1,2,5}} on L<=4, q in {{0.3,0.5}} at 1e-10 "
        f"slack; fitted rate {rate:.6f} vs gap {gap:.6f} on window "
        f"({window[0]:g}, {window[1]:g}]"
        + (f"; PROBLEMS {problems}" if problems else ""),
    )


def criterion_08_flow_recursion() -> CriterionResult:
    """Composite unit flow: divergence, strength, recursion; energy bounds
    under their size precondition (see module docstring for q = 0.25)."""
    from .renorm import flow_recursion

    V = Box((2, 2), (2, 2))
    problems = []
    exceptions = []
    for q in (0.25, 0.1):
        rep = flow_recursion((3, 3), V, ModelParams(q))
        if rep.max_divergence_off > 1e-10:
            problems.append((q, "divergence", rep.max_divergence_off))
        if abs(rep.strength - 1.0) > 1e-10:
            problems.append((q, "strength", rep.strength))
        if not rep.recursion_holds:
            problems.append((q, "recursion", rep.resistance_x, rep.recursion_rhs))
        bounds = all(p.energy_bounds_hold(q) for p in rep.pieces)
        if rep.energy_precondition:
            if not bounds:
                problems.append((q, "energy bounds under precondition"))
        elif not bounds:
            pc = rep.pieces[0]
            exceptions.append(
                f"q={q}: |Lambda_x|=9 > 1/q={1 / q:.0f}; energy/resistance ratios "
                f"{pc.energy_mimic / pc.resistance_y:.3f}, "
                f"{pc.energy_reversal / pc.resistance_y:.3f}, "
                f"{pc.energy_carry / pc.resistance_shifted:.3f} against e={math.e:.3f}, "
                f"e/q={math.e / q:.3f}, e/q={math.e / q:.3f}"
            )
    return CriterionResult(
        8,
        "flow-recursion",
        not problems,
        "divergence <= 1e-10, unit strength, recursion inequality at "
        "q in {0.25, 0.1}; energy bounds asserted where |Lambda_x| <= 1/q",
        tuple(exceptions),
    )


def criterion_09_renorm_maps() -> CriterionResult:
    """Both scalar maps converge to their quadratic fixed points."""
    from .renorm import renorm_iterate

    problems = []
    for d in (2, 3):
        t = renorm_iterate("theorem-coefficient", 1.0, d, 200)
        if not all(a > b for a, b in zip(t.values, t.values[1:])):
            problems.append((d, "not decreasing"))
        if abs(t.values[50] - t.fixed_point) > 0.05:
            problems.append((d, "coefficient l50", t.values[50]))
        if max(t.scaled_errors()) > 4.0:
            problems.append((d, "coefficient k*err unbounded"))
        h = renorm_iterate("finite-volume-H", 1.0, d, 200)
        if not all(a < b for a, b in zip(h.values, h.values[1:])):
            problems.append((d, "H not increasing"))
        if abs(h.values[50] - float(d)) > 0.05:
            problems.append((d, "H l50", h.values[50]))
        if max(h.scaled_errors()) > 4.0:
            problems.append((d, "H k*err unbounded"))
    return CriterionResult(
        9,
        "renorm-maps",
        not problems,
        "coefficient map -> 1/d and H map -> d, monotone, |l50 - fp| <= 0.05, "
        "k|l_k - fp| bounded for k <= 200, d in {2, 3}"
        + (f"; PROBLEMS {problems}" if problems else ""),
    )


def criterion_10_mc_validity() -> CriterionResult:
    """MC agrees with exact within 3 stderr at 1e5 replicas; byte-stable CSV."""
    from .exact import (
        build_generator,
        hitting_set_vacancy,
        mean_hitting_time,
        persistence_exact,
    )
    from .mc import estimate_hitting, estimate_persistence
    from .config import parse_config
    from .cli import run_experiment

    replicas = 100_000
    problems = []
    notes = []
    hit_cases = [
        (Box.cube(1, 1), "minimal:e1", 0.2, (1,), 101),
        (Box.cube(2, 2), "minimal:e1", 0.1, (2, 2), 102),
        (Box.cube(3, 2), "maximal", 0.25, (3, 3), 103),
    ]
    for box, label, q, x, seed in hit_cases:
        sigma = BoundaryCondition.from_label(box, label)
        mp = ModelParams(q)
        R = build_generator(box, sigma, mp)
        exact = mean_hitting_time(R, R.n_states - 1, hitting_set_vacancy(R, x)).value
        est = estimate_hitting(box, sigma, mp, x, replicas, seed)
        z = (est.mean - exact) / est.stderr
        notes.append(f"hit {box.shape} {label} q={q}: z={z:+.2f}")
        if abs(z) > 3.0:
            problems.append(("hitting", box.shape, label, q, z))
    box = Box.cube(3, 1)
    sigma = BoundaryCondition.minimal(box)
    mp = ModelParams(0.3)
    ts = [0.5, 1.0, 2.0]
    F = persistence_exact(box, sigma, mp, ts)
    est = estimate_persistence(box, sigma, mp, ts, replicas, 104)
    for t, fe, fh, se in zip(ts, F, est.survival, est.stderr):
        z = (fh - fe) / se
        if abs(z) > 3.0:
            problems.append(("persistence", t, z))
    notes.append("persistence L=3 ok")

    cfg_raw = {
        "experiment": "mc-repro",
        "d": 2,
        "L": 2,
        "bc": "minimal:e1",
        "q": 0.1,
        "engine": "mc",
        "replicas": 2000,
        "seed": 424242,
        "options": {"x": [2, 2]},
    }
    blobs = []
    for _ in range(2):
        with tempfile.TemporaryDirectory() as tmp:
            cfg = parse_config({**cfg_raw, "out": tmp})
            run_experiment("hit", cfg)
            blobs.append((Path(tmp) / "hit_mc.csv").read_bytes())
    if blobs[0] != blobs[1]:
        problems.append(("csv not byte-identical",))
    return CriterionResult(
        10,
        "mc-validity",
        not problems,
        f"{replicas} replicas; " + "; ".join(notes)
        + "; fixed-seed CSV byte-identical"
        + (f"; PROBLEMS {problems}" if problems else ""),
    )


def criterion_11_anisotropy() -> CriterionResult:
    """Diagonal l1 reach of the updated set dominates the axis reach."""
    from .mc import simulate, snapshot_extents

    L = 500
    box = Box.cube(L, 2)
    sigma = BoundaryCondition.minimal(box)
    mp = ModelParams(0.25)
    problems = []
    notes = []
    for seed in range(1, 6):
        t_end = 3.5 * L
        tr = simulate(box, sigma, mp, None, t_end, seed)
        while snapshot_extents(tr).span < L // 2:
            t_end *= 1.5
            tr = simulate(box, sigma, mp, None, t_end, seed)
        ext = snapshot_extents(tr)
        notes.append(f"seed {seed}: diag={ext.diagonal} axis={ext.axis} span={ext.span}")
        if ext.diagonal < ext.axis:
            problems.append((seed, ext.diagonal, ext.axis))
    return CriterionResult(
        11,
        "front-anisotropy",
        not problems,
        f"L={L}, q=0.25, updated region spans >= L/2; " + "; ".join(notes)
        + (f"; PROBLEMS {problems}" if problems else ""),
    )


def criterion_12_staircase_sums() -> CriterionResult:
    """Exact staircase sums against both constants; the stated one is flagged
    wherever enumeration exceeds it."""
    from .bottleneck import (
        staircase_sum,
        staircase_sum_chain_bound,
        staircase_sum_displayed_bound,
    )

    problems = []
    flagged = []
    for d in (1, 2, 3):
        for n in range(2, 8):
            s = staircase_sum(n, d)
            if s > staircase_sum_chain_bound(n, d):
                problems.append((n, d, "chain bound violated", s))
            if s > staircase_sum_displayed_bound(n, d):
                flagged.append((n, d, s))
    if (2, 2, 3) not in flagged:
        problems.append(("expected flag (n=2, d=2, sum=3) missing", flagged))
    return CriterionResult(
        12,
        "staircase-sums",
        not problems,
        f"n <= 7, d <= 3 exact; all below the chain bound; stated constant "
        f"exceeded at {[(n, d) for n, d, _ in flagged]}"
        + (f"; PROBLEMS {problems}" if problems else ""),
    )


CRITERIA = [
    criterion_01_exact_equalities,
    criterion_02_block_gap_equality,
    criterion_03_reachability,
    criterion_04_monotonicity,
    criterion_05_bottleneck,
    criterion_06_slope_trends,
    criterion_07_persistence,
    criterion_08_flow_recursion,
    criterion_09_renorm_maps,
    criterion_10_mc_validity,
    criterion_11_anisotropy,
    criterion_12_staircase_sums,
]


def format_result(r: CriterionResult) -> str:
    line = f"criterion {r.number:02d} {r.name}: {'PASS' if r.passed else 'FAIL'} ({r.seconds:.1f}s) - {r.detail}"
    for e in r.exceptions:
        line += f"\n    documented exception: {e}"
    return line


NUMBERED = {i + 1: fn for i, fn in enumerate(CRITERIA)}


def run_all(numbers=None, stream=print) -> list[CriterionResult]:
    results = []
    for num, fn in sorted(NUMBERED.items()):
        if numbers is not None and num not in numbers:
            continue
        t0 = time.time()
        res = fn()
        res.seconds = time.time() - t0
        if stream is not None:
            stream(format_result(res))
        results.append(res)
    return results
