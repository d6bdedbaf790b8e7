import math

import numpy as np
import pytest

from eastlab.lattice import Box, BoundaryCondition, ModelParams
from eastlab.exact import build_generator, spectral_gap
from eastlab.renorm import (
    BlockSpec,
    block_generator,
    build_arborescence,
    corner_resistance,
    energetic_bottleneck,
    flow_recursion,
    gap_equality_check,
    h_map,
    knight_classes,
    midpoint_containment,
    multiscale_schedule,
    one_step_factor,
    product_factor_log2,
    reachable_set,
    renorm_iterate,
    shell_projection,
    telescoped_factor_log2,
    tree_gap_comparison,
    windows_nested,
)


# ----------------------------------------------------------------- blocks


def test_block_identity_when_ell_is_one():
    rep = gap_equality_check(Box.cube(3, 1), 1, ModelParams(0.2))
    assert rep.spec.q_star == pytest.approx(0.2)
    assert rep.difference <= 1e-12


@pytest.mark.parametrize("J,q", [(2, 0.2), (3, 0.1)])
def test_block_gap_equality(J, q):
    rep = gap_equality_check(Box.cube(J, 1), 2, ModelParams(q))
    assert rep.difference <= 1e-9


def test_block_generator_reversible():
    bg = block_generator(Box.cube(2, 1), 2, ModelParams(0.3))
    import scipy.sparse as sp

    C = sp.diags(bg.pi) @ bg.L
    assert np.abs((C - C.T).toarray()).max() <= 1e-14


def test_bonferroni_bracket():
    for ell, d, q in ((2, 1, 0.1), (3, 1, 0.02), (2, 2, 0.05)):
        spec = BlockSpec(ell, d, q)
        lo, hi = spec.bonferroni_bracket()
        if q * ell**d <= 1.0:
            assert lo <= spec.q_star <= hi
        assert 0.0 < spec.q_star < 1.0


def test_block_size_cap():
    with pytest.raises(ValueError, match="caps"):
        block_generator(Box.cube(9, 1), 2, ModelParams(0.3))  # 18 sites


# ------------------------------------------------------------------ reach


def test_reach_examples():
    rs = reachable_set(Box.cube(8, 1), 3)
    assert (rs.X, rs.Y) == (4, 7)
    rs = reachable_set(Box.cube(3, 2), 2)
    assert (rs.X, rs.Y) == (2, 3)
    rs = reachable_set(Box.cube(2, 2), 1)
    assert (rs.X, rs.Y) == (1, 1)
    assert len(rs.states) == 2  # full and the single adjacent vacancy


def test_reach_nested_in_budget():
    box = Box.cube(6, 1)
    prev = None
    for m in range(1, 4):
        rs = reachable_set(box, m)
        if prev is not None:
            assert prev <= rs.states
        prev = rs.states


def test_shell_projection_examples():
    box = Box.cube(3, 2)
    full = (1 << 9) - 1
    bits, n = shell_projection(box, full)
    assert bits == (1 << n) - 1
    one_vac = full ^ (1 << box.index((2, 1)))
    bits, n = shell_projection(box, one_vac)
    assert n == 5
    assert bits == ((1 << n) - 1) ^ (1 << 1)  # shell index a=2 is vacant


def test_shell_projection_never_increases_vacancies():
    rng = np.random.default_rng(0)
    box = Box.cube(3, 2)
    for _ in range(10_000):
        bits = int(rng.integers(0, 1 << 9))
        proj, n = shell_projection(box, bits)
        assert bin(proj).count("0b") == 1
        vac_in = 9 - bin(bits).count("1")
        vac_out = n - bin(proj).count("1")
        assert vac_out <= vac_in


def test_shell_projection_maps_reachable_to_reachable():
    box = Box.cube(3, 2)
    m = 2
    rs = reachable_set(box, m)
    n_shell = box.l1_diameter + 1
    line = Box.cube(n_shell, 1)
    rs1 = reachable_set(line, m)
    for s in rs.states:
        proj, _ = shell_projection(box, s)
        assert proj in rs1.states


def test_energetic_bottleneck_d1():
    box = Box.cube(3, 1)
    rep = energetic_bottleneck(box, 2, ModelParams(0.2))
    # the corner vacancy is unreachable with two vacancies: X(2) = 2 < 3
    corner_only = ((1 << 3) - 1) ^ (1 << box.index((3,)))
    assert corner_only not in rep.reach.states
    assert rep.pi_V >= 0.8**3 - 1e-12  # contains the full state
    assert rep.pi_Vc >= 0.2 * 0.8**2 - 1e-12  # misses the corner state
    assert rep.dirichlet_exact <= rep.dirichlet_bound_axis + 1e-15
    assert rep.lower_bound <= rep.relaxation_time * (1 + 1e-9)


def test_energetic_bottleneck_d2_general_bound():
    rep = energetic_bottleneck(Box.cube(2, 2), 2, ModelParams(0.15))
    assert rep.dirichlet_exact <= rep.dirichlet_bound_general + 1e-15
    assert rep.lower_bound <= rep.relaxation_time * (1 + 1e-9)


# ----------------------------------------------------------------- knight


@pytest.mark.parametrize(
    "window,expected",
    [
        (Box((0,), (10,)), 2),
        (Box((0, 0), (12, 12)), 3),
        (Box((0, 0, 0), (6, 6, 6)), 4),
    ],
)
def test_knight_class_counts(window, expected):
    kc = knight_classes(window)
    assert kc.class_count == expected
    assert sum(len(c) for c in kc.classes) == window.site_count


def test_knight_witness_is_injective():
    kc = knight_classes(Box((0, 0), (8, 8)))
    seen = set()
    for site, key in kc.witness.items():
        assert key not in seen
        seen.add(key)


# ------------------------------------------------------------------- tree


def test_arborescence_longest_branch():
    assert build_arborescence(Box.cube(3, 2)).longest_branch_vertices == 5
    assert build_arborescence(Box.cube(4, 3)).longest_branch_vertices == 10
    assert build_arborescence(Box.cube(5, 1)).longest_branch_vertices == 5


def test_tree_equals_path_in_d1():
    rep = tree_gap_comparison(Box.cube(4, 1), ModelParams(0.3))
    assert rep.tree_gap.gap == pytest.approx(rep.east_min_gap.gap, abs=1e-12)


def test_tree_relaxes_no_faster():
    rep = tree_gap_comparison(Box.cube(2, 2), ModelParams(0.3))
    assert rep.longest_branch_vertices == 3
    assert rep.tree_gap.gap <= rep.east_min_gap.gap + 1e-12


# ------------------------------------------------------------------- maps


def test_map_values():
    t = renorm_iterate("theorem-coefficient", 1.0, 2, 1)
    assert t.values[1] == pytest.approx(2.0 / 3.0, abs=1e-15)
    t = renorm_iterate("theorem-coefficient", 0.5, 2, 3)
    assert all(v == pytest.approx(0.5, abs=1e-15) for v in t.values)
    assert h_map(1.0, 2) == pytest.approx(1.5)
    assert h_map(2.0, 2) == pytest.approx(2.0)


def test_map_domains():
    with pytest.raises(ValueError):
        renorm_iterate("theorem-coefficient", 0.4, 2, 1)  # below 1/d
    with pytest.raises(ValueError):
        renorm_iterate("finite-volume-H", 2.5, 2, 1)  # above the fixed point
    with pytest.raises(ValueError):
        renorm_iterate("nonsense", 1.0, 2, 1)
    with pytest.raises(ValueError):
        renorm_iterate("theorem-coefficient", 1.0, 1, 1)  # needs d >= 2


def test_map_convergence_rate():
    for d in (2, 3):
        t = renorm_iterate("theorem-coefficient", 1.0, d, 200)
        errs = t.scaled_errors()
        assert max(errs) < 4.0
        assert abs(t.values[-1] - 1.0 / d) < 1e-2


# --------------------------------------------------------------- schedule


def test_schedule_closed_forms_and_examples():
    s = multiscale_schedule(4)
    assert s.upper[1] == pytest.approx(19.75, abs=1e-12)
    assert s.lower[0] == 1.0 and s.upper[0] == 11.0
    assert s.m0 == 4


@pytest.mark.parametrize("N", list(range(1, 21)))
def test_schedule_windows_nested(N):
    assert windows_nested(multiscale_schedule(N))


def test_midpoint_containment_sampled():
    rng = np.random.default_rng(3)
    for N in (4, 8, 16):
        s = multiscale_schedule(N)
        for m in range(1, N + 1):
            lo = math.ceil(s.lower[m])
            hi = math.floor(s.upper[m])
            for x in {lo, hi, (lo + hi) // 2} | {
                int(v) for v in rng.integers(lo, hi + 1, size=5)
            }:
                half = 2 ** (m - 1) / N
                ylo = math.ceil((x - half) / 2)
                yhi = math.floor((x + half) / 2)
                for y in {ylo, yhi}:
                    if abs(2 * y - x) <= half:  # skip x with no admissible y
                        assert midpoint_containment(s, m, x, y)


def test_resistance_recursion_factors():
    # the telescoped closed form dominates the exact product of the steps
    for q, d, N in ((0.1, 2, 8), (0.03, 2, 12), (0.1, 3, 8)):
        s = multiscale_schedule(N)
        m0 = s.m0
        if m0 >= N:
            continue
        assert telescoped_factor_log2(q, d, N, m0) >= product_factor_log2(q, d, N, m0) - 1e-9
        for m in range(m0 + 1, N + 1):
            assert one_step_factor(q, d, N, m) > 0


# ------------------------------------------------------------------ flows


def test_flow_recursion_acceptance_instance():
    V = Box((2, 2), (2, 2))
    for q in (0.25, 0.1):
        rep = flow_recursion((3, 3), V, ModelParams(q))
        assert rep.max_divergence_off <= 1e-10
        assert rep.strength == pytest.approx(1.0, abs=1e-10)
        assert rep.recursion_holds
        assert rep.resistance_x <= rep.total_energy  # Thomson
        assert rep.total_energy <= rep.recursion_rhs + 1e-9
        piece = rep.pieces[0]
        assert piece.target_shifted == (1, 2)
        if rep.energy_precondition:
            assert piece.energy_bounds_hold(q)


def test_flow_recursion_energy_bounds_hold_at_small_q():
    rep = flow_recursion((3, 3), Box((2, 2), (2, 2)), ModelParams(0.1))
    assert rep.energy_precondition
    assert all(p.energy_bounds_hold(0.1) for p in rep.pieces)


def test_flow_pieces_perpendicular_for_distinct_midpoints():
    V = Box((2, 2), (2, 3))  # two midpoints
    rep = flow_recursion((4, 4), V, ModelParams(0.2))
    assert rep.reversal_supports_disjoint
    assert rep.carry_supports_disjoint
    assert rep.max_divergence_off <= 1e-10
    assert rep.strength == pytest.approx(1.0, abs=1e-10)
    assert rep.recursion_holds


def test_flow_recursion_rejects_bad_inputs():
    with pytest.raises(ValueError, match="at least 3"):
        flow_recursion((2, 3), Box((2, 2), (2, 2)), ModelParams(0.2))
    with pytest.raises(ValueError, match="inside"):
        flow_recursion((3, 3), Box((1, 2), (2, 2)), ModelParams(0.2))


def test_corner_resistance_single_site():
    # one site with the frozen boundary vacancy: C = pq, R = 1/(pq)
    mp = ModelParams(0.3)
    assert corner_resistance((1,), mp) == pytest.approx(1.0 / (0.3 * 0.7), rel=1e-12)
