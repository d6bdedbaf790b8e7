import json

import numpy as np
import pytest

from eastlab.lattice import (
    Box,
    BoundaryCondition,
    ModelParams,
    SpinConfig,
    constraint,
    east_boundary,
    stationary_weight,
)
from eastlab.config import parse_config


def test_east_boundary_d1():
    assert east_boundary(Box((1,), (3,))) == [(0,)]


def test_east_boundary_d2():
    got = set(east_boundary(Box.cube(2, 2)))
    assert got == {(0, 1), (0, 2), (1, 0), (2, 0)}
    assert (0, 0) not in got  # neither neighbour of (0,0) is in the box


def test_east_boundary_d3_unit_cube():
    got = set(east_boundary(Box.cube(1, 3)))
    assert got == {(0, 1, 1), (1, 0, 1), (1, 1, 0)}


def test_site_index_bijection():
    box = Box((0, 2, -1), (2, 4, 1))
    seen = set()
    for x in box.sites():
        i = box.index(x)
        assert box.site(i) == x
        seen.add(i)
    assert seen == set(range(box.site_count))


def test_canonical_order_last_coordinate_fastest():
    box = Box.cube(2, 2)
    assert [box.site(i) for i in range(4)] == [(1, 1), (1, 2), (2, 1), (2, 2)]


def test_constraint_examples():
    box = Box.cube(2, 2)
    mx = BoundaryCondition.maximal(box)
    ones = SpinConfig.all_ones(box)
    assert constraint(box, mx, ones, (1, 1)) == 1
    assert constraint(box, mx, ones, (2, 2)) == 0
    eta = SpinConfig.from_occupancies(
        box, {(1, 1): 1, (1, 2): 0, (2, 1): 1, (2, 2): 1}
    )
    assert constraint(box, mx, eta, (2, 2)) == 1


def test_constraint_never_reads_own_spin():
    box = Box.cube(2, 2)
    mx = BoundaryCondition.maximal(box)
    for bits in range(16):
        eta = SpinConfig(box, bits)
        for x in box.sites():
            assert constraint(box, mx, eta, x) == constraint(box, mx, eta.flip(x), x)


def test_constraint_outside_box_rejected():
    box = Box.cube(2, 2)
    mx = BoundaryCondition.maximal(box)
    with pytest.raises(ValueError):
        constraint(box, mx, SpinConfig.all_ones(box), (0, 1))


def test_maximal_dominates_every_ergodic_bc():
    box = Box.cube(2, 2)
    mx = BoundaryCondition.maximal(box)
    mn = BoundaryCondition.minimal(box)
    assert mx.dominates(mn)
    for bits in range(16):
        assign = {x: (bits >> i) & 1 for i, x in enumerate(east_boundary(box))}
        try:
            sig = BoundaryCondition.explicit(box, assign)
        except ValueError:
            continue
        assert mx.dominates(sig)
        for eta_bits in range(16):
            eta = SpinConfig(box, eta_bits)
            for x in box.sites():
                assert constraint(box, mx, eta, x) >= constraint(box, sig, eta, x)


def test_non_ergodic_rejected():
    box = Box.cube(2, 2)
    assign = {x: 1 for x in east_boundary(box)}
    with pytest.raises(ValueError, match="ergodic"):
        BoundaryCondition.explicit(box, assign)
    assign[(0, 2)] = 0  # vacancy, but not at lower_corner - e
    with pytest.raises(ValueError, match="ergodic"):
        BoundaryCondition.explicit(box, assign)


def test_minimal_has_single_vacancy_at_corner_neighbour():
    box = Box.cube(3, 2)
    mn = BoundaryCondition.minimal(box, 1)
    vac = [x for x, v in mn.values if v == 0]
    assert vac == [(1, 0)]


def test_stationary_weight_examples():
    box4 = Box.cube(4, 1)
    assert stationary_weight(SpinConfig.all_ones(box4), ModelParams(0.5)) == 0.0625
    box1 = Box.cube(1, 1)
    assert stationary_weight(SpinConfig(box1, 0), ModelParams(0.3)) == pytest.approx(0.3, abs=1e-15)
    box2 = Box.cube(2, 1)
    eta = SpinConfig.from_occupancies(box2, {(1,): 1, (2,): 0})
    assert stationary_weight(eta, ModelParams(0.1)) == pytest.approx(0.09, abs=1e-15)


@pytest.mark.parametrize("n_sites,q", [(4, 0.3), (8, 0.17), (12, 0.01)])
def test_stationary_weights_sum_to_one(n_sites, q):
    box = Box((1,), (n_sites,))
    mp = ModelParams(q)
    total = sum(stationary_weight(SpinConfig(box, b), mp) for b in range(1 << n_sites))
    assert total == pytest.approx(1.0, abs=1e-12)


def test_flip_is_involution():
    box = Box.cube(2, 2)
    eta = SpinConfig(box, 0b0110)
    assert eta.flip((1, 2)).flip((1, 2)) == eta


def test_theta_q():
    assert ModelParams(0.25).theta_q == pytest.approx(2.0, abs=1e-15)
    with pytest.raises(ValueError):
        ModelParams(1.0)


def test_packing_cap():
    with pytest.raises(ValueError, match="packing caps"):
        SpinConfig.all_ones(Box((1,), (64,)))


def test_config_example_from_docs():
    raw = json.loads(
        '{"experiment":"demo","d":2,"lower":[1,1],"upper":[4,4],'
        '"bc":"minimal:e1","q":0.01}'
    )
    cfg = parse_config(raw)
    assert cfg.box == Box((1, 1), (4, 4))
    assert cfg.bc_label == "minimal:e1"
    assert cfg.q_values == (0.01,)
    sig = cfg.boundary()
    assert sig.value((0, 1)) == 0
