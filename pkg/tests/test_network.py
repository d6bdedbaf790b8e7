import itertools

import numpy as np
import pytest

from eastlab.lattice import Box, BoundaryCondition, ModelParams, east_boundary
from eastlab.exact import (
    FlowField,
    build_generator,
    capacity,
    hitting_set_vacancy,
    mean_hitting_time,
    thomson_check,
)


def _single_site(q):
    box = Box.cube(1, 1)
    return build_generator(box, BoundaryCondition.minimal(box), ModelParams(q))


def test_single_site_capacity_and_resistance():
    R = _single_site(0.3)
    sol = capacity(R, [1], [0])
    assert sol.capacity == pytest.approx(0.21, abs=1e-14)
    assert sol.resistance == pytest.approx(1.0 / 0.21, rel=1e-14)
    assert sol.escape_form_capacity == pytest.approx(0.21, abs=1e-12)


def test_capacity_monotone_in_boundary_vacancies():
    """Adding boundary vacancies only adds conductance (Rayleigh)."""
    box = Box.cube(2, 2)
    mp = ModelParams(0.25)
    bd = east_boundary(box)
    full = 15
    B = [0b0111]  # vacancy at (2,2) only

    def cap_of(assign):
        sigma = BoundaryCondition.explicit(box, assign)
        return capacity(build_generator(box, sigma, mp), [full], B).capacity

    base = {x: 1 for x in bd}
    base[(0, 1)] = 0
    c0 = cap_of(base)
    for extra in bd:
        richer = dict(base)
        richer[extra] = 0
        assert cap_of(richer) >= c0 - 1e-13


def test_capacity_matches_brute_force_minimisation():
    """L=2 chain, A = {11}, B = {vacancy at site 2}: grid-minimise the
    Dirichlet form over the two free potential values."""
    box = Box.cube(2, 1)
    mp = ModelParams(0.25)
    R = build_generator(box, BoundaryCondition.minimal(box), mp)
    B = hitting_set_vacancy(R, (2,))  # states 0 and 1
    sol = capacity(R, [3], B)
    C = R.conductances().toarray()
    free = [s for s in range(4) if s not in (3, *B)]
    best = np.inf
    for vals in itertools.product(np.linspace(0.0, 1.0, 401), repeat=len(free)):
        h = np.zeros(4)
        h[3] = 1.0
        for s, v in zip(free, vals):
            h[s] = v
        d = sum(
            C[a, b] * (h[a] - h[b]) ** 2
            for a in range(4)
            for b in range(a + 1, 4)
            if C[a, b] > 0
        )
        best = min(best, d)
    assert sol.capacity <= best + 1e-12
    assert sol.capacity == pytest.approx(best, abs=1e-5)  # grid resolution


def test_thomson_single_site():
    R = _single_site(0.3)
    rep = thomson_check(R, [1], [0])
    assert rep.equilibrium_energy == pytest.approx(1.0 / 0.21, rel=1e-12)
    assert rep.energy_matches_resistance(1e-9)
    assert rep.strength == pytest.approx(1.0, abs=1e-12)


def test_equilibrium_flow_divergence_free():
    box = Box.cube(3, 1)
    R = build_generator(box, BoundaryCondition.minimal(box), ModelParams(0.4))
    thomson_check(R, [R.n_states - 1], hitting_set_vacancy(R, (3,)), div_tol=1e-12)


def test_suboptimal_flow_energy_at_least_resistance():
    """Any hand-built unit flow has energy >= R (Thomson)."""
    box = Box.cube(2, 1)
    mp = ModelParams(0.25)
    R = build_generator(box, BoundaryCondition.minimal(box), mp)
    B = hitting_set_vacancy(R, (2,))
    sol = capacity(R, [3], B)
    # route all current along 11 -> 01 -> 00: flip site 1, then site 2
    flow = FlowField(R)
    flow.add(3, 2, 1.0)
    flow.add(2, 0, 1.0)
    assert flow.strength([3]) == pytest.approx(1.0)
    assert flow.energy() >= sol.resistance - 1e-12


def test_flow_on_non_edge_rejected():
    box = Box.cube(2, 1)
    R = build_generator(box, BoundaryCondition.minimal(box), ModelParams(0.25))
    flow = FlowField(R)
    flow.add(1, 3, 1.0)  # flipping site 2 with site 1 occupied is not allowed
    with pytest.raises(ValueError, match="non-edge"):
        flow.energy()


def test_single_site_hitting_identity():
    R = _single_site(0.2)
    h = mean_hitting_time(R, 1, [0])
    assert h.value == pytest.approx(5.0, rel=1e-12)
    # identity pieces: R = 1/(pq), sum term = p, product 1/q
    assert h.capacity_identity_value == pytest.approx(5.0, rel=1e-9)


def test_hitting_from_distribution():
    R = _single_site(0.2)
    dist = np.array([0.0, 1.0])
    h = mean_hitting_time(R, dist, [0])
    assert h.value == pytest.approx(5.0, rel=1e-12)
    assert h.capacity_identity_value is None


def test_hitting_sandwich_quarter_constant():
    """c R <= E_1[tau_x] <= R with c = 1/4, at q = 0.25 on the 2x2 box."""
    box = Box.cube(2, 2)
    mp = ModelParams(0.25)
    for label in ("minimal:e1", "maximal"):
        R = build_generator(box, BoundaryCondition.from_label(box, label), mp)
        full = R.n_states - 1
        B = hitting_set_vacancy(R, (2, 2))
        h = mean_hitting_time(R, full, B)
        r = capacity(R, [full], B).resistance
        assert 0.25 * r <= h.value <= r * (1 + 1e-12)


def test_capacity_rejects_overlapping_sets():
    R = _single_site(0.3)
    with pytest.raises(ValueError, match="intersect"):
        capacity(R, [0], [0, 1])


def test_conjugate_gradient_path_matches_direct(monkeypatch):
    """Force the iterative branch of the restricted solver and compare with
    the direct factorisation on the same instance."""
    from eastlab.exact import network

    box = Box.cube(8, 1)  # 256 states
    mp = ModelParams(0.3)
    R = build_generator(box, BoundaryCondition.minimal(box), mp)
    full = R.n_states - 1
    B = hitting_set_vacancy(R, (8,))
    direct_cap = capacity(R, [full], B).capacity
    direct_hit = mean_hitting_time(R, full, B).value
    monkeypatch.setattr(network, "DIRECT_SOLVE_CUTOFF", 8)
    iter_cap = capacity(R, [full], B).capacity
    iter_hit = mean_hitting_time(R, full, B).value
    assert iter_cap == pytest.approx(direct_cap, rel=1e-8)
    assert iter_hit == pytest.approx(direct_hit, rel=1e-8)
