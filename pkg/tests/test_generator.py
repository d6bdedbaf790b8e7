import numpy as np
import pytest
import scipy.linalg as sla

from eastlab.lattice import Box, BoundaryCondition, ModelParams
from eastlab.exact import build_generator, spectral_gap


def test_single_site_rates():
    box = Box.cube(1, 1)
    R = build_generator(box, BoundaryCondition.minimal(box), ModelParams(0.3))
    L = R.L.toarray()
    # states: 0 = vacancy, 1 = particle; K(1->0) = q, K(0->1) = p
    assert L[1, 0] == pytest.approx(0.3)
    assert L[0, 1] == pytest.approx(0.7)
    assert np.allclose(L.sum(axis=1), 0.0, atol=1e-15)


def test_two_site_chain_structure():
    box = Box.cube(2, 1)
    R = build_generator(box, BoundaryCondition.minimal(box), ModelParams(0.5))
    L = R.L.toarray()
    assert L.shape == (4, 4)
    assert np.allclose(L.sum(axis=1), 0.0, atol=1e-14)
    # site 2 may only flip when site 1 is vacant: no 1<->3 transition
    assert L[1, 3] == 0.0 and L[3, 1] == 0.0


def _dense_gap_oracle(R):
    """Independent dense route: eigendecomposition of the symmetrised
    generator assembled from scratch."""
    L = R.L.toarray()
    s = np.sqrt(R.pi)
    S = (s[:, None] * L) / s[None, :]
    evals = sla.eigvalsh(-0.5 * (S + S.T))
    return float(np.sort(evals)[1])


def test_d2_maximal_gap_matches_dense_oracle():
    box = Box.cube(2, 2)
    R = build_generator(box, BoundaryCondition.maximal(box), ModelParams(0.1))
    assert R.n_states == 16
    res = spectral_gap(R)
    assert res.gap == pytest.approx(_dense_gap_oracle(R), abs=1e-12)


@pytest.mark.parametrize("label", ["minimal:e1", "minimal:e2", "maximal"])
@pytest.mark.parametrize("q", [0.5, 0.1])
def test_detailed_balance(label, q):
    box = Box((1, 1), (2, 3))
    R = build_generator(box, BoundaryCondition.from_label(box, label), ModelParams(q))
    assert R.detailed_balance_defect() <= 1e-12


def test_offdiagonal_sparsity():
    box = Box.cube(3, 1)
    R = build_generator(box, BoundaryCondition.minimal(box), ModelParams(0.4))
    K = R.L.tolil()
    K.setdiag(0)
    per_row = (K.tocsr() != 0).sum(axis=1)
    assert per_row.max() <= box.site_count


def test_stationary_vector_sums_to_one_at_cap():
    from eastlab.exact import stationary_vector
    from eastlab.lattice import ModelParams

    for n, q in ((12, 0.3), (20, 0.07)):
        pi = stationary_vector(n, ModelParams(q))
        assert abs(pi.sum() - 1.0) <= 1e-12


def test_oversize_box_rejected():
    box = Box((1,), (21,))
    with pytest.raises(ValueError, match="caps"):
        build_generator(box, BoundaryCondition.minimal(box), ModelParams(0.5))


def test_wrong_box_boundary_rejected():
    b1, b2 = Box.cube(2, 1), Box.cube(3, 1)
    with pytest.raises(ValueError, match="different box"):
        build_generator(b1, BoundaryCondition.minimal(b2), ModelParams(0.5))
