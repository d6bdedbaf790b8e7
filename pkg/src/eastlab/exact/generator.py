"""Sparse reversible generator of the East-like process on a packed state space.

States are integers 0..2^n - 1; bit i is the occupancy at canonical site i.
Off-diagonal rates are K(eta, eta^x) = c_x(eta) * (q eta_x + p (1 - eta_x));
the diagonal is minus the row sum, and the chain is reversible w.r.t. the
product Bernoulli(p) measure pi.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from ..lattice import Box, BoundaryCondition, ConstraintTable, ModelParams

#: Exact paths enumerate 2^|Lambda| states; beyond this the engine refuses.
MAX_EXACT_SITES = 20


def _popcounts(n_states: int) -> np.ndarray:
    """Number of set bits for every state 0..n_states-1."""
    out = np.zeros(n_states, dtype=np.uint8)
    block = 1
    while block < n_states:
        out[block : 2 * block] = out[:block] + 1
        block *= 2
    return out


def stationary_vector(n_sites: int, params: ModelParams) -> np.ndarray:
    """pi over all 2^n packed states."""
    ones = _popcounts(1 << n_sites).astype(np.float64)
    return params.p**ones * params.q ** (n_sites - ones)


@dataclass(frozen=True)
class RateMatrix:
    """Generator matrix L (rows sum to zero) with its stationary weights."""

    box: Box
    sigma: BoundaryCondition
    params: ModelParams
    L: sp.csr_matrix
    pi: np.ndarray

    @property
    def n_states(self) -> int:
        return self.L.shape[0]

    @property
    def n_sites(self) -> int:
        return self.box.site_count

    def symmetrized(self) -> sp.csr_matrix:
        """S = D^{1/2} L D^{-1/2}, symmetric by detailed balance (D = diag(pi))."""
        s = np.sqrt(self.pi)
        D = sp.diags(s)
        Dinv = sp.diags(1.0 / s)
        return (D @ self.L @ Dinv).tocsr()

    def conductances(self) -> sp.csr_matrix:
        """Edge conductances C(eta, eta') = pi(eta) K(eta, eta') (symmetric)."""
        K = self.L.copy().tolil()
        K.setdiag(0.0)
        return (sp.diags(self.pi) @ K.tocsr()).tocsr()

    def holding_rates(self) -> np.ndarray:
        """Total jump rate out of each state."""
        return -self.L.diagonal()

    def detailed_balance_defect(self) -> float:
        """max |pi_i L_ij - pi_j L_ji| over off-diagonal pairs."""
        C = sp.diags(self.pi) @ self.L
        d = (C - C.T).tocoo().data
        return float(np.abs(d).max()) if d.size else 0.0


def build_flip_generator(
    n_sites: int,
    neighbour_masks,
    always_free,
    params: ModelParams,
) -> sp.csr_matrix:
    """Single-spin-flip generator from per-site constraint data.

    Site i may flip in state s iff always_free[i] or some bit of
    neighbour_masks[i] is vacant in s; the flip rate is q for 1->0 and p for
    0->1.  Shared by the East-like chain and constraint-modified variants
    (tree-constrained chains and the like).
    """
    n_states = 1 << n_sites
    states = np.arange(n_states, dtype=np.int64)
    rows, cols, vals = [], [], []
    q, p = params.q, params.p
    for i in range(n_sites):
        m = int(neighbour_masks[i])
        if always_free[i]:
            ok = np.ones(n_states, dtype=bool)
        else:
            ok = (states & m) != m
        src = states[ok]
        bit = (src >> i) & 1
        rate = np.where(bit == 1, q, p)
        rows.append(src)
        cols.append(src ^ (1 << i))
        vals.append(rate)
    L = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(n_states, n_states),
    ).tocsr()
    diag = -np.asarray(L.sum(axis=1)).ravel()
    return (L + sp.diags(diag)).tocsr()


def build_generator(
    box: Box, sigma: BoundaryCondition, params: ModelParams
) -> RateMatrix:
    """Assemble the East-like generator on box with boundary condition sigma.

    Refuses boxes beyond MAX_EXACT_SITES sites and non-ergodic sigma (the
    latter cannot even be constructed, see BoundaryCondition).
    """
    n = box.site_count
    if n > MAX_EXACT_SITES:
        raise ValueError(
            f"exact engine caps at {MAX_EXACT_SITES} sites, box has {n}"
        )
    if sigma.box != box:
        raise ValueError("boundary condition built for a different box")
    table = ConstraintTable.build(box, sigma)
    L = build_flip_generator(n, table.neighbour_masks, table.bc_vacant, params)
    pi = stationary_vector(n, params)
    return RateMatrix(box, sigma, params, L, pi)
