"""East-like block process: whole blocks resample when an East block is good.

Partition a box of sites into cubic blocks of side ell.  With rate one, the
configuration inside a block is replaced by a fresh product-Bernoulli(p)
sample provided some East-neighbouring block (or the boundary, under maximal
conditions) contains a vacancy.  Projecting each block to good (has a
vacancy) / bad reproduces the plain East-like chain at the renormalised
density q* = 1 - (1-q)^{ell^d}; the spectral gaps of the two chains agree
exactly, which is the equality this module exposes as a check.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from ..lattice import Box, BoundaryCondition, ModelParams
from ..exact.generator import build_generator, stationary_vector
from ..exact.spectral import SpectralResult, spectral_gap


@dataclass(frozen=True)
class BlockSpec:
    """Block side ell in dimension d at density q; q* is the good-probability."""

    ell: int
    d: int
    q: float

    @property
    def q_star(self) -> float:
        return 1.0 - (1.0 - self.q) ** (self.ell**self.d)

    def bonferroni_bracket(self) -> tuple[float, float]:
        """(q ell^d / 2, q ell^d); brackets q* whenever q ell^d <= 1."""
        v = self.q * self.ell**self.d
        return (v / 2.0, v)


@dataclass(frozen=True)
class BlockGenerator:
    """Block-resampling generator over packed site configurations."""

    spec: BlockSpec
    blocks: Box
    site_box: Box
    L: sp.csr_matrix
    pi: np.ndarray

    @property
    def n_states(self) -> int:
        return self.L.shape[0]


def _block_site_indices(site_box: Box, blocks: Box, bx, ell: int) -> list[int]:
    d = site_box.d
    lo = tuple((bx[i] - blocks.lower[i]) * ell + site_box.lower[i] for i in range(d))
    ranges = [range(lo[i], lo[i] + ell) for i in range(d)]
    return [site_box.index(s) for s in itertools.product(*ranges)]


def block_generator(blocks: Box, ell: int, params: ModelParams) -> BlockGenerator:
    """Block process on a box of blocks with maximal boundary conditions.

    blocks is the box of block labels; each block holds ell^d sites.  Total
    site count is capped at 16 for the exact route.
    """
    d = blocks.d
    n_sites = (ell**d) * blocks.site_count
    if n_sites > 16:
        raise ValueError(f"exact block route caps at 16 sites, got {n_sites}")
    site_shape = tuple((b - a + 1) * ell for a, b in zip(blocks.lower, blocks.upper))
    site_box = Box((1,) * d, site_shape)
    spec = BlockSpec(ell, d, params.q)

    idx = {bx: _block_site_indices(site_box, blocks, bx, ell) for bx in blocks.sites()}
    masks = {bx: sum(1 << i for i in ids) for bx, ids in idx.items()}
    n_states = 1 << n_sites
    n_block = ell**d
    block_weights = np.array(
        [
            params.p ** bin(t).count("1") * params.q ** (n_block - bin(t).count("1"))
            for t in range(1 << n_block)
        ]
    )

    rows, cols, vals = [], [], []
    for s in range(n_states):
        for bx in blocks.sites():
            ok = False
            for j in range(d):
                nb = tuple(c - (1 if i == j else 0) for i, c in enumerate(bx))
                if nb not in blocks:
                    ok = True  # maximal boundary: outside blocks count as good
                    break
                if (s & masks[nb]) != masks[nb]:
                    ok = True
                    break
            if not ok:
                continue
            ids = idx[bx]
            base = s & ~masks[bx]
            for t in range(1 << n_block):
                target = base
                for k, i in enumerate(ids):
                    if (t >> k) & 1:
                        target |= 1 << i
                if target != s:
                    rows.append(s)
                    cols.append(target)
                    vals.append(block_weights[t])
    L = sp.coo_matrix((vals, (rows, cols)), shape=(n_states, n_states)).tocsr()
    diag = -np.asarray(L.sum(axis=1)).ravel()
    L = (L + sp.diags(diag)).tocsr()
    pi = stationary_vector(n_sites, params)
    return BlockGenerator(spec, blocks, site_box, L, pi)


@dataclass(frozen=True)
class BlockGapReport:
    spec: BlockSpec
    blocks: Box
    block_gap: SpectralResult
    east_gap: SpectralResult

    @property
    def difference(self) -> float:
        return abs(self.block_gap.gap - self.east_gap.gap)


def gap_equality_check(blocks: Box, ell: int, params: ModelParams) -> BlockGapReport:
    """Spectral gap of the block process vs the East-like chain at q*.

    The comparison chain lives on the block labels as sites, with maximal
    boundary conditions and vacancy density q*.
    """
    bg = block_generator(blocks, ell, params)
    east_box = Box((1,) * blocks.d, blocks.shape)
    east = build_generator(
        east_box, BoundaryCondition.maximal(east_box), ModelParams(bg.spec.q_star)
    )
    return BlockGapReport(bg.spec, blocks, spectral_gap(bg), spectral_gap(east))
