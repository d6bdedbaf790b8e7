"""Directed spanning tree (arborescence) comparison chain.

Orient the box edges in the direction of increasing coordinates and root the
tree at the lower corner: the canonical parent of x is x - e_j for the
smallest j with x_j above the lower corner.  Constraining each site on its
single tree parent (root unconstrained) only tightens the East-like
constraint with minimal boundary conditions, so the tree chain relaxes no
faster; its longest branch has d(L-1) + 1 vertices, which ties the chain to
a one-dimensional East process of that length.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..lattice import Box, ModelParams, Site
from ..exact.generator import build_flip_generator, stationary_vector
from ..exact.spectral import SpectralResult, spectral_gap


@dataclass(frozen=True)
class Arborescence:
    box: Box
    root: Site
    parents: dict[Site, Site]

    def depth(self, x: Site) -> int:
        d = 0
        while x != self.root:
            x = self.parents[x]
            d += 1
        return d

    @property
    def longest_branch_vertices(self) -> int:
        return 1 + max(self.depth(x) for x in self.box.sites())


def build_arborescence(box: Box) -> Arborescence:
    """Canonical arborescence: parent drops the first coordinate above base."""
    root = box.lower
    parents = {}
    for x in box.sites():
        if x == root:
            continue
        for j in range(box.d):
            if x[j] > box.lower[j]:
                parents[x] = tuple(c - (1 if i == j else 0) for i, c in enumerate(x))
                break
    return Arborescence(box, root, parents)


@dataclass(frozen=True)
class TreeChain:
    tree: Arborescence
    params: ModelParams
    L: "np.ndarray"
    pi: np.ndarray


def tree_generator(box: Box, params: ModelParams) -> TreeChain:
    """Spin chain constrained on the tree parent only (root unconstrained)."""
    tree = build_arborescence(box)
    n = box.site_count
    masks, free = [], []
    for x in box.sites():
        if x == tree.root:
            masks.append(0)
            free.append(True)
        else:
            masks.append(1 << box.index(tree.parents[x]))
            free.append(False)
    L = build_flip_generator(n, masks, free, params)
    return TreeChain(tree, params, L, stationary_vector(n, params))


@dataclass(frozen=True)
class TreeGapReport:
    box: Box
    longest_branch_vertices: int
    tree_gap: SpectralResult
    east_min_gap: SpectralResult

    @property
    def tree_no_faster(self) -> bool:
        return self.tree_gap.gap <= self.east_min_gap.gap


def tree_gap_comparison(box: Box, params: ModelParams) -> TreeGapReport:
    from ..lattice import BoundaryCondition
    from ..exact.generator import build_generator

    tc = tree_generator(box, params)
    east = build_generator(box, BoundaryCondition.minimal(box), params)
    return TreeGapReport(
        box,
        tc.tree.longest_branch_vertices,
        spectral_gap(tc),
        spectral_gap(east),
    )
