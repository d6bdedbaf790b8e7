"""Spectral gap, relaxation time and Dirichlet forms of reversible generators."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .generator import RateMatrix

#: Above this many states the eigensolve switches to shift-invert Lanczos.
DENSE_EIGEN_CUTOFF = 4096

#: Eigenvalues below this fraction of max|L_ii| count as the stationary zero.
ZERO_EIGENVALUE_REL_CUTOFF = 1e-10


@dataclass(frozen=True)
class SpectralResult:
    gap: float
    relaxation_time: float
    method: str  # "dense" | "iterative"
    residual: float


def symmetrize(L: sp.spmatrix, pi: np.ndarray) -> sp.csr_matrix:
    """S = D^{1/2} L D^{-1/2}, symmetric for any pi-reversible generator."""
    s = np.sqrt(pi)
    return (sp.diags(s) @ L @ sp.diags(1.0 / s)).tocsr()


def spectral_gap(R, dense_cutoff: int = DENSE_EIGEN_CUTOFF) -> SpectralResult:
    """Smallest positive eigenvalue of -L and its inverse.

    Accepts anything with a generator L and stationary vector pi (the
    East-like RateMatrix, block chains, tree chains).  The generator is
    symmetrised by the pi^{1/2} similarity before the eigensolve.  Dense
    path: full symmetric eigendecomposition.  Iterative path: shift-invert
    Lanczos around zero, residual target 1e-9.
    """
    S = symmetrize(R.L, R.pi)
    n = S.shape[0]
    scale = float(np.abs(S.diagonal()).max())
    cutoff = ZERO_EIGENVALUE_REL_CUTOFF * scale
    if n <= dense_cutoff:
        A = -S.toarray()
        A = 0.5 * (A + A.T)
        evals, evecs = sla.eigh(A)
        if abs(evals[0]) > cutoff:
            raise RuntimeError(
                f"no stationary eigenvalue found: smallest |lambda|={evals[0]:.3e}"
            )
        gap = float(evals[1])
        vec = evecs[:, 1]
        residual = float(np.linalg.norm(A @ vec - gap * vec))
        method = "dense"
    else:
        A = (-S).tocsc()
        sigma = -1e-6 * scale
        evals, evecs = spla.eigsh(A, k=2, sigma=sigma, which="LM", tol=0)
        order = np.argsort(evals)
        evals, evecs = evals[order], evecs[:, order]
        if abs(evals[0]) > cutoff:
            raise RuntimeError(
                f"iterative eigensolve lost the stationary eigenvalue: {evals[0]:.3e}"
            )
        gap = float(evals[1])
        vec = evecs[:, 1]
        residual = float(np.linalg.norm(A @ vec - gap * vec))
        if residual > 1e-9 * max(1.0, scale):
            raise RuntimeError(f"eigensolve residual {residual:.3e} above target 1e-9")
        method = "iterative"
    if gap <= cutoff:
        raise RuntimeError(
            f"spectral gap {gap:.3e} indistinguishable from the stationary zero"
        )
    return SpectralResult(gap, 1.0 / gap, method, residual)


def variance(pi: np.ndarray, f: np.ndarray) -> float:
    mean = float(pi @ f)
    return float(pi @ (f - mean) ** 2)


def dirichlet_form(R: RateMatrix, f: np.ndarray, check_tol: float = 1e-10) -> float:
    """Dirichlet form sum_x pi(c_x Var_x(f)) of the East-like generator.

    Var_x is the conditional variance of the spin at x, so each site
    contributes pi(eta) c_x(eta) p q (f(eta with particle) - f(eta with
    vacancy))^2.  Cross-checked against pi(f (-L f)); disagreement beyond
    check_tol (relative) reports a broken generator.
    """
    f = np.asarray(f, dtype=np.float64)
    n = R.n_sites
    states = np.arange(R.n_states, dtype=np.int64)
    pq = R.params.p * R.params.q
    from ..lattice import ConstraintTable

    table = ConstraintTable.build(R.box, R.sigma)
    total = 0.0
    for i in range(n):
        ok = table.satisfied_all_states(i, R.n_states)
        up = states | (1 << i)
        dn = states & ~(1 << i)
        diff = f[up] - f[dn]
        total += float(np.sum(R.pi[ok] * pq * diff[ok] ** 2))
    other = float(R.pi @ (f * (-(R.L @ f))))
    scale = max(abs(total), abs(other), 1.0)
    if abs(total - other) > check_tol * scale:
        raise RuntimeError(
            f"Dirichlet form mismatch: site sum {total!r} vs pi(f(-Lf)) {other!r}"
        )
    return total


def dirichlet_form_indicator(R: RateMatrix, member: np.ndarray) -> float:
    """D(1_A) via the escape-rate form: sum over boundary states of
    pi(eta) * (total rate into A^c)."""
    member = np.asarray(member, dtype=bool)
    K = R.L.tocoo()
    mask = (
        member[K.row]
        & ~member[K.col]
        & (K.row != K.col)
    )
    return float(np.sum(R.pi[K.row[mask]] * K.data[mask]))


def bottleneck_lower_bound(R: RateMatrix, member: np.ndarray) -> float:
    """Relaxation-time lower bound pi(A) pi(A^c) / D(1_A) from a cut set."""
    member = np.asarray(member, dtype=bool)
    mass = float(R.pi[member].sum())
    dform = dirichlet_form_indicator(R, member)
    if dform <= 0.0:
        raise ValueError("indicator has zero Dirichlet form: A is invariant")
    return mass * (1.0 - mass) / dform
