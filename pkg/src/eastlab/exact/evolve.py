"""Persistence and spin autocorrelation of the finite-volume East-like chain.

The persistence function F(t) is the stationary probability that a tracked
site has had no legal ring up to time t.  Killing the chain at the legal-ring
rate of the tracked site (and freezing that site's transitions) gives a
sub-Markov generator M with F(t) = pi . exp(tM) 1, evaluated by uniformisation
with an adaptive Poisson truncation.  A(t) = Var_pi(exp(tL) eta_x)^{1/2} is
the spin autocorrelation, from the eigendecomposition of the symmetrised
generator.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
from scipy.stats import poisson

from ..lattice import Box, BoundaryCondition, ConstraintTable, ModelParams, Site
from .generator import build_generator, stationary_vector

UNIFORMIZATION_TAIL = 1e-12

#: Autocorrelation needs a dense eigendecomposition.
AUTOCORR_MAX_STATES = 4096


def killed_generator(
    box: Box, sigma: BoundaryCondition, params: ModelParams, tracked: Site
) -> tuple[sp.csr_matrix, np.ndarray]:
    """Sub-Markov generator for survival of the tracked site.

    All transitions at the tracked site are removed (its spin never changes
    before the first legal ring) and the diagonal picks up the killing rate
    -c_tracked(eta), the rate at which a legal ring would occur.
    Returns (M, pi).
    """
    n = box.site_count
    if n > 16:
        raise ValueError("persistence caps at 16 sites")
    ti = box.index(tracked)
    table = ConstraintTable.build(box, sigma)
    n_states = 1 << n
    states = np.arange(n_states, dtype=np.int64)
    rows, cols, vals = [], [], []
    q, p = params.q, params.p
    kill = np.zeros(n_states)
    for i in range(n):
        ok = table.satisfied_all_states(i, n_states)
        if i == ti:
            kill[ok] += 1.0  # rate-one clock, ring legal iff constraint holds
            continue
        src = states[ok]
        bit = (src >> i) & 1
        rate = np.where(bit == 1, q, p)
        rows.append(src)
        cols.append(src ^ (1 << i))
        vals.append(rate)
    if rows:
        M = sp.coo_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
            shape=(n_states, n_states),
        ).tocsr()
    else:  # single-site box: only the killing term remains
        M = sp.csr_matrix((n_states, n_states))
    diag = -np.asarray(M.sum(axis=1)).ravel() - kill
    M = (M + sp.diags(diag)).tocsr()
    return M, stationary_vector(n, params)


def _expm_action_ones(M: sp.csr_matrix, t: float) -> np.ndarray:
    """exp(tM) 1 for sub-Markov M by uniformisation, tail below 1e-12."""
    if t == 0.0:
        return np.ones(M.shape[0])
    unif = float(-M.diagonal().min())
    if unif == 0.0:
        return np.ones(M.shape[0])
    P = sp.eye(M.shape[0], format="csr") + M / unif
    r = unif * t
    kmax = int(np.ceil(r + 12.0 * np.sqrt(r) + 30.0))
    while poisson.sf(kmax, r) > UNIFORMIZATION_TAIL:
        kmax = int(kmax * 1.5) + 10
    weights = poisson.pmf(np.arange(kmax + 1), r)
    v = np.ones(M.shape[0])
    acc = weights[0] * v
    for k in range(1, kmax + 1):
        v = P @ v
        if weights[k] > 0.0:
            acc += weights[k] * v
    return acc


def persistence_exact(
    box: Box,
    sigma: BoundaryCondition,
    params: ModelParams,
    t_grid,
    tracked: Site | None = None,
) -> np.ndarray:
    """F(t) over t_grid: stationary probability of no legal ring at the
    tracked site (default: the upper corner) before t."""
    tracked = tracked if tracked is not None else box.upper
    M, pi = killed_generator(box, sigma, params, tracked)
    return np.array([float(pi @ _expm_action_ones(M, float(t))) for t in t_grid])


def autocorrelation(
    box: Box,
    sigma: BoundaryCondition,
    params: ModelParams,
    t_grid,
    tracked: Site | None = None,
) -> np.ndarray:
    """A(t) = Var_pi(exp(tL) eta_x)^{1/2} for the tracked spin."""
    tracked = tracked if tracked is not None else box.upper
    R = build_generator(box, sigma, params)
    if R.n_states > AUTOCORR_MAX_STATES:
        raise ValueError("autocorrelation needs a dense eigendecomposition; box too large")
    i = R.box.index(tracked)
    states = np.arange(R.n_states, dtype=np.int64)
    f = ((states >> i) & 1).astype(np.float64)
    S = -R.symmetrized().toarray()
    S = 0.5 * (S + S.T)
    evals, evecs = sla.eigh(S)
    fhat = np.sqrt(R.pi) * f
    coeff = evecs.T @ fhat
    scale = float(np.abs(S.diagonal()).max())
    nonzero = evals > 1e-10 * max(scale, 1.0)
    lam = evals[nonzero]
    c2 = coeff[nonzero] ** 2
    return np.array(
        [float(np.sqrt(np.sum(c2 * np.exp(-2.0 * lam * t)))) for t in t_grid]
    )


def fit_decay_rate(
    ts: np.ndarray, values: np.ndarray, curvature_limit: float = 0.01
) -> tuple[float, tuple[float, float]]:
    """Exponential decay rate of a positive curve by windowed least squares.

    The fit runs on log(values) over the largest dyadic window (t_max/2,
    t_max], (t_max/4, t_max/2], ... whose quadratic curvature is below
    curvature_limit relative to the linear term; windows are tried from the
    latest (largest t) down and the first acceptable one wins, which makes the
    window choice deterministic.  Returns (rate, (t_lo, t_hi)).
    """
    ts = np.asarray(ts, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    if np.any(values <= 0.0):
        raise ValueError("decay fit needs positive values")
    logs = np.log(values)
    t_max = ts.max()
    chosen = None
    hi = t_max
    while True:
        lo = hi / 2.0
        mask = (ts > lo) & (ts <= hi)
        if mask.sum() < 4:
            break
        t_w, y_w = ts[mask], logs[mask]
        quad = np.polyfit(t_w, y_w, 2)
        span = t_w.max() - t_w.min()
        if abs(quad[1]) > 0 and abs(quad[0]) * span / abs(quad[1]) < curvature_limit:
            chosen = (lo, hi)
            break
        hi = lo
    if chosen is None:
        chosen = (t_max / 2.0, t_max)
    lo, hi = chosen
    mask = (ts > lo) & (ts <= hi)
    slope, _ = np.polyfit(ts[mask], logs[mask], 1)
    return -float(slope), chosen
