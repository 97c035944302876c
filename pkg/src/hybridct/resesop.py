"""RESESOP-Kaczmarz (single-ray subproblems) with two search directions.

Every ray ``(k, l)`` is one subproblem with the scalar model ``A_{k,l} f = g_{k,l}``.
A ray whose residual exceeds ``tau * (eta + delta)`` yields the search direction
``u = A_{k,l}^T res`` and the stripe ``{f : |<u, f> - res*g| <= |res| (eta + delta)}``.
The iterate is projected onto the near boundary of that stripe and then, using
the previous direction, onto the intersection with the previous stripe.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numba
import numpy as np

from .dynamic import InexactnessMap
from .errors import ConfigurationError, ContractViolation, ZeroDirectionError
from .geometry import Image, ImageGrid
from .radon import ScanGeometry, Sinogram, forward_static, ray_row_kernel

log = logging.getLogger(__name__)

GRAM_RTOL = 1e-14


@dataclass(frozen=True)
class StripeParams:
    u: np.ndarray
    alpha: float
    xi: float

    def __post_init__(self):
        if self.xi < 0:
            raise ContractViolation("stripe half-width must be nonnegative")

    def contains(self, f: np.ndarray, atol: float = 0.0) -> bool:
        return abs(float(np.vdot(self.u, f)) - self.alpha) <= self.xi + atol


@dataclass(frozen=True)
class ResesopConfig:
    tau: float = 1.00001
    max_full_iterations: int = 30
    rho: float = 1.0
    nonnegativity: bool = True

    def __post_init__(self):
        if not self.tau > 1.0:
            raise ConfigurationError(f"tau must exceed 1, got {self.tau}")
        if self.max_full_iterations < 1:
            raise ConfigurationError("max_full_iterations must be positive")
        if not self.rho > 0:
            raise ConfigurationError("rho must be positive")


@dataclass
class ResesopReport:
    iterations_run: int
    stopped_ray_fraction: float
    final_residual_max: float
    per_sweep_residual_norms: list[float] = field(default_factory=list)
    # True where the ray passed the discrepancy test the last time it was visited
    stopped: np.ndarray | None = field(default=None, repr=False)


def _values(f) -> np.ndarray:
    return f.values if isinstance(f, Image) else np.asarray(f, dtype=float)


def _wrap(like, arr):
    return Image(like.grid, arr) if isinstance(like, Image) else arr


def project_stripe_single(f, u, alpha: float, xi: float, residual_abs: float, bound: float):
    """Project onto the stripe boundary hyperplane nearest to ``f``.

    Returns ``f - residual_abs (residual_abs - bound) / ||u||^2 * u``; with
    ``u = A^T res`` this lands on ``<u, .> = alpha + xi``.
    """
    fv, uv = _values(f), _values(u)
    nu2 = float(np.vdot(uv, uv))
    if nu2 == 0.0:
        raise ZeroDirectionError("search direction has zero norm")
    if residual_abs < bound:
        raise ContractViolation("ray already satisfies the discrepancy bound")
    step = residual_abs * (residual_abs - bound) / nu2
    return _wrap(f, fv - step * uv)


def project_two_stripes(f_tilde, u_new, u_old, alpha_old: float, xi_old: float):
    """Move ``f_tilde`` inside the previous stripe while keeping ``<u_new, .>`` fixed.

    Unchanged if ``f_tilde`` already lies in the old stripe or if the two
    directions are (numerically) parallel.
    """
    fv, un, uo = _values(f_tilde), _values(u_new), _values(u_old)
    a = float(np.vdot(uo, fv))
    if alpha_old - xi_old <= a <= alpha_old + xi_old:
        return f_tilde
    nn = float(np.vdot(un, un))
    no = float(np.vdot(uo, uo))
    cross = float(np.vdot(un, uo))
    gram = nn * no - cross * cross
    if not gram > GRAM_RTOL * nn * no:
        return f_tilde
    target = alpha_old + xi_old if a > alpha_old + xi_old else alpha_old - xi_old
    t = (a - target) / gram
    return _wrap(f_tilde, fv + cross * t * un - nn * t * uo)


@numba.njit(cache=True)
def _load_row(r, use_csr, cosv, sinv, offs, n, indptr, indices, data, idx, w):
    if use_csr:
        cnt = 0
        for e in range(indptr[r], indptr[r + 1]):
            idx[cnt] = indices[e]
            w[cnt] = data[e]
            cnt += 1
        return cnt
    m = offs.shape[0]
    a = r // m
    return ray_row_kernel(n, cosv[a], sinv[a], offs[r - a * m], idx, w)


@numba.njit(cache=True)
def _sweep_kernel(use_csr, cosv, sinv, offs, n, indptr, indices, data, max_len,
                  g, eta, delta, tau, max_iter, nonneg, f):
    """Sweep rays ``0..len(g)-1`` in order; rows come from the CT tracer or a CSR
    matrix. ``f`` is updated in place."""
    n_rays = g.shape[0]
    uo_dense = np.zeros(f.shape[0])
    uo_idx = np.empty(max_len, dtype=np.int64)
    uo_val = np.empty(max_len)
    uo_cnt = 0
    alpha_old = 0.0
    xi_old = 0.0
    idx = np.empty(max_len, dtype=np.int64)
    w = np.empty(max_len)
    un = np.empty(max_len)
    active = np.ones(n_rays, dtype=np.bool_)
    sweep_norms = np.zeros(max_iter)
    full_iter = 0
    n_active = n_rays
    while n_active > 0 and full_iter < max_iter:
        rsq = 0.0
        for r in range(n_rays):
            cnt = _load_row(r, use_csr, cosv, sinv, offs, n, indptr, indices, data, idx, w)
            af = 0.0
            for e in range(cnt):
                af += w[e] * f[idx[e]]
            res = af - g[r]
            rsq += res * res
            bound = eta[r] + delta[r]
            ares = abs(res)
            if ares <= tau * bound:
                active[r] = False
                continue
            active[r] = True
            nn = 0.0
            for e in range(cnt):
                un[e] = w[e] * res
                nn += un[e] * un[e]
            if not nn > 0.0:
                continue
            alpha_new = res * g[r]
            xi_new = ares * bound
            step = ares * (ares - bound) / nn
            for e in range(cnt):
                f[idx[e]] -= step * un[e]
            # second projection against the previous stripe
            ao = 0.0
            for e in range(uo_cnt):
                ao += uo_val[e] * f[uo_idx[e]]
            if ao > alpha_old + xi_old or ao < alpha_old - xi_old:
                no = 0.0
                for e in range(uo_cnt):
                    no += uo_val[e] * uo_val[e]
                cross = 0.0
                for e in range(cnt):
                    cross += un[e] * uo_dense[idx[e]]
                gram = nn * no - cross * cross
                if gram > GRAM_RTOL * nn * no:
                    if ao > alpha_old + xi_old:
                        t = (ao - (alpha_old + xi_old)) / gram
                    else:
                        t = (ao - (alpha_old - xi_old)) / gram
                    for e in range(cnt):
                        f[idx[e]] += cross * t * un[e]
                    for e in range(uo_cnt):
                        f[uo_idx[e]] -= nn * t * uo_val[e]
            if nonneg:
                # only pixels touched by this update can have turned negative
                for e in range(cnt):
                    if f[idx[e]] < 0.0:
                        f[idx[e]] = 0.0
                for e in range(uo_cnt):
                    if f[uo_idx[e]] < 0.0:
                        f[uo_idx[e]] = 0.0
            for e in range(uo_cnt):
                uo_dense[uo_idx[e]] = 0.0
            for e in range(cnt):
                uo_idx[e] = idx[e]
                uo_val[e] = un[e]
                uo_dense[idx[e]] = un[e]
            uo_cnt = cnt
            alpha_old = alpha_new
            xi_old = xi_new
        sweep_norms[full_iter] = np.sqrt(rsq)
        full_iter += 1
        n_active = 0
        for r in range(n_rays):
            if active[r]:
                n_active += 1
    return full_iter, sweep_norms[:full_iter], active


def _report(iters, norms, active, final_res) -> ResesopReport:
    stopped = ~active
    report = ResesopReport(
        iterations_run=int(iters),
        stopped_ray_fraction=float(stopped.mean()),
        final_residual_max=float(final_res.max()) if final_res.size else 0.0,
        per_sweep_residual_norms=[float(x) for x in norms],
        stopped=stopped,
    )
    log.info("RESESOP: %d sweeps, %.1f%% rays stopped", iters, 100 * report.stopped_ray_fraction)
    return report


def resesop_matrix(matrix, g, eta, delta, cfg: ResesopConfig = ResesopConfig(),
                   initial=None) -> tuple[np.ndarray, ResesopReport]:
    """Same iteration for an explicit system; each matrix row is one subproblem."""
    from scipy.sparse import csr_matrix

    A = csr_matrix(matrix, dtype=float)
    A.sort_indices()
    g = np.asarray(g, dtype=float).ravel()
    eta = np.broadcast_to(np.asarray(eta, dtype=float), g.shape).copy()
    delta = np.broadcast_to(np.asarray(delta, dtype=float), g.shape).copy()
    if A.shape[0] != g.size:
        raise ContractViolation(f"{A.shape[0]} rows but {g.size} data values")
    f = np.zeros(A.shape[1]) if initial is None else np.array(initial, dtype=float).ravel()
    max_len = max(int(np.diff(A.indptr).max(initial=0)), 1)
    empty = np.zeros(0)
    iters, norms, active = _sweep_kernel(
        True, empty, empty, empty, 0, A.indptr.astype(np.int64), A.indices.astype(np.int64),
        A.data, max_len, g, eta, delta, float(cfg.tau), int(cfg.max_full_iterations),
        bool(cfg.nonnegativity), f)
    return f, _report(iters, norms, active, np.abs(A @ f - g))


def resesop_kaczmarz(sino: Sinogram, inexact: InexactnessMap, geom: ScanGeometry,
                     grid: ImageGrid, cfg: ResesopConfig = ResesopConfig(),
                     initial: Image | None = None) -> tuple[Image, ResesopReport]:
    """Reconstruct on ``grid`` from ``sino`` with per-ray discrepancy stopping.

    Rays are visited angle-major, offset-minor. The discrepancy threshold is
    ``tau * (eta + delta)``; callers wanting a ball radius other than 1 should
    pre-scale ``eta``.  A ray that fails its test in a later sweep is reactivated,
    so the solver stops once one full sweep passes with every ray satisfied, or
    after ``max_full_iterations`` sweeps.  ``per_sweep_residual_norms`` holds the
    norm of the residuals as encountered during each sweep.
    """
    if sino.geometry != geom or inexact.geometry != geom:
        raise ContractViolation("sinogram, inexactness map and geometry disagree")
    n = grid.n_pix
    f = np.zeros(n * n) if initial is None else initial.values.ravel().copy()
    ang = geom.angles
    no_csr = np.zeros(1, dtype=np.int64)
    iters, norms, active = _sweep_kernel(
        False, np.cos(ang), np.sin(ang), geom.offsets, n, no_csr, no_csr, np.zeros(0), 2 * n,
        sino.values.ravel(), inexact.eta.ravel(), inexact.delta.ravel(), float(cfg.tau),
        int(cfg.max_full_iterations), bool(cfg.nonnegativity), f)
    image = Image(grid, f)
    final_res = np.abs(forward_static(image, geom).values - sino.values)
    report = _report(iters, norms, active.reshape(geom.shape), final_res)
    return image, report
