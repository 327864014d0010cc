"""Moreau envelope and proximal mapping via closed forms or a certified grid.

The grid oracle evaluates the prox subproblem

    min_w  f(w) + ||w - x||^2 / (2 lam)

over a uniform grid on a ball whose radius is certified from the function's
quadratic lower-bound certificate, then polishes every grid-local minimum by
trisection (1-D) or compass pattern search (2-D).  Multivalued proximal
mappings are reported as clustered representatives with a deterministic
lexicographic tie-break.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import (
    InvalidArgument,
    InvalidLambda,
    MultivaluedProx,
    NoFeasiblePoint,
    ThresholdExceeded,
)
from .functions import (
    FunctionSpec,
    QuadShift,
    as_point,
    ensure_certificate,
    quad_shift,
)

_MAX_GRID_POINTS = 4_000_000
_BETA_GUARD = -1e12
_EXPAND_STEPS = 6


@dataclass
class ProxSolveConfig:
    """Tuning knobs for the grid oracle.

    grid_step and cluster_radius default per dimension (1e-3 in 1-D, 1e-2
    per axis in 2-D; cluster_radius = 10 * grid_step).  lambda1 is the
    auxiliary parameter strictly between lam and the threshold used in the
    certified-radius bound; by default the midpoint (or 2*lam when the
    threshold is infinite).
    """

    grid_step: Optional[float] = None
    refine_iters: int = 60
    value_tol: float = 1e-9
    cluster_radius: Optional[float] = None
    lambda1: Optional[float] = None

    def step_for(self, dim: int) -> float:
        if self.grid_step is not None:
            if self.grid_step <= 0:
                raise InvalidArgument("grid_step must be positive")
            return self.grid_step
        return 1e-3 if dim == 1 else 1e-2

    def cluster_for(self, dim: int) -> float:
        if self.cluster_radius is not None:
            return self.cluster_radius
        return 10.0 * self.step_for(dim)

    def lambda1_for(self, lam: float, threshold: float) -> float:
        if self.lambda1 is not None:
            if not lam < self.lambda1 < threshold:
                raise InvalidArgument(
                    f"lambda1 must lie in ({lam}, {threshold})"
                )
            return self.lambda1
        if math.isinf(threshold):
            return 2.0 * lam
        return 0.5 * (lam + threshold)


@dataclass
class ProxResult:
    """Envelope value with clustered proximal representatives.

    diverged means the objective was detected to decrease without bound
    (envelope value -inf); minimizers is then empty and envelope_value is
    meaningless.
    """

    envelope_value: float
    minimizers: list
    diverged: bool
    radius_used: float


def _objective_scalar(f: FunctionSpec, lam: float, x: np.ndarray, w: np.ndarray) -> float:
    return float(f.batch(w[None, :])[0]) + float(np.sum((w - x) ** 2)) / (2.0 * lam)


def _feasible_upper_bound(f: FunctionSpec, lam: float, x: np.ndarray) -> float:
    """A finite upper bound on the envelope value at x, from feasible candidates."""
    candidates = [x, f.certificate.anchor]
    for km in f.known_minimizers:
        candidates.append(km.point)
    best = math.inf
    for c in candidates:
        v = _objective_scalar(f, lam, x, np.asarray(c, dtype=float))
        best = min(best, v)
    if math.isinf(best):
        # coarse scan of a box around x and the anchor
        for center in (x, f.certificate.anchor):
            if f.dim == 1:
                ws = center + np.linspace(-10.0, 10.0, 10001)[:, None]
            else:
                axes = [np.linspace(-10.0, 10.0, 101)] * f.dim
                mesh = np.meshgrid(*axes, indexing="ij")
                ws = center + np.stack([m.ravel() for m in mesh], axis=1)
            vals = f.batch(ws) + np.sum((ws - x) ** 2, axis=1) / (2.0 * lam)
            m = float(np.min(vals))
            best = min(best, m)
    if math.isinf(best):
        raise NoFeasiblePoint(
            f"no finite objective value found for {f.name or 'function'} at x={x}"
        )
    return best


def search_radius(f: FunctionSpec, lam: float, x, cfg: ProxSolveConfig) -> float:
    """Radius R certified to contain every proximal point of f at x.

    For t = ||w - x|| > R the certificate gives
    f(w) + t^2/(2 lam) >= a*(t + D)^2 + beta + t^2/(2 lam) > U with
    a = min(alpha, 0) and D = ||x - anchor||, where U is a feasible upper
    bound on the envelope value.
    """
    if lam <= 0:
        raise InvalidArgument("lambda must be positive")
    x = as_point(x, f.dim)
    ensure_certificate(f)
    cert = f.certificate
    threshold = cert.threshold
    if lam >= threshold:
        raise ThresholdExceeded(lam, threshold)
    cfg.lambda1_for(lam, threshold)  # validates the auxiliary parameter

    U = _feasible_upper_bound(f, lam, x)
    a = min(cert.alpha, 0.0)
    D = float(np.linalg.norm(x - cert.anchor))
    # (a + 1/(2 lam)) t^2 + 2 a D t + (a D^2 + beta - U) > 0 for t > root
    A = a + 1.0 / (2.0 * lam)
    B = 2.0 * a * D
    C = a * D * D + cert.beta - U
    disc = B * B - 4.0 * A * C
    if disc <= 0:
        root = 0.0
    else:
        root = (-B + math.sqrt(disc)) / (2.0 * A)
    return max(root, 0.0) + max(0.1, 0.01 * root)


def _grid_points(x: np.ndarray, R: float, h: float) -> tuple[np.ndarray, float]:
    """Uniform grid on the box [-R, R]^n around x; coarsens h if oversized."""
    dim = x.size
    m = 2 * math.ceil(R / h) + 1
    total = m ** dim
    if total > _MAX_GRID_POINTS:
        scale = (total / _MAX_GRID_POINTS) ** (1.0 / dim)
        h = h * scale
        m = 2 * math.ceil(R / h) + 1
    axis = np.linspace(-R, R, m)
    if dim == 1:
        pts = x + axis[:, None]
    else:
        mesh = np.meshgrid(*([axis] * dim), indexing="ij")
        pts = x + np.stack([g.ravel() for g in mesh], axis=1)
    return pts, 2.0 * R / (m - 1)


def _grid_local_minima_1d(vals: np.ndarray) -> np.ndarray:
    v = vals
    left = np.empty_like(v)
    right = np.empty_like(v)
    left[0] = np.inf
    left[1:] = v[:-1]
    right[-1] = np.inf
    right[:-1] = v[1:]
    return np.flatnonzero(np.isfinite(v) & (v <= left) & (v <= right))


def _grid_local_minima_2d(vals: np.ndarray, shape: tuple[int, int]) -> np.ndarray:
    v = vals.reshape(shape)
    padded = np.pad(v, 1, constant_values=np.inf)
    ok = np.isfinite(v)
    for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1)):
        nb = padded[1 + di: 1 + di + shape[0], 1 + dj: 1 + dj + shape[1]]
        ok &= v <= nb
    return np.flatnonzero(ok.ravel())


def _refine_1d(f: FunctionSpec, lam: float, x: np.ndarray, w0: float,
               h: float, iters: int) -> tuple[np.ndarray, float]:
    """Trisection on [w0 - h, w0 + h]."""
    def obj(w):
        return _objective_scalar(f, lam, x, np.array([w]))

    lo, hi = w0 - h, w0 + h
    for _ in range(iters):
        m1 = lo + (hi - lo) / 3.0
        m2 = hi - (hi - lo) / 3.0
        if obj(m1) <= obj(m2):
            hi = m2
        else:
            lo = m1
    w = 0.5 * (lo + hi)
    best_w, best_v = w, obj(w)
    for cand in (w0, lo, hi):
        v = obj(cand)
        if v < best_v:
            best_w, best_v = cand, v
    return np.array([best_w]), best_v


def _refine_compass(f: FunctionSpec, lam: float, x: np.ndarray, w0: np.ndarray,
                    h: float, iters: int) -> tuple[np.ndarray, float]:
    """Compass pattern search with deterministic direction order."""
    w = w0.copy()
    fw = _objective_scalar(f, lam, x, w)
    step = h
    dirs = []
    for j in range(x.size):
        e = np.zeros(x.size)
        e[j] = 1.0
        dirs.extend([e, -e])
    for _ in range(iters):
        best_w, best_v = None, fw
        for d in dirs:
            cand = w + step * d
            v = _objective_scalar(f, lam, x, cand)
            if v < best_v - 0.0:
                best_w, best_v = cand, v
        if best_w is None:
            step *= 0.5
            if step < 1e-15:
                break
        else:
            w, fw = best_w, best_v
    return w, fw


def _lex_less(a: np.ndarray, b: np.ndarray) -> bool:
    for u, v in zip(a, b):
        if u != v:
            return u < v
    return False


def _cluster(points: list, values: list, best: float, value_tol: float,
             radius: float) -> list:
    """Keep points within value_tol of best, grouped by radius.

    Cluster representatives are chosen by (value, lexicographic) order.
    """
    keep = [(v, tuple(p), p) for p, v in zip(points, values)
            if v <= best + value_tol]
    keep.sort(key=lambda t: (t[0], t[1]))
    reps: list = []
    for _, _, p in keep:
        if all(np.linalg.norm(p - r) > radius for r in reps):
            reps.append(p)
    return reps


def _divergence_scan(f: FunctionSpec, lam: float, x: np.ndarray,
                     cfg: ProxSolveConfig) -> ProxResult:
    """Expanding coarse search used when lam is at or above the certified
    threshold: doubles the radius up to a fixed number of times and flags
    divergence when the best objective keeps dropping along the expansion
    (tracking the guard value or a strictly decreasing boundary minimum)."""
    R0 = 8.0 * max(1.0, float(np.linalg.norm(x)))
    n_axis = 2001 if f.dim == 1 else 201
    best_hist = []
    boundary_hist = []
    last_pts = None
    last_vals = None
    R = R0
    for k in range(_EXPAND_STEPS + 1):
        axis = np.linspace(-R, R, n_axis)
        if f.dim == 1:
            pts = x + axis[:, None]
        else:
            mesh = np.meshgrid(*([axis] * f.dim), indexing="ij")
            pts = x + np.stack([g.ravel() for g in mesh], axis=1)
        vals = f.batch(pts) + np.sum((pts - x) ** 2, axis=1) / (2.0 * lam)
        i = int(np.argmin(vals))
        best = float(vals[i])
        dist = float(np.linalg.norm(pts[i] - x))
        best_hist.append(best)
        boundary_hist.append(dist >= R * (1.0 - 2.0 / n_axis) - 1e-12)
        last_pts, last_vals = pts, vals
        if best < _BETA_GUARD:
            return ProxResult(math.nan, [], True, R)
        R *= 2.0
    strictly_down = all(b2 < b1 - 1e-12 for b1, b2 in zip(best_hist, best_hist[1:]))
    if strictly_down and boundary_hist[-1]:
        return ProxResult(math.nan, [], True, R / 2.0)
    # no divergence detected: refine the best coarse point
    h = 2.0 * (R / 2.0) / (n_axis - 1)
    i = int(np.argmin(last_vals))
    w0 = last_pts[i]
    if f.dim == 1:
        w, v = _refine_1d(f, lam, x, float(w0[0]), h, cfg.refine_iters)
    else:
        w, v = _refine_compass(f, lam, x, w0, h, cfg.refine_iters)
    return ProxResult(v, [w], False, R / 2.0)


def _solve_grid(f: FunctionSpec, lam: float, x: np.ndarray,
                cfg: ProxSolveConfig) -> ProxResult:
    if f.dim > 2:
        raise InvalidArgument("grid oracle supports dimensions 1 and 2 only")
    R = search_radius(f, lam, x, cfg)
    h = cfg.step_for(f.dim)
    pts, h_eff = _grid_points(x, R, h)
    vals = f.batch(pts) + np.sum((pts - x) ** 2, axis=1) / (2.0 * lam)
    if not np.any(np.isfinite(vals)):
        raise NoFeasiblePoint(
            f"objective is +inf on the whole certified ball (R={R})"
        )
    if f.dim == 1:
        cand_idx = _grid_local_minima_1d(vals)
    else:
        m = round(len(vals) ** 0.5)
        cand_idx = _grid_local_minima_2d(vals, (m, m))
    if cand_idx.size == 0:
        cand_idx = np.array([int(np.argmin(vals))])
    if cand_idx.size > 50:
        order = np.argsort(vals[cand_idx], kind="stable")
        cand_idx = cand_idx[order[:50]]

    refined_pts, refined_vals = [], []
    for i in cand_idx:
        if f.dim == 1:
            w, v = _refine_1d(f, lam, x, float(pts[i][0]), h_eff, cfg.refine_iters)
        else:
            w, v = _refine_compass(f, lam, x, pts[i], h_eff, cfg.refine_iters)
        refined_pts.append(w)
        refined_vals.append(v)
    best = min(refined_vals)
    reps = _cluster(refined_pts, refined_vals, best, cfg.value_tol,
                    cfg.cluster_for(f.dim))
    return ProxResult(best, reps, False, R)


def _solve_closed_form(f: FunctionSpec, lam: float, x: np.ndarray,
                       cfg: ProxSolveConfig) -> ProxResult:
    cands = [as_point(w, f.dim) for w in f.closed_form_prox(lam, x)]
    vals = [_objective_scalar(f, lam, x, w) for w in cands]
    best = min(vals)
    reps = _cluster(cands, vals, best, cfg.value_tol, cfg.cluster_for(f.dim))
    radius = max(float(np.linalg.norm(w - x)) for w in reps)
    return ProxResult(best, reps, False, radius)


def prox_map(f: FunctionSpec, lam: float, x, cfg: Optional[ProxSolveConfig] = None,
             force_grid: bool = False) -> ProxResult:
    """Envelope value and proximal points of f at x for parameter lam.

    Uses the closed-form prox when the function provides one (unless
    force_grid); below the certified threshold falls back to the certified
    grid oracle, at or above it runs an expanding divergence scan.
    """
    if lam <= 0:
        raise InvalidArgument("lambda must be positive")
    cfg = cfg or ProxSolveConfig()
    x = as_point(x, f.dim)
    ensure_certificate(f)
    if lam >= f.certificate.threshold:
        return _divergence_scan(f, lam, x, cfg)
    if f.closed_form_prox is not None and not force_grid:
        return _solve_closed_form(f, lam, x, cfg)
    return _solve_grid(f, lam, x, cfg)


def moreau_envelope(f: FunctionSpec, lam: float, x,
                    cfg: Optional[ProxSolveConfig] = None,
                    force_grid: bool = False) -> float:
    """Envelope value at x; raises ThresholdExceeded when divergence is detected."""
    res = prox_map(f, lam, x, cfg, force_grid=force_grid)
    if res.diverged:
        raise ThresholdExceeded(lam, f.certificate.threshold)
    return res.envelope_value


def envelope_via_shift(f: FunctionSpec, s: QuadShift, lam: float, x,
                       cfg: Optional[ProxSolveConfig] = None) -> float:
    """Envelope of f evaluated through the shifted function's envelope:

        e_lam f(x) = e_gamma psi((x + sigma lam c)/(1 + sigma lam))
                     + sigma/(2 (1 + sigma lam)) ||x - c||^2,

    with gamma = lam/(1 + sigma lam) and psi the sigma-shift of f about c.
    """
    x = as_point(x, f.dim)
    sigma = s.sigma
    if not 0 < lam < 1.0 / abs(sigma):
        raise InvalidLambda(
            f"lambda = {lam} outside (0, {1.0 / abs(sigma)}) for sigma = {sigma}"
        )
    if lam >= f.certificate.threshold:
        raise ThresholdExceeded(lam, f.certificate.threshold)
    c = as_point(s.center, f.dim)
    gamma = lam / (1.0 + sigma * lam)
    psi = quad_shift(f, s)
    if gamma >= psi.certificate.threshold:
        raise ThresholdExceeded(gamma, psi.certificate.threshold)
    u = (x + sigma * lam * c) / (1.0 + sigma * lam)
    inner = moreau_envelope(psi, gamma, u, cfg)
    return inner + sigma / (2.0 * (1.0 + sigma * lam)) * float(np.sum((x - c) ** 2))


def shift_envelope_via_f(f: FunctionSpec, s: QuadShift, lam: float, x,
                         cfg: Optional[ProxSolveConfig] = None) -> float:
    """Envelope of the shifted function evaluated through f's envelope:

        e_lam psi(x) = e_mu f((x - sigma lam c)/(1 - sigma lam))
                       - sigma/(2 (1 - sigma lam)) ||x - c||^2,

    with mu = lam/(1 - sigma lam).
    """
    x = as_point(x, f.dim)
    sigma = s.sigma
    if not 0 < lam < 1.0 / abs(sigma):
        raise InvalidLambda(
            f"lambda = {lam} outside (0, {1.0 / abs(sigma)}) for sigma = {sigma}"
        )
    mu = lam / (1.0 - sigma * lam)
    if mu >= f.certificate.threshold:
        raise ThresholdExceeded(mu, f.certificate.threshold)
    c = as_point(s.center, f.dim)
    v = (x - sigma * lam * c) / (1.0 - sigma * lam)
    outer = moreau_envelope(f, mu, v, cfg)
    return outer - sigma / (2.0 * (1.0 - sigma * lam)) * float(np.sum((x - c) ** 2))


def envelope_gradient(f: FunctionSpec, lam: float, x,
                      cfg: Optional[ProxSolveConfig] = None,
                      force_grid: bool = False) -> np.ndarray:
    """Gradient (x - p)/lam of the envelope where the prox is single-valued."""
    x = as_point(x, f.dim)
    res = prox_map(f, lam, x, cfg, force_grid=force_grid)
    if res.diverged:
        raise ThresholdExceeded(lam, f.certificate.threshold)
    if len(res.minimizers) != 1:
        raise MultivaluedProx(
            f"proximal mapping has {len(res.minimizers)} clusters at x={x}"
        )
    return (x - res.minimizers[0]) / lam
