"""Extended-real-valued functions on R^n with quadratic lower-bound certificates.

A function is modeled by a vectorized evaluator mapping arrays of shape
(m, n) to values of shape (m,), where +inf marks points outside the
effective domain.  Every function carries a certificate (alpha, beta, anchor)
witnessing the lower bound

    f(x) >= alpha * ||x - anchor||^2 + beta    for all x,

which induces the threshold below which Moreau envelopes stay finite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import (
    CertificateInvalid,
    DimensionMismatch,
    InvalidArgument,
    InvalidFunctionValue,
)

Array = np.ndarray


def as_point(x, dim: Optional[int] = None) -> Array:
    """Coerce x to a 1-D float64 array, optionally checking its length."""
    p = np.atleast_1d(np.asarray(x, dtype=float))
    if p.ndim != 1:
        raise InvalidArgument(f"point must be 1-D, got shape {p.shape}")
    if not np.all(np.isfinite(p)):
        raise InvalidArgument(f"point coordinates must be finite: {p}")
    if dim is not None and p.size != dim:
        raise DimensionMismatch(f"expected dimension {dim}, got {p.size}")
    return p


@dataclass
class ProxBoundCertificate:
    """Witness of the quadratic lower bound f >= alpha*||.-anchor||^2 + beta."""

    alpha: float
    beta: float
    anchor: Array
    verified: bool = True

    def __post_init__(self):
        self.anchor = as_point(self.anchor)

    @property
    def threshold(self) -> float:
        """Largest lambda (exclusive) for which the envelope is certified finite."""
        if self.alpha >= 0:
            return math.inf
        return -1.0 / (2.0 * self.alpha)


@dataclass(frozen=True)
class KnownMinimizer:
    point: Array
    kind: str  # "local" or "strong"
    modulus: float = 0.0
    epsilon: float = 0.5

    def __post_init__(self):
        object.__setattr__(self, "point", as_point(self.point))
        if self.kind not in ("local", "strong"):
            raise InvalidArgument(f"unknown minimizer kind {self.kind!r}")
        if self.kind == "strong" and not self.modulus > 0:
            raise InvalidArgument("strong minimizer requires a positive modulus")


@dataclass
class FunctionSpec:
    """An extended-real-valued l.s.c. function on R^n.

    evaluator operates on arrays of shape (m, n) and returns shape (m,);
    +inf encodes points outside the domain.  closed_form_prox, when present,
    maps (lam, x) to the list of proximal points for the subproblem
    min_w f(w) + ||w - x||^2 / (2 lam).
    """

    dim: int
    evaluator: Callable[[Array], Array]
    certificate: ProxBoundCertificate
    closed_form_prox: Optional[Callable[[float, Array], list]] = None
    known_minimizers: tuple = ()
    name: str = ""
    expr: Optional[str] = None

    def __post_init__(self):
        if self.dim < 1:
            raise InvalidArgument("dimension must be >= 1")
        self.certificate.anchor = as_point(self.certificate.anchor, self.dim)
        self.known_minimizers = tuple(self.known_minimizers)

    def __call__(self, x) -> float:
        """Evaluate at a single point, with validity checks."""
        p = as_point(x, self.dim)
        v = float(self.evaluator(p[None, :])[0])
        if math.isnan(v) or v == -math.inf:
            raise InvalidFunctionValue(f"{self.name or 'function'} produced {v} at {p}")
        return v

    def batch(self, pts: Array) -> Array:
        """Evaluate at an (m, n) array; NaNs are mapped to +inf, -inf rejected."""
        vals = np.asarray(self.evaluator(pts), dtype=float)
        vals = np.where(np.isnan(vals), np.inf, vals)
        if np.any(vals == -np.inf):
            raise InvalidFunctionValue(f"{self.name or 'function'} produced -inf")
        return vals


@dataclass(frozen=True)
class QuadShift:
    """Parameters of the quadratic shift f(x) - (sigma/2)*||x - center||^2."""

    sigma: float
    center: Array

    def __post_init__(self):
        if self.sigma == 0:
            raise InvalidArgument("shift requires sigma != 0")
        object.__setattr__(self, "center", as_point(self.center))


def quad_shift(f: FunctionSpec, s: QuadShift) -> FunctionSpec:
    """Subtract the quadratic (sigma/2)*||x - center||^2 from f.

    The certificate is updated conservatively: for sigma > 0, expanding
    ||x-c||^2 <= 2||x-a||^2 + 2||a-c||^2 around the existing anchor a gives
    a valid witness (alpha - sigma, beta - sigma*||a-c||^2); for sigma < 0
    the shift only adds a nonnegative term and the certificate is kept.
    """
    c = as_point(s.center, f.dim)
    sigma = s.sigma
    base = f.evaluator

    def shifted(pts: Array) -> Array:
        return base(pts) - 0.5 * sigma * np.sum((pts - c) ** 2, axis=-1)

    cert = f.certificate
    if sigma > 0:
        gap = float(np.sum((cert.anchor - c) ** 2))
        new_cert = ProxBoundCertificate(
            cert.alpha - sigma, cert.beta - sigma * gap, cert.anchor.copy(),
            verified=cert.verified,
        )
    else:
        new_cert = ProxBoundCertificate(
            cert.alpha, cert.beta, cert.anchor.copy(), verified=cert.verified
        )
    return FunctionSpec(
        dim=f.dim,
        evaluator=shifted,
        certificate=new_cert,
        closed_form_prox=None,
        known_minimizers=(),
        name=f"shift({f.name or 'f'}, sigma={sigma})",
        expr=None,
    )


def prox_bound_threshold(cert: ProxBoundCertificate) -> float:
    return cert.threshold


def validate_certificate(f: FunctionSpec, samples: int = 10_000,
                         box_radius: float = 10.0, seed: int = 0,
                         tol: float = 1e-9) -> float:
    """Sample the certificate inequality; return the worst margin.

    Margin is min over samples of f(x) - (alpha*||x-anchor||^2 + beta); a
    negative margin beyond tol means the certificate is unsound.
    """
    cert = f.certificate
    rng = np.random.default_rng(seed)
    pts = cert.anchor + rng.uniform(-box_radius, box_radius, size=(samples, f.dim))
    vals = f.batch(pts)
    bound = cert.alpha * np.sum((pts - cert.anchor) ** 2, axis=1) + cert.beta
    finite = vals < np.inf
    if not np.any(finite):
        return math.inf  # empty sampled domain: bound vacuously holds
    return float(np.min(vals[finite] - bound[finite]))


def ensure_certificate(f: FunctionSpec, tol: float = 1e-9) -> None:
    """Re-validate an unverified certificate by sampling; raise if it fails."""
    if f.certificate.verified:
        return
    margin = validate_certificate(f)
    if margin < -tol:
        raise CertificateInvalid(
            f"certificate (alpha={f.certificate.alpha}, beta={f.certificate.beta}) "
            f"violated by sampling, worst margin {margin:.3e}"
        )
    f.certificate.verified = True


# ---------------------------------------------------------------------------
# catalog
# ---------------------------------------------------------------------------

def _sq_norm(pts: Array) -> Array:
    return np.sum(pts * pts, axis=-1)


def make_quadratic(a: float = 1.0, dim: int = 1) -> FunctionSpec:
    """a * ||x||^2 with a > 0."""
    if a <= 0:
        raise InvalidArgument("quadratic coefficient must be positive")

    def prox(lam, x):
        return [x / (1.0 + 2.0 * a * lam)]

    expr = None
    if dim == 1:
        expr = f"{a!r}*x1^2" if a != 1.0 else "x1^2"
    elif dim == 2:
        expr = f"{a!r}*(x1^2+x2^2)" if a != 1.0 else "x1^2+x2^2"
    return FunctionSpec(
        dim=dim,
        evaluator=lambda pts: a * _sq_norm(pts),
        certificate=ProxBoundCertificate(a, 0.0, np.zeros(dim)),
        closed_form_prox=prox,
        known_minimizers=(KnownMinimizer(np.zeros(dim), "strong", 2.0 * a, 1.0),),
        name=f"quadratic(a={a})" if a != 1.0 else "quadratic",
        expr=expr,
    )


def make_abs(dim: int = 1) -> FunctionSpec:
    """l1 norm; the absolute value for dim == 1."""

    def prox(lam, x):
        return [np.sign(x) * np.maximum(np.abs(x) - lam, 0.0)]

    expr = "abs(x1)" if dim == 1 else "+".join(f"abs(x{i+1})" for i in range(dim))
    return FunctionSpec(
        dim=dim,
        evaluator=lambda pts: np.sum(np.abs(pts), axis=-1),
        certificate=ProxBoundCertificate(0.0, 0.0, np.zeros(dim)),
        closed_form_prox=prox,
        known_minimizers=(KnownMinimizer(np.zeros(dim), "strong", 2.0, 1.0),),
        name="abs",
        expr=expr,
    )


def make_huber(delta: float = 1.0, dim: int = 1) -> FunctionSpec:
    """Componentwise Huber: t^2/2 for |t| <= delta, else delta*|t| - delta^2/2."""
    if delta <= 0:
        raise InvalidArgument("huber delta must be positive")

    def ev(pts):
        a = np.abs(pts)
        per = np.where(a <= delta, 0.5 * pts * pts, delta * a - 0.5 * delta * delta)
        return np.sum(per, axis=-1)

    def prox(lam, x):
        # quadratic region shrinks by 1/(1+lam); linear region soft-shifts
        w = np.where(
            np.abs(x) <= delta * (1.0 + lam),
            x / (1.0 + lam),
            x - lam * delta * np.sign(x),
        )
        return [w]

    return FunctionSpec(
        dim=dim,
        evaluator=ev,
        certificate=ProxBoundCertificate(0.0, 0.0, np.zeros(dim)),
        closed_form_prox=prox,
        known_minimizers=(KnownMinimizer(np.zeros(dim), "strong", 1.0, delta),),
        name=f"huber(delta={delta})" if delta != 1.0 else "huber",
        expr=None,
    )


def make_box(lo: float = 0.0, hi: float = 1.0, dim: int = 1) -> FunctionSpec:
    """Indicator of the closed box [lo, hi]^n (0 inside, +inf outside)."""
    if not lo < hi:
        raise InvalidArgument("box requires lo < hi")
    center = np.full(dim, 0.5 * (lo + hi))

    def ev(pts):
        inside = np.all((pts >= lo) & (pts <= hi), axis=-1)
        return np.where(inside, 0.0, np.inf)

    def prox(lam, x):
        return [np.clip(x, lo, hi)]

    expr = f"ind({lo!r},{hi!r})"
    return FunctionSpec(
        dim=dim,
        evaluator=ev,
        certificate=ProxBoundCertificate(0.0, 0.0, center),
        closed_form_prox=prox,
        known_minimizers=(KnownMinimizer(center, "local", 0.0, 0.4 * (hi - lo)),),
        name=f"box[{lo},{hi}]",
        expr=expr,
    )


def make_neg_quad(a: float = 0.5, dim: int = 1) -> FunctionSpec:
    """-a * ||x||^2 with a > 0; prox-bounded with finite threshold 1/(2a)."""
    if a <= 0:
        raise InvalidArgument("neg_quad coefficient must be positive")

    def prox(lam, x):
        # valid only below the threshold 1/(2a)
        return [x / (1.0 - 2.0 * a * lam)]

    expr = f"0-{a!r}*x1^2" if dim == 1 else None
    return FunctionSpec(
        dim=dim,
        evaluator=lambda pts: -a * _sq_norm(pts),
        certificate=ProxBoundCertificate(-a, 0.0, np.zeros(dim)),
        closed_form_prox=prox,
        known_minimizers=(),
        name=f"neg_quad(a={a})",
        expr=expr,
    )


def _double_well_prox_1d(lam: float, x: float) -> list:
    """Real minimizers of (w^2-1)^2 + (w-x)^2/(2 lam) via the cubic stationarity
    equation 4*lam*w^3 + (1 - 4*lam)*w - x = 0."""
    roots = np.roots([4.0 * lam, 0.0, 1.0 - 4.0 * lam, -x])
    cands = sorted(float(r.real) for r in roots if abs(r.imag) < 1e-9)
    vals = [(w * w - 1.0) ** 2 + (w - x) ** 2 / (2.0 * lam) for w in cands]
    best = min(vals)
    out = [w for w, v in zip(cands, vals) if v <= best + 1e-12 * max(1.0, abs(best))]
    # dedupe nearly-identical roots
    dedup: list = []
    for w in out:
        if not dedup or abs(w - dedup[-1]) > 1e-10:
            dedup.append(w)
    return dedup


def make_double_well(dim: int = 1) -> FunctionSpec:
    """Separable sum of (t^2 - 1)^2 over the coordinates."""

    def ev(pts):
        return np.sum((pts * pts - 1.0) ** 2, axis=-1)

    def prox(lam, x):
        per_axis = [_double_well_prox_1d(lam, float(t)) for t in x]
        combos: list = [[]]
        for opts in per_axis:
            combos = [c + [w] for c in combos for w in opts]
        return [np.array(c) for c in combos]

    mins = []
    for signs in np.ndindex(*(2,) * dim):
        p = np.array([1.0 if s == 0 else -1.0 for s in signs])
        mins.append(KnownMinimizer(p, "strong", 6.0, 0.1))
    expr = "(x1^2-1)^2" if dim == 1 else None
    return FunctionSpec(
        dim=dim,
        evaluator=ev,
        certificate=ProxBoundCertificate(0.0, 0.0, np.zeros(dim)),
        closed_form_prox=prox,
        known_minimizers=tuple(mins),
        name="double_well",
        expr=expr,
    )


def make_piecewise() -> FunctionSpec:
    """min(x^2, (x-2)^2 + 0.5): global minimizer 0, nonglobal local minimizer 2."""

    def ev(pts):
        t = pts[..., 0]
        return np.minimum(t * t, (t - 2.0) ** 2 + 0.5)

    def ev_scalar(w: float) -> float:
        return min(w * w, (w - 2.0) ** 2 + 0.5)

    def prox(lam, x):
        t = float(x[0])
        # the envelope of a pointwise min is the min of the branch envelopes,
        # so branch proxes are the only candidates
        w1 = t / (1.0 + 2.0 * lam)
        w2 = (4.0 * lam + t) / (1.0 + 2.0 * lam)
        cands = sorted({w1, w2})
        vals = [ev_scalar(w) + (w - t) ** 2 / (2.0 * lam) for w in cands]
        best = min(vals)
        return [np.array([w]) for w, v in zip(cands, vals)
                if v <= best + 1e-12 * max(1.0, abs(best))]

    return FunctionSpec(
        dim=1,
        evaluator=ev,
        certificate=ProxBoundCertificate(0.0, 0.0, np.zeros(1)),
        closed_form_prox=prox,
        known_minimizers=(
            KnownMinimizer(np.array([0.0]), "strong", 2.0, 0.5),
            KnownMinimizer(np.array([2.0]), "strong", 2.0, 0.3),
        ),
        name="piecewise",
        expr="min(x1^2,(x1-2)^2+0.5)",
    )


def make_well_plus_abs_2d() -> FunctionSpec:
    """(x1^2-1)^2 + |x2|: a 2-D sum with strong minimizers at (+-1, 0)."""

    def ev(pts):
        return (pts[..., 0] ** 2 - 1.0) ** 2 + np.abs(pts[..., 1])

    def prox(lam, x):
        first = _double_well_prox_1d(lam, float(x[0]))
        second = math.copysign(max(abs(float(x[1])) - lam, 0.0), float(x[1]))
        return [np.array([w, second]) for w in first]

    return FunctionSpec(
        dim=2,
        evaluator=ev,
        certificate=ProxBoundCertificate(0.0, 0.0, np.zeros(2)),
        closed_form_prox=prox,
        known_minimizers=(
            KnownMinimizer(np.array([1.0, 0.0]), "strong", 6.0, 0.1),
            KnownMinimizer(np.array([-1.0, 0.0]), "strong", 6.0, 0.1),
        ),
        name="well_plus_abs_2d",
        expr="(x1^2-1)^2+abs(x2)",
    )


CATALOG: dict[str, Callable[..., FunctionSpec]] = {
    "quadratic": make_quadratic,
    "abs": make_abs,
    "huber": make_huber,
    "box": make_box,
    "neg_quad": make_neg_quad,
    "double_well": make_double_well,
    "piecewise": make_piecewise,
    "well_plus_abs_2d": make_well_plus_abs_2d,
}


def catalog_function(name: str, **params) -> FunctionSpec:
    """Instantiate a catalog entry by name, e.g. catalog_function('huber', delta=2)."""
    try:
        factory = CATALOG[name]
    except KeyError:
        raise InvalidArgument(
            f"unknown catalog function {name!r}; available: {sorted(CATALOG)}"
        ) from None
    return factory(**params)
