"""Shared fixtures and the independent brute-force envelope oracle.

The oracle here is intentionally naive (a dense vectorized scan with no
refinement and no certified radius) so it stays independent of the package's
grid solver.
"""

import numpy as np
import pytest

from moreaukit import FunctionSpec


def brute_envelope_1d(f: FunctionSpec, lam: float, x: float,
                      lo: float = -12.0, hi: float = 12.0,
                      n: int = 1_200_001) -> float:
    """Dense-scan lower envelope value; accuracy ~ (grid step)^2 * curvature."""
    w = np.linspace(lo, hi, n)[:, None]
    vals = f.batch(w) + (w[:, 0] - x) ** 2 / (2.0 * lam)
    return float(np.min(vals))


def brute_argmin_1d(f: FunctionSpec, lam: float, x: float,
                    lo: float = -12.0, hi: float = 12.0,
                    n: int = 1_200_001) -> float:
    w = np.linspace(lo, hi, n)
    vals = f.batch(w[:, None]) + (w - x) ** 2 / (2.0 * lam)
    return float(w[int(np.argmin(vals))])


def brute_envelope_2d(f: FunctionSpec, lam: float, x,
                      half_width: float = 4.0, n: int = 801) -> float:
    x = np.asarray(x, dtype=float)
    axis = np.linspace(-half_width, half_width, n)
    g1, g2 = np.meshgrid(axis + x[0], axis + x[1], indexing="ij")
    w = np.stack([g1.ravel(), g2.ravel()], axis=1)
    vals = f.batch(w) + np.sum((w - x) ** 2, axis=1) / (2.0 * lam)
    return float(np.min(vals))


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
