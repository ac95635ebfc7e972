"""Mollifier family and discrete convolution.

The default bump is eta(x) = I^-1 * exp(-1/(1-x^2)) on (-1, 1), scaled as
eta_eps(x) = eta(x/eps)/eps.  Discrete kernels are symmetric, nonnegative,
compactly supported in [-eps, eps] and renormalised to unit mass exactly,
so convolving a constant returns that constant to the last bit.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy.integrate import quad

from .grids import GridFunction1D, GridMismatchError

__all__ = [
    "Mollifier",
    "ResolutionError",
    "build_mollifier",
    "convolve",
    "convolve_values",
    "mollifier_normalization",
]


class ResolutionError(ValueError):
    """Kernel half-width is not resolved by the grid (eps < dx)."""


def _bump_unnormalized(x: np.ndarray) -> np.ndarray:
    """exp(-1/(1-x^2)) inside (-1, 1), zero outside."""
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    inside = np.abs(x) < 1.0
    xi = x[inside]
    out[inside] = np.exp(-1.0 / (1.0 - xi * xi))
    return out


@lru_cache(maxsize=1)
def mollifier_normalization() -> float:
    """The constant I = integral of exp(-1/(1-x^2)) over (-1, 1).

    Adaptive quadrature, refined to relative tolerance 1e-10 past the
    flat endpoints; deterministic.
    """
    val, _ = quad(
        lambda x: float(np.exp(-1.0 / (1.0 - x * x))),
        -1.0,
        1.0,
        epsabs=1e-14,
        epsrel=1e-12,
        limit=200,
    )
    return float(val)


@dataclass(frozen=True)
class Mollifier:
    """Discrete symmetric unit-mass kernel of half-width epsilon.

    weights[r + k] holds the weight at offset k*dx for k = -r..r with
    r = ceil(epsilon/dx).  Invariants: symmetric, nonnegative, sum exactly
    1.0, zero beyond |k|*dx > epsilon.
    """

    epsilon: float
    dx: float
    weights: np.ndarray
    normalization_I: float

    @property
    def radius(self) -> int:
        return (self.weights.size - 1) // 2

    @property
    def sup(self) -> float:
        """Sup-norm of the continuum kernel this discretisation represents."""
        return float(self.weights.max() / self.dx)

    def matches_grid(self, u: GridFunction1D, tol: float = 1e-12) -> bool:
        return abs(self.dx - u.dx) <= tol * self.dx


def build_mollifier(
    epsilon: float,
    dx: float,
    bump: Callable[[np.ndarray], np.ndarray] | None = None,
) -> Mollifier:
    """Sample eta_eps at offsets k*dx and renormalise to unit mass.

    One side is computed and mirrored, so symmetry is exact by
    construction.  The centre weight absorbs any residual so the sum is
    exactly 1.0 in floating point.
    """
    if epsilon <= 0.0 or dx <= 0.0:
        raise ValueError("epsilon and dx must be positive")
    if epsilon < dx:
        raise ResolutionError(
            f"kernel under-resolved: epsilon={epsilon} < dx={dx}"
        )
    if bump is None:
        bump = _bump_unnormalized
    r = int(np.ceil(epsilon / dx))
    offsets = dx * np.arange(r + 1)
    side = np.asarray(bump(offsets / epsilon), dtype=float)
    if np.any(side < 0.0) or side[0] <= 0.0:
        raise ValueError("bump must be nonnegative with positive centre")
    w = np.concatenate([side[::-1], side[1:]])
    w = w / w.sum()
    # np.sum is the arbiter of 'exactly 1'; nudge the centre until it agrees.
    for _ in range(5):
        defect = 1.0 - float(w.sum())
        if defect == 0.0:
            break
        w[r] += defect
    I = mollifier_normalization()
    return Mollifier(float(epsilon), float(dx), w, I)


def convolve_values(m: Mollifier, values: np.ndarray) -> np.ndarray:
    """Kernel applied to raw nodal values with constant end extension."""
    r = m.radius
    padded = np.concatenate(
        [np.full(r, values[0]), values, np.full(r, values[-1])]
    )
    # Symmetric kernel: correlation and convolution coincide.
    return np.convolve(padded, m.weights, mode="valid")


def convolve(m: Mollifier, u: GridFunction1D) -> GridFunction1D:
    """(eta_eps * u) on the grid of u, with constant extension of the ends.

    Nonnegative unit-mass weights make each output value a convex
    combination of inputs, so neither the sup-norm nor the total variation
    can increase.
    """
    if not m.matches_grid(u):
        raise GridMismatchError(
            f"mollifier built for dx={m.dx}, grid has dx={u.dx}"
        )
    return u.with_values(convolve_values(m, u.values))
