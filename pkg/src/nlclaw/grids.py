"""Uniform-grid function representation, norms, sampling, interpolation.

All solvers in this package operate on functions sampled at the nodes
x_i = x0 + i*dx of a uniform 1D grid.  Outside the grid every function is
extended by its end values (constant continuation), which matches data that
are constant outside a compact interval.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "GridFunction1D",
    "GridMismatchError",
    "PiecewiseInitialData",
    "RiemannData",
    "interpolate",
    "l1_distance",
    "sample",
    "sup_norm",
    "total_variation",
    "uniform_grid",
]


class GridMismatchError(ValueError):
    """Two grid functions do not live on the same grid."""


@dataclass
class GridFunction1D:
    """Function values at the nodes x0 + i*dx, i = 0..len(values)-1."""

    x0: float
    dx: float
    values: np.ndarray

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=float)
        if self.dx <= 0.0:
            raise ValueError("dx must be positive")
        if self.values.ndim != 1 or self.values.size < 2:
            raise ValueError("values must be a 1D sequence of length >= 2")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("values must be finite")

    @property
    def n(self) -> int:
        return self.values.size

    @property
    def x(self) -> np.ndarray:
        return self.x0 + self.dx * np.arange(self.values.size)

    @property
    def x_end(self) -> float:
        return self.x0 + self.dx * (self.values.size - 1)

    def with_values(self, values: np.ndarray) -> "GridFunction1D":
        return GridFunction1D(self.x0, self.dx, np.asarray(values, dtype=float))

    def copy(self) -> "GridFunction1D":
        return GridFunction1D(self.x0, self.dx, self.values.copy())

    def same_grid(self, other: "GridFunction1D", tol: float = 1e-12) -> bool:
        return (
            self.n == other.n
            and abs(self.x0 - other.x0) <= tol * max(1.0, abs(self.x0))
            and abs(self.dx - other.dx) <= tol * self.dx
        )

    def window_slice(self, a: float, b: float) -> slice:
        """Index slice of nodes with a <= x_i <= b (half-cell tolerance)."""
        lo = int(np.ceil((a - self.x0) / self.dx - 0.5))
        hi = int(np.floor((b - self.x0) / self.dx + 0.5))
        lo = max(lo, 0)
        hi = min(hi, self.n - 1)
        if hi < lo:
            raise ValueError("window contains no grid nodes")
        return slice(lo, hi + 1)


@dataclass(frozen=True)
class RiemannData:
    """Two-state step datum: uL for x <= 0, uR for x > 0."""

    uL: float
    uR: float

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(x <= 0.0, self.uL, self.uR)


@dataclass(frozen=True)
class PiecewiseInitialData:
    """Piecewise datum: pieces[k] on (breakpoints[k-1], breakpoints[k]].

    pieces has one more entry than breakpoints; pieces[0] applies left of the
    first breakpoint and pieces[-1] right of the last.  Evaluation at a
    breakpoint uses the left piece (left-continuity convention).  Each piece
    must be Lipschitz with constant at most lipschitz_C on its interval.
    """

    breakpoints: tuple
    pieces: tuple
    lipschitz_C: float = 0.0

    def __post_init__(self) -> None:
        bps = tuple(float(b) for b in self.breakpoints)
        object.__setattr__(self, "breakpoints", bps)
        object.__setattr__(self, "pieces", tuple(self.pieces))
        if len(self.pieces) != len(bps) + 1:
            raise ValueError("need exactly one more piece than breakpoints")
        if any(b2 <= b1 for b1, b2 in zip(bps, bps[1:])):
            raise ValueError("breakpoints must be strictly increasing")
        if self.lipschitz_C < 0.0:
            raise ValueError("lipschitz_C must be nonnegative")

    def __call__(self, x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        # 'left' side counts breakpoints strictly below x, so x == a_k picks
        # the piece ending at a_k (left continuity).
        idx = np.searchsorted(np.asarray(self.breakpoints), x, side="left")
        out = np.empty_like(x)
        for k, piece in enumerate(self.pieces):
            mask = idx == k
            if np.any(mask):
                out[mask] = np.asarray(piece(x[mask]), dtype=float)
        return out

    def min_gap(self) -> float:
        if len(self.breakpoints) < 2:
            return np.inf
        gaps = np.diff(np.asarray(self.breakpoints))
        return float(gaps.min())


def uniform_grid(a: float, b: float, dx: float) -> tuple[float, int]:
    """Left endpoint and node count of the uniform grid covering [a, b].

    The node count is chosen so the last node lands on b up to rounding of
    (b - a)/dx; callers that need exact endpoints should pass commensurate
    a, b, dx.
    """
    if dx <= 0.0:
        raise ValueError("dx must be positive")
    if b <= a:
        raise ValueError("empty interval")
    n = int(round((b - a) / dx)) + 1
    return float(a), max(n, 2)


def sample(data, a: float, b: float, dx: float) -> GridFunction1D:
    """Sample initial data on the uniform grid covering [a, b].

    data may be a RiemannData, a PiecewiseInitialData, a plain callable of x,
    or a number (constant datum).  Sampling is pointwise at the nodes; jumps
    follow the left-continuity convention of the data object.
    """
    x0, n = uniform_grid(a, b, dx)
    x = x0 + dx * np.arange(n)
    if isinstance(data, PiecewiseInitialData):
        if data.min_gap() < 4.0 * dx:
            raise ValueError(
                "grid too coarse: fewer than 4 cells between breakpoints"
            )
        vals = data(x)
    elif callable(data):
        vals = np.asarray(data(x), dtype=float)
        if vals.shape != x.shape:
            vals = np.broadcast_to(vals, x.shape).astype(float)
    else:
        vals = np.full(n, float(data))
    return GridFunction1D(x0, dx, vals)


def total_variation(u: GridFunction1D) -> float:
    """Sum of absolute nodal increments; zero iff u is constant."""
    return float(np.sum(np.abs(np.diff(u.values))))


def sup_norm(u: GridFunction1D) -> float:
    return float(np.max(np.abs(u.values)))


def l1_distance(u: GridFunction1D, v: GridFunction1D, window=None) -> float:
    """Rectangle-rule L1 distance; grids must coincide.

    window, if given, is an (a, b) interval restricting the sum to nodes
    inside it.
    """
    if not u.same_grid(v):
        raise GridMismatchError("l1_distance requires identical grids")
    diff = np.abs(u.values - v.values)
    if window is not None:
        sl = u.window_slice(*window)
        diff = diff[sl]
    return float(np.sum(diff) * u.dx)


def interpolate_values(
    values: np.ndarray, x0: float, dx: float, xq: np.ndarray
) -> np.ndarray:
    """Piecewise-linear interpolation with constant extension.

    The result is clipped to the two bracketing nodal values, so it can
    never overshoot even in the last floating-point digit.  The solvers'
    exact maximum principle rests on this clip.
    """
    xq = np.asarray(xq, dtype=float)
    n = values.size
    pos = (xq - x0) / dx
    pos = np.clip(pos, 0.0, n - 1.0)
    i = np.minimum(pos.astype(np.int64), n - 2)
    theta = pos - i
    a = values[i]
    b = values[i + 1]
    out = a + theta * (b - a)
    return np.clip(out, np.minimum(a, b), np.maximum(a, b))


def interpolate(u: GridFunction1D, x) -> float | np.ndarray:
    """Evaluate u between nodes; monotone, never overshoots the bracket."""
    xq = np.asarray(x, dtype=float)
    out = interpolate_values(u.values, u.x0, u.dx, np.atleast_1d(xq))
    if xq.ndim == 0:
        return float(out[0])
    return out
