"""Isentropic Euler system with cubic pressure via Riemann invariants.

For the pressure law p(rho) = rho^3/3 the sound speed equals rho, the
characteristic speeds are v +- rho, and the Riemann invariants are
mu = rho + v and lam = rho - v.  In the smooth regime they decouple:

    d/dt mu + mu d/dx mu = 0
    d/dt lam - lam d/dx lam = 0

and each is regularised independently by mollifying its own advecting
field.  The lam equation is the mu equation under x -> -x (the kernel is
symmetric), so one transport solver serves both.  The two solves share
one time step, chosen from the larger invariant sup, so their stored
levels coincide and states can be recombined per step.

Conservation of mass and momentum holds only in the singular limit; the
weak residual of the conservative form against a bank of smooth
compactly supported test functions measures how far a run is from it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grids import GridFunction1D, GridMismatchError
from .kernel import build_mollifier
from .solver import SolverConfig, Trajectory, _solve_transport, _velocity_fn

__all__ = [
    "EulerState",
    "EulerTrajectory",
    "conservative_residual",
    "from_invariants",
    "solve_isentropic",
    "to_invariants",
]


def _check_shared_grid(a: GridFunction1D, b: GridFunction1D) -> None:
    if (
        abs(a.x0 - b.x0) > 1e-12 * max(1.0, abs(a.x0))
        or abs(a.dx - b.dx) > 1e-12 * a.dx
        or a.n != b.n
    ):
        raise GridMismatchError("fields must share one grid")


@dataclass
class EulerState:
    """Invariant pair on a shared grid; density and velocity are derived.

    Positivity of rho is a diagnostic, not a constraint: the invariant
    formulation degenerates at vacuum and no claim is made there."""

    mu: GridFunction1D
    lam: GridFunction1D

    def __post_init__(self) -> None:
        _check_shared_grid(self.mu, self.lam)

    @property
    def rho(self) -> GridFunction1D:
        return self.mu.with_values(0.5 * (self.mu.values + self.lam.values))

    @property
    def vel(self) -> GridFunction1D:
        return self.mu.with_values(0.5 * (self.mu.values - self.lam.values))

    @property
    def has_vacuum(self) -> bool:
        return bool(np.min(self.mu.values + self.lam.values) <= 0.0)


def to_invariants(rho: GridFunction1D, vel: GridFunction1D) -> EulerState:
    """mu = rho + vel, lam = rho - vel."""
    _check_shared_grid(rho, vel)
    return EulerState(
        mu=rho.with_values(rho.values + vel.values),
        lam=rho.with_values(rho.values - vel.values),
    )


def from_invariants(state: EulerState) -> tuple[GridFunction1D, GridFunction1D]:
    return state.rho, state.vel


def _reversed_grid(u: GridFunction1D) -> GridFunction1D:
    """The function x -> u(-x) on the mirrored grid."""
    return GridFunction1D(-u.x_end, u.dx, u.values[::-1].copy())


@dataclass
class EulerTrajectory:
    """Recombined invariant solves sharing one stored time grid."""

    times: np.ndarray
    states: list
    epsilon: float
    mu_trajectory: Trajectory
    lam_trajectory: Trajectory
    dt: float = 0.0

    @property
    def final(self) -> EulerState:
        return self.states[-1]


def solve_isentropic(
    rho0: GridFunction1D,
    vel0: GridFunction1D,
    epsilon: float,
    T: float,
    cfg: SolverConfig,
) -> EulerTrajectory:
    """Evolve both invariants and recombine stored levels.

    mu marches forward as nonlocal transport; lam marches as the same
    equation under x -> -x (values reversed, solved, reversed back).  The
    two solves never reference each other, so evolving them jointly is
    bitwise the same as evolving each alone."""
    _check_shared_grid(rho0, vel0)
    st0 = to_invariants(rho0, vel0)
    mu0 = st0.mu
    lam0 = st0.lam
    sup_shared = max(
        float(np.max(np.abs(mu0.values))),
        float(np.max(np.abs(lam0.values))),
    )
    dt = cfg.time_step(rho0.dx, sup_shared)
    m = build_mollifier(epsilon, rho0.dx)
    mu_traj = _solve_transport(
        mu0, m, T, cfg, _velocity_fn(m, None, "nn"), "nn", dt=dt
    )
    lam_rev_traj = _solve_transport(
        _reversed_grid(lam0), m, T, cfg, _velocity_fn(m, None, "nn"), "nn",
        dt=dt,
    )
    lam_states = [_reversed_grid(s) for s in lam_rev_traj.states]
    lam_traj = Trajectory(
        lam_rev_traj.times, lam_states, epsilon, "nn",
        picard_counts=lam_rev_traj.picard_counts,
    )
    if mu_traj.times.size != lam_traj.times.size or np.any(
        np.abs(mu_traj.times - lam_traj.times) > 1e-12
    ):
        raise RuntimeError("invariant solves lost their shared time grid")
    states = [
        EulerState(mu=ms, lam=ls)
        for ms, ls in zip(mu_traj.states, lam_traj.states)
    ]
    return EulerTrajectory(
        times=mu_traj.times,
        states=states,
        epsilon=float(epsilon),
        mu_trajectory=mu_traj,
        lam_trajectory=lam_traj,
        dt=dt,
    )


def _bump(z: np.ndarray) -> np.ndarray:
    """Smooth compactly supported bump on (-1, 1), unnormalised."""
    out = np.zeros_like(z)
    inside = np.abs(z) < 1.0
    zi = z[inside]
    out[inside] = np.exp(-1.0 / (1.0 - zi * zi))
    return out


def _bump_dz(z: np.ndarray) -> np.ndarray:
    out = np.zeros_like(z)
    inside = np.abs(z) < 1.0
    zi = z[inside]
    w = 1.0 - zi * zi
    out[inside] = np.exp(-1.0 / w) * (-2.0 * zi / (w * w))
    return out


def _test_bank(x: np.ndarray, T: float):
    """Space-time test functions psi(x, t) = bump((x-c)/w) * g(t).

    Spatial support is held one width inside the ends of the grid so the
    compact-support requirement is honest on the discrete domain."""
    a, b = float(x[0]), float(x[-1])
    span = b - a
    centers = (a + 0.35 * span, a + 0.5 * span, a + 0.65 * span)
    width = 0.3 * span
    gs = (
        (lambda t: np.ones_like(t), lambda t: np.zeros_like(t)),
        (lambda t: t / T, lambda t: np.full_like(t, 1.0 / T)),
        (
            lambda t: np.cos(np.pi * t / T),
            lambda t: -(np.pi / T) * np.sin(np.pi * t / T),
        ),
    )
    bank = []
    for c in centers:
        z = (x - c) / width
        phi = _bump(z)
        dphi = _bump_dz(z) / width
        for g, gdot in gs:
            bank.append((phi, dphi, g, gdot))
    return bank


def conservative_residual(states, times) -> tuple[float, float]:
    """Weak residual of the conservative Euler form along a trajectory.

    For each test function psi the exact weak identity

        int_0^T int (q psi_t + F(q) psi_x) dx dt
            + int q(0) psi(.,0) dx - int q(T) psi(.,T) dx = 0

    is assembled by rectangle-rule quadrature over the grid nodes and the
    stored time levels, for q = rho with flux rho*v and q = rho*v with
    flux rho*v^2 + rho^3/3.  Returned values are the maxima of the
    absolute residuals over the bank, per equation."""
    if len(states) < 3:
        raise ValueError("need at least 3 stored time levels")
    times = np.asarray(times, dtype=float)
    if times.size != len(states):
        raise ValueError("times and states disagree in length")
    g0 = states[0].mu
    x = g0.x
    dx = g0.dx
    T = float(times[-1])
    bank = _test_bank(x, T)
    q1 = []
    f1 = []
    q2 = []
    f2 = []
    for st in states:
        rho = st.rho.values
        vel = st.vel.values
        q1.append(rho)
        f1.append(rho * vel)
        q2.append(rho * vel)
        f2.append(rho * vel * vel + rho**3 / 3.0)
    r1 = 0.0
    r2 = 0.0
    dts = np.diff(times)
    for phi, dphi, g, gdot in bank:
        gt = g(times)
        gdt = gdot(times)
        for q, f, which in ((q1, f1, 1), (q2, f2, 2)):
            # space integrals at each level, then a left-endpoint rule in t
            space_qt = np.array([np.sum(qk * phi) * dx for qk in q])
            space_fx = np.array([np.sum(fk * dphi) * dx for fk in f])
            interior = float(
                np.sum((space_qt[:-1] * gdt[:-1] + space_fx[:-1] * gt[:-1]) * dts)
            )
            boundary = float(space_qt[0] * gt[0] - space_qt[-1] * gt[-1])
            res = abs(interior + boundary)
            if which == 1:
                r1 = max(r1, res)
            else:
                r2 = max(r2, res)
    return r1, r2
