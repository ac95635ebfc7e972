"""Nonlocal transport solvers.

The workhorse is a semi-Lagrangian scheme that is self-consistent in the
velocity: the advecting field is the mollified *new* state, found by Picard
iteration, mirroring the fixed-point construction that gives the continuum
equation its classical solutions.  Three velocity wirings share the scheme:

    nn            v = eta_eps * u            (Burgers-type nonlocal model)
    velocity_reg  v = eta_eps * f'(u)
    flux_reg      v = f'(eta_eps * u)

Multi-step solves advect the backward characteristic map phi(t, x) =
y_{t,x}(0) (phi itself solves the transport equation with phi(0, x) = x)
and recover the state as u(t) = u0(phi(t)).  Composing with the datum
instead of re-interpolating the state step after step is what keeps a
two-valued step datum two-valued forever: re-interpolation would seed
intermediate values in the jump cell, and the velocity gradient of order
1/epsilon would stretch them into a spurious rarefaction fan, erasing
exactly the non-convergence behaviour this model exists to exhibit.  The
interpolation of phi at the characteristic feet is cubic and clipped to
the bracketing nodal values, so the visited portion of the datum, the
range of the data, and its total variation can only shrink, never grow.

A conservative finite-volume variant of the nonlocal model is provided for
comparison.  It conserves mass by construction and deliberately carries no
maximum-principle guarantee; the divergence between the two is a feature
under study, not a bug.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .fluxes import FluxSpec
from .grids import (
    GridFunction1D,
    PiecewiseInitialData,
    RiemannData,
    interpolate_values,
    sup_norm,
)
from .kernel import Mollifier, build_mollifier, convolve_values

__all__ = [
    "CFLViolationError",
    "PicardDivergenceError",
    "SolverConfig",
    "Trajectory",
    "backward_characteristic",
    "solve_conservative_nonlocal",
    "solve_general",
    "solve_nn",
    "step_nn",
]

SUP_FLOOR = 1e-12  # dt cap divisor for all-zero data

MODES = ("nn", "conservative", "velocity_reg", "flux_reg", "godunov")


class CFLViolationError(ValueError):
    """Time step exceeds the configured CFL bound."""


class PicardDivergenceError(RuntimeError):
    """Self-consistency iteration failed to contract; dt is too large."""


@dataclass(frozen=True)
class SolverConfig:
    """Step-size, iteration and padding policy shared by all solvers.

    dx is optional; when set it must agree with the grid of the data (it
    exists so scenario files can carry the full discretisation in one
    place).  padding_margin enters the domain rule
    pad = sup|u0| * T + epsilon + margin used by the scenario runner.
    """

    dx: float | None = None
    cfl: float = 0.5
    picard_tol: float = 1e-10
    picard_max_iters: int = 50
    padding_margin: float = 1.0
    store_stride: int = 1

    def __post_init__(self) -> None:
        if not (0.0 < self.cfl <= 1.0):
            raise ValueError("cfl must lie in (0, 1]")
        if self.picard_tol <= 0.0:
            raise ValueError("picard_tol must be positive")
        if self.picard_max_iters < 1:
            raise ValueError("picard_max_iters must be >= 1")
        if self.store_stride < 1:
            raise ValueError("store_stride must be >= 1")

    def padding(self, sup0: float, epsilon: float, T: float) -> float:
        return sup0 * T + epsilon + self.padding_margin

    def time_step(self, dx: float, sup0: float) -> float:
        return self.cfl * dx / max(sup0, SUP_FLOOR)

    def check_grid(self, u0: GridFunction1D) -> None:
        if self.dx is not None and abs(self.dx - u0.dx) > 1e-12 * u0.dx:
            raise ValueError(
                f"config dx={self.dx} does not match grid dx={u0.dx}"
            )


@dataclass
class Trajectory:
    """Stored time levels of one solve on a fixed grid."""

    times: np.ndarray
    states: list
    epsilon: float
    mode: str
    picard_counts: np.ndarray | None = None

    def __post_init__(self) -> None:
        self.times = np.asarray(self.times, dtype=float)
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.times.size != len(self.states):
            raise ValueError("times and states must have equal length")
        if self.times.size and (
            self.times[0] != 0.0 or np.any(np.diff(self.times) <= 0.0)
        ):
            raise ValueError("times must start at 0 and increase strictly")
        g0 = self.states[0]
        for s in self.states[1:]:
            if not g0.same_grid(s):
                raise ValueError("all states must share one grid")

    @property
    def grid(self) -> GridFunction1D:
        return self.states[0]

    @property
    def final(self) -> GridFunction1D:
        return self.states[-1]

    @property
    def final_time(self) -> float:
        return float(self.times[-1])

    def state_at(self, t: float) -> GridFunction1D:
        """Stored state nearest to t (no interpolation)."""
        k = int(np.argmin(np.abs(self.times - t)))
        return self.states[k]

    def max_sup_growth(self) -> float:
        """Worst sup-norm excess over the initial state (0 under the
        maximum principle, possibly positive for the conservative mode)."""
        sup0 = sup_norm(self.states[0])
        return max(sup_norm(s) - sup0 for s in self.states)


def _picard_step(
    values: np.ndarray,
    x0: float,
    dx: float,
    x: np.ndarray,
    velocity_of: Callable[[np.ndarray], np.ndarray],
    dt: float,
    tol: float,
    max_iters: int,
) -> tuple[np.ndarray, int]:
    """One self-consistent semi-Lagrangian step on raw arrays.

    Iterates velocity from the candidate new state: feet are traced with a
    midpoint rule using the candidate's own velocity field, and the old
    state is interpolated at the feet.  Converges when successive
    candidates agree to tol in sup-norm.
    """
    cand = values
    for j in range(max_iters):
        v = velocity_of(cand)
        xm = x - 0.5 * dt * v
        vmid = interpolate_values(v, x0, dx, xm)
        feet = x - dt * 0.5 * (v + vmid)
        new = interpolate_values(values, x0, dx, feet)
        change = float(np.max(np.abs(new - cand)))
        cand = new
        if change < tol:
            return cand, j + 1
    raise PicardDivergenceError(
        f"no contraction after {max_iters} iterations (last change {change:.3e}); "
        "reduce dt"
    )


def _interp_foot(
    phi: np.ndarray, x0: float, dx: float, y: np.ndarray
) -> np.ndarray:
    """Interpolate the foot field phi at positions y.

    Inside the grid: 4-point cubic Lagrange, clipped to the bracketing
    nodal values.  The clip keeps the interpolant monotone wherever phi is,
    which is what makes range and total variation shrink under composition
    with the datum.  Cubic rather than linear matters at a compressive
    front: phi steepens there with one-sided curvature, and the linear
    interpolation error (~ phi'' dx^2) then pushes the datum-jump preimage
    systematically sideways, i.e. the front drifts off its speed by O(1)
    percents.  The cubic knocks that error down by the squared ratio of
    front width to dx.  Outside the grid: unit-slope extension, exact
    wherever the boundary zone is causally constant (phi(x) - x is
    constant there).
    """
    n = phi.size
    pos = (y - x0) / dx
    i = np.clip(np.floor(pos).astype(int), 0, n - 2)
    th = pos - i
    a = phi[i]
    b = phi[i + 1]
    out = a + th * (b - a)
    inner = (i >= 1) & (i <= n - 3)
    if np.any(inner):
        ii = i[inner]
        s = th[inner]
        pm1 = phi[ii - 1]
        p0 = phi[ii]
        p1 = phi[ii + 1]
        p2 = phi[ii + 2]
        wm1 = -s * (s - 1.0) * (s - 2.0) / 6.0
        w0 = (s * s - 1.0) * (s - 2.0) / 2.0
        w1 = -s * (s + 1.0) * (s - 2.0) / 2.0
        w2 = s * (s * s - 1.0) / 6.0
        out[inner] = wm1 * pm1 + w0 * p0 + w1 * p1 + w2 * p2
    np.clip(out, np.minimum(a, b), np.maximum(a, b), out=out)
    left = pos < 0.0
    if np.any(left):
        out[left] = phi[0] + (y[left] - x0)
    right = pos > n - 1
    if np.any(right):
        out[right] = phi[-1] + (y[right] - (x0 + (n - 1) * dx))
    return out


def _datum_evaluator(
    u0: GridFunction1D, data
) -> Callable[[np.ndarray], np.ndarray]:
    """Map foot positions to initial values, clipped to the sampled range.

    With a functional datum the evaluation is exact, which is what lets a
    jump stay sharp: feet on either side of the discontinuity resolve to
    the pure one-sided states no matter how closely they crowd it.  Without
    one, the sampled initial state is linearly interpolated, which is fine
    for smooth data.  The clip pins the maximum principle to the range of
    the stored initial state even where a smooth datum peaks between nodes.
    """
    lo = float(np.min(u0.values))
    hi = float(np.max(u0.values))
    if data is None:
        return lambda y: interpolate_values(u0.values, u0.x0, u0.dx, y)
    if callable(data):
        fn = data
    elif isinstance(data, (int, float)):
        c = float(data)
        fn = lambda y: np.full_like(y, c)
    else:
        raise TypeError(f"cannot evaluate initial data of type {type(data)!r}")

    def ev(y: np.ndarray) -> np.ndarray:
        vals = np.asarray(fn(y), dtype=float)
        if vals.shape != y.shape:
            vals = np.broadcast_to(vals, y.shape).astype(float)
        return np.clip(vals, lo, hi)

    return ev


def _picard_step_foot(
    phi_prev: np.ndarray,
    vals_prev: np.ndarray,
    x0: float,
    dx: float,
    x: np.ndarray,
    velocity_of: Callable[[np.ndarray], np.ndarray],
    ev: Callable[[np.ndarray], np.ndarray],
    dt: float,
    tol: float,
    max_iters: int,
    fronts: tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray] | None = None,
) -> tuple[np.ndarray, np.ndarray, int, np.ndarray]:
    """One self-consistent step of the foot-field formulation.

    The velocity comes from the candidate new state u0 o phi, the feet are
    traced with the midpoint rule, and the previous foot field is
    interpolated at the feet.  Convergence is measured on phi (a continuous
    quantity even across jumps of the state).

    fronts, when given, is (gammas, jump_pos, jump_left, jump_right): the
    tracked preimages of the datum jumps at the start of the step plus the
    jump data.  Each pass then advances the preimages through the candidate
    velocity and pins the jump side of nearby nodes to the preimage rather
    than to the interpolated foot field, so the velocity the next pass
    mollifies is centred on the kinematically correct front position.  The
    pin must live inside the iteration: applied only afterwards, the
    mollified velocity stays centred on the biased front and the preimage
    simply locks in behind it at the same biased speed.

    A datum jump makes the iteration map discontinuous: a node whose foot
    converges onto the jump flips between the one-sided states each pass,
    displacing its own foot by O(dt * dx/eps) and back, so no fixed point
    exists and the iteration closes into an exact period-2 cycle instead.
    The two members differ only in which side of the jump that foot sits
    on -- a sub-cell ambiguity in the jump's placement, not in the weak
    solution -- so the cycle is accepted once it has closed to tol and the
    current member is returned (a deterministic choice).
    """
    cand_phi = phi_prev
    cand_vals = vals_prev
    cand_gam = None if fronts is None else fronts[0]
    older_phi = None
    for j in range(max_iters):
        v = velocity_of(cand_vals)
        xm = x - 0.5 * dt * v
        vmid = interpolate_values(v, x0, dx, xm)
        feet = x - dt * 0.5 * (v + vmid)
        new_phi = _interp_foot(phi_prev, x0, dx, feet)
        change = float(np.max(np.abs(new_phi - cand_phi)))
        cycle = (
            float(np.max(np.abs(new_phi - older_phi)))
            if older_phi is not None
            else np.inf
        )
        older_phi = cand_phi
        cand_phi = new_phi
        cand_vals = ev(new_phi)
        if fronts is not None:
            gam0, jump_pos, jump_left, jump_right = fronts
            cand_gam = _advance_fronts(gam0, x0, dx, v, dt)
            cand_vals = _pin_fronts(
                cand_vals, new_phi, x, cand_gam,
                jump_pos, jump_left, jump_right,
            )
        if change < tol or cycle < tol:
            return cand_phi, cand_vals, j + 1, cand_gam
    raise PicardDivergenceError(
        f"no contraction after {max_iters} iterations (last change {change:.3e}); "
        "reduce dt"
    )


def _datum_jumps(data) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Jump positions and one-sided limits of a structured functional datum.

    Only the structured datum types expose their discontinuities exactly;
    an arbitrary callable or a plain number contributes no tracked jumps.
    """
    if isinstance(data, RiemannData):
        if data.uL != data.uR:
            return (
                np.array([0.0]),
                np.array([float(data.uL)]),
                np.array([float(data.uR)]),
            )
    elif isinstance(data, PiecewiseInitialData):
        pos, lefts, rights = [], [], []
        for k, b in enumerate(data.breakpoints):
            bq = np.array([float(b)])
            fl = float(np.asarray(data.pieces[k](bq), dtype=float).ravel()[0])
            fr = float(np.asarray(data.pieces[k + 1](bq), dtype=float).ravel()[0])
            if fl != fr:
                pos.append(float(b))
                lefts.append(fl)
                rights.append(fr)
        if pos:
            return (np.array(pos), np.array(lefts), np.array(rights))
    return (np.empty(0), np.empty(0), np.empty(0))


def _advance_fronts(
    gammas: np.ndarray, x0: float, dx: float, v: np.ndarray, dt: float
) -> np.ndarray:
    """Midpoint step of d(gamma)/dt = v(gamma) for the jump preimages.

    Differentiating phi(t, gamma(t)) = const through the transport equation
    shows the preimage of a datum point moves at exactly the local
    velocity, so this ODE is the front kinematics with no interpolation of
    phi involved.  Preimages of distinct datum points cannot cross under a
    continuous velocity; the running maximum only repairs roundoff order
    violations once fronts have merged.
    """
    v1 = interpolate_values(v, x0, dx, gammas)
    v2 = interpolate_values(v, x0, dx, gammas + 0.5 * dt * v1)
    out = gammas + dt * v2
    if out.size > 1:
        out = np.maximum.accumulate(out)
    return out


def _pin_fronts(
    vals: np.ndarray,
    phi: np.ndarray,
    x: np.ndarray,
    gammas: np.ndarray,
    jump_pos: np.ndarray,
    jump_left: np.ndarray,
    jump_right: np.ndarray,
) -> np.ndarray:
    """Overwrite the jump side where phi disagrees with the tracked preimage.

    The zero of the interpolated foot field places a flip cell only to
    within the local interpolation error of phi, and at a compressive front
    that error is one-sided, so the flip cell acquires a systematic speed
    bias.  The tracked preimage gamma carries the exact kinematics, so
    nodes between the two placements are reassigned to gamma's side of the
    jump.  The overwritten values are one-sided datum limits, hence the
    profile remains a composition of the datum with a monotone
    reparametrization and the range and variation bounds survive intact.
    """
    for g, y, fl, fr in zip(gammas, jump_pos, jump_left, jump_right):
        wrong_left = (x <= g) & (phi > y)
        if np.any(wrong_left):
            vals[wrong_left] = fl
        wrong_right = (x > g) & (phi <= y)
        if np.any(wrong_right):
            vals[wrong_right] = fr
    return vals


def _velocity_fn(
    m: Mollifier, flux: FluxSpec | None, mode: str
) -> Callable[[np.ndarray], np.ndarray]:
    if mode == "nn":
        return lambda u: convolve_values(m, u)
    if mode == "velocity_reg":
        return lambda u: convolve_values(m, flux.fprime(u))
    if mode == "flux_reg":
        return lambda u: flux.fprime(convolve_values(m, u))
    raise ValueError(f"no velocity wiring for mode {mode!r}")


def step_nn(
    u_n: GridFunction1D, m: Mollifier, dt: float, cfg: SolverConfig
) -> GridFunction1D:
    """Advance the nonlocal Burgers-type model by one step of size dt.

    Guarantees min(u_n) <= result <= max(u_n) pointwise (clipped
    interpolation) and TV(result) <= TV(u_n).
    """
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    limit = cfg.time_step(u_n.dx, sup_norm(u_n))
    if dt > limit * (1.0 + 1e-9):
        raise CFLViolationError(f"dt={dt} exceeds CFL limit {limit}")
    vals, _ = _picard_step(
        u_n.values,
        u_n.x0,
        u_n.dx,
        u_n.x,
        _velocity_fn(m, None, "nn"),
        dt,
        cfg.picard_tol,
        cfg.picard_max_iters,
    )
    return u_n.with_values(vals)


def _solve_transport(
    u0: GridFunction1D,
    m: Mollifier,
    T: float,
    cfg: SolverConfig,
    velocity_of: Callable[[np.ndarray], np.ndarray],
    mode: str,
    data=None,
    dt: float | None = None,
) -> Trajectory:
    """Uniform-dt stepping loop shared by every non-conservative mode.

    Advances the foot field phi (phi(0) = identity) and stores
    u = u0 o phi at each kept level.  dt, when given, overrides the
    sup-norm CFL choice so coupled solves can share a time grid.
    """
    cfg.check_grid(u0)
    if T <= 0.0:
        raise ValueError("T must be positive")
    if dt is None:
        dt = cfg.time_step(u0.dx, sup_norm(u0))
    elif dt <= 0.0:
        raise ValueError("dt must be positive")
    n_steps = max(1, int(np.ceil(T / dt - 1e-12)))
    x = u0.x
    ev = _datum_evaluator(u0, data)
    jump_pos, jump_left, jump_right = _datum_jumps(data)
    gammas = jump_pos.copy()
    phi = x.copy()
    vals = u0.values.copy()
    times = [0.0]
    states = [u0.copy()]
    counts = []
    t = 0.0
    for k in range(n_steps):
        t_next = min((k + 1) * dt, T)
        step_dt = t_next - t
        if step_dt <= 0.0:
            break
        fronts = (
            (gammas, jump_pos, jump_left, jump_right) if gammas.size else None
        )
        phi, vals, nit, gammas_new = _picard_step_foot(
            phi, vals, u0.x0, u0.dx, x, velocity_of, ev, step_dt,
            cfg.picard_tol, cfg.picard_max_iters, fronts=fronts,
        )
        if gammas_new is not None:
            gammas = gammas_new
        counts.append(nit)
        t = t_next
        if (k + 1) % cfg.store_stride == 0 or t >= T:
            times.append(t)
            states.append(u0.with_values(vals.copy()))
    return Trajectory(
        np.asarray(times), states, m.epsilon, mode,
        picard_counts=np.asarray(counts, dtype=int),
    )


def solve_nn(
    u0: GridFunction1D, epsilon: float, T: float, cfg: SolverConfig,
    data=None,
) -> Trajectory:
    """Solve du/dt + (eta_eps * u) du/dx = 0 up to time T.

    data, when given, is the functional form of the initial datum (any
    callable of x, e.g. a RiemannData or PiecewiseInitialData); the solver
    then evaluates it exactly at characteristic feet instead of
    interpolating the sampled u0, which keeps jumps sharp.
    """
    m = build_mollifier(epsilon, u0.dx)
    return _solve_transport(
        u0, m, T, cfg, _velocity_fn(m, None, "nn"), "nn", data=data
    )


def solve_general(
    u0: GridFunction1D,
    flux: FluxSpec,
    epsilon: float,
    T: float,
    cfg: SolverConfig,
    mode: str,
    data=None,
) -> Trajectory:
    """Solve the general-flux regularisation in the requested mode.

    velocity_reg advects with eta_eps * f'(u); flux_reg with
    f'(eta_eps * u).  For the quadratic flux both collapse to solve_nn,
    and the shared code path makes that equality bitwise.
    """
    if mode not in ("velocity_reg", "flux_reg"):
        raise ValueError("mode must be velocity_reg or flux_reg")
    m = build_mollifier(epsilon, u0.dx)
    return _solve_transport(
        u0, m, T, cfg, _velocity_fn(m, flux, mode), mode, data=data
    )


def solve_conservative_nonlocal(
    u0: GridFunction1D, epsilon: float, T: float, cfg: SolverConfig
) -> Trajectory:
    """Finite-volume solve of du/dt + d/dx((eta_eps * u) u) = 0.

    Interface flux is (eta_eps * u) u upwinded on the sign of the
    interface-averaged mollified field.  Discrete mass is conserved
    exactly up to roundoff for data vanishing at the boundary.  There is
    no maximum principle here, on purpose: the continuum model it
    discretises does not have one either.
    """
    cfg.check_grid(u0)
    if T <= 0.0:
        raise ValueError("T must be positive")
    m = build_mollifier(epsilon, u0.dx)
    dx = u0.dx
    vals = u0.values.copy()
    times = [0.0]
    states = [u0.copy()]
    t = 0.0
    k = 0
    # sup|u| can grow in this mode, so the step size adapts to the current
    # state; the schedule is still deterministic.
    while t < T - 1e-15:
        dt = min(cfg.time_step(dx, sup_norm_values(vals)), T - t)
        v = convolve_values(m, vals)
        # interface values between i and i+1; constant extension at ends
        v_face = 0.5 * (v[:-1] + v[1:])
        up = np.where(v_face >= 0.0, vals[:-1], vals[1:])
        flux_face = v_face * up
        flux_left = np.concatenate([[v[0] * vals[0]], flux_face])
        flux_right = np.concatenate([flux_face, [v[-1] * vals[-1]]])
        vals = vals - (dt / dx) * (flux_right - flux_left)
        t += dt
        k += 1
        if k % cfg.store_stride == 0 or t >= T - 1e-15:
            times.append(t)
            states.append(u0.with_values(vals.copy()))
    return Trajectory(np.asarray(times), states, epsilon, "conservative")


def sup_norm_values(values: np.ndarray) -> float:
    return float(np.max(np.abs(values)))


def backward_characteristic(
    traj: Trajectory, m: Mollifier, t: float, x: float
) -> float:
    """Trace the characteristic through (t, x) back to time 0.

    Integrates dy/ds = (eta_eps * u)(s, y) backwards with a two-stage
    midpoint method over the stored time levels, interpolating the
    velocity field linearly in time and space.
    """
    times = traj.times
    if not (0.0 <= t <= times[-1] + 1e-12):
        raise ValueError("t outside the trajectory's time range")
    grid = traj.grid
    vfields = [convolve_values(m, s.values) for s in traj.states]

    def vel(s: float, y: float) -> float:
        k = int(np.searchsorted(times, s, side="right")) - 1
        k = min(max(k, 0), len(vfields) - 2) if len(vfields) > 1 else 0
        if len(vfields) == 1:
            vv = vfields[0]
        else:
            t0, t1 = times[k], times[k + 1]
            w = 0.0 if t1 == t0 else (s - t0) / (t1 - t0)
            w = min(max(w, 0.0), 1.0)
            vv = (1.0 - w) * vfields[k] + w * vfields[k + 1]
        return float(
            interpolate_values(vv, grid.x0, grid.dx, np.array([y]))[0]
        )

    # march down through the stored levels strictly below t, ending at 0
    y = float(x)
    s = float(min(t, times[-1]))
    below = times[times < s - 1e-15]
    for s_prev in below[::-1]:
        h = s - float(s_prev)
        k1 = vel(s, y)
        k2 = vel(s - 0.5 * h, y - 0.5 * h * k1)
        y -= h * k2
        s = float(s_prev)
    return y
