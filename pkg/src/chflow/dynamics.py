"""Right-hand sides, time integration, and the approximation experiments.

The evolved unknowns are (u, rho); the momentum m = (1 - d^2/dx^2)^r u is
recomputed from u inside every RHS call so the two representations cannot
drift apart.  Two RHS formulations are provided:

* ``m`` form (any r >= 1):
      m_t = alpha*u_x - b*u_x*m - u*m_x - kappa*rho*rho_x,
      rho_t = -u*rho_x - (b-1)*u_x*rho,
  with du/dt recovered through the inverse inertia operator.

* ``nonlocal`` form (r = 1 only):
      u_t + u*u_x = -d/dx G * P(u, rho),
      P = (b/2)u^2 + ((3-b)/2)u_x^2 + (kappa/2)rho^2 - alpha*u,
  where G is the kernel of (1 - d^2/dx^2)^(-1).

Every pointwise product is dealiased (two-thirds rule), so for band-limited
states the two formulations agree to round-off; that equivalence is one of
the artifact's checks.
"""

from dataclasses import dataclass, replace

import numpy as np

from . import besov
from .spectral import (
    Grid,
    RealField,
    inertia_multiplier,
)


class FormulationError(ValueError):
    """Requested RHS formulation is not valid for these parameters."""


class BlowUpError(RuntimeError):
    """Gradient ceiling exceeded or non-finite values appeared.

    Carries the last valid state and the partial trajectory so wavebreaking
    runs can be inspected rather than discarded.
    """

    def __init__(self, t, max_gradient, last_state, partial=None):
        super().__init__(
            f"blow-up detected at t={t:.6g} (max |u_x| = {max_gradient:.3e})"
        )
        self.t = t
        self.max_gradient = max_gradient
        self.last_state = last_state
        self.partial = partial


@dataclass(frozen=True)
class Params:
    """Model constants selecting a member of the two-component family.

    alpha may be a real constant or a RealField sampled on the grid; it is
    time independent either way.  b = 1 is allowed by the dynamics but
    rejected by the Casimir diagnostic.
    """

    b: float = 2.0
    kappa: float = 1.0
    alpha: object = 0.0
    r: float = 1.0

    def __post_init__(self):
        if self.r < 1.0:
            raise ValueError(f"inertia exponent r must be >= 1, got {self.r}")

    def alpha_samples(self, grid: Grid):
        if isinstance(self.alpha, RealField):
            if self.alpha.grid != grid:
                raise ValueError("alpha field lives on a different grid")
            return self.alpha.samples
        return float(self.alpha)

    def alpha_is_zero(self) -> bool:
        if isinstance(self.alpha, RealField):
            return bool(np.all(self.alpha.samples == 0.0))
        return self.alpha == 0.0


@dataclass(frozen=True)
class State:
    t: float
    u: RealField
    rho: RealField

    def __post_init__(self):
        if self.u.grid != self.rho.grid:
            raise ValueError("u and rho must share a grid")

    @property
    def grid(self) -> Grid:
        return self.u.grid


@dataclass(frozen=True)
class StepControl:
    cfl: float = 0.3
    dt_max: float = 0.01
    t_final: float = 1.0
    dealias: bool = True
    gradient_ceiling: float = 1e6

    def __post_init__(self):
        if not 0.0 < self.cfl <= 1.0:
            raise ValueError("cfl must lie in (0, 1]")
        if self.dt_max <= 0:
            raise ValueError("dt_max must be positive")


@dataclass
class Trajectory:
    """Snapshots of a run plus the settings that produced them."""

    states: list
    params: Params
    ctrl: StepControl
    formulation: str = "m"
    max_dt: float = 0.0
    min_dt: float = np.inf
    steps: int = 0

    @property
    def grid(self) -> Grid:
        return self.states[0].grid

    @property
    def times(self):
        return np.array([s.t for s in self.states])


# ---------------------------------------------------------------------------
# RHS evaluation (array level internally, RealField at the boundary)
# ---------------------------------------------------------------------------


def _fft_tools(grid: Grid, r: float, use_dealias: bool):
    """Shared pieces of the RHS implementations: wavenumbers, the inertia
    multiplier, and a dealiased pointwise product."""
    ixi = 1j * grid.xi
    dmask = grid.dealias_mask if use_dealias else 1.0
    a_mult = inertia_multiplier(grid, r)

    def prod(a, b):
        return np.fft.ifft(dmask * np.fft.fft(a * b)).real

    return ixi, a_mult, prod


def rhs_m_form(state: State, params: Params, use_dealias: bool = True):
    """Momentum-form RHS; valid for any r >= 1."""
    grid = state.grid
    ixi, a_mult, prod = _fft_tools(grid, params.r, use_dealias)
    u = state.u.samples
    rho = state.rho.samples
    alpha = params.alpha_samples(grid)

    u_hat = np.fft.fft(u)
    rho_hat = np.fft.fft(rho)
    u_x = np.fft.ifft(ixi * u_hat).real
    m = np.fft.ifft(a_mult * u_hat).real
    m_x = np.fft.ifft(ixi * a_mult * u_hat).real
    rho_x = np.fft.ifft(ixi * rho_hat).real

    if isinstance(alpha, np.ndarray):
        alpha_ux = prod(alpha, u_x)
    else:
        alpha_ux = alpha * u_x
    m_t = alpha_ux - params.b * prod(u_x, m) - prod(u, m_x) - params.kappa * prod(rho, rho_x)
    if not np.all(np.isfinite(m_t)):
        raise BlowUpError(state.t, float(np.max(np.abs(u_x))), state)
    du = np.fft.ifft(np.fft.fft(m_t) / a_mult).real
    drho = -prod(u, rho_x) - (params.b - 1.0) * prod(u_x, rho)
    return RealField(grid, du), RealField(grid, drho)


def nonlocal_pressure(state: State, params: Params, use_dealias: bool = True) -> RealField:
    """P(u, rho) = (b/2)u^2 + ((3-b)/2)u_x^2 + (kappa/2)rho^2 - alpha*u."""
    grid = state.grid
    ixi, _, prod = _fft_tools(grid, 1.0, use_dealias)
    u = state.u.samples
    rho = state.rho.samples
    alpha = params.alpha_samples(grid)
    u_x = np.fft.ifft(ixi * np.fft.fft(u)).real
    p = (
        0.5 * params.b * prod(u, u)
        + 0.5 * (3.0 - params.b) * prod(u_x, u_x)
        + 0.5 * params.kappa * prod(rho, rho)
    )
    if isinstance(alpha, np.ndarray):
        p -= prod(alpha, u)
    else:
        p -= alpha * u
    return RealField(grid, p)


def rhs_nonlocal(state: State, params: Params, use_dealias: bool = True):
    """Nonlocal (Green's function) RHS; stated for r = 1 and constant alpha.

    The reduction of the alpha term into the pressure uses
    alpha*u_x = d/dx(alpha*u), which needs a constant alpha.
    """
    if params.r != 1.0:
        raise FormulationError(
            f"the nonlocal formulation requires r = 1, got r = {params.r}"
        )
    if isinstance(params.alpha, RealField):
        raise FormulationError(
            "the nonlocal formulation requires a constant alpha"
        )
    grid = state.grid
    ixi, a_mult, prod = _fft_tools(grid, 1.0, use_dealias)
    u = state.u.samples
    rho = state.rho.samples

    u_hat = np.fft.fft(u)
    u_x = np.fft.ifft(ixi * u_hat).real
    rho_x = np.fft.ifft(ixi * np.fft.fft(rho)).real
    p = nonlocal_pressure(state, params, use_dealias).samples
    grad_gp = np.fft.ifft(ixi * np.fft.fft(p) / a_mult).real
    du = -prod(u, u_x) - grad_gp
    if not np.all(np.isfinite(du)):
        raise BlowUpError(state.t, float(np.max(np.abs(u_x))), state)
    drho = -prod(u, rho_x) - (params.b - 1.0) * prod(u_x, rho)
    return RealField(grid, du), RealField(grid, drho)


_RHS = {"m": rhs_m_form, "nonlocal": rhs_nonlocal}


def get_rhs(formulation: str):
    try:
        return _RHS[formulation]
    except KeyError:
        raise FormulationError(
            f"unknown formulation {formulation!r}; choose 'm' or 'nonlocal'"
        ) from None


# ---------------------------------------------------------------------------
# Time stepping
# ---------------------------------------------------------------------------


def step_rk4(state: State, params: Params, dt: float, formulation: str = "m",
             use_dealias: bool = True) -> State:
    """One classical four-stage Runge-Kutta step."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    rhs = get_rhs(formulation)
    grid = state.grid

    def stage(h, du, drho):
        return State(
            state.t + h,
            RealField(grid, state.u.samples + h * du.samples),
            RealField(grid, state.rho.samples + h * drho.samples),
        )

    k1u, k1r = rhs(state, params, use_dealias)
    k2u, k2r = rhs(stage(0.5 * dt, k1u, k1r), params, use_dealias)
    k3u, k3r = rhs(stage(0.5 * dt, k2u, k2r), params, use_dealias)
    k4u, k4r = rhs(stage(dt, k3u, k3r), params, use_dealias)

    u_new = state.u.samples + (dt / 6.0) * (
        k1u.samples + 2.0 * k2u.samples + 2.0 * k3u.samples + k4u.samples
    )
    rho_new = state.rho.samples + (dt / 6.0) * (
        k1r.samples + 2.0 * k2r.samples + 2.0 * k3r.samples + k4r.samples
    )
    return State(state.t + dt, RealField(grid, u_new), RealField(grid, rho_new))


def _max_gradient(state: State) -> float:
    grid = state.grid
    u_x = np.fft.ifft(1j * grid.xi * np.fft.fft(state.u.samples)).real
    return float(np.max(np.abs(u_x)))


def integrate(state0: State, params: Params, ctrl: StepControl,
              formulation: str = "m", output_times=None) -> Trajectory:
    """Advance to ctrl.t_final with CFL-limited steps, recording snapshots.

    dt = min(dt_max, cfl*dx / max(1, max|u|)), clipped so every requested
    output time is hit exactly.  Raises BlowUpError (carrying the last valid
    state and the partial trajectory) if max|u_x| exceeds the ceiling or a
    non-finite value appears.
    """
    grid = state0.grid
    if output_times is None:
        output_times = np.linspace(state0.t, ctrl.t_final, 17)
    output_times = np.asarray(output_times, dtype=float)
    if output_times.ndim != 1 or np.any(np.diff(output_times) <= 0):
        raise ValueError("output times must be strictly increasing")
    if abs(output_times[-1] - ctrl.t_final) > 1e-12:
        raise ValueError("last output time must equal t_final")

    state = state0
    if ctrl.dealias:
        state = State(
            state0.t,
            RealField(grid, grid.dealias_samples(state0.u.samples)),
            RealField(grid, grid.dealias_samples(state0.rho.samples)),
        )
    traj = Trajectory([], params, ctrl, formulation)
    next_out = 0
    if abs(output_times[0] - state.t) <= 1e-14:
        traj.states.append(state)
        next_out = 1

    while next_out < len(output_times):
        umax = float(np.max(np.abs(state.u.samples)))
        dt = min(ctrl.dt_max, ctrl.cfl * grid.dx / max(1.0, umax))
        t_target = output_times[next_out]
        hit_output = state.t + dt >= t_target - 1e-13
        if hit_output:
            dt = t_target - state.t
        new_state = step_rk4(state, params, dt, formulation, ctrl.dealias)
        if hit_output:
            new_state = replace(new_state, t=t_target)

        if not np.all(np.isfinite(new_state.u.samples)) or not np.all(
            np.isfinite(new_state.rho.samples)
        ):
            raise BlowUpError(state.t, _max_gradient(state), state, traj)
        grad = _max_gradient(new_state)
        if grad > ctrl.gradient_ceiling:
            raise BlowUpError(new_state.t, grad, state, traj)

        traj.steps += 1
        traj.max_dt = max(traj.max_dt, dt)
        traj.min_dt = min(traj.min_dt, dt)
        state = new_state
        if hit_output:
            traj.states.append(state)
            next_out += 1
    return traj


# ---------------------------------------------------------------------------
# Approximation-by-iteration scheme
# ---------------------------------------------------------------------------


def _time_interp_weights(times, t):
    """Cubic Lagrange weights on the four snapshots bracketing t."""
    n = len(times)
    j = int(np.searchsorted(times, t) - 1)
    lo = min(max(j - 1, 0), n - 4)
    idx = np.arange(lo, lo + 4)
    w = np.ones(4)
    for a in range(4):
        for b_ in range(4):
            if a != b_:
                w[a] *= (t - times[idx[b_]]) / (times[idx[a]] - times[idx[b_]])
    return idx, w


def friedrichs_iterate(u0: RealField, rho0: RealField, params: Params,
                       K: int, ctrl: StepControl):
    """Linear-transport iteration converging to the direct solution.

    Iterate 0 is the zero pair.  Iterate k+1 solves, with coefficients and
    sources frozen from iterate k,

        m_t = -u_k m_x + alpha u_k - b u_{k,x} m_k - kappa rho_k rho_{k,x},
        rho_t = -u_k rho_x - (b-1) u_{k,x} rho_k,

    from low-passed data (modes |xi| < 2^{k+1} kept).  All iterates share a
    fixed step dt = ctrl.dt_max so coefficient time grids line up; midpoint
    coefficient values come from cubic interpolation in time.  Returns the
    list of trajectories for iterates 0..K.
    """
    if K < 1:
        raise ValueError("need at least one iterate")
    grid = u0.grid
    dt = ctrl.dt_max
    nsteps = int(round(ctrl.t_final / dt))
    if abs(nsteps * dt - ctrl.t_final) > 1e-10:
        raise ValueError("t_final must be an integer multiple of dt_max")
    if nsteps < 3:
        raise ValueError("need at least three steps for midpoint interpolation")
    times = dt * np.arange(nsteps + 1)
    ixi = 1j * grid.xi
    dmask = grid.dealias_mask if ctrl.dealias else 1.0
    a_mult = inertia_multiplier(grid, params.r)
    alpha = params.alpha_samples(grid)

    def prod(a, b_):
        return np.fft.ifft(dmask * np.fft.fft(a * b_)).real

    def dx_of(arr):
        return np.fft.ifft(ixi * np.fft.fft(arr)).real

    zero = RealField(grid, np.zeros(grid.n))
    iterates = [
        Trajectory([State(t, zero, zero) for t in times], params, ctrl, "linearized")
    ]

    for k in range(K):
        prev = iterates[-1]
        # Frozen coefficient u_k and source terms, one entry per snapshot.
        coeff_u = [s.u.samples for s in prev.states]
        src_m = []
        src_rho = []
        for s in prev.states:
            uk = s.u.samples
            rk = s.rho.samples
            uk_x = dx_of(uk)
            mk = np.fft.ifft(a_mult * np.fft.fft(uk)).real
            sm = (
                alpha * uk
                - params.b * prod(uk_x, mk)
                - params.kappa * prod(rk, dx_of(rk))
            )
            src_m.append(sm)
            src_rho.append(-(params.b - 1.0) * prod(uk_x, rk))

        def frozen_at(t):
            if t <= times[0]:
                return coeff_u[0], src_m[0], src_rho[0]
            j = int(round((t - times[0]) / dt))
            if abs(t - times[min(j, nsteps)]) < 1e-12:
                j = min(j, nsteps)
                return coeff_u[j], src_m[j], src_rho[j]
            idx, w = _time_interp_weights(times, t)
            cu = sum(wi * coeff_u[i] for wi, i in zip(w, idx))
            sm = sum(wi * src_m[i] for wi, i in zip(w, idx))
            sr = sum(wi * src_rho[i] for wi, i in zip(w, idx))
            return cu, sm, sr

        def rhs_lin(t, u, rho):
            cu, sm, sr = frozen_at(t)
            m_x = np.fft.ifft(ixi * a_mult * np.fft.fft(u)).real
            m_t = -prod(cu, m_x) + sm
            du = np.fft.ifft(np.fft.fft(m_t) / a_mult).real
            drho = -prod(cu, dx_of(rho)) + sr
            return du, drho

        u = besov.lowpass(u0, k + 1).samples
        rho = besov.lowpass(rho0, k + 1).samples
        if ctrl.dealias:
            u = grid.dealias_samples(u)
            rho = grid.dealias_samples(rho)
        states = [State(0.0, RealField(grid, u), RealField(grid, rho))]
        for j in range(nsteps):
            t = times[j]
            k1u, k1r = rhs_lin(t, u, rho)
            k2u, k2r = rhs_lin(t + 0.5 * dt, u + 0.5 * dt * k1u, rho + 0.5 * dt * k1r)
            k3u, k3r = rhs_lin(t + 0.5 * dt, u + 0.5 * dt * k2u, rho + 0.5 * dt * k2r)
            k4u, k4r = rhs_lin(t + dt, u + dt * k3u, rho + dt * k3r)
            u = u + (dt / 6.0) * (k1u + 2 * k2u + 2 * k3u + k4u)
            rho = rho + (dt / 6.0) * (k1r + 2 * k2r + 2 * k3r + k4r)
            states.append(State(times[j + 1], RealField(grid, u), RealField(grid, rho)))
        iterates.append(Trajectory(states, params, ctrl, "linearized"))
    return iterates


# ---------------------------------------------------------------------------
# Paired-run continuous dependence measurement
# ---------------------------------------------------------------------------


@dataclass
class StabilityResult:
    """Difference-norm measurements for a battery of perturbation sizes."""

    eps: np.ndarray            # perturbation sizes
    sup_du: np.ndarray         # sup_t of the u-difference norm, per eps
    sup_drho: np.ndarray       # sup_t of the rho-difference norm, per eps
    times: np.ndarray
    du_series: list            # u-difference norm time series, per eps
    drho_series: list
    gamma: np.ndarray          # measured growth-rate integrand per snapshot
    s: float

    def gamma_integral(self):
        """Cumulative integral of the growth integrand (trapezoid)."""
        out = np.zeros_like(self.times)
        for i in range(1, len(self.times)):
            out[i] = out[i - 1] + 0.5 * (self.gamma[i] + self.gamma[i - 1]) * (
                self.times[i] - self.times[i - 1]
            )
        return out


def stability_pair(u0: RealField, rho0: RealField, perturbation: RealField,
                   eps_list, params: Params, ctrl: StepControl, s: float = 3.0,
                   formulation: str = "m", output_times=None) -> StabilityResult:
    """Run (u0, rho0) against (u0 + eps*pert, rho0) for each eps.

    Differences are measured in the p = q = 2 dyadic norms at regularity
    s-1 for u and s-2r for rho; the growth integrand per snapshot is the sum
    of the solution norms at regularity s (u) and s-2r+1 (rho) plus the
    size of alpha.
    """
    grid = u0.grid
    base = integrate(State(0.0, u0, rho0), params, ctrl, formulation, output_times)
    times = base.times
    r = params.r
    idx_du = besov.BesovIndex(s - 1.0)
    idx_drho = besov.BesovIndex(s - 2.0 * r)
    idx_u = besov.BesovIndex(s)
    idx_rho = besov.BesovIndex(s - 2.0 * r + 1.0)

    if isinstance(params.alpha, RealField):
        alpha_norm = besov.besov_norm(params.alpha, besov.BesovIndex(s - 2.0 * r))
    else:
        alpha_norm = abs(float(params.alpha))

    eps_arr = np.asarray(list(eps_list), dtype=float)
    du_series, drho_series = [], []
    gamma = None
    for eps in eps_arr:
        u0p = RealField(grid, u0.samples + eps * perturbation.samples)
        pert_run = integrate(State(0.0, u0p, rho0), params, ctrl, formulation, times)
        dus, drs, gms = [], [], []
        for sa, sb in zip(base.states, pert_run.states):
            du = RealField(grid, sb.u.samples - sa.u.samples)
            dr = RealField(grid, sb.rho.samples - sa.rho.samples)
            dus.append(besov.besov_norm(du, idx_du))
            drs.append(besov.besov_norm(dr, idx_drho))
            gms.append(
                besov.besov_norm(sa.u, idx_u)
                + besov.besov_norm(sb.u, idx_u)
                + besov.besov_norm(sa.rho, idx_rho)
                + besov.besov_norm(sb.rho, idx_rho)
                + alpha_norm
            )
        du_series.append(np.array(dus))
        drho_series.append(np.array(drs))
        if gamma is None:
            gamma = np.array(gms)

    return StabilityResult(
        eps=eps_arr,
        sup_du=np.array([s_.max() for s_ in du_series]),
        sup_drho=np.array([s_.max() for s_ in drho_series]),
        times=times,
        du_series=du_series,
        drho_series=drho_series,
        gamma=gamma,
        s=s,
    )
