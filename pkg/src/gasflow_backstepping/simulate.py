"""Time stepping for the plant, the observers and the closed loop.

Two plants are available.  The nonlinear one integrates the isothermal Euler
equations with friction on the physical grid ``x_i = i ell / N``.  The linear
one integrates the canonical Riemann system on ``xbar_j = j / N``; node ``j``
of the canonical grid is physical node ``N - j``.

A closed-loop step uses a zero-order hold on the input:

1. read ``y = v(t, 1)`` and compute ``dU`` from the current estimates;
2. advance the exosystem;
3. advance the plant with ``dU`` and the new outlet disturbance;
4. advance the observer, injecting ``y - vhat(t, 1)`` and closing its inlet
   boundary with the fresh measurement.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import BlowUpError, ConfigurationError, InvalidGainError, InvalidInputError
from .exosystem import (
    default_observer_poles,
    epsilon_of,
    matrix_exp,
    place_H,
    is_hurwitz,
)
from .kernels import (
    feedback_gain_K,
    observer_gains_known,
    observer_gains_uncertain,
    solve_controller_kernels,
    solve_observer_kernels,
    trapezoid_weights,
)
from .pipeline import equilibrium_profile, mu_coeffs, reflection_coeffs, riemann_weights

log = logging.getLogger(__name__)

CFL_MAX = 0.95
DEFAULT_CFL = 0.9
SATURATION_FRACTION = 0.5
# closed loops use the second-order kernel quadrature
LOOP_KERNEL_RULE = "trapezoid"

COLUMNS = (
    "t", "rho_in", "rho_mid", "rho_out", "phi_in", "phi_mid", "phi_out",
    "dU", "s", "eps", "err_v", "err_w", "err_X",
)


@dataclass
class PlantState:
    """Physical state on ``N + 1`` nodes.

    ``flux_in`` and ``flux_out`` are the boundary face fluxes used during the
    last step; they close the discrete mass budget.
    """

    t: float
    rho: np.ndarray
    phi: np.ndarray
    flux_in: float = math.nan
    flux_out: float = math.nan

    def __post_init__(self):
        self.rho = np.asarray(self.rho, dtype=float)
        self.phi = np.asarray(self.phi, dtype=float)
        if self.rho.shape != self.phi.shape or self.rho.ndim != 1 or self.rho.size < 3:
            raise InvalidInputError("rho and phi must be 1-D arrays of equal length >= 3")

    @property
    def N(self):
        return self.rho.size - 1

    def mass(self, ell):
        """Mass per unit area held by the interior control volumes."""
        return float(self.rho[1:-1].sum() * ell / self.N)


@dataclass
class CanonicalState:
    t: float
    v: np.ndarray
    w: np.ndarray

    def __post_init__(self):
        self.v = np.asarray(self.v, dtype=float)
        self.w = np.asarray(self.w, dtype=float)
        if self.v.shape != self.w.shape or self.v.ndim != 1 or self.v.size < 3:
            raise InvalidInputError("v and w must be 1-D arrays of equal length >= 3")

    @property
    def N(self):
        return self.v.size - 1


@dataclass
class ObserverState:
    vhat: np.ndarray
    what: np.ndarray
    Xhat: np.ndarray | None = None
    variant: str = "known-exo"

    def __post_init__(self):
        self.vhat = np.asarray(self.vhat, dtype=float)
        self.what = np.asarray(self.what, dtype=float)
        if self.vhat.shape != self.what.shape:
            raise InvalidInputError("vhat and what must have the same length")
        if self.variant not in ("known-exo", "uncertain"):
            raise InvalidInputError(f"unknown observer variant {self.variant!r}")
        if self.variant == "uncertain":
            if self.Xhat is None:
                raise InvalidInputError("the uncertain observer needs an Xhat")
            self.Xhat = np.asarray(self.Xhat, dtype=float).reshape(-1)


@dataclass
class TimeSeries:
    """Logged trajectories, one array per entry of :data:`COLUMNS`."""

    data: dict
    meta: dict = field(default_factory=dict)

    def __getitem__(self, key):
        return self.data[key]

    def __len__(self):
        return len(self.data["t"])

    @property
    def drho_out(self):
        return self.data["rho_out"] - self.meta["rho_star_out"]

    def to_csv(self, path):
        rows = zip(*(self.data[c] for c in COLUMNS))
        with open(path, "w", newline="") as fh:
            wr = csv.writer(fh, lineterminator="\n")
            wr.writerow(COLUMNS)
            for row in rows:
                wr.writerow([repr(float(x)) for x in row])

    @staticmethod
    def read_csv(path):
        with open(path, newline="") as fh:
            rd = csv.reader(fh)
            header = next(rd)
            cols = [[] for _ in header]
            for row in rd:
                for c, x in zip(cols, row):
                    c.append(float(x))
        return TimeSeries({h: np.array(c) for h, c in zip(header, cols)})


# ---------------------------------------------------------------------------
# plant steppers


def default_dt(p, N):
    return DEFAULT_CFL * p.ell / (N * p.sigma)


def _check_cfl(courant):
    if not (courant > 0 and courant <= CFL_MAX + 1e-12):
        raise ConfigurationError(f"Courant number {courant:.4g} outside (0, {CFL_MAX}]")


def equilibrium_state(p, N):
    prof = equilibrium_profile(p, N)
    return PlantState(0.0, prof.rho_star.copy(), np.full(N + 1, p.phi_L))


def step_plant(p, st, U_in, d_out, dt):
    """Advance the nonlinear plant one step.

    Interior: Richtmyer two-step Lax-Wendroff, friction added explicitly in
    the predictor and semi-implicitly (in ``phi``) in the corrector.
    Boundaries: ``rho(0) = U_in`` and ``phi(ell) = phi_L + d_out``; the other
    variable at each end comes from the characteristic leaving the domain,
    integrated by first-order upwinding.

    The scheme is well balanced: its one-step defect at the steady state
    (a truncation-order quantity) is subtracted, so the discrete equilibrium
    is ``rho_star`` itself.  The face-flux part of the correction keeps the
    mass budget exact.
    """
    N = st.N
    _check_cfl(p.sigma * dt * N / p.ell)
    face, node_rho, node_phi = _equilibrium_defect(p, N, float(dt))
    rho_new, phi_new, flux = _lw_step(p, st.rho, st.phi, U_in, d_out, dt, face, st.t)
    rho_new -= node_rho
    phi_new -= node_phi
    if not (np.all(np.isfinite(rho_new)) and np.all(np.isfinite(phi_new))) or np.any(rho_new <= 0):
        raise BlowUpError(f"plant state lost positivity or finiteness at t={st.t:.6g}")
    return PlantState(st.t + dt, rho_new, phi_new, flux_in=float(flux[0]), flux_out=float(flux[-1]))


@lru_cache(maxsize=16)
def _equilibrium_defect(p, N, dt):
    """Face-flux and nodal defects of one raw step taken from the steady state."""
    eq = equilibrium_state(p, N)
    no_face = np.zeros(N)
    _, _, flux = _lw_step(p, eq.rho, eq.phi, p.U_star, 0.0, dt, no_face, 0.0)
    face = flux - p.phi_L
    rho1, phi1, _ = _lw_step(p, eq.rho, eq.phi, p.U_star, 0.0, dt, face, 0.0)
    node_rho = rho1 - eq.rho
    node_phi = phi1 - eq.phi
    for a in (face, node_rho, node_phi):
        a.setflags(write=False)
    return face, node_rho, node_phi


def _lw_step(p, rho, phi, U_in, d_out, dt, face_corr, t):
    """One raw step; returns new ``rho``, ``phi`` and the (corrected) face fluxes."""
    N = rho.size - 1
    lam = dt * N / p.ell
    nu = p.sigma * lam
    c2 = p.sigma**2
    kappa = p.lambda_f / (2.0 * p.D)
    src = -kappa * phi * np.abs(phi) / rho

    # predictor at the faces i + 1/2
    rho_h = 0.5 * (rho[1:] + rho[:-1]) - 0.5 * lam * (phi[1:] - phi[:-1])
    phi_h = (
        0.5 * (phi[1:] + phi[:-1])
        - 0.5 * lam * c2 * (rho[1:] - rho[:-1])
        + 0.25 * dt * (src[1:] + src[:-1])
    )
    if np.any(rho_h <= 0):
        raise BlowUpError(f"density became non-positive at t={t:.6g}")
    src_h = -kappa * phi_h * np.abs(phi_h) / rho_h
    flux = phi_h - face_corr

    rho_new = np.empty_like(rho)
    phi_new = np.empty_like(phi)
    rho_new[1:-1] = rho[1:-1] - lam * (flux[1:] - flux[:-1])
    phi_star = (
        phi[1:-1]
        - lam * c2 * (rho_h[1:] - rho_h[:-1])
        + 0.25 * dt * (src_h[1:] + src_h[:-1])
    )
    interior_rho = rho_new[1:-1]
    if np.any(interior_rho <= 0):
        raise BlowUpError(f"density became non-positive at t={t:.6g}")
    phi_new[1:-1] = phi_star / (1.0 + 0.5 * dt * kappa * np.abs(phi[1:-1]) / interior_rho)

    # inlet: z = rho - phi/sigma travels left, z_t - sigma z_x = -src/sigma
    z = rho[:2] - phi[:2] / p.sigma
    z0 = z[0] + nu * (z[1] - z[0]) - dt * src[0] / p.sigma
    rho_new[0] = U_in
    phi_new[0] = p.sigma * (U_in - z0)
    # outlet: y = rho + phi/sigma travels right, y_t + sigma y_x = src/sigma
    y = rho[-2:] + phi[-2:] / p.sigma
    yN = y[1] - nu * (y[1] - y[0]) + dt * src[-1] / p.sigma
    phi_new[-1] = p.phi_L + d_out
    rho_new[-1] = yN - phi_new[-1] / p.sigma
    return rho_new, phi_new, flux


@lru_cache(maxsize=16)
def _canonical_coeffs(p, N):
    xbar = np.linspace(0.0, 1.0, N + 1)
    mu1, mu2 = mu_coeffs(p, xbar)
    r1, r2 = reflection_coeffs(p)
    f, g = riemann_weights(p, p.ell * (1.0 - xbar))
    for a in (mu1, mu2, f, g):
        a.setflags(write=False)
    return mu1, mu2, r1, r2, f, g


def _transport(v, w, mu1, mu2, nu, dt):
    """Upwind interior update for ``v`` (moving to larger xbar) and ``w`` (smaller)."""
    v_new = np.empty_like(v)
    w_new = np.empty_like(w)
    v_new[1:] = v[1:] - nu * (v[1:] - v[:-1]) - dt * mu1[1:] * w[1:]
    w_new[:-1] = w[:-1] + nu * (w[1:] - w[:-1]) + dt * mu2[:-1] * v[:-1]
    return v_new, w_new


def step_canonical(p, st, dU, cx, eps, dt):
    """Advance the linear canonical plant one step.

    ``cx`` is the exosystem output ``C X`` and ``eps`` the extra outlet
    disturbance, both taken at the end of the step.
    """
    N = st.N
    nu = p.sigma * dt * N / p.ell
    _check_cfl(nu)
    mu1, mu2, r1, r2, _, _ = _canonical_coeffs(p, N)
    v_new, w_new = _transport(st.v, st.w, mu1, mu2, nu, dt)
    v_new[0] = w_new[0] - (cx + eps) / p.sigma
    w_new[-1] = -r1 * v_new[-1] + r2 * dU
    _require_finite(st.t, v_new, w_new)
    return CanonicalState(st.t + dt, v_new, w_new)


def _require_finite(t, *arrays):
    for a in arrays:
        if not np.all(np.isfinite(a)):
            raise BlowUpError(f"non-finite values after the step from t={t:.6g}")


def _observer_pde(p, obs, meas_v1, dU, gains, dt, meas_v1_next):
    N = obs.vhat.size - 1
    nu = p.sigma * dt * N / p.ell
    _check_cfl(nu)
    mu1, mu2, r1, r2, _, _ = _canonical_coeffs(p, N)
    innov = meas_v1 - obs.vhat[-1]
    vh, wh = _transport(obs.vhat, obs.what, mu1, mu2, nu, dt)
    vh[1:] += dt * gains.p1[1:] * innov
    wh[:-1] += dt * gains.p2[:-1] * innov
    y = meas_v1 if meas_v1_next is None else meas_v1_next
    wh[-1] = -r1 * y + r2 * dU
    return vh, wh, innov


def step_observer_known(p, obs, meas_v1, cx, dU, gains, dt, meas_v1_next=None):
    """Observer driven by the exact exosystem output ``cx = C X``.

    ``meas_v1`` is the measurement at the start of the step (used for the
    injection); ``meas_v1_next``, when given, closes the inlet boundary at
    the end of the step.
    """
    if gains.variant != "known-exo" or obs.variant != "known-exo":
        raise InvalidGainError("step_observer_known needs known-exo gains and state")
    vh, wh, _ = _observer_pde(p, obs, meas_v1, dU, gains, dt, meas_v1_next)
    vh[0] = wh[0] - cx / p.sigma
    _require_finite(math.nan, vh, wh)
    return ObserverState(vh, wh, None, "known-exo")


def step_observer_uncertain(p, obs, meas_v1, dU, gains, H, exo, dt, meas_v1_next=None):
    """Observer that also reconstructs the exosystem state.

    ``Xhat`` follows the exact flow of ``A`` plus the injection
    ``exp(A ell/sigma) H (y - vhat(1))``, integrated with the trapezoid rule.
    """
    if gains.variant != "uncertain" or obs.variant != "uncertain":
        raise InvalidGainError("step_observer_uncertain needs uncertain gains and state")
    H = np.asarray(H, dtype=float).reshape(-1)
    Phi, Gbar = _exo_injection(exo.A.tobytes(), exo.C.tobytes(), exo.n, H.tobytes(), p.sigma, p.transit_time, float(dt))
    vh, wh, innov = _observer_pde(p, obs, meas_v1, dU, gains, dt, meas_v1_next)
    Xh = Phi @ obs.Xhat + Gbar * innov
    vh[0] = wh[0] - float(exo.C @ Xh) / p.sigma
    _require_finite(math.nan, vh, wh, Xh)
    return ObserverState(vh, wh, Xh, "uncertain")


@lru_cache(maxsize=32)
def _exo_injection(a_bytes, c_bytes, n, h_bytes, sigma, transit, dt):
    """Transition ``exp(A dt)`` and the trapezoid-weighted injection column."""
    A = np.frombuffer(a_bytes, dtype=float).reshape(n, n)
    C = np.frombuffer(c_bytes, dtype=float)
    H = np.frombuffer(h_bytes, dtype=float)
    if H.size != n:
        raise InvalidInputError(f"H must have {n} rows")
    if not is_hurwitz(A + np.outer(H, C) / sigma):
        raise InvalidGainError("A + H C / sigma is not Hurwitz")
    Phi = matrix_exp(A, dt)
    G = matrix_exp(A, transit) @ H
    return Phi, 0.5 * dt * (Phi @ G + G)


# ---------------------------------------------------------------------------
# control laws


def _kernel_term(obs, K21, K22):
    N = obs.vhat.size - 1
    wts = trapezoid_weights(N)
    return float(np.dot(wts * K21.values[-1], obs.vhat) + np.dot(wts * K22.values[-1], obs.what))


def control_known(meas_v1, obs, X, K, K21, K22, p):
    """Boundary input ``dU`` for the observer with exact exosystem state ``X``."""
    _, _, r1, r2, _, _ = _canonical_coeffs(p, obs.vhat.size - 1)
    kx = float(np.dot(K, np.asarray(X, dtype=float).reshape(-1)))
    return (r1 * meas_v1 + _kernel_term(obs, K21, K22) + kx) / r2


def control_uncertain(meas_v1, obs, K, K21, K22, p):
    """Same law as :func:`control_known` with the estimate ``Xhat`` in place of ``X``."""
    if obs.Xhat is None:
        raise InvalidGainError("control_uncertain needs an observer state with Xhat")
    return control_known(meas_v1, obs, obs.Xhat, K, K21, K22, p)


# ---------------------------------------------------------------------------
# physical <-> canonical on whole grids


def plant_to_canonical(p, st):
    """Riemann fields ``(v, w)`` on the canonical grid from a physical state."""
    N = st.N
    _, _, _, _, f, g = _canonical_coeffs(p, N)
    rho_star = equilibrium_profile(p, N).rho_star
    drho = (st.rho - rho_star)[::-1]
    dphi = (st.phi - p.phi_L)[::-1]
    return f * 0.5 * (drho - dphi / p.sigma), g * 0.5 * (drho + dphi / p.sigma)


def canonical_to_perturbation(p, v, w):
    """Physical ``(drho, dphi)`` on the physical grid from canonical fields."""
    N = v.size - 1
    _, _, _, _, f, g = _canonical_coeffs(p, N)
    a, b = v / f, w / g
    return (a + b)[::-1], (p.sigma * (b - a))[::-1]


def _l2(e):
    N = e.size - 1
    return math.sqrt(float(trapezoid_weights(N) @ (e * e)))


# ---------------------------------------------------------------------------
# orchestration


@dataclass(eq=False)
class LoopSetup:
    """Precomputed kernels and gains for one scenario."""

    kernels: object = None
    obs_kernels: object = None
    K: np.ndarray | None = None
    gains: object = None
    H: np.ndarray | None = None


def prepare(scenario):
    """Solve kernels and gains needed by ``scenario`` (nothing if control is off)."""
    if scenario.controller == "off":
        return LoopSetup()
    p, exo, N = scenario.params, scenario.exo, scenario.N
    rule = getattr(scenario, "kernel_rule", LOOP_KERNEL_RULE)
    ck = solve_controller_kernels(p, N, rule=rule)
    ok = solve_observer_kernels(p, N, rule=rule)
    K = feedback_gain_K(exo, p, ck.K21)
    if scenario.controller == "known-exo":
        return LoopSetup(ck, ok, K, observer_gains_known(p, ok.P11, ok.P21))
    poles = scenario.H_poles if scenario.H_poles is not None else default_observer_poles(exo)
    H = place_H(exo, p.sigma, poles)
    gains = observer_gains_uncertain(exo, H, p, ok.P11, ok.P21)
    return LoopSetup(ck, ok, K, gains, gains.H)


def run_closed_loop(scenario, setup=None):
    """Simulate ``scenario`` and return the logged :class:`TimeSeries`.

    ``scenario`` needs the attributes ``params, exo, uncertainty, controller,
    plant, N, horizon, log_stride, observer_init, H_poles, dt, saturation``.
    """
    p, exo, unc, N = scenario.params, scenario.exo, scenario.uncertainty, scenario.N
    dt = scenario.dt if scenario.dt is not None else default_dt(p, N)
    nsteps = int(math.ceil(scenario.horizon / dt - 1e-9))
    stride = max(int(scenario.log_stride), 1)
    setup = setup if setup is not None else prepare(scenario)
    controlled = scenario.controller != "off"
    linear = scenario.plant == "linear"
    sat = scenario.saturation
    sat_limit = None if sat is None else sat * p.U_star

    rho_star = equilibrium_profile(p, N).rho_star
    _, _, _, _, f, _ = _canonical_coeffs(p, N)
    f0 = float(f[-1])
    mid = N // 2

    # plant
    if linear:
        plant = CanonicalState(0.0, np.zeros(N + 1), np.zeros(N + 1))

        def measure(st):
            return float(st.v[-1])

        def fields(st):
            return st.v, st.w
    else:
        plant = equilibrium_state(p, N)

        def measure(st):
            return f0 * 0.5 * ((st.rho[0] - rho_star[0]) - (st.phi[0] - p.phi_L) / p.sigma)

        def fields(st):
            return plant_to_canonical(p, st)

    X = exo.X0.copy()
    Phi = exo.transition(dt)
    variant = scenario.controller

    obs = None
    if controlled:
        v0, w0 = fields(plant)
        truth = scenario.observer_init == "truth"
        vh = v0.copy() if truth else np.zeros(N + 1)
        wh = w0.copy() if truth else np.zeros(N + 1)
        Xh = None
        if variant == "uncertain":
            Xh = X.copy() if truth else np.zeros(exo.n)
        obs = ObserverState(vh, wh, Xh, variant)

    out = {c: [] for c in COLUMNS}
    saturated = 0

    def record(t, st, dU, s, eps):
        if linear:
            drho, dphi = canonical_to_perturbation(p, st.v, st.w)
            rho = rho_star + drho
            phi = p.phi_L + dphi
        else:
            rho, phi = st.rho, st.phi
        out["t"].append(t)
        out["rho_in"].append(rho[0])
        out["rho_mid"].append(rho[mid])
        out["rho_out"].append(rho[-1])
        out["phi_in"].append(phi[0])
        out["phi_mid"].append(phi[mid])
        out["phi_out"].append(phi[-1])
        out["dU"].append(dU)
        out["s"].append(s)
        out["eps"].append(eps)
        if controlled:
            v, w = fields(st)
            out["err_v"].append(_l2(v - obs.vhat))
            out["err_w"].append(_l2(w - obs.what))
            out["err_X"].append(float(np.linalg.norm(X - obs.Xhat)) if obs.Xhat is not None else 0.0)
        else:
            out["err_v"].append(math.nan)
            out["err_w"].append(math.nan)
            out["err_X"].append(math.nan)

    s = float(exo.C @ X)
    eps = epsilon_of(unc, s, 0.0)
    if not linear:
        # start from the equilibrium carrying the actual initial outlet flow
        plant.phi[-1] = p.phi_L + s + eps

    def series():
        meta = {
            "dt": dt,
            "steps": nsteps,
            "saturated_steps": saturated,
            "rho_star_out": float(rho_star[-1]),
            "rho_star_in": float(rho_star[0]),
        }
        return TimeSeries({c: np.asarray(out[c], dtype=float) for c in COLUMNS}, meta)

    y = measure(plant)
    try:
        for n in range(nsteps):
            t = n * dt
            dU = 0.0
            if controlled:
                if variant == "known-exo":
                    dU = control_known(y, obs, X, setup.K, setup.kernels.K21, setup.kernels.K22, p)
                else:
                    dU = control_uncertain(y, obs, setup.K, setup.kernels.K21, setup.kernels.K22, p)
                if sat_limit is not None and abs(dU) > sat_limit:
                    saturated += 1
                    dU = math.copysign(sat_limit, dU)
            if n % stride == 0:
                record(t, plant, dU, s, eps)

            X_next = Phi @ X
            s_next = float(exo.C @ X_next)
            eps_next = epsilon_of(unc, s_next, t + dt)
            if linear:
                plant = step_canonical(p, plant, dU, s_next, eps_next, dt)
            else:
                plant = step_plant(p, plant, p.U_star + dU, s_next + eps_next, dt)
            y_next = measure(plant)
            if controlled:
                if variant == "known-exo":
                    obs = step_observer_known(p, obs, y, s_next, dU, setup.gains, dt, meas_v1_next=y_next)
                else:
                    obs = step_observer_uncertain(
                        p, obs, y, dU, setup.gains, setup.H, exo, dt, meas_v1_next=y_next
                    )
            X, s, eps, y = X_next, s_next, eps_next, y_next
    except BlowUpError as exc:
        # keep what was logged so far for diagnosis
        exc.partial = series()
        exc.partial.meta["failed_at"] = t
        raise

    # final sample, with the input that would be applied next
    dU = 0.0
    if controlled:
        if variant == "known-exo":
            dU = control_known(y, obs, X, setup.K, setup.kernels.K21, setup.kernels.K22, p)
        else:
            dU = control_uncertain(y, obs, setup.K, setup.kernels.K21, setup.kernels.K22, p)
        if sat_limit is not None:
            dU = max(-sat_limit, min(sat_limit, dU))
    if nsteps % stride == 0:
        record(nsteps * dt, plant, dU, s, eps)

    if saturated:
        log.warning("input saturated at +-%.3g kg/m^3 on %d of %d steps", sat_limit, saturated, nsteps)
    return series()


def settling_time(t, drho, band):
    """First logged time after which ``|drho| <= band`` holds to the end.

    Returns ``None`` when the last sample is still outside the band.
    """
    outside = np.nonzero(~(np.abs(drho) <= band))[0]
    if outside.size == 0:
        return float(t[0])
    last = outside[-1]
    return None if last + 1 >= len(t) else float(t[last + 1])


def summarize(ts, transient, band):
    """Peak, settling time and steady residual of ``drho(t, ell)``."""
    t = ts["t"]
    d = ts.drho_out
    late = t >= transient
    return {
        "rho_star_out": ts.meta["rho_star_out"],
        "peak_abs_drho_out": float(np.max(np.abs(d))),
        "settling_time": settling_time(t, d, band),
        "settle_band": band,
        "steady_residual": float(np.max(np.abs(d[late]))) if late.any() else None,
        "transient": transient,
        "dt": ts.meta["dt"],
        "steps": ts.meta["steps"],
        "saturated_steps": ts.meta["saturated_steps"],
    }
