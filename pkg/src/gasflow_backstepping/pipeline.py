"""Pipe parameters, steady state, linearization and Riemann coordinates.

Physical coordinate ``x`` runs from the inlet (0) to the outlet (``ell``).
The canonical coordinate is ``xbar = (ell - x) / ell``, so the outlet sits at
``xbar = 0`` and the inlet at ``xbar = 1``.  All quantities are SI; density
stands in for pressure through ``p = sigma**2 * rho``.

Every function accepts scalars or numpy arrays for the spatial argument.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, InfeasibleEquilibriumError, InvalidInputError

_EDGE_TOL = 1e-12


@dataclass(frozen=True)
class PipelineParams:
    """Physical constants of a level pipe carrying isothermal gas.

    Attributes:
        lambda_f: Darcy-Weisbach friction factor (dimensionless).
        D: internal diameter [m].
        ell: pipe length [m].
        sigma: isothermal sound speed [m/s].
        phi_L: nominal outlet mass flux [kg/m^2/s].
        U_star: equilibrium inlet density [kg/m^3].
    """

    lambda_f: float
    D: float
    ell: float
    sigma: float
    phi_L: float
    U_star: float

    def __post_init__(self):
        for name in ("D", "ell", "sigma", "U_star"):
            val = getattr(self, name)
            if not np.isfinite(val) or val <= 0:
                raise InvalidInputError(f"{name} must be finite and > 0, got {val!r}")
        # zero friction / zero flow are admitted as degenerate limits
        for name in ("lambda_f", "phi_L"):
            val = getattr(self, name)
            if not np.isfinite(val) or val < 0:
                raise InvalidInputError(f"{name} must be finite and >= 0, got {val!r}")

    @property
    def transit_time(self):
        """One-way travel time ``ell / sigma`` [s]."""
        return self.ell / self.sigma

    @property
    def drop_rate(self):
        """Slope of ``rho_star(x)**2`` in x, i.e. ``lambda phi_L^2 / (sigma^2 D)``."""
        return self.lambda_f * self.phi_L**2 / (self.sigma**2 * self.D)


@dataclass(frozen=True)
class EquilibriumProfile:
    x: np.ndarray
    rho_star: np.ndarray


def paper_iv_params():
    """The pipe used in the desk-scale simulation study."""
    return PipelineParams(lambda_f=0.011, D=0.5, ell=25e3, sigma=378.0, phi_L=289.0, U_star=46.0)


def _check_x(p, x):
    x = np.asarray(x, dtype=float)
    tol = _EDGE_TOL * p.ell
    if not np.all(np.isfinite(x)) or np.any(x < -tol) or np.any(x > p.ell + tol):
        raise DomainError(f"x must lie in [0, {p.ell}]")
    return np.clip(x, 0.0, p.ell)


def _check_xbar(xbar):
    xbar = np.asarray(xbar, dtype=float)
    if not np.all(np.isfinite(xbar)) or np.any(xbar < -_EDGE_TOL) or np.any(xbar > 1 + _EDGE_TOL):
        raise DomainError("xbar must lie in [0, 1]")
    return np.clip(xbar, 0.0, 1.0)


def _scalarize(a):
    return a.item() if isinstance(a, np.ndarray) and a.ndim == 0 else a


def _rho_star(p, x):
    radicand = p.U_star**2 - p.drop_rate * x
    if np.any(radicand <= 0):
        raise InfeasibleEquilibriumError(
            f"no equilibrium: U_star={p.U_star} is below the bound "
            f"{np.sqrt(p.drop_rate * p.ell):.6g} required to carry phi_L={p.phi_L}"
        )
    return np.sqrt(radicand)


def equilibrium_density(p, x):
    """Steady density ``sqrt(U_star^2 - lambda phi_L^2 x / (sigma^2 D))``."""
    return _scalarize(_rho_star(p, _check_x(p, x)))


def equilibrium_profile(p, N):
    x = np.linspace(0.0, p.ell, N + 1)
    return EquilibriumProfile(x=x, rho_star=_rho_star(p, x))


def feasibility_margin(p):
    """``U_star`` minus the smallest inlet density that keeps rho_star real."""
    return p.U_star - float(np.sqrt(p.drop_rate * p.ell))


def require_feasible(p):
    if feasibility_margin(p) <= 0:
        _rho_star(p, p.ell)  # raises with the detailed message
        raise InfeasibleEquilibriumError("equilibrium density vanishes at the outlet")


def lambda_coeffs(p, x):
    """Linearized friction coefficients ``(lambda_1(x), lambda_2(x))``."""
    rho = _rho_star(p, _check_x(p, x))
    lam1 = p.lambda_f * p.phi_L**2 / (2.0 * p.D * rho**2)
    lam2 = p.lambda_f * p.phi_L / (p.D * rho)
    return _scalarize(lam1), _scalarize(lam2)


def _half_exponent(p, x, rho_x):
    # (sigma/phi_L) (rho*(x) - rho*(ell)), rewritten without dividing by phi_L
    rho_l = _rho_star(p, p.ell)
    return p.lambda_f * p.phi_L * (p.ell - x) / (p.sigma * p.D * (rho_x + rho_l))


def mu_coeffs(p, xbar):
    """In-domain coupling ``(mu_1, mu_2)`` of the canonical system at ``xbar``."""
    xbar = _check_xbar(xbar)
    x = p.ell * (1.0 - xbar)
    rho = _rho_star(p, x)
    e = _half_exponent(p, x, rho)
    quad = p.lambda_f * p.phi_L**2 / (4.0 * p.sigma * p.D * rho**2)
    lin = p.lambda_f * p.phi_L / (2.0 * p.D * rho)
    mu1 = (quad - lin) * np.exp(2.0 * e)
    mu2 = (quad + lin) * np.exp(-2.0 * e)
    return _scalarize(mu1), _scalarize(mu2)


def reflection_coeffs(p):
    """Inlet boundary coefficients ``(r_1, r_2)`` in ``w(t,1) = -r_1 v(t,1) + r_2 dU``."""
    rho0 = _rho_star(p, 0.0)
    rho_l = _rho_star(p, p.ell)
    e = _half_exponent(p, 0.0, rho0)
    r1 = float(np.exp(-2.0 * e))
    r2 = float(np.sqrt(rho0 / rho_l) * np.exp(-e))
    return r1, r2


def riemann_weights(p, x):
    """Amplitude factors ``(f, g)`` with ``v = f (drho - dphi/sigma)/2`` and ``w = g (drho + dphi/sigma)/2``."""
    x = _check_x(p, x)
    rho = _rho_star(p, x)
    amp = np.sqrt(rho / _rho_star(p, p.ell))
    e = _half_exponent(p, x, rho)
    return _scalarize(amp * np.exp(e)), _scalarize(amp * np.exp(-e))


def to_riemann(p, drho, dphi, x):
    """Map physical perturbations at ``x`` to ``(v, w)`` at ``xbar = (ell - x)/ell``."""
    f, g = riemann_weights(p, x)
    drho = np.asarray(drho, dtype=float)
    dphi = np.asarray(dphi, dtype=float)
    v = f * (0.5 * drho - 0.5 * dphi / p.sigma)
    w = g * (0.5 * drho + 0.5 * dphi / p.sigma)
    return _scalarize(v), _scalarize(w)


def from_riemann(p, v, w, xbar):
    """Inverse of :func:`to_riemann`; returns ``(drho, dphi)``."""
    xbar = _check_xbar(xbar)
    f, g = riemann_weights(p, p.ell * (1.0 - xbar))
    a = np.asarray(v, dtype=float) / f
    b = np.asarray(w, dtype=float) / g
    return _scalarize(a + b), _scalarize(p.sigma * (b - a))
