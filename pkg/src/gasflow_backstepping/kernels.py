"""Backstepping kernels, feedback gains and observer output-injection gains.

Each kernel pair is a Goursat problem on a triangle.  After transposing the
observer kernels, every pair has the same shape on ``0 <= xi <= x <= 1``::

    D_x - D_xi = a(xi) E,      D(x, x) = d(x)
    E_x + E_xi = b(xi) D,      E(x, 0) = D(x, 0)

``D`` is integrated along the anti-diagonals starting on the diagonal, ``E``
along the diagonals starting on the edge ``xi = 0``.  The pair is solved by
successive approximation on a uniform grid.  The default ``"rectangle"`` rule
samples each characteristic step at its upstream end and is first order;
``"trapezoid"`` is second order.
"""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import InvalidInputError, SolverDivergenceError
from .exosystem import matrix_exp, require_hurwitz_gain
from .pipeline import mu_coeffs

MAX_SWEEPS = 200
SWEEP_TOL = 1e-12
RULES = ("rectangle", "trapezoid")
DEFAULT_RULE = "rectangle"


@dataclass(eq=False)
class TriKernel:
    """Kernel samples on an ``(N+1) x (N+1)`` grid; NaN outside the triangle.

    ``orientation`` is ``"lower"`` for ``0 <= xi <= xbar <= 1`` (row index is
    xbar, column index is xi) and ``"upper"`` for ``0 <= xbar <= xi <= 1``.
    """

    name: str
    values: np.ndarray
    orientation: str

    @property
    def N(self):
        return self.values.shape[0] - 1

    @property
    def mask(self):
        n = self.N + 1
        return np.tri(n, dtype=bool) if self.orientation == "lower" else np.tri(n, dtype=bool).T

    def transposed(self, name):
        flip = "upper" if self.orientation == "lower" else "lower"
        return TriKernel(name, self.values.T.copy(), flip)


@dataclass(eq=False)
class ControllerKernels:
    K11: TriKernel
    K12: TriKernel
    K21: TriKernel
    K22: TriKernel
    history: dict = field(default_factory=dict)


@dataclass(eq=False)
class ObserverKernels:
    P11: TriKernel
    P21: TriKernel
    P12: TriKernel
    P22: TriKernel
    history: dict = field(default_factory=dict)


@dataclass(eq=False)
class GainSet:
    """Feedback row ``K`` and output-injection profiles ``p1``, ``p2`` on the grid."""

    K: np.ndarray | None
    p1: np.ndarray
    p2: np.ndarray
    variant: str
    H: np.ndarray | None = None


def trapezoid_weights(N):
    w = np.full(N + 1, 1.0 / N)
    w[0] = w[-1] = 0.5 / N
    return w


# ---------------------------------------------------------------------------
# Goursat solver


@lru_cache(maxsize=8)
def _antidiagonal_layout(N):
    """Gather indices for integrating along lines ``x + xi = c * h``.

    Slot 0 is the diagonal point of each line (a grid node for even ``c``,
    a midpoint between two diagonal nodes for odd ``c``).  Later slots walk
    outward toward ``xi = 0``.
    """
    h = 1.0 / N
    ncols = N // 2 + 2
    nlines = 2 * N + 1
    dummy = (N + 1) ** 2
    idx = np.full((nlines, ncols), dummy, dtype=np.intp)
    step = np.zeros((nlines, ncols))
    xi = np.zeros((nlines, ncols))
    real = np.zeros((nlines, ncols), dtype=bool)
    for c in range(nlines):
        if c % 2 == 0:
            m = c // 2
            idx[c, 0] = m * (N + 1) + m
            real[c, 0] = True
            xi[c, 0] = m * h
            for k in range(1, min(N - m, m) + 1):
                idx[c, k] = (m + k) * (N + 1) + (m - k)
                real[c, k] = True
                xi[c, k] = (m - k) * h
                step[c, k] = h
        else:
            m = (c - 1) // 2
            xi[c, 0] = (m + 0.5) * h
            for k in range(1, min(N - m, m + 1) + 1):
                idx[c, k] = (m + k) * (N + 1) + (m + 1 - k)
                real[c, k] = True
                xi[c, k] = (m + 1 - k) * h
                step[c, k] = 0.5 * h if k == 1 else h
    odd = np.arange(1, nlines, 2)
    mids = (odd - 1) // 2
    diag_lo = mids * (N + 2)
    diag_hi = (mids + 1) * (N + 2)
    for arr in (idx, step, xi, real, odd, diag_lo, diag_hi):
        arr.setflags(write=False)
    return idx, step, xi, real, odd, diag_lo, diag_hi


@lru_cache(maxsize=8)
def _diagonal_layout(N):
    """Gather indices for lines ``x - xi = q * h`` starting on ``xi = 0``."""
    q = np.arange(N + 1)[:, None]
    j = np.arange(N + 1)[None, :]
    valid = q + j <= N
    idx = np.where(valid, (q + j) * (N + 1) + j, (N + 1) ** 2)
    # an increment j-1 -> j exists only when node j is on the line
    inc_valid = valid[:, 1:]
    for arr in (idx, valid, inc_valid):
        arr.setflags(write=False)
    return idx, valid, inc_valid


def solve_goursat_pair(N, a, b, d, max_sweeps=MAX_SWEEPS, tol=SWEEP_TOL, rule=DEFAULT_RULE):
    """Solve the generic ``(D, E)`` pair on the lower triangle.

    ``a``, ``b`` and ``d`` are vectorized callables of one coordinate in
    [0, 1].  Returns ``(D, E, deltas)`` where ``deltas`` holds the relative
    sup-norm change of each sweep.
    """
    if N < 8:
        raise InvalidInputError(f"kernel grid needs N >= 8, got {N}")
    if rule not in RULES:
        raise InvalidInputError(f"unknown quadrature rule {rule!r}")
    # weights of the upstream and downstream integrand samples of one step
    w_up, w_down = (1.0, 0.0) if rule == "rectangle" else (0.5, 0.5)
    h = 1.0 / N
    nodes = np.linspace(0.0, 1.0, N + 1)
    a_idx, a_step, a_xi, a_real, odd, diag_lo, diag_hi = _antidiagonal_layout(N)
    e_idx, e_valid, e_inc_valid = _diagonal_layout(N)

    a_slot = np.asarray(a(a_xi), dtype=float)
    d_line = np.asarray(d(np.arange(2 * N + 1) * 0.5 * h), dtype=float)
    b_node = np.asarray(b(nodes), dtype=float)
    lower = np.tri(N + 1, dtype=bool)

    D = np.zeros((N + 1, N + 1))
    E = np.zeros((N + 1, N + 1))
    deltas = []
    for _ in range(max_sweeps):
        D_old, E_old = D, E

        ext = np.append(E.ravel(), 0.0)
        g = ext[a_idx]
        g[odd, 0] = 0.5 * (ext[diag_lo] + ext[diag_hi])
        f = a_slot * g
        inc = a_step[:, 1:] * (w_up * f[:, :-1] + w_down * f[:, 1:])
        line = d_line[:, None] + np.concatenate([np.zeros((2 * N + 1, 1)), np.cumsum(inc, axis=1)], axis=1)
        D = np.zeros((N + 1, N + 1))
        D.ravel()[a_idx[a_real]] = line[a_real]

        ext = np.append(D.ravel(), 0.0)
        f = np.where(e_valid, b_node[None, :] * ext[e_idx], 0.0)
        inc = np.where(e_inc_valid, h * (w_up * f[:, :-1] + w_down * f[:, 1:]), 0.0)
        diag = D[:, 0][:, None] + np.concatenate([np.zeros((N + 1, 1)), np.cumsum(inc, axis=1)], axis=1)
        E = np.zeros((N + 1, N + 1))
        E.ravel()[e_idx[e_valid]] = diag[e_valid]

        if not (np.all(np.isfinite(D)) and np.all(np.isfinite(E))):
            raise SolverDivergenceError("kernel iteration produced non-finite values")
        scale = max(1.0, np.abs(D).max(), np.abs(E).max())
        delta = max(np.abs(D - D_old).max(), np.abs(E - E_old).max()) / scale
        deltas.append(delta)
        if delta < tol:
            break
    else:
        raise SolverDivergenceError(
            f"kernel iteration did not converge in {max_sweeps} sweeps (last delta {deltas[-1]:.3e})"
        )
    D[~lower] = np.nan
    E[~lower] = np.nan
    return D, E, deltas


def _mu_on(p, which):
    def coeff(s):
        return mu_coeffs(p, np.asarray(s))[which - 1]

    return coeff


def solve_controller_kernels(p, N, max_sweeps=MAX_SWEEPS, rule=DEFAULT_RULE):
    """Solve ``K21, K22`` and ``K11, K12`` on ``0 <= xi <= xbar <= 1``."""
    T = p.transit_time
    mu1, mu2 = _mu_on(p, 1), _mu_on(p, 2)

    K21, K22, h2 = solve_goursat_pair(
        N,
        a=lambda s: T * mu2(s),
        b=lambda s: -T * mu1(s),
        d=lambda s: -0.5 * T * mu2(s),
        max_sweeps=max_sweeps,
        rule=rule,
    )
    K12, K11, h1 = solve_goursat_pair(
        N,
        a=lambda s: T * mu1(s),
        b=lambda s: -T * mu2(s),
        d=lambda s: -0.5 * T * mu1(s),
        max_sweeps=max_sweeps,
        rule=rule,
    )
    return ControllerKernels(
        K11=TriKernel("K11", K11, "lower"),
        K12=TriKernel("K12", K12, "lower"),
        K21=TriKernel("K21", K21, "lower"),
        K22=TriKernel("K22", K22, "lower"),
        history={"K21/K22": h2, "K11/K12": h1},
    )


def solve_observer_kernels(p, N, max_sweeps=MAX_SWEEPS, rule=DEFAULT_RULE):
    """Solve ``P11, P21`` and ``P12, P22`` on ``0 <= xbar <= xi <= 1``.

    Swapping the two arguments turns each observer pair into the generic
    lower-triangle problem, with the ``xbar``-dependent coefficients becoming
    functions of the new second argument.
    """
    T = p.transit_time
    mu1, mu2 = _mu_on(p, 1), _mu_on(p, 2)

    # P21 plays the diagonal role, P11 the edge role
    Q21, Q11, h1 = solve_goursat_pair(
        N,
        a=lambda s: T * mu2(s),
        b=lambda s: -T * mu1(s),
        d=lambda s: -0.5 * T * mu2(s),
        max_sweeps=max_sweeps,
        rule=rule,
    )
    Q12, Q22, h2 = solve_goursat_pair(
        N,
        a=lambda s: T * mu1(s),
        b=lambda s: -T * mu2(s),
        d=lambda s: -0.5 * T * mu1(s),
        max_sweeps=max_sweeps,
        rule=rule,
    )
    return ObserverKernels(
        P11=TriKernel("P11", Q11.T.copy(), "upper"),
        P21=TriKernel("P21", Q21.T.copy(), "upper"),
        P12=TriKernel("P12", Q12.T.copy(), "upper"),
        P22=TriKernel("P22", Q22.T.copy(), "upper"),
        history={"P11/P21": h1, "P12/P22": h2},
    )


# ---------------------------------------------------------------------------
# gains


def _output_row(exo, p, tau):
    """Rows ``C exp(A (ell/sigma)(1 - tau))`` for each node ``tau``."""
    T = p.transit_time
    return np.array([exo.C @ matrix_exp(exo.A, T * (1.0 - t)) for t in np.atleast_1d(tau)])


def feedback_gain_K(exo, p, K21):
    """Feedback row acting on the exosystem state in the control law."""
    if K21.orientation != "lower":
        raise InvalidInputError("K21 must be a lower-triangular kernel")
    N = K21.N
    tau = np.linspace(0.0, 1.0, N + 1)
    rows = _output_row(exo, p, tau)
    edge = K21.values[:, 0]
    integral = trapezoid_weights(N) @ (edge[:, None] * rows)
    return rows[0] / (2.0 * p.sigma) - integral / p.sigma


def observer_gains_known(p, P11, P21):
    scale = p.sigma / p.ell
    return GainSet(K=None, p1=-scale * P11.values[:, -1].copy(), p2=-scale * P21.values[:, -1].copy(), variant="known-exo")


def _upper_row_integrals(P, g):
    """``int_{xbar_i}^1 P(xbar_i, xi) g(xi) dxi`` for every row i."""
    N = P.N
    vals = np.where(P.mask, P.values, 0.0) * g[None, :]
    total = vals.sum(axis=1)
    ends = 0.5 * (np.diag(vals) + vals[:, -1])
    return (total - ends) / N


def observer_gains_uncertain(exo, H, p, P11, P21):
    """Injection gains for the observer that also estimates the exosystem state.

    The exosystem injection enters the ``v``-equation weighted by
    ``C exp(A (ell/sigma)(1 - xbar)) H / sigma``, which is what makes the
    observer error map onto a pure transport system for ``v``.
    """
    H = require_hurwitz_gain(exo, H, p.sigma)
    N = P11.N
    xi = np.linspace(0.0, 1.0, N + 1)
    g = (_output_row(exo, p, xi) @ H).reshape(-1) / p.sigma
    scale = p.sigma / p.ell
    p1 = -g - scale * P11.values[:, -1] + _upper_row_integrals(P11, g)
    p2 = -scale * P21.values[:, -1] + _upper_row_integrals(P21, g)
    return GainSet(K=None, p1=p1, p2=p2, variant="uncertain", H=H)


# ---------------------------------------------------------------------------
# diagnostics

_FAMILIES = {
    # name: (first, second, orientation)
    "K21/K22": ("K21", "K22", "lower"),
    "K11/K12": ("K11", "K12", "lower"),
    "P11/P21": ("P11", "P21", "upper"),
    "P12/P22": ("P12", "P22", "upper"),
}


def _central(values, axis, N):
    out = np.full_like(values, np.nan)
    if axis == 0:
        out[1:-1, :] = (values[2:, :] - values[:-2, :]) * (N / 2.0)
    else:
        out[:, 1:-1] = (values[:, 2:] - values[:, :-2]) * (N / 2.0)
    return out


def _interior_mask(N, orientation):
    i, j = np.meshgrid(np.arange(N + 1), np.arange(N + 1), indexing="ij")
    if orientation == "lower":
        return (j >= 1) & (j <= i - 1) & (i <= N - 1)
    return (i >= 1) & (j >= i + 1) & (j <= N - 1)


def kernel_residual(family, grids, p):
    """Max absolute central-difference residual of a kernel pair's PDEs.

    ``grids`` maps kernel names (``"K21"``, ``"P11"``, ...) to TriKernel or
    raw arrays.  Only nodes whose four neighbors lie in the triangle count.
    """
    first, second, orientation = _FAMILIES[family]
    A = getattr(grids[first], "values", grids[first])
    B = getattr(grids[second], "values", grids[second])
    N = A.shape[0] - 1
    T = p.transit_time
    s = np.linspace(0.0, 1.0, N + 1)
    mu1, mu2 = mu_coeffs(p, s)
    Ax, Axi = _central(A, 0, N), _central(A, 1, N)
    Bx, Bxi = _central(B, 0, N), _central(B, 1, N)
    col = lambda m: m[None, :]  # noqa: E731  coefficient of xi
    row = lambda m: m[:, None]  # noqa: E731  coefficient of xbar
    if family == "K21/K22":
        r1 = Ax - Axi - T * col(mu2) * B
        r2 = Bx + Bxi + T * col(mu1) * A
    elif family == "K11/K12":
        r1 = Ax + Axi + T * col(mu2) * B
        r2 = Bx - Bxi - T * col(mu1) * A
    elif family == "P11/P21":
        r1 = Ax + Axi + T * row(mu1) * B
        r2 = Bx - Bxi + T * row(mu2) * A
    else:
        r1 = Ax - Axi + T * row(mu1) * B
        r2 = Bx + Bxi + T * row(mu2) * A
    m = _interior_mask(N, orientation)
    return float(max(np.abs(r1[m]).max(), np.abs(r2[m]).max()))


def boundary_defects(family, grids, p):
    """Max absolute violation of a pair's diagonal and edge conditions at nodes."""
    first, second, _ = _FAMILIES[family]
    A = getattr(grids[first], "values", grids[first])
    B = getattr(grids[second], "values", grids[second])
    N = A.shape[0] - 1
    s = np.linspace(0.0, 1.0, N + 1)
    mu1, mu2 = mu_coeffs(p, s)
    half = 0.5 * p.transit_time
    if family == "K21/K22":
        diag, edge = np.diag(A) + half * mu2, B[:, 0] - A[:, 0]
    elif family == "K11/K12":
        diag, edge = np.diag(B) + half * mu1, A[:, 0] - B[:, 0]
    elif family == "P11/P21":
        diag, edge = np.diag(B) + half * mu2, A[0, :] - B[0, :]
    else:
        diag, edge = np.diag(A) + half * mu1, B[0, :] - A[0, :]
    return float(max(np.abs(diag).max(), np.abs(edge).max()))


def _lower_row_integrals(K, f):
    """``int_0^{xbar_i} K(xbar_i, xi) f(xi) dxi`` for every row i."""
    N = K.N
    vals = np.where(K.mask, K.values, 0.0) * f[None, :]
    total = vals.sum(axis=1)
    ends = 0.5 * (vals[:, 0] + np.diag(vals))
    return (total - ends) / N


def backstepping_transform(v, w, ck):
    """Map plant Riemann fields ``(v, w)`` to the target coordinates ``(alpha, beta)``."""
    v = np.asarray(v, dtype=float)
    w = np.asarray(w, dtype=float)
    alpha = v - _lower_row_integrals(ck.K11, v) - _lower_row_integrals(ck.K12, w)
    beta = w - _lower_row_integrals(ck.K21, v) - _lower_row_integrals(ck.K22, w)
    return alpha, beta


def observer_error_transform(alpha_t, beta_t, ok):
    """Map target observer errors ``(alpha~, beta~)`` back to ``(v~, w~)``."""
    alpha_t = np.asarray(alpha_t, dtype=float)
    beta_t = np.asarray(beta_t, dtype=float)
    v = alpha_t - _upper_row_integrals(ok.P11, alpha_t) - _upper_row_integrals(ok.P12, beta_t)
    w = beta_t - _upper_row_integrals(ok.P21, alpha_t) - _upper_row_integrals(ok.P22, beta_t)
    return v, w


def export_kernels_csv(kernels, out_dir):
    """Write one CSV per kernel with columns ``xbar, xi, value`` (triangle nodes only)."""
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    for k in kernels:
        N = k.N
        path = os.path.join(out_dir, f"{k.name}.csv")
        with open(path, "w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(["xbar", "xi", "value"])
            ii, jj = np.nonzero(k.mask)
            for i, j in zip(ii, jj):
                wr.writerow([repr(float(i) / N), repr(float(j) / N), repr(float(k.values[i, j]))])
        paths.append(path)
    return paths
