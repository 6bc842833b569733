"""Linear exosystem generating the outlet-flow fluctuation.

The fluctuation is ``s(t) = C X(t)`` with ``dX/dt = A X``.  An optional
unknown but bounded term ``eps(t)`` is added on top of ``s`` for robustness
studies.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import InvalidGainError, InvalidInputError, UnobservableError

PAPER_IV_PERIOD = 6 * 3600.0


def matrix_exp(A, t=1.0, tol=1e-16):
    """Return ``exp(A t)`` by scaling and squaring a truncated Taylor series.

    The series and the squaring phase both work on ``F = exp(B) - I`` so that
    the small increments of a finely scaled ``B`` are not lost to rounding
    against the identity.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    t = float(t)
    if A.shape[0] != A.shape[1]:
        raise InvalidInputError(f"matrix_exp needs a square matrix, got {A.shape}")
    if not (np.all(np.isfinite(A)) and math.isfinite(t)):
        raise InvalidInputError("matrix_exp input contains non-finite entries")
    n = A.shape[0]
    B = A * t
    norm = np.linalg.norm(B, 1)
    squarings = 0
    if norm > 0.5:
        squarings = int(math.ceil(math.log2(norm / 0.5)))
        B = B / 2.0**squarings

    F = np.zeros((n, n))
    term = np.eye(n)
    for k in range(1, 60):
        term = term @ B / k
        F = F + term
        if np.linalg.norm(term, 1) <= tol * max(np.linalg.norm(F, 1), 1e-300):
            break
    for _ in range(squarings):
        F = 2.0 * F + F @ F
    return np.eye(n) + F


@lru_cache(maxsize=256)
def _cached_transition(a_bytes, n, dt):
    A = np.frombuffer(a_bytes, dtype=float).reshape(n, n)
    out = matrix_exp(A, dt)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class Exosystem:
    """``dX/dt = A X``, ``s = C X``, ``X(0) = X0``."""

    A: np.ndarray
    C: np.ndarray
    X0: np.ndarray

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        C = np.asarray(self.C, dtype=float).reshape(-1)
        X0 = np.asarray(self.X0, dtype=float).reshape(-1)
        n = A.shape[0]
        if n < 1 or A.shape != (n, n):
            raise InvalidInputError(f"A must be square, got shape {A.shape}")
        if C.shape != (n,) or X0.shape != (n,):
            raise InvalidInputError(f"C and X0 must have length {n}")
        if not (np.all(np.isfinite(A)) and np.all(np.isfinite(C)) and np.all(np.isfinite(X0))):
            raise InvalidInputError("exosystem matrices must be finite")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "C", C)
        object.__setattr__(self, "X0", X0)

    @property
    def n(self):
        return self.A.shape[0]

    def transition(self, dt):
        """The exact one-step flow ``exp(A dt)`` (cached per step size)."""
        return _cached_transition(self.A.tobytes(), self.n, float(dt))

    def state_at(self, t):
        return matrix_exp(self.A, t) @ self.X0

    def dominant_frequency(self):
        """Largest imaginary part in the spectrum of A [rad/s]."""
        return float(np.max(np.abs(np.linalg.eigvals(self.A).imag)))


@dataclass(frozen=True, eq=False)
class Uncertainty:
    """Unknown additive outlet-flow disturbance ``eps``.

    ``kind`` is ``"none"``, ``"cubic-of-s"`` (``eps = coeff * s**3``) or
    ``"custom-samples"`` (linear interpolation of ``times``/``values``,
    clamped to ``[-M, M]``).
    """

    kind: str = "none"
    M: float | None = None
    coeff: float = 0.001
    times: np.ndarray = field(default_factory=lambda: np.zeros(0))
    values: np.ndarray = field(default_factory=lambda: np.zeros(0))

    KINDS = ("none", "cubic-of-s", "custom-samples")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise InvalidInputError(f"unknown uncertainty kind {self.kind!r}; expected one of {self.KINDS}")
        if self.M is not None and not (math.isfinite(self.M) and self.M >= 0):
            raise InvalidInputError("uncertainty bound M must be finite and >= 0")
        times = np.asarray(self.times, dtype=float).reshape(-1)
        values = np.asarray(self.values, dtype=float).reshape(-1)
        if times.shape != values.shape:
            raise InvalidInputError("custom uncertainty times and values differ in length")
        if times.size > 1 and np.any(np.diff(times) <= 0):
            raise InvalidInputError("custom uncertainty times must be strictly increasing")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)

    def scaled(self, factor):
        """Same disturbance shape with amplitude multiplied by ``factor``."""
        M = None if self.M is None else self.M * abs(factor)
        return Uncertainty(self.kind, M, self.coeff * factor, self.times, self.values * factor)


def paper_iv_exosystem(phi_L=289.0):
    """Harmonic oscillator with a 6 h period and ``s(t) = 0.6 phi_L/(2 pi) sin(2 pi t / 6h)``."""
    omega = 2.0 * math.pi / PAPER_IV_PERIOD
    A = np.array([[0.0, 1.0], [-(omega**2), 0.0]])
    return Exosystem(A=A, C=np.array([1.0, 0.0]), X0=np.array([0.0, 0.1 * phi_L / 3600.0]))


def paper_iv_s(t, phi_L=289.0):
    return 0.6 * phi_L / (2.0 * math.pi) * np.sin(2.0 * math.pi * np.asarray(t) / PAPER_IV_PERIOD)


def step_exo(sys, X, dt):
    """Advance the exosystem state by ``dt`` using the exact flow."""
    if not dt > 0:
        raise InvalidInputError(f"dt must be positive, got {dt}")
    X = np.asarray(X, dtype=float).reshape(-1)
    if X.shape != (sys.n,):
        raise InvalidInputError(f"state must have length {sys.n}")
    return sys.transition(dt) @ X


def s_of(sys, X):
    X = np.asarray(X, dtype=float).reshape(-1)
    if X.shape != sys.C.shape:
        raise InvalidInputError(f"state of length {X.size} does not match C of length {sys.C.size}")
    return float(sys.C @ X)


def epsilon_of(u, s, t=0.0):
    if u.kind == "none":
        return 0.0
    if u.kind == "cubic-of-s":
        return u.coeff * s**3
    if u.values.size == 0:
        raise InvalidInputError("custom uncertainty series is empty")
    eps = float(np.interp(t, u.times, u.values))
    if u.M is not None:
        eps = min(max(eps, -u.M), u.M)
    return eps


def observability_matrix(A, C):
    A = np.atleast_2d(np.asarray(A, dtype=float))
    C = np.asarray(C, dtype=float).reshape(1, -1)
    rows = [C]
    for _ in range(A.shape[0] - 1):
        rows.append(rows[-1] @ A)
    return np.vstack(rows)


def is_hurwitz(M):
    return bool(np.max(np.linalg.eigvals(np.atleast_2d(M)).real) < 0)


def default_observer_poles(sys):
    """``-3 w, -4 w, ...`` with ``w`` the fastest oscillation frequency of A."""
    omega = sys.dominant_frequency()
    if omega <= 0:
        raise InvalidInputError("A has no oscillatory mode; observer poles must be given explicitly")
    return [-(3.0 + k) * omega for k in range(sys.n)]


def place_H(sys, sigma, desired_poles):
    """Output-injection column ``H`` with ``spec(A + H C / sigma) = desired_poles``.

    Uses Ackermann's formula on the dual pair ``(A^T, C^T)``.
    """
    poles = np.asarray(desired_poles, dtype=complex).reshape(-1)
    n = sys.n
    if poles.size != n:
        raise InvalidInputError(f"need {n} poles, got {poles.size}")
    if np.any(poles.real >= 0):
        raise InvalidInputError("observer poles must have negative real part")
    if not np.allclose(np.sort_complex(poles), np.sort_complex(poles.conj())):
        raise InvalidInputError("observer poles must be closed under conjugation")

    obs = observability_matrix(sys.A, sys.C)
    sv = np.linalg.svd(obs, compute_uv=False)
    if sv[-1] <= 1e-12 * sv[0]:
        raise UnobservableError("(A, C) is not observable; poles cannot be placed")

    coeffs = np.real(np.poly(poles))
    At = sys.A.T
    char = np.zeros((n, n))
    for c in coeffs:
        char = char @ At + c * np.eye(n)
    e_last = np.zeros(n)
    e_last[-1] = 1.0
    # controllability matrix of the dual pair is obs.T
    F = e_last @ np.linalg.solve(obs.T, char)
    return -sigma * F.reshape(n, 1)


def observer_error_matrix(sys, H, sigma):
    return sys.A + np.asarray(H, dtype=float).reshape(-1, 1) @ sys.C.reshape(1, -1) / sigma


def require_hurwitz_gain(sys, H, sigma):
    H = np.asarray(H, dtype=float).reshape(-1, 1)
    if H.shape[0] != sys.n:
        raise InvalidInputError(f"H must have {sys.n} rows")
    if not is_hurwitz(observer_error_matrix(sys, H, sigma)):
        raise InvalidGainError("A + H C / sigma is not Hurwitz")
    return H
