"""Scenario configuration: presets, JSON loading and validation.

A scenario file is a JSON object with ``"schema_version": 1``::

    {
      "schema_version": 1,
      "name": "my-run",
      "params": {"lambda_f": 0.011, "D": 0.5, "ell": 25000, "sigma": 378,
                 "phi_L": 289, "U_star": 46},
      "exosystem": {"A": [[0, 1], [-8.46e-8, 0]], "C": [1, 0], "X0": [0, 0.0803]},
      "uncertainty": {"kind": "cubic-of-s", "coeff": 0.001},
      "controller": "uncertain",
      "plant": "nonlinear",
      "N": 250,
      "horizon": 43200
    }

Optional keys: ``log_stride``, ``observer_init``, ``H_poles`` (list of reals
or ``[re, im]`` pairs), ``dt``, ``saturation`` (fraction of ``U_star`` or
null), ``transient``, ``settle_band``, ``kernel_rule``.
"""

from __future__ import annotations

import json
import logging
import math
import os
from dataclasses import dataclass, replace

import numpy as np

from .errors import InvalidInputError, ValidationError
from .exosystem import (
    Exosystem,
    Uncertainty,
    default_observer_poles,
    paper_iv_exosystem,
)
from .kernels import RULES
from .pipeline import PipelineParams, paper_iv_params, require_feasible

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1
CONTROLLERS = ("off", "known-exo", "uncertain")
PLANTS = ("nonlinear", "linear")
OBSERVER_INITS = ("zero", "truth")
MIN_GRID = 32
DISTURBANCE_WARN_FRACTION = 0.15

PRESETS = ("paper-iv-a-open", "paper-iv-a-closed", "paper-iv-b-open", "paper-iv-b-closed")


@dataclass(frozen=True, eq=False)
class Scenario:
    """Everything needed to run one simulation.

    ``transient`` is the time after which the steady residual is measured and
    ``settle_band`` the absolute band on ``|drho(t, ell)|`` used for the
    settling time.  ``None`` picks ``3 ell/sigma + 10 s`` and
    ``0.5 %`` of ``rho_star(ell)`` respectively.
    """

    name: str
    params: PipelineParams
    exo: Exosystem
    uncertainty: Uncertainty
    controller: str
    plant: str
    N: int
    horizon: float
    log_stride: int = 1
    observer_init: str = "zero"
    H_poles: tuple | None = None
    dt: float | None = None
    saturation: float | None = None
    transient: float | None = None
    settle_band: float | None = None
    kernel_rule: str = "trapezoid"

    def with_changes(self, **changes):
        return validate_scenario(replace(self, **changes))

    @property
    def transient_time(self):
        if self.transient is not None:
            return self.transient
        return 3.0 * self.params.transit_time + 10.0


def validate_scenario(sc):
    """Check cross-field invariants; returns ``sc`` unchanged when valid."""
    if not (isinstance(sc.horizon, (int, float)) and math.isfinite(sc.horizon) and sc.horizon > 0):
        raise ValidationError(f"horizon must be a positive number, got {sc.horizon!r}", field="horizon")
    if not isinstance(sc.N, (int, np.integer)) or isinstance(sc.N, bool) or sc.N < MIN_GRID:
        raise ValidationError(f"N must be an integer >= {MIN_GRID}, got {sc.N!r}", field="N")
    if sc.controller not in CONTROLLERS:
        raise ValidationError(f"controller must be one of {CONTROLLERS}", field="controller")
    if sc.plant not in PLANTS:
        raise ValidationError(f"plant must be one of {PLANTS}", field="plant")
    if sc.observer_init not in OBSERVER_INITS:
        raise ValidationError(f"observer_init must be one of {OBSERVER_INITS}", field="observer_init")
    if not isinstance(sc.log_stride, (int, np.integer)) or sc.log_stride < 1:
        raise ValidationError("log_stride must be an integer >= 1", field="log_stride")
    if sc.kernel_rule not in RULES:
        raise ValidationError(f"kernel_rule must be one of {RULES}", field="kernel_rule")
    for name in ("dt", "saturation", "transient", "settle_band"):
        val = getattr(sc, name)
        if val is not None and not (math.isfinite(val) and val > 0):
            raise ValidationError(f"{name} must be positive or null", field=name)
    if sc.dt is not None and sc.params.sigma * sc.dt * sc.N / sc.params.ell > 0.95:
        raise ValidationError("dt violates the CFL limit sigma dt / dx <= 0.95", field="dt")
    require_feasible(sc.params)
    if sc.controller == "uncertain" and sc.H_poles is None:
        # fails early when A has no oscillatory mode to derive defaults from
        try:
            default_observer_poles(sc.exo)
        except InvalidInputError as exc:
            raise ValidationError(str(exc), field="H_poles") from None
    if sc.H_poles is not None and len(sc.H_poles) != sc.exo.n:
        raise ValidationError(f"H_poles needs {sc.exo.n} entries", field="H_poles")
    _warn_large_disturbance(sc)
    return sc


def _warn_large_disturbance(sc):
    ts = np.linspace(0.0, sc.horizon, 1025)
    step = sc.exo.transition(ts[1])
    X = sc.exo.X0.copy()
    peak = 0.0
    for _ in ts:
        peak = max(peak, abs(float(sc.exo.C @ X)))
        X = step @ X
    if peak > DISTURBANCE_WARN_FRACTION * sc.params.phi_L:
        log.warning(
            "outlet fluctuation peaks at %.4g, above %.0f%% of phi_L; the linear design may not apply",
            peak,
            100 * DISTURBANCE_WARN_FRACTION,
        )
    return peak


# ---------------------------------------------------------------------------
# presets


def preset(name):
    """Scenario for one of the desk-scale presets in :data:`PRESETS`."""
    if name not in PRESETS:
        raise ValidationError(f"unknown preset {name!r}; choose from {PRESETS}", field="preset")
    p = paper_iv_params()
    exo = paper_iv_exosystem(p.phi_L)
    case_b = "-b-" in name
    closed = name.endswith("closed")
    unc = Uncertainty("cubic-of-s", coeff=0.001) if case_b else Uncertainty()
    controller = "off"
    if closed:
        controller = "uncertain" if case_b else "known-exo"
    sc = Scenario(
        name=name,
        params=p,
        exo=exo,
        uncertainty=unc,
        controller=controller,
        plant="nonlinear",
        N=250,
        horizon=12 * 3600.0,
        log_stride=100,
        observer_init="zero",
        saturation=0.5 if closed else None,
    )
    return validate_scenario(sc)


# ---------------------------------------------------------------------------
# JSON


def _require(obj, key, where=""):
    if key not in obj:
        raise ValidationError(f"missing required field {where}{key}", field=f"{where}{key}")
    return obj[key]


def _number(val, field):
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise ValidationError(f"{field} must be a number, got {val!r}", field=field)
    return float(val)


def _optional_number(obj, key):
    val = obj.get(key)
    return None if val is None else _number(val, key)


def _parse_poles(raw):
    if raw is None:
        return None
    if not isinstance(raw, list):
        raise ValidationError("H_poles must be a list", field="H_poles")
    poles = []
    for item in raw:
        if isinstance(item, list) and len(item) == 2:
            poles.append(complex(_number(item[0], "H_poles"), _number(item[1], "H_poles")))
        else:
            poles.append(complex(_number(item, "H_poles"), 0.0))
    return tuple(poles)


def scenario_from_dict(doc, name="scenario"):
    """Build and validate a Scenario from a parsed JSON document."""
    if not isinstance(doc, dict):
        raise ValidationError("scenario must be a JSON object")
    version = doc.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ValidationError(f"unsupported schema_version {version!r}", field="schema_version")

    praw = _require(doc, "params")
    if not isinstance(praw, dict):
        raise ValidationError("params must be an object", field="params")
    pvals = {k: _number(_require(praw, k, "params."), f"params.{k}") for k in ("lambda_f", "D", "ell", "sigma", "phi_L", "U_star")}
    try:
        params = PipelineParams(**pvals)
    except InvalidInputError as exc:
        raise ValidationError(str(exc), field="params") from None

    eraw = _require(doc, "exosystem")
    try:
        exo = Exosystem(
            A=np.array(_require(eraw, "A", "exosystem."), dtype=float),
            C=np.array(_require(eraw, "C", "exosystem."), dtype=float),
            X0=np.array(_require(eraw, "X0", "exosystem."), dtype=float),
        )
    except (InvalidInputError, TypeError, ValueError) as exc:
        if isinstance(exc, ValidationError):
            raise
        raise ValidationError(f"bad exosystem: {exc}", field="exosystem") from None

    uraw = doc.get("uncertainty") or {"kind": "none"}
    try:
        unc = Uncertainty(
            kind=uraw.get("kind", "none"),
            M=_optional_number(uraw, "M"),
            coeff=_number(uraw.get("coeff", 0.001), "uncertainty.coeff"),
            times=np.array(uraw.get("times", []), dtype=float),
            values=np.array(uraw.get("values", []), dtype=float),
        )
    except (InvalidInputError, TypeError, ValueError) as exc:
        if isinstance(exc, ValidationError):
            raise
        raise ValidationError(f"bad uncertainty: {exc}", field="uncertainty") from None

    N = _require(doc, "N")
    if isinstance(N, float) and N.is_integer():
        N = int(N)
    stride = doc.get("log_stride", 1)
    sc = Scenario(
        name=str(doc.get("name", name)),
        params=params,
        exo=exo,
        uncertainty=unc,
        controller=_require(doc, "controller"),
        plant=_normalize_plant(_require(doc, "plant")),
        N=N,
        horizon=_number(_require(doc, "horizon"), "horizon"),
        log_stride=stride,
        observer_init=doc.get("observer_init", "zero"),
        H_poles=_parse_poles(doc.get("H_poles")),
        dt=_optional_number(doc, "dt"),
        saturation=_optional_number(doc, "saturation"),
        transient=_optional_number(doc, "transient"),
        settle_band=_optional_number(doc, "settle_band"),
        kernel_rule=doc.get("kernel_rule", "trapezoid"),
    )
    return validate_scenario(sc)


def _normalize_plant(plant):
    return "linear" if plant == "linear-canonical" else plant


def load_scenario(path):
    """Resolve a preset name or read and validate a scenario JSON file."""
    if path in PRESETS:
        return preset(path)
    if not os.path.exists(path):
        raise ValidationError(f"no preset or file named {path!r}", field="path")
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}", line=exc.lineno) from None
    base = os.path.splitext(os.path.basename(path))[0]
    return scenario_from_dict(doc, name=base)


def scenario_to_dict(sc):
    """Inverse of :func:`scenario_from_dict` (used to record runs)."""
    p = sc.params
    u = sc.uncertainty
    return {
        "schema_version": SCHEMA_VERSION,
        "name": sc.name,
        "params": {"lambda_f": p.lambda_f, "D": p.D, "ell": p.ell, "sigma": p.sigma, "phi_L": p.phi_L, "U_star": p.U_star},
        "exosystem": {"A": sc.exo.A.tolist(), "C": sc.exo.C.tolist(), "X0": sc.exo.X0.tolist()},
        "uncertainty": {
            "kind": u.kind,
            "M": u.M,
            "coeff": u.coeff,
            "times": u.times.tolist(),
            "values": u.values.tolist(),
        },
        "controller": sc.controller,
        "plant": sc.plant,
        "N": int(sc.N),
        "horizon": sc.horizon,
        "log_stride": int(sc.log_stride),
        "observer_init": sc.observer_init,
        "H_poles": None if sc.H_poles is None else [[z.real, z.imag] for z in sc.H_poles],
        "dt": sc.dt,
        "saturation": sc.saturation,
        "transient": sc.transient,
        "settle_band": sc.settle_band,
        "kernel_rule": sc.kernel_rule,
    }
