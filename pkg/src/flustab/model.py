"""Parameters, state vectors, and field coefficients for the within-host model.

The model tracks a fraction of uninfected target cells T, a cascade of n_E
eclipse-phase age classes E_1..E_{n_E}, a cascade of n_I infectious age
classes I_1..I_{n_I}, the free-virus concentration V, and its spatial
derivative W along the airway coordinate x. Everything downstream (matrix
assembly, spectra, field tracing) consumes the two container types defined
here, so all input checking lives in this module.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np


class InvalidParamsError(ValueError):
    """Raised when an operation requires parameters that fail validation."""

    def __init__(self, problems: Sequence[str]):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


@dataclass(frozen=True)
class ModelParams:
    """Rate constants and age-class counts of the infection model.

    Attributes:
        beta: infection rate (per virion per time).
        p: virion production rate (virions per cell per time).
        c: viral clearance rate (per time).
        n_I: number of infectious age classes (>= 1).
        tau_I: mean infectious duration (> 0).
        n_E: number of eclipse age classes (>= 0).
        tau_E: mean eclipse duration; required > 0 iff n_E > 0.
        D_PCF: diffusion rate of virus in the periciliary fluid (>= 0).
        v_a: advection speed of the periciliary fluid (sign free).
        a: assumed constant second spatial derivative of V (sign free).
    """

    beta: float
    p: float
    c: float
    n_I: int
    tau_I: float
    n_E: int = 0
    tau_E: float | None = None
    D_PCF: float = 0.0
    v_a: float = 0.0
    a: float = 0.0

    @property
    def c_E(self) -> float:
        """Eclipse cascade rate n_E/tau_E, with c_E = 0 when n_E = 0."""
        return derived_rates(self)[0]

    @property
    def c_I(self) -> float:
        """Infectious cascade rate n_I/tau_I."""
        return derived_rates(self)[1]

    @property
    def T_star(self) -> float:
        return target_cell_threshold(self)

    @property
    def state_dim(self) -> int:
        """Phase-space dimension: T plus all compartments plus V and W."""
        return self.n_E + self.n_I + 3

    def to_json_dict(self) -> dict:
        d = {
            "beta": self.beta,
            "p": self.p,
            "c": self.c,
            "n_E": self.n_E,
            "n_I": self.n_I,
            "tau_I": self.tau_I,
            "D_PCF": self.D_PCF,
            "v_a": self.v_a,
            "a": self.a,
        }
        if self.tau_E is not None:
            d["tau_E"] = self.tau_E
        return d

    @classmethod
    def from_json_dict(cls, d: dict) -> "ModelParams":
        required = ["beta", "p", "c", "n_E", "n_I", "tau_I", "D_PCF", "v_a", "a"]
        missing = [k for k in required if k not in d]
        if missing:
            raise InvalidParamsError([f"missing parameter key: {k}" for k in missing])
        known = set(required + ["tau_E"])
        unknown = sorted(set(d) - known)
        if unknown:
            raise InvalidParamsError([f"unknown parameter key: {k}" for k in unknown])
        # tau_E is optional only for eclipse-free models
        if int(d["n_E"]) > 0 and d.get("tau_E") is None:
            raise InvalidParamsError(["missing parameter key: tau_E"])
        return cls(
            beta=float(d["beta"]),
            p=float(d["p"]),
            c=float(d["c"]),
            n_E=int(d["n_E"]),
            n_I=int(d["n_I"]),
            tau_E=float(d["tau_E"]) if "tau_E" in d and d["tau_E"] is not None else None,
            tau_I=float(d["tau_I"]),
            D_PCF=float(d["D_PCF"]),
            v_a=float(d["v_a"]),
            a=float(d["a"]),
        )


def _structural_problems(params: ModelParams) -> list[str]:
    # The bare minimum for the cascade rates and array shapes to make sense.
    # Positivity of beta/p/c is deliberately not required here: reduced
    # configurations (e.g. beta = 0) are legitimate inputs for the linear
    # diagnostics even though they fail the full contract in validate().
    problems = []
    if int(params.n_I) != params.n_I or params.n_I < 1:
        problems.append("n_I must be an integer >= 1")
    if int(params.n_E) != params.n_E or params.n_E < 0:
        problems.append("n_E must be an integer >= 0")
    if not (params.tau_I > 0):
        problems.append("tau_I must be > 0")
    if params.n_E > 0 and not (params.tau_E is not None and params.tau_E > 0):
        problems.append("tau_E must be > 0 when n_E > 0")
    return problems


def derived_rates(params: ModelParams) -> tuple[float, float]:
    """Return the cascade rates (c_E, c_I).

    c_I = n_I/tau_I always; c_E = n_E/tau_E, with the convention c_E = 0
    when n_E = 0 (its formal power c_E**n_E is then read as 1, which is what
    the characteristic-polynomial routines do).
    """
    problems = _structural_problems(params)
    if problems:
        raise InvalidParamsError(problems)
    c_E = params.n_E / params.tau_E if params.n_E > 0 else 0.0
    c_I = params.n_I / params.tau_I
    return c_E, c_I


def target_cell_threshold(params: ModelParams) -> float:
    """Critical target-cell fraction c/(tau_I*p*beta).

    Below this fraction the spectrum of the frozen-T system has no positive
    eigenvalue; above it exactly one appears.
    """
    problems = _structural_problems(params)
    for name in ("beta", "p", "c"):
        if not (getattr(params, name) > 0):
            problems.append(f"{name} must be > 0")
    if problems:
        raise InvalidParamsError(problems)
    return params.c / (params.tau_I * params.p * params.beta)


def validate(params: ModelParams) -> list[str]:
    """Full input contract. Returns every violation, not just the first."""
    problems = _structural_problems(params)
    for name in ("beta", "p", "c"):
        value = getattr(params, name)
        if not (value > 0):
            problems.append(f"{name} must be > 0")
    if not (params.D_PCF >= 0):
        problems.append("D_PCF must be >= 0")
    for name in ("beta", "p", "c", "tau_I", "D_PCF", "v_a", "a"):
        value = getattr(params, name)
        if value is not None and not np.isfinite(value):
            problems.append(f"{name} must be finite")
    return problems


def require_valid(params: ModelParams) -> ModelParams:
    problems = validate(params)
    if problems:
        raise InvalidParamsError(problems)
    return params


@dataclass(frozen=True)
class StateVector:
    """One phase-space point, ordered (T, E_1..E_{n_E}, I_1..I_{n_I}, V, W)."""

    T: float
    E: tuple[float, ...]
    I: tuple[float, ...]
    V: float
    W: float

    @property
    def dim(self) -> int:
        return 3 + len(self.E) + len(self.I)

    def to_array(self) -> np.ndarray:
        return np.array([self.T, *self.E, *self.I, self.V, self.W], dtype=float)

    def to_jsonable(self) -> list[float]:
        # Flat list in canonical component order; floats round-trip exactly
        # through JSON because Python serializes shortest repr.  Coerce to
        # builtin float so numpy scalars never leak into json.dumps.
        return [float(v) for v in (self.T, *self.E, *self.I, self.V, self.W)]

    @classmethod
    def from_array(cls, arr: Sequence[float], n_E: int, n_I: int) -> "StateVector":
        arr = list(map(float, arr))
        expected = n_E + n_I + 3
        if len(arr) != expected:
            raise ValueError(
                f"state vector has {len(arr)} components, expected {expected} "
                f"for n_E={n_E}, n_I={n_I}"
            )
        return cls(
            T=arr[0],
            E=tuple(arr[1 : 1 + n_E]),
            I=tuple(arr[1 + n_E : 1 + n_E + n_I]),
            V=arr[-2],
            W=arr[-1],
        )

    @classmethod
    def for_params(cls, params: ModelParams, arr: Sequence[float]) -> "StateVector":
        return cls.from_array(arr, params.n_E, params.n_I)


@dataclass(frozen=True)
class FieldCoefficients:
    """Coefficients of the heuristic x-direction field.

    r has one entry per phase-space slot except the last (W): the T slot,
    every compartment slot, and the V slot. All entries must be positive and
    the V-slot entry is pinned to 1 so that the x-field reproduces the
    defining relation dV/dx = W. psi is the constant standing in for the
    mixed derivative d/dt of W (default 0; small values leave the qualitative
    picture unchanged).
    """

    r: tuple[float, ...]
    psi: float = 0.0

    @classmethod
    def default_for(cls, params: ModelParams) -> "FieldCoefficients":
        return cls(r=(1.0,) * (params.n_E + params.n_I + 2), psi=0.0)

    def problems_for(self, params: ModelParams) -> list[str]:
        problems = []
        expected = params.n_E + params.n_I + 2
        if len(self.r) != expected:
            problems.append(f"r must have {expected} entries, got {len(self.r)}")
        else:
            if any(not (ri > 0) for ri in self.r):
                problems.append("all r entries must be > 0")
            if self.r[-1] != 1.0:
                problems.append("last r entry must equal 1 exactly")
        if not np.isfinite(self.psi):
            problems.append("psi must be finite")
        return problems


__all__ = [
    "InvalidParamsError",
    "ModelParams",
    "StateVector",
    "FieldCoefficients",
    "derived_rates",
    "target_cell_threshold",
    "validate",
    "require_valid",
    "replace",
]
