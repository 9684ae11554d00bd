"""The two column vector fields whose span the integral surfaces follow.

The time-direction field is the model's right-hand side. The x-direction
field is the heuristic spatial companion: every slot moves proportionally to
W (coefficients r_i, the T slot with a minus sign), the V slot moves by
exactly W so that the defining relation dV/dx = W holds, and the W slot
moves by the constant curvature a.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import (
    FieldCoefficients,
    InvalidParamsError,
    ModelParams,
    StateVector,
    derived_rates,
)


def _check_dims(params: ModelParams, coeffs: FieldCoefficients, y: np.ndarray):
    expected = params.n_E + params.n_I + 3
    if y.shape != (expected,):
        raise ValueError(f"state has shape {y.shape}, expected ({expected},)")
    problems = coeffs.problems_for(params)
    if problems:
        raise InvalidParamsError(problems)


def time_rhs(params: ModelParams, coeffs: FieldCoefficients, y: np.ndarray) -> np.ndarray:
    """Time-direction field on a raw state array (T, E.., I.., V, W).

    No validation; integrators call this in their inner loop after checking
    inputs once. Use time_field for the checked StateVector version.
    """
    c_E, c_I = derived_rates(params)
    n_E, n_I = params.n_E, params.n_I
    T = y[0]
    E = y[1 : 1 + n_E]
    I = y[1 + n_E : 1 + n_E + n_I]
    V = y[-2]
    W = y[-1]
    out = np.empty_like(y)
    infection = params.beta * T * V
    out[0] = -infection
    inflow = infection
    for i in range(n_E):
        out[1 + i] = inflow - c_E * E[i]
        inflow = c_E * E[i]
    for j in range(n_I):
        out[1 + n_E + j] = inflow - c_I * I[j]
        inflow = c_I * I[j]
    out[-2] = params.p * float(np.sum(I)) - params.c * V + params.D_PCF * params.a + params.v_a * W
    out[-1] = coeffs.psi
    return out


def x_rhs(params: ModelParams, coeffs: FieldCoefficients, y: np.ndarray) -> np.ndarray:
    """x-direction field on a raw state array; see time_rhs for the calling
    convention."""
    W = y[-1]
    out = np.empty_like(y)
    r = coeffs.r
    out[0] = -r[0] * W
    for i in range(1, len(r)):
        out[i] = r[i] * W
    out[-1] = params.a
    return out


def time_field(params: ModelParams, coeffs: FieldCoefficients, s: StateVector) -> np.ndarray:
    y = s.to_array()
    _check_dims(params, coeffs, y)
    return time_rhs(params, coeffs, y)


def x_field(params: ModelParams, coeffs: FieldCoefficients, s: StateVector) -> np.ndarray:
    y = s.to_array()
    _check_dims(params, coeffs, y)
    return x_rhs(params, coeffs, y)


@dataclass(frozen=True)
class FieldSample:
    """Both fields evaluated at one state."""

    at: StateVector
    d_dt: np.ndarray
    d_dx: np.ndarray


def sample_fields(params: ModelParams, coeffs: FieldCoefficients, s: StateVector) -> FieldSample:
    return FieldSample(at=s, d_dt=time_field(params, coeffs, s), d_dx=x_field(params, coeffs, s))


def rank_check(params: ModelParams, coeffs: FieldCoefficients, s: StateVector, tol: float = 1e-9) -> str:
    """"full-rank-2" when the two fields at s are linearly independent,
    "degenerate" when one is a scalar multiple of the other (including the
    both-zero case at equilibria with a = psi = 0).

    Independence is read off the singular values of the stacked 2 x n
    matrix, which measures the same thing as the Gram determinant without
    squaring the conditioning.
    """
    X = x_field(params, coeffs, s)
    Y = time_field(params, coeffs, s)
    sv = np.linalg.svd(np.vstack([X, Y]), compute_uv=False)
    if sv[0] == 0.0:
        return "degenerate"
    return "full-rank-2" if sv[1] > tol * sv[0] else "degenerate"


__all__ = [
    "FieldSample",
    "time_rhs",
    "x_rhs",
    "time_field",
    "x_field",
    "sample_fields",
    "rank_check",
]
