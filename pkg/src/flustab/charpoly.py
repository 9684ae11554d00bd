"""Coefficient-matrix assembly and three independent evaluations of its
characteristic polynomial.

The (n_E + n_I + 2)-square matrix acts on the (E, I, V, W) block of the state
at a frozen target-cell fraction T. Its characteristic polynomial has a
closed form; a telescoped sum form of the same polynomial avoids the
cancellation the closed form suffers near lambda = 0; and a dense LU
determinant serves as an oracle that shares no algebra with either.

Sign convention: every evaluation returns (-1)^(n_E + n_I) * det(A - lambda*I),
which makes the leading coefficient +1.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import ModelParams, derived_rates


@dataclass(eq=False)
class SystemMatrix:
    """Dense coefficient matrix with its block bookkeeping.

    Row/column order is (E_1..E_{n_E}, I_1..I_{n_I}, V, W). The last row is
    identically zero. entries is read-only after construction.
    """

    entries: np.ndarray
    n_E: int
    n_I: int
    T_value: float

    def __post_init__(self):
        self.entries = np.array(self.entries, dtype=float)
        self.entries.setflags(write=False)

    @property
    def n(self) -> int:
        return self.n_E + self.n_I + 2

    @property
    def inf_norm(self) -> float:
        return float(np.linalg.norm(self.entries, np.inf))


def coefficient_matrix(params: ModelParams, T: float) -> SystemMatrix:
    """Assemble the system matrix at target-cell fraction T.

    Pattern: each compartment row has its cascade rate on the subdiagonal
    and its negative on the diagonal; the infection input beta*T sits in the
    first row's V column; the V row collects p from every I column, -c on
    the diagonal, and v_a from the W column; the W row is zero.
    """
    c_E, c_I = derived_rates(params)
    n_E, n_I = params.n_E, params.n_I
    n = n_E + n_I + 2
    A = np.zeros((n, n))
    for i in range(n_E):
        A[i, i] = -c_E
        if i > 0:
            A[i, i - 1] = c_E
    for j in range(n_I):
        row = n_E + j
        A[row, row] = -c_I
        if j > 0:
            A[row, row - 1] = c_I
        elif n_E > 0:
            A[row, row - 1] = c_E  # hand-off from the last eclipse class
    v_row = n_E + n_I
    A[0, v_row] = params.beta * T
    A[v_row, n_E : n_E + n_I] = params.p
    A[v_row, v_row] = -params.c
    A[v_row, v_row + 1] = params.v_a
    # last row stays zero: W is constant under the frozen-T linear map
    return SystemMatrix(entries=A, n_E=n_E, n_I=n_I, T_value=float(T))


def _powers(params: ModelParams):
    c_E, c_I = derived_rates(params)
    # c_E^{n_E} with the 0^0 := 1 convention for n_E = 0
    cEn = c_E**params.n_E if params.n_E > 0 else 1.0
    return c_E, c_I, cEn


def charpoly_closed(params: ModelParams, T: float, lam: float) -> float:
    """Closed-form characteristic polynomial value at lam."""
    c_E, c_I, cEn = _powers(params)
    n_E, n_I = params.n_E, params.n_I
    cascade = (c_E + lam) ** n_E * (c_I + lam) ** n_I * (params.c + lam) * lam
    feedback = params.beta * T * cEn * params.p * (c_I**n_I - (c_I + lam) ** n_I)
    return cascade + feedback


def charpoly_sum_form(params: ModelParams, T: float, lam: float) -> float:
    """Telescoped form of the same polynomial.

    The difference of n_I-th powers in the closed form is expanded as
    (-lam) * sum_j c_I^j (c_I + lam)^(n_I - 1 - j), so every term carries
    the factor lam explicitly and the value at lam = 0 is an exact 0.0
    rather than a cancellation of two equal powers.
    """
    c_E, c_I, cEn = _powers(params)
    n_E, n_I = params.n_E, params.n_I
    cascade = (c_E + lam) ** n_E * (c_I + lam) ** n_I * (params.c + lam) * lam
    s = 0.0
    for j in range(n_I):
        s += c_I**j * (c_I + lam) ** (n_I - 1 - j)
    return cascade + params.beta * T * cEn * params.p * (-lam) * s


def charpoly_direct(params: ModelParams, T: float, lam: float) -> float:
    """Determinant oracle: LU with partial pivoting, accumulated as
    sign * log|det| so large dimensions cannot overflow the product."""
    A = coefficient_matrix(params, T)
    M = A.entries - lam * np.eye(A.n)
    sign, logabs = np.linalg.slogdet(M)
    det = sign * np.exp(logabs)
    parity = -1.0 if (params.n_E + params.n_I) % 2 else 1.0
    return parity * det


def charpoly(params: ModelParams, T: float, lam: float) -> float:
    """Canonical value: the sum form close to lam = 0 (where the closed form
    cancels), the closed form elsewhere."""
    _, c_I = derived_rates(params)
    if abs(lam) < 1e-6 * (c_I + params.c):
        return charpoly_sum_form(params, T, lam)
    return charpoly_closed(params, T, lam)


def charpoly_term_scale(params: ModelParams, T: float, lam: float) -> float:
    """Magnitude yardstick for charpoly values: the sum of the absolute
    values of the summands the closed form adds. A computed polynomial value
    below ~1e-12 of this scale is indistinguishable from a true zero."""
    c_E, c_I, cEn = _powers(params)
    n_I = params.n_I
    cascade = (c_E + abs(lam)) ** params.n_E * (c_I + abs(lam)) ** n_I * (params.c + abs(lam)) * abs(lam)
    feedback = abs(params.beta * T) * cEn * params.p * (c_I**n_I + (c_I + abs(lam)) ** n_I)
    return cascade + feedback


def production_minor_det(params: ModelParams, lam: float, k: int) -> float:
    """Determinant of the k-th production minor by its first-column
    recursion; the minors arise when the feedback column of A - lambda*I is
    expanded away, and their closed evaluation is what telescopes into
    charpoly_sum_form. Exposed for proof-level testing.

    Base: det B_2 = c_I*p - p*(-c_I - lam).
    Step: det B_k = c_I * det B_{k-1} + (-1)^(k+1) * p * (-c_I - lam)^(k-1).
    """
    if params.n_I < 2:
        raise ValueError("production minors need n_I >= 2")
    if not (2 <= k <= params.n_I):
        raise ValueError(f"k must lie in [2, n_I={params.n_I}], got {k}")
    _, c_I = derived_rates(params)
    p = params.p
    det = c_I * p - p * (-c_I - lam)
    for m in range(3, k + 1):
        det = c_I * det + (-1) ** (m + 1) * p * (-c_I - lam) ** (m - 1)
    return det


__all__ = [
    "SystemMatrix",
    "coefficient_matrix",
    "charpoly_closed",
    "charpoly_sum_form",
    "charpoly_direct",
    "charpoly",
    "charpoly_term_scale",
    "production_minor_det",
]
