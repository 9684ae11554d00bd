"""Eigenvalue analysis of the frozen-T system.

For n_E = 0 the characteristic polynomial is low-degree and fully analyzable:
its critical points are known in closed form, every real root can be
bracketed between consecutive critical points, the roots sort into four sign
classes, and the possible class patterns form a 3x3 grid indexed by the sign
of c - beta*T*p*tau_I (clearance versus viral pressure) and the sign of
c_I^2 - c*c_I - beta*T*p (where -c_I falls relative to the quadratic's
roots). A dense nonsymmetric eigensolver provides the oracle spectrum for
any n_E.

Sign-class labels used throughout:
    "neg_below_cI"   real root < -c_I
    "neg_in_cI_0"    real root in (-c_I, 0)
    "zero"           the structural zero eigenvalue
    "positive"       real root > 0
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import numdiff
from .charpoly import (
    SystemMatrix,
    charpoly,
    charpoly_term_scale,
    coefficient_matrix,
)
from .model import InvalidParamsError, ModelParams, derived_rates

SIGN_CLASS_ORDER = ("neg_below_cI", "neg_in_cI_0", "zero", "positive")


def viral_pressure(params: ModelParams, T: float) -> float:
    # Canonical evaluation order; the Critical/equality tests in this module
    # and in the validation suites compare against exactly this expression.
    return params.beta * T * params.p * params.tau_I


@dataclass(frozen=True)
class Classification:
    kind: str  # "Definite" | "Indefinite" | "Critical"
    T_star: float

    def to_json_dict(self) -> dict:
        return {"kind": self.kind, "T_star": self.T_star}


def classify(params: ModelParams, T: float, tol_class_rel: float = 1e-10) -> Classification:
    """Regime of the frozen-T system.

    Definite when clearance c exceeds the viral pressure beta*T*p*tau_I
    (no positive eigenvalue), Indefinite when it falls short (exactly one),
    Critical inside a relative window around equality. Exact equality is
    measure-zero, hence the window.
    """
    derived_rates(params)  # structural check only; beta = 0 is legal here
    pressure = viral_pressure(params, T)
    denom = params.tau_I * params.p * params.beta
    T_star = params.c / denom if denom > 0 else math.inf
    gap = params.c - pressure
    if abs(gap) <= tol_class_rel * max(abs(params.c), abs(pressure)):
        kind = "Critical"
    elif gap > 0:
        kind = "Definite"
    else:
        kind = "Indefinite"
    return Classification(kind=kind, T_star=T_star)


def quadratic_roots(params: ModelParams, T: float) -> tuple[float, float]:
    """Roots of lam^2 + c*lam - beta*T*p, returned (lo, hi) with lo <= hi.

    Zero sits between them whenever beta*T*p > 0. Evaluated in the
    subtraction-free arrangement: the hi root comes from the lo root via the
    product relation hi = -q/lo (product of roots is -q), so neither root
    loses digits when q is small against c^2.
    """
    q = params.beta * T * params.p
    c = params.c
    disc = math.sqrt(c * c + 4.0 * q)
    lo = -(c + disc) / 2.0
    hi = -q / lo if lo != 0.0 else 0.0
    return lo, hi


def _require_nE0(params: ModelParams):
    if params.n_E != 0:
        raise InvalidParamsError(["analytic spectrum routines require n_E = 0"])


def derivative_quadratic_coeffs(params: ModelParams, T: float) -> tuple[float, float, float]:
    """Coefficients (A2, A1, A0) of the quadratic factor of the polynomial's
    derivative: (n_I + 2) lam^2 + (c (n_I + 1) + 2 c_I) lam + (c c_I - q n_I),
    with q = beta*T*p. The remaining derivative factor is (c_I + lam)^(n_I-1)."""
    _, c_I = derived_rates(params)
    n_I = params.n_I
    q = params.beta * T * params.p
    return (n_I + 2.0, params.c * (n_I + 1.0) + 2.0 * c_I, params.c * c_I - q * n_I)


def charpoly_derivative(params: ModelParams, T: float, lam: float) -> float:
    """Analytic d/dlam of the n_E = 0 characteristic polynomial."""
    _require_nE0(params)
    _, c_I = derived_rates(params)
    a2, a1, a0 = derivative_quadratic_coeffs(params, T)
    return (c_I + lam) ** (params.n_I - 1) * (a2 * lam * lam + a1 * lam + a0)


def critical_points(params: ModelParams, T: float) -> list[float]:
    """All real critical points of the characteristic polynomial, ascending.

    These are -c_I (present when n_I >= 2, from the (c_I + lam)^(n_I - 1)
    derivative factor) plus any real roots of the derivative quadratic;
    a negative quadratic discriminant contributes nothing.
    """
    _require_nE0(params)
    _, c_I = derived_rates(params)
    pts = []
    if params.n_I >= 2:
        pts.append(-c_I)
    a2, a1, a0 = derivative_quadratic_coeffs(params, T)
    disc = a1 * a1 - 4.0 * a2 * a0
    if disc >= 0.0:
        rt = math.sqrt(disc)
        # same subtraction-free pairing as quadratic_roots
        if a1 >= 0:
            r1 = (-a1 - rt) / (2.0 * a2)
        else:
            r1 = (-a1 + rt) / (2.0 * a2)
        r2 = a0 / (a2 * r1) if r1 != 0.0 else -a1 / a2
        pts.extend([r1, r2])
    return sorted(pts)


def _outer_bracket_lo(params: ModelParams, T: float) -> float:
    """A lower end L with no real root below it.

    For odd n_I a root below -c_I always exists and can sit far below the
    naive -(c + c_I + q + 1) when c_I dominates q; the bound below makes the
    polynomial provably single-signed past it for either parity:
    the magnitude term needs mu - c_I >= c_I * q^(1/n_I) (so the power beats
    q * c_I^{n_I}) and mu(mu - c) - q > 1 (so the quadratic factor is clear
    of zero), both of which hold at L by construction.
    """
    _, c_I = derived_rates(params)
    q = abs(params.beta * T * params.p)
    return -(params.c + q + 1.0 + c_I * (1.0 + q ** (1.0 / params.n_I)) + 1.0)


def real_roots(params: ModelParams, T: float, tol: float = 1e-12) -> list[float]:
    """All real roots of the n_E = 0 characteristic polynomial, ascending.

    Between consecutive critical points the polynomial is strictly monotone,
    so each open interval holds at most one root and a sign change pins it;
    bisection cannot leave the bracket and a short Newton polish (the
    derivative is analytic) sharpens the last digits. Roots sitting exactly
    on a critical point (the double zero at the Critical regime boundary)
    are caught by evaluating the endpoints themselves. The structural root
    at 0 is always included exactly.
    """
    _require_nE0(params)
    if not (tol > 0):
        raise ValueError("tol must be > 0")
    _, c_I = derived_rates(params)
    q = params.beta * T * params.p
    lo = _outer_bracket_lo(params, T)
    hi = params.c + c_I + abs(q) + 1.0

    endpoints = [lo]
    for cp in critical_points(params, T):
        # keep only interior critical points, dedupe collisions
        if endpoints[-1] + 1e-14 * (1 + abs(cp)) < cp < hi:
            endpoints.append(cp)
    endpoints.append(hi)

    P = lambda lam: charpoly(params, T, lam)
    roots: list[float] = [0.0]

    def push(x: float):
        for r in roots:
            if abs(x - r) <= max(tol, 1e-9 * max(1.0, abs(x), abs(r))):
                return
        roots.append(x)

    # Endpoint-as-root detection stays near the roundoff floor (a few eps of
    # the term scale): loose windows would swallow the two distinct roots
    # that flank a critical point just off the Critical boundary, while the
    # exactly-double root at the boundary evaluates to 0.0 and is caught.
    vals = [P(e) for e in endpoints]
    zero_at = [abs(v) <= 1e-13 * (charpoly_term_scale(params, T, e) + 1e-300) for v, e in zip(vals, endpoints)]
    for e, z in zip(endpoints, zero_at):
        if z:
            push(e)

    for i in range(len(endpoints) - 1):
        if zero_at[i] or zero_at[i + 1]:
            continue  # monotone interval with a root on its boundary has no interior root
        a, b, fa, fb = endpoints[i], endpoints[i + 1], vals[i], vals[i + 1]
        if fa == 0.0:
            push(a)
            continue
        if fb == 0.0:
            push(b)
            continue
        if (fa > 0) == (fb > 0):
            continue
        for _ in range(200):
            m = 0.5 * (a + b)
            if b - a <= tol:
                break
            fm = P(m)
            if fm == 0.0:
                a = b = m
                break
            if (fm > 0) == (fa > 0):
                a, fa = m, fm
            else:
                b, fb = m, fm
        x = 0.5 * (a + b)
        for _ in range(3):  # Newton polish, clamped to the bracket
            d = charpoly_derivative(params, T, x)
            if d == 0.0:
                break
            step = P(x) / d
            x_new = x - step
            if not (a - tol <= x_new <= b + tol):
                break
            x = x_new
        push(x)

    return sorted(roots)


def sign_class(lam: float, c_I: float, ztol: float) -> str:
    """Sign class of a real eigenvalue; ztol is the absolute zero window."""
    if abs(lam) <= ztol:
        return "zero"
    if lam > 0:
        return "positive"
    return "neg_below_cI" if lam < -c_I else "neg_in_cI_0"


@dataclass(frozen=True)
class SignPattern:
    """Predicted multiset of real-eigenvalue sign classes for one regime cell.

    mandatory lists classes that must appear; optional_pairs lists class
    pairs that may appear together or be replaced by a complex-conjugate
    pair (even n_I only); zero_algebraic_multiplicity is 2 exactly on the
    Critical row, where the root at 0 doubles.
    """

    n_I_parity: str  # "even" | "odd"
    clearance_vs_pressure: str  # "<" | "=" | ">", sign of c - beta*T*p*tau_I
    quadratic_at_minus_cI: str  # "<" | "=" | ">", sign of c_I^2 - c*c_I - beta*T*p
    mandatory: tuple[str, ...]
    optional_pairs: tuple[tuple[str, str], ...]
    zero_algebraic_multiplicity: int

    def to_json_dict(self) -> dict:
        return {
            "n_I_parity": self.n_I_parity,
            "clearance_vs_pressure": self.clearance_vs_pressure,
            "quadratic_at_minus_cI": self.quadratic_at_minus_cI,
            "mandatory": list(self.mandatory),
            "optional_pairs": [list(p) for p in self.optional_pairs],
            "zero_algebraic_multiplicity": self.zero_algebraic_multiplicity,
        }


def _three_way(value: float, tol: float) -> str:
    if abs(value) <= tol:
        return "="
    return ">" if value > 0 else "<"


def predicted_sign_pattern(params: ModelParams, T: float, tol_class_rel: float = 1e-10) -> SignPattern:
    """Select the regime cell and return its predicted pattern.

    Row: sign of c - beta*T*p*tau_I. Column: sign of c_I^2 - c*c_I - beta*T*p
    (equivalently, where -c_I falls against the roots of the quadratic
    factor). For even n_I the cell patterns are

        row <:  zero, positive            (+ optional below-pair in col <)
        row =:  zero                      (+ optional below-pair in col <)
        row >:  neg_in_cI_0, zero         (+ optional below-pair in col <)

    and for odd n_I a root below -c_I is guaranteed instead of optional:

        row <:  neg_below_cI, zero, positive
        row =:  neg_below_cI, zero
        row >:  neg_below_cI, neg_in_cI_0, zero
    """
    _require_nE0(params)
    _, c_I = derived_rates(params)
    q = params.beta * T * params.p
    pressure = viral_pressure(params, T)
    row = _three_way(params.c - pressure, tol_class_rel * max(abs(params.c), abs(pressure)))
    col_value = c_I * c_I - params.c * c_I - q
    col_scale = max(c_I * c_I, abs(params.c) * c_I, abs(q), 1e-300)
    col = _three_way(col_value, tol_class_rel * col_scale)
    parity = "even" if params.n_I % 2 == 0 else "odd"

    if parity == "even":
        mandatory = {
            "<": ("zero", "positive"),
            "=": ("zero",),
            ">": ("neg_in_cI_0", "zero"),
        }[row]
        optional = ((("neg_below_cI", "neg_below_cI"),) if col == "<" else ())
    else:
        mandatory = {
            "<": ("neg_below_cI", "zero", "positive"),
            "=": ("neg_below_cI", "zero"),
            ">": ("neg_below_cI", "neg_in_cI_0", "zero"),
        }[row]
        optional = ()

    return SignPattern(
        n_I_parity=parity,
        clearance_vs_pressure=row,
        quadratic_at_minus_cI=col,
        mandatory=mandatory,
        optional_pairs=optional,
        zero_algebraic_multiplicity=2 if row == "=" else 1,
    )


def full_spectrum_numeric(params: ModelParams, T: float) -> np.ndarray:
    """All eigenvalues of the assembled matrix from the dense QR eigensolver.
    Works for any n_E; used as the oracle for the analytic routines."""
    A = coefficient_matrix(params, T)
    return np.linalg.eigvals(A.entries)


def eigenvector(params: ModelParams, T: float, lam: float, V_scale: float = 1.0) -> np.ndarray:
    """Closed-form eigenvector for a real eigenvalue, n_E = 0 layout
    (I_1..I_{n_I}, V, W), scaled so the V component equals V_scale.

    For lam != 0 the W component is exactly 0 and
    I_k = c_I^(k-1) * beta*T*V / (c_I + lam)^k. For lam = 0 every I_k equals
    beta*T*V / c_I and the W component balances the V row:
    W = (beta*T*p*tau_I - c) * V / (-v_a). The formula has a pole at
    lam = -c_I, which is generically not an eigenvalue.
    """
    _require_nE0(params)
    if V_scale == 0:
        raise ValueError("V_scale must be nonzero")
    _, c_I = derived_rates(params)
    n_I = params.n_I
    if lam != 0.0 and abs(c_I + lam) <= 1e-300:
        raise ValueError("eigenvector formula has a pole at lam = -c_I")
    v = np.zeros(n_I + 2)
    if lam == 0.0:
        pressure = viral_pressure(params, T)
        if params.v_a != 0.0:
            w = (pressure - params.c) * V_scale / (-params.v_a)
        elif abs(pressure - params.c) <= 1e-12 * max(abs(pressure), abs(params.c), 1e-300):
            w = 0.0  # V row already balances; any W works, take the simplest
        else:
            # advection-free and off-critical: the zero eigenvector is the
            # pure W direction instead of the V-scaled family
            v[-1] = V_scale
            return v
        v[:n_I] = params.beta * T * V_scale / c_I
        v[-2] = V_scale
        v[-1] = w
        return v
    base = params.beta * T * V_scale
    for k in range(1, n_I + 1):
        v[k - 1] = c_I ** (k - 1) * base / (c_I + lam) ** k
    v[-2] = V_scale
    v[-1] = 0.0
    return v


def geometric_multiplicity(A: SystemMatrix, lam: float, tol_rank: float = 1e-7) -> int:
    """Eigenspace dimension n - rank(A - lam*I), rank by singular values
    above tol_rank times the largest. Raises if lam is not an eigenvalue
    within that tolerance (computed multiplicity zero)."""
    M = A.entries - lam * np.eye(A.n)
    sv = np.linalg.svd(M, compute_uv=False)
    top = sv[0] if sv.size else 0.0
    if top == 0.0:
        return A.n
    rank = int(np.sum(sv > tol_rank * top))
    gm = A.n - rank
    if gm == 0:
        raise ValueError(f"{lam} is not an eigenvalue of the matrix within tolerance")
    return gm


def algebraic_multiplicity(params: ModelParams, T: float, lam: float, max_order: int | None = None) -> int:
    """Smallest m with a nonvanishing m-th derivative of the characteristic
    polynomial at lam, by adaptive-step central differences.

    The zero test compares the raw m-th difference against the local stencil
    scale (see numdiff.derivative_is_zero), so a double root is recognized
    even though its first derivative only vanishes to O(h^2) truncation;
    one Richardson level keeps that truncation from masquerading as signal.
    """
    _require_nE0(params)
    if max_order is None:
        max_order = params.n_I + 2
    f = lambda x: charpoly(params, T, x)
    for m in range(1, max_order):
        is_zero, _ = numdiff.derivative_is_zero(f, lam, order=m)
        if not is_zero:
            return m
    return max_order


@dataclass(frozen=True)
class EigenspaceDecomposition:
    """Real eigendirections grouped by eigenvalue sign, plus the count of
    complex-conjugate pairs that complete the dimension."""

    negative: list  # (eigenvalue, unit real eigenvector) pairs
    positive: list
    zero: list
    complex_pair_count: int
    tol: float

    @property
    def dims(self) -> tuple[int, int, int]:
        return (len(self.negative), len(self.positive), len(self.zero))


def eigenspace_decomposition(params: ModelParams, T: float, tol_rel: float = 1e-8) -> EigenspaceDecomposition:
    """Group numeric eigenvectors by the sign of their eigenvalue.

    Only real eigenvalues contribute directions; complex pairs are counted.
    Real parts within tol_rel * inf-norm of zero count as zero.
    """
    A = coefficient_matrix(params, T)
    w, vecs = np.linalg.eig(A.entries)
    tol = tol_rel * max(A.inf_norm, 1.0)
    neg, pos, zero = [], [], []
    n_complex = 0
    for i in range(len(w)):
        if abs(w[i].imag) > tol:
            n_complex += 1
            continue
        lam = float(w[i].real)
        vec = np.real(vecs[:, i])
        norm = np.linalg.norm(vec)
        if norm > 0:
            vec = vec / norm
        item = (lam, vec)
        if abs(lam) <= tol:
            zero.append(item)
        elif lam > 0:
            pos.append(item)
        else:
            neg.append(item)
    return EigenspaceDecomposition(
        negative=sorted(neg, key=lambda t: t[0]),
        positive=sorted(pos, key=lambda t: t[0]),
        zero=zero,
        complex_pair_count=n_complex // 2,
        tol=tol,
    )


@dataclass(frozen=True)
class RootReport:
    value: float
    sign_class: str
    algebraic_multiplicity: int
    geometric_multiplicity: int
    eigenvector: list[float] | None

    def to_json_dict(self) -> dict:
        return {
            "value": self.value,
            "sign_class": self.sign_class,
            "algebraic_multiplicity": self.algebraic_multiplicity,
            "geometric_multiplicity": self.geometric_multiplicity,
            "eigenvector": self.eigenvector,
        }


@dataclass(frozen=True)
class SpectrumReport:
    analytic: bool
    classification: Classification
    regime: tuple[str, str, str]  # (parity, sign of c_I^2-c*c_I-q, sign of c-pressure)
    real_eigenvalues: list[RootReport]
    complex_pair_count: int
    numeric_spectrum: list[complex]
    predicted_pattern: SignPattern | None
    notice: str | None = None

    def to_json_dict(self) -> dict:
        return {
            "analytic": self.analytic,
            "classification": self.classification.kind,
            "T_star": self.classification.T_star,
            "regime": {
                "n_I_parity": self.regime[0],
                "quadratic_at_minus_cI": self.regime[1],
                "clearance_vs_pressure": self.regime[2],
            },
            "real_eigenvalues": [r.to_json_dict() for r in self.real_eigenvalues],
            "complex_pair_count": self.complex_pair_count,
            "numeric_spectrum": [[z.real, z.imag] for z in self.numeric_spectrum],
            "predicted_pattern": self.predicted_pattern.to_json_dict() if self.predicted_pattern else None,
            "notice": self.notice,
        }


def analyze(params: ModelParams, T: float, tol_class_rel: float = 1e-10, tol_rank: float = 1e-7) -> SpectrumReport:
    """Full spectrum report at one T value.

    With n_E = 0 the real roots come from the analytic bracketing path and
    carry formula eigenvectors; with n_E > 0 only the numeric oracle is
    available and the report says so.
    """
    classification = classify(params, T, tol_class_rel=tol_class_rel)
    A = coefficient_matrix(params, T)
    w = np.linalg.eigvals(A.entries)
    ztol = 1e-8 * max(A.inf_norm, 1.0)
    _, c_I = derived_rates(params)
    q = params.beta * T * params.p
    pressure = viral_pressure(params, T)
    regime = (
        "even" if params.n_I % 2 == 0 else "odd",
        _three_way(c_I * c_I - params.c * c_I - q, tol_class_rel * max(c_I * c_I, abs(params.c) * c_I, abs(q), 1e-300)),
        _three_way(params.c - pressure, tol_class_rel * max(abs(params.c), abs(pressure))),
    )
    n_complex = int(np.sum(np.abs(w.imag) > ztol))

    reports: list[RootReport] = []
    if params.n_E == 0:
        pattern = predicted_sign_pattern(params, T, tol_class_rel=tol_class_rel)
        for r in real_roots(params, T):
            vec = None
            if abs(c_I + r) > 1e-9 * c_I:
                vec = [float(x) for x in eigenvector(params, T, r if abs(r) > ztol else 0.0)]
            reports.append(
                RootReport(
                    value=r,
                    sign_class=sign_class(r, c_I, ztol),
                    algebraic_multiplicity=algebraic_multiplicity(params, T, r),
                    geometric_multiplicity=geometric_multiplicity(A, r, tol_rank=tol_rank),
                    eigenvector=vec,
                )
            )
        notice = None
    else:
        pattern = None
        reals = sorted(float(z.real) for z in w if abs(z.imag) <= ztol)
        # cluster numeric reals so a double root reports once with count 2
        clusters: list[list[float]] = []
        for x in reals:
            if clusters and abs(x - clusters[-1][-1]) <= max(1e-7, 10 * ztol):
                clusters[-1].append(x)
            else:
                clusters.append([x])
        for cl in clusters:
            value = float(np.mean(cl))
            if abs(value) <= ztol:
                value = 0.0
            reports.append(
                RootReport(
                    value=value,
                    sign_class=sign_class(value, c_I, ztol),
                    algebraic_multiplicity=len(cl),
                    geometric_multiplicity=geometric_multiplicity(A, value, tol_rank=tol_rank),
                    eigenvector=None,
                )
            )
        notice = "n_E > 0: analytic root classification unavailable, numeric oracle only"

    return SpectrumReport(
        analytic=params.n_E == 0,
        classification=classification,
        regime=regime,
        real_eigenvalues=reports,
        complex_pair_count=n_complex // 2,
        numeric_spectrum=[complex(z) for z in w],
        predicted_pattern=pattern,
        notice=notice,
    )


__all__ = [
    "SIGN_CLASS_ORDER",
    "Classification",
    "SignPattern",
    "RootReport",
    "SpectrumReport",
    "EigenspaceDecomposition",
    "viral_pressure",
    "classify",
    "quadratic_roots",
    "critical_points",
    "charpoly_derivative",
    "derivative_quadratic_coeffs",
    "real_roots",
    "sign_class",
    "predicted_sign_pattern",
    "full_spectrum_numeric",
    "eigenvector",
    "geometric_multiplicity",
    "algebraic_multiplicity",
    "eigenspace_decomposition",
    "analyze",
]
