"""Randomized and constructed self-check suites.

These are the oracle cross-checks the command-line `validate` subcommand
runs and the acceptance tests reuse: closed form against determinant,
formula eigenvectors against the matrix, predicted sign patterns against the
numeric spectrum, and multiplicity claims against finite differences. Each
suite returns a SuiteResult with per-check counts so failures are countable
and reproducible from the seed.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .charpoly import (
    charpoly_closed,
    charpoly_direct,
    charpoly_sum_form,
    coefficient_matrix,
)
from .model import ModelParams
from .spectrum import (
    SignPattern,
    algebraic_multiplicity,
    classify,
    eigenvector,
    full_spectrum_numeric,
    geometric_multiplicity,
    predicted_sign_pattern,
    real_roots,
)


@dataclass
class SuiteResult:
    name: str
    checks: int = 0
    failures: int = 0
    failure_examples: list[str] = field(default_factory=list)

    def record(self, ok: bool, detail: str = ""):
        self.checks += 1
        if not ok:
            self.failures += 1
            if len(self.failure_examples) < 5:
                self.failure_examples.append(detail)

    @property
    def ok(self) -> bool:
        return self.failures == 0

    def to_json_dict(self) -> dict:
        return {
            "name": self.name,
            "checks": self.checks,
            "failures": self.failures,
            "failure_examples": self.failure_examples,
        }


def loguniform(rng: np.random.Generator, lo: float, hi: float) -> float:
    return float(np.exp(rng.uniform(np.log(lo), np.log(hi))))


def sample_params(
    rng: np.random.Generator,
    n_E_choices=(0, 1, 2, 3),
    n_I_choices=(1, 2, 3, 4, 5, 6),
) -> tuple[ModelParams, float]:
    """One random parameter set, rates log-uniform in [0.1, 10], and a
    T value uniform in [0, 2 T*]."""
    n_E = int(rng.choice(n_E_choices))
    n_I = int(rng.choice(n_I_choices))
    params = ModelParams(
        beta=loguniform(rng, 0.1, 10),
        p=loguniform(rng, 0.1, 10),
        c=loguniform(rng, 0.1, 10),
        n_E=n_E,
        tau_E=loguniform(rng, 0.1, 10) if n_E > 0 else None,
        n_I=n_I,
        tau_I=loguniform(rng, 0.1, 10),
        D_PCF=loguniform(rng, 0.1, 10),
        v_a=loguniform(rng, 0.1, 10),
        a=float(rng.uniform(-2, 2)),
    )
    T = float(rng.uniform(0, 2 * params.T_star))
    return params, T


def suite_charpoly_equivalence(
    seed: int = 0,
    n_sets: int = 200,
    n_lambda: int = 20,
    rel_tol: float = 1e-9,
) -> SuiteResult:
    """Closed form and sum form against the LU determinant on random inputs;
    lambda sampled uniformly in +-2(c_E + c_I + c)."""
    rng = np.random.default_rng(seed)
    result = SuiteResult("charpoly_equivalence")
    for _ in range(n_sets):
        params, T = sample_params(rng)
        span = 2.0 * (params.c_E + params.c_I + params.c)
        for lam in rng.uniform(-span, span, size=n_lambda):
            direct = charpoly_direct(params, T, lam)
            tol = rel_tol * (1.0 + abs(direct))
            closed = charpoly_closed(params, T, lam)
            summed = charpoly_sum_form(params, T, lam)
            result.record(
                abs(closed - direct) <= tol and abs(summed - direct) <= tol,
                f"params={params} T={T} lam={lam} closed={closed} sum={summed} direct={direct}",
            )
    return result


def suite_zero_eigenvalue(seed: int = 0, n_sets: int = 200, rel_tol: float = 1e-9) -> SuiteResult:
    """The numeric spectrum must contain zero for every parameter set: the
    matrix has a structurally zero row."""
    rng = np.random.default_rng(seed)
    result = SuiteResult("zero_eigenvalue")
    for _ in range(n_sets):
        params, T = sample_params(rng)
        A = coefficient_matrix(params, T)
        w = full_spectrum_numeric(params, T)
        closest = float(np.min(np.abs(w)))
        result.record(
            closest <= rel_tol * A.inf_norm,
            f"params={params} T={T} min|lambda|={closest} norm={A.inf_norm}",
        )
    return result


# Exact regime-cell constructions. With tau_I = fl(n_I / (n_I + 1)) the
# derived rate c_I = fl(n_I / tau_I) equals n_I + 1 exactly in float64 (the
# quotient rounds back), which makes both equality tests below exact:
#   row:  c == beta*T*p*tau_I   evaluated left to right, and
#   col:  c_I^2 - c*c_I == beta*T*p
# q is the product beta*T*p realized as beta=q, T=1, p=1.
_CELL_TABLE = {
    ("=", "="): lambda n: (float(n), float(n + 1)),
    ("=", "<"): lambda n: (2.0 * n, 2.0 * (n + 1)),
    ("=", ">"): lambda n: (n / 2.0, (n + 1) / 2.0),
    ("<", "="): lambda n: (1.0, float((n + 1) * n)),
    (">", "="): lambda n: (n + 0.5, (n + 1) / 2.0),
    ("<", ">"): lambda n: (1.0, 2.0),
    ("<", "<"): lambda n: (1.0, 2.0 * (n + 1) ** 2),
    (">", ">"): lambda n: (n + 0.75, (n + 1) / 8.0),
    (">", "<"): lambda n: (2.0 * (n + 1), 1.0),
}


def cell_params(n_I: int, row: str, col: str) -> tuple[ModelParams, float]:
    """Parameters landing exactly in the regime cell (row, col), where row is
    the sign of c - beta*T*p*tau_I and col the sign of c_I^2 - c*c_I - beta*T*p."""
    c, q = _CELL_TABLE[(row, col)](n_I)
    tau_I = n_I / (n_I + 1)
    params = ModelParams(beta=q, p=1.0, c=c, n_E=0, n_I=n_I, tau_I=tau_I, v_a=1.0)
    return params, 1.0


def classify_eigenvalue(lam: float, c_I: float, ztol: float) -> set[str]:
    """Acceptable sign classes for one numeric real eigenvalue; the set has
    two members when the value is inside the tolerance band around -c_I."""
    if abs(lam) <= ztol:
        return {"zero"}
    if lam > 0:
        return {"positive"}
    if abs(lam + c_I) <= ztol:
        return {"neg_below_cI", "neg_in_cI_0"}
    return {"neg_below_cI"} if lam < -c_I else {"neg_in_cI_0"}


def _cover(required: list[str], acceptable: list[set[str]]) -> bool:
    # exact bipartite matching by backtracking; sizes are tiny
    if not required:
        return not acceptable
    if len(required) != len(acceptable):
        return False
    head, rest = required[0], required[1:]
    for i, acc in enumerate(acceptable):
        if head in acc and _cover(rest, acceptable[:i] + acceptable[i + 1 :]):
            return True
    return False


def pattern_matches(
    pattern: SignPattern,
    eigvals: np.ndarray,
    c_I: float,
    ztol: float,
    dim: int,
) -> tuple[bool, str]:
    """Check a numeric spectrum against a predicted cell pattern.

    Zero must appear with exactly the predicted algebraic multiplicity
    (numerically: that many eigenvalues inside the zero window). Every
    mandatory nonzero class must be matched by a distinct real eigenvalue.
    Real eigenvalues beyond the mandatory ones are allowed only in
    optional-pair classes (and only a whole pair at a time); complex
    conjugate pairs account for the rest of the dimension.
    """
    reals = sorted(float(z.real) for z in eigvals if abs(z.imag) <= ztol)
    n_complex = int(len(eigvals) - len(reals))
    if len(reals) + n_complex != dim:
        return False, f"dimension bookkeeping broke: {len(reals)} reals + {n_complex} complex != {dim}"
    if n_complex % 2 != 0:
        return False, f"odd complex count {n_complex}"

    zeros = [r for r in reals if abs(r) <= ztol]
    if len(zeros) != pattern.zero_algebraic_multiplicity:
        return False, f"zero count {len(zeros)} != predicted {pattern.zero_algebraic_multiplicity} (reals={reals})"

    nonzero = [r for r in reals if abs(r) > ztol]
    acceptable = [classify_eigenvalue(r, c_I, ztol) for r in nonzero]
    required = [cls for cls in pattern.mandatory if cls != "zero"]

    surplus = len(nonzero) - len(required)
    if surplus < 0:
        return False, f"missing mandatory roots: reals={reals} mandatory={pattern.mandatory}"
    optional_classes = [cls for pair in pattern.optional_pairs for cls in pair]
    if surplus > len(optional_classes) or surplus % 2 != 0:
        return False, f"{surplus} surplus real roots not covered by optional pairs (reals={reals})"
    # try every choice of which surplus roots take the optional slots
    from itertools import combinations

    for extra in combinations(range(len(nonzero)), surplus):
        opt_ok = all(
            optional_classes[k] in acceptable[i] for k, i in enumerate(extra)
        )
        if not opt_ok:
            continue
        rest = [acceptable[i] for i in range(len(nonzero)) if i not in extra]
        if _cover(required, rest):
            return True, ""
    return False, f"no assignment of reals={reals} fits mandatory={pattern.mandatory} optional={pattern.optional_pairs}"


def suite_sign_tables(
    even_n_I=(2, 4),
    odd_n_I=(3, 5),
    ztol_rel: float = 1e-8,
) -> SuiteResult:
    """All 9 regime cells at each listed n_I: the constructed parameters must
    land in the intended cell and the numeric spectrum must match the cell's
    predicted sign pattern."""
    result = SuiteResult("sign_tables")
    for n_I in tuple(even_n_I) + tuple(odd_n_I):
        for row in ("<", "=", ">"):
            for col in ("<", "=", ">"):
                params, T = cell_params(n_I, row, col)
                pattern = predicted_sign_pattern(params, T)
                landed = (pattern.clearance_vs_pressure, pattern.quadratic_at_minus_cI) == (row, col)
                result.record(landed, f"n_I={n_I} intended ({row},{col}) landed ({pattern.clearance_vs_pressure},{pattern.quadratic_at_minus_cI})")
                if not landed:
                    continue
                A = coefficient_matrix(params, T)
                ztol = ztol_rel * A.inf_norm
                w = full_spectrum_numeric(params, T)
                ok, detail = pattern_matches(pattern, w, params.c_I, ztol, A.n)
                result.record(ok, f"n_I={n_I} cell ({row},{col}): {detail}")
                kind = classify(params, T).kind
                expected_kind = {"<": "Indefinite", "=": "Critical", ">": "Definite"}[row]
                result.record(kind == expected_kind, f"n_I={n_I} cell ({row},{col}) classification {kind} != {expected_kind}")
    return result


def suite_eigenvector_residuals(
    seed: int = 0,
    n_sets: int = 50,
    resid_rel: float = 1e-8,
    tol_rank: float = 1e-7,
) -> SuiteResult:
    """Formula eigenvectors must satisfy the eigen-relation to resid_rel and
    every real eigenvalue must have a one-dimensional eigenspace."""
    rng = np.random.default_rng(seed)
    result = SuiteResult("eigenvector_residuals")
    for _ in range(n_sets):
        params, T = sample_params(rng, n_E_choices=(0,))
        A = coefficient_matrix(params, T)
        for lam in real_roots(params, T):
            if abs(params.c_I + lam) <= 1e-9 * params.c_I:
                continue  # formula pole; not an eigenvalue generically
            v = eigenvector(params, T, lam)
            resid = float(np.max(np.abs(A.entries @ v - lam * v)))
            vnorm = float(np.max(np.abs(v)))
            result.record(
                resid <= resid_rel * vnorm,
                f"params={params} T={T} lam={lam} resid={resid} norm={vnorm}",
            )
            gm = geometric_multiplicity(A, lam, tol_rank=tol_rank)
            result.record(gm == 1, f"params={params} T={T} lam={lam} gm={gm}")
    return result


def suite_multiplicities(seed: int = 0, n_sets: int = 15) -> SuiteResult:
    """Algebraic multiplicity 1 for every real root of random off-critical
    sets; the constructed Critical cells must report the double zero."""
    rng = np.random.default_rng(seed)
    result = SuiteResult("multiplicities")
    for _ in range(n_sets):
        params, T = sample_params(rng, n_E_choices=(0,))
        if classify(params, T).kind == "Critical":
            continue  # measure-zero; the constructed cells cover it
        for lam in real_roots(params, T):
            m = algebraic_multiplicity(params, T, lam)
            result.record(m == 1, f"params={params} T={T} lam={lam} m={m}")
    for n_I in (2, 3, 4, 5):
        for col in ("<", "=", ">"):
            params, T = cell_params(n_I, "=", col)
            m = algebraic_multiplicity(params, T, 0.0)
            result.record(m == 2, f"critical cell n_I={n_I} col={col}: zero multiplicity {m} != 2")
            gm = geometric_multiplicity(coefficient_matrix(params, T), 0.0)
            result.record(gm == 1, f"critical cell n_I={n_I} col={col}: gm {gm} != 1")
    return result


def run_all(seed: int = 0, tolerances: dict | None = None) -> list[SuiteResult]:
    """The four suites cmd_validate runs, sized for interactive use."""
    tol = tolerances or {}
    return [
        suite_charpoly_equivalence(
            seed, n_sets=60, rel_tol=tol.get("charpoly_rel", 1e-9)
        ),
        suite_eigenvector_residuals(
            seed,
            n_sets=20,
            resid_rel=tol.get("eigenvector_residual_rel", 1e-8),
            tol_rank=tol.get("tol_rank", 1e-7),
        ),
        suite_sign_tables(ztol_rel=tol.get("sign_zero_rel", 1e-8)),
        suite_multiplicities(seed),
    ]


__all__ = [
    "SuiteResult",
    "loguniform",
    "sample_params",
    "cell_params",
    "classify_eigenvalue",
    "pattern_matches",
    "suite_charpoly_equivalence",
    "suite_zero_eigenvalue",
    "suite_sign_tables",
    "suite_eigenvector_residuals",
    "suite_multiplicities",
    "run_all",
]
