"""Command line front end: one binary, one JSON config, CSV/JSON out.

Subcommands map onto the library one-to-one: `analyze` prints a spectrum
report, `sweep` scans T, `simulate`/`surface` integrate and export, `field`
samples the two vector fields on eigen-direction lattices, and `validate`
runs the randomized oracle suites.

Exit codes are a stable contract: 0 success, 1 validation-suite failure,
2 invalid config, 3 numeric failure, 4 trajectory blow-up. Machine-readable
errors go to standard error as a single JSON object.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from contextlib import contextmanager
from dataclasses import dataclass, field as dc_field

import numpy as np

from .charpoly import coefficient_matrix
from .dynamics import sample_fields
from .model import (
    FieldCoefficients,
    InvalidParamsError,
    ModelParams,
    StateVector,
    validate as validate_params,
)
from .spectrum import analyze, classify, eigenvector, full_spectrum_numeric, real_roots
from .surface import (
    BlowUpError,
    Trajectory,
    asymptotics,
    integrate_linearized,
    integrate_time,
    trace_surface,
)
from .validation import run_all

EXIT_OK = 0
EXIT_SUITE_FAILURE = 1
EXIT_BAD_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_BLOW_UP = 4

_TOP_KEYS = {"params", "coeffs", "T", "initial_state", "grid", "linearized", "tolerances", "seed"}
_GRID_KEYS = {"x_span", "t_span", "h_x", "h_t", "asymptotics_window"}
_SWEEP_KEYS = {"from", "to", "steps"}
_SUITE_TOLERANCE_KEYS = {"charpoly_rel", "eigenvector_residual_rel", "tol_rank", "sign_zero_rel"}
_TOLERANCE_KEYS = _SUITE_TOLERANCE_KEYS | {"tol_class_rel", "zero_rel"}


class ConfigError(Exception):
    """Configuration rejected before any computation ran."""

    def __init__(self, message: str, details: dict | None = None):
        super().__init__(message)
        self.details = details or {}


class NumericError(Exception):
    """A computation could not produce a usable result."""


def _fmt(x: float) -> str:
    # 17 significant digits survive a float64 round trip
    return format(float(x), ".17g")


def _emit_error(code: int, message: str, details: dict | None = None) -> None:
    doc = {"error": {"code": code, "message": message, "details": details or {}}}
    print(json.dumps(doc), file=sys.stderr)


@contextmanager
def _open_out(path: str | None):
    if path is None:
        yield sys.stdout
        return
    try:
        fh = open(path, "w", encoding="utf-8", newline="\n")
    except OSError as exc:
        raise ConfigError(f"cannot open --out path: {exc}") from exc
    try:
        yield fh
    finally:
        fh.close()


# ---------------------------------------------------------------------------
# config parsing


@dataclass
class RunConfig:
    params: ModelParams | None = None
    coeffs: FieldCoefficients | None = None
    T_value: float | None = None
    T_sweep: tuple[float, float, int] | None = None
    initial_state: list[float] | None = None
    grid: dict = dc_field(default_factory=dict)
    linearized: bool = False
    tolerances: dict = dc_field(default_factory=dict)
    seed: int = 0


def _as_float(value, what: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{what} must be a number")
    out = float(value)
    if not math.isfinite(out):
        raise ConfigError(f"{what} must be finite")
    return out


def _parse_span(value, what: str) -> tuple[float, float]:
    if isinstance(value, (list, tuple)):
        if len(value) != 2:
            raise ConfigError(f"{what} must be a number or a [start, end] pair")
        return (_as_float(value[0], what), _as_float(value[1], what))
    return (0.0, _as_float(value, what))


def _parse_grid(node) -> dict:
    if not isinstance(node, dict):
        raise ConfigError("grid must be an object")
    unknown = set(node) - _GRID_KEYS
    if unknown:
        raise ConfigError("unknown grid keys", {"keys": sorted(unknown)})
    grid: dict = {}
    for key in ("x_span", "t_span"):
        if key in node:
            grid[key] = _parse_span(node[key], f"grid.{key}")
    for key in ("h_x", "h_t", "asymptotics_window"):
        if key in node:
            value = _as_float(node[key], f"grid.{key}")
            if value <= 0:
                raise ConfigError(f"grid.{key} must be > 0")
            grid[key] = value
    return grid


def _parse_tolerances(node) -> dict:
    if not isinstance(node, dict):
        raise ConfigError("tolerances must be an object")
    unknown = set(node) - _TOLERANCE_KEYS
    if unknown:
        raise ConfigError("unknown tolerance keys", {"keys": sorted(unknown)})
    out = {}
    for key, value in node.items():
        value = _as_float(value, f"tolerances.{key}")
        if value <= 0:
            raise ConfigError(f"tolerances.{key} must be > 0")
        out[key] = value
    return out


def parse_config(doc) -> RunConfig:
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(doc) - _TOP_KEYS
    if unknown:
        raise ConfigError("unknown config keys", {"keys": sorted(unknown)})
    cfg = RunConfig()

    if "params" in doc:
        try:
            cfg.params = ModelParams.from_json_dict(doc["params"])
        except InvalidParamsError as exc:
            raise ConfigError("invalid params", {"problems": exc.problems}) from exc
        problems = validate_params(cfg.params)
        if problems:
            raise ConfigError("invalid params", {"problems": problems})

    if "coeffs" in doc:
        if cfg.params is None:
            raise ConfigError("coeffs given without params")
        node = doc["coeffs"]
        if not isinstance(node, dict) or set(node) - {"r", "psi"}:
            raise ConfigError("coeffs must be an object with keys r and psi")
        r = node.get("r")
        if r is None:
            r = [1.0] * (cfg.params.state_dim - 1)
        if not isinstance(r, (list, tuple)):
            raise ConfigError("coeffs.r must be a list")
        coeffs = FieldCoefficients(
            r=tuple(_as_float(v, "coeffs.r entry") for v in r),
            psi=_as_float(node.get("psi", 0.0), "coeffs.psi"),
        )
        problems = coeffs.problems_for(cfg.params)
        if problems:
            raise ConfigError("invalid coeffs", {"problems": problems})
        cfg.coeffs = coeffs

    if "T" in doc:
        node = doc["T"]
        if isinstance(node, dict):
            if set(node) != _SWEEP_KEYS:
                raise ConfigError('T sweep needs exactly the keys "from", "to", "steps"')
            lo = _as_float(node["from"], "T.from")
            hi = _as_float(node["to"], "T.to")
            steps = node["steps"]
            if isinstance(steps, bool) or not isinstance(steps, int) or steps < 2:
                raise ConfigError("T.steps must be an integer >= 2")
            if not lo < hi:
                raise ConfigError("T sweep needs from < to")
            if lo < 0:
                raise ConfigError("T sweep must stay >= 0")
            cfg.T_sweep = (lo, hi, steps)
        else:
            value = _as_float(node, "T")
            if value < 0:
                raise ConfigError("T must be >= 0")
            cfg.T_value = value

    if "initial_state" in doc:
        node = doc["initial_state"]
        if not isinstance(node, (list, tuple)) or not node:
            raise ConfigError("initial_state must be a non-empty list of numbers")
        cfg.initial_state = [_as_float(v, "initial_state entry") for v in node]

    if "grid" in doc:
        cfg.grid = _parse_grid(doc["grid"])

    if "linearized" in doc:
        if not isinstance(doc["linearized"], bool):
            raise ConfigError("linearized must be true or false")
        cfg.linearized = doc["linearized"]

    if "tolerances" in doc:
        cfg.tolerances = _parse_tolerances(doc["tolerances"])

    if "seed" in doc:
        seed = doc["seed"]
        if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
            raise ConfigError("seed must be an integer >= 0")
        cfg.seed = seed

    return cfg


def _load_config(path: str | None) -> RunConfig:
    if path is None:
        return RunConfig()
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    return parse_config(doc)


def _need_params(cfg: RunConfig) -> ModelParams:
    if cfg.params is None:
        raise ConfigError("this subcommand needs a config with params")
    return cfg.params


def _coeffs_or_default(cfg: RunConfig, params: ModelParams) -> FieldCoefficients:
    return cfg.coeffs if cfg.coeffs is not None else FieldCoefficients.default_for(params)


def _state_names(params: ModelParams) -> list[str]:
    names = ["T"]
    names += [f"E{i}" for i in range(1, params.n_E + 1)]
    names += [f"I{i}" for i in range(1, params.n_I + 1)]
    names += ["V", "W"]
    return names


# ---------------------------------------------------------------------------
# subcommands


def cmd_analyze(cfg: RunConfig, args, out) -> int:
    params = _need_params(cfg)
    if cfg.T_value is None:
        raise ConfigError("analyze needs a scalar T in the config")
    report = analyze(
        params,
        cfg.T_value,
        tol_class_rel=cfg.tolerances.get("tol_class_rel", 1e-10),
        tol_rank=cfg.tolerances.get("tol_rank", 1e-7),
    )
    out.write(json.dumps(report.to_json_dict(), indent=2) + "\n")
    return EXIT_OK


def _sweep_row_stats(eigs: np.ndarray, ztol: float) -> tuple[float, int]:
    # one zero eigenvalue is structural; drop the smallest-magnitude one so
    # the reported extreme tracks the behaviour-changing mode
    idx = min(range(len(eigs)), key=lambda i: abs(eigs[i]))
    rest = [z for i, z in enumerate(eigs) if i != idx]
    reals = [z.real for z in rest if abs(z.imag) <= ztol]
    n_positive = sum(1 for v in reals if v > ztol)
    if reals:
        max_real = max(reals)
    else:
        # no real eigenvalue survives the drop; fall back to the extreme
        # real part so the column is still informative
        max_real = max(z.real for z in rest)
    return max_real, n_positive


def cmd_sweep(cfg: RunConfig, args, out) -> int:
    params = _need_params(cfg)
    if cfg.T_sweep is None:
        raise ConfigError('sweep needs T as {"from": ..., "to": ..., "steps": ...}')
    lo, hi, steps = cfg.T_sweep
    zero_rel = cfg.tolerances.get("zero_rel", 1e-8)
    out.write("T,classification,max_real_eig,n_positive\n")
    for T in np.linspace(lo, hi, steps):
        T = float(T)
        kind = classify(params, T).kind
        A = coefficient_matrix(params, T)
        eigs = full_spectrum_numeric(params, T)
        ztol = zero_rel * max(A.inf_norm, 1.0)
        max_real, n_positive = _sweep_row_stats(eigs, ztol)
        out.write(f"{_fmt(T)},{kind},{_fmt(max_real)},{n_positive}\n")
    return EXIT_OK


def _write_state_csv(out, names: list[str], rows) -> None:
    out.write("x,t," + ",".join(names) + ",mismatch\n")
    for x, t, state, mismatch in rows:
        cells = [_fmt(x), _fmt(t)] + [_fmt(v) for v in state] + [_fmt(mismatch)]
        out.write(",".join(cells) + "\n")


def _emit_asymptotics_footer(traj: Trajectory, grid: dict) -> None:
    span = abs(float(traj.times[-1]) - float(traj.times[0]))
    window = grid.get("asymptotics_window", 0.5 * span)
    doc: dict = {"asymptotics": None}
    try:
        verdict = asymptotics(traj, window)
    except ValueError as exc:
        doc["note"] = str(exc)
    else:
        doc["asymptotics"] = verdict.to_json_dict()
    print(json.dumps(doc), file=sys.stderr)


def cmd_simulate(cfg: RunConfig, args, out) -> int:
    params = _need_params(cfg)
    if "t_span" not in cfg.grid or "h_t" not in cfg.grid:
        raise ConfigError("simulate needs grid.t_span and grid.h_t")
    if cfg.initial_state is None:
        raise ConfigError("simulate needs initial_state")
    t_span, h_t = cfg.grid["t_span"], cfg.grid["h_t"]
    names = _state_names(params)

    if cfg.linearized:
        if cfg.T_value is None:
            raise ConfigError("a linearized run needs a scalar T to freeze")
        block_dim = params.state_dim - 1
        if len(cfg.initial_state) != block_dim:
            raise ConfigError(
                f"linearized initial_state needs {block_dim} entries (E.., I.., V, W)"
            )
        psi = cfg.coeffs.psi if cfg.coeffs is not None else 0.0
        traj = integrate_linearized(params, cfg.T_value, cfg.initial_state, t_span, h_t, psi=psi)
        T_column = np.full(traj.states.shape[0], cfg.T_value)
        table = np.column_stack([T_column, traj.states])
    else:
        if len(cfg.initial_state) != params.state_dim:
            raise ConfigError(f"initial_state needs {params.state_dim} entries (T, E.., I.., V, W)")
        coeffs = _coeffs_or_default(cfg, params)
        s0 = StateVector.for_params(params, cfg.initial_state)
        traj = integrate_time(params, coeffs, s0, t_span, h_t)
        table = traj.states

    _write_state_csv(out, names, ((0.0, t, row, 0.0) for t, row in zip(traj.times, table)))
    _emit_asymptotics_footer(traj, cfg.grid)
    return EXIT_OK


def cmd_surface(cfg: RunConfig, args, out) -> int:
    params = _need_params(cfg)
    if cfg.linearized:
        raise ConfigError("surface runs use the full nonlinear fields; drop linearized")
    missing = [k for k in ("x_span", "t_span", "h_x", "h_t") if k not in cfg.grid]
    if missing:
        raise ConfigError("surface needs grid keys", {"missing": missing})
    if cfg.initial_state is None:
        raise ConfigError("surface needs initial_state")
    if len(cfg.initial_state) != params.state_dim:
        raise ConfigError(f"initial_state needs {params.state_dim} entries (T, E.., I.., V, W)")
    coeffs = _coeffs_or_default(cfg, params)
    s0 = StateVector.for_params(params, cfg.initial_state)
    grid = trace_surface(
        params, coeffs, s0, cfg.grid["x_span"], cfg.grid["t_span"], cfg.grid["h_x"], cfg.grid["h_t"]
    )
    names = _state_names(params)
    rows = (
        (float(grid.x_nodes[i]), float(grid.t_nodes[j]), grid.states[i, j], float(grid.mismatch[i, j]))
        for i in range(grid.x_nodes.size)
        for j in range(grid.t_nodes.size)
    )
    _write_state_csv(out, names, rows)
    base_fiber = Trajectory(times=grid.t_nodes, states=grid.states[0], h=grid.h_t)
    _emit_asymptotics_footer(base_fiber, cfg.grid)
    return EXIT_OK


def _unit(v: np.ndarray) -> np.ndarray:
    norm = float(np.linalg.norm(v))
    if norm == 0.0 or not math.isfinite(norm):
        raise NumericError("eigen-direction collapsed to zero")
    return v / norm


def _shared_negative_axis(params: ModelParams, T_below: float) -> np.ndarray:
    """Most negative real eigen-direction below the threshold.

    Below T* a negative real root always exists; at T* it can be absorbed
    into a complex pair, so the shared axis is anchored here and reused by
    every panel.
    """
    A = coefficient_matrix(params, T_below)
    ztol = 1e-8 * max(A.inf_norm, 1.0)
    negatives = [r for r in real_roots(params, T_below) if r < -ztol]
    if not negatives:
        raise NumericError(f"no negative real eigen-direction at T = {T_below:g}")
    return _unit(eigenvector(params, T_below, min(negatives)))


def _panel_axis(params: ModelParams, label: str, T: float) -> tuple[np.ndarray, str]:
    if label == "below":
        return _unit(eigenvector(params, T, 0.0)), "zero"
    if label == "above":
        A = coefficient_matrix(params, T)
        ztol = 1e-8 * max(A.inf_norm, 1.0)
        positives = [r for r in real_roots(params, T) if r > ztol]
        if not positives:
            raise NumericError(f"no positive eigen-direction at T = {T:g}")
        return _unit(eigenvector(params, T, max(positives))), "positive"
    # at the threshold the zero direction is taken from the numeric
    # eigensolver; the double zero has a single eigen-direction
    A = coefficient_matrix(params, T)
    w, vecs = np.linalg.eig(A.entries)
    idx = int(np.argmin(np.abs(w)))
    return _unit(vecs[:, idx].real), "zero_numeric"


def cmd_field(cfg: RunConfig, args, out) -> int:
    params = _need_params(cfg)
    if params.n_E != 0:
        raise ConfigError("field sketches need n_E = 0 (analytic eigenvectors)")
    T_star = params.T_star
    if not math.isfinite(T_star) or T_star <= 0:
        raise ConfigError("field sketches need beta, p, c > 0 so the threshold is finite")
    coeffs = _coeffs_or_default(cfg, params)
    names = _state_names(params)
    lattice = np.linspace(-1.0, 1.0, 9)

    header = (
        "panel,panel_axis,T,u_neg,u_panel,"
        + ",".join(f"dt_{n}" for n in names)
        + ","
        + ",".join(f"dx_{n}" for n in names)
    )
    out.write(header + "\n")
    v_neg = _shared_negative_axis(params, 0.5 * T_star)
    for label, T in (("below", 0.5 * T_star), ("at", T_star), ("above", 1.5 * T_star)):
        v_panel, axis_name = _panel_axis(params, label, T)
        for u in lattice:
            for w in lattice:
                block = u * v_neg + w * v_panel
                s = StateVector.for_params(params, np.concatenate([[T], block]))
                fields = sample_fields(params, coeffs, s)
                cells = [label, axis_name, _fmt(T), _fmt(u), _fmt(w)]
                cells += [_fmt(v) for v in fields.d_dt]
                cells += [_fmt(v) for v in fields.d_dx]
                out.write(",".join(cells) + "\n")
    return EXIT_OK


def cmd_validate(cfg: RunConfig, args, out) -> int:
    seed = args.seed if args.seed is not None else cfg.seed
    overrides = {k: v for k, v in cfg.tolerances.items() if k in _SUITE_TOLERANCE_KEYS}
    results = run_all(seed=seed, tolerances=overrides or None)
    ok = all(r.ok for r in results)
    if args.json:
        doc = {"seed": seed, "ok": ok, "suites": [r.to_json_dict() for r in results]}
        out.write(json.dumps(doc, indent=2) + "\n")
    else:
        for r in results:
            status = "pass" if r.ok else "FAIL"
            out.write(f"{r.name}: {status} ({r.checks - r.failures}/{r.checks} checks)\n")
            for example in r.failure_examples:
                out.write(f"  failing case: {example}\n")
        out.write(f"{'all suites passed' if ok else 'suite failures'} [seed {seed}]\n")
    return EXIT_OK if ok else EXIT_SUITE_FAILURE


_COMMANDS = {
    "analyze": cmd_analyze,
    "sweep": cmd_sweep,
    "simulate": cmd_simulate,
    "surface": cmd_surface,
    "field": cmd_field,
    "validate": cmd_validate,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="flustab",
        description="Stability analysis and integration for the within-host infection model.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    help_lines = {
        "analyze": "spectrum report at one T value (JSON)",
        "sweep": "classification and extreme eigenvalue across a T range (CSV)",
        "simulate": "time integration of one trajectory (CSV)",
        "surface": "two-parameter integral surface trace (CSV)",
        "field": "field samples on eigen-direction lattices (CSV)",
        "validate": "randomized oracle suites; nonzero exit on failure",
    }
    for name, help_text in help_lines.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", metavar="PATH", help="JSON run configuration")
        p.add_argument("--json", action="store_true", help="machine-readable output where applicable")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        p.add_argument("--out", metavar="PATH", help="write output here instead of standard output")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.seed is not None and args.seed < 0:
            raise ConfigError("seed must be >= 0")
        cfg = _load_config(args.config)
        with _open_out(args.out) as out:
            return _COMMANDS[args.command](cfg, args, out)
    except ConfigError as exc:
        _emit_error(EXIT_BAD_CONFIG, str(exc), exc.details)
        return EXIT_BAD_CONFIG
    except InvalidParamsError as exc:
        _emit_error(EXIT_BAD_CONFIG, "invalid parameters", {"problems": exc.problems})
        return EXIT_BAD_CONFIG
    except BlowUpError as exc:
        details = {"rows": int(exc.times.size), "t_last": exc.t_last, "where": exc.where}
        _emit_error(EXIT_BLOW_UP, str(exc), details)
        return EXIT_BLOW_UP
    except NumericError as exc:
        _emit_error(EXIT_NUMERIC, str(exc))
        return EXIT_NUMERIC
    except (np.linalg.LinAlgError, FloatingPointError, ValueError) as exc:
        _emit_error(EXIT_NUMERIC, f"numeric failure: {exc}")
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
