"""noma-meta command line: analytic sweeps, simulation and validation as CSV.

    noma-meta <command> [--config FILE] [--theta V] [--tau V] [--alpha V]
              [--beta-c-db V] [--beta-e-db V] [--rho V]
              [--sweep VAR:START:STOP:STEPS] [--n-realizations N] [--seed S]
              [--out FILE]

Config files hold flat `key = value` lines (or one JSON object) using the
flag names; flags given on the command line win over the file.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import dataclass, fields

import numpy as np

from .analytic import (
    Scheme,
    beta_approx_params,
    cc_moments,
    cc_delay_printed,
    ce_moments,
    cell_throughput,
    matched_oma_rho,
    mean_local_delay,
    mean_local_delay_bounds,
    meta_ccdf_beta,
    meta_ccdf_gilpelaez,
    moment_ce_bounds,
    moment_ce_bounds_oma,
)
from .errors import ConfigError, NomaMetaError
from .model import NetworkParams, NomaConfig, UserClass, chi_c, chi_e, db_to_linear
from .simulate import SimConfig, run_batch

__all__ = [
    "COMMANDS",
    "SWEEP_VARS",
    "Sweep",
    "RunSpec",
    "parse_config",
    "parse_config_text",
    "emit_config",
    "run",
    "main",
]

COMMANDS = ("moments", "meta", "delay", "throughput", "simulate", "validate")
SWEEP_VARS = ("theta", "tau", "x", "rho")
_ALLOWED_SWEEPS = {
    "moments": ("theta", "tau"),
    "meta": ("x",),
    "delay": ("theta", "tau"),
    "throughput": ("theta", "tau", "rho"),
    "simulate": ("theta", "tau"),
    "validate": ("theta",),
}
VALIDATE_THETAS = (0.05, 0.15, 0.25, 0.35)
VALIDATE_X = tuple(np.round(np.arange(0.1, 0.95, 0.1), 10))


@dataclass(frozen=True)
class Sweep:
    variable: str
    start: float
    stop: float
    steps: int

    @classmethod
    def parse(cls, text: str) -> "Sweep":
        parts = str(text).split(":")
        if len(parts) != 4:
            raise ConfigError("sweep", f"expected VAR:START:STOP:STEPS, got {text!r}")
        var = parts[0].strip().lower()
        if var not in SWEEP_VARS:
            raise ConfigError("sweep", f"variable must be one of {SWEEP_VARS}, got {var!r}")
        try:
            start, stop, steps = float(parts[1]), float(parts[2]), int(parts[3])
        except ValueError as exc:
            raise ConfigError("sweep", str(exc)) from None
        if steps < 1:
            raise ConfigError("sweep", "steps must be >= 1")
        return cls(var, start, stop, steps)

    def values(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.steps)

    def __str__(self):
        return f"{self.variable}:{self.start!r}:{self.stop!r}:{self.steps}"


@dataclass(frozen=True)
class RunSpec:
    """Validated run description.

    `beta_c` and `beta_e` are in dB when `thresholds_in_db` is set and linear
    otherwise; `beta_c_linear` / `beta_e_linear` always give the linear value.
    """

    command: str
    theta: float | None = None
    tau: float = 0.7
    alpha: float = 4.0
    lambda_b: float = 1.0
    beta_c: float = 3.0
    beta_e: float = -3.0
    thresholds_in_db: bool = True
    rho: float = 0.5
    sweep: Sweep | None = None
    n_realizations: int = 100_000
    seed: int = 2019
    workers: int = 1
    truncation: float = 512.0
    compare_printed: bool = False
    out: str | None = None

    @property
    def beta_c_linear(self) -> float:
        return db_to_linear(self.beta_c) if self.thresholds_in_db else self.beta_c

    @property
    def beta_e_linear(self) -> float:
        return db_to_linear(self.beta_e) if self.thresholds_in_db else self.beta_e

    def params(self, **override) -> NetworkParams:
        kw = dict(lambda_b=self.lambda_b, alpha=self.alpha, tau=self.tau)
        kw.update(override)
        return NetworkParams(**kw)

    def noma(self, theta: float | None = None) -> NomaConfig:
        th = self.theta if theta is None else theta
        return NomaConfig(th, self.beta_c_linear, self.beta_e_linear)

    def sweep_values(self) -> np.ndarray | None:
        return None if self.sweep is None else self.sweep.values()


# ---------------------------------------------------------------- parsing

_KEY_TYPES = {
    "command": str,
    "theta": float,
    "tau": float,
    "alpha": float,
    "lambda_b": float,
    "beta_c_db": float,
    "beta_e_db": float,
    "beta_c": float,
    "beta_e": float,
    "rho": float,
    "sweep": str,
    "n_realizations": int,
    "seed": int,
    "workers": int,
    "truncation": float,
    "compare_printed": bool,
    "out": str,
}
_DB_KEYS = ("beta_c_db", "beta_e_db")
_LIN_KEYS = ("beta_c", "beta_e")


def _norm_key(key: str) -> str:
    return key.strip().lower().lstrip("-").replace("-", "_")


def _coerce(key, value):
    kind = _KEY_TYPES[key]
    if value is None:
        return None
    try:
        if kind is bool:
            if isinstance(value, bool):
                return value
            text = str(value).strip().lower()
            if text in ("1", "true", "yes", "on"):
                return True
            if text in ("0", "false", "no", "off"):
                return False
            raise ValueError(f"not a boolean: {value!r}")
        if kind is int:
            if isinstance(value, bool):
                raise ValueError(f"not an integer: {value!r}")
            if isinstance(value, int):
                return value
            try:
                return int(str(value).strip())
            except ValueError:
                # accept integral floats such as 1e5, reject 1.5
                num = float(value)
                if not num.is_integer():
                    raise ValueError(f"not an integer: {value!r}") from None
                return int(num)
        if kind is float:
            return float(value)
        return str(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(key, str(exc)) from None


def _read_mapping(text: str) -> dict:
    """Flat key/value text or a JSON object -> {normalized key: raw value}."""
    stripped = text.strip()
    if stripped.startswith("{"):
        try:
            raw = json.loads(stripped)
        except json.JSONDecodeError as exc:
            raise ConfigError("config", f"invalid JSON: {exc}") from None
        if not isinstance(raw, dict):
            raise ConfigError("config", "JSON config must be an object")
        items = raw.items()
    else:
        items = []
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            sep = "=" if "=" in line else ":" if ":" in line else None
            if sep is None:
                raise ConfigError("config", f"line {lineno}: expected key = value")
            key, value = line.split(sep, 1)
            items.append((key, value.strip()))
    out = {}
    for key, value in items:
        k = _norm_key(key)
        if k not in _KEY_TYPES:
            raise ConfigError(k, "unknown key")
        out[k] = _coerce(k, value)
    return out


def _check(key, ok, reason):
    if not ok:
        raise ConfigError(key, reason)


def _validate_range(key, value):
    if key == "theta":
        _check(key, 0.0 < value < 1.0, f"must lie in (0, 1), got {value}")
    elif key == "tau":
        _check(key, 0.0 < value < 1.0, f"must lie in (0, 1), got {value}")
    elif key == "rho":
        _check(key, 0.0 <= value <= 1.0, f"must lie in [0, 1], got {value}")
    elif key == "x":
        _check(key, 0.0 <= value <= 1.0, f"must lie in [0, 1], got {value}")


def _build(m: dict) -> RunSpec:
    command = m.get("command")
    _check("command", command in COMMANDS, f"must be one of {COMMANDS}, got {command!r}")
    has_db = any(m.get(k) is not None for k in _DB_KEYS)
    has_lin = any(m.get(k) is not None for k in _LIN_KEYS)
    _check("beta_c", not (has_db and has_lin), "thresholds given both in dB and linear scale")
    kw = {"command": command}
    if has_lin:
        kw["thresholds_in_db"] = False
        kw["beta_c"] = m.get("beta_c")
        kw["beta_e"] = m.get("beta_e")
        for k in _LIN_KEYS:
            _check(k, kw[k] is not None, "linear thresholds need both beta_c and beta_e")
            _check(k, kw[k] > 0 and math.isfinite(kw[k]), f"must be > 0, got {kw[k]}")
    else:
        if m.get("beta_c_db") is not None:
            kw["beta_c"] = m["beta_c_db"]
        if m.get("beta_e_db") is not None:
            kw["beta_e"] = m["beta_e_db"]
        for k in ("beta_c", "beta_e"):
            if k in kw:
                _check(k + "_db", math.isfinite(kw[k]), "must be finite")
    for k in ("theta", "tau", "alpha", "lambda_b", "rho", "n_realizations", "seed",
              "workers", "truncation", "compare_printed", "out"):
        if m.get(k) is not None:
            kw[k] = m[k]
    if m.get("sweep") is not None:
        kw["sweep"] = Sweep.parse(m["sweep"])
    spec = RunSpec(**kw)

    for k in ("theta", "tau", "rho"):
        v = getattr(spec, k)
        if v is not None:
            _validate_range(k, v)
    _check("alpha", spec.alpha > 2 and math.isfinite(spec.alpha), f"must be > 2, got {spec.alpha}")
    _check("lambda_b", spec.lambda_b > 0 and math.isfinite(spec.lambda_b),
           f"must be > 0, got {spec.lambda_b}")
    _check("n_realizations", spec.n_realizations >= 1, "must be >= 1")
    _check("seed", 0 <= spec.seed < 2 ** 64, "must be a 64-bit unsigned integer")
    _check("workers", spec.workers >= 1, "must be >= 1")
    _check("truncation", spec.truncation > 1, "must be > 1")
    if spec.sweep is not None:
        var = spec.sweep.variable
        _check("sweep", var in _ALLOWED_SWEEPS[command],
               f"{command} sweeps one of {_ALLOWED_SWEEPS[command]}, not {var!r}")
        for v in spec.sweep.values():
            try:
                _validate_range(var, float(v))
            except ConfigError as exc:
                raise ConfigError("sweep", f"{var}={v:g} {exc.reason}") from None
    needs_theta = command not in ("validate",) and not (spec.sweep and spec.sweep.variable == "theta")
    _check("theta", not needs_theta or spec.theta is not None, f"required for {command}")
    return spec


def parse_config_text(text: str, overrides: dict | None = None) -> RunSpec:
    """Build a RunSpec from config text, then apply `overrides` (flag values)."""
    merged = _read_mapping(text) if text else {}
    if overrides:
        flags = {_norm_key(k): _coerce(_norm_key(k), v)
                 for k, v in overrides.items() if v is not None}
        # a threshold given on the command line replaces the file's thresholds
        if any(k in flags for k in _DB_KEYS + _LIN_KEYS):
            other = _LIN_KEYS if any(k in flags for k in _DB_KEYS) else _DB_KEYS
            for k in other:
                merged.pop(k, None)
        merged.update(flags)
    return _build(merged)


def emit_config(spec: RunSpec) -> str:
    """Config text that parses back to `spec`."""
    lines = []
    for f in fields(spec):
        value = getattr(spec, f.name)
        if f.name == "thresholds_in_db" or value is None:
            continue
        key = f.name
        if key in ("beta_c", "beta_e") and spec.thresholds_in_db:
            key += "_db"
        if isinstance(value, float):
            value = repr(value)
        elif isinstance(value, bool):
            value = "true" if value else "false"
        lines.append(f"{key} = {value}")
    return "\n".join(lines) + "\n"


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="noma-meta", description=__doc__.split("\n")[0])
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", metavar="FILE")
    ap.add_argument("--theta", type=float)
    ap.add_argument("--tau", type=float)
    ap.add_argument("--alpha", type=float)
    ap.add_argument("--lambda-b", type=float)
    ap.add_argument("--beta-c-db", type=float)
    ap.add_argument("--beta-e-db", type=float)
    ap.add_argument("--beta-c", type=float, help="linear-scale CC threshold")
    ap.add_argument("--beta-e", type=float, help="linear-scale CE threshold")
    ap.add_argument("--rho", type=float)
    ap.add_argument("--sweep", metavar="VAR:START:STOP:STEPS")
    ap.add_argument("--n-realizations", type=int)
    ap.add_argument("--seed", type=int)
    ap.add_argument("--workers", type=int)
    ap.add_argument("--truncation", type=float, help="Gil-Pelaez truncation point")
    ap.add_argument("--compare-printed", action="store_const", const=True,
                    help="delay: also evaluate the chi^(1-delta) variant of the CC delay")
    ap.add_argument("--out", metavar="FILE")
    return ap


def parse_config(argv=None) -> RunSpec:
    args = vars(_build_parser().parse_args(argv))
    text = ""
    path = args.pop("config")
    if path:
        try:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError("config", str(exc)) from None
    return parse_config_text(text, args)


# ---------------------------------------------------------------- commands

def _moment_pair(fn, chi, params):
    m = np.real(fn([1.0, 2.0], chi, params))
    return float(m[0]), float(m[1])


def _points(spec: RunSpec):
    """(sweep value or None, params, cfg-or-None) per sweep point."""
    values = spec.sweep_values()
    if values is None:
        return [(None, spec.params(), spec.noma())]
    var = spec.sweep.variable
    out = []
    for v in values:
        v = float(v)
        if var == "theta":
            out.append((v, spec.params(), spec.noma(v)))
        elif var == "tau":
            out.append((v, spec.params(tau=v), spec.noma()))
        else:
            out.append((v, spec.params(), spec.noma()))
    return out


def _lead(spec):
    return [spec.sweep.variable] if spec.sweep else []


def _cmd_moments(spec: RunSpec):
    cols = _lead(spec) + [
        "chi_c", "chi_e", "feasible",
        "m1_cc_noma", "m2_cc_noma", "var_cc_noma",
        "m1_ce_noma", "m2_ce_noma", "var_ce_noma", "m1_ce_lb", "m1_ce_ub",
        "m1_cc_oma", "m2_cc_oma", "var_cc_oma",
        "m1_ce_oma", "m2_ce_oma", "var_ce_oma", "m1_ce_oma_lb", "m1_ce_oma_ub",
    ]
    rows = []
    for v, params, cfg in _points(spec):
        row = dict(zip(_lead(spec), [v]))
        c1, c2 = _moment_pair(cc_moments, cfg.beta_c, params)
        e1, e2 = _moment_pair(ce_moments, cfg.beta_e, params)
        lb_o, ub_o = moment_ce_bounds_oma(1.0, cfg.beta_e, params)
        row.update(m1_cc_oma=c1, m2_cc_oma=c2, var_cc_oma=c2 - c1 * c1,
                   m1_ce_oma=e1, m2_ce_oma=e2, var_ce_oma=e2 - e1 * e1,
                   m1_ce_oma_lb=lb_o, m1_ce_oma_ub=ub_o)
        if cfg.feasible:
            xc, xe = chi_c(cfg), chi_e(cfg)
            c1, c2 = _moment_pair(cc_moments, xc, params)
            e1, e2 = _moment_pair(ce_moments, xe, params)
            lb, ub = moment_ce_bounds(1.0, cfg, params)
        else:
            # the L_E layer cannot be decoded: both users always fail
            xc = xe = math.inf
            c1 = c2 = e1 = e2 = lb = ub = 0.0
        row.update(chi_c=xc, chi_e=xe, feasible=cfg.feasible,
                   m1_cc_noma=c1, m2_cc_noma=c2, var_cc_noma=c2 - c1 * c1,
                   m1_ce_noma=e1, m2_ce_noma=e2, var_ce_noma=e2 - e1 * e1,
                   m1_ce_lb=lb, m1_ce_ub=ub)
        rows.append(row)
    return cols, rows, []


def _gp_curve(x, fn, chi, params, truncation):
    return meta_ccdf_gilpelaez(x, lambda b: fn(b, chi, params), truncation)


def _cmd_meta(spec: RunSpec):
    x = spec.sweep_values() if spec.sweep else np.linspace(0.0, 1.0, 101)
    params, cfg = spec.params(), spec.noma()
    if not cfg.feasible:
        raise ConfigError("theta", f"infeasible power split for beta_e={cfg.beta_e:.6g}")
    cases = [
        ("cc_noma", UserClass.CC, cc_moments, chi_c(cfg)),
        ("ce_noma", UserClass.CE, ce_moments, chi_e(cfg)),
        ("cc_oma", UserClass.CC, cc_moments, cfg.beta_c),
        ("ce_oma", UserClass.CE, ce_moments, cfg.beta_e),
    ]
    sim = SimConfig(params, cfg, spec.n_realizations, spec.seed)
    emp_noma, emp_oma = run_batch(sim, [cfg, (cfg.beta_c, cfg.beta_e)], spec.workers)
    cols = ["x"]
    data = {"x": x}
    notes = []
    for name, cls, fn, chi in cases:
        m1, m2 = _moment_pair(fn, chi, params)
        beta = meta_ccdf_beta(x, beta_approx_params(m1, m2))
        gp = _gp_curve(x, fn, chi, params, spec.truncation)
        emp = (emp_noma if name.endswith("noma") else emp_oma).ccdf(x, cls)
        cols += [f"beta_{name}", f"gp_{name}", f"emp_{name}"]
        data.update({f"beta_{name}": beta.ccdf, f"gp_{name}": gp.ccdf, f"emp_{name}": emp.ccdf})
        notes.append(f"{name}: max|beta-gp|={beta.sup_distance(gp):.4g} "
                     f"max|gp-emp|={gp.sup_distance(emp):.4g}")
    rows = [{c: data[c][i] for c in cols} for i in range(len(x))]
    return cols, rows, notes


def _cmd_delay(spec: RunSpec):
    cols = _lead(spec) + [
        "feasible", "delay_cc_noma", "delay_ce_noma", "delay_ce_noma_lb", "delay_ce_noma_ub",
        "delay_cc_oma", "delay_ce_oma", "delay_ce_oma_lb", "delay_ce_oma_ub",
    ]
    if spec.compare_printed:
        cols += ["delay_cc_noma_quad", "delay_cc_noma_printed",
                 "delay_cc_oma_quad", "delay_cc_oma_printed"]
    rows, notes = [], []
    worst, mismatched = 0.0, 0
    for v, params, cfg in _points(spec):
        row = dict(zip(_lead(spec), [v]))
        row.update(
            delay_cc_oma=mean_local_delay(UserClass.CC, Scheme.OMA, cfg, params),
            delay_ce_oma=mean_local_delay(UserClass.CE, Scheme.OMA, cfg, params),
        )
        row["delay_ce_oma_lb"], row["delay_ce_oma_ub"] = mean_local_delay_bounds(Scheme.OMA, cfg, params)
        row["feasible"] = cfg.feasible
        if cfg.feasible:
            row["delay_cc_noma"] = mean_local_delay(UserClass.CC, Scheme.NOMA, cfg, params)
            row["delay_ce_noma"] = mean_local_delay(UserClass.CE, Scheme.NOMA, cfg, params)
            row["delay_ce_noma_lb"], row["delay_ce_noma_ub"] = mean_local_delay_bounds(
                Scheme.NOMA, cfg, params)
        else:
            for k in ("delay_cc_noma", "delay_ce_noma", "delay_ce_noma_lb", "delay_ce_noma_ub"):
                row[k] = math.inf
        if spec.compare_printed:
            for scheme, tag in ((Scheme.NOMA, "noma"), (Scheme.OMA, "oma")):
                if scheme is Scheme.NOMA and not cfg.feasible:
                    row[f"delay_cc_{tag}_quad"] = row[f"delay_cc_{tag}_printed"] = math.inf
                    continue
                chi = chi_c(cfg) if scheme is Scheme.NOMA else cfg.beta_c
                quad = mean_local_delay(UserClass.CC, scheme, cfg, params, method="quadrature")
                printed = cc_delay_printed(chi, params)
                row[f"delay_cc_{tag}_quad"], row[f"delay_cc_{tag}_printed"] = quad, printed
                closed = row[f"delay_cc_{tag}"]
                if math.isfinite(closed) != math.isfinite(printed):
                    mismatched += 1
                elif math.isfinite(closed):
                    worst = max(worst, abs(printed - closed) / closed)
        rows.append(row)
    if spec.compare_printed:
        notes.append(f"CC delay: the chi^(1-delta) variant differs from the b=-1 closed form by "
                     f"up to {worst:.4g} (relative) where both are finite, and disagrees on "
                     f"divergence at {mismatched} point(s)")
    return cols, rows, notes


def _cmd_throughput(spec: RunSpec):
    sweeps_rho = spec.sweep is not None and spec.sweep.variable == "rho"
    cols = _lead(spec) + ["feasible", "noma_total", "noma_cc", "noma_ce"]
    # a rho sweep already leads with the rho column
    cols += ([] if sweeps_rho else ["rho"]) + [
        "oma_total", "oma_cc", "oma_ce", "matched_rho", "oma_matched_total",
    ]
    rows = []
    for v, params, cfg in _points(spec):
        rho = v if sweeps_rho else spec.rho
        noma = cell_throughput(Scheme.NOMA, cfg, params)
        oma = cell_throughput(Scheme.OMA, cfg, params, rho)
        row = dict(zip(_lead(spec), [v]))
        row.update(feasible=noma.feasible, noma_total=noma.total, noma_cc=noma.cc_term,
                   noma_ce=noma.ce_term, rho=rho, oma_total=oma.total, oma_cc=oma.cc_term,
                   oma_ce=oma.ce_term)
        if noma.feasible:
            mr = matched_oma_rho(cfg, params)
            row.update(matched_rho=mr,
                       oma_matched_total=cell_throughput(Scheme.OMA, cfg, params, mr).total)
        else:
            row.update(matched_rho=math.nan, oma_matched_total=math.nan)
        rows.append(row)
    return cols, rows, []


_SIM_COLS = ["scheme", "user_class", "n", "m1", "m1_se", "m2", "m2_se", "var", "var_se",
             "n_degenerate"]


def _summary_rows(lead, scheme, emp):
    rows = []
    for cls in UserClass:
        s = emp.samples(cls)
        row = dict(lead)
        row.update(scheme=scheme, user_class=cls.value, n=len(s), n_degenerate=emp.n_degenerate)
        if len(s) >= 2:
            row.update(m1=emp.moment(1, cls), m1_se=emp.moment_se(1, cls),
                       m2=emp.moment(2, cls), m2_se=emp.moment_se(2, cls),
                       var=emp.variance(cls), var_se=emp.variance_se(cls))
        rows.append(row)
    return rows


def _cmd_simulate(spec: RunSpec):
    cols = _lead(spec) + _SIM_COLS
    rows = []
    pts = _points(spec)
    if spec.sweep and spec.sweep.variable == "theta":
        # one set of realizations serves every power split
        sim = SimConfig(pts[0][1], None, spec.n_realizations, spec.seed)
        emps = run_batch(sim, [cfg for _, _, cfg in pts] + [(spec.beta_c_linear, spec.beta_e_linear)],
                         spec.workers)
        for (v, _, _), emp in zip(pts, emps):
            rows += _summary_rows({"theta": v}, "noma", emp)
        rows += _summary_rows({"theta": math.nan}, "oma", emps[-1])
        return cols, rows, []
    for v, params, cfg in pts:
        sim = SimConfig(params, cfg, spec.n_realizations, spec.seed)
        emp_n, emp_o = run_batch(sim, [cfg, (cfg.beta_c, cfg.beta_e)], spec.workers)
        lead = dict(zip(_lead(spec), [v]))
        rows += _summary_rows(lead, "noma", emp_n) + _summary_rows(lead, "oma", emp_o)
    return cols, rows, []


_VALIDATE_COLS = ["quantity", "scheme", "user_class", "theta", "x", "analytic", "empirical",
                  "se", "z", "status"]


def _status_row(quantity, scheme, cls, theta, x, analytic, empirical, se):
    z = abs(analytic - empirical) / se if se > 0 else (0.0 if analytic == empirical else math.inf)
    return dict(quantity=quantity, scheme=scheme, user_class=cls, theta=theta, x=x,
                analytic=analytic, empirical=empirical, se=se, z=z,
                status="PASS" if z <= 3.0 else "FAIL")


def binomial_se(count_above: int, n: int) -> float:
    """sqrt(p(1-p)/n) with p = (k + 1/2)/(n + 1), never zero."""
    p = (count_above + 0.5) / (n + 1.0)
    return math.sqrt(p * (1.0 - p) / n)


def _cmd_validate(spec: RunSpec):
    params = spec.params()
    thetas = [float(t) for t in spec.sweep_values()] if spec.sweep else list(VALIDATE_THETAS)
    theta_meta = spec.theta if spec.theta is not None else 0.25
    if theta_meta not in thetas:
        thetas.append(theta_meta)
    cfgs = [spec.noma(t) for t in thetas]
    oma_pair = (spec.beta_c_linear, spec.beta_e_linear)
    sim = SimConfig(params, None, spec.n_realizations, spec.seed)
    emps = run_batch(sim, cfgs + [oma_pair], spec.workers)
    rows = []
    n_cc, n_ce = emps[0].class_counts
    n = n_cc + n_ce
    p_cc = params.tau ** 2
    rows.append(_status_row("cc_fraction", "", "", math.nan, math.nan, p_cc, n_cc / n,
                            math.sqrt(p_cc * (1 - p_cc) / n)))
    cases = [(t, "noma", c, e) for t, c, e in zip(thetas, cfgs, emps)]
    cases.append((math.nan, "oma", None, emps[-1]))
    meta_rows = []
    for theta, scheme, cfg, emp in cases:
        for cls, fn in ((UserClass.CC, cc_moments), (UserClass.CE, ce_moments)):
            if cfg is None:
                chi = oma_pair[0] if cls is UserClass.CC else oma_pair[1]
            elif not cfg.feasible:
                continue
            else:
                chi = chi_c(cfg) if cls is UserClass.CC else chi_e(cfg)
            m1, m2 = _moment_pair(fn, chi, params)
            rows.append(_status_row("m1", scheme, cls.value, theta, math.nan, m1,
                                    emp.moment(1, cls), emp.moment_se(1, cls)))
            rows.append(_status_row("var", scheme, cls.value, theta, math.nan, m2 - m1 * m1,
                                    emp.variance(cls), emp.variance_se(cls)))
            if cfg is None or theta == theta_meta:
                x = np.array(VALIDATE_X)
                gp = _gp_curve(x, fn, chi, params, spec.truncation)
                s = emp.samples(cls)
                em = emp.ccdf(x, cls)
                for xi, a, e in zip(x, gp.ccdf, em.ccdf):
                    k = int(round(e * len(s)))
                    meta_rows.append(_status_row("ccdf", scheme, cls.value, theta, float(xi),
                                                 float(a), float(e), binomial_se(k, len(s))))
    rows += meta_rows
    fails = sum(r["status"] == "FAIL" for r in rows)
    notes = [f"validate: {len(rows) - fails} PASS, {fails} FAIL"]
    return _VALIDATE_COLS, rows, notes, fails


_HANDLERS = {
    "moments": _cmd_moments,
    "meta": _cmd_meta,
    "delay": _cmd_delay,
    "throughput": _cmd_throughput,
    "simulate": _cmd_simulate,
    "validate": _cmd_validate,
}


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return "%.12g" % value
    return str(value)


def write_csv(stream, columns, rows):
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(row.get(c)) for c in columns])


def run(spec: RunSpec, stdout=None, stderr=None) -> int:
    """Execute `spec`, write its CSV and return the exit status."""
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    result = _HANDLERS[spec.command](spec)
    cols, rows, notes = result[:3]
    fails = result[3] if len(result) > 3 else 0
    if spec.out:
        with open(spec.out, "w", encoding="utf-8", newline="") as fh:
            write_csv(fh, cols, rows)
    else:
        write_csv(stdout, cols, rows)
    for line in notes:
        print(line, file=stderr)
    return 1 if fails else 0


def main(argv=None) -> int:
    try:
        spec = parse_config(argv)
        return run(spec)
    except ConfigError as exc:
        print(f"noma-meta: config error: {exc}", file=sys.stderr)
        return 2
    except NomaMetaError as exc:
        print(f"noma-meta: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
