"""Command-line drivers: single runs, convergence studies and the stability matrix."""

from __future__ import annotations

import csv
import math
import sys
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path

import click
import numpy as np

from .correction import write_correction_report
from .diagnostics import (
    ConservationLedger,
    WeakBVAccumulator,
    WeakBVReport,
    level_crossing,
    sample_profile,
    write_profile,
    write_series,
)
from .errors import BlowUpError, ConfigError, PositivityError, StateError
from .reference import BenchmarkCase, builtin_cases, get_case, l1_error, wave_structure
from .residuals import Blending, Stabilization
from .riemann import FluxChoice
from .timestepping import SchemeConfig, TimeScheme, advance

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_BLOWUP = 3
EXIT_POSITIVITY = 4

# a Riemann run whose shock sits further than this from the exact one is flagged
SHOCK_FLAG_FRACTION = 0.02


def _err(key: str, msg: str) -> ConfigError:
    return ConfigError(f"{key}: {msg}", key)


@dataclass(frozen=True)
class RunConfig:
    case: str = "sod"
    n_cells: int = 100
    r: int = 0
    kin_degree: int | None = None
    allow_equal_degree: bool = False
    flux: str = "hllc"
    stabilization: str = "jump"
    blending: str = "none"
    correction: bool = True
    time_scheme: str = "euler"
    mass_matrix: bool = True
    cfl: float | None = None
    theta: float = 0.1
    t_final: float | None = None
    profile: str | None = None
    series: str | None = None
    summary: str | None = None
    corrections: str | None = None

    def validate(self) -> "RunConfig":
        def check(key, ok, msg):
            if not ok:
                raise _err(key, msg)

        try:
            get_case(self.case)
        except ValueError as exc:
            raise _err("case", str(exc)) from None
        check("n_cells", self.n_cells >= 2, "must be at least 2")
        check("r", self.r in (0, 1), "thermodynamic degree must be 0 or 1")
        if self.kin_degree is not None:
            check("kin_degree", self.kin_degree in (1, 2), "velocity degree must be 1 or 2")
            if self.kin_degree != self.r + 1:
                check("kin_degree", self.allow_equal_degree and self.kin_degree == self.r,
                      "only r + 1, or r with allow_equal_degree = on")
        for key, enum in (("flux", FluxChoice), ("stabilization", Stabilization),
                          ("blending", Blending), ("time_scheme", TimeScheme)):
            value = getattr(self, key)
            allowed = [m.value for m in enum]
            check(key, value in allowed, f"{value!r} not in {allowed}")
        check("cfl", self.cfl is None or (math.isfinite(self.cfl) and self.cfl > 0), "must be positive")
        check("theta", math.isfinite(self.theta) and self.theta >= 0, "must be non-negative")
        check("t_final", self.t_final is None or (math.isfinite(self.t_final) and self.t_final > 0), "must be positive")
        return self

    @property
    def benchmark(self) -> BenchmarkCase:
        return get_case(self.case)

    def scheme(self) -> SchemeConfig:
        cfl = self.cfl if self.cfl is not None else self.benchmark.cfl
        return SchemeConfig(
            flux=self.flux,
            stabilization=self.stabilization,
            blending=self.blending,
            correction=self.correction,
            time_scheme=self.time_scheme,
            mass_matrix=self.mass_matrix,
            cfl=cfl,
            theta=self.theta,
        )

    @property
    def label(self) -> str:
        q = self.r + 1 if self.kin_degree is None else self.kin_degree
        return f"K{q}T{self.r}"


_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}
_BOOL_WORDS = {"on": True, "true": True, "yes": True, "1": True, "off": False, "false": False, "no": False, "0": False}


def _coerce(key: str, raw):
    if key not in _FIELD_TYPES:
        raise _err(key, "unknown key")
    if not isinstance(raw, str):
        return raw
    text = raw.strip()
    kind = _FIELD_TYPES[key]
    optional = "None" in kind
    if optional and text.lower() in ("", "none", "default"):
        return None
    try:
        if kind.startswith("bool"):
            return _BOOL_WORDS[text.lower()]
        if kind.startswith("int"):
            return int(text)
        if kind.startswith("float"):
            return float(text)
    except (KeyError, ValueError):
        raise _err(key, f"invalid value {text!r}") from None
    return text


def parse_config_text(text: str, source: str = "<config>") -> dict:
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise _err(f"line {lineno}", f"expected 'key = value' in {source}")
        key, value = (part.strip() for part in line.split("=", 1))
        values[key] = _coerce(key, value)
    return values


def parse_config(path=None, overrides: dict | None = None, defaults: dict | None = None) -> RunConfig:
    """Defaults, then file values, then overrides (None entries ignored); unknown keys are errors."""
    values = {k: _coerce(k, v) for k, v in (defaults or {}).items()}
    if path is not None:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise _err("config", f"cannot read {path}: {exc}") from None
        values.update(parse_config_text(text, str(path)))
    for key, value in (overrides or {}).items():
        if value is not None:
            values[key] = _coerce(key, value)
    return RunConfig(**values).validate()


@dataclass
class RunSummary:
    config: RunConfig
    t: float
    steps: int
    halvings: int
    l1: dict[str, float] | None
    drift_m: float
    drift_E: float
    drift_mass: float
    weak_bv: WeakBVReport
    max_residue_m: float
    max_residue_e: float
    shock_error: float | None = None
    shock_flag: bool = False
    min_rho: float = math.nan
    min_p: float = math.nan

    def rows(self) -> list[tuple[str, str]]:
        out = [(k, "" if v is None else str(v)) for k, v in asdict(self.config).items()]
        out.append(("layout", self.config.label))
        nums = {
            "t": self.t,
            "steps": self.steps,
            "halvings": self.halvings,
            "drift_mass": self.drift_mass,
            "drift_momentum": self.drift_m,
            "drift_energy": self.drift_E,
            "weak_bv_rho": self.weak_bv.rho,
            "weak_bv_u": self.weak_bv.u,
            "weak_bv_e": self.weak_bv.e,
            "max_residue_momentum": self.max_residue_m,
            "max_residue_energy": self.max_residue_e,
            "min_rho": self.min_rho,
            "min_p": self.min_p,
        }
        for k, v in (self.l1 or {}).items():
            nums[f"l1_{k}"] = v
        if self.shock_error is not None:
            nums["shock_position_error"] = self.shock_error
        out += [(k, repr(float(v)) if isinstance(v, float) else str(v)) for k, v in nums.items()]
        out.append(("shock_flag", "1" if self.shock_flag else "0"))
        return out


def write_summary(summary: RunSummary, path) -> None:
    try:
        with Path(path).open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(("key", "value"))
            w.writerows(summary.rows())
    except OSError as exc:
        raise OSError(f"cannot write summary to {path}: {exc}") from exc


def shock_position_error(case: BenchmarkCase, fld, t: float) -> float | None:
    """|x_num - x_exact| / domain length for the rightmost shock, via the pressure mid-level."""
    if case.reference != "riemann":
        return None
    ws = wave_structure(case)
    if ws.right_shock is not None:
        exact = case.x0 + ws.right_shock * t
        level = 0.5 * (ws.p_star + case.right.p)
        from_right = True
    elif ws.left_shock is not None:
        exact = case.x0 + ws.left_shock * t
        level = 0.5 * (ws.p_star + case.left.p)
        from_right = False
    else:
        return None
    x, _, _, p, _ = sample_profile(fld)
    num = level_crossing(x, p, level, from_right=from_right)
    length = case.domain[1] - case.domain[0]
    return abs(num - exact) / length if math.isfinite(num) else math.inf


def run_case(cfg: RunConfig, keep_infos: bool = False) -> tuple[RunSummary, object]:
    """Run one configuration to its final time and write the requested files."""
    cfg.validate()
    case = cfg.benchmark
    scheme = cfg.scheme()
    t_final = cfg.t_final if cfg.t_final is not None else case.t_final
    fld = case.initial_field(cfg.n_cells, cfg.r, cfg.kin_degree)

    ledger = ConservationLedger.start(fld)
    bv = WeakBVAccumulator()
    residues = [0.0, 0.0]
    report_rows = []
    mins = [float(fld.rho.min()), float(fld.p.min())]

    def callback(step, t, state, info):
        ledger.record(step, t, state, info)
        bv.add(info.dt, state)
        if cfg.correction:
            residues[0] = max(residues[0], float(np.max(info.residue_m)))
            residues[1] = max(residues[1], float(np.max(info.residue_e)))
            if cfg.corrections is not None:
                for k in range(len(info.r_u)):
                    report_rows.append((step, k, abs(info.r_u[k]), abs(info.r_e[k]), info.residue_m[k], info.residue_e[k]))
        mins[0] = min(mins[0], float(state.rho.min()))
        mins[1] = min(mins[1], float(state.p.min()))

    result = advance(fld, t_final, scheme, callback=callback)
    out = result.field

    l1 = None
    if case.reference != "none":
        l1 = l1_error(out, lambda x: case.exact(x, result.t))
    shock = shock_position_error(case, out, result.t)
    dm, de = ledger.max_drift()
    summary = RunSummary(
        cfg, result.t, result.steps, result.halvings, l1, dm, de, float(ledger.mass_drift()), bv.report,
        residues[0], residues[1], shock, shock is not None and shock > SHOCK_FLAG_FRACTION, mins[0], mins[1],
    )
    if cfg.profile:
        write_profile(out, cfg.profile)
    if cfg.series:
        write_series(ledger, cfg.series)
    if cfg.summary:
        write_summary(summary, cfg.summary)
    if cfg.corrections:
        write_correction_report(report_rows, cfg.corrections)
    return summary, result


# convergence

def observed_orders(errors) -> list[float]:
    """log2 ratios of successive errors (mesh doubling)."""
    e = np.asarray(errors, dtype=float)
    return [float(np.log2(e[i] / e[i + 1])) for i in range(len(e) - 1)]


def fitted_order(ns, errors) -> float:
    """Least-squares slope of -log(error) against log(n)."""
    slope, _ = np.polyfit(np.log(np.asarray(ns, float)), np.log(np.asarray(errors, float)), 1)
    return float(-slope)


def convergence_study(base: RunConfig, meshes=(50, 100, 200, 400)) -> list[dict]:
    rows = []
    for n in meshes:
        summary, _ = run_case(replace(base, n_cells=n, profile=None, series=None, summary=None, corrections=None))
        if summary.l1 is None:
            raise _err("case", f"{base.case!r} has no exact reference")
        rows.append({"n": n, **{f"l1_{k}": v for k, v in summary.l1.items()}})
    for var in ("rho", "u", "p"):
        orders = observed_orders([r[f"l1_{var}"] for r in rows])
        rows[0][f"order_{var}"] = math.nan
        for i, o in enumerate(orders, 1):
            rows[i][f"order_{var}"] = o
    return rows


CONVERGENCE_HEADER = ("n", "l1_rho", "l1_u", "l1_p", "order_rho", "order_u", "order_p")


def write_table(rows, header, path) -> None:
    try:
        with Path(path).open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for row in rows:
                w.writerow([v if isinstance(v, str) else (str(v) if isinstance(v, int) else repr(float(v)))
                            for v in (row[k] for k in header)])
    except OSError as exc:
        raise OSError(f"cannot write table to {path}: {exc}") from exc


# stability matrix

STABILITY_LAYOUTS = {"K1T0": (0, 1), "K1T1": (1, 1), "K2T1": (1, 2)}
STABILITY_TIME = 0.15  # past the gradient catastrophe (t ~ 0.102) of the smooth data
GROWTH_LIMIT = 1e3


class _NormBlowUp(Exception):
    def __init__(self, step, t):
        self.step, self.t = step, t


def stability_run(flux: str, layout: str, n_cells: int = 100, t_final: float = STABILITY_TIME,
                  cfl: float | None = None) -> dict:
    """Smooth case, first order in time, no limiting; only flux and degrees vary."""
    r, q = STABILITY_LAYOUTS[layout]
    case = get_case("smooth")
    scheme = SchemeConfig(flux=flux, stabilization="jump", blending="none", time_scheme="euler",
                          cfl=case.cfl if cfl is None else cfl)
    fld = case.initial_field(n_cells, r, q)

    def norm(f):
        return max(np.abs(f.rho).max(), np.abs(f.u).max(), np.abs(f.e).max())

    n0 = norm(fld)
    growth = [1.0]
    last = [0, 0.0]

    def callback(step, t, state, info):
        last[:] = [step, t]
        g = norm(state) / n0
        growth[0] = max(growth[0], g)
        if g > GROWTH_LIMIT:
            raise _NormBlowUp(step, t)

    row = {"flux": flux, "layout": layout, "outcome": "stable", "step": "", "t": "", "growth": 1.0}
    try:
        res = advance(fld, t_final, scheme, callback=callback)
        row.update(step=str(res.steps), t=repr(res.t))
    except _NormBlowUp as exc:
        row.update(outcome="blowup", step=str(exc.step), t=repr(exc.t))
    except (BlowUpError, PositivityError) as exc:
        # failing step is the one after the last completed step
        row.update(outcome="blowup", step=str(last[0]), t=repr(last[1]))
        row["reason"] = str(exc)
    row["growth"] = growth[0]
    return row


def stability_matrix(n_cells: int = 100, t_final: float = STABILITY_TIME, cfl: float | None = None) -> list[dict]:
    return [stability_run(f.value, lay, n_cells, t_final, cfl) for f in FluxChoice for lay in STABILITY_LAYOUTS]


STABILITY_HEADER = ("flux", "layout", "outcome", "step", "t", "growth")


# click front end

def _options(fn):
    opts = [
        click.option("--case", default=None, help="sod | strong | 123 | severe | smooth"),
        click.option("--n-cells", "n_cells", default=None, help="number of elements"),
        click.option("--r", "r", default=None, help="thermodynamic degree (0 or 1)"),
        click.option("--kin-degree", "kin_degree", default=None, help="velocity degree override"),
        click.option("--allow-equal-degree", "allow_equal_degree", default=None, help="on/off, permits K(r)T(r)"),
        click.option("--flux", default=None, help="centered | exact | hllc"),
        click.option("--stabilization", default=None, help="none | llf | jump"),
        click.option("--blending", default=None, help="none | proc1 | proc2"),
        click.option("--correction", default=None, help="on | off"),
        click.option("--time-scheme", "time_scheme", default=None, help="euler | dec2"),
        click.option("--mass-matrix", "mass_matrix", default=None, help="on/off, consistent-mass term in dec2"),
        click.option("--cfl", default=None),
        click.option("--theta", default=None),
        click.option("--t-final", "t_final", default=None),
        click.option("--config", "config_path", default=None, type=click.Path(), help="key = value file"),
    ]
    for opt in reversed(opts):
        fn = opt(fn)
    return fn


def _fail(code: int, msg: str):
    click.echo(msg, err=True)
    sys.exit(code)


def _guarded(fn):
    try:
        return fn()
    except ConfigError as exc:
        _fail(EXIT_CONFIG, f"config error: {exc}")
    except StateError as exc:
        _fail(EXIT_CONFIG, f"invalid initial state: {exc}")
    except BlowUpError as exc:
        _fail(EXIT_BLOWUP, f"blow-up: {exc}")
    except PositivityError as exc:
        _fail(EXIT_POSITIVITY, f"positivity abort: {exc}")
    except OSError as exc:
        _fail(1, str(exc))


@click.group()
def main():
    """Staggered residual-distribution solver for the 1D Euler equations."""


@main.command()
@_options
@click.option("--profile", default=None, help="profile CSV path")
@click.option("--series", default=None, help="time-series CSV path")
@click.option("--summary", default=None, help="summary CSV path")
@click.option("--corrections", default=None, help="per-element correction CSV path")
def run(config_path, **flags):
    """Run one case to its final time."""

    def body():
        cfg = parse_config(config_path, flags)
        summary, _ = run_case(cfg)
        for k, v in summary.rows():
            click.echo(f"{k} = {v}")
        if summary.shock_flag:
            click.echo(f"warning: shock position off by {summary.shock_error:.3%} of the domain", err=True)

    _guarded(body)


@main.command()
@_options
@click.option("--meshes", default="50,100,200,400", help="comma-separated element counts")
@click.option("--output", default=None, help="CSV table path")
def converge(config_path, meshes, output, **flags):
    """Mesh-refinement study against the exact solution."""

    def body():
        defaults = {"case": "smooth", "r": "1", "time_scheme": "dec2"}
        try:
            ns = [int(s) for s in meshes.split(",") if s.strip()]
        except ValueError:
            raise _err("meshes", f"invalid list {meshes!r}") from None
        if not ns:
            raise _err("meshes", "empty list")
        cfg = parse_config(config_path, flags, defaults)
        rows = convergence_study(cfg, ns)
        click.echo(",".join(CONVERGENCE_HEADER))
        for row in rows:
            click.echo(",".join(f"{row[k]:.6g}" if isinstance(row[k], float) else str(row[k]) for k in CONVERGENCE_HEADER))
        click.echo(f"fitted order rho = {fitted_order(ns, [r['l1_rho'] for r in rows]):.3f}")
        if output:
            write_table(rows, CONVERGENCE_HEADER, output)

    _guarded(body)


@main.command()
@click.option("--n-cells", "n_cells", default=100, type=int)
@click.option("--t-final", "t_final", default=STABILITY_TIME, type=float)
@click.option("--cfl", default=None, type=float)
@click.option("--output", default=None, help="CSV table path")
def stability(n_cells, t_final, cfl, output):
    """Flux x degree stability matrix on the smooth case."""

    def body():
        if n_cells < 2 or not t_final > 0 or (cfl is not None and not cfl > 0):
            raise _err("stability", "n_cells >= 2, t_final > 0 and cfl > 0 required")
        rows = stability_matrix(n_cells, t_final, cfl)
        for row in rows:
            where = f" (step {row['step']}, t={row['t']})" if row["outcome"] == "blowup" else ""
            click.echo(f"{row['flux']:9s} {row['layout']}  {row['outcome']}{where}  growth={row['growth']:.3g}")
        if output:
            write_table(rows, STABILITY_HEADER, output)

    _guarded(body)


@main.command()
def cases():
    """List the builtin benchmark cases."""
    for name, c in builtin_cases().items():
        extra = f" x0={c.x0}" if c.x0 is not None else ""
        click.echo(f"{name:7s} domain={c.domain} T={c.t_final} cfl={c.cfl} gamma={c.gamma} "
                   f"boundary={c.boundary.value} reference={c.reference}{extra}")


if __name__ == "__main__":
    main()
