"""Conservation audit, weak-BV statistic, front detection and CSV output."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

import numpy as np

from .mesh import StaggeredField, eval_field
from .reference import N_SAMPLES, sample_points

SERIES_HEADER = ("step", "t", "mass", "momentum", "energy", "rel_drift_m", "rel_drift_E", "max_ru", "max_re")
PROFILE_HEADER = ("x", "rho", "u", "p", "e")


def conservation_totals(fld: StaggeredField) -> tuple[float, float, float]:
    """Integrals of rho, rho u and E = e + rho u^2 / 2 over the mesh.

    The 5-point Gauss rule integrates all three products exactly for the
    degrees used here.
    """
    L = fld.layout
    rho, u, e, *_ = fld.at_quadrature()
    mass = L.integrate(rho).sum()
    momentum = L.integrate(rho * u).sum()
    energy = L.integrate(e + 0.5 * rho * u * u).sum()
    return float(mass), float(momentum), float(energy)


def _momentum_scale(fld: StaggeredField) -> float:
    rho, u, *_ = fld.at_quadrature()
    return float(fld.layout.integrate(np.abs(rho * u)).sum())


@dataclass
class SeriesRow:
    step: int
    t: float
    mass: float
    momentum: float
    energy: float
    rel_drift_m: float
    rel_drift_E: float
    max_ru: float
    max_re: float

    def values(self):
        return (self.step, self.t, self.mass, self.momentum, self.energy,
                self.rel_drift_m, self.rel_drift_E, self.max_ru, self.max_re)


@dataclass
class ConservationLedger:
    """Totals per step plus the time-integrated boundary fluxes.

    The drift of a quantity Q is ``Q(t) + int_0^t (F_out - F_in) dt - Q(0)``,
    relative to ``|Q(0)|``.  Momentum can start at zero (fluid at rest), so its
    scale is ``max(|M(0)|, int |rho u| dx)`` at the current step.
    """

    initial: tuple[float, float, float]
    rows: list[SeriesRow] = field(default_factory=list)
    boundary: np.ndarray = field(default_factory=lambda: np.zeros(3))
    periodic: bool = False

    @classmethod
    def start(cls, fld: StaggeredField) -> "ConservationLedger":
        totals = conservation_totals(fld)
        led = cls(totals, periodic=fld.layout.mesh.periodic)
        led.rows.append(SeriesRow(0, 0.0, *totals, 0.0, 0.0, 0.0, 0.0))
        return led

    def record(self, step: int, t: float, fld: StaggeredField, info=None) -> SeriesRow:
        if info is not None and not self.periodic and info.residuals is not None:
            flux = info.residuals.faces.flux
            self.boundary += info.dt * (flux[:, -1] - flux[:, 0])
        mass, mom, en = conservation_totals(fld)
        m0, q0, e0 = self.initial
        tiny = np.finfo(float).tiny
        drift_q = (mom + self.boundary[1] - q0) / max(abs(q0), _momentum_scale(fld), tiny)
        drift_e = (en + self.boundary[2] - e0) / max(abs(e0), tiny)
        max_ru = float(np.max(np.abs(info.r_u))) if info is not None else 0.0
        max_re = float(np.max(np.abs(info.r_e))) if info is not None else 0.0
        row = SeriesRow(step, t, mass, mom, en, float(drift_q), float(drift_e), max_ru, max_re)
        self.rows.append(row)
        return row

    def mass_drift(self) -> float:
        if not self.rows:
            return 0.0
        m0 = self.initial[0]
        return (self.rows[-1].mass + self.boundary[0] - m0) / max(abs(m0), np.finfo(float).tiny)

    def max_drift(self) -> tuple[float, float]:
        if not self.rows:
            return 0.0, 0.0
        return (max(abs(r.rel_drift_m) for r in self.rows), max(abs(r.rel_drift_E) for r in self.rows))


@dataclass
class WeakBVReport:
    rho: float = 0.0
    u: float = 0.0
    e: float = 0.0

    def as_dict(self) -> dict[str, float]:
        return {"rho": self.rho, "u": self.u, "e": self.e}


def weak_bv_increment(fld: StaggeredField, dt: float) -> WeakBVReport:
    """dt * sum_K |K| sum_sigma |v_sigma - mean_K v| for rho, u and e."""
    h = fld.layout.mesh.h

    def term(v):
        return float(dt * np.sum(h * np.sum(np.abs(v - v.mean(axis=1, keepdims=True)), axis=1)))

    return WeakBVReport(term(fld.rho), term(fld.u_local), term(fld.e))


class WeakBVAccumulator:
    """Running weak-BV statistic; feed it (dt, state after the step)."""

    def __init__(self):
        self.report = WeakBVReport()

    def add(self, dt: float, fld: StaggeredField) -> None:
        inc = weak_bv_increment(fld, dt)
        self.report.rho += inc.rho
        self.report.u += inc.u
        self.report.e += inc.e


def weak_bv(history: Iterable[tuple[float, StaggeredField]]) -> WeakBVReport:
    acc = WeakBVAccumulator()
    for dt, fld in history:
        acc.add(dt, fld)
    return acc.report


def sample_profile(fld: StaggeredField, n_samples: int = N_SAMPLES):
    mesh = fld.layout.mesh
    x = sample_points((mesh.nodes[0], mesh.nodes[-1]), n_samples)
    return x, eval_field(fld, "rho", x), eval_field(fld, "u", x), eval_field(fld, "p", x), eval_field(fld, "e", x)


def _fmt(v) -> str:
    return repr(float(v))


def _write_rows(path, header, rows, kind: str) -> None:
    path = Path(path)
    try:
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for row in rows:
                w.writerow(row)
    except OSError as exc:
        raise OSError(f"cannot write {kind} to {path}: {exc}") from exc


def write_profile(fld: StaggeredField, path, n_samples: int = N_SAMPLES) -> None:
    """Profile CSV x, rho, u, p, e (volumetric internal energy) at cell-midpoint samples."""
    cols = sample_profile(fld, n_samples)
    rows = ([_fmt(c[i]) for c in cols] for i in range(n_samples))
    _write_rows(path, PROFILE_HEADER, rows, "profile")


def write_series(ledger: ConservationLedger | Iterable[SeriesRow], path) -> None:
    rows = ledger.rows if isinstance(ledger, ConservationLedger) else list(ledger)
    out = ([str(r.step), *(_fmt(v) for v in r.values()[1:])] for r in rows)
    _write_rows(path, SERIES_HEADER, out, "series")


def read_csv(path) -> tuple[list[str], np.ndarray]:
    with Path(path).open() as fh:
        reader = csv.reader(fh)
        header = next(reader)
        data = [[float(v) for v in row] for row in reader]
    return header, np.array(data, dtype=float).reshape(len(data), len(header))


# front detection

def level_crossing(x, v, level: float, from_right: bool = True) -> float:
    """Location where ``v`` crosses ``level``, scanning from one end (linear interpolation).

    Used for shock positions: the outermost crossing of the mid-level between
    the pre- and post-shock values.
    """
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    above = v > level
    idx = np.nonzero(above[1:] != above[:-1])[0]
    if idx.size == 0:
        return float("nan")
    i = idx[-1] if from_right else idx[0]
    v0, v1 = v[i], v[i + 1]
    return float(x[i] + (level - v0) / (v1 - v0) * (x[i + 1] - x[i]))


def steep_fronts(x, v, window: float = 0.01, rel_jump: float = 0.1) -> np.ndarray:
    """Locations of distinct steep-gradient regions of ``v``, left to right.

    A front is a run of samples where the change of ``v`` across ``window``
    exceeds ``rel_jump`` times the range of ``v``; runs closer than ``window``
    merge.  Each front is reported at its steepest sample pair.  Measuring the
    jump over a window, not the pointwise slope, keeps smeared contacts
    visible next to sharp shocks.
    """
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    span = float(v.max() - v.min()) if v.size else 0.0
    if v.size < 2 or span == 0.0:
        return np.empty(0)
    k = max(1, int(round(window / float(np.median(np.diff(x))))))
    k = min(k, v.size - 1)
    jump = np.abs(v[k:] - v[:-k]) / span
    slope = np.abs(np.diff(v) / np.diff(x))
    fronts: list[list[int]] = []
    for i in np.nonzero(jump >= rel_jump)[0]:
        if fronts and i - fronts[-1][-1] <= k:
            fronts[-1].append(i)
        else:
            fronts.append([i])
    out = []
    for run in fronts:
        lo, hi = run[0], run[-1] + k
        j = lo + int(np.argmax(slope[lo:hi]))
        out.append(0.5 * (x[j] + x[j + 1]))
    return np.array(out)
