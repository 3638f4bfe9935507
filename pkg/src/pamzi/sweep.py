"""Parameter sweeps, figure datasets, and the CSV contract.

One row per (axis value, scheme, m, detector) in deterministic order:

    axis,value,scheme,m,detector,phi,delta_phi,sigma,slope,n_total,sql,hl,
    f_ideal,f_lossy,qcrb_ideal,qcrb_lossy,status

Floats carry 17 significant digits, NaN is spelled ``NaN``; singular rows
keep their Fisher columns and get status ``zero_slope`` instead of aborting
the sweep.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import metrology as met
from .core import Detector, ExperimentParams, Scheme, validate
from .errors import NoFinitePointError, ZeroSlopeError

COLUMNS = ["axis", "value", "scheme", "m", "detector", "phi", "delta_phi",
           "sigma", "slope", "n_total", "sql", "hl", "f_ideal", "f_lossy",
           "qcrb_ideal", "qcrb_lossy", "status"]

AXES = ("phi", "alpha", "r", "T", "eta", "m")

MAX_STEPS = 100_000


@dataclass(frozen=True)
class SweepSpec:
    """One sweep: an axis, its values, and the fixed baseline."""

    axis: str
    values: tuple[float, ...]
    fixed: ExperimentParams = field(default_factory=ExperimentParams)
    schemes: tuple[Scheme, ...] = (Scheme.A, Scheme.B)
    ms: tuple[int, ...] = (0, 1, 2, 3)
    detectors: tuple[Detector, ...] = (Detector.INTENSITY_DIFF,
                                       Detector.HOMODYNE)
    optimize_phi: bool = False

    def __post_init__(self):
        if self.axis not in AXES:
            raise ValueError(f"axis must be one of {AXES}")
        if not self.values:
            raise ValueError("sweep needs at least one axis value")
        if len(self.values) > MAX_STEPS:
            raise ValueError(f"at most {MAX_STEPS} steps per sweep")


def sweep_range(start: float, stop: float, steps: int) -> tuple[float, ...]:
    return tuple(float(v) for v in np.linspace(start, stop, steps))


def _apply_axis(base: ExperimentParams, axis: str, value) -> ExperimentParams:
    if axis == "alpha":
        return base.with_(alpha_mag=float(value))
    if axis == "m":
        return base.with_(m=int(value))
    return base.with_(**{axis: float(value)})


def _scheme_for(scheme: Scheme, m: int) -> Scheme:
    return Scheme.ORIGINAL if m == 0 else scheme


def _row(spec: SweepSpec, value, scheme: Scheme, m: int, detector: Detector,
         qfi_cache: dict) -> dict:
    params = _apply_axis(spec.fixed.with_(m=m, scheme=_scheme_for(scheme, m)),
                         spec.axis, value)
    if spec.axis == "m":
        m = params.m
        params = params.with_(scheme=_scheme_for(scheme, m))
    eff_scheme = params.scheme
    validate(params)

    row = {"axis": spec.axis, "value": value, "scheme": scheme.value, "m": m,
           "detector": detector.value, "status": "ok"}

    # the Fisher quantities ignore phi and T, so they are shared across
    # those axes
    qkey = (eff_scheme, params.alpha_mag, params.theta_alpha, params.r,
            params.m, params.eta)
    if qkey not in qfi_cache:
        qfi_cache[qkey] = met.qfi_report(eff_scheme, params)
    qr = qfi_cache[qkey]
    row.update(f_ideal=qr.f_ideal, f_lossy=qr.f_lossy,
               qcrb_ideal=qr.qcrb_ideal, qcrb_lossy=qr.qcrb_lossy)

    try:
        if spec.optimize_phi and spec.axis != "phi":
            phi_opt, rep = met.optimize_phase(detector, eff_scheme, params)
        else:
            rep = met.sensitivity(detector, eff_scheme, params)
        row.update(phi=rep.phi, delta_phi=rep.delta_phi, sigma=rep.sigma,
                   slope=rep.slope, n_total=rep.n_total, sql=rep.sql,
                   hl=rep.hl)
    except (ZeroSlopeError, NoFinitePointError):
        n_total = met.total_photon_number(eff_scheme, params)
        sql, hl = met._limits(n_total)
        row.update(phi=params.phi, delta_phi=math.nan, sigma=math.nan,
                   slope=math.nan, n_total=n_total, sql=sql, hl=hl,
                   status="zero_slope")
    return row


def run_sweep(spec: SweepSpec) -> list[dict]:
    """All rows, axis-major then scheme, m, detector.

    m = 0 collapses both schemes onto the original interferometer, so that
    block is emitted once (under the first scheme label).
    """
    rows = []
    qfi_cache: dict = {}
    for value in spec.values:
        for scheme in spec.schemes:
            for m in spec.ms:
                if spec.axis == "m" and m != spec.ms[0]:
                    continue  # the axis provides m; emit one block per scheme
                eff_m = int(value) if spec.axis == "m" else m
                if eff_m == 0 and scheme != spec.schemes[0]:
                    continue
                for det in spec.detectors:
                    rows.append(_row(spec, value, scheme, m, det, qfi_cache))
    return rows


def format_value(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    f = float(v)
    if math.isnan(f):
        return "NaN"
    return f"{f:.17g}"


def write_csv(rows: list[dict], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(COLUMNS) + "\n")
        for row in rows:
            fh.write(",".join(format_value(row[c]) for c in COLUMNS) + "\n")


# ---------------------------------------------------------------------------
# figure jobs
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FigurePanel:
    name: str
    spec: SweepSpec


FIGURE_IDS = ("F2", "F3", "F4", "F5", "F6", "F7", "F8", "F9", "F11")

_IDIFF = (Detector.INTENSITY_DIFF,)
_HOMO = (Detector.HOMODYNE,)
_BASE11 = ExperimentParams(alpha_mag=1.0, r=1.0, phi=math.pi / 2)


def _phi_axis(steps: int) -> tuple[float, ...]:
    return tuple(float(v) for v in np.linspace(0.0, math.pi, steps + 2)[1:-1])


def figure_panels(figure_id: str, steps: int | None = None) -> list[FigurePanel]:
    """Panel sweeps for one figure, parameters baked in from the captions."""
    fid = figure_id.upper()
    if fid not in FIGURE_IDS:
        raise ValueError(f"unknown figure id {figure_id!r}; pick from {FIGURE_IDS}")

    def n(default: int) -> int:
        return default if steps is None else steps

    alpha_ax = sweep_range(0.02, 3.0, n(60))
    r_ax = sweep_range(0.0, 1.5, n(60))
    t_ax = sweep_range(0.02, 1.0, n(50))
    eta_ax = sweep_range(0.02, 1.0, n(50))

    if fid == "F2":
        values = _phi_axis(n(400))
        return [
            FigurePanel("fig2_a", SweepSpec("phi", values, _BASE11, detectors=_IDIFF)),
            FigurePanel("fig2_b", SweepSpec("phi", values, _BASE11, detectors=_HOMO)),
        ]
    if fid == "F3":
        a_base = _BASE11
        r_base = _BASE11
        return [
            FigurePanel("fig3_a", SweepSpec("alpha", alpha_ax, a_base, detectors=_IDIFF, optimize_phi=True)),
            FigurePanel("fig3_b", SweepSpec("r", r_ax, r_base, detectors=_IDIFF, optimize_phi=True)),
            FigurePanel("fig3_c", SweepSpec("alpha", alpha_ax, a_base, detectors=_HOMO, optimize_phi=True)),
            FigurePanel("fig3_d", SweepSpec("r", r_ax, r_base, detectors=_HOMO, optimize_phi=True)),
        ]
    if fid == "F4":
        only0 = (0,)
        one = (Scheme.A,)
        return [
            FigurePanel("fig4_a", SweepSpec("alpha", alpha_ax, _BASE11, schemes=one, ms=only0, detectors=_IDIFF, optimize_phi=True)),
            FigurePanel("fig4_b", SweepSpec("r", r_ax, _BASE11, schemes=one, ms=only0, detectors=_IDIFF, optimize_phi=True)),
            FigurePanel("fig4_c", SweepSpec("alpha", alpha_ax, _BASE11, schemes=one, ms=only0, detectors=_HOMO, optimize_phi=True)),
            FigurePanel("fig4_d", SweepSpec("r", r_ax, _BASE11, schemes=one, ms=only0, detectors=_HOMO, optimize_phi=True)),
        ]
    if fid == "F5":
        return [
            FigurePanel("fig5_a", SweepSpec("T", t_ax, _BASE11, detectors=_IDIFF, optimize_phi=True)),
            FigurePanel("fig5_b", SweepSpec("T", t_ax, _BASE11, detectors=_HOMO, optimize_phi=True)),
        ]
    if fid == "F6":
        base = ExperimentParams(alpha_mag=2.0, r=0.6, phi=math.pi / 2)
        t6 = sweep_range(0.02, 1.0, n(25))
        return [
            FigurePanel(f"fig6_m{m}",
                        SweepSpec("T", t6, base, ms=(m,), optimize_phi=True))
            for m in range(4)
        ]
    if fid in ("F7", "F8", "F9"):
        tag = {"F7": "fig7", "F8": "fig8", "F9": "fig9"}[fid]
        return [
            FigurePanel(f"{tag}_a", SweepSpec("alpha", alpha_ax, _BASE11, detectors=_IDIFF)),
            FigurePanel(f"{tag}_b", SweepSpec("r", r_ax, _BASE11, detectors=_IDIFF)),
        ]
    # F11
    return [
        FigurePanel("fig11_a", SweepSpec("eta", eta_ax, _BASE11, detectors=_IDIFF)),
        FigurePanel("fig11_b", SweepSpec("eta", eta_ax, _BASE11, detectors=_IDIFF)),
    ]


def run_figure(figure_id: str, out_dir, steps: int | None = None) -> list[str]:
    """Write every panel CSV of one figure; returns the file paths."""
    import os

    os.makedirs(out_dir, exist_ok=True)
    paths = []
    for panel in figure_panels(figure_id, steps):
        rows = run_sweep(panel.spec)
        path = os.path.join(out_dir, f"{panel.name}.csv")
        write_csv(rows, path)
        paths.append(path)
    return paths
