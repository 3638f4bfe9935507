"""Panel layouts: which CSV feeds which axes, and the fixed style rules.

Line-style rule (fixed across every figure): solid lines are scheme A,
dashed lines are scheme B; the m = 0 series is the shared original
interferometer.  Colors encode the photon-added number.
"""

from __future__ import annotations

from dataclasses import dataclass, field

SCHEME_STYLES = {"a": "-", "b": "--"}
M_COLORS = {0: "black", 1: "tab:blue", 2: "tab:orange", 3: "tab:green",
            4: "tab:red", 5: "tab:purple"}

AXIS_LABELS = {
    "phi": r"$\phi$",
    "alpha": r"$\alpha$",
    "r": r"$r$",
    "T": r"$T$",
    "eta": r"$\eta$",
    "m": r"$m$",
}


@dataclass(frozen=True)
class PanelSpec:
    """One subplot: a CSV, the y columns, and the grouping of its rows."""

    csv_name: str
    ylabel: str
    y_columns: tuple[str, ...] = ("delta_phi",)
    group_keys: tuple[str, ...] = ("scheme", "m")
    limit_columns: tuple[str, ...] = ()  # overlaid reference curves
    title: str = ""
    logy: bool = False


@dataclass(frozen=True)
class PanelLayout:
    figure_id: str
    panels: tuple[PanelSpec, ...]
    ncols: int = 2


_SENS = r"phase sensitivity $\Delta\phi$"


def layout_for(figure_id: str) -> PanelLayout:
    fid = figure_id.upper()
    if fid == "F2":
        return PanelLayout("F2", (
            PanelSpec("fig2_a", _SENS, title="intensity difference", logy=True),
            PanelSpec("fig2_b", _SENS, title="homodyne", logy=True),
        ))
    if fid == "F3":
        return PanelLayout("F3", (
            PanelSpec("fig3_a", _SENS, title="intensity difference"),
            PanelSpec("fig3_b", _SENS, title="intensity difference"),
            PanelSpec("fig3_c", _SENS, title="homodyne"),
            PanelSpec("fig3_d", _SENS, title="homodyne"),
        ))
    if fid == "F4":
        decomposed = ("sigma", "slope")
        return PanelLayout("F4", (
            PanelSpec("fig4_a", "standard deviation / slope", decomposed,
                      ("detector",), title="intensity difference"),
            PanelSpec("fig4_b", "standard deviation / slope", decomposed,
                      ("detector",), title="intensity difference"),
            PanelSpec("fig4_c", "standard deviation / slope", decomposed,
                      ("detector",), title="homodyne"),
            PanelSpec("fig4_d", "standard deviation / slope", decomposed,
                      ("detector",), title="homodyne"),
        ))
    if fid == "F5":
        return PanelLayout("F5", (
            PanelSpec("fig5_a", _SENS, title="intensity difference"),
            PanelSpec("fig5_b", _SENS, title="homodyne"),
        ))
    if fid == "F6":
        return PanelLayout("F6", tuple(
            PanelSpec(f"fig6_m{m}", _SENS,
                      group_keys=("scheme", "m", "detector"),
                      limit_columns=("sql", "hl"), title=f"m = {m}")
            for m in range(4)))
    if fid == "F7":
        return PanelLayout("F7", (
            PanelSpec("fig7_a", "QFI", ("f_ideal",)),
            PanelSpec("fig7_b", "QFI", ("f_ideal",)),
        ))
    if fid == "F8":
        return PanelLayout("F8", (
            PanelSpec("fig8_a", r"$\Delta\phi_{QCRB}$", ("qcrb_ideal",)),
            PanelSpec("fig8_b", r"$\Delta\phi_{QCRB}$", ("qcrb_ideal",)),
        ))
    if fid == "F9":
        return PanelLayout("F9", (
            PanelSpec("fig9_a", r"mean photon number $N$", ("n_total",)),
            PanelSpec("fig9_b", r"mean photon number $N$", ("n_total",)),
        ))
    if fid == "F11":
        return PanelLayout("F11", (
            PanelSpec("fig11_a", "QFI", ("f_lossy",)),
            PanelSpec("fig11_b", r"$\Delta\phi_{QCRB}$", ("qcrb_lossy",)),
        ))
    raise ValueError(f"unknown figure id {figure_id!r}")
