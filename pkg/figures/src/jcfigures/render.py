"""Render the six figure-style plots from scenario CSV files.

figures --fig N --in file.csv [--in file2.csv] --out image

Styling is fixed (deterministic): the target inversion is a solid blue
line, couplings are dashed orange on a second vertical axis, reproduced
curves are dash-dotted green.  Figures 1, 2 and 4 use dual vertical axes
(inversion left, coupling right); figure 3 plots the deformation
differences; figure 6 overlays the constant- and time-dependent-coupling
inversions from its two input files.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .csvio import ColumnError, CsvData, EmptyDataError, MetadataError, read_csv

INVERSION_STYLE = {"color": "tab:blue", "linestyle": "-", "linewidth": 1.2}
COUPLING_STYLE = {"color": "tab:orange", "linestyle": "--", "linewidth": 1.2}
REPRODUCED_STYLE = {"color": "tab:green", "linestyle": "-.", "linewidth": 1.0}
CONSTANT_CASE_STYLE = {"color": "tab:green", "linestyle": "--", "linewidth": 1.2}

#: columns each figure needs from its (first) input CSV
REQUIRED_COLUMNS = {
    1: ("t", "target_w", "coupling"),
    2: ("t", "target_w", "coupling"),
    3: ("t", "delta_w", "delta_lambda"),
    4: ("t", "target_w", "coupling"),
    5: ("t", "target_w", "coupling", "reproduced_w"),
    6: ("t", "target_w", "reproduced_w"),
}
DUAL_AXIS_FIGURES = (1, 2, 3, 4, 5)


@dataclass(frozen=True)
class FigureSpec:
    """One rendering request: figure id, input CSV(s), output image path."""

    figure_id: int
    inputs: tuple[Path, ...]
    output: Path
    xlabel: str = "t"
    ylabel: str = ""
    dual_axis: bool = field(init=False)

    def __post_init__(self):
        if self.figure_id not in REQUIRED_COLUMNS:
            raise ValueError(f"figure id must be 1..6, got {self.figure_id}")
        if not self.inputs:
            raise ValueError("at least one input CSV is required")
        if self.figure_id == 6 and len(self.inputs) < 2:
            raise ValueError(
                "figure 6 overlays the constant- and time-dependent-coupling "
                "runs: pass both CSVs via repeated --in"
            )
        object.__setattr__(self, "dual_axis", self.figure_id in DUAL_AXIS_FIGURES)


def _check_metadata(spec: FigureSpec, data: CsvData) -> None:
    scenario = data.metadata.get("scenario")
    if scenario is not None and not scenario.startswith(f"fig{spec.figure_id}"):
        raise MetadataError(
            f"{data.path}: metadata says scenario {scenario!r}, "
            f"which does not belong to figure {spec.figure_id}"
        )


def render(spec: FigureSpec) -> Path:
    """Render one figure; raises before any file is written on bad input."""
    primary = read_csv(spec.inputs[0])
    _check_metadata(spec, primary)
    primary.require(REQUIRED_COLUMNS[spec.figure_id])

    extra = None
    if spec.figure_id == 6:
        extra = read_csv(spec.inputs[1])
        extra.require(("t", "reproduced_w"))

    fig, ax = plt.subplots(figsize=(6.4, 4.0), dpi=150)
    t = primary["t"]

    if spec.figure_id in (1, 2, 4):
        ax.plot(t, primary["target_w"], label="inversion", **INVERSION_STYLE)
        ax.set_ylabel(spec.ylabel or "W(t)", color=INVERSION_STYLE["color"])
        ax2 = ax.twinx()
        ax2.plot(t, primary["coupling"], label="coupling", **COUPLING_STYLE)
        ax2.set_ylabel("lambda(t)", color=COUPLING_STYLE["color"])
    elif spec.figure_id == 3:
        ax.plot(t, primary["delta_w"], label="delta W", **INVERSION_STYLE)
        ax.set_ylabel(spec.ylabel or "delta W(t)", color=INVERSION_STYLE["color"])
        ax2 = ax.twinx()
        ax2.plot(t, primary["delta_lambda"], label="delta lambda", **COUPLING_STYLE)
        ax2.set_ylabel("delta lambda(t)", color=COUPLING_STYLE["color"])
    elif spec.figure_id == 5:
        ax.plot(t, primary["target_w"], label="target", **INVERSION_STYLE)
        ax.plot(t, primary["reproduced_w"], label="reproduced", **REPRODUCED_STYLE)
        ax.set_ylabel(spec.ylabel or "W(t)")
        ax.legend(loc="upper right", frameon=False)
        ax2 = ax.twinx()
        ax2.plot(t, primary["coupling"], label="sector-0 coupling", **COUPLING_STYLE)
        ax2.set_ylabel("lambda(t)", color=COUPLING_STYLE["color"])
    else:  # figure 6
        ax.plot(t, primary["reproduced_w"], label="time-dependent coupling",
                **INVERSION_STYLE)
        ax.plot(extra["t"], extra["reproduced_w"], label="constant coupling",
                **CONSTANT_CASE_STYLE)
        ax.set_ylabel(spec.ylabel or "W(t)")
        ax.legend(loc="upper right", frameon=False)

    ax.set_xlabel(spec.xlabel)
    fig.tight_layout()
    spec.output.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(spec.output)
    plt.close(fig)
    return spec.output


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="figures",
        description="Render a figure-style plot from jcsynth scenario CSV output.",
    )
    parser.add_argument("--fig", type=int, required=True, metavar="N",
                        help="figure id, 1..6")
    parser.add_argument("--in", dest="inputs", action="append", required=True,
                        metavar="CSV", help="input CSV (repeat for figure 6)")
    parser.add_argument("--out", required=True, help="output image path")
    parser.add_argument("--xlabel", default="t", help="x-axis label")
    parser.add_argument("--ylabel", default="", help="left y-axis label")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        spec = FigureSpec(
            figure_id=args.fig,
            inputs=tuple(Path(p) for p in args.inputs),
            output=Path(args.out),
            xlabel=args.xlabel,
            ylabel=args.ylabel,
        )
        render(spec)
    except (ColumnError, EmptyDataError, MetadataError, ValueError) as exc:
        print(f"figures: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"figures: i/o error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
