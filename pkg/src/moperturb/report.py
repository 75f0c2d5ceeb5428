"""Robustness tables, perturbation statistics, and physical-change metrics.

Numbers render with one decimal place (two for the physical-change columns)
using half-up rounding. The spread statistic reported per joint is the
population standard deviation; table headers say so explicitly.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from typing import Mapping, Sequence

import numpy as np

from .core import Connectivity, MotionSequence, as_frames, bone_lengths, growth_rate, temporal_derivative

__all__ = [
    "Table",
    "RobustnessRow",
    "round_half_up",
    "format_value",
    "format_value_with_growth",
    "per_joint_stats",
    "physical_change_metrics",
    "build_robustness_rows",
    "robustness_table",
    "frame_vulnerability_table",
    "per_joint_stats_table",
    "physical_change_table",
    "render_markdown",
    "render_csv",
]

FRAME_PARTS = ("whole", "front", "middle", "rear", "last")
ABLATION_MODES = ("none", "temporal_only", "bone_only", "both")


@dataclass
class Table:
    """Rows of preformatted cells; bold marks emphasis in the markdown rendering."""

    columns: list[str]
    rows: list[list[str]]
    bold: set[tuple[int, int]] = field(default_factory=set)  # (row, column) cells


@dataclass(frozen=True)
class RobustnessRow:
    """One row of an epsilon-sweep table.

    label is "clean" or the epsilon value; growth maps each interval to the
    percentage increase over the clean row and is None on the clean row.
    """

    label: str
    errors: dict[float, float]
    growth: dict[float, float] | None = None


def round_half_up(x: float, ndigits: int = 1) -> float:
    """Round on the printed decimal value, ties away from zero."""
    q = Decimal(1).scaleb(-ndigits)
    return float(Decimal(repr(float(x))).quantize(q, rounding=ROUND_HALF_UP))


def format_value(x: float, ndigits: int = 1) -> str:
    return f"{round_half_up(x, ndigits):.{ndigits}f}"


def format_value_with_growth(clean: float, adv: float) -> str:
    """Render an error with its growth over the clean value, e.g. "35.5 (191.0%↑)"."""
    pct = growth_rate(clean, adv)
    arrow = "↑" if pct >= 0 else "↓"
    return f"{format_value(adv)} ({format_value(abs(pct))}%{arrow})"


def per_joint_stats(
    perturbations: Sequence[np.ndarray],
) -> tuple[np.ndarray, np.ndarray]:
    """Mean and population standard deviation of perturbation modulus per joint.

    The modulus is the Euclidean norm of each joint's displacement vector;
    statistics pool all frames of all sequences.
    """
    if len(perturbations) == 0:
        raise ValueError("no perturbations given")
    moduli = []
    j = None
    for arr in perturbations:
        frames = as_frames(arr)
        if j is None:
            j = frames.shape[1]
        elif frames.shape[1] != j:
            raise ValueError("perturbations disagree on joint count")
        moduli.append(np.linalg.norm(frames, axis=2))
    stacked = np.concatenate(moduli, axis=0)  # (sum of T, J)
    return stacked.mean(axis=0), stacked.std(axis=0)


def _pairs(x, xp) -> list[tuple[np.ndarray, np.ndarray]]:
    xs = [x] if isinstance(x, (MotionSequence, np.ndarray)) else list(x)
    xps = [xp] if isinstance(xp, (MotionSequence, np.ndarray)) else list(xp)
    if len(xs) != len(xps):
        raise ValueError("clean and perturbed sets differ in length")
    return [(as_frames(a), as_frames(b)) for a, b in zip(xs, xps)]


def physical_change_metrics(
    x, xp, conn: Connectivity, n_order: int = 2
) -> tuple[float, ...]:
    """Average absolute physical change caused by a perturbation.

    Returns the mean |bone length change| per bone and frame, followed by the
    mean modulus of the per-joint change of each temporal difference up to
    n_order. With the default order this is (bone length, velocity,
    acceleration). Accepts single sequences or matched lists; means pool all
    sequences.
    """
    if n_order < 1:
        raise ValueError("n_order must be at least 1")
    bl_sum = 0.0
    bl_count = 0
    d_sums = np.zeros(n_order)
    d_counts = np.zeros(n_order, dtype=np.intp)
    for a, b in _pairs(x, xp):
        if a.shape != b.shape:
            raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
        diff_bl = np.abs(bone_lengths(a, conn) - bone_lengths(b, conn))
        bl_sum += diff_bl.sum()
        bl_count += diff_bl.size
        for n in range(1, n_order + 1):
            if a.shape[0] < n + 1:
                continue  # order-n difference has no terms for this clip
            dd = temporal_derivative(a, n) - temporal_derivative(b, n)
            moduli = np.linalg.norm(dd, axis=2)
            d_sums[n - 1] += moduli.sum()
            d_counts[n - 1] += moduli.size
    bl_mean = bl_sum / bl_count if bl_count else 0.0
    deriv_means = tuple(
        float(s / c) if c else 0.0 for s, c in zip(d_sums, d_counts)
    )
    return (float(bl_mean),) + deriv_means


def _interval_labels(intervals: Sequence[float]) -> list[str]:
    return [f"{iv:g}" for iv in intervals]


def build_robustness_rows(
    clean: Mapping[float, float],
    per_epsilon: Mapping[float, Mapping[float, float]],
    label: str = "clean",
) -> list[RobustnessRow]:
    """Clean row plus one row per epsilon, growth taken against the clean row."""
    if not per_epsilon:
        raise ValueError("no adversarial results")
    intervals = list(clean.keys())
    for eps, vals in per_epsilon.items():
        if list(vals.keys()) != intervals:
            raise ValueError(f"epsilon {eps} rows use different intervals")
    rows = [RobustnessRow(label, dict(clean))]
    for eps in sorted(per_epsilon):
        errors = dict(per_epsilon[eps])
        growth = {iv: growth_rate(clean[iv], errors[iv]) for iv in intervals}
        rows.append(RobustnessRow(f"eps={eps:g}", errors, growth))
    return rows


def robustness_table(
    clean: Mapping[float, float],
    per_epsilon: Mapping[float, Mapping[float, float]],
    growth: str = "extremes",
    label: str = "clean",
) -> Table:
    """Error table over an epsilon sweep: one clean row, one row per epsilon.

    growth="extremes" annotates only the smallest and largest epsilon rows
    with their growth over the clean row (table style of the sweeps);
    "all" annotates every epsilon row. The worst error per interval is bold.
    """
    if growth not in ("extremes", "all"):
        raise ValueError(f"growth must be 'extremes' or 'all', got {growth!r}")
    data_rows = build_robustness_rows(clean, per_epsilon, label)
    intervals = list(clean.keys())
    annotated = (
        set(range(1, len(data_rows)))
        if growth == "all"
        else {1, len(data_rows) - 1}
    )
    columns = ["Intervals(ms)"] + _interval_labels(intervals)
    rows = []
    for r, row in enumerate(data_rows):
        cells = [row.label]
        for iv in intervals:
            if row.growth is not None and r in annotated:
                cells.append(format_value_with_growth(clean[iv], row.errors[iv]))
            else:
                cells.append(format_value(row.errors[iv]))
        rows.append(cells)
    bold: set[tuple[int, int]] = set()
    for c, iv in enumerate(intervals, start=1):
        worst = max(range(1, len(data_rows)), key=lambda r: data_rows[r].errors[iv])
        bold.add((worst, c))
    return Table(columns, rows, bold)


def frame_vulnerability_table(
    per_part: Mapping[str, Mapping[float, float]],
    clean: Mapping[float, float] | None = None,
) -> Table:
    """Errors when only one history part is attacked; per-column maximum bold.

    per_part must cover whole, front, middle, rear, and last. An optional
    clean row renders first and is excluded from the bolding.
    """
    missing = [p for p in FRAME_PARTS if p not in per_part]
    if missing:
        raise ValueError(f"missing results for parts: {missing}")
    intervals = list(per_part["whole"].keys())
    for part in FRAME_PARTS:
        if list(per_part[part].keys()) != intervals:
            raise ValueError(f"part {part!r} uses different intervals")
    columns = ["Intervals(ms)"] + _interval_labels(intervals)
    rows = []
    if clean is not None:
        rows.append(["clean"] + [format_value(clean[iv]) for iv in intervals])
    offset = len(rows)
    for part in FRAME_PARTS:
        rows.append([part] + [format_value(per_part[part][iv]) for iv in intervals])
    bold = set()
    for c, iv in enumerate(intervals, start=1):
        worst = max(range(len(FRAME_PARTS)), key=lambda r: per_part[FRAME_PARTS[r]][iv])
        bold.add((worst + offset, c))
    return Table(columns, rows, bold)


def per_joint_stats_table(
    stats: Mapping[str, tuple[np.ndarray, np.ndarray]],
    joint_names: Sequence[str] | None = None,
) -> Table:
    """Per-joint perturbation statistics, a (mean, std) row pair per entry."""
    if not stats:
        raise ValueError("no statistics given")
    first_mu = next(iter(stats.values()))[0]
    n = len(first_mu)
    names = list(joint_names) if joint_names else [f"j{k}" for k in range(n)]
    if len(names) != n:
        raise ValueError("joint name count does not match statistics")
    columns = ["run", "stat"] + names
    rows = []
    for label, (mu, sigma) in stats.items():
        rows.append([label, "mean"] + [format_value(v, 3) for v in mu])
        rows.append([label, "std(population)"] + [format_value(v, 3) for v in sigma])
    return Table(columns, rows)


def physical_change_table(
    per_mode: Mapping[str, tuple[Mapping[float, float], tuple[float, float, float]]],
    clean: Mapping[float, float] | None = None,
) -> Table:
    """Constraint-ablation table: errors per interval plus physical changes.

    per_mode maps each constraint mode to (errors by interval, (bone length,
    velocity, acceleration) changes). Bold marks the worst error per interval
    and the smallest change per physical column.
    """
    missing = [m for m in ABLATION_MODES if m not in per_mode]
    if missing:
        raise ValueError(f"missing results for constraint modes: {missing}")
    intervals = list(per_mode["none"][0].keys())
    columns = ["Intervals(ms)"] + _interval_labels(intervals) + ["dBL", "dV", "da"]
    rows = []
    if clean is not None:
        rows.append(["clean"] + [format_value(clean[iv]) for iv in intervals] + ["-", "-", "-"])
    offset = len(rows)
    for mode in ABLATION_MODES:
        errors, changes = per_mode[mode]
        rows.append(
            [mode]
            + [format_value(errors[iv]) for iv in intervals]
            + [format_value(c, 2) for c in changes]
        )
    bold = set()
    for c, iv in enumerate(intervals, start=1):
        worst = max(range(len(ABLATION_MODES)), key=lambda r: per_mode[ABLATION_MODES[r]][0][iv])
        bold.add((worst + offset, c))
    for k in range(3):
        col = 1 + len(intervals) + k
        best = min(range(len(ABLATION_MODES)), key=lambda r: per_mode[ABLATION_MODES[r]][1][k])
        bold.add((best + offset, col))
    return Table(columns, rows, bold)


def render_markdown(table: Table) -> str:
    """Pipe table with bold cells wrapped in double asterisks."""
    lines = ["| " + " | ".join(table.columns) + " |"]
    lines.append("|" + "|".join(" --- " for _ in table.columns) + "|")
    for r, row in enumerate(table.rows):
        cells = [
            f"**{cell}**" if (r, c) in table.bold else cell
            for c, cell in enumerate(row)
        ]
        lines.append("| " + " | ".join(cells) + " |")
    return "\n".join(lines) + "\n"


def render_csv(table: Table) -> str:
    """RFC 4180 style CSV carrying the same cell text, without bold marks."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(table.columns)
    writer.writerows(table.rows)
    return buf.getvalue()
