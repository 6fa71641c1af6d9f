"""Figure rendering for traces and EMG analysis artifacts.

Everything renders straight to a file through the Agg backend so the CLI can
drop figures next to its CSV output on headless machines.
"""

from __future__ import annotations

from pathlib import Path
from typing import Mapping, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .harness import TraceRecord
from .sensors import Condition, EmgTrace, Position


def render_trace_figure(
    records: Sequence[TraceRecord],
    path: str | Path,
    title: str = "",
    tick_period_us: int = 1000,
) -> Path:
    """Four stacked panels: aperture, shaft speed, grip force, digital lines."""
    path = Path(path)
    if not records:
        raise ValueError("cannot render an empty trace")
    t = [r.tick * tick_period_us * 1e-6 for r in records]
    fig, axes = plt.subplots(4, 1, figsize=(9, 8), sharex=True)
    ax_theta, ax_omega, ax_force, ax_dig = axes

    ax_theta.plot(t, [r.theta_out for r in records], color="tab:blue")
    ax_theta.set_ylabel("aperture [rad]")
    if title:
        ax_theta.set_title(title)

    ax_omega.plot(t, [r.omega for r in records], color="tab:orange")
    ax_omega.set_ylabel("shaft speed [rad/s]")

    ax_force.plot(t, [r.grip_force_n for r in records], color="tab:red")
    ax_force.set_ylabel("grip force [N]")

    # Digital channels stacked with offsets, drawn as steps.
    channels = [
        ("open_sw", [r.open_sw for r in records]),
        ("close_sw", [r.close_sw for r in records]),
        ("rb0", [r.rb0 for r in records]),
        ("rb1", [r.rb1 for r in records]),
    ]
    for k, (name, values) in enumerate(channels):
        offset = (len(channels) - 1 - k) * 1.5
        ax_dig.step(t, [v + offset for v in values], where="post", label=name)
    ax_dig.set_yticks([(len(channels) - 1 - k) * 1.5 + 0.5 for k in range(len(channels))])
    ax_dig.set_yticklabels([name for name, _ in channels])
    ax_dig.set_xlabel("time [s] (ticks x tick period)")
    ax_dig.set_ylim(-0.5, len(channels) * 1.5)

    for ax in axes:
        ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return path


def render_emg_figure(
    traces: Mapping[Condition, Mapping[Position, EmgTrace]],
    path: str | Path,
    max_samples: int = 3000,
) -> Path:
    """Grid of traces: one row per electrode position, one column per condition."""
    path = Path(path)
    conditions = [c for c in (Condition.RELAXED, Condition.STRESSED) if c in traces]
    if not conditions:
        raise ValueError("no traces to render")
    positions = list(Position)
    fig, axes = plt.subplots(
        len(positions), len(conditions), figsize=(5 * len(conditions), 8),
        sharex=True, sharey=True, squeeze=False,
    )
    for col, cond in enumerate(conditions):
        for row, pos in enumerate(positions):
            ax = axes[row][col]
            trace = traces[cond].get(pos)
            if trace is None:
                ax.set_axis_off()
                continue
            y = trace.samples[:max_samples]
            x = [i / trace.sample_rate_hz for i in range(len(y))]
            ax.plot(x, y, linewidth=0.4, color="tab:blue")
            ax.set_ylabel(f"{pos.value} [uV]")
            if row == 0:
                ax.set_title(cond.value)
            if row == len(positions) - 1:
                ax.set_xlabel("time [s]")
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return path


def render_classification_figure(
    ratios: Mapping[Position, float],
    drop_ratio: float,
    tolerance_ratio: float,
    decision: Condition,
    path: str | Path,
) -> Path:
    """Bar chart of per-position RMS ratios against the decision thresholds."""
    path = Path(path)
    positions = [p for p in Position if p in ratios]
    values = [ratios[p] for p in positions]
    fig, ax = plt.subplots(figsize=(6, 4))
    bars = ax.bar([p.value for p in positions], values, color="tab:gray")
    for pos, bar in zip(positions, bars):
        if pos in (Position.S1, Position.S3):
            bar.set_color("tab:red" if ratios[pos] <= drop_ratio else "tab:blue")
        elif pos is Position.S4:
            ok = abs(ratios[pos] - 1.0) <= tolerance_ratio
            bar.set_color("tab:green" if ok else "tab:orange")
    ax.axhline(drop_ratio, color="tab:red", linestyle="--", linewidth=1,
               label=f"drop ratio {drop_ratio:g}")
    ax.axhspan(1.0 - tolerance_ratio, 1.0 + tolerance_ratio, color="tab:green", alpha=0.15,
               label=f"S4 tolerance +/-{tolerance_ratio:g}")
    ax.set_ylabel("RMS ratio vs baseline")
    ax.set_title(f"decision: {decision.value}")
    ax.legend(loc="best", fontsize=8)
    ax.grid(True, axis="y", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return path
