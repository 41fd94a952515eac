"""Matplotlib figure rendering for the report outputs.

Everything draws on the Agg backend straight to PNG files with fixed
sizes and no timestamps, so reruns of the same data produce identical
bytes and the files can participate in the output manifest.
"""

from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

_DPI = 110


def spectrum_figure(path: str, q_hz, series, resonances) -> None:
    """Instability rate vs quadratic Zeeman energy, one line per mode."""
    fig, ax = plt.subplots(figsize=(7.2, 4.2), dpi=_DPI)
    for label, rates_hz in series:
        ax.plot(q_hz, rates_hz, linewidth=1.4, label=label)
    top = ax.get_ylim()[1]
    for label, q_res_hz in resonances:
        ax.axvline(q_res_hz, color="0.75", linestyle=":", linewidth=0.8, zorder=0)
        ax.text(q_res_hz, top * 0.98, label, rotation=90, fontsize=6,
                ha="right", va="top", color="0.35")
    ax.set_xlabel("q / h (Hz)")
    ax.set_ylabel("instability rate (Hz)")
    ax.legend(fontsize=7, loc="upper left")
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def modes_figure(path: str, panels) -> None:
    """Row of mode density graymaps with their energies."""
    count = max(len(panels), 1)
    fig, axes = plt.subplots(1, count, figsize=(2.3 * count, 2.7), dpi=_DPI)
    if count == 1:
        axes = [axes]
    for ax, (title, image, energy_hz) in zip(axes, panels):
        half_um = image.grid.half_extent_m * 1e6
        ax.imshow(
            image.values,
            origin="lower",
            cmap="gray",
            extent=(-half_um, half_um, -half_um, half_um),
        )
        ax.set_title(f"{title}\n{energy_hz:.1f} Hz", fontsize=8)
        ax.set_xticks([])
        ax.set_yticks([])
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def histograms_figure(path: str, entries) -> None:
    """Relative-angle histograms, one panel per field/group."""
    count = max(len(entries), 1)
    cols = min(3, count)
    rows = math.ceil(count / cols)
    fig, axes = plt.subplots(rows, cols, figsize=(3.0 * cols, 2.4 * rows),
                             dpi=_DPI, squeeze=False)
    flat = [ax for row in axes for ax in row]
    for ax in flat[len(entries):]:
        ax.set_visible(False)
    for ax, (label, centers_deg, counts, std_deg) in zip(flat, entries):
        if len(centers_deg) > 1:
            width = centers_deg[1] - centers_deg[0]
        else:
            width = 1.0
        ax.bar(centers_deg, counts, width=0.9 * width, color="#4878a8")
        note = f"std {std_deg:.1f}" if std_deg is not None and math.isfinite(std_deg) else "no data"
        ax.set_title(f"{label} ({note})", fontsize=8)
        ax.set_xlabel("relative angle (deg)", fontsize=7)
        ax.tick_params(labelsize=7)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def trend_figure(path: str, rows) -> None:
    """Circular std and acceptance fraction across the field/q settings.

    rows: (label, q_hz, squeeze, std_deg, accepted_fraction) tuples;
    q_hz may be nan, in which case points are spaced by index.
    """
    labels = [row[0] for row in rows]
    q_values = [row[1] for row in rows]
    use_q = all(math.isfinite(q) for q in q_values) and len(rows) > 0
    x = q_values if use_q else list(range(len(rows)))
    stds = [row[3] for row in rows]
    fractions = [row[4] for row in rows]
    fig, (ax_std, ax_acc) = plt.subplots(2, 1, figsize=(6.4, 5.2), dpi=_DPI, sharex=True)
    ax_std.plot(x, stds, "o-", color="#b4543c")
    ax_std.set_ylabel("circular std (deg)")
    for xi, row in zip(x, rows):
        ax_std.annotate(f"s={row[2]:.2f}", (xi, row[3]), fontsize=6,
                        textcoords="offset points", xytext=(0, 6))
    ax_acc.plot(x, fractions, "s-", color="#4878a8")
    ax_acc.set_ylabel("accepted fraction")
    ax_acc.set_ylim(-0.05, 1.05)
    if use_q:
        ax_acc.set_xlabel("q / h (Hz)")
    else:
        ax_acc.set_xlabel("group")
        ax_acc.set_xticks(x)
        ax_acc.set_xticklabels(labels, fontsize=6, rotation=30, ha="right")
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
