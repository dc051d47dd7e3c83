"""Figure rendering for simulation sweeps and latency tables.

Companion plots for the CSV reports: error-rate curves on a log scale and
the early-stopping estimated-bit fractions, written as PNG files next to
the delimited output.
"""

import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt


def _series(rows, getter):
    xs, ys = [], []
    for m in rows:
        v = getter(m)
        if v is not None and not math.isnan(v):
            xs.append(m.snr_db)
            ys.append(v)
    return xs, ys


def _semilogy(ax, rows, getter, label, marker):
    xs, ys = _series(rows, getter)
    if xs:
        floor = [max(y, 1e-12) for y in ys]
        ax.semilogy(xs, floor, marker=marker, label=label)


def plot_simulation(rows, outdir):
    """Render error-rate and estimated-fraction figures for one sweep.

    Returns the list of written file paths.
    """
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    written = []

    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    _semilogy(ax, rows, lambda m: m.bler, "BLER", "o")
    _semilogy(ax, rows, lambda m: m.mdr, "MDR", "s")
    ax.set_xlabel("Eb/N0 (dB)")
    ax.set_ylabel("rate")
    ax.grid(True, which="both", alpha=0.4)
    ax.legend()
    fig.tight_layout()
    path = outdir / "bler_mdr.png"
    fig.savefig(path, dpi=150)
    plt.close(fig)
    written.append(path)

    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    _semilogy(ax, rows, lambda m: m.far_type1, "FAR type 1", "o")
    _semilogy(ax, rows, lambda m: m.far_type2, "FAR type 2", "s")
    ax.set_xlabel("Eb/N0 (dB)")
    ax.set_ylabel("false alarm rate")
    ax.grid(True, which="both", alpha=0.4)
    ax.legend()
    fig.tight_layout()
    path = outdir / "far.png"
    fig.savefig(path, dpi=150)
    plt.close(fig)
    written.append(path)

    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    styles = [
        ("n1", "sent", "o", "-"), ("n1", "unsent", "o", "--"),
        ("n2", "sent", "x", "-"), ("n2", "unsent", "x", "--"),
    ]
    for tag, cls, marker, ls in styles:
        xs, ys = _series(rows, lambda m, t=tag, c=cls: m.est_frac(t, c))
        if xs:
            n = rows[0].n1 if tag == "n1" else rows[0].n2
            ax.plot(xs, [100 * y for y in ys], marker=marker, linestyle=ls,
                    label=f"N={n} {'UE ID sent' if cls == 'sent' else 'not sent'}")
    ax.set_xlabel("Eb/N0 (dB)")
    ax.set_ylabel("estimated bits (%)")
    ax.set_ylim(0, 105)
    ax.grid(True, alpha=0.4)
    ax.legend(fontsize=8)
    fig.tight_layout()
    path = outdir / "estimated_fraction.png"
    fig.savefig(path, dpi=150)
    plt.close(fig)
    written.append(path)
    return written


def plot_latency(entries, outdir):
    """Render worst-case and average latency versus decoder count.

    ``entries`` holds dicts with n_sclmax, worst_us, avg_us. Returns the
    written file paths.
    """
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    xs = [e["n_sclmax"] for e in entries]
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    ax.plot(xs, [e["worst_us"] for e in entries], marker="o", label="worst case")
    ax.plot(xs, [e["avg_us"] for e in entries], marker="s", label="average")
    ax.set_xlabel("decoder instances")
    ax.set_ylabel("latency (us)")
    ax.grid(True, alpha=0.4)
    ax.legend()
    fig.tight_layout()
    path = outdir / "latency.png"
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return [path]
