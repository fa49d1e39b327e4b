"""Tables and figures for CLI reports.

Tables print as aligned text or as tab-separated lines; figures are written to
files with the Agg backend so no display is needed.
"""
import csv
import math

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

STYLE = {
    "figure.figsize": (5.0, 3.4),
    "figure.dpi": 120,
    "font.size": 9,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "lines.markersize": 5,
}


def _cell(v):
    if isinstance(v, float):
        if math.isfinite(v) and v != int(v):
            return f"{v:.4g}" if abs(v) < 1e-3 or abs(v) >= 1e6 else f"{v:.4f}".rstrip("0").rstrip(".")
        return f"{v:.6g}"
    return str(v)


def text_table(rows, columns=None):
    """Render dict rows as an aligned text table."""
    rows = list(rows)
    if not rows:
        return ""
    columns = columns or list(rows[0])
    cells = [[_cell(r.get(c, "")) for c in columns] for r in rows]
    widths = [max(len(c), *(len(row[k]) for row in cells)) for k, c in enumerate(columns)]
    lines = ["  ".join(c.ljust(w) for c, w in zip(columns, widths)).rstrip()]
    lines.append("  ".join("-" * w for w in widths))
    for row in cells:
        lines.append("  ".join(v.rjust(w) if _numeric(v) else v.ljust(w) for v, w in zip(row, widths)).rstrip())
    return "\n".join(lines)


def _numeric(s):
    try:
        float(s)
    except ValueError:
        return False
    return True


def tsv(rows, columns=None):
    """Render dict rows as tab-separated lines with a header."""
    rows = list(rows)
    if not rows:
        return ""
    columns = columns or list(rows[0])
    lines = ["\t".join(columns)]
    lines += ["\t".join(_cell(r.get(c, "")) for c in columns) for r in rows]
    return "\n".join(lines)


def render(rows, columns=None, machine=False):
    return tsv(rows, columns) if machine else text_table(rows, columns)


def read_baselines(path):
    """Externally measured codecs: a TSV/CSV with ``name``, ``bits_per_int`` and ``throughput_gib_s``."""
    with open(path, newline="") as fh:
        sample = fh.read(4096)
        fh.seek(0)
        dialect = csv.Sniffer().sniff(sample, delimiters=",\t")
        out = []
        for row in csv.DictReader(fh, dialect=dialect):
            out.append({
                "name": row["name"],
                "bits_per_int": float(row["bits_per_int"]),
                "throughput_gib_s": float(row["throughput_gib_s"]),
            })
    return out


def render_tradeoff(reports, path, baselines=()):
    """Space/speed scatter: bits per integer against decode throughput."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        for r in reports:
            ax.scatter(r.bits_per_int, r.throughput_gib_s, marker="o", label=f"{r.dataset} ({r.mode})")
        for b in baselines:
            ax.scatter(b["bits_per_int"], b["throughput_gib_s"], marker="s", label=b["name"])
        ax.set_xlabel("space (bits/int)")
        ax.set_ylabel("decode throughput (GiB/s)")
        ax.legend(fontsize=7)
        fig.tight_layout()
        fig.savefig(path)
        plt.close(fig)
    return path


def render_sweep(points, path, chosen=None):
    """Measured bits/int against log2 of the error bound, with the tuned pick marked."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        xs = [math.log2(p.epsilon) if p.epsilon > 0 else -1 for p in points]
        ax.plot(xs, [p.bits_per_int for p in points], "o-", label="sweep")
        if chosen is not None:
            ax.scatter([math.log2(chosen.epsilon)], [chosen.bits_per_int], marker="*", s=120,
                       color="C3", zorder=3, label=f"tuned eps={chosen.epsilon}")
        ax.set_xlabel("log2(epsilon)")
        ax.set_ylabel("bits/int")
        ax.legend()
        fig.tight_layout()
        fig.savefig(path)
        plt.close(fig)
    return path


def render_partition(keys, plan, path):
    """Keys against position, with partition cuts drawn as vertical lines."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        ax.plot(keys.keys.astype(float), lw=0.8)
        for cut in plan.cuts[1:-1]:
            ax.axvline(cut, color="C3", lw=0.6, ls="--")
        ax.set_xlabel("position")
        ax.set_ylabel("key")
        fig.tight_layout()
        fig.savefig(path)
        plt.close(fig)
    return path
