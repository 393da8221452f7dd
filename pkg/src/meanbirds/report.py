"""Report rendering: per-class ECDF data files and matplotlib figures.

The report stage emits, alongside the delimited outputs (features.csv,
ranking.csv, ecdf_data.csv), one PNG per reported feature showing the
per-class ECDF curves, mirroring the distribution plots used to compare
user classes.
"""

import csv
import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .features import ecdf

# features whose class-wise distributions are worth plotting by default
REPORT_FEATURES = (
    "subscribed_lists",
    "median_interarrival_seconds",
    "avg_urls",
    "avg_hashtags",
    "avg_sentiment",
    "friends",
    "followers",
    "ratio",
    "reciprocity",
    "hub",
    "authority",
    "eigenvector",
    "clustering",
    "power_diff",
)

CLASS_STYLES = {
    "bully": ("tab:red", "-"),
    "aggressive": ("tab:orange", "--"),
    "spammer": ("tab:purple", ":"),
    "normal": ("tab:blue", "-."),
}


def ecdf_table(feature_vectors, labels, feature_names=REPORT_FEATURES):
    """Rows (feature, class, value, cum_fraction) for every plotted ECDF."""
    rows = []
    by_class = {}
    for fv in feature_vectors:
        lab = labels.get(fv.user_id)
        if lab is None:
            continue
        by_class.setdefault(lab, []).append(fv)
    for name in feature_names:
        for lab in sorted(by_class):
            vals = [fv.values[name] for fv in by_class[lab]]
            if not vals:
                continue
            support, cum = ecdf(vals)
            for x, c in zip(support, cum):
                rows.append((name, lab, float(x), float(c)))
    return rows


def save_ecdf_csv(rows, path):
    with open(path, "w", encoding="utf-8", newline="") as f:
        w = csv.writer(f)
        w.writerow(("feature", "class", "value", "cum_fraction"))
        for row in rows:
            w.writerow(row)


def render_ecdf_figures(feature_vectors, labels, out_dir,
                        feature_names=REPORT_FEATURES):
    """One ECDF PNG per feature with a curve per class; returns the paths."""
    os.makedirs(out_dir, exist_ok=True)
    by_class = {}
    for fv in feature_vectors:
        lab = labels.get(fv.user_id)
        if lab is not None:
            by_class.setdefault(lab, []).append(fv)
    paths = []
    for name in feature_names:
        fig, ax = plt.subplots(figsize=(4.2, 3.2))
        for lab in sorted(by_class):
            vals = [fv.values[name] for fv in by_class[lab]]
            if not vals:
                continue
            support, cum = ecdf(vals)
            color, style = CLASS_STYLES.get(lab, ("gray", "-"))
            ax.step(support, cum, where="post", label=lab, color=color,
                    linestyle=style, linewidth=1.4)
        ax.set_xlabel(name)
        ax.set_ylabel("CDF")
        ax.set_ylim(0, 1.02)
        ax.legend(fontsize=8)
        ax.grid(alpha=0.3)
        fig.tight_layout()
        path = os.path.join(out_dir, f"{name}_ecdf.png")
        fig.savefig(path, dpi=120, metadata={"Software": None})
        plt.close(fig)
        paths.append(path)
    return paths


def save_ranking_csv(ranking, path):
    """Information-gain ranking as (rank, feature, gain, share_percent)."""
    with open(path, "w", encoding="utf-8", newline="") as f:
        w = csv.writer(f)
        w.writerow(("rank", "feature", "info_gain", "share_percent"))
        for i, (name, gain, share) in enumerate(ranking, start=1):
            w.writerow((i, name, f"{gain:.6f}", f"{share:.2f}"))


def render_ranking_figure(ranking, path, top=12):
    names = [r[0] for r in ranking[:top]][::-1]
    shares = [r[2] for r in ranking[:top]][::-1]
    fig, ax = plt.subplots(figsize=(5.0, 0.32 * len(names) + 1.2))
    ax.barh(names, shares, color="tab:blue")
    ax.set_xlabel("information gain share (%)")
    fig.tight_layout()
    fig.savefig(path, dpi=120, metadata={"Software": None})
    plt.close(fig)
    return path
