"""Figure rendering for reports and experiment outputs.

Kept separate from the analytic core: every function takes already-computed
rows/reports and writes one PNG.  Uses the Agg backend so it works headless.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402


def save_decay_plot(report, path: str, title: str = "Reliability decay") -> None:
    """Per-qubit fidelity trace over trajectory events."""
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for logical, trace in enumerate(report.traces):
        if not trace:
            continue
        xs = [0] + [idx + 1 for idx, _ in trace]
        ys = [1.0] + [f for _, f in trace]
        ax.plot(xs, ys, marker="o", markersize=3, label=f"q{logical}")
    ax.set_xlabel("noise event")
    ax.set_ylabel("proxy fidelity")
    ax.set_title(title)
    ax.grid(alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_sweep_plot(rows_by_theta: dict[float, list], path: str, channel: str) -> None:
    """Negativity and proxy fidelity against channel strength, one pair of
    curves per preparation angle."""
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4))
    for theta, points in sorted(rows_by_theta.items()):
        xs = [p.param for p in points]
        ax1.plot(xs, [p.negativity for p in points], label=f"theta={theta:.3f}")
        ax2.plot(xs, [p.proxy_fidelity for p in points], label=f"theta={theta:.3f}")
    xlabel = "p" if channel == "depolarizing" else "t / T2"
    for ax, ylabel in ((ax1, "negativity"), (ax2, "proxy fidelity")):
        ax.set_xlabel(xlabel)
        ax.set_ylabel(ylabel)
        ax.grid(alpha=0.3)
        ax.legend(fontsize=8)
    fig.suptitle(f"{channel} channel sweep")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_accuracy_plot(pairs, path: str, title: str) -> None:
    """Estimated-vs-actual scatter with the y=x reference line."""
    est = [p[0] for p in pairs]
    act = [p[1] for p in pairs]
    fig, ax = plt.subplots(figsize=(5, 5))
    lo = min(min(est), min(act), 0.0)
    ax.plot([lo, 1.0], [lo, 1.0], "k--", linewidth=1, label="y = x")
    ax.scatter(act, est, s=18, alpha=0.7)
    ax.set_xlabel("actual fidelity")
    ax.set_ylabel("estimated fidelity")
    ax.set_title(title)
    ax.grid(alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_layer_decay_plot(rows, path: str) -> None:
    """Estimated and actual per-qubit fidelity against identity-layer count."""
    qubits = sorted({r["qubit"] for r in rows})
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for q in qubits:
        sub = [r for r in rows if r["qubit"] == q]
        xs = [r["layers"] for r in sub]
        ax.plot(xs, [r["actual"] for r in sub], marker="o", label=f"q{q} actual")
        ax.plot(xs, [r["estimated"] for r in sub], marker="x", linestyle="--", label=f"q{q} estimated")
    ax.set_xlabel("identity layers")
    ax.set_ylabel("qubit fidelity")
    ax.grid(alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_ranking_plot(repetitions, path: str) -> None:
    """Mean rank correlation per metric, one bar group per repetition."""
    metrics = sorted({m for rep in repetitions for m in rep.mean_rho})
    fig, ax = plt.subplots(figsize=(8, 4.5))
    width = 0.8 / max(len(metrics), 1)
    for i, metric in enumerate(metrics):
        xs = [rep.repetition + i * width for rep in repetitions]
        ys = [rep.mean_rho.get(metric, 0.0) for rep in repetitions]
        ax.bar(xs, ys, width=width, label=metric)
    ax.set_xlabel("repetition")
    ax.set_ylabel("mean Spearman rho vs oracle fidelity")
    ax.grid(alpha=0.3, axis="y")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_runtime_plot(points, path: str) -> None:
    """Evaluation wall time against op count (log-log)."""
    fig, ax = plt.subplots(figsize=(6, 4.5))
    ax.loglog([p[0] for p in points], [p[1] for p in points], marker="o")
    ax.set_xlabel("operation count")
    ax.set_ylabel("evaluation time [s]")
    ax.grid(alpha=0.3, which="both")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
