"""Matplotlib figures rendered next to the delimited report outputs."""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def plot_ablation(summary: list[dict], study: str, path) -> None:
    """Mean accuracy / macro-F1 with std error bars over the study grid."""
    points = [row["grid_point"] for row in summary]
    x = np.arange(len(points))
    fig, ax = plt.subplots(figsize=(6, 4))
    for metric, color in (("accuracy", "tab:blue"), ("macro_f1", "tab:orange")):
        mean = [row[f"mean_{metric}"] for row in summary]
        std = [row[f"std_{metric}"] for row in summary]
        ax.errorbar(x, mean, yerr=std, marker="o", capsize=3, label=metric, color=color)
    ax.set_xticks(x)
    ax.set_xticklabels([str(p) for p in points])
    ax.set_xlabel(study)
    ax.set_ylabel("score")
    ax.set_ylim(0.0, 1.05)
    ax.grid(alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_loss_curve(curve: list[float], path) -> None:
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(np.arange(1, len(curve) + 1), curve, marker=".")
    ax.set_xlabel("epoch")
    ax.set_ylabel("training loss (sum)")
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_fold_metrics(accuracies: list[float], macro_f1s: list[float], path) -> None:
    x = np.arange(len(accuracies))
    width = 0.4
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.bar(x - width / 2, accuracies, width, label="accuracy")
    ax.bar(x + width / 2, macro_f1s, width, label="macro_f1")
    ax.set_xticks(x)
    ax.set_xticklabels([f"fold {i}" for i in x])
    ax.set_ylim(0.0, 1.05)
    ax.grid(alpha=0.3, axis="y")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
