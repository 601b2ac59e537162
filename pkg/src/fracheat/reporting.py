"""CSV/JSON report writers and the optional matplotlib figures.

Tables are written as CSV with the same row/column labels as the reference
results so diffs are mechanical; figures are rendered next to the delimited
output when requested.
"""
from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

__all__ = [
    "write_csv",
    "write_json",
    "plot_order_study",
    "plot_bench",
    "plot_hmat_errors",
]


def write_csv(path: str | Path, header: list[str], rows: list[list]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)


def write_json(path: str | Path, payload: dict) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


def _figure_path(out_path: str | Path, suffix: str) -> Path:
    p = Path(out_path)
    return p.with_name(p.stem + suffix + ".png")


def plot_order_study(out_path, results: dict[str, list[tuple[int, float]]], delta: float) -> Path:
    """Log-log maximum error vs number of time steps, one line per mesh type."""
    fig, ax = plt.subplots(figsize=(5, 4))
    styles = {"graded": "o--", "uniform": "s-"}
    for mesh_type, pairs in results.items():
        Ms = [m for m, _ in pairs]
        Es = [e for _, e in pairs]
        ax.loglog(Ms, Es, styles.get(mesh_type, "o-"), label=mesh_type)
    ax.set_xlabel("time steps M")
    ax.set_ylabel("maximum error")
    ax.set_title(f"error reduction, delta = {delta}")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    path = _figure_path(out_path, "_errors")
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)
    return path


def plot_bench(out_path, rows: list[tuple[int, int, float]]) -> Path:
    """Wall time vs number of time steps on a log-log scale."""
    fig, ax = plt.subplots(figsize=(5, 4))
    Ms = [m for _, m, _ in rows]
    ts = [t for _, _, t in rows]
    ax.loglog(Ms, ts, "o-", label="solve time")
    ref = [ts[0] * (m * max(math.log2(m), 1.0)) / (Ms[0] * max(math.log2(Ms[0]), 1.0)) for m in Ms]
    ax.loglog(Ms, ref, "k:", label="O(M log M)")
    ax.set_xlabel("time steps M")
    ax.set_ylabel("wall time [s]")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    path = _figure_path(out_path, "_time")
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)
    return path


def plot_hmat_errors(out_path, rows: list[tuple[int, float, int]]) -> Path:
    """Compression error vs rank on a semilog scale."""
    fig, ax = plt.subplots(figsize=(5, 4))
    ks = [k for k, _, _ in rows]
    errs = [e for _, e, _ in rows]
    ax.semilogy(ks, errs, "o-")
    ax.set_xlabel("rank k")
    ax.set_ylabel("max elementwise error")
    ax.grid(True, which="both", alpha=0.3)
    path = _figure_path(out_path, "_rank")
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)
    return path
