"""Render run traces to PNG files next to the delimited output.

Each experiment gets one figure per quantity of interest (trajectory,
weights, error signals).  Figures are written as <stem>_<name>.png where the
stem is the CSV path without its extension; the list of written paths is
returned so drivers can report them.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np


def _plt():
    import matplotlib

    matplotlib.use("Agg", force=True)
    import matplotlib.pyplot as plt

    return plt


def _save(fig, path: Path) -> str:
    fig.savefig(path, dpi=150, bbox_inches="tight")
    return str(path)


def render_chase_figures(
    trace, v_at_x: np.ndarray, vhat: np.ndarray, stem: str | Path
) -> list[str]:
    """State trajectory, value comparison, weight traces, pointwise error."""
    if not trace.states:
        return []
    plt = _plt()
    stem = Path(stem)
    ts = trace.times()
    xs = trace.states_matrix()
    ws = trace.weights_matrix()
    ideals = trace.ideal_weights_matrix()
    written = []

    fig, ax = plt.subplots(figsize=(5, 5))
    ax.plot(xs[:, 0], xs[:, 1], lw=1.0)
    ax.plot(xs[0, 0], xs[0, 1], "ko", ms=4)
    ax.set_xlabel("x1")
    ax.set_ylabel("x2")
    ax.set_title("state trajectory")
    ax.set_aspect("equal")
    ax.grid(True, alpha=0.3)
    written.append(_save(fig, stem.parent / f"{stem.name}_trajectory.png"))
    plt.close(fig)

    fig, ax = plt.subplots(figsize=(7, 4))
    ax.plot(ts, v_at_x, label="target at state", lw=1.2)
    ax.plot(ts, vhat, "--", label="approximation at state", lw=1.0)
    ax.set_xlabel("t [s]")
    ax.set_ylabel("value")
    ax.set_title("target vs moving approximation")
    ax.legend()
    ax.grid(True, alpha=0.3)
    written.append(_save(fig, stem.parent / f"{stem.name}_comparison.png"))
    plt.close(fig)

    fig, ax = plt.subplots(figsize=(7, 4))
    for i in range(ws.shape[1]):
        (line,) = ax.plot(ts, ws[:, i], lw=1.0, label=f"a{i + 1}")
        ax.plot(ts, ideals[:, i], ":", lw=0.8, color=line.get_color())
    ax.set_xlabel("t [s]")
    ax.set_ylabel("weight")
    ax.set_title("weight estimates (dotted: ideal)")
    ax.legend(ncol=3, fontsize=8)
    ax.grid(True, alpha=0.3)
    written.append(_save(fig, stem.parent / f"{stem.name}_weights.png"))
    plt.close(fig)

    fig, ax = plt.subplots(figsize=(7, 4))
    ax.plot(ts, np.abs(v_at_x - vhat), lw=1.0)
    ax.set_xlabel("t [s]")
    ax.set_ylabel("|error|")
    ax.set_title("approximation error at the state")
    ax.grid(True, alpha=0.3)
    written.append(_save(fig, stem.parent / f"{stem.name}_error.png"))
    plt.close(fig)
    return written


def render_adp_figures(trace, stem: str | Path) -> list[str]:
    """State, actor/critic weights, Bellman error, and ground-truth errors."""
    if not trace.states:
        return []
    plt = _plt()
    stem = Path(stem)
    ts = trace.times()
    xs = trace.states_matrix()
    written = []

    fig, ax = plt.subplots(figsize=(7, 4))
    for i in range(xs.shape[1]):
        ax.plot(ts, xs[:, i], lw=1.0, label=f"x{i + 1}")
    ax.set_xlabel("t [s]")
    ax.set_ylabel("state")
    ax.set_title("state trajectory")
    ax.legend()
    ax.grid(True, alpha=0.3)
    written.append(_save(fig, stem.parent / f"{stem.name}_state.png"))
    plt.close(fig)

    for name, mat in (("actor", trace.actor_matrix()), ("critic", trace.critic_matrix())):
        fig, ax = plt.subplots(figsize=(7, 4))
        for i in range(mat.shape[1]):
            ax.plot(ts, mat[:, i], lw=1.0, label=f"W{i + 1}")
        ax.set_xlabel("t [s]")
        ax.set_ylabel("weight")
        ax.set_title(f"{name} weights")
        ax.legend()
        ax.grid(True, alpha=0.3)
        written.append(_save(fig, stem.parent / f"{stem.name}_{name}_weights.png"))
        plt.close(fig)

    fig, ax = plt.subplots(figsize=(7, 4))
    ax.plot(ts, trace.bellman_errors(), lw=0.8)
    ax.set_xlabel("t [s]")
    ax.set_ylabel("residual")
    ax.set_title("Bellman error")
    ax.grid(True, alpha=0.3)
    written.append(_save(fig, stem.parent / f"{stem.name}_bellman.png"))
    plt.close(fig)

    ve = trace.value_errors()
    ce = trace.control_errors()
    if np.isfinite(ve).any():
        for name, y in (("value_error", ve), ("control_error", ce)):
            fig, ax = plt.subplots(figsize=(7, 4))
            ax.plot(ts, y, lw=1.0)
            ax.set_xlabel("t [s]")
            ax.set_ylabel("|error|")
            ax.set_title(name.replace("_", " ") + " vs optimal solution")
            ax.grid(True, alpha=0.3)
            written.append(_save(fig, stem.parent / f"{stem.name}_{name}.png"))
            plt.close(fig)
    return written


def render_monomial_figure(rows: list[dict], stem: str | Path) -> list[str]:
    """Sup-error decay against the scale parameter (log-log)."""
    if not rows:
        return []
    plt = _plt()
    stem = Path(stem)
    ms = [r["m"] for r in rows]
    errs = [r["sup_error"] for r in rows]
    fig, ax = plt.subplots(figsize=(5, 4))
    if any(e > 0 for e in errs):
        ax.loglog(ms, errs, "o-", lw=1.0)
    else:
        ax.semilogx(ms, errs, "o-", lw=1.0)
    ax.set_xlabel("scale m")
    ax.set_ylabel("sup error")
    ax.set_title("monomial approximant error decay")
    ax.grid(True, which="both", alpha=0.3)
    path = _save(fig, stem.parent / f"{stem.name}_decay.png")
    plt.close(fig)
    return [path]
