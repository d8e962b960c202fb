"""The four standard figures, straight from artifact columns.

Each render_* function takes a validated FigureSpec, draws with the
object-oriented matplotlib API (no pyplot state, any backend), writes
spec.out, and returns the output path.  Nothing here aggregates, fits, or
otherwise recomputes: error bars, Cesaro averages, and classifications all
come from the files.
"""

from __future__ import annotations

from pathlib import Path

from matplotlib.figure import Figure

from .schema import FigureSpec, SchemaError, load_csv, load_json

GAP_COLOR = "#1f77b4"
ANNEALED_COLOR = "#2ca02c"
QUENCHED_COLOR = "#d62728"
BRACKET_COLOR = "#ff7f0e"


def _new_axes(title: str | None, xlabel: str, ylabel: str):
    fig = Figure(figsize=(6.4, 4.2), dpi=150)
    ax = fig.add_subplot()
    if title:
        ax.set_title(title)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.grid(True, alpha=0.3)
    return fig, ax


def _save(fig: Figure, out: Path) -> Path:
    out.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out, bbox_inches="tight")
    return out


def _split_inputs(spec: FigureSpec) -> tuple[list[Path], list[Path]]:
    csvs = [p for p in spec.inputs if p.suffix.lower() == ".csv"]
    jsons = [p for p in spec.inputs if p.suffix.lower() == ".json"]
    return csvs, jsons


def render_sweep(spec: FigureSpec) -> Path:
    """Gap vs epsilon with error bars; shaded transition bracket when present."""
    csvs, jsons = _split_inputs(spec)
    if len(csvs) != 1:
        raise SchemaError(f"sweep figure needs exactly one sweep.csv, got {len(csvs)}")
    cols = load_csv(csvs[0], "sweep")
    fig, ax = _new_axes(spec.title or "free-energy gap vs disorder strength",
                        "epsilon", "mean gap (log W_n / n)")
    ax.axhline(0.0, color="black", linewidth=0.8)
    ax.errorbar(
        cols["epsilon"], cols["mean_gap"], yerr=cols["stderr"],
        marker="o", capsize=3, color=GAP_COLOR, label="replica mean +- stderr",
    )
    localized = [e for e, f in zip(cols["epsilon"], cols["localized_flag"]) if f == 1.0]
    if localized:
        mg = {e: g for e, g in zip(cols["epsilon"], cols["mean_gap"])}
        ax.plot(
            localized, [mg[e] for e in localized], linestyle="none",
            marker="o", markersize=11, markerfacecolor="none",
            markeredgecolor=QUENCHED_COLOR, label="flagged localized",
        )
    if len(jsons) > 1:
        raise SchemaError(f"sweep figure takes at most one sweep.json, got {len(jsons)}")
    if jsons:
        report = load_json(jsons[0])
        bracket = report.get("eps_bar_bracket")
        if bracket:
            ax.axvspan(bracket[0], bracket[1], alpha=0.15, color=BRACKET_COLOR,
                       label=f"transition bracket [{bracket[0]:g}, {bracket[1]:g}]")
    ax.legend(loc="best", fontsize=9)
    return _save(fig, spec.out)


def render_series(spec: FigureSpec) -> Path:
    """Per-replica J_n and I_n traces with their Cesaro averages."""
    csvs, _ = _split_inputs(spec)
    if len(csvs) != 1:
        raise SchemaError(f"series figure needs exactly one series.csv, got {len(csvs)}")
    cols = load_csv(csvs[0], "series")
    replicas = sorted(set(cols["replica"]))
    fig, ax = _new_axes(spec.title or "endpoint mass and overlap series",
                        "n", "endpoint statistic")
    for r in replicas:
        sel = [k for k, rep in enumerate(cols["replica"]) if rep == r]
        ns = [cols["n"][k] for k in sel]
        first = r == replicas[0]
        ax.plot(ns, [cols["j"][k] for k in sel], color=GAP_COLOR, alpha=0.25,
                linewidth=0.8, label="J_n (max endpoint mass)" if first else None)
        ax.plot(ns, [cols["i"][k] for k in sel], color=QUENCHED_COLOR, alpha=0.25,
                linewidth=0.8, label="I_n (endpoint overlap)" if first else None)
        ax.plot(ns, [cols["cesaro_j"][k] for k in sel], color=GAP_COLOR,
                linewidth=1.8, label="Cesaro J" if first else None)
        ax.plot(ns, [cols["cesaro_i"][k] for k in sel], color=QUENCHED_COLOR,
                linewidth=1.8, label="Cesaro I" if first else None)
    ax.set_ylim(bottom=0.0)
    ax.legend(loc="best", fontsize=9)
    return _save(fig, spec.out)


def render_l2(spec: FigureSpec) -> Path:
    """Second-moment growth curve on a log scale, tagged by its classification."""
    csvs, _ = _split_inputs(spec)
    if len(csvs) != 1:
        raise SchemaError(f"l2 figure needs exactly one l2.csv, got {len(csvs)}")
    cols = load_csv(csvs[0], "l2")
    tags = sorted(set(cols["classification"]))
    tag = tags[0] if len(tags) == 1 else "/".join(tags)
    fig, ax = _new_axes(spec.title or f"second moment of W_n ({tag})", "n", "E[W_n^2]")
    ax.semilogy(cols["n"], cols["ew2"], marker="o", markersize=3, color=GAP_COLOR)
    ax.axhline(1.0, color="black", linewidth=0.8)
    return _save(fig, spec.out)


def render_rates(spec: FigureSpec) -> Path:
    """Annealed and quenched rate profiles along the sampled boundary segment."""
    csvs, _ = _split_inputs(spec)
    if len(csvs) != 1:
        raise SchemaError(f"rates figure needs exactly one rates.csv, got {len(csvs)}")
    cols = load_csv(csvs[0], "rates")
    fig, ax = _new_axes(spec.title or "rate functions along the boundary segment",
                        "y_1 (first coordinate of the direction)", "rate")
    ax.plot(cols["y_1"], cols["ia"], marker="o", markersize=4,
            color=ANNEALED_COLOR, label="I_a (exact)")
    ax.errorbar(cols["y_1"], cols["iq_mean"], yerr=cols["iq_stderr"],
                marker="s", markersize=4, capsize=3, color=QUENCHED_COLOR,
                label="I_q (replica estimate)")
    ax.legend(loc="best", fontsize=9)
    return _save(fig, spec.out)


RENDERERS = {
    "sweep": render_sweep,
    "series": render_series,
    "l2": render_l2,
    "rates": render_rates,
}


def render(spec: FigureSpec) -> Path:
    return RENDERERS[spec.kind](spec)
