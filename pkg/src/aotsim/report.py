"""Report rendering: moving-average summary table plus per-metric figures.

Consumes a run's metrics.csv and writes summary.csv and PNG figures next to
it (or into a chosen directory). Smoothing uses a trailing window so early
episodes average over what exists so far.
"""

from pathlib import Path

from .errors import ConfigError
from .harness import parse_metrics_csv

FIGURES = (
    ("avg_reward", "reward_vs_episode.png", "Average reward", False),
    ("avg_aot", "aot_vs_episode.png", "Average trust age (slots)", False),
    ("avg_throughput", "throughput_vs_episode.png", "Average throughput (Kbps)", False),
    ("avg_loss", "loss_vs_episode.png", "Average training loss", True),
)


def moving_average(values, window: int):
    out = []
    acc = 0.0
    for i, v in enumerate(values):
        acc += v
        if i >= window:
            acc -= values[i - window]
        out.append(acc / min(i + 1, window))
    return out


def summarize(in_dir, out_dir=None, window: int = 10) -> dict:
    """Build summary.csv and the figures; returns paths of everything written."""
    in_path = Path(in_dir)
    out_path = Path(out_dir) if out_dir is not None else in_path
    records = parse_metrics_csv(in_path / "metrics.csv")
    if window <= 0:
        raise ConfigError("window must be > 0")
    out_path.mkdir(parents=True, exist_ok=True)

    episodes = [r.episode for r in records]
    series = {
        key: [getattr(r, key) for r in records]
        for key, *_ in FIGURES
    }
    smooth = {key: moving_average(vals, window) for key, vals in series.items()}

    summary_path = out_path / "summary.csv"
    with open(summary_path, "w") as fh:
        cols = ["episode", "phase"]
        for key, *_ in FIGURES:
            cols += [key, f"{key}_ma{window}"]
        fh.write(",".join(cols) + "\n")
        for i, record in enumerate(records):
            cells = [str(record.episode), record.phase]
            for key, *_ in FIGURES:
                cells += [repr(series[key][i]), repr(smooth[key][i])]
            fh.write(",".join(cells) + "\n")

    written = {"summary": summary_path}
    if records:
        written.update(_render_figures(out_path, episodes, records, series, smooth, window))
    return written


def _render_figures(out_path, episodes, records, series, smooth, window):
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    eval_start = next((r.episode for r in records if r.phase == "eval"), None)
    paths = {}
    for key, filename, ylabel, logscale in FIGURES:
        fig, ax = plt.subplots(figsize=(6.0, 3.6))
        ax.plot(episodes, series[key], color="0.75", linewidth=0.8, label="per episode")
        ax.plot(episodes, smooth[key], color="C0", linewidth=1.8, label=f"{window}-episode mean")
        if eval_start is not None and eval_start > episodes[0]:
            ax.axvline(eval_start - 0.5, color="C3", linestyle="--", linewidth=1.0, label="assessment")
        if logscale and min(series[key]) > 0:
            ax.set_yscale("log")
        ax.set_xlabel("Episode")
        ax.set_ylabel(ylabel)
        ax.legend(fontsize=8, frameon=False)
        fig.tight_layout()
        target = out_path / filename
        fig.savefig(target, dpi=150)
        plt.close(fig)
        paths[key] = target
    return paths
