"""Report writers: results CSV, plot-data TSV, and rendered figures.

The CSV column layout is versioned through a leading comment line so readers
can detect drift.  Plot-data files mirror the figures: budget on the x axis,
objective value on the y axis, one column (series) per algorithm or per alpha.
"""

from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

RESULTS_SCHEMA = "tagim-results-v1"
COLUMNS = ("algo", "budget", "objective", "value", "n_seeds", "n_tags",
           "spend_seed", "spend_tag", "seconds")


def format_row(r) -> str:
    return (f"{r.algo},{r.budget:g},{r.objective},{r.value:.6f},"
            f"{r.n_seeds},{r.n_tags},{r.spend_seed:.6f},{r.spend_tag:.6f},"
            f"{r.seconds:.4f}")


def write_results_csv(rows, path) -> None:
    with open(path, "w") as fh:
        fh.write(f"# schema: {RESULTS_SCHEMA}\n")
        fh.write(",".join(COLUMNS) + "\n")
        for r in rows:
            fh.write(format_row(r) + "\n")


def series_table(rows) -> tuple[list[float], dict[str, list[float]]]:
    """Pivot result rows into budgets x algorithms."""
    budgets = sorted({r.budget for r in rows})
    table: dict[str, list[float]] = {}
    index = {(r.algo, r.budget): r.value for r in rows}
    for algo in sorted({r.algo for r in rows}):
        table[algo] = [index[(algo, b)] for b in budgets]
    return budgets, table


def write_plot_data(budgets, table, path) -> None:
    names = list(table)
    with open(path, "w") as fh:
        fh.write("budget\t" + "\t".join(names) + "\n")
        for i, b in enumerate(budgets):
            fh.write(f"{b:g}\t" + "\t".join(f"{table[a][i]:.6f}" for a in names) + "\n")


def render_figure(budgets, table, path, ylabel) -> None:
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for name, values in table.items():
        ax.plot(budgets, values, marker="o", label=name)
    ax.set_xlabel("budget")
    ax.set_ylabel(ylabel)
    ax.grid(True, alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def write_reports(rows, out_dir, objective) -> None:
    """CSV + plot data + figure for one sweep."""
    os.makedirs(out_dir, exist_ok=True)
    write_results_csv(rows, os.path.join(out_dir, "results.csv"))
    budgets, table = series_table(rows)
    write_plot_data(budgets, table, os.path.join(out_dir, f"plot_{objective}.tsv"))
    render_figure(budgets, table, os.path.join(out_dir, f"{objective}.png"),
                  ylabel=objective)


def write_alpha_reports(results, out_dir) -> None:
    """Per-alpha CSVs plus one combined plot file and figure."""
    os.makedirs(out_dir, exist_ok=True)
    combined: dict[str, list[float]] = {}
    budgets: list[float] = []
    for alpha in sorted(results):
        rows = results[alpha]
        write_results_csv(rows, os.path.join(out_dir, f"results_alpha{alpha:g}.csv"))
        budgets, table = series_table(rows)
        for algo, values in table.items():
            combined[f"{algo}@a{alpha:g}"] = values
    write_plot_data(budgets, combined, os.path.join(out_dir, "plot_benefit_alpha.tsv"))
    render_figure(budgets, combined, os.path.join(out_dir, "benefit_alpha.png"),
                  ylabel="benefit")
