"""CSV emitters for figure data and rate tables."""

from __future__ import annotations

import csv
from pathlib import Path

from cvlab.analysis.checks import FigureData, RateReport


def _writer(fh):
    return csv.writer(fh, lineterminator="\n")


def _f(v) -> str:
    return repr(float(v))


def write_figure_csvs(fig: FigureData, outdir, suffix: str = "") -> list[str]:
    """Marginal (fig1) and paired (fig2) data; returns the file names written."""
    outdir = Path(outdir)
    a, b = fig.learner_a, fig.learner_b
    names = []

    name = f"fig1_marginals{suffix}.csv"
    with open(outdir / name, "w", newline="") as fh:
        w = _writer(fh)
        w.writerow(["replication", "learner", "cv_total", "oracle_excess_risk"])
        for rep, (cva, cvb, ora, orb) in zip(fig.replication, fig.scatter):
            w.writerow([int(rep), a, _f(cva), _f(ora)])
            w.writerow([int(rep), b, _f(cvb), _f(orb)])
    names.append(name)

    name = f"fig1_hist{suffix}.csv"
    with open(outdir / name, "w", newline="") as fh:
        w = _writer(fh)
        w.writerow(["learner", "quantity", "bin_lo", "bin_hi", "count"])
        for (learner, quantity), h in fig.marginal_hists.items():
            for lo, hi, c in zip(h.edges[:-1], h.edges[1:], h.counts):
                w.writerow([learner, quantity, _f(lo), _f(hi), int(c)])
    names.append(name)

    name = f"fig2_hist{suffix}.csv"
    with open(outdir / name, "w", newline="") as fh:
        w = _writer(fh)
        w.writerow(["series", "bin_lo", "bin_hi", "count"])
        for series, h in (("cv_diff", fig.cv_diff_hist), ("oracle_diff", fig.oracle_diff_hist)):
            for lo, hi, c in zip(h.edges[:-1], h.edges[1:], h.counts):
                w.writerow([series, _f(lo), _f(hi), int(c)])
    names.append(name)

    name = f"fig2_scatter{suffix}.csv"
    with open(outdir / name, "w", newline="") as fh:
        w = _writer(fh)
        w.writerow(["replication", f"cv_total_{a}", f"cv_total_{b}",
                    f"oracle_excess_risk_{a}", f"oracle_excess_risk_{b}"])
        for rep, row in zip(fig.replication, fig.scatter):
            w.writerow([int(rep), *(_f(v) for v in row)])
    names.append(name)
    return names


def write_rates_csv(report: RateReport, path) -> None:
    with open(path, "w", newline="") as fh:
        w = _writer(fh)
        w.writerow(["n", "mean_excess_risk", "log_residual"])
        for n, m, r in zip(report.n_grid, report.mean_excess_risk, report.residuals):
            w.writerow([int(n), _f(m), _f(r)])
