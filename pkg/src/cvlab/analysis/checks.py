"""Statistical checks of the risk-estimation and model-selection claims."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from cvlab import rng
from cvlab.analysis.harness import (
    ExperimentConfig,
    ReplicationTable,
    learner_gamma,
    run_replications,
)
from cvlab.analysis.reports import flat_items, render
from cvlab.crossval import oracle_excess_risk
from cvlab.dgp import Dgp, cv_star_asymptotic_variance, sample_dataset, true_err
from cvlab.errors import InsufficientDataError, InvalidInputError, LogDomainError
from cvlab.learners.specs import LearnerSpec

PROP1_MIN_REPS = 100
PAIRED_MIN_REPS = 10
RATIO_EPS = 1e-15
Z95 = 1.959963984540054


class _Report:
    title = "report"

    def to_text(self) -> str:
        return render(self.title, flat_items(self))


# ---------------------------------------------------------------- prop 1

@dataclass
class Prop1Report(_Report):
    """Distribution of ``sqrt(n) * (cv_total - Err*)`` across replications.

    ``ks_threshold`` is the asymptotic 5% Kolmogorov critical value
    ``1.358 / sqrt(reps)``; ``ks_ok`` compares against it. It is a fixed
    yardstick, not a calibrated test.
    """

    learner: str
    n: int
    reps: int
    target_variance: float
    mean: float
    mean_z: float
    variance: float
    variance_ci_halfwidth: float
    variance_ratio: float
    ks_distance: float
    ks_threshold: float
    ks_ok: bool
    degenerate: bool
    title = "prop1"


def prop1_check(table: ReplicationTable, dgp: Dgp, learner: str | None = None,
                n: int | None = None) -> Prop1Report:
    learner = learner if learner is not None else _only(table.learners, "learner")
    n = n if n is not None else _only(table.n_values, "n")
    cv = table.select(learner, n)["cv_total"].to_numpy(dtype=float)
    reps = cv.shape[0]
    if reps < PROP1_MIN_REPS:
        raise InsufficientDataError(f"prop1 needs >= {PROP1_MIN_REPS} replications, got {reps}")
    v = math.sqrt(n) * (cv - true_err(dgp))
    target = cv_star_asymptotic_variance(dgp)
    mean = float(v.mean())
    var = float(v.var(ddof=1))
    sd = math.sqrt(var)
    degenerate = target == 0.0 or sd == 0.0
    if degenerate:
        ks = math.nan
        ratio = math.nan
        mean_z = 0.0 if mean == 0.0 else math.copysign(math.inf, mean)
    else:
        ks = float(stats.kstest(v, "norm", args=(0.0, math.sqrt(target))).statistic)
        ratio = var / target
        mean_z = mean / (sd / math.sqrt(reps))
    threshold = 1.358 / math.sqrt(reps)
    return Prop1Report(
        learner=learner, n=int(n), reps=reps, target_variance=target, mean=mean,
        mean_z=mean_z, variance=var,
        variance_ci_halfwidth=Z95 * var * math.sqrt(2.0 / (reps - 1)),
        variance_ratio=ratio, ks_distance=ks, ks_threshold=threshold,
        ks_ok=bool(ks <= threshold) if not degenerate else False,
        degenerate=degenerate,
    )


def _only(values, what):
    if len(values) != 1:
        raise InvalidInputError(f"table holds several {what} values {values}; pick one")
    return values[0]


# ---------------------------------------------------------------- prop 2

@dataclass
class SelectionRow:
    n: int
    reps: int
    status: str
    accuracy: float
    ties: int
    median_ratio: float
    flagged: int
    declared_accuracy: float


@dataclass
class Prop2Report(_Report):
    """Per-n selection accuracy and the CV-to-oracle difference ratio.

    ``accuracy`` counts replications where the learner with the smaller
    ``delta_sq`` also has the smaller ``cv_total``; replications with exactly
    equal ``delta_sq`` are ties and left out. The ratio
    ``(cv_b - cv_a) / (delta_sq_b - delta_sq_a)`` skips replications whose
    denominator is within 1e-15 of zero (counted in ``flagged``).
    ``declared_accuracy`` uses the population ordering from the declared rate
    exponents instead, when both learners have one.
    """

    learner_a: str
    learner_b: str
    rows: list[SelectionRow] = field(default_factory=list)
    title = "prop2"

    def row(self, n: int) -> SelectionRow:
        for r in self.rows:
            if r.n == n:
                return r
        raise KeyError(n)

    def accuracy_monotone(self, z: float = 2.326) -> bool:
        """Accuracy nondecreasing along n up to a one-sided binomial margin."""
        acc = [(r.accuracy, r.reps) for r in self.rows if r.status == "ok"]
        for (a0, r0), (a1, r1) in zip(acc, acc[1:]):
            se = math.sqrt(a0 * (1 - a0) / r0 + a1 * (1 - a1) / r1)
            if a1 < a0 - z * se:
                return False
        return True


def prop2_check(table: ReplicationTable, declared_gamma: dict[str, float] | None = None
                ) -> Prop2Report:
    names = table.learners
    if len(names) != 2:
        raise InvalidInputError(f"prop2 needs exactly two learners, table has {names}")
    report = Prop2Report(names[0], names[1])
    for n in table.n_values:
        a, b, w = table.paired(n)
        d_cv = (w["cv_total_b"] - w["cv_total_a"]).to_numpy()
        d_dl = (w["delta_sq_b"] - w["delta_sq_a"]).to_numpy()
        tie = d_dl == 0.0
        decided = ~tie
        if decided.any():
            accuracy = float(np.mean(np.sign(d_cv[decided]) == np.sign(d_dl[decided])))
            status = "ok"
        else:
            accuracy, status = math.nan, "degenerate-tie"
        keep = np.abs(d_dl) > RATIO_EPS
        median_ratio = float(np.median(d_cv[keep] / d_dl[keep])) if keep.any() else math.nan
        declared = math.nan
        if declared_gamma and a in declared_gamma and b in declared_gamma:
            ga, gb = declared_gamma[a], declared_gamma[b]
            if ga != gb:
                # faster rate means smaller excess risk, which CV should prefer
                sign = 1.0 if ga > gb else -1.0
                declared = float(np.mean(sign * d_cv > 0))
        report.rows.append(SelectionRow(
            n=int(n), reps=int(len(w)), status=status, accuracy=accuracy,
            ties=int(tie.sum()), median_ratio=median_ratio,
            flagged=int((~keep).sum()), declared_accuracy=declared,
        ))
    return report


# ---------------------------------------------------------------- rates

def _check_grid(n_grid):
    n_grid = [int(n) for n in n_grid]
    if len(n_grid) < 3:
        raise InvalidInputError("the n grid needs at least three sizes")
    if any(b <= a for a, b in zip(n_grid, n_grid[1:])):
        raise InvalidInputError("the n grid must be strictly increasing")
    if n_grid[-1] < 8 * n_grid[0]:
        raise InvalidInputError("the n grid must span at least a factor of 8")
    return n_grid


def loglog_fit(n_grid, values):
    """Least-squares line through ``(log n, log value)``."""
    values = np.asarray(values, dtype=float)
    if np.any(~(values > 0)):
        raise LogDomainError("log-log fit needs strictly positive values; got "
                             f"{values.tolist()}")
    x = np.log(np.asarray(n_grid, dtype=float))
    fit = stats.linregress(x, np.log(values))
    resid = np.log(values) - (fit.intercept + fit.slope * x)
    return float(fit.slope), float(fit.intercept), float(fit.stderr), resid


@dataclass
class RateReport(_Report):
    learner: str
    gamma_hat: float
    gamma_se: float
    slope: float
    intercept: float
    n_grid: list[int]
    mean_excess_risk: list[float]
    residuals: list[float]
    reps: int
    title = "rates"


def rate_estimate(spec: LearnerSpec, dgp: Dgp, n_grid, reps: int, master_seed: int,
                  mc_draws: int = 20_000) -> RateReport:
    """Fit ``log E[excess risk] = a - 2 gamma log n`` over the grid."""
    n_grid = _check_grid(n_grid)
    if reps < 1:
        raise InvalidInputError("reps must be >= 1")
    learner = spec.build(dgp)
    means = []
    for n in n_grid:
        vals = []
        for r in range(reps):
            seed = rng.derive_seed(master_seed, r, n)
            data = sample_dataset(dgp, n, rng.derive_seed(seed, rng.DATA))
            rule = learner.fit(data, rng.derive_seed(seed, rng.FULL_FIT))
            vals.append(oracle_excess_risk(rule, dgp, mc_draws,
                                           rng.derive_seed(seed, rng.ORACLE)).value)
        means.append(float(np.mean(vals)))
    if any(not m > 0 for m in means):
        raise LogDomainError(
            f"learner {spec.name!r} has zero excess risk on the grid; no rate to fit"
        )
    slope, intercept, se, resid = loglog_fit(n_grid, means)
    return RateReport(
        learner=spec.name, gamma_hat=-slope / 2.0, gamma_se=se / 2.0, slope=slope,
        intercept=intercept, n_grid=n_grid, mean_excess_risk=means,
        residuals=[float(x) for x in resid], reps=reps,
    )


@dataclass
class ScalingReport(_Report):
    """Log-log slopes of RMS(z) and mean(delta_sq) against n."""

    learner: str
    gamma: float
    n_grid: list[int]
    z_rms: list[float]
    delta_sq_mean: list[float]
    z_slope: float
    z_slope_se: float
    z_target: float
    delta_slope: float
    delta_slope_se: float
    delta_target: float
    degenerate: bool
    title = "scaling"

    def within(self, tol: float = 0.05) -> bool:
        return (not self.degenerate
                and abs(self.z_slope - self.z_target) <= tol
                and abs(self.delta_slope - self.delta_target) <= tol)


def scaling_from_table(table: ReplicationTable, learner: str, gamma: float) -> ScalingReport:
    n_grid = table.n_values
    z_rms, dl = [], []
    for n in n_grid:
        sel = table.select(learner, n)
        z = sel["z"].to_numpy(dtype=float)
        z_rms.append(float(np.sqrt(np.mean(z * z))))
        dl.append(float(sel["delta_sq"].mean()))
    degenerate = all(v == 0.0 for v in z_rms)
    nan = math.nan
    zs = zse = ds = dse = nan
    if not degenerate:
        zs, _, zse, _ = loglog_fit(n_grid, z_rms)
        ds, _, dse, _ = loglog_fit(n_grid, dl)
    return ScalingReport(
        learner=learner, gamma=gamma, n_grid=n_grid, z_rms=z_rms, delta_sq_mean=dl,
        z_slope=zs, z_slope_se=zse, z_target=-(0.5 + gamma), delta_slope=ds,
        delta_slope_se=dse, delta_target=-2.0 * gamma, degenerate=degenerate,
    )


def z_scaling_check(spec: LearnerSpec, dgp: Dgp, n_grid, reps: int, master_seed: int,
                    K: int = 10, workers: int = 1) -> ScalingReport:
    gamma = learner_gamma(spec)
    if gamma is None:
        raise InvalidInputError("z scaling needs a learner with a declared rate exponent")
    n_grid = _check_grid(n_grid)
    cfg = ExperimentConfig(dgp=dgp, learners=(spec,), n_grid=tuple(n_grid), K=K,
                           replications=reps, master_seed=master_seed, mc_draws_oracle=0,
                           name=f"scaling-{spec.name}")
    return scaling_from_table(run_replications(cfg, workers=workers), spec.name, gamma)


# ---------------------------------------------------------------- figures

@dataclass
class Histogram:
    edges: np.ndarray
    counts: np.ndarray


@dataclass
class FigureData(_Report):
    """Paired comparison data: differences, scatter, and marginal summaries.

    Differences are ``learner_a - learner_b`` per replication. The two
    difference histograms share bin edges so they can be overlaid.
    """

    learner_a: str
    learner_b: str
    n: int
    reps: int
    correlation: float
    correlation_degenerate: bool
    cv_mean_a: float
    cv_mean_b: float
    cv_pooled_sd: float
    cv_gap_over_sd: float
    oracle_mean_a: float
    oracle_mean_b: float
    oracle_pooled_sd: float
    oracle_gap_over_sd: float
    oracle_better: str
    oracle_order_fraction: float
    selection_accuracy: float
    replication: np.ndarray = field(repr=False, default=None)
    scatter: np.ndarray = field(repr=False, default=None)
    cv_diff_hist: Histogram = field(repr=False, default=None)
    oracle_diff_hist: Histogram = field(repr=False, default=None)
    marginal_hists: dict = field(repr=False, default=None)
    title = "figures"

    def to_text(self) -> str:
        skip = {"replication", "scatter", "cv_diff_hist", "oracle_diff_hist",
                "marginal_hists"}
        items = [(k, v) for k, v in vars(self).items() if k not in skip]
        return render(self.title, items)


def _pooled(a, b):
    return math.sqrt((np.var(a, ddof=1) + np.var(b, ddof=1)) / 2.0)


def paired_summary(table: ReplicationTable, n: int | None = None,
                   bins: int = 30) -> FigureData:
    n = n if n is not None else table.n_values[-1]
    a, b, w = table.paired(n)
    reps = len(w)
    if reps < PAIRED_MIN_REPS:
        raise InsufficientDataError(f"paired summary needs >= {PAIRED_MIN_REPS} replications")
    cva, cvb = w["cv_total_a"].to_numpy(), w["cv_total_b"].to_numpy()
    ora, orb = w["oracle_excess_risk_a"].to_numpy(), w["oracle_excess_risk_b"].to_numpy()
    d_cv, d_or = cva - cvb, ora - orb
    degenerate = np.ptp(cva) == 0.0 or np.ptp(cvb) == 0.0
    corr = math.nan if degenerate else float(np.corrcoef(cva, cvb)[0, 1])

    def _hist(values, lo, hi):
        if not np.isfinite(lo) or not np.isfinite(hi):
            return Histogram(np.array([]), np.array([], dtype=int))
        if lo == hi:
            lo, hi = lo - 0.5, hi + 0.5
        counts, edges = np.histogram(values, bins=bins, range=(lo, hi))
        return Histogram(edges, counts)

    both = np.concatenate([d_cv, d_or])
    finite = both[np.isfinite(both)]
    lo, hi = (finite.min(), finite.max()) if finite.size else (math.nan, math.nan)
    marginals = {}
    for key, xa, xb in (("cv_total", cva, cvb), ("oracle_excess_risk", ora, orb)):
        vals = np.concatenate([xa, xb])
        vals = vals[np.isfinite(vals)]
        mlo, mhi = (vals.min(), vals.max()) if vals.size else (math.nan, math.nan)
        marginals[(a, key)] = _hist(xa, mlo, mhi)
        marginals[(b, key)] = _hist(xb, mlo, mhi)

    cv_sd = _pooled(cva, cvb)
    or_sd = _pooled(ora, orb)
    a_better = float(np.mean(ora < orb))
    b_better = float(np.mean(orb < ora))
    d_dl = (w["delta_sq_a"] - w["delta_sq_b"]).to_numpy()
    decided = d_dl != 0.0
    sel = (float(np.mean(np.sign(d_cv[decided]) == np.sign(d_dl[decided])))
           if decided.any() else math.nan)
    with np.errstate(invalid="ignore", divide="ignore"):
        cv_gap = abs(cva.mean() - cvb.mean()) / cv_sd if cv_sd > 0 else math.nan
        or_gap = abs(ora.mean() - orb.mean()) / or_sd if or_sd > 0 else math.nan
    return FigureData(
        learner_a=a, learner_b=b, n=int(n), reps=reps, correlation=corr,
        correlation_degenerate=bool(degenerate),
        cv_mean_a=float(cva.mean()), cv_mean_b=float(cvb.mean()), cv_pooled_sd=cv_sd,
        cv_gap_over_sd=float(cv_gap),
        oracle_mean_a=float(ora.mean()), oracle_mean_b=float(orb.mean()),
        oracle_pooled_sd=or_sd, oracle_gap_over_sd=float(or_gap),
        oracle_better=a if a_better >= b_better else b,
        oracle_order_fraction=max(a_better, b_better),
        selection_accuracy=sel,
        replication=w.index.to_numpy(),
        scatter=np.column_stack([cva, cvb, ora, orb]),
        cv_diff_hist=_hist(d_cv, lo, hi), oracle_diff_hist=_hist(d_or, lo, hi),
        marginal_hists=marginals,
    )
