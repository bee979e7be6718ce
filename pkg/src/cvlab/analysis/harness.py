"""Monte Carlo driver: one work unit per (replication, n) cell.

Cell ``(r, n)`` draws everything from ``derive_seed(master_seed, r, n)``:
the dataset, the fold assignment and the oracle feature draws, all shared
by the learners in the cell, plus one fit stream per learner keyed by a
stable hash of its name. Separate fit streams keep the learners' own
randomness independent, so the paired comparison is not helped by
artificially correlated errors. Cells are independent, so any worker
count yields the same table.
"""

from __future__ import annotations

import csv
import logging
import math
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from cvlab import rng
from cvlab.crossval import decompose, decompose_oob, make_folds, oracle_excess_risk
from cvlab.dgp import Dgp, sample_dataset
from cvlab.errors import CvlabError, InvalidConfigError, InvalidInputError, ReplicationError
from cvlab.learners.specs import LearnerSpec

log = logging.getLogger(__name__)

TABLE_COLUMNS = ("replication", "learner", "n", "K", "cv_total", "cv_star", "z",
                 "delta_sq", "oracle_excess_risk", "oracle_se")
_FLOAT_COLUMNS = TABLE_COLUMNS[4:]


@dataclass(frozen=True)
class ExperimentConfig:
    dgp: Dgp
    learners: tuple[LearnerSpec, ...]
    n_grid: tuple[int, ...]
    K: int = 10
    replications: int = 100
    master_seed: int = 0
    mc_draws_oracle: int = 100_000
    name: str = "experiment"

    def __post_init__(self):
        object.__setattr__(self, "learners", tuple(self.learners))
        object.__setattr__(self, "n_grid", tuple(int(n) for n in self.n_grid))
        if self.replications < 1:
            raise InvalidConfigError("replications must be >= 1")
        if len(self.learners) not in (1, 2):
            raise InvalidConfigError("configure one or two learners")
        if len({s.name for s in self.learners}) != len(self.learners):
            raise InvalidConfigError("learner names must be distinct")
        if not self.n_grid or any(b <= a for a, b in zip(self.n_grid, self.n_grid[1:])):
            raise InvalidConfigError("n_grid must be nonempty and strictly increasing")
        if self.n_grid[0] < 1:
            raise InvalidConfigError("sample sizes must be positive")
        if self.mc_draws_oracle < 0:
            raise InvalidConfigError("mc_draws_oracle must be >= 0")
        if any(s.evaluation == "kfold" for s in self.learners):
            if self.K < 2 or self.K > self.n_grid[0]:
                raise InvalidConfigError(f"need 2 <= K <= min(n_grid), got K={self.K}")

    def to_dict(self) -> dict:
        return {
            "experiment": {
                "name": self.name,
                "n_grid": list(self.n_grid),
                "K": self.K,
                "replications": self.replications,
                "master_seed": self.master_seed,
                "mc_draws_oracle": self.mc_draws_oracle,
            },
            "dgp": {"mu": self.dgp.mu_name, "p": self.dgp.p, "noise_sd": self.dgp.noise_sd,
                    "x_law": self.dgp.x_law},
            "learners": [s.to_dict() for s in self.learners],
        }


@dataclass(frozen=True, eq=False)
class ReplicationTable:
    """Rows of per-replication CV terms and oracle errors.

    ``K`` is 0 on rows scored out of bag. ``oracle_excess_risk`` is NaN when
    the experiment ran with ``mc_draws_oracle = 0``.
    """

    frame: pd.DataFrame = field(repr=False)

    @classmethod
    def from_rows(cls, rows) -> "ReplicationTable":
        return cls(pd.DataFrame(list(rows), columns=list(TABLE_COLUMNS)))

    def __len__(self):
        return len(self.frame)

    @property
    def learners(self) -> list[str]:
        return list(dict.fromkeys(self.frame["learner"]))

    @property
    def n_values(self) -> list[int]:
        return sorted(int(n) for n in self.frame["n"].unique())

    def select(self, learner: str | None = None, n: int | None = None) -> pd.DataFrame:
        f = self.frame
        if learner is not None:
            f = f[f["learner"] == learner]
        if n is not None:
            f = f[f["n"] == n]
        return f.sort_values("replication", kind="stable")

    def paired(self, n: int) -> tuple[str, str, pd.DataFrame]:
        """Wide frame for a two-learner table at one n, columns suffixed _a/_b."""
        names = self.learners
        if len(names) != 2:
            raise InvalidInputError(f"need exactly two learners, table has {names}")
        a = self.select(names[0], n).set_index("replication")
        b = self.select(names[1], n).set_index("replication")
        wide = a.join(b, lsuffix="_a", rsuffix="_b", how="inner")
        return names[0], names[1], wide

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(TABLE_COLUMNS)
            for rec in self.frame.itertuples(index=False):
                w.writerow([
                    int(rec.replication), rec.learner, int(rec.n), int(rec.K),
                    *(repr(float(getattr(rec, c))) for c in _FLOAT_COLUMNS),
                ])

    @classmethod
    def from_csv(cls, path) -> "ReplicationTable":
        frame = pd.read_csv(path, dtype={"learner": str}, float_precision="round_trip")
        missing = set(TABLE_COLUMNS) - set(frame.columns)
        if missing:
            raise InvalidInputError(f"{path}: missing columns {sorted(missing)}")
        return cls(frame[list(TABLE_COLUMNS)])


def cell_seed(master_seed: int, replication: int, n: int) -> int:
    return rng.derive_seed(master_seed, replication, n)


def learner_tag(name: str) -> int:
    """Stable per-learner key for the fit streams (independent of learner order)."""
    return zlib.crc32(name.encode("utf-8"))


def run_cell(config: ExperimentConfig, replication: int, n: int) -> list[tuple]:
    seed = cell_seed(config.master_seed, replication, n)
    dgp = config.dgp
    data = sample_dataset(dgp, n, rng.derive_seed(seed, rng.DATA))
    needs_folds = any(s.evaluation == "kfold" for s in config.learners)
    folds = make_folds(n, config.K, rng.derive_seed(seed, rng.FOLDS)) if needs_folds else None
    oracle_seed = rng.derive_seed(seed, rng.ORACLE)
    rows = []
    for spec in config.learners:
        tag = learner_tag(spec.name)
        fit_seed = rng.derive_seed(seed, rng.FIT, tag)
        full_seed = rng.derive_seed(seed, rng.FULL_FIT, tag)
        try:
            learner = spec.build(dgp)
            if spec.evaluation == "oob":
                full = learner.fit(data, full_seed)
                dec = decompose_oob(full, data, dgp.mu)
            else:
                dec = decompose(learner, data, folds, dgp.mu, fit_seed)
                full = learner.fit(data, full_seed) if config.mc_draws_oracle else None
            if config.mc_draws_oracle:
                est = oracle_excess_risk(full, dgp, config.mc_draws_oracle, oracle_seed)
                oracle, oracle_se = est.value, est.se
            else:
                oracle = oracle_se = math.nan
        except (CvlabError, ValueError, ArithmeticError) as exc:
            raise ReplicationError(replication, n, spec.name, exc) from exc
        rows.append((replication, spec.name, n, dec.K, dec.cv_total, dec.cv_star, dec.z,
                     dec.delta_sq, oracle, oracle_se))
    return rows


def _run_cell_args(args):
    return run_cell(*args)


def run_replications(config: ExperimentConfig, workers: int = 1,
                     progress: bool = False) -> ReplicationTable:
    """Evaluate every configured learner on every (replication, n) cell."""
    tasks = [(config, r, n) for n in config.n_grid for r in range(config.replications)]
    rows: list[tuple] = []
    every = max(1, len(tasks) // 20)

    def _collect(results):
        for i, cell_rows in enumerate(results, 1):
            rows.extend(cell_rows)
            if progress and (i % every == 0 or i == len(tasks)):
                log.info("%s: %d/%d cells", config.name, i, len(tasks))

    if workers <= 1:
        _collect(map(_run_cell_args, tasks))
    else:
        chunk = max(1, len(tasks) // (8 * workers))
        with ProcessPoolExecutor(max_workers=workers) as pool:
            _collect(pool.map(_run_cell_args, tasks, chunksize=chunk))
    return ReplicationTable.from_rows(rows)


def learner_gamma(spec: LearnerSpec) -> float | None:
    if spec.kind == "synthetic":
        return float(spec.params["gamma"])
    return None
