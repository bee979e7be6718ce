"""TOML experiment configs and the bundled presets.

A run config has three parts::

    [experiment]
    name = "prop-suite"
    n_grid = [400, 1600, 6400]     # or n = 1600
    K = 10
    replications = 1000
    master_seed = 20191101
    mc_draws_oracle = 2000         # 0 skips the oracle excess-risk column
    reports = ["prop1", "prop2", "scaling", "figures"]

    [dgp]
    mu = "indicator_sigmoid"       # indicator_sigmoid | linear | zero
    p = 10
    noise_sd = 1.0

    [[learners]]                   # one or two blocks, see cvlab.learners.specs
    name = "fast"
    kind = "synthetic"
    gamma = 0.35

The ``decompose`` and ``rates`` subcommands read a single ``[learner]`` table
instead, plus optional ``[dgp]`` and ``[rates]`` (``n_grid``, ``reps``,
``mc_draws``, ``seed``) tables.
"""

from __future__ import annotations

import re
import sys
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Any

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from cvlab.analysis.harness import ExperimentConfig
from cvlab.dgp import Dgp
from cvlab.errors import CvlabError
from cvlab.learners.specs import LearnerSpec

REPORTS = ("prop1", "prop2", "scaling", "figures")
_EXPERIMENT_KEYS = {"name", "n_grid", "n", "K", "replications", "master_seed",
                    "mc_draws_oracle", "reports"}
_DGP_KEYS = {"mu", "p", "noise_sd", "x_law"}


class ConfigError(CvlabError):
    """A malformed config, anchored to a source line when one can be found."""

    def __init__(self, message: str, source: str = "<config>", line: int | None = None):
        self.message = message
        self.source = source
        self.line = line
        where = f"{source}:{line}" if line else source
        super().__init__(f"{where}: {message}")


@dataclass(frozen=True)
class RunConfig:
    experiment: ExperimentConfig
    reports: tuple[str, ...]


def preset_names() -> list[str]:
    return sorted(p.name[:-5] for p in resources.files("cvlab.presets").iterdir()
                  if p.name.endswith(".toml"))


def preset_text(name: str) -> str:
    res = resources.files("cvlab.presets") / f"{name}.toml"
    if not res.is_file():
        raise ConfigError(f"unknown preset {name!r}; available: {preset_names()}",
                          source=f"preset:{name}")
    return res.read_text()


def read_source(ref: str) -> tuple[str, str]:
    """``(text, label)`` for a file path or a ``preset:NAME`` reference."""
    if ref.startswith("preset:"):
        name = ref.split(":", 1)[1]
        return preset_text(name), f"preset:{name}"
    path = Path(ref)
    try:
        return path.read_text(), str(path)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc.strerror}", source=str(path)) from None


class _Locator:
    def __init__(self, text: str, source: str):
        self.lines = text.splitlines()
        self.source = source

    def table(self, name: str, index: int = 0) -> int | None:
        pat = re.compile(r"^\s*\[\[?\s*" + re.escape(name) + r"\s*\]\]?\s*(#.*)?$")
        hits = [i + 1 for i, ln in enumerate(self.lines) if pat.match(ln)]
        return hits[index] if index < len(hits) else None

    def key(self, key: str, table: str | None = None, index: int = 0) -> int | None:
        """Line of ``key`` inside the given table, else the table header line."""
        start = (self.table(table, index) or 0) if table else 0
        pat = re.compile(r"^\s*" + re.escape(key) + r"\s*=")
        for i in range(start, len(self.lines)):
            line = self.lines[i]
            if table and line.lstrip().startswith("["):
                break
            if pat.match(line):
                return i + 1
        return start or None

    def error(self, message, key=None, table=None, index=0) -> ConfigError:
        line = self.key(key, table, index) if key else (self.table(table, index) if table else None)
        return ConfigError(message, self.source, line)


def parse_toml(text: str, source: str) -> dict[str, Any]:
    try:
        return tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        m = re.search(r"line (\d+)", str(exc))
        raise ConfigError(f"TOML syntax error: {exc}", source,
                          int(m.group(1)) if m else None) from None


def _typed(loc, table, key, value, kind, index=0):
    ok = {
        int: isinstance(value, int) and not isinstance(value, bool),
        float: isinstance(value, (int, float)) and not isinstance(value, bool),
        str: isinstance(value, str),
    }[kind]
    if not ok:
        raise loc.error(f"{table}.{key} must be {kind.__name__}, got {value!r}", key, table,
                        index)
    return kind(value)


def parse_dgp(doc: dict, loc: _Locator, default: Dgp | None = None) -> Dgp:
    block = doc.get("dgp")
    if block is None:
        if default is not None:
            return default
        raise loc.error("missing [dgp] table")
    unknown = set(block) - _DGP_KEYS
    if unknown:
        raise loc.error(f"unknown [dgp] keys {sorted(unknown)}", sorted(unknown)[0], "dgp")
    kwargs = {}
    if "mu" in block:
        kwargs["mu_name"] = _typed(loc, "dgp", "mu", block["mu"], str)
    if "p" in block:
        kwargs["p"] = _typed(loc, "dgp", "p", block["p"], int)
    if "noise_sd" in block:
        kwargs["noise_sd"] = _typed(loc, "dgp", "noise_sd", block["noise_sd"], float)
    if "x_law" in block:
        kwargs["x_law"] = _typed(loc, "dgp", "x_law", block["x_law"], str)
    try:
        return Dgp(**kwargs)
    except CvlabError as exc:
        raise loc.error(str(exc), table="dgp") from None


def parse_learner(block: dict, loc: _Locator, table: str, index: int = 0) -> LearnerSpec:
    if not isinstance(block, dict):
        raise loc.error(f"[{table}] must be a table", table=table, index=index)
    for key in ("name", "kind"):
        if key not in block:
            raise loc.error(f"learner block missing {key!r}", table=table, index=index)
    try:
        return LearnerSpec.from_dict(block)
    except CvlabError as exc:
        raise loc.error(str(exc), table=table, index=index) from None


def load_run_config(ref: str, *, seed: int | None = None, reps: int | None = None,
                    n_grid: list[int] | None = None) -> RunConfig:
    text, source = read_source(ref)
    loc = _Locator(text, source)
    doc = parse_toml(text, source)
    exp = doc.get("experiment")
    if exp is None:
        raise loc.error("missing [experiment] table")
    unknown = set(exp) - _EXPERIMENT_KEYS
    if unknown:
        key = sorted(unknown)[0]
        raise loc.error(f"unknown [experiment] key {key!r}", key, "experiment")
    if "n_grid" in exp and "n" in exp:
        raise loc.error("give either n or n_grid, not both", "n", "experiment")
    if "n_grid" in exp:
        grid = exp["n_grid"]
        if not isinstance(grid, list) or not grid:
            raise loc.error("experiment.n_grid must be a nonempty list", "n_grid", "experiment")
        grid = [_typed(loc, "experiment", "n_grid", g, int) for g in grid]
    elif "n" in exp:
        grid = [_typed(loc, "experiment", "n", exp["n"], int)]
    else:
        raise loc.error("experiment needs n or n_grid", table="experiment")
    reports = exp.get("reports", [])
    if not isinstance(reports, list) or any(r not in REPORTS for r in reports):
        raise loc.error(f"experiment.reports must be a list drawn from {REPORTS}", "reports",
                        "experiment")
    blocks = doc.get("learners")
    if not isinstance(blocks, list) or not blocks:
        raise loc.error("need one or two [[learners]] blocks")
    learners = [parse_learner(b, loc, "learners", i) for i, b in enumerate(blocks)]
    dgp = parse_dgp(doc, loc)
    fields = {
        "name": _typed(loc, "experiment", "name", exp.get("name", Path(source).stem), str),
        "K": _typed(loc, "experiment", "K", exp.get("K", 10), int),
        "replications": _typed(loc, "experiment", "replications",
                               exp.get("replications", 100), int),
        "master_seed": _typed(loc, "experiment", "master_seed", exp.get("master_seed", 0), int),
        "mc_draws_oracle": _typed(loc, "experiment", "mc_draws_oracle",
                                  exp.get("mc_draws_oracle", 100_000), int),
    }
    if seed is not None:
        fields["master_seed"] = seed
    if reps is not None:
        fields["replications"] = reps
    if n_grid is not None:
        grid = list(n_grid)
    if fields["master_seed"] < 0:
        raise loc.error("master_seed must be >= 0", "master_seed", "experiment")
    for i, spec in enumerate(learners):
        try:
            spec.build(dgp)
        except CvlabError as exc:
            raise loc.error(str(exc), table="learners", index=i) from None
    try:
        cfg = ExperimentConfig(dgp=dgp, learners=tuple(learners), n_grid=tuple(grid), **fields)
    except CvlabError as exc:
        raise loc.error(str(exc), table="experiment") from None
    return RunConfig(cfg, tuple(reports))
