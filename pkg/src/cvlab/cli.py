"""Command-line front end: ``cvlab run | decompose | rates``.

Exit status is 0 on success, 2 for unusable input (config, schema,
preconditions) and 1 for failures while computing.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import sys
import time
from pathlib import Path

from cvlab import __version__
from cvlab._accel import BACKEND
from cvlab.analysis.artifacts import write_figure_csvs, write_rates_csv
from cvlab.analysis.checks import (
    PAIRED_MIN_REPS,
    PROP1_MIN_REPS,
    paired_summary,
    prop1_check,
    prop2_check,
    rate_estimate,
    scaling_from_table,
)
from cvlab.analysis.harness import learner_gamma, run_replications
from cvlab.config import (
    ConfigError,
    _Locator,
    load_run_config,
    parse_dgp,
    parse_learner,
    parse_toml,
    read_source,
)
from cvlab.crossval import decompose, make_folds, write_decomposition_csv
from cvlab.dgp import Dataset, Dgp
from cvlab.errors import CvlabError, InvalidConfigError, InvalidInputError

log = logging.getLogger("cvlab")

EXIT_OK, EXIT_RUNTIME, EXIT_USAGE = 0, 1, 2


class UsageError(CvlabError):
    pass


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def config_digest(cfg_dict: dict) -> str:
    blob = json.dumps(cfg_dict, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


def cmd_run(args) -> int:
    ref = f"preset:{args.preset}" if args.preset else args.config
    if not ref:
        raise UsageError("run needs --config PATH or --preset NAME")
    run = load_run_config(ref, seed=args.seed, reps=args.reps, n_grid=args.n)
    cfg = run.experiment
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    log.info("running %s: %d replications x n=%s, %d worker(s), %s kernels", cfg.name,
             cfg.replications, list(cfg.n_grid), args.workers, BACKEND)
    table = run_replications(cfg, workers=args.workers, progress=True)
    artifacts = ["replications.csv"]
    table.to_csv(out / "replications.csv")

    sections = []
    if "prop1" in run.reports:
        for spec in cfg.learners:
            for n in cfg.n_grid:
                if cfg.replications < PROP1_MIN_REPS:
                    sections.append(f"[prop1]\nlearner = {spec.name}\nn = {n}\n"
                                    f"skipped = fewer than {PROP1_MIN_REPS} replications\n")
                    continue
                sections.append(prop1_check(table, cfg.dgp, spec.name, n).to_text())
    if "prop2" in run.reports and len(cfg.learners) == 2:
        gammas = {s.name: learner_gamma(s) for s in cfg.learners}
        gammas = {k: v for k, v in gammas.items() if v is not None}
        sections.append(prop2_check(table, gammas or None).to_text())
    if "scaling" in run.reports and len(cfg.n_grid) >= 2:
        for spec in cfg.learners:
            gamma = learner_gamma(spec)
            if gamma is not None:
                sections.append(scaling_from_table(table, spec.name, gamma).to_text())
    if ("figures" in run.reports and len(cfg.learners) == 2
            and cfg.replications >= PAIRED_MIN_REPS):
        for n in cfg.n_grid:
            fig = paired_summary(table, n)
            artifacts += write_figure_csvs(fig, out, suffix=f"_n{n}")
            sections.append(fig.to_text())
    if sections:
        (out / "report.txt").write_text("\n".join(sections))
        artifacts.append("report.txt")
        sys.stdout.write("\n".join(sections))

    manifest = {
        "config_digest": config_digest(cfg.to_dict()),
        "config": cfg.to_dict(),
        "master_seed": cfg.master_seed,
        "artifacts": artifacts,
        "tool_version": __version__,
        "kernel_backend": BACKEND,
        "workers": args.workers,
        "wall_clock_seconds": round(time.perf_counter() - t0, 3),
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    log.info("wrote %d artifacts to %s", len(artifacts) + 1, out)
    return EXIT_OK


def _learner_and_dgp(ref: str, mu: str | None, p: int | None):
    text, source = read_source(ref)
    loc = _Locator(text, source)
    doc = parse_toml(text, source)
    if "learner" not in doc:
        raise loc.error("missing [learner] table")
    spec = parse_learner(doc["learner"], loc, "learner")
    default = None
    if mu is not None or "dgp" not in doc:
        kwargs = {"mu_name": mu or "indicator_sigmoid"}
        if p is not None:
            kwargs["p"] = p
        default = Dgp(**kwargs)
    dgp = default if mu is not None else parse_dgp(doc, loc, default)
    if p is not None and dgp.p != p:
        dgp = Dgp(p=p, mu_name=dgp.mu_name, noise_sd=dgp.noise_sd, x_law=dgp.x_law)
    return spec, dgp, doc, loc


def cmd_decompose(args) -> int:
    data = Dataset.from_csv(args.data)
    spec, dgp, _, _ = _learner_and_dgp(args.config, args.mu, data.p)
    folds = make_folds(data.n, args.K, args.seed)
    learner = spec.build(dgp)
    dec = decompose(learner, data, folds, dgp.mu, args.seed)
    row = dec.as_row(replication=0, learner=spec.name)
    if args.out:
        write_decomposition_csv(args.out, [row])
    write_decomposition_csv(sys.stdout, [row])
    return EXIT_OK


def cmd_rates(args) -> int:
    spec, dgp, doc, loc = _learner_and_dgp(args.config, args.dgp, None)
    block = doc.get("rates", {})
    n_grid = args.n or block.get("n_grid", [100, 400, 1600, 6400])
    reps = args.reps or block.get("reps", 20)
    seed = args.seed if args.seed is not None else block.get("seed", 0)
    mc = block.get("mc_draws", 20_000)
    report = rate_estimate(spec, dgp, n_grid, reps, seed, mc_draws=mc)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_rates_csv(report, out / "rates.csv")
    (out / "rates.txt").write_text(report.to_text())
    print(f"gamma_hat = {report.gamma_hat:.4f} +/- {report.gamma_se:.4f}")
    sys.stdout.write(report.to_text())
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cvlab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"cvlab {__version__}")
    parser.add_argument("-q", "--quiet", action="store_true", help="no progress lines")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a Monte Carlo experiment")
    run.add_argument("--config", help="experiment TOML file")
    run.add_argument("--preset", help="bundled preset name, e.g. rosset-comment-fig1")
    run.add_argument("--out", required=True, help="output directory")
    run.add_argument("--seed", type=int, help="override master_seed")
    run.add_argument("--workers", type=int, default=1)
    run.add_argument("--reps", type=int, help="override replications")
    run.add_argument("--n", type=_int_list, help="override n_grid, e.g. 400,1600")
    run.set_defaults(func=cmd_run)

    dec = sub.add_parser("decompose", help="CV decomposition of one dataset")
    dec.add_argument("--data", required=True, help="CSV with header x1,...,xp,y")
    dec.add_argument("--config", required=True, help="TOML with a [learner] table")
    dec.add_argument("--K", type=int, required=True)
    dec.add_argument("--seed", type=int, default=0)
    dec.add_argument("--mu", help="true mean function (default: [dgp].mu or indicator_sigmoid)")
    dec.add_argument("--out", help="also write the row to this CSV file")
    dec.set_defaults(func=cmd_decompose)

    rates = sub.add_parser("rates", help="estimate the excess-risk rate exponent")
    rates.add_argument("--config", required=True, help="TOML with a [learner] table")
    rates.add_argument("--dgp", help="mean function preset (overrides [dgp].mu)")
    rates.add_argument("--n", type=_int_list, help="sample-size grid")
    rates.add_argument("--reps", type=int)
    rates.add_argument("--seed", type=int)
    rates.add_argument("--out", default=".", help="directory for rates.csv")
    rates.set_defaults(func=cmd_rates)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO,
                        format="%(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except (ConfigError, UsageError, InvalidInputError, InvalidConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CvlabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
