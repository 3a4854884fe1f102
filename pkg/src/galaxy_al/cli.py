"""Command-line surface.

Subcommands: one-shot or sequential batch selection over score files
(``select``), full simulation runs emitting metrics CSVs (``simulate``),
statistical verification of the balancedness and noise-tolerance guarantees
(``verify``), and the labeling service (``serve``).

Exit codes: 0 ok; 1 bound violation in verify; 2 format/config error or
insufficient trials; 3 no unlabeled examples remain; 4 sequential selection
without an oracle file.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import bisection, scorefile, simpool, strategies
from .builder import validate_score_matrix
from .core import (
    FormatError,
    GalaxyError,
    InputError,
    LabeledSet,
    PoolExhaustedError,
)
from .engine import galaxy_select_batch

EXIT_OK = 0
EXIT_BOUND_VIOLATION = 1
EXIT_FORMAT = 2
EXIT_POOL_EXHAUSTED = 3
EXIT_NO_ORACLE = 4

log = logging.getLogger("galaxy")


def _configure_logging() -> None:
    level = os.environ.get("GALAXY_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING))


def _load_scores(args) -> np.ndarray:
    if getattr(args, "scores_csv", None):
        return scorefile.read_scores_csv(args.scores_csv)
    if args.scores is None:
        raise FormatError("one of --scores or --scores-csv is required")
    return scorefile.read_scores(args.scores)


def cmd_select(args) -> int:
    raw = _load_scores(args)
    scores = validate_score_matrix(raw)
    n, k = scores.shape
    labeled = LabeledSet()
    for idx, lbl in scorefile.read_labels_csv(args.labels, n=n, k=k):
        labeled.add(idx, lbl)
    if args.batch < 1:
        raise FormatError(f"--batch must be >= 1, got {args.batch}")
    rng = np.random.default_rng(args.seed)

    if args.strategy == "galaxy":
        if args.oracle is None:
            print("error: --strategy galaxy requires --oracle", file=sys.stderr)
            return EXIT_NO_ORACLE
        truth = dict(scorefile.read_labels_csv(args.oracle, n=n, k=k))

        def oracle(x: int) -> int:
            if x not in truth:
                raise FormatError(f"oracle file lacks a label for queried id {x}")
            return truth[x]

        batch, _ = galaxy_select_batch(scores, labeled, oracle, args.batch, rng)
        with open(args.out, "w", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(["index", "provenance"])
            for x, tag in zip(batch.ids, batch.provenance):
                writer.writerow([x, tag])
        return EXIT_OK

    if args.strategy == "confidence":
        batch = strategies.confidence_sampling_batch(scores, labeled, args.batch)
    elif args.strategy == "mlp":
        batch = strategies.most_likely_positive_batch(
            scores, labeled, args.batch, set(range(k - 1))
        )
    elif args.strategy == "random":
        batch = strategies.random_batch(labeled, n, args.batch, rng)
    else:  # pragma: no cover - argparse enforces choices
        raise FormatError(f"unknown strategy {args.strategy}")
    with open(args.out, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["index"])
        for x in batch.ids:
            writer.writerow([x])
    return EXIT_OK


def _pool_from_config(cfg: dict, seed: int):
    quality = simpool.QualityModel(**cfg.get("quality", {}))
    if "skew" in cfg:
        quality.skew = float(cfg["skew"])
    if "preset" in cfg:
        return simpool.make_preset_pool(cfg["preset"], quality, seed)
    for key in ("n", "k", "epsilon"):
        if key not in cfg:
            raise FormatError(f"config needs 'preset' or explicit 'n','k','epsilon' ({key} missing)")
    return simpool.make_imbalanced_pool(
        int(cfg["n"]), int(cfg["k"]), float(cfg["epsilon"]), quality, seed
    )


def cmd_simulate(args) -> int:
    try:
        cfg = json.loads(Path(args.config).read_text())
    except (OSError, json.JSONDecodeError) as e:
        raise FormatError(f"cannot read config: {e}") from e
    strategies_list = cfg.get("strategies", ["galaxy"])
    b = int(cfg.get("B", 100))
    t = int(cfg.get("T", 10))
    seed = int(cfg.get("seed", 0))
    repeats = int(cfg.get("repeats", 1))
    if b < 1 or t < 1 or repeats < 1:
        raise FormatError("B, T and repeats must all be >= 1")

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    pool0, _ = _pool_from_config(cfg, seed)
    if t * b > pool0.n:
        raise FormatError(f"budget T*B = {t * b} exceeds pool size {pool0.n}")

    summary_rows = []
    for strat in strategies_list:
        runs = []
        for r in range(repeats):
            pool, provider = _pool_from_config(cfg, seed + r)
            runs.append(simpool.run_strategy(pool, provider, strat, t, b, seed + r))
        acc = np.array([[m.acc_bal for m in run] for run in runs])
        idl = np.array([[m.id_labels for m in run] for run in runs])
        with open(out_dir / f"{strat}.csv", "w", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(["round", "labels_used", "acc_bal", "id_labels", "strategy"])
            for i in range(t):
                writer.writerow(
                    [i, runs[0][i].labels_used, acc[:, i].mean(), idl[:, i].mean(), strat]
                )
        for i in range(t):
            se_a = acc[:, i].std(ddof=1) / math.sqrt(repeats) if repeats > 1 else ""
            se_l = idl[:, i].std(ddof=1) / math.sqrt(repeats) if repeats > 1 else ""
            summary_rows.append(
                [strat, i, acc[:, i].mean(), se_a, idl[:, i].mean(), se_l]
            )
    with open(out_dir / "summary.csv", "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(
            ["strategy", "round", "acc_bal_mean", "acc_bal_se", "id_labels_mean", "id_labels_se"]
        )
        writer.writerows(summary_rows)
    return EXIT_OK


THM51_GRID = [(z, n) for z in range(1, 6) for n in (4, 8, 16, 64, 256)]
COR52_GRID = [
    (bp, z, n)
    for bp in (8, 32, 128)
    for z in (1, 2, 3)
    for n in (16, 64, 256)
    if bp < n
]
THM54_DELTAS = (0.05, 0.1, 0.3)


def cmd_verify(args) -> int:
    rng = np.random.default_rng(args.seed)
    trials = args.trials
    failures = []

    if args.suite in ("thm51", "cor52", "thm54") and trials < 1000:
        print(f"error: suite {args.suite} needs at least 1000 trials", file=sys.stderr)
        return EXIT_FORMAT

    if args.suite == "thm51":
        for z, n_prime in THM51_GRID:
            est = bisection.estimate_balance_ratio_mc(z, n_prime, trials, rng)
            bound = bisection.bisection_balance_bound(z, n_prime)
            ok = est.ratio >= bound - 3 * est.se
            print(
                f"thm51 z={z} n'={n_prime}: estimate={est.ratio:.4f} "
                f"bound={bound:.4f} se={est.se:.5f} {'PASS' if ok else 'FAIL'}"
            )
            if not ok:
                failures.append(f"z={z},n'={n_prime}")
    elif args.suite == "cor52":
        for b_prime, z, n_prime in COR52_GRID:
            est = bisection.estimate_batched_balance_mc(b_prime, z, n_prime, trials, rng)
            bound, y = bisection.galaxy_balance_bound(b_prime, z, n_prime)
            ok = est.ratio >= bound - 3 * est.se
            print(
                f"cor52 B'={b_prime} z={z} n'={n_prime}: estimate={est.ratio:.4f} "
                f"bound={bound:.4f} (y={y:g}) se={est.se:.5f} {'PASS' if ok else 'FAIL'}"
            )
            if not ok:
                failures.append(f"B'={b_prime},z={z},n'={n_prime}")
    elif args.suite == "prop53":
        tally = bisection.uncertainty_worst_case(200, 50)
        trace, _ = bisection.skewed_region_scores(200, 50)
        contrast = bisection.simulate_bisection(trace, rng)
        ok = tally.m_id == 0 and tally.m_od == 50 and contrast.m_id >= 1
        print(
            f"prop53: confidence-sampling m_id={tally.m_id} m_od={tally.m_od} "
            f"(ratio 0); bisection on same region m_id={contrast.m_id} "
            f"{'PASS' if ok else 'FAIL'}"
        )
        if not ok:
            failures.append("prop53")
    elif args.suite == "thm54":
        n = 1024
        for delta in THM54_DELTAS:
            wins = 0
            for _ in range(trials):
                n_id = int(rng.integers(1, n))
                ok_trial, _ = bisection.simulate_noisy_bisection(
                    n_id, n - n_id, delta, rng
                )
                wins += ok_trial
            freq = wins / trials
            sigma = math.sqrt(max(freq * (1 - freq), 1e-12) / trials)
            ok = freq >= 1 - delta - 3 * sigma
            print(
                f"thm54 delta={delta}: success={freq:.4f} "
                f"target>={1 - delta:.2f}-3s {'PASS' if ok else 'FAIL'}"
            )
            if not ok:
                failures.append(f"delta={delta}")
    if failures:
        print(f"bound violations: {', '.join(failures)}", file=sys.stderr)
        return EXIT_BOUND_VIOLATION
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    from .server import create_app

    app = create_app(args.data_dir)
    uvicorn.run(app, host=args.host, port=args.port)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="galaxy",
        description="Batch active learning selection for extremely imbalanced pools",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("select", help="select one batch from a score file")
    p.add_argument("--scores", help="GXSM binary score file")
    p.add_argument("--scores-csv", help="CSV score matrix (small-test fallback)")
    p.add_argument("--labels", required=True, help="CSV of already-observed labels")
    p.add_argument("--batch", type=int, required=True)
    p.add_argument(
        "--strategy", choices=["galaxy", "confidence", "mlp", "random"], required=True
    )
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--oracle", help="ground-truth CSV, required for --strategy galaxy")
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("simulate", help="run a simulation config, emit metrics CSVs")
    p.add_argument("--config", required=True)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("verify", help="statistical verification of the guarantees")
    p.add_argument(
        "--suite", choices=["thm51", "cor52", "prop53", "thm54"], required=True
    )
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("serve", help="run the labeling service")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--data-dir", default="./galaxy-sessions")
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    _configure_logging()
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except PoolExhaustedError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_POOL_EXHAUSTED
    except (FormatError, InputError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_FORMAT
    except GalaxyError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_FORMAT


if __name__ == "__main__":
    sys.exit(main())
