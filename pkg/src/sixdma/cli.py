"""Command-line harness: codebook generation, optimizer runs and sweeps.

Every command writes deterministic delimited output plus a JSON metadata
sidecar (resolved config, hash, seeds, wall times) and renders a figure for
the produced result. Identical config and seed yield byte-identical CSVs.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys as _sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import __version__, codebook as cb, plotting
from .config import (
    ConfigError,
    ExperimentConfig,
    default_config,
    load_config,
    normalize_axis,
)
from .constraints import build_constraint_data, check_feasible
from .experiment import (
    ResultRow,
    run_scheme,
    run_sweep_point,
    user_sets,
)
from .offline import write_trace_csv
from .online import write_csm_csv, write_sample_log


def _write_results_csv(rows: list[ResultRow], path: Path, config_hash: str) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(f"# config_hash={config_hash}\n")
        writer = csv.writer(fh)
        writer.writerow(
            ["sweep_axis", "sweep_value", "scheme", "mean_capacity", "std_capacity", "n_seeds"]
        )
        for r in rows:
            writer.writerow(
                [
                    r.sweep_axis,
                    f"{r.sweep_value:.9g}",
                    r.scheme,
                    f"{r.mean_capacity:.9f}",
                    f"{r.std_capacity:.9f}",
                    r.n_seeds,
                ]
            )


def _write_metadata(
    out: Path,
    cfg: ExperimentConfig,
    seed: int,
    command: str,
    runtimes: dict,
    extra: dict | None = None,
) -> None:
    meta = {
        "version": __version__,
        "command": command,
        "seed": seed,
        "config_hash": cfg.config_hash(),
        "resolved_config": cfg.to_text(),
        "runtimes_s": runtimes,
    }
    if extra:
        meta.update(extra)
    with open(out / "metadata.json", "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _load(args) -> ExperimentConfig:
    if args.config:
        return load_config(args.config)
    return default_config()


def _axis_value(cfg: ExperimentConfig, axis: str) -> float:
    """Current config value of a sweep axis (for single-run result rows)."""
    return {
        "power": cfg.system.power,
        "mu": cfg.scenario.mu,
        "xi": cfg.scenario.xi,
        "n_positions": float(cfg.codebook.n_positions),
        "n_rotations": float(cfg.codebook.n_rotations),
    }[axis]


def cmd_generate_codebook(args) -> int:
    from dataclasses import replace

    cfg = _load(args)
    overrides = {}
    if args.kind:
        overrides["kind"] = args.kind
    if args.positions:
        overrides["n_positions"] = args.positions
    if args.rotations:
        overrides["n_rotations"] = args.rotations
    if args.angle_steps:
        overrides["angle_steps"] = args.angle_steps
    if overrides:
        cfg = replace(cfg, codebook=replace(cfg.codebook, **overrides))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    start = time.perf_counter()
    sys_cfg = cfg.system_config()
    from .experiment import build_codebook

    book = build_codebook(cfg.codebook, sys_cfg.wavelength)
    report = cb.validate(book)
    path = out / "codebook.txt"
    cb.write_codebook(book, path)
    with open(path, "a") as fh:
        fh.write(f"# config_hash={cfg.config_hash()}\n")
    plotting.plot_codebook(book, out / "codebook.png", config_hash=cfg.config_hash())
    _write_metadata(
        out,
        cfg,
        args.seed,
        "generate-codebook",
        {"total": time.perf_counter() - start},
        extra={
            "codebook": {
                "kind": book.kind,
                "n_positions": book.n_positions,
                "n_rotations": book.n_rotations,
                "violations": report.summary(),
            }
        },
    )
    print(f"codebook: M={book.n_positions} L={book.n_rotations} -> {path}")
    print(f"validation: {'ok' if report.ok else 'VIOLATIONS'} ({report.summary()})")
    return 0 if report.ok or book.kind == "grid" else 1


def _single_scheme_command(args, scheme: str, cfg: ExperimentConfig | None = None) -> int:
    if cfg is None:
        cfg = _load(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    run = run_scheme(scheme, cfg, args.seed, seed_index=0)
    axis = normalize_axis(cfg.sweep.axis)
    row = ResultRow(
        sweep_axis=axis,
        sweep_value=_axis_value(cfg, axis),
        scheme=scheme,
        mean_capacity=run.capacity,
        std_capacity=0.0,
        n_seeds=1,
        runtime=run.runtime,
    )
    _write_results_csv([row], out / "results.csv", cfg.config_hash())
    extra: dict = {"capacity_bits_s_hz": run.capacity}
    if run.state is not None:
        extra["selected_positions"] = run.state.positions.tolist()
        extra["selected_rotations"] = run.state.rotations.tolist()
        sys_cfg = cfg.system_config()
        from .experiment import build_codebook

        book = build_codebook(cfg.codebook, sys_cfg.wavelength)
        feas = check_feasible(run.state, build_constraint_data(book), book)
        extra["feasibility"] = feas.summary()
        plotting.plot_codebook(
            book, out / "selection.png", state=run.state, config_hash=cfg.config_hash()
        )
    if run.offline is not None:
        write_trace_csv(run.offline, out / "trace.csv")
        plotting.plot_offline_trace(
            run.offline, out / "trace.png", config_hash=cfg.config_hash()
        )
    if run.online is not None:
        write_csm_csv(run.online.table, out / "csm_table.csv")
        write_sample_log(run.online.samples, out / "samples.csv")
        plotting.plot_csm_table(
            run.online.table, out / "csm_table.png", config_hash=cfg.config_hash()
        )
    _write_metadata(out, cfg, args.seed, scheme, {"total": run.runtime}, extra=extra)
    print(f"{scheme}: mean capacity {run.capacity:.6f} bits/s/Hz -> {out/'results.csv'}")
    return 0


def cmd_optimize_offline(args) -> int:
    return _single_scheme_command(args, "offline")


def cmd_optimize_online(args) -> int:
    cfg = _load(args)
    if args.samples:
        from dataclasses import replace

        cfg = replace(cfg, online=replace(cfg.online, n_samples=args.samples))
    return _single_scheme_command(args, "online", cfg)


def cmd_benchmark(args) -> int:
    cfg = _load(args)
    kind = args.kind or cfg.benchmark.kind
    return _single_scheme_command(args, kind)


def cmd_sweep(args) -> int:
    cfg = _load(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    axis = normalize_axis(cfg.sweep.axis)
    schemes = list(cfg.sweep.schemes)
    start = time.perf_counter()
    tasks = list(enumerate(cfg.sweep.values))

    def work(item):
        idx, value = item
        return run_sweep_point(
            cfg, axis, value, idx, args.seed, cfg.sweep.n_seeds, schemes
        )

    if args.threads > 1:
        with ThreadPoolExecutor(max_workers=args.threads) as pool:
            per_point = list(pool.map(work, tasks))
    else:
        per_point = [work(t) for t in tasks]
    rows = [row for point in per_point for row in point]
    _write_results_csv(rows, out / "results.csv", cfg.config_hash())
    plotting.plot_sweep(rows, out / "sweep.png", config_hash=cfg.config_hash())
    runtimes = {f"{r.scheme}@{r.sweep_value:.9g}": r.runtime for r in rows}
    runtimes["total"] = time.perf_counter() - start
    _write_metadata(out, cfg, args.seed, "sweep", runtimes)
    print(f"sweep over {axis}: {len(rows)} rows -> {out/'results.csv'}")
    return 0


def cmd_sample_users(args) -> int:
    """Utility: dump one user realization as CSV (user id, x, y, z)."""
    cfg = _load(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    users = user_sets(cfg.scenario_config(), 1, args.seed, 0)[0]
    from .scenario import write_users_csv

    write_users_csv(users, out / "users.csv")
    print(f"sampled {users.n_users} users -> {out/'users.csv'}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sixdma",
        description="Discrete pose optimization for movable-antenna base stations",
    )
    parser.add_argument("--print-defaults", action="store_true",
                        help="print the default config and exit")
    sub = parser.add_subparsers(dest="command")

    def common(p):
        p.add_argument("--config", type=Path, default=None, help="config file path")
        p.add_argument("--seed", type=int, default=0, help="master seed")
        p.add_argument("--out", type=Path, default=Path("out"), help="output directory")
        p.add_argument("--threads", type=int, default=1, help="parallel sweep workers")

    p = sub.add_parser("generate-codebook", help="build, validate and export a codebook")
    common(p)
    p.add_argument("--kind", choices=["sphere", "grid"], default=None,
                   help="override the configured codebook kind")
    p.add_argument("--M", dest="positions", type=int, default=None,
                   help="override the number of positions")
    p.add_argument("--L", dest="rotations", type=int, default=None,
                   help="override the number of rotations (sphere kind)")
    p.add_argument("--Z", dest="angle_steps", type=int, default=None,
                   help="override the per-axis angle steps (grid kind)")
    p.set_defaults(func=cmd_generate_codebook)

    p = sub.add_parser("optimize-offline", help="statistics-aware optimizer")
    common(p)
    p.set_defaults(func=cmd_optimize_offline)

    p = sub.add_parser("optimize-online", help="measurement-driven optimizer")
    common(p)
    p.add_argument("--T", dest="samples", type=int, default=None,
                   help="override the trial budget (default M^2 L^2)")
    p.set_defaults(func=cmd_optimize_online)

    p = sub.add_parser("benchmark", help="run one sector baseline")
    common(p)
    p.add_argument("--kind", choices=["fpa", "circular", "rotations"], default=None)
    p.set_defaults(func=cmd_benchmark)

    p = sub.add_parser("sweep", help="fan out schemes over a parameter axis")
    common(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("sample-users", help="export one user realization as CSV")
    common(p)
    p.set_defaults(func=cmd_sample_users)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.print_defaults:
        print(default_config().to_text(), end="")
        return 0
    if not getattr(args, "command", None):
        parser.print_help()
        return 2
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=_sys.stderr)
        return 2
    except (ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=_sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
