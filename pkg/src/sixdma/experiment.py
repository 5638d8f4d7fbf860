"""End-to-end experiment runs: codebooks, seeded realization sets, schemes.

One scheme run = (build or load the codebook) + (draw training material) +
(optimize or sweep the baseline) + (score the final configuration on an
evaluation realization set). Seeds are derived from a single master seed
through named spawn keys so that runs are reproducible and, when schemes
are compared at the same sweep point, they see matched evaluation sets.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, replace

import numpy as np

from . import codebook as cb
from .benchmarks import BenchmarkKind, BenchmarkSetup, run_benchmark
from .capacity import IndicatorState, sum_rate_direct
from .channel import AntennaPattern, StackedChannel, SystemConfig, channel_matrix, stacked_channel
from .codebook import PoseCodebook
from .config import CodebookConfig, ExperimentConfig
from .constraints import linearize, build_constraint_data
from .geometry import AntennaLayout, upa_layout
from .offline import OfflineConfig, OfflineResult, optimize_offline
from .online import OnlineResult, default_sample_count, make_measurement_oracle, optimize_csm
from .scenario import ScenarioConfig, UserRealization, sample_realization

# spawn-key namespaces for seed derivation
_KEY_TRAIN, _KEY_EVAL, _KEY_OPT, _KEY_ENV = 1, 2, 3, 4


def derived_seed(master: int, *key: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(entropy=master, spawn_key=tuple(key))


def build_codebook(cfg: CodebookConfig, wavelength: float) -> PoseCodebook:
    if cfg.kind == "file":
        return cb.read_codebook(cfg.file)
    if cfg.kind == "sphere":
        return cb.sphere_codebook(
            cfg.n_positions, cfg.n_rotations, cfg.radius, wavelength
        )
    if cfg.kind == "grid":
        return cb.grid_codebook(
            cfg.cube_side,
            cfg.n_positions,
            cfg.angle_steps,
            wavelength,
            enforce_spacing=cfg.enforce_spacing,
        )
    raise ValueError(f"unknown codebook kind {cfg.kind!r}")


def user_sets(
    scenario: ScenarioConfig, n: int, master: int, *key: int
) -> list[UserRealization]:
    return [
        sample_realization(scenario, derived_seed(master, *key, i)) for i in range(n)
    ]


def stacked_sets(
    book: PoseCodebook,
    users: list[UserRealization],
    layout: AntennaLayout,
    pattern: AntennaPattern,
    sys: SystemConfig,
) -> list[StackedChannel]:
    return [stacked_channel(book, u, layout, pattern, sys) for u in users]


@dataclass
class SchemeRun:
    """Outcome of one scheme at one seed: evaluated mean capacity + details."""

    scheme: str
    capacity: float
    runtime: float
    state: IndicatorState | None = None
    offline: OfflineResult | None = None
    online: OnlineResult | None = None


def evaluate_state(
    book: PoseCodebook,
    state: IndicatorState,
    eval_users: list[UserRealization],
    layout: AntennaLayout,
    pattern: AntennaPattern,
    sys: SystemConfig,
) -> float:
    poses = book.poses(state.positions, state.rotations)
    total = 0.0
    for users in eval_users:
        h = channel_matrix(poses, users, layout, pattern, sys.wavelength)
        total += sum_rate_direct(h, sys)
    return total / len(eval_users)


def run_scheme(
    scheme: str,
    cfg: ExperimentConfig,
    master_seed: int,
    seed_index: int,
    book: PoseCodebook | None = None,
    eval_users: list[UserRealization] | None = None,
    lin_cache: dict | None = None,
) -> SchemeRun:
    """Run one scheme end to end at one seed index.

    ``book``/``eval_users``/``lin_cache`` can be shared across calls (e.g.
    across schemes at one sweep point) so comparisons are matched.
    """
    sys = cfg.system_config()
    pattern = cfg.pattern_config()
    scenario = cfg.scenario_config()
    layout = upa_layout(sys.n_antennas, sys.wavelength / 2.0)
    if eval_users is None:
        eval_users = user_sets(
            scenario, cfg.evaluation.n_realizations, master_seed, _KEY_EVAL, seed_index
        )
    start = time.perf_counter()

    if scheme in ("fpa", "circular", "rotations"):
        setup = BenchmarkSetup(
            kind=BenchmarkKind(scheme),
            total_antennas=sys.n_antennas * sys.n_surfaces,
            ring_radius=cfg.benchmark.ring_radius,
            n_position_steps=cfg.benchmark.position_steps,
            n_rotation_steps=cfg.benchmark.rotation_steps,
        )
        res = run_benchmark(setup, eval_users, pattern, sys)
        return SchemeRun(
            scheme=scheme,
            capacity=res.capacity,
            runtime=time.perf_counter() - start,
        )

    if book is None:
        book = build_codebook(cfg.codebook, sys.wavelength)

    if scheme == "offline":
        train_users = user_sets(
            scenario, cfg.offline.omega, master_seed, _KEY_TRAIN, seed_index
        )
        train = stacked_sets(book, train_users, layout, pattern, sys)
        opt_seed = int(
            derived_seed(master_seed, _KEY_OPT, seed_index).generate_state(1)[0]
        )
        ocfg = OfflineConfig(
            max_iters=cfg.offline.max_iters,
            fd_step=cfg.offline.fd_step,
            step_size=cfg.offline.step_size,
            restarts=cfg.offline.restarts,
            central_differences=cfg.offline.central_differences,
            seed=opt_seed,
        )
        lin = None
        if lin_cache is not None:
            key = (id(book), sys.n_surfaces)
            lin = lin_cache.get(key)
            if lin is None:
                lin = linearize(sys.n_surfaces, build_constraint_data(book))
                lin_cache[key] = lin
        result = optimize_offline(book, train, sys, ocfg, lin=lin)
        capacity = evaluate_state(book, result.state, eval_users, layout, pattern, sys)
        return SchemeRun(
            scheme=scheme,
            capacity=capacity,
            runtime=time.perf_counter() - start,
            state=result.state,
            offline=result,
        )

    if scheme == "online":
        env_seed = int(
            derived_seed(master_seed, _KEY_ENV, seed_index).generate_state(1)[0]
        )
        measure = make_measurement_oracle(
            book,
            scenario,
            layout,
            pattern,
            sys,
            env_seed=env_seed,
            frozen_population=cfg.online.frozen_population,
        )
        n_samples = cfg.online.n_samples or default_sample_count(book)
        sample_seed = int(
            derived_seed(master_seed, _KEY_OPT, seed_index).generate_state(1)[0]
        )
        result = optimize_csm(
            book, sys.n_surfaces, measure, n_samples=n_samples, seed=sample_seed
        )
        capacity = evaluate_state(book, result.state, eval_users, layout, pattern, sys)
        return SchemeRun(
            scheme=scheme,
            capacity=capacity,
            runtime=time.perf_counter() - start,
            state=result.state,
            online=result,
        )

    raise ValueError(f"unknown scheme {scheme!r}")


@dataclass
class ResultRow:
    """One line of a results table."""

    sweep_axis: str
    sweep_value: float
    scheme: str
    mean_capacity: float
    std_capacity: float
    n_seeds: int
    runtime: float


def apply_sweep_value(cfg: ExperimentConfig, axis: str, value: float) -> ExperimentConfig:
    """Return a config with one swept parameter replaced."""
    if axis == "power":
        return replace(cfg, system=replace(cfg.system, power=value))
    if axis == "mu":
        return replace(cfg, scenario=replace(cfg.scenario, mu=value))
    if axis == "xi":
        return replace(cfg, scenario=replace(cfg.scenario, xi=value))
    if axis == "n_positions":
        return replace(cfg, codebook=replace(cfg.codebook, n_positions=int(value)))
    if axis == "n_rotations":
        return replace(cfg, codebook=replace(cfg.codebook, n_rotations=int(value)))
    raise ValueError(f"unknown sweep axis {axis!r}")


def run_sweep_point(
    cfg: ExperimentConfig,
    axis: str,
    value: float,
    value_index: int,
    master_seed: int,
    n_seeds: int,
    schemes: list[str],
) -> list[ResultRow]:
    """All schemes at one sweep value, matched eval sets per seed index."""
    point_cfg = apply_sweep_value(cfg, axis, value)
    sys = point_cfg.system_config()
    scenario = point_cfg.scenario_config()
    needs_book = any(s in ("offline", "online") for s in schemes)
    book = build_codebook(point_cfg.codebook, sys.wavelength) if needs_book else None
    lin_cache: dict = {}
    rows = []
    per_scheme: dict[str, list[float]] = {s: [] for s in schemes}
    per_scheme_time: dict[str, float] = {s: 0.0 for s in schemes}
    for i in range(n_seeds):
        eval_users = user_sets(
            scenario,
            point_cfg.evaluation.n_realizations,
            master_seed,
            _KEY_EVAL,
            value_index,
            i,
        )
        for scheme in schemes:
            run = run_scheme(
                scheme,
                point_cfg,
                master_seed,
                seed_index=value_index * 10_000 + i,
                book=book,
                eval_users=eval_users,
                lin_cache=lin_cache,
            )
            per_scheme[scheme].append(run.capacity)
            per_scheme_time[scheme] += run.runtime
    for scheme in schemes:
        vals = np.array(per_scheme[scheme])
        rows.append(
            ResultRow(
                sweep_axis=axis,
                sweep_value=value,
                scheme=scheme,
                mean_capacity=float(vals.mean()),
                std_capacity=float(vals.std(ddof=1)) if len(vals) > 1 else 0.0,
                n_seeds=len(vals),
                runtime=per_scheme_time[scheme],
            )
        )
    return rows
