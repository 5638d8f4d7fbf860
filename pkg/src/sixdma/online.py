"""Online pose optimization from measured sum-rates (conditional sample mean).

No channel knowledge is assumed: random pose sets are tried, only the
resulting scalar sum-rate is observed, and each candidate's score is the
average of the measurements taken while it was part of the tried set. The
best rotation per position and the top-B positions are then read off the
score table. The measurement oracle is injected as a callable so the
optimizer genuinely never touches the channel model.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .capacity import IndicatorState, sum_rate_direct
from .channel import AntennaPattern, SystemConfig, channel_matrix
from .codebook import PoseCodebook
from .geometry import AntennaLayout
from .scenario import ScenarioConfig, sample_realization


@dataclass(frozen=True)
class SampleSet:
    """One trial: index t, B (position, rotation) pairs, measured value."""

    index: int
    positions: np.ndarray
    rotations: np.ndarray
    value: float | None = None

    def with_value(self, value: float) -> "SampleSet":
        return SampleSet(self.index, self.positions, self.rotations, value)


def sample_sets(
    book: PoseCodebook, n_surfaces: int, n_samples: int, seed
) -> list[SampleSet]:
    """Draw trial pose sets: positions uniform without replacement,
    one uniform rotation per selected position; deterministic per seed."""
    if book.n_positions < n_surfaces:
        raise ValueError(
            f"cannot place {n_surfaces} surfaces on {book.n_positions} positions"
        )
    if n_samples < 1:
        raise ValueError("need at least one sample")
    rng = np.random.default_rng(seed)
    out = []
    for t in range(n_samples):
        pos = rng.choice(book.n_positions, size=n_surfaces, replace=False)
        rot = rng.integers(0, book.n_rotations, size=n_surfaces)
        out.append(SampleSet(index=t, positions=pos, rotations=rot))
    return out


def default_sample_count(book: PoseCodebook) -> int:
    """Default trial budget M^2 L^2."""
    return book.n_positions**2 * book.n_rotations**2


def make_measurement_oracle(
    book: PoseCodebook,
    scenario: ScenarioConfig,
    layout: AntennaLayout,
    pattern: AntennaPattern,
    sys: SystemConfig,
    env_seed: int,
    frozen_population: bool = False,
) -> Callable[[SampleSet], float]:
    """Simulated measurement: assemble the channel of the trial poses against
    a user realization and return the achievable sum-rate.

    Each trial sees a fresh user draw (seeded per trial index) unless
    ``frozen_population`` keeps one realization for every trial.
    """
    root = np.random.SeedSequence(env_seed)
    frozen = sample_realization(scenario, root) if frozen_population else None

    def measure(sample: SampleSet) -> float:
        if frozen is not None:
            users = frozen
        else:
            users = sample_realization(
                scenario, np.random.SeedSequence(entropy=env_seed, spawn_key=(sample.index,))
            )
        poses = book.poses(sample.positions, sample.rotations)
        h = channel_matrix(poses, users, layout, pattern, sys.wavelength)
        return sum_rate_direct(h, sys)

    return measure


@dataclass
class CsmTable:
    """Per-candidate conditional sample means and membership counts."""

    sums: np.ndarray  # (M, L)
    counts: np.ndarray  # (M, L) ints

    @property
    def means(self) -> np.ndarray:
        """Cell means; empty cells carry 0."""
        with np.errstate(invalid="ignore"):
            return np.where(self.counts > 0, self.sums / np.maximum(self.counts, 1), 0.0)

    @property
    def total_memberships(self) -> int:
        return int(self.counts.sum())


def build_csm_table(samples: list[SampleSet], book: PoseCodebook) -> CsmTable:
    sums = np.zeros((book.n_positions, book.n_rotations))
    counts = np.zeros((book.n_positions, book.n_rotations), dtype=int)
    for sample in samples:
        if sample.value is None:
            raise ValueError(f"sample {sample.index} has no measurement")
        for m, l in zip(sample.positions, sample.rotations):
            sums[m, l] += sample.value
            counts[m, l] += 1
    return CsmTable(sums=sums, counts=counts)


@dataclass
class OnlineResult:
    state: IndicatorState
    table: CsmTable
    samples: list[SampleSet]
    rotation_choice: np.ndarray  # best rotation index per position


def select_from_table(table: CsmTable, n_surfaces: int) -> tuple[IndicatorState, np.ndarray]:
    """Rotation argmax per position, then top-B positions by the selected
    cell means (all ties broken toward the lower index)."""
    means = table.means
    rotation_choice = np.argmax(means, axis=1)
    position_utility = means[np.arange(means.shape[0]), rotation_choice]
    order = np.argsort(-position_utility, kind="stable")[:n_surfaces]
    state = IndicatorState(
        positions=order,
        rotations=rotation_choice[order],
        n_positions=means.shape[0],
        n_rotations=means.shape[1],
    )
    return state, rotation_choice


def optimize_csm(
    book: PoseCodebook,
    n_surfaces: int,
    measure: Callable[[SampleSet], float],
    n_samples: int | None = None,
    seed: int = 0,
) -> OnlineResult:
    """Algorithm: draw trials, measure each, average per candidate, select."""
    if n_samples is None:
        n_samples = default_sample_count(book)
    samples = sample_sets(book, n_surfaces, n_samples, seed)
    measured = [s.with_value(float(measure(s))) for s in samples]
    table = build_csm_table(measured, book)
    state, rotation_choice = select_from_table(table, n_surfaces)
    return OnlineResult(
        state=state, table=table, samples=measured, rotation_choice=rotation_choice
    )


def write_csm_csv(table: CsmTable, path) -> None:
    means = table.means
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["m", "l", "count", "mean"])
        for m in range(table.sums.shape[0]):
            for l in range(table.sums.shape[1]):
                writer.writerow([m, l, int(table.counts[m, l]), f"{means[m, l]:.9f}"])


def write_sample_log(samples: list[SampleSet], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "positions", "rotations", "value"])
        for s in samples:
            writer.writerow(
                [
                    s.index,
                    " ".join(map(str, s.positions.tolist())),
                    " ".join(map(str, s.rotations.tolist())),
                    "" if s.value is None else f"{s.value:.9f}",
                ]
            )
