"""Random user populations: Poisson counts over a hotspot + background mix.

The coverage region is a spherical annulus around the base station with a
few non-overlapping spherical hotspot sub-regions inside it. The density is
piecewise constant: rho0 everywhere plus an extra rho_v inside hotspot v.
The extras are chosen so the mean user counts inside the hotspots follow
the configured weights (1:2:3 by default) and the background fraction of
the total mean is xi.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

# default hotspot center directions (azimuths 25/155/275 deg in the z=0
# plane, >= 60 deg apart and deliberately off the 0/120/240 sector anchors
# used by the baselines); the distances and radii follow the standard setup
_DEF_AZIMUTHS = np.deg2rad([25.0, 155.0, 275.0])


@dataclass(frozen=True)
class Hotspot:
    center: np.ndarray
    radius: float
    weight: float

    def __post_init__(self):
        object.__setattr__(self, "center", np.asarray(self.center, dtype=float))

    @property
    def volume(self) -> float:
        return 4.0 / 3.0 * np.pi * self.radius**3


@dataclass(frozen=True)
class ScenarioConfig:
    """Mean count, annulus bounds, hotspots and the regular-user fraction."""

    mu: float = 40.0
    r_inner: float = 30.0
    r_outer: float = 200.0
    hotspots: tuple[Hotspot, ...] = ()
    xi: float = 0.2

    # derived piecewise densities (users / m^3)
    rho0: float = field(init=False)
    rho_extra: np.ndarray = field(init=False)

    def __post_init__(self):
        if not (0.0 <= self.xi <= 1.0):
            raise ValueError("xi must lie in [0, 1]")
        if self.r_outer <= self.r_inner or self.r_inner <= 0:
            raise ValueError("need 0 < r_inner < r_outer")
        for h in self.hotspots:
            d = np.linalg.norm(h.center)
            if d - h.radius < self.r_inner or d + h.radius > self.r_outer:
                raise ValueError(f"hotspot at {h.center} not inside the annulus")
        for i, a in enumerate(self.hotspots):
            for b in self.hotspots[i + 1 :]:
                if np.linalg.norm(a.center - b.center) < a.radius + b.radius:
                    raise ValueError("hotspots overlap")
        object.__setattr__(self, "rho0", self.xi * self.mu / self.region_volume)
        object.__setattr__(self, "rho_extra", self._solve_extras())

    @property
    def region_volume(self) -> float:
        return 4.0 / 3.0 * np.pi * (self.r_outer**3 - self.r_inner**3)

    def _solve_extras(self) -> np.ndarray:
        """Extra hotspot densities making in-hotspot means follow the weights.

        Target mean inside hotspot v: weight_v / sum(weights) of the total
        in-hotspot mass. Negative solutions (possible when xi is close to 1
        and the background alone overshoots a small hotspot's share) are
        clamped to zero and the remaining extras rescaled so the total extra
        mass stays (1 - xi) * mu.
        """
        if not self.hotspots:
            return np.zeros(0)
        vols = np.array([h.volume for h in self.hotspots])
        weights = np.array([h.weight for h in self.hotspots], dtype=float)
        extra_mass = (1.0 - self.xi) * self.mu
        total_in_hotspots = self.rho0 * vols.sum() + extra_mass
        targets = total_in_hotspots * weights / weights.sum()
        extras = targets - self.rho0 * vols
        extras = np.maximum(extras, 0.0)
        if extras.sum() > 0:
            extras *= extra_mass / extras.sum()
        return extras / vols  # densities

    def hotspot_means(self) -> np.ndarray:
        """Mean user count inside each hotspot (background + extra)."""
        vols = np.array([h.volume for h in self.hotspots])
        return (self.rho0 + self.rho_extra) * vols

    def region_means(self) -> np.ndarray:
        """Mean counts for (background region, hotspot 1, ..., hotspot V)."""
        vols = np.array([h.volume for h in self.hotspots])
        background = self.rho0 * (self.region_volume - vols.sum())
        return np.concatenate([[background], self.hotspot_means()])


def default_scenario(mu: float = 40.0, xi: float = 0.2) -> ScenarioConfig:
    """Annulus 30-200 m with hotspots at 40/60/100 m, radii 5/10/15 m."""
    dists = [40.0, 60.0, 100.0]
    radii = [5.0, 10.0, 15.0]
    hotspots = tuple(
        Hotspot(
            center=np.array([d * np.cos(a), d * np.sin(a), 0.0]),
            radius=r,
            weight=w,
        )
        for d, r, a, w in zip(dists, radii, _DEF_AZIMUTHS, [1.0, 2.0, 3.0])
    )
    return ScenarioConfig(mu=mu, hotspots=hotspots, xi=xi)


def density(point: np.ndarray, cfg: ScenarioConfig) -> float:
    """Piecewise-constant user density at a point inside the region."""
    point = np.asarray(point, dtype=float)
    r = np.linalg.norm(point)
    if not (cfg.r_inner <= r <= cfg.r_outer):
        raise ValueError(f"point at distance {r:.3f} m is outside the region")
    for v, h in enumerate(cfg.hotspots):
        if np.linalg.norm(point - h.center) <= h.radius:
            return cfg.rho0 + float(cfg.rho_extra[v])
    return cfg.rho0


@dataclass(frozen=True)
class UserRealization:
    """One sampled user set: positions (K, 3) in the global frame."""

    positions: np.ndarray
    seed: int | None = None

    @property
    def n_users(self) -> int:
        return self.positions.shape[0]


def _uniform_in_ball(rng: np.random.Generator, n: int, radius: float) -> np.ndarray:
    direction = rng.normal(size=(n, 3))
    direction /= np.linalg.norm(direction, axis=1, keepdims=True)
    r = radius * rng.random(n) ** (1.0 / 3.0)
    return direction * r[:, None]


def _uniform_in_annulus(
    rng: np.random.Generator, n: int, r_inner: float, r_outer: float
) -> np.ndarray:
    direction = rng.normal(size=(n, 3))
    direction /= np.linalg.norm(direction, axis=1, keepdims=True)
    u = rng.random(n)
    r = (r_inner**3 + u * (r_outer**3 - r_inner**3)) ** (1.0 / 3.0)
    return direction * r[:, None]


def sample_realization(cfg: ScenarioConfig, seed) -> UserRealization:
    """Draw K ~ Poisson(mu) users at density-weighted random locations.

    Each user picks a region (background or one hotspot) with probability
    proportional to the region's mean count, then falls uniformly inside
    it (background points are redrawn until they avoid every hotspot).
    Deterministic for a given seed.
    """
    rng = np.random.default_rng(seed)
    k = int(rng.poisson(cfg.mu))
    means = cfg.region_means()
    if means.sum() <= 0 or k == 0:
        return UserRealization(positions=np.zeros((0, 3)), seed=_seed_int(seed))
    probs = means / means.sum()
    categories = rng.choice(len(means), size=k, p=probs)
    positions = np.zeros((k, 3))
    bg = np.flatnonzero(categories == 0)
    if bg.size:
        remaining = bg
        while remaining.size:
            draws = _uniform_in_annulus(rng, remaining.size, cfg.r_inner, cfg.r_outer)
            inside_hotspot = np.zeros(remaining.size, dtype=bool)
            for h in cfg.hotspots:
                inside_hotspot |= (
                    np.linalg.norm(draws - h.center, axis=1) <= h.radius
                )
            positions[remaining[~inside_hotspot]] = draws[~inside_hotspot]
            remaining = remaining[inside_hotspot]
    for v, h in enumerate(cfg.hotspots):
        idx = np.flatnonzero(categories == v + 1)
        if idx.size:
            positions[idx] = h.center + _uniform_in_ball(rng, idx.size, h.radius)
    return UserRealization(positions=positions, seed=_seed_int(seed))


def _seed_int(seed) -> int | None:
    try:
        return int(seed)
    except (TypeError, ValueError):
        return None


def sample_region_counts(
    cfg: ScenarioConfig, n_samples: int, seed
) -> np.ndarray:
    """Vectorized per-realization region counts, shape (n_samples, 1 + V).

    Column 0 counts background users, column v the users inside hotspot v.
    Marginally identical to counting the users of
    :func:`sample_realization` per region (same Poisson/categorical split),
    intended for fast statistics over many realizations.
    """
    rng = np.random.default_rng(seed)
    ks = rng.poisson(cfg.mu, size=n_samples)
    means = cfg.region_means()
    probs = means / means.sum()
    return rng.multinomial(ks, probs)


def write_users_csv(realization: UserRealization, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["user", "x", "y", "z"])
        for i, pos in enumerate(realization.positions):
            writer.writerow([i, f"{pos[0]:.9f}", f"{pos[1]:.9f}", f"{pos[2]:.9f}"])
