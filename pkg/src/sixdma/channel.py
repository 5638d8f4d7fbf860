"""Uplink channel vectors for surface poses and the stacked candidate matrix.

Each user contributes one or more plane-wave paths. For a surface pose the
per-antenna response combines a pure-phase steering vector (a function of
the element positions) with the square root of the direction-dependent
element gain, evaluated in the surface's local frame. The channel to the
whole array stacks the per-surface blocks; the candidate-stacked matrix
evaluates every (position, rotation) pair of a codebook so that selecting
rows reproduces the channel of any chosen pose set exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .codebook import PoseCodebook
from .geometry import AntennaLayout, SurfacePose, pointing_vector, rotation_matrix
from .scenario import UserRealization


@dataclass(frozen=True)
class AntennaPattern:
    """Directional element pattern parameters (gains in dBi, widths in deg)."""

    g_max: float = 8.0
    g_s: float = 25.0
    g_v: float = 25.0
    theta_3db: float = 65.0
    phi_3db: float = 65.0

    def __post_init__(self):
        if min(self.g_max, self.g_s, self.g_v, self.theta_3db, self.phi_3db) <= 0:
            raise ValueError("pattern parameters must be positive")


@dataclass(frozen=True)
class SystemConfig:
    """Carrier, per-user transmit power, noise power and array shape."""

    wavelength: float = 0.125
    power: float = 0.06
    noise_power: float = 1e-12  # -90 dBm
    n_antennas: int = 4
    n_surfaces: int = 16

    def __post_init__(self):
        if min(self.wavelength, self.noise_power) <= 0 or self.power < 0:
            raise ValueError("wavelength/noise must be positive, power nonnegative")
        if min(self.n_antennas, self.n_surfaces) < 1:
            raise ValueError("counts must be >= 1")

    @property
    def snr_scale(self) -> float:
        return self.power / self.noise_power


@dataclass(frozen=True)
class Path:
    """One propagation path: arrival direction of the user and coefficient.

    ``theta``/``phi`` are the elevation/azimuth of the user as seen from
    the reference point, ``f`` the cached unit pointing vector toward the
    user, ``eta`` the complex coefficient to the reference point.
    """

    theta: float
    phi: float
    f: np.ndarray
    eta: complex


def los_path(user_pos: np.ndarray, wavelength: float, seed=None) -> Path:
    """Free-space line-of-sight path for a user at the given position.

    Amplitude lambda / (4*pi*d), phase -2*pi*d/lambda. ``seed`` is accepted
    for interface symmetry with stochastic path models and is unused here.
    """
    user_pos = np.asarray(user_pos, dtype=float)
    d = float(np.linalg.norm(user_pos))
    if d <= 0:
        raise ValueError("user at the reference point has no direction")
    theta = float(np.arcsin(np.clip(user_pos[2] / d, -1.0, 1.0)))
    phi = float(np.arctan2(user_pos[1], user_pos[0]))
    amp = wavelength / (4.0 * np.pi * d)
    eta = amp * np.exp(-2j * np.pi * d / wavelength)
    return Path(theta=theta, phi=phi, f=pointing_vector(theta, phi), eta=complex(eta))


def los_paths(users: UserRealization, wavelength: float) -> list[list[Path]]:
    """One-path (LoS) list per user."""
    return [[los_path(p, wavelength)] for p in users.positions]


def local_angles(rotation: np.ndarray, f: np.ndarray) -> tuple[float, float]:
    """Local elevation/azimuth of an incoming propagation vector ``f``.

    ``rotation`` may be a rotation matrix or an angle triple. The local
    components are [x, y, z] = -R^T f; then theta = pi/2 - arccos(z) and
    phi = arccos(x / hypot(x, y)) signed by y (phi = 0 when the projection
    onto the local x'-y' plane vanishes).
    """
    rot = np.asarray(rotation, dtype=float)
    if rot.shape == (3,):
        rot = rotation_matrix(rot)
    x, y, z = -rot.T @ np.asarray(f, dtype=float)
    theta = np.pi / 2.0 - np.arccos(np.clip(z, -1.0, 1.0))
    hyp = np.hypot(x, y)
    if hyp < 1e-15:
        return float(theta), 0.0
    phi = np.arccos(np.clip(x / hyp, -1.0, 1.0)) * (1.0 if y >= 0 else -1.0)
    return float(theta), float(phi)


def effective_gain(
    theta_local: float, phi_local: float, pattern: AntennaPattern
) -> tuple[float, float]:
    """Composite directional element gain, returned as (dBi, linear).

    A = G_max - min(-(A_H + A_V), G_s) with the parabolic horizontal and
    vertical patterns A_H = -min(12 (phi/phi_3dB)^2, G_s) and
    A_V = -min(12 (theta/theta_3dB)^2, G_v), angles taken in degrees.
    """
    phi_deg = np.degrees(phi_local)
    theta_deg = np.degrees(theta_local)
    a_h = -min(12.0 * (phi_deg / pattern.phi_3db) ** 2, pattern.g_s)
    a_v = -min(12.0 * (theta_deg / pattern.theta_3db) ** 2, pattern.g_v)
    a_dbi = pattern.g_max - min(-(a_h + a_v), pattern.g_s)
    return float(a_dbi), float(10.0 ** (a_dbi / 10.0))


def steering(
    position: np.ndarray,
    rotation: np.ndarray,
    f: np.ndarray,
    layout: AntennaLayout,
    wavelength: float,
) -> np.ndarray:
    """Per-element phase response exp(-j 2 pi / lambda * f . r_n)."""
    rot = np.asarray(rotation, dtype=float)
    if rot.shape == (3,):
        rot = rotation_matrix(rot)
    elems = np.asarray(position, dtype=float) + layout.positions @ rot.T
    phase = -2j * np.pi / wavelength * (elems @ np.asarray(f, dtype=float))
    return np.exp(phase)


def user_channel(
    poses: list[SurfacePose],
    paths: list[Path],
    layout: AntennaLayout,
    pattern: AntennaPattern,
    wavelength: float,
) -> np.ndarray:
    """Channel from one user to all surfaces, stacked in pose order.

    Per surface: sum over paths of eta * sqrt(gain) * steering, where the
    gain is evaluated at the local angles of the propagation vector -f
    (f points toward the user, so a surface facing the user sits at
    boresight).
    """
    if not poses or not paths:
        raise ValueError("need at least one pose and one path")
    n = layout.n_antennas
    h = np.zeros(n * len(poses), dtype=complex)
    for b, pose in enumerate(poses):
        block = np.zeros(n, dtype=complex)
        for path in paths:
            t_loc, p_loc = local_angles(pose.matrix, -path.f)
            _, g = effective_gain(t_loc, p_loc, pattern)
            block += path.eta * np.sqrt(g) * steering(
                pose.position, pose.matrix, path.f, layout, wavelength
            )
        h[b * n : (b + 1) * n] = block
    return h


def channel_matrix(
    poses: list[SurfacePose],
    users: UserRealization,
    layout: AntennaLayout,
    pattern: AntennaPattern,
    wavelength: float,
) -> np.ndarray:
    """(N*B, K) channel matrix for a pose set and a user realization."""
    n_rows = layout.n_antennas * len(poses)
    if users.n_users == 0:
        return np.zeros((n_rows, 0), dtype=complex)
    cols = [
        user_channel(poses, [los_path(p, wavelength)], layout, pattern, wavelength)
        for p in users.positions
    ]
    return np.column_stack(cols)


@dataclass(frozen=True)
class StackedChannel:
    """Channels of all ML candidates: shape (N*M*L, K), position-major.

    Block (m, l) occupies rows [(m*L + l)*N, (m*L + l + 1)*N); selecting
    block rows for a pose choice reproduces :func:`channel_matrix` exactly.
    """

    matrix: np.ndarray
    n_antennas: int
    n_positions: int
    n_rotations: int
    seed: int | None = None

    @property
    def n_users(self) -> int:
        return self.matrix.shape[1]

    def block(self, m: int, l: int) -> np.ndarray:
        n = self.n_antennas
        start = (m * self.n_rotations + l) * n
        return self.matrix[start : start + n]

    def select(self, positions_idx, rotations_idx) -> np.ndarray:
        """Rows of the chosen candidates, stacked in selection order."""
        blocks = [self.block(m, l) for m, l in zip(positions_idx, rotations_idx)]
        if not blocks:
            raise ValueError("empty selection")
        return np.vstack(blocks)


def stacked_channel(
    book: PoseCodebook,
    users: UserRealization,
    layout: AntennaLayout,
    pattern: AntennaPattern,
    sys: SystemConfig,
) -> StackedChannel:
    """Evaluate every codebook candidate against every user."""
    M, L, N = book.n_positions, book.n_rotations, layout.n_antennas
    K = users.n_users
    mat = np.zeros((N * M * L, K), dtype=complex)
    if K:
        # element positions per candidate, shape (M, L, N, 3)
        elems = (
            book.positions[:, None, None, :]
            + np.einsum("mlij,nj->mlni", book.matrices, layout.positions)
        )
        for k, upos in enumerate(users.positions):
            path = los_path(upos, sys.wavelength)
            phases = np.exp(
                -2j * np.pi / sys.wavelength * np.einsum("mlni,i->mln", elems, path.f)
            )
            # local components of the propagation vector -f: -R^T(-f) = R^T f
            loc = np.einsum("mlji,j->mli", book.matrices, path.f)
            theta = np.pi / 2.0 - np.arccos(np.clip(loc[..., 2], -1.0, 1.0))
            hyp = np.hypot(loc[..., 0], loc[..., 1])
            with np.errstate(invalid="ignore", divide="ignore"):
                phi = np.arccos(
                    np.clip(np.where(hyp > 1e-15, loc[..., 0] / hyp, 1.0), -1.0, 1.0)
                ) * np.where(loc[..., 1] >= 0, 1.0, -1.0)
            phi = np.where(hyp > 1e-15, phi, 0.0)
            gains = _gain_grid(theta, phi, pattern)
            mat[:, k] = (path.eta * np.sqrt(gains)[..., None] * phases).reshape(-1)
    return StackedChannel(
        matrix=mat,
        n_antennas=N,
        n_positions=M,
        n_rotations=L,
        seed=users.seed,
    )


def _gain_grid(theta: np.ndarray, phi: np.ndarray, pattern: AntennaPattern) -> np.ndarray:
    """Vectorized linear effective gain over angle arrays (radians)."""
    phi_deg = np.degrees(phi)
    theta_deg = np.degrees(theta)
    a_h = -np.minimum(12.0 * (phi_deg / pattern.phi_3db) ** 2, pattern.g_s)
    a_v = -np.minimum(12.0 * (theta_deg / pattern.theta_3db) ** 2, pattern.g_v)
    a_dbi = pattern.g_max - np.minimum(-(a_h + a_v), pattern.g_s)
    return 10.0 ** (a_dbi / 10.0)


def write_stacked_csv(stacked: StackedChannel, path) -> None:
    """Debug dump: one row per matrix entry as (row, col, re, im)."""
    with open(path, "w") as fh:
        fh.write("# stacked channel dump: row col re im\n")
        fh.write(
            f"# N={stacked.n_antennas} M={stacked.n_positions} "
            f"L={stacked.n_rotations} K={stacked.n_users}\n"
        )
        for i in range(stacked.matrix.shape[0]):
            for j in range(stacked.matrix.shape[1]):
                v = stacked.matrix[i, j]
                fh.write(f"{i} {j} {v.real:.12e} {v.imag:.12e}\n")
