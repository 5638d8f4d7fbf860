"""Rigid-body geometry for movable antenna surfaces.

Conventions used throughout the package:

* The global frame has the processing-unit center at the origin.
* Each surface carries a local frame whose x'-axis is the outward normal;
  antenna elements lie in the local y'-z' plane.
* A rotation is parameterized by three angles ``u = (alpha, beta, gamma)``
  (rotations w.r.t. the x, y and z axes). ``rotation_matrix`` maps them to
  the closed-form 3x3 matrix below, whose columns are the local axes
  expressed in global coordinates, so local vectors map to global ones via
  ``R @ v_local`` and global vectors to local ones via ``R.T @ v_global``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np


class GimbalLockWarning(UserWarning):
    """Angle extraction hit the degenerate pitch (|R13| = 1) configuration."""


def rotation_matrix(angles: np.ndarray) -> np.ndarray:
    """Build the 3x3 rotation matrix for angles ``(alpha, beta, gamma)``.

    The matrix is the closed form

        [ ca*cg              ca*sg              -sa   ]
        [ sb*sa*cg - cb*sg   sb*sa*sg + cb*cg   ca*sb ]
        [ cb*sa*cg + sb*sg   cb*sa*sg - sb*cg   ca*cb ]

    with ``c_x = cos(x)`` and ``s_x = sin(x)``.
    """
    alpha, beta, gamma = np.asarray(angles, dtype=float)
    ca, sa = np.cos(alpha), np.sin(alpha)
    cb, sb = np.cos(beta), np.sin(beta)
    cg, sg = np.cos(gamma), np.sin(gamma)
    return np.array(
        [
            [ca * cg, ca * sg, -sa],
            [sb * sa * cg - cb * sg, sb * sa * sg + cb * cg, ca * sb],
            [cb * sa * cg + sb * sg, cb * sa * sg - sb * cg, ca * cb],
        ]
    )


def euler_angles(rot: np.ndarray, *, lock_tol: float = 1e-9) -> np.ndarray:
    """Recover ``(alpha, beta, gamma)`` from a rotation matrix.

    Exact inverse of :func:`rotation_matrix`:

        alpha = -arcsin(R13),  beta = arctan2(R23, R33),
        gamma = arctan2(R12, R11)

    so that ``rotation_matrix(euler_angles(R))`` reproduces ``R``
    element-wise. At gimbal lock (|R13| = 1) the in-plane angles are not
    unique; the convention gamma = 0 is used and a
    :class:`GimbalLockWarning` is emitted. The matrix-level roundtrip still
    holds there.
    """
    rot = np.asarray(rot, dtype=float)
    if abs(abs(rot[0, 2]) - 1.0) <= lock_tol:
        warnings.warn(
            "gimbal lock: pitch at +-pi/2, using gamma = 0 convention",
            GimbalLockWarning,
            stacklevel=2,
        )
        if np.hypot(rot[1, 2], rot[2, 2]) < 1e-15:
            # exactly degenerate: beta/gamma not separable, fix gamma = 0;
            # with sa = -+1 and gamma = 0: R21 = sb*sa, R22 = cb
            alpha = -np.arcsin(np.clip(rot[0, 2], -1.0, 1.0))
            beta = np.arctan2(rot[1, 0] * np.sign(-rot[0, 2]), rot[1, 1])
            return np.array([alpha, beta, 0.0])
        # near-lock: the general arctan2 form is still accurate
    alpha = -np.arcsin(np.clip(rot[0, 2], -1.0, 1.0))
    beta = np.arctan2(rot[1, 2], rot[2, 2])
    gamma = np.arctan2(rot[0, 1], rot[0, 0])
    return np.array([alpha, beta, gamma])


def normalize_angles(angles: np.ndarray) -> np.ndarray:
    """Wrap each angle into the canonical range [0, 2*pi)."""
    return np.mod(np.asarray(angles, dtype=float), 2.0 * np.pi)


def pointing_vector(theta: float, phi: float) -> np.ndarray:
    """Unit vector for elevation ``theta`` in [-pi/2, pi/2] and azimuth
    ``phi`` in [-pi, pi]: ``[cos(t)cos(p), cos(t)sin(p), sin(t)]``."""
    if not (-np.pi / 2 - 1e-12 <= theta <= np.pi / 2 + 1e-12):
        raise ValueError(f"elevation {theta} outside [-pi/2, pi/2]")
    if not (-np.pi - 1e-12 <= phi <= np.pi + 1e-12):
        raise ValueError(f"azimuth {phi} outside [-pi, pi]")
    ct = np.cos(theta)
    return np.array([ct * np.cos(phi), ct * np.sin(phi), np.sin(theta)])


LOCAL_NORMAL = np.array([1.0, 0.0, 0.0])


def surface_normal(angles: np.ndarray) -> np.ndarray:
    """Outward normal in global coordinates: ``R(u) @ x_hat'`` (the first
    column of the rotation matrix)."""
    return rotation_matrix(angles) @ LOCAL_NORMAL


@dataclass(frozen=True)
class AntennaLayout:
    """Local element positions of one surface (meters, local frame).

    ``positions`` has shape (N, 3); the centroid sits at the local origin
    and all elements lie in the y'-z' plane for the standard layouts.
    """

    positions: np.ndarray

    def __post_init__(self):
        pos = np.atleast_2d(np.asarray(self.positions, dtype=float))
        if pos.shape[1] != 3 or pos.shape[0] < 1:
            raise ValueError("layout positions must have shape (N, 3) with N >= 1")
        object.__setattr__(self, "positions", pos)
        centroid = pos.mean(axis=0)
        if np.linalg.norm(centroid) > 1e-9:
            raise ValueError(f"layout centroid {centroid} is not at the local origin")

    @property
    def n_antennas(self) -> int:
        return self.positions.shape[0]


def upa_layout(n_antennas: int, spacing: float) -> AntennaLayout:
    """Planar array in the local y'-z' plane, centered at the origin.

    Uses an a x b grid with a*b = N and a the largest divisor of N not
    exceeding sqrt(N) (a square grid whenever N is a perfect square, a line
    for prime N).
    """
    if n_antennas < 1:
        raise ValueError("n_antennas must be >= 1")
    a = int(np.floor(np.sqrt(n_antennas)))
    while n_antennas % a:
        a -= 1
    b = n_antennas // a
    ys = (np.arange(a) - (a - 1) / 2.0) * spacing
    zs = (np.arange(b) - (b - 1) / 2.0) * spacing
    yy, zz = np.meshgrid(ys, zs, indexing="ij")
    pos = np.column_stack([np.zeros(n_antennas), yy.ravel(), zz.ravel()])
    return AntennaLayout(pos)


def line_layout(n_antennas: int, spacing: float) -> AntennaLayout:
    """Uniform line array along the local z'-axis, centered at the origin."""
    zs = (np.arange(n_antennas) - (n_antennas - 1) / 2.0) * spacing
    pos = np.column_stack([np.zeros(n_antennas), np.zeros(n_antennas), zs])
    return AntennaLayout(pos)


def antenna_positions(
    position: np.ndarray, angles: np.ndarray, layout: AntennaLayout
) -> np.ndarray:
    """Global element positions ``q + R(u) @ r_bar_n``; shape (N, 3)."""
    rot = rotation_matrix(angles)
    return np.asarray(position, dtype=float) + layout.positions @ rot.T


@dataclass(frozen=True)
class SurfacePose:
    """One surface's global position and rotation with cached derived data."""

    position: np.ndarray
    angles: np.ndarray
    matrix: np.ndarray = field(default=None)  # type: ignore[assignment]
    normal: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        object.__setattr__(self, "position", np.asarray(self.position, dtype=float))
        object.__setattr__(self, "angles", np.asarray(self.angles, dtype=float))
        if self.matrix is None:
            object.__setattr__(self, "matrix", rotation_matrix(self.angles))
        if self.normal is None:
            object.__setattr__(self, "normal", self.matrix @ LOCAL_NORMAL)

    @classmethod
    def from_matrix(cls, position: np.ndarray, matrix: np.ndarray) -> "SurfacePose":
        """Build a pose from an explicit rotation matrix (angles derived)."""
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", GimbalLockWarning)
            angles = euler_angles(matrix)
        return cls(position=position, angles=angles, matrix=np.asarray(matrix, float))

    def element_positions(self, layout: AntennaLayout) -> np.ndarray:
        return np.asarray(self.position) + layout.positions @ self.matrix.T


def cartesian_to_spherical(point: np.ndarray) -> tuple[float, float, float]:
    """Return ``(r, omega, zeta)``: radius, polar angle from +z, azimuth."""
    x, y, z = np.asarray(point, dtype=float)
    r = float(np.sqrt(x * x + y * y + z * z))
    if r == 0.0:
        raise ValueError("spherical angles undefined at the origin")
    omega = float(np.arccos(np.clip(z / r, -1.0, 1.0)))
    zeta = float(np.arctan2(y, x))
    return r, omega, zeta
