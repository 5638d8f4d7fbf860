"""Discrete pose codebooks: candidate positions and rotations for surfaces.

Two generation paths are provided. The sphere path places positions on a
Fibonacci lattice over the largest sphere inside the site space and derives
rotations from the radial direction plus convex-hull facet normals, which
makes every candidate pair satisfy the reflection/blockage/min-distance
rules by construction. The grid path quantizes the cubic site space
uniformly and samples all three rotation angles on a uniform circle grid,
leaving feasibility to the optimizer's constraints.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import ConvexHull

from . import geometry
from .geometry import SurfacePose

GOLDEN_RATIO = (1.0 + np.sqrt(5.0)) / 2.0

# half-wavelength spacing plus the diagonal of a square half-wavelength panel
def min_surface_distance(wavelength: float) -> float:
    """Minimum allowed center distance between two occupied positions."""
    return (np.sqrt(2.0) / 2.0) * wavelength + wavelength / 2.0


@dataclass(frozen=True)
class PoseCandidate:
    """Candidate ``(position m, rotation l)`` with cached rotation data."""

    m: int
    l: int
    position: np.ndarray
    angles: np.ndarray
    matrix: np.ndarray
    normal: np.ndarray

    def pose(self) -> SurfacePose:
        return SurfacePose(
            position=self.position,
            angles=self.angles,
            matrix=self.matrix,
            normal=self.normal,
        )


@dataclass(frozen=True)
class PoseCodebook:
    """M discrete positions, each with L discrete rotations.

    ``positions`` has shape (M, 3); ``angles`` (M, L, 3); ``matrices``
    (M, L, 3, 3); ``normals`` (M, L, 3). ``site`` is a human-readable
    descriptor of the site space (sphere radius or cube side).
    """

    positions: np.ndarray
    angles: np.ndarray
    matrices: np.ndarray
    normals: np.ndarray
    wavelength: float
    d_min: float
    site: str
    kind: str = "custom"

    @property
    def n_positions(self) -> int:
        return self.positions.shape[0]

    @property
    def n_rotations(self) -> int:
        return self.angles.shape[1]

    @property
    def size(self) -> int:
        return self.n_positions * self.n_rotations

    def candidate(self, m: int, l: int) -> PoseCandidate:
        return PoseCandidate(
            m=m,
            l=l,
            position=self.positions[m],
            angles=self.angles[m, l],
            matrix=self.matrices[m, l],
            normal=self.normals[m, l],
        )

    def pose(self, m: int, l: int) -> SurfacePose:
        return self.candidate(m, l).pose()

    def poses(self, positions_idx, rotations_idx) -> list[SurfacePose]:
        return [self.pose(m, l) for m, l in zip(positions_idx, rotations_idx)]


def _from_angle_grid(positions, angles, wavelength, d_min, site, kind) -> PoseCodebook:
    M, L = angles.shape[0], angles.shape[1]
    matrices = np.empty((M, L, 3, 3))
    normals = np.empty((M, L, 3))
    for m in range(M):
        for l in range(L):
            rot = geometry.rotation_matrix(angles[m, l])
            matrices[m, l] = rot
            normals[m, l] = rot @ geometry.LOCAL_NORMAL
    return PoseCodebook(
        positions=np.asarray(positions, dtype=float),
        angles=np.asarray(angles, dtype=float),
        matrices=matrices,
        normals=normals,
        wavelength=wavelength,
        d_min=d_min,
        site=site,
        kind=kind,
    )


def fibonacci_positions(n_positions: int, radius: float) -> np.ndarray:
    """Fibonacci-lattice points on the sphere of the given radius.

    Point i has z = (1 - 2*(i+0.5)/M) * radius and azimuth 2*pi*i / phi
    with phi the golden ratio. Deterministic in (M, radius).
    """
    if n_positions < 2:
        raise ValueError("need at least 2 positions")
    if radius <= 0:
        raise ValueError("radius must be positive")
    i = np.arange(n_positions)
    z = (1.0 - 2.0 * (i + 0.5) / n_positions) * radius
    azimuth = 2.0 * np.pi * i / GOLDEN_RATIO
    rho = np.sqrt(np.maximum(radius * radius - z * z, 0.0))
    return np.column_stack([rho * np.cos(azimuth), rho * np.sin(azimuth), z])


def _radial_frame(position: np.ndarray) -> np.ndarray:
    """Rotation whose local x'-axis points radially outward.

    y' follows the unit azimuthal direction and z' completes the
    right-handed frame; at the poles (azimuth degenerate) y' = (0, 1, 0).
    """
    a_r = position / np.linalg.norm(position)
    s = np.hypot(a_r[0], a_r[1])
    if s < 1e-12:
        a_az = np.array([0.0, 1.0, 0.0])
    else:
        a_az = np.array([-a_r[1], a_r[0], 0.0]) / s
    return np.column_stack([a_r, a_az, np.cross(a_r, a_az)])


def _facet_frame(normal: np.ndarray, edge: np.ndarray) -> np.ndarray:
    """Rotation with x' along the facet normal and y' along the edge."""
    n = normal / np.linalg.norm(normal)
    e = edge - (edge @ n) * n
    e_norm = np.linalg.norm(e)
    if e_norm < 1e-12:
        raise ValueError("degenerate facet edge")
    e = e / e_norm
    return np.column_stack([n, e, np.cross(n, e)])


def hull_rotations(
    positions: np.ndarray, n_rotations: int | None = None
) -> list[list[np.ndarray]]:
    """Per-position rotation matrices from the convex hull of the positions.

    Each position gets one radial rotation plus one rotation per incident
    hull facet (x' along the outward facet normal, y' along the edge
    between the facet's two other vertices, z' their cross product).
    Degenerate (collinear) facets are skipped with a warning. The lists are
    made uniform in length: when ``n_rotations`` is given, positions with
    more candidates keep the radial one plus the largest-area facets,
    positions with fewer repeat the radial rotation.
    """
    positions = np.asarray(positions, dtype=float)
    if positions.shape[0] < 4:
        raise ValueError("need at least 4 non-coplanar positions for a 3D hull")
    hull = ConvexHull(positions)

    facets_of: dict[int, list[tuple[float, int]]] = {m: [] for m in range(len(positions))}
    facet_frames: dict[int, dict[int, np.ndarray]] = {}
    for fi, simplex in enumerate(hull.simplices):
        normal = hull.equations[fi, :3]
        verts = positions[simplex]
        area = 0.5 * np.linalg.norm(np.cross(verts[1] - verts[0], verts[2] - verts[0]))
        for m in simplex:
            others = sorted(int(v) for v in simplex if v != m)
            edge = positions[others[1]] - positions[others[0]]
            try:
                frame = _facet_frame(normal, edge)
            except ValueError:
                warnings.warn(f"skipping degenerate facet {fi}", stacklevel=2)
                continue
            facets_of[int(m)].append((float(area), fi))
            facet_frames.setdefault(int(m), {})[fi] = frame

    per_position: list[list[np.ndarray]] = []
    for m in range(len(positions)):
        ranked = sorted(facets_of[m], key=lambda t: (-t[0], t[1]))
        frames = [_radial_frame(positions[m])]
        frames += [facet_frames[m][fi] for _, fi in ranked]
        per_position.append(frames)

    if n_rotations is None:
        n_rotations = min(len(f) for f in per_position)
    uniform = []
    for frames in per_position:
        frames = frames[:n_rotations]
        while len(frames) < n_rotations:
            frames.append(frames[0])  # pad by repeating the radial rotation
        uniform.append(frames)
    return uniform


def sphere_codebook(
    n_positions: int,
    n_rotations: int,
    radius: float,
    wavelength: float,
    d_min: float | None = None,
) -> PoseCodebook:
    """Fibonacci-sphere positions with radial/hull-facet rotations."""
    if d_min is None:
        d_min = min_surface_distance(wavelength)
    positions = fibonacci_positions(n_positions, radius)
    frames = hull_rotations(positions, n_rotations)
    angles = np.empty((n_positions, n_rotations, 3))
    with warnings.catch_warnings():
        # poses facing straight up/down are legitimate here
        warnings.simplefilter("ignore", geometry.GimbalLockWarning)
        for m in range(n_positions):
            for l in range(n_rotations):
                angles[m, l] = geometry.euler_angles(frames[m][l])
    return _from_angle_grid(
        positions,
        angles,
        wavelength,
        d_min,
        site=f"sphere radius={radius:.9f}",
        kind="sphere",
    )


def grid_positions(cube_side: float, n_positions: int) -> np.ndarray:
    """First M points of the smallest uniform lattice in the centered cube."""
    n_axis = int(np.ceil(n_positions ** (1.0 / 3.0)))
    while n_axis**3 < n_positions:
        n_axis += 1
    if n_axis == 1:
        coords = np.array([0.0])
    else:
        coords = np.linspace(-cube_side / 2.0, cube_side / 2.0, n_axis)
    xx, yy, zz = np.meshgrid(coords, coords, coords, indexing="ij")
    lattice = np.column_stack([xx.ravel(), yy.ravel(), zz.ravel()])
    return lattice[:n_positions]


def grid_codebook(
    cube_side: float,
    n_positions: int,
    angle_steps: int,
    wavelength: float,
    d_min: float | None = None,
    enforce_spacing: bool = True,
) -> PoseCodebook:
    """Uniform cube lattice positions with a Z^3 rotation-angle grid.

    Each of alpha, beta, gamma takes values {0, 2*pi/Z, ..., 2*pi(Z-1)/Z},
    giving L = Z^3 rotations per position. With ``enforce_spacing`` the
    lattice spacing must be at least d_min (raise otherwise); pass False to
    allow denser grids and rely on the selection constraints instead.
    """
    if angle_steps < 1:
        raise ValueError("angle_steps must be >= 1")
    if d_min is None:
        d_min = min_surface_distance(wavelength)
    positions = grid_positions(cube_side, n_positions)
    if enforce_spacing and n_positions > 1:
        diffs = positions[:, None, :] - positions[None, :, :]
        dist = np.linalg.norm(diffs, axis=-1)
        np.fill_diagonal(dist, np.inf)
        if dist.min() < d_min:
            raise ValueError(
                f"cube side {cube_side} m cannot host {n_positions} lattice "
                f"positions at spacing >= {d_min:.6f} m (got {dist.min():.6f} m)"
            )
    steps = 2.0 * np.pi * np.arange(angle_steps) / angle_steps
    aa, bb, gg = np.meshgrid(steps, steps, steps, indexing="ij")
    rot_grid = np.column_stack([aa.ravel(), bb.ravel(), gg.ravel()])
    angles = np.broadcast_to(
        rot_grid[None, :, :], (n_positions, angle_steps**3, 3)
    ).copy()
    return _from_angle_grid(
        positions,
        angles,
        wavelength,
        d_min,
        site=f"cube side={cube_side:.9f}",
        kind="grid",
    )


@dataclass
class ValidationReport:
    """Per-rule violations over all candidate pairs of a codebook."""

    reflection: list[tuple[int, int, int, float]] = field(default_factory=list)
    blockage: list[tuple[int, int, float]] = field(default_factory=list)
    distance: list[tuple[int, int, float]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not (self.reflection or self.blockage or self.distance)

    @property
    def n_violations(self) -> int:
        return len(self.reflection) + len(self.blockage) + len(self.distance)

    def summary(self) -> str:
        return (
            f"reflection={len(self.reflection)} blockage={len(self.blockage)} "
            f"distance={len(self.distance)}"
        )


def validate(book: PoseCodebook, tol: float = 1e-9) -> ValidationReport:
    """Check every candidate pair against the pose-level placement rules.

    Reflection: n(u_l^(m)) . (q_m' - q_m) <= 0 for every other position m'.
    Blockage:   n(u_l^(m)) . q_m >= 0.
    Distance:   |q_m - q_m'| >= d_min for m != m'.
    Report-only; an empty report is required for online (sphere) codebooks.
    """
    report = ValidationReport()
    M, L = book.n_positions, book.n_rotations
    # blockage margin doubles as the U matrix diagonal contribution
    u_vals = np.einsum("mli,mi->ml", book.normals, book.positions)
    for m in range(M):
        for l in range(L):
            if u_vals[m, l] < -tol:
                report.blockage.append((m, l, float(u_vals[m, l])))
    # reflection: n_{m,l} . q_m' - n_{m,l} . q_m over all m' != m
    proj = np.einsum("mli,pi->mlp", book.normals, book.positions)
    excess = proj - u_vals[:, :, None]
    for m in range(M):
        for l in range(L):
            for mp in range(M):
                if mp != m and excess[m, l, mp] > tol:
                    report.reflection.append((m, l, mp, float(excess[m, l, mp])))
    dist = np.linalg.norm(
        book.positions[:, None, :] - book.positions[None, :, :], axis=-1
    )
    for m in range(M):
        for mp in range(m + 1, M):
            if dist[m, mp] < book.d_min - tol:
                report.distance.append((m, mp, float(dist[m, mp])))
    return report


CODEBOOK_HEADER = "# pose codebook v1"


def write_codebook(book: PoseCodebook, path) -> None:
    """Write the codebook as a diff-stable text file (9 decimal places)."""
    lines = [
        CODEBOOK_HEADER,
        f"M {book.n_positions}",
        f"L {book.n_rotations}",
        f"lambda {book.wavelength:.9f}",
        f"d_min {book.d_min:.9f}",
        f"site {book.site}",
        f"kind {book.kind}",
        "# m l qx qy qz alpha beta gamma",
    ]
    for m in range(book.n_positions):
        for l in range(book.n_rotations):
            q = book.positions[m]
            u = book.angles[m, l]
            lines.append(
                f"{m} {l} "
                f"{q[0]:.9f} {q[1]:.9f} {q[2]:.9f} "
                f"{u[0]:.9f} {u[1]:.9f} {u[2]:.9f}"
            )
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_codebook(path) -> PoseCodebook:
    """Read a codebook file written by :func:`write_codebook`."""
    with open(path) as fh:
        lines = [ln.rstrip("\n") for ln in fh]
    if not lines or lines[0] != CODEBOOK_HEADER:
        raise ValueError(f"{path}: not a pose codebook file")
    meta: dict[str, str] = {}
    rows = []
    for ln in lines[1:]:
        if not ln or ln.startswith("#"):
            continue
        key, _, rest = ln.partition(" ")
        if key in ("M", "L", "lambda", "d_min", "site", "kind"):
            meta[key] = rest
        else:
            parts = ln.split()
            rows.append((int(parts[0]), int(parts[1]), [float(x) for x in parts[2:8]]))
    M, L = int(meta["M"]), int(meta["L"])
    positions = np.zeros((M, 3))
    angles = np.zeros((M, L, 3))
    for m, l, vals in rows:
        positions[m] = vals[:3]
        angles[m, l] = vals[3:]
    return _from_angle_grid(
        positions,
        angles,
        wavelength=float(meta["lambda"]),
        d_min=float(meta["d_min"]),
        site=meta["site"],
        kind=meta.get("kind", "custom"),
    )
