"""Placement feasibility rules and their LP-ready linearization.

Three rules couple the selected poses: no surface may face another selected
position (reflection), no surface may face the processing unit (blockage),
and selected positions must keep a minimum distance. In indicator form the
rules are bilinear in the one-hot vectors; products of binaries are replaced
by auxiliary variables boxed with the standard envelope rows
(w <= each factor, w >= sum of factors - 1), which is exact for binaries and
yields a convex feasible set after relaxation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .capacity import IndicatorState
from .codebook import PoseCodebook


@dataclass(frozen=True)
class ConstraintData:
    """Pose-independent constraint inputs.

    ``u_matrix`` (M, L): normal(u_l at position m) . q_m. ``dist`` (M, M):
    pairwise position distances with a zero diagonal.
    """

    u_matrix: np.ndarray
    dist: np.ndarray
    d_min: float

    @property
    def n_positions(self) -> int:
        return self.u_matrix.shape[0]

    @property
    def n_rotations(self) -> int:
        return self.u_matrix.shape[1]


def build_constraint_data(book: PoseCodebook) -> ConstraintData:
    u_matrix = np.einsum("mli,mi->ml", book.normals, book.positions)
    diffs = book.positions[:, None, :] - book.positions[None, :, :]
    dist = np.linalg.norm(diffs, axis=-1)
    np.fill_diagonal(dist, 0.0)
    return ConstraintData(u_matrix=u_matrix, dist=dist, d_min=book.d_min)


@dataclass
class FeasibilityReport:
    """Pass/fail per rule with the violating surface pairs.

    The indicator-form rows (via the U matrix) are what the optimizer
    enforces; when a codebook is supplied the pose-level reflection rule
    n(u_{j_b}) . (q_{i_v} - q_{i_b}) <= 0 is also evaluated, and pairs where
    the two disagree (possible when rotations differ across positions) are
    listed instead of silently resolved.
    """

    reflection: list[tuple[int, int, float]] = field(default_factory=list)
    blockage: list[tuple[int, float]] = field(default_factory=list)
    distance: list[tuple[int, int, float]] = field(default_factory=list)
    pose_reflection: list[tuple[int, int, float]] | None = None
    divergent_pairs: list[tuple[int, int]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not (self.reflection or self.blockage or self.distance)

    @property
    def pose_ok(self) -> bool | None:
        if self.pose_reflection is None:
            return None
        return not (self.pose_reflection or self.blockage or self.distance)

    def summary(self) -> str:
        parts = [
            f"reflection={len(self.reflection)}",
            f"blockage={len(self.blockage)}",
            f"distance={len(self.distance)}",
        ]
        if self.pose_reflection is not None:
            parts.append(f"pose_reflection={len(self.pose_reflection)}")
            parts.append(f"divergent={len(self.divergent_pairs)}")
        return " ".join(parts)


def check_feasible(
    state: IndicatorState,
    data: ConstraintData,
    book: PoseCodebook | None = None,
    tol: float = 1e-9,
) -> FeasibilityReport:
    """Evaluate the three placement rules for a one-hot selection."""
    report = FeasibilityReport()
    B = state.n_surfaces
    pos, rot = state.positions, state.rotations
    for b in range(B):
        u_bb = data.u_matrix[pos[b], rot[b]]
        if u_bb < -tol:
            report.blockage.append((b, float(u_bb)))
        for v in range(B):
            if v == b:
                continue
            excess = data.u_matrix[pos[v], rot[b]] - u_bb
            if excess > tol:
                report.reflection.append((b, v, float(excess)))
            if v > b:
                d = data.dist[pos[b], pos[v]]
                if d < data.d_min - tol:
                    report.distance.append((b, v, float(d)))
    if book is not None:
        report.pose_reflection = []
        for b in range(B):
            normal = book.normals[pos[b], rot[b]]
            for v in range(B):
                if v == b:
                    continue
                excess = float(
                    normal @ (book.positions[pos[v]] - book.positions[pos[b]])
                )
                if excess > tol:
                    report.pose_reflection.append((b, v, excess))
                indicator_bad = data.u_matrix[pos[v], rot[b]] - data.u_matrix[
                    pos[b], rot[b]
                ] > tol
                if indicator_bad != (excess > tol):
                    report.divergent_pairs.append((b, v))
    return report


@dataclass(frozen=True)
class LinearizedConstraints:
    """Sparse linear system over x = [z, w, w_bar], all variables in [0, 1].

    z stacks the B position rows then the B rotation rows; w carries one
    product variable per (b, v, m, l) for the reflection/blockage rules;
    w_bar one per ordered pair (b != v) and position pair (m, m') for the
    distance rule. ``a_ub x <= b_ub`` collects the envelope and aggregate
    rows, ``a_eq x = b_eq`` the per-surface simplex rows.
    """

    a_ub: sp.csr_matrix
    b_ub: np.ndarray
    a_eq: sp.csr_matrix
    b_eq: np.ndarray
    n_surfaces: int
    n_positions: int
    n_rotations: int

    @property
    def n_z(self) -> int:
        return self.n_surfaces * (self.n_positions + self.n_rotations)

    @property
    def n_w(self) -> int:
        return self.n_surfaces**2 * self.n_positions * self.n_rotations

    @property
    def n_wbar(self) -> int:
        return (
            self.n_surfaces * (self.n_surfaces - 1) * self.n_positions**2
        )

    @property
    def n_vars(self) -> int:
        return self.n_z + self.n_w + self.n_wbar

    def s_index(self, b: int, m: int) -> int:
        return b * self.n_positions + m

    def g_index(self, b: int, l: int) -> int:
        return self.n_surfaces * self.n_positions + b * self.n_rotations + l

    def w_index(self, b: int, v: int, m: int, l: int) -> int:
        B, M, L = self.n_surfaces, self.n_positions, self.n_rotations
        return self.n_z + ((b * B + v) * M + m) * L + l

    def wbar_index(self, b: int, v: int, m: int, mp: int) -> int:
        B, M = self.n_surfaces, self.n_positions
        pair = b * (B - 1) + (v if v < b else v - 1)
        return self.n_z + self.n_w + (pair * M + m) * M + mp

    def aux_for_state(self, state: IndicatorState) -> np.ndarray:
        """Full x vector with the product values the envelopes force."""
        return self.aux_for_relaxed(state.s_matrix(), state.g_matrix())

    def aux_for_relaxed(self, s: np.ndarray, g: np.ndarray) -> np.ndarray:
        """x = [z, w, w_bar] with products w = s_v[m] g_b[l], w_bar = s_b[m] s_v[m']."""
        B, M, L = self.n_surfaces, self.n_positions, self.n_rotations
        x = np.zeros(self.n_vars)
        x[: B * M] = np.asarray(s, dtype=float).ravel()
        x[B * M : self.n_z] = np.asarray(g, dtype=float).ravel()
        w = np.einsum("vm,bl->bvml", s, g)  # w[b,v,m,l] = s_v[m] * g_b[l]
        x[self.n_z : self.n_z + self.n_w] = w.reshape(-1)
        if B > 1:
            wbar = np.einsum("bm,vp->bvmp", s, s)  # s_b[m] * s_v[m']
            keep = ~np.eye(B, dtype=bool)
            x[self.n_z + self.n_w :] = wbar[keep].reshape(-1)
        return x


def linearize(n_surfaces: int, data: ConstraintData) -> LinearizedConstraints:
    """Assemble the full linear inequality/equality system for B surfaces."""
    if n_surfaces < 1:
        raise ValueError("need at least one surface")
    B, M, L = n_surfaces, data.n_positions, data.n_rotations
    lin_proto = LinearizedConstraints(
        a_ub=sp.csr_matrix((0, 0)),
        b_ub=np.zeros(0),
        a_eq=sp.csr_matrix((0, 0)),
        b_eq=np.zeros(0),
        n_surfaces=B,
        n_positions=M,
        n_rotations=L,
    )
    n_vars = lin_proto.n_vars
    rows: list[int] = []
    cols: list[int] = []
    vals: list[float] = []
    rhs: list[float] = []

    def add_row(entries: list[tuple[int, float]], bound: float) -> None:
        r = len(rhs)
        for c, v in entries:
            rows.append(r)
            cols.append(c)
            vals.append(v)
        rhs.append(bound)

    u_flat = data.u_matrix
    # envelope rows for every w[b, v, m, l] (meaning s_v[m] * g_b[l])
    for b in range(B):
        for v in range(B):
            for m in range(M):
                for l in range(L):
                    wi = lin_proto.w_index(b, v, m, l)
                    si = lin_proto.s_index(v, m)
                    gi = lin_proto.g_index(b, l)
                    add_row([(wi, 1.0), (si, -1.0)], 0.0)
                    add_row([(wi, 1.0), (gi, -1.0)], 0.0)
                    add_row([(si, 1.0), (gi, 1.0), (wi, -1.0)], 1.0)
    # reflection aggregates: sum U w[b,v] - sum U w[b,b] <= 0, b != v
    for b in range(B):
        for v in range(B):
            if v == b:
                continue
            entries = []
            for m in range(M):
                for l in range(L):
                    entries.append((lin_proto.w_index(b, v, m, l), float(u_flat[m, l])))
                    entries.append(
                        (lin_proto.w_index(b, b, m, l), -float(u_flat[m, l]))
                    )
            add_row(entries, 0.0)
    # blockage aggregates: -sum U w[b,b] <= 0
    for b in range(B):
        entries = [
            (lin_proto.w_index(b, b, m, l), -float(u_flat[m, l]))
            for m in range(M)
            for l in range(L)
        ]
        add_row(entries, 0.0)
    # distance: envelopes for w_bar[b, v, m, m'] and aggregates
    for b in range(B):
        for v in range(B):
            if v == b:
                continue
            for m in range(M):
                for mp in range(M):
                    wi = lin_proto.wbar_index(b, v, m, mp)
                    si = lin_proto.s_index(b, m)
                    sj = lin_proto.s_index(v, mp)
                    add_row([(wi, 1.0), (si, -1.0)], 0.0)
                    add_row([(wi, 1.0), (sj, -1.0)], 0.0)
                    add_row([(si, 1.0), (sj, 1.0), (wi, -1.0)], 1.0)
            entries = [
                (lin_proto.wbar_index(b, v, m, mp), -float(data.dist[m, mp]))
                for m in range(M)
                for mp in range(M)
            ]
            add_row(entries, -data.d_min)

    a_ub = sp.csr_matrix(
        (vals, (rows, cols)), shape=(len(rhs), n_vars)
    )
    b_ub = np.array(rhs)

    eq_rows: list[int] = []
    eq_cols: list[int] = []
    eq_vals: list[float] = []
    for b in range(B):
        for m in range(M):
            eq_rows.append(b)
            eq_cols.append(lin_proto.s_index(b, m))
            eq_vals.append(1.0)
        for l in range(L):
            eq_rows.append(B + b)
            eq_cols.append(lin_proto.g_index(b, l))
            eq_vals.append(1.0)
    a_eq = sp.csr_matrix((eq_vals, (eq_rows, eq_cols)), shape=(2 * B, n_vars))
    b_eq = np.ones(2 * B)

    return LinearizedConstraints(
        a_ub=a_ub,
        b_ub=b_ub,
        a_eq=a_eq,
        b_eq=b_eq,
        n_surfaces=B,
        n_positions=M,
        n_rotations=L,
    )


def satisfies(lin: LinearizedConstraints, x: np.ndarray, tol: float = 1e-9) -> bool:
    """Check a full variable vector against the assembled system."""
    if np.any(x < -tol) or np.any(x > 1.0 + tol):
        return False
    if np.any(lin.a_ub @ x > lin.b_ub + tol):
        return False
    return not np.any(np.abs(lin.a_eq @ x - lin.b_eq) > tol)


def export_lp_text(lin: LinearizedConstraints, path) -> None:
    """Write the sparse system in a simple text triplet format."""
    a_coo = lin.a_ub.tocoo()
    e_coo = lin.a_eq.tocoo()
    with open(path, "w") as fh:
        fh.write("# sparse LP system: sections ub (A x <= b) and eq (A x = b)\n")
        fh.write(
            f"vars {lin.n_vars} z {lin.n_z} w {lin.n_w} wbar {lin.n_wbar}\n"
        )
        fh.write(f"ub_rows {lin.a_ub.shape[0]}\n")
        for r, c, v in zip(a_coo.row, a_coo.col, a_coo.data):
            fh.write(f"ub {r} {c} {v:.12e}\n")
        for r, v in enumerate(lin.b_ub):
            fh.write(f"ub_rhs {r} {v:.12e}\n")
        fh.write(f"eq_rows {lin.a_eq.shape[0]}\n")
        for r, c, v in zip(e_coo.row, e_coo.col, e_coo.data):
            fh.write(f"eq {r} {c} {v:.12e}\n")
        for r, v in enumerate(lin.b_eq):
            fh.write(f"eq_rhs {r} {v:.12e}\n")
