"""Offline pose optimization: conditional gradient over the relaxed problem.

The Monte-Carlo average sum-rate is maximized over the box-relaxed
indicator polytope. Each iteration estimates the gradient by forward finite
differences, finds the best vertex of the linearized constraint polytope
with an exact LP solve, and moves toward it. A scheduled step is halved
until the objective does not decrease (the surrogate is not concave, so the
plain schedule cannot guarantee a monotone trace on its own). The relaxed
solution is rounded through position/rotation utilities and, if the rounded
selection violates a placement rule, repaired greedily before returning.
"""

from __future__ import annotations

import csv
import time
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from .capacity import IndicatorState, RelaxedState, monte_carlo_capacity
from .channel import StackedChannel, SystemConfig
from .codebook import PoseCodebook
from .constraints import (
    ConstraintData,
    FeasibilityReport,
    LinearizedConstraints,
    build_constraint_data,
    check_feasible,
    linearize,
)


class InfeasibleRegionError(RuntimeError):
    """The linearized constraint polytope admits no point."""


@dataclass(frozen=True)
class OfflineConfig:
    """Iteration budget, finite-difference step, step rule and restarts."""

    max_iters: int = 20
    fd_step: float = 1e-4
    step_size: float | None = None  # fixed step in (0, 1]; None = 2/(t+2)
    restarts: int = 1
    central_differences: bool = False
    monotone: bool = True
    fw_gap_tol: float = 1e-7
    seed: int = 0

    def __post_init__(self):
        if self.max_iters < 1 or self.fd_step <= 0 or self.restarts < 1:
            raise ValueError("max_iters/restarts must be >= 1 and fd_step > 0")
        if self.step_size is not None and not (0.0 < self.step_size <= 1.0):
            raise ValueError("fixed step size must lie in (0, 1]")

    def step(self, t: int) -> float:
        if self.step_size is not None:
            return self.step_size
        return 2.0 / (t + 2.0)


@dataclass
class TraceRow:
    iteration: int
    objective: float
    step_size: float
    lp_objective: float
    wall_time: float


@dataclass
class OfflineResult:
    """Selected indices plus the per-iteration trace of the winning restart."""

    state: IndicatorState
    rounded_objective: float
    relaxed_trace: list[float]
    trace: list[TraceRow]
    feasibility: FeasibilityReport
    restart_index: int
    wall_time: float
    repaired: bool = False


def relaxed_capacity(
    z: np.ndarray,
    realizations: list[StackedChannel],
    sys: SystemConfig,
    n_surfaces: int,
    n_positions: int,
    n_rotations: int,
) -> float:
    state = RelaxedState.from_z(z, n_surfaces, n_positions, n_rotations)
    return monte_carlo_capacity(state, realizations, sys)


def gradient_fd(
    z: np.ndarray,
    realizations: list[StackedChannel],
    sys: SystemConfig,
    n_surfaces: int,
    n_positions: int,
    n_rotations: int,
    eps: float = 1e-4,
    central: bool = False,
) -> np.ndarray:
    """Finite-difference gradient of the Monte-Carlo objective over all of z."""

    def value(zz: np.ndarray) -> float:
        return relaxed_capacity(
            zz, realizations, sys, n_surfaces, n_positions, n_rotations
        )

    base = value(z)
    grad = np.zeros_like(z)
    for v in range(z.size):
        bumped = z.copy()
        bumped[v] += eps
        if central:
            lowered = z.copy()
            lowered[v] -= eps
            grad[v] = (value(bumped) - value(lowered)) / (2.0 * eps)
        else:
            grad[v] = (value(bumped) - base) / eps
    return grad


def lp_direction(
    grad: np.ndarray, lin: LinearizedConstraints
) -> tuple[np.ndarray, float]:
    """Vertex of the relaxed polytope maximizing grad . z.

    Solves min -grad^T z over the full (z, w, w_bar) system with an exact
    LP method; returns the vertex and the attained grad . z value.
    """
    cost = np.zeros(lin.n_vars)
    cost[: grad.size] = -np.asarray(grad, dtype=float)
    res = linprog(
        cost,
        A_ub=lin.a_ub,
        b_ub=lin.b_ub,
        A_eq=lin.a_eq,
        b_eq=lin.b_eq,
        bounds=(0.0, 1.0),
        method="highs",
    )
    if res.status == 2:
        raise InfeasibleRegionError(_diagnose_infeasible(lin))
    if not res.success:
        raise RuntimeError(f"direction LP failed: {res.message}")
    return res.x, float(-res.fun)


def _diagnose_infeasible(lin: LinearizedConstraints) -> str:
    """Identify which aggregate row class blocks feasibility.

    Envelope rows alone are always satisfiable, so infeasibility must come
    from the aggregate rows: distance aggregates carry a negative rhs,
    reflection/blockage aggregates a zero rhs with many nonzeros. Dropping
    one class at a time and re-solving names the culprits.
    """
    b_ub = lin.b_ub
    row_nnz = np.diff(lin.a_ub.indptr)
    masks = {
        "distance": b_ub < 0,
        "reflection/blockage": (b_ub == 0) & (row_nnz > 3),
    }
    culprits = []
    for name, mask in masks.items():
        keep = ~mask
        res = linprog(
            np.zeros(lin.n_vars),
            A_ub=lin.a_ub[keep],
            b_ub=b_ub[keep],
            A_eq=lin.a_eq,
            b_eq=lin.b_eq,
            bounds=(0.0, 1.0),
            method="highs",
        )
        if res.status != 2:
            culprits.append(name)
    if culprits:
        return f"constraint region empty; violated row class: {', '.join(culprits)}"
    return "constraint region empty (multiple row classes involved)"


def round_relaxed(
    z: np.ndarray, n_surfaces: int, n_positions: int, n_rotations: int
) -> IndicatorState:
    """Utility rounding: top-B positions by row mass, argmax rotation per row.

    S = sum_b outer(s_b, g_b); the position utility is the row sum of S and
    the b-th surface takes the b-th largest (ties to the lower index); its
    rotation is the argmax of that row.
    """
    rel = RelaxedState.from_z(z, n_surfaces, n_positions, n_rotations)
    s_star = np.einsum("bm,bl->ml", rel.s, rel.g)
    utilities = s_star.sum(axis=1)
    order = np.argsort(-utilities, kind="stable")[:n_surfaces]
    rotations = np.argmax(s_star[order], axis=1)
    return IndicatorState(
        positions=order,
        rotations=rotations,
        n_positions=n_positions,
        n_rotations=n_rotations,
    )


def _compatible(
    m: int, l: int, assigned: list[tuple[int, int]], data: ConstraintData, tol: float = 1e-9
) -> bool:
    """Candidate (m, l) against blockage and every already-placed pair."""
    u = data.u_matrix
    if u[m, l] < -tol:
        return False
    for mp, lp in assigned:
        if data.dist[m, mp] < data.d_min - tol:
            return False
        if u[mp, l] - u[m, l] > tol or u[m, lp] - u[mp, lp] > tol:
            return False
    return True


def repair_state(
    state: IndicatorState,
    data: ConstraintData,
    utilities: np.ndarray,
    rotation_utility: np.ndarray,
) -> IndicatorState | None:
    """Greedy feasibility repair of a rounded selection.

    Surfaces involved in a violation are removed lowest-utility-first until
    the remainder is mutually feasible, then re-placed one by one on the
    highest-utility unused candidate compatible with everything placed so
    far. None when some surface cannot be placed at all.
    """
    B = state.n_surfaces
    M, L = data.n_positions, data.n_rotations
    positions = state.positions.copy()
    rotations = state.rotations.copy()

    active = list(range(B))
    removed: list[int] = []
    while True:
        sub = IndicatorState(positions[active], rotations[active], M, L)
        report = check_feasible(sub, data)
        if report.ok:
            break
        involved = {active[b] for b, _ in report.blockage}
        involved |= {active[b] for b, v, _ in report.reflection + report.distance}
        involved |= {active[v] for b, v, _ in report.reflection + report.distance}
        worst = min(involved, key=lambda b: (utilities[positions[b]], -b))
        active.remove(worst)
        removed.append(worst)
        if not active:
            break

    assigned = [(int(positions[b]), int(rotations[b])) for b in active]
    for b in sorted(removed, key=lambda b: (-utilities[positions[b]], b)):
        used = {m for m, _ in assigned}
        candidates = sorted(
            ((m, l) for m in range(M) for l in range(L) if m not in used),
            key=lambda ml: (-(utilities[ml[0]] + rotation_utility[ml[0], ml[1]]), ml),
        )
        placed = False
        for m, l in candidates:
            if _compatible(m, l, assigned, data):
                positions[b], rotations[b] = m, l
                assigned.append((m, l))
                placed = True
                break
        if not placed:
            return None
    final = IndicatorState(positions, rotations, M, L)
    return final if check_feasible(final, data).ok else None


def _initial_point(
    rng: np.random.Generator, lin: LinearizedConstraints
) -> np.ndarray:
    """Random barycentric start: each indicator row drawn on its simplex."""
    B, M, L = lin.n_surfaces, lin.n_positions, lin.n_rotations
    s = rng.dirichlet(np.ones(M), size=B)
    g = rng.dirichlet(np.ones(L), size=B)
    return lin.aux_for_relaxed(s, g)


def optimize_offline(
    book: PoseCodebook,
    realizations: list[StackedChannel],
    sys: SystemConfig,
    cfg: OfflineConfig,
    lin: LinearizedConstraints | None = None,
) -> OfflineResult:
    """Run the conditional-gradient loop with rounding and restarts."""
    data = build_constraint_data(book)
    if lin is None:
        lin = linearize(sys.n_surfaces, data)
    B, M, L = lin.n_surfaces, lin.n_positions, lin.n_rotations
    n_z = lin.n_z
    t_start = time.perf_counter()

    best: OfflineResult | None = None
    seed_seq = np.random.SeedSequence(cfg.seed)
    for restart, child in enumerate(seed_seq.spawn(cfg.restarts)):
        rng = np.random.default_rng(child)
        x = _initial_point(rng, lin)
        trace_rows: list[TraceRow] = []
        objective_trace: list[float] = []
        obj = relaxed_capacity(x[:n_z], realizations, sys, B, M, L)
        for t in range(cfg.max_iters):
            iter_start = time.perf_counter()
            grad = gradient_fd(
                x[:n_z],
                realizations,
                sys,
                B,
                M,
                L,
                eps=cfg.fd_step,
                central=cfg.central_differences,
            )
            vertex, lp_obj = lp_direction(grad, lin)
            gap = float(grad @ (vertex[:n_z] - x[:n_z]))
            step = cfg.step(t)
            if cfg.monotone:
                accepted = None
                trial_step = step
                for _ in range(25):
                    x_try = x + trial_step * (vertex - x)
                    obj_try = relaxed_capacity(x_try[:n_z], realizations, sys, B, M, L)
                    if obj_try >= obj:
                        accepted = (x_try, obj_try, trial_step)
                        break
                    trial_step *= 0.5
                if accepted is None:
                    step = 0.0
                else:
                    x, obj, step = accepted
            else:
                x = x + step * (vertex - x)
                obj = relaxed_capacity(x[:n_z], realizations, sys, B, M, L)
            objective_trace.append(obj)
            trace_rows.append(
                TraceRow(
                    iteration=t,
                    objective=obj,
                    step_size=step,
                    lp_objective=lp_obj,
                    wall_time=time.perf_counter() - iter_start,
                )
            )
            if gap <= cfg.fw_gap_tol or step == 0.0:
                break

        rel = RelaxedState.from_z(x[:n_z], B, M, L)
        s_star = np.einsum("bm,bl->ml", rel.s, rel.g)
        utilities = s_star.sum(axis=1)
        state = round_relaxed(x[:n_z], B, M, L)
        report = check_feasible(state, data)
        repaired = False
        if not report.ok:
            fixed = repair_state(state, data, utilities, s_star)
            if fixed is None:
                continue  # this restart failed; try the next one
            state, repaired = fixed, True
            report = check_feasible(state, data)
        rounded = monte_carlo_capacity(state, realizations, sys)
        result = OfflineResult(
            state=state,
            rounded_objective=rounded,
            relaxed_trace=objective_trace,
            trace=trace_rows,
            feasibility=report,
            restart_index=restart,
            wall_time=time.perf_counter() - t_start,
            repaired=repaired,
        )
        if best is None or result.rounded_objective > best.rounded_objective:
            best = result
    if best is None:
        raise RuntimeError(
            "every restart produced an unrepairable infeasible rounding"
        )
    best.wall_time = time.perf_counter() - t_start
    return best


def exhaustive_optimum(
    book: PoseCodebook,
    realizations: list[StackedChannel],
    sys: SystemConfig,
    n_surfaces: int,
) -> tuple[IndicatorState, float]:
    """Brute-force search over all feasible one-hot selections (tiny M, L)."""
    from itertools import permutations, product

    data = build_constraint_data(book)
    M, L = book.n_positions, book.n_rotations
    best_state, best_val = None, -np.inf
    for pos in permutations(range(M), n_surfaces):
        for rot in product(range(L), repeat=n_surfaces):
            state = IndicatorState(np.array(pos), np.array(rot), M, L)
            if not check_feasible(state, data).ok:
                continue
            val = monte_carlo_capacity(state, realizations, sys)
            if val > best_val:
                best_state, best_val = state, val
    if best_state is None:
        raise RuntimeError("no feasible selection exists")
    return best_state, best_val


def write_trace_csv(result: OfflineResult, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["iteration", "relaxed_objective", "step_size", "lp_objective", "wall_time_s"]
        )
        for row in result.trace:
            writer.writerow(
                [
                    row.iteration,
                    f"{row.objective:.9f}",
                    f"{row.step_size:.9f}",
                    f"{row.lp_objective:.9f}",
                    f"{row.wall_time:.6f}",
                ]
            )
