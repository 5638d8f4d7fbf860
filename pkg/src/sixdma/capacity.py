"""Selection-indicator algebra and multiple-access sum-rate evaluation.

A selection of B surfaces is a pair of index vectors (position, rotation)
per surface, equivalently one-hot indicator vectors stacked into a single
binary vector z. The sum-rate uses the log-det multiple-access capacity;
for the stacked candidate matrix the selection acts as a 0/1 (or, relaxed,
fractional) diagonal weight on the candidate blocks, which keeps one code
path valid for both the integer problem and its continuous relaxation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import StackedChannel, SystemConfig


@dataclass(frozen=True)
class IndicatorState:
    """One-hot selection: position and rotation index per surface."""

    positions: np.ndarray  # (B,) ints in [0, M)
    rotations: np.ndarray  # (B,) ints in [0, L)
    n_positions: int
    n_rotations: int

    def __post_init__(self):
        pos = np.asarray(self.positions, dtype=int)
        rot = np.asarray(self.rotations, dtype=int)
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "rotations", rot)
        if pos.shape != rot.shape or pos.ndim != 1 or pos.size < 1:
            raise ValueError("positions/rotations must be equal-length 1-D arrays")
        if pos.min() < 0 or pos.max() >= self.n_positions:
            raise ValueError("position index out of range")
        if rot.min() < 0 or rot.max() >= self.n_rotations:
            raise ValueError("rotation index out of range")

    @property
    def n_surfaces(self) -> int:
        return self.positions.size

    @property
    def distinct_positions(self) -> bool:
        """Whether no two surfaces share a position (the distance rule
        rejects shared positions, but such states must be representable)."""
        return len(set(self.positions.tolist())) == self.positions.size

    def s_matrix(self) -> np.ndarray:
        """(B, M) stack of one-hot position indicator rows."""
        s = np.zeros((self.n_surfaces, self.n_positions))
        s[np.arange(self.n_surfaces), self.positions] = 1.0
        return s

    def g_matrix(self) -> np.ndarray:
        """(B, L) stack of one-hot rotation indicator rows."""
        g = np.zeros((self.n_surfaces, self.n_rotations))
        g[np.arange(self.n_surfaces), self.rotations] = 1.0
        return g

    def z_vector(self) -> np.ndarray:
        return np.concatenate([self.s_matrix().ravel(), self.g_matrix().ravel()])


@dataclass(frozen=True)
class RelaxedState:
    """Box-relaxed selection: each indicator row lies on its simplex."""

    s: np.ndarray  # (B, M), rows sum to 1, entries in [0, 1]
    g: np.ndarray  # (B, L)

    def __post_init__(self):
        object.__setattr__(self, "s", np.asarray(self.s, dtype=float))
        object.__setattr__(self, "g", np.asarray(self.g, dtype=float))
        if self.s.ndim != 2 or self.g.ndim != 2 or self.s.shape[0] != self.g.shape[0]:
            raise ValueError("s and g must be 2-D with matching surface count")

    @property
    def n_surfaces(self) -> int:
        return self.s.shape[0]

    def z_vector(self) -> np.ndarray:
        return np.concatenate([self.s.ravel(), self.g.ravel()])

    @classmethod
    def from_z(cls, z: np.ndarray, n_surfaces: int, n_positions: int, n_rotations: int):
        z = np.asarray(z, dtype=float)
        split = n_surfaces * n_positions
        return cls(
            s=z[:split].reshape(n_surfaces, n_positions),
            g=z[split:].reshape(n_surfaces, n_rotations),
        )


State = IndicatorState | RelaxedState


def _as_relaxed(state: State) -> RelaxedState:
    if isinstance(state, IndicatorState):
        return RelaxedState(s=state.s_matrix(), g=state.g_matrix())
    return state


def selection_matrix(state: IndicatorState) -> np.ndarray:
    """(B, M*L) binary matrix; row b selects candidate (i_b, j_b).

    Candidate columns are position-major (index m*L + l), matching the
    stacked channel's block order, so Q applied blockwise to the stacked
    matrix reproduces the directly assembled channel.
    """
    if not isinstance(state, IndicatorState):
        raise ValueError("selection_matrix requires a one-hot state")
    B = state.n_surfaces
    q = np.zeros((B, state.n_positions * state.n_rotations))
    cols = state.positions * state.n_rotations + state.rotations
    q[np.arange(B), cols] = 1.0
    return q


def candidate_weights(state: State) -> np.ndarray:
    """Diagonal candidate weights, length M*L, position-major.

    Entry (m*L + l) is sum_b s_b[m] * g_b[l]; binary for one-hot states,
    fractional for relaxed ones.
    """
    rel = _as_relaxed(state)
    return np.einsum("bm,bl->ml", rel.s, rel.g).ravel()


def sum_rate(state: State, stacked: StackedChannel, sys: SystemConfig) -> float:
    """log2 det(I_K + p/sigma^2 * Hbar^H (diag(weights) x I_N) Hbar).

    Evaluated in the K x K Gram form through a Hermitian Cholesky factor;
    equals the NB x NB log-det form exactly for one-hot selections and is
    the continuous surrogate differentiated by the offline optimizer.
    """
    if stacked.n_users == 0 or sys.power == 0.0:
        return 0.0
    weights = candidate_weights(state)
    w_rows = np.repeat(weights, stacked.n_antennas)
    active = w_rows > 0
    h_active = stacked.matrix[active]
    gram = (h_active.conj().T * w_rows[active]) @ h_active
    a = np.eye(stacked.n_users) + sys.snr_scale * gram
    chol = np.linalg.cholesky(a)
    return float(2.0 * np.sum(np.log2(np.real(np.diag(chol)))))


def sum_rate_direct(h: np.ndarray, sys: SystemConfig) -> float:
    """log2 det(I + p/sigma^2 * H H^H) for an explicitly assembled channel."""
    if h.shape[1] == 0 or sys.power == 0.0:
        return 0.0
    if h.shape[1] <= h.shape[0]:
        a = np.eye(h.shape[1]) + sys.snr_scale * (h.conj().T @ h)
    else:
        a = np.eye(h.shape[0]) + sys.snr_scale * (h @ h.conj().T)
    chol = np.linalg.cholesky(a)
    return float(2.0 * np.sum(np.log2(np.real(np.diag(chol)))))


def monte_carlo_capacity(
    state: State, realizations: list[StackedChannel], sys: SystemConfig
) -> float:
    """Mean sum-rate over stored realizations (fixed summation order)."""
    if not realizations:
        raise ValueError("need at least one realization")
    total = 0.0
    for stacked in realizations:
        total += sum_rate(state, stacked, sys)
    return total / len(realizations)
