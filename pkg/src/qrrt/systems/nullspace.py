"""Joint-rate system constrained to the null space of a coupling matrix.

Joint velocities are restricted to coupling @ theta_dot = 0, so every
action is a coefficient vector on an orthonormal null-space basis and the
constraint holds by construction. Steering projects a proportional control
law onto that basis, which minimizes ||theta_dot - theta_dot_req||^2.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .base import SystemModel, wrap_angle


def null_space_basis(coupling: np.ndarray, zero_tol: float = 1e-10) -> np.ndarray:
    """Orthonormal basis of the null space of a full-row-rank (b, n) matrix.

    Returns a (n, u) matrix with u = n - b columns. Deterministic: each
    column's first component with magnitude above 1e-12 is made positive.
    """
    coupling = np.asarray(coupling, dtype=float)
    if coupling.ndim != 2:
        raise ValueError("coupling matrix must be 2-d")
    b, n = coupling.shape
    if b >= n:
        raise ValueError(f"need more columns than rows, got {coupling.shape}")
    _, s, vt = np.linalg.svd(coupling)
    rank = int(np.sum(s > max(b, n) * np.finfo(float).eps * s[0])) if s.size else 0
    if rank < b:
        raise ValueError("coupling matrix is rank-deficient")
    basis = vt[b:].T.copy()
    for j in range(basis.shape[1]):
        col = basis[:, j]
        nonzero = np.nonzero(np.abs(col) > 1e-12)[0]
        if nonzero.size and col[nonzero[0]] < 0:
            basis[:, j] = -col
    residual = np.max(np.abs(coupling @ basis))
    if residual > zero_tol:
        raise ValueError(f"null-space residual {residual} above tolerance")
    return basis


@dataclass
class NullSpaceParams:
    n: int = 4
    b: int = 1
    lam: float = 1.0
    dt: float = 0.1
    coupling_seed: int = 7
    coupling_matrix: Optional[np.ndarray] = None
    theta_desired: Optional[np.ndarray] = None
    sample_alpha_max: float = 2.0
    goal_radius: float = 0.15
    goal_offset_norm: float = 1.8

    def __post_init__(self):
        if self.lam <= 0 or self.dt <= 0:
            raise ValueError("lam and dt must be positive")
        if not 1 <= self.b < self.n:
            raise ValueError("need 1 <= b < n")


class NullSpace(SystemModel):
    name = "nullspace"
    action_dim: int

    def __init__(self, params: NullSpaceParams | None = None):
        self.params = params or NullSpaceParams()
        p = self.params
        rng = np.random.default_rng(p.coupling_seed)
        if p.coupling_matrix is None:
            self.coupling = rng.normal(size=(p.b, p.n))
        else:
            self.coupling = np.asarray(p.coupling_matrix, dtype=float)
            if self.coupling.shape != (p.b, p.n):
                raise ValueError(f"coupling matrix shape {self.coupling.shape} != ({p.b}, {p.n})")
        self.basis = null_space_basis(self.coupling)

        self.state_dim = p.n
        self.action_dim = p.n - p.b
        self.angular_dims = tuple(range(p.n))
        self.state_bounds = np.tile(np.array([-np.pi, np.pi]), (p.n, 1))
        # Steer projections are bounded by ||theta_dot_req|| <= lam*pi*sqrt(n).
        alpha_bound = p.lam * np.pi * np.sqrt(p.n)
        self.action_bounds = np.tile(np.array([-alpha_bound, alpha_bound]), (self.action_dim, 1))
        self.distance_weights = np.ones(p.n)

        self.start_state = np.zeros(p.n)
        if p.theta_desired is None:
            # Goal drawn inside the reachable null-space coset of the start.
            coeffs = rng.normal(size=self.action_dim)
            coeffs *= p.goal_offset_norm / np.linalg.norm(coeffs)
            self.goal_state = wrap_angle(self.start_state + self.basis @ coeffs)
        else:
            self.goal_state = wrap_angle(np.asarray(p.theta_desired, dtype=float))

    def joint_rates(self, action: np.ndarray) -> np.ndarray:
        return self.basis @ np.asarray(action, dtype=float)

    def apply_action(self, from_state, action):
        action = self.check_action(action)
        theta_dot = self.basis @ action
        return wrap_angle(np.asarray(from_state, dtype=float) + theta_dot * self.params.dt)

    def steer(self, from_state, toward):
        from_state = np.asarray(from_state, dtype=float)
        theta_dot_req = -self.params.lam * wrap_angle(from_state - np.asarray(toward, dtype=float))
        alpha = self.clip_action(self.basis.T @ theta_dot_req)
        return self.apply_action(from_state, alpha), alpha

    def sample_action(self, rng, from_state):
        m = self.params.sample_alpha_max
        return rng.uniform(-m, m, self.action_dim)

    def trans_reward(self, from_state, to_state, action):
        """Joint-rate effort plus elapsed time, both nonpositive."""
        rate_norm = float(np.linalg.norm(self.basis @ np.asarray(action, dtype=float)))
        return -(rate_norm + 1.0) * self.params.dt

    def is_goal(self, state):
        return self.distance(np.asarray(state, dtype=float), self.goal_state) <= self.params.goal_radius
