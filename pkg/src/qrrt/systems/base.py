"""Behavioral interface shared by all planning systems.

A system binds dynamics, a distance metric, steering, immediate rewards,
the goal predicate, and state/action sampling. Implementations are
stateless after construction; random sources are passed per call.
"""

from __future__ import annotations

from abc import ABC, abstractmethod

import numpy as np


def wrap_angle(x):
    """Wrap angles (scalar or array) into [-pi, pi)."""
    return np.mod(np.asarray(x, dtype=float) + np.pi, 2.0 * np.pi) - np.pi


class SystemModel(ABC):
    """Deterministic simulator with planner-facing capabilities.

    Subclasses set:
      name           identifier used in configs
      state_dim, action_dim
      state_bounds   (state_dim, 2) array of [lo, hi]
      action_bounds  (action_dim, 2) array of [lo, hi]
      angular_dims   tuple of state indices that wrap on [-pi, pi)
      distance_weights  (state_dim,) nonnegative weights
      start_state, goal_state
    """

    name: str
    state_dim: int
    action_dim: int
    state_bounds: np.ndarray
    action_bounds: np.ndarray
    angular_dims: tuple[int, ...]
    distance_weights: np.ndarray
    start_state: np.ndarray
    goal_state: np.ndarray

    # -- metric ---------------------------------------------------------

    def state_delta(self, states, ref):
        """Componentwise difference states - ref with angular wrapping."""
        delta = np.asarray(states, dtype=float) - np.asarray(ref, dtype=float)
        for i in self.angular_dims:
            delta[..., i] = wrap_angle(delta[..., i])
        return delta

    def distance_batch(self, states: np.ndarray, query: np.ndarray) -> np.ndarray:
        """Weighted Euclidean distance of each row of states to query."""
        delta = self.state_delta(states, query)
        return np.sqrt(np.sum(self.distance_weights * delta * delta, axis=-1))

    def distance(self, a: np.ndarray, b: np.ndarray) -> float:
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        if a.shape != b.shape or a.shape[0] != self.state_dim:
            raise ValueError(f"state dimension mismatch: {a.shape} vs {b.shape}")
        return float(self.distance_batch(a, b))

    def metric_diagonal(self) -> float:
        """Diameter of the state box under the weighted wrapped metric."""
        span = self.state_bounds[:, 1] - self.state_bounds[:, 0]
        span = span.astype(float).copy()
        for i in self.angular_dims:
            span[i] = np.pi  # max wrapped separation
        return float(np.sqrt(np.sum(self.distance_weights * span * span)))

    # -- sampling / dynamics --------------------------------------------

    def sample_state(self, rng: np.random.Generator) -> np.ndarray:
        lo, hi = self.state_bounds[:, 0], self.state_bounds[:, 1]
        return lo + rng.random(self.state_dim) * (hi - lo)

    @abstractmethod
    def sample_action(self, rng: np.random.Generator, from_state: np.ndarray) -> np.ndarray:
        ...

    @abstractmethod
    def apply_action(self, from_state: np.ndarray, action: np.ndarray) -> np.ndarray:
        ...

    @abstractmethod
    def steer(self, from_state: np.ndarray, toward: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """One transition toward a target; returns (new_state, action).

        Self-consistent: new_state == apply_action(from_state, action).
        """

    @abstractmethod
    def trans_reward(self, from_state: np.ndarray, to_state: np.ndarray, action: np.ndarray) -> float:
        """Immediate reward (<= 0) of the realized transition."""

    @abstractmethod
    def is_goal(self, state: np.ndarray) -> bool:
        ...

    # -- helpers ---------------------------------------------------------

    def check_action(self, action: np.ndarray) -> np.ndarray:
        action = np.asarray(action, dtype=float)
        if action.shape != (self.action_dim,):
            raise ValueError(f"action shape {action.shape} != ({self.action_dim},)")
        lo, hi = self.action_bounds[:, 0], self.action_bounds[:, 1]
        if np.any(action < lo - 1e-9) or np.any(action > hi + 1e-9):
            raise ValueError(f"action {action} outside bounds {self.action_bounds.tolist()}")
        return np.clip(action, lo, hi)

    def clip_action(self, action: np.ndarray) -> np.ndarray:
        return np.clip(action, self.action_bounds[:, 0], self.action_bounds[:, 1])
