"""Differential-drive robot on a terrain with spatially varying cost.

State (x, y, heading); piecewise-constant action (v, omega) held over one
timestep, integrated as an exact circular arc. Terrain cost is lowest along
the sinusoid y = 50 + 20*sin(2*pi*x/100).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .base import SystemModel, wrap_angle


def terrain_cost(x, y):
    """Pointwise terrain cost; always <= -1, zero-penalty on the sinusoid."""
    return -2.0 * np.abs(20.0 * np.sin(2.0 * np.pi * (np.asarray(x) / 100.0)) - np.asarray(y) + 50.0) - 1.0


@dataclass
class DiffDriveParams:
    axle_width: float = 0.2
    wheel_radius: float = 0.1
    dt: float = 0.5
    max_linear_speed: float = 2.0
    max_turn_rate: float = 1.0
    workspace_x: tuple[float, float] = (0.0, 100.0)
    workspace_y: tuple[float, float] = (0.0, 100.0)
    steer_gain: float = 2.0
    goal_radius: float = 2.0
    arc_cost_samples: int = 5

    def __post_init__(self):
        for name in ("axle_width", "wheel_radius", "dt", "max_linear_speed", "max_turn_rate"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


class DiffDrive(SystemModel):
    name = "diffdrive"
    state_dim = 3
    action_dim = 2
    angular_dims = (2,)

    def __init__(self, params: DiffDriveParams | None = None):
        self.params = params or DiffDriveParams()
        p = self.params
        self.state_bounds = np.array(
            [[p.workspace_x[0], p.workspace_x[1]],
             [p.workspace_y[0], p.workspace_y[1]],
             [-np.pi, np.pi]]
        )
        self.action_bounds = np.array([[0.0, p.max_linear_speed], [-p.max_turn_rate, p.max_turn_rate]])
        self.distance_weights = np.array([1.0, 1.0, 0.5])
        self.start_state = np.array([0.0, 50.0, 0.0])
        self.goal_state = np.array([100.0, 50.0, 0.0])

    def _arc_positions(self, state, action, fractions):
        """(x, y) points along the arc at the given fractions of dt."""
        x, y, th = state
        v, om = action
        t = fractions * self.params.dt
        if abs(om) < 1e-9:
            xs = x + v * t * np.cos(th)
            ys = y + v * t * np.sin(th)
        else:
            xs = x + (v / om) * (np.sin(th + om * t) - np.sin(th))
            ys = y - (v / om) * (np.cos(th + om * t) - np.cos(th))
        return xs, ys

    def apply_action(self, from_state, action):
        action = self.check_action(action)
        x, y, th = np.asarray(from_state, dtype=float)
        v, om = action
        dt = self.params.dt
        xs, ys = self._arc_positions((x, y, th), (v, om), np.array([1.0]))
        nx = float(np.clip(xs[0], *self.params.workspace_x))
        ny = float(np.clip(ys[0], *self.params.workspace_y))
        nth = float(wrap_angle(th + om * dt))
        return np.array([nx, ny, nth])

    def steer(self, from_state, toward):
        """Full-speed arc step turning toward the target point."""
        x, y, th = np.asarray(from_state, dtype=float)
        tx, ty = np.asarray(toward, dtype=float)[:2]
        heading_err = float(wrap_angle(np.arctan2(ty - y, tx - x) - th))
        om = float(np.clip(self.params.steer_gain * heading_err,
                           -self.params.max_turn_rate, self.params.max_turn_rate))
        action = np.array([self.params.max_linear_speed, om])
        return self.apply_action(from_state, action), action

    def sample_action(self, rng, from_state):
        lo, hi = self.action_bounds[:, 0], self.action_bounds[:, 1]
        return lo + rng.random(2) * (hi - lo)

    def trans_reward(self, from_state, to_state, action):
        """Terrain cost averaged over equispaced arc points, scaled by dt."""
        n = self.params.arc_cost_samples
        fractions = np.linspace(0.0, 1.0, n)
        xs, ys = self._arc_positions(np.asarray(from_state, dtype=float), action, fractions)
        xs = np.clip(xs, *self.params.workspace_x)
        ys = np.clip(ys, *self.params.workspace_y)
        return float(np.mean(terrain_cost(xs, ys)) * self.params.dt)

    def is_goal(self, state):
        return self.distance(np.asarray(state, dtype=float), self.goal_state) <= self.params.goal_radius
