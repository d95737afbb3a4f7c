"""Two-link pendulum actuated only at the elbow joint.

Angles are measured from the downward vertical (theta1 for the shoulder,
theta2 relative between the links), so the hanging rest state is the zero
vector and the inverted balance point is (pi, 0, 0, 0). Dynamics follow the
manipulator form M(q) qdd + C(q, qd) qd + G(q) = (0, tau), integrated with
fixed-step RK4.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .base import SystemModel, wrap_angle

TORQUE_SET = (-1.0, 0.0, 1.0)


@dataclass
class AcrobotParams:
    m1: float = 1.0
    m2: float = 1.0
    l1: float = 1.0
    l2: float = 1.0
    lc1: float = 0.5
    lc2: float = 0.5
    I1: float = 1.0
    I2: float = 1.0
    g: float = 9.8
    tau_max: float = 1.0
    dt: float = 0.2
    substeps: int = 4
    max_omega1: float = 4.0 * np.pi
    max_omega2: float = 9.0 * np.pi
    goal_tip_height: float = 1.5
    goal_max_omega: float = 1.0

    def __post_init__(self):
        for name in ("m1", "m2", "l1", "l2", "lc1", "lc2", "I1", "I2", "tau_max", "dt"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.substeps < 1:
            raise ValueError("substeps must be >= 1")


class Acrobot(SystemModel):
    name = "acrobot"
    state_dim = 4
    action_dim = 1
    angular_dims = (0, 1)

    def __init__(self, params: AcrobotParams | None = None):
        self.params = params or AcrobotParams()
        p = self.params
        self.state_bounds = np.array(
            [[-np.pi, np.pi],
             [-np.pi, np.pi],
             [-p.max_omega1, p.max_omega1],
             [-p.max_omega2, p.max_omega2]]
        )
        self.action_bounds = np.array([[-p.tau_max, p.tau_max]])
        self.distance_weights = np.array([1.0, 1.0, 0.1, 0.1])
        self.start_state = np.zeros(4)
        self.goal_state = np.array([np.pi, 0.0, 0.0, 0.0])

    def _accel(self, state, tau):
        p = self.params
        th1, th2, w1, w2 = state
        c2, s2 = np.cos(th2), np.sin(th2)

        m11 = p.I1 + p.I2 + p.m1 * p.lc1**2 + p.m2 * (p.l1**2 + p.lc2**2 + 2.0 * p.l1 * p.lc2 * c2)
        m12 = p.I2 + p.m2 * (p.lc2**2 + p.l1 * p.lc2 * c2)
        m22 = p.I2 + p.m2 * p.lc2**2

        h = p.m2 * p.l1 * p.lc2 * s2
        cor1 = -h * w2 * w2 - 2.0 * h * w1 * w2
        cor2 = h * w1 * w1

        g1 = (p.m1 * p.lc1 + p.m2 * p.l1) * p.g * np.sin(th1) + p.m2 * p.lc2 * p.g * np.sin(th1 + th2)
        g2 = p.m2 * p.lc2 * p.g * np.sin(th1 + th2)

        rhs1 = -cor1 - g1
        rhs2 = tau - cor2 - g2
        det = m11 * m22 - m12 * m12
        a1 = (m22 * rhs1 - m12 * rhs2) / det
        a2 = (m11 * rhs2 - m12 * rhs1) / det
        return a1, a2

    def _deriv(self, state, tau):
        a1, a2 = self._accel(state, tau)
        return np.array([state[2], state[3], a1, a2])

    def apply_action(self, from_state, action):
        action = self.check_action(action)
        tau = float(action[0])
        p = self.params
        h = p.dt / p.substeps
        s = np.asarray(from_state, dtype=float).copy()
        for _ in range(p.substeps):
            k1 = self._deriv(s, tau)
            k2 = self._deriv(s + 0.5 * h * k1, tau)
            k3 = self._deriv(s + 0.5 * h * k2, tau)
            k4 = self._deriv(s + h * k3, tau)
            s = s + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        s[0] = wrap_angle(s[0])
        s[1] = wrap_angle(s[1])
        s[2] = np.clip(s[2], -p.max_omega1, p.max_omega1)
        s[3] = np.clip(s[3], -p.max_omega2, p.max_omega2)
        return s

    def steer(self, from_state, toward):
        """Try every torque in the discrete set; keep the closest outcome."""
        toward = np.asarray(toward, dtype=float)
        best = None
        for tau in TORQUE_SET:
            action = np.array([tau])
            new_state = self.apply_action(from_state, action)
            d = self.distance(new_state, toward)
            if best is None or d < best[0]:
                best = (d, new_state, action)
        return best[1], best[2]

    def sample_action(self, rng, from_state):
        return np.array([TORQUE_SET[rng.integers(len(TORQUE_SET))]])

    def trans_reward(self, from_state, to_state, action):
        """Elapsed time is the only cost."""
        return -self.params.dt

    def tip_height(self, state) -> float:
        """Height of the free end above the shoulder pivot."""
        p = self.params
        th1, th2 = state[0], state[1]
        return float(-p.l1 * np.cos(th1) - p.l2 * np.cos(th1 + th2))

    def total_energy(self, state) -> float:
        """Kinetic plus gravitational potential energy (conserved when tau=0)."""
        p = self.params
        th1, th2, w1, w2 = state
        c2 = np.cos(th2)
        m11 = p.I1 + p.I2 + p.m1 * p.lc1**2 + p.m2 * (p.l1**2 + p.lc2**2 + 2.0 * p.l1 * p.lc2 * c2)
        m12 = p.I2 + p.m2 * (p.lc2**2 + p.l1 * p.lc2 * c2)
        m22 = p.I2 + p.m2 * p.lc2**2
        ke = 0.5 * (m11 * w1 * w1 + 2.0 * m12 * w1 * w2 + m22 * w2 * w2)
        pe = -p.g * ((p.m1 * p.lc1 + p.m2 * p.l1) * np.cos(th1) + p.m2 * p.lc2 * np.cos(th1 + th2))
        return float(ke + pe)

    def is_goal(self, state):
        p = self.params
        return (
            self.tip_height(state) >= p.goal_tip_height
            and abs(float(state[2])) <= p.goal_max_omega
            and abs(float(state[3])) <= p.goal_max_omega
        )
