import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qrrt.systems import make_system, null_space_basis, terrain_cost, wrap_angle
from qrrt.systems.acrobot import Acrobot, AcrobotParams
from qrrt.systems.diffdrive import DiffDrive, DiffDriveParams
from qrrt.systems.nullspace import NullSpace, NullSpaceParams


class TestWrapAngle:
    def test_identity_inside_range(self):
        assert wrap_angle(0.5) == 0.5

    def test_wraps_down(self):
        assert wrap_angle(np.pi + 0.1) == pytest.approx(-np.pi + 0.1, abs=1e-12)

    def test_half_open_interval(self):
        assert wrap_angle(np.pi) == pytest.approx(-np.pi)
        assert wrap_angle(-np.pi) == pytest.approx(-np.pi)

    @given(st.floats(min_value=-100.0, max_value=100.0))
    def test_range_and_equivalence(self, x):
        w = float(wrap_angle(x))
        assert -np.pi <= w < np.pi
        assert math.isclose(math.sin(w), math.sin(x), abs_tol=1e-9)
        assert math.isclose(math.cos(w), math.cos(x), abs_tol=1e-9)


class TestTerrainCost:
    def test_on_sinusoid(self):
        assert terrain_cost(25.0, 70.0) == pytest.approx(-1.0, abs=1e-12)

    def test_off_sinusoid(self):
        assert terrain_cost(50.0, 70.0) == pytest.approx(-41.0, abs=1e-12)

    def test_origin_midline(self):
        assert terrain_cost(0.0, 50.0) == pytest.approx(-1.0, abs=1e-12)

    def test_always_at_most_minus_one(self):
        xs, ys = np.meshgrid(np.linspace(0, 100, 30), np.linspace(0, 100, 30))
        assert np.all(terrain_cost(xs, ys) <= -1.0)


class TestDiffDrive:
    def setup_method(self):
        self.sys = DiffDrive()
        self.unit = DiffDrive(DiffDriveParams(dt=1.0, max_turn_rate=2.0))

    def test_straight_line(self):
        s = self.unit.apply_action(np.zeros(3), np.array([1.0, 0.0]))
        assert np.allclose(s, [1.0, 0.0, 0.0], atol=1e-12)

    def test_pure_rotation(self):
        s = self.unit.apply_action(np.zeros(3), np.array([0.0, 1.0]))
        assert np.allclose(s, [0.0, 0.0, 1.0], atol=1e-12)

    def test_quarter_arc(self):
        s = self.unit.apply_action(np.zeros(3), np.array([1.0, np.pi / 2]))
        assert np.allclose(s, [2 / np.pi, 2 / np.pi, np.pi / 2], atol=1e-12)

    def test_action_out_of_bounds(self):
        with pytest.raises(ValueError):
            self.sys.apply_action(np.zeros(3), np.array([5.0, 0.0]))
        with pytest.raises(ValueError):
            self.sys.apply_action(np.zeros(3), np.array([1.0, 2.0]))

    def test_workspace_clamp(self):
        s = self.sys.apply_action(np.array([0.2, 50.0, np.pi - 1e-3]), np.array([2.0, 0.0]))
        assert s[0] == 0.0  # clamped at the x=0 wall

    def test_substep_composition(self):
        # exact arc integration composes: k substeps == one full step
        action = np.array([1.7, 0.63])
        full = self.sys.apply_action(np.array([3.0, 4.0, 0.2]), action)
        fine = DiffDrive(DiffDriveParams(dt=0.5 / 64))
        s = np.array([3.0, 4.0, 0.2])
        for _ in range(64):
            s = fine.apply_action(s, action)
        assert np.allclose(full, s, atol=1e-9)

    def test_arc_length_equals_speed_times_dt(self):
        action = np.array([1.7, 0.9])
        fine = DiffDrive(DiffDriveParams(dt=0.5 / 5000))
        s = np.array([30.0, 40.0, 0.2])
        length = 0.0
        for _ in range(5000):
            nxt = fine.apply_action(s, action)
            length += float(np.hypot(nxt[0] - s[0], nxt[1] - s[1]))
            s = nxt
        assert length == pytest.approx(1.7 * 0.5, abs=1e-9)

    def test_steer_is_self_consistent(self):
        rng = np.random.default_rng(0)
        for _ in range(100):
            frm = rng.uniform([0, 0, -np.pi], [100, 100, np.pi])
            toward = rng.uniform([0, 0, -np.pi], [100, 100, np.pi])
            new_state, action = self.sys.steer(frm, toward)
            assert np.array_equal(new_state, self.sys.apply_action(frm, action))

    def test_steer_turns_toward_target(self):
        _, action = self.sys.steer(np.array([50.0, 50.0, 0.0]), np.array([50.0, 80.0, 0.0]))
        assert action[1] > 0  # target is straight up; must turn left
        _, action = self.sys.steer(np.array([50.0, 50.0, 0.0]), np.array([50.0, 20.0, 0.0]))
        assert action[1] < 0

    def test_goal_steer_progress(self):
        # repeated goal extends from a far corner shrink the goal distance
        s = np.array([5.0, 5.0, 0.0])
        d = [self.sys.distance(s, self.sys.goal_state)]
        for _ in range(10):
            s, _ = self.sys.steer(s, self.sys.goal_state)
            d.append(self.sys.distance(s, self.sys.goal_state))
        assert all(b < a for a, b in zip(d, d[1:]))

    def test_sample_bounds(self):
        rng = np.random.default_rng(1)
        states = np.stack([self.sys.sample_state(rng) for _ in range(2000)])
        assert np.all(states >= self.sys.state_bounds[:, 0])
        assert np.all(states <= self.sys.state_bounds[:, 1])
        actions = np.stack([self.sys.sample_action(rng, states[i]) for i in range(2000)])
        assert np.all(actions >= self.sys.action_bounds[:, 0])
        assert np.all(actions <= self.sys.action_bounds[:, 1])

    def test_reward_nonpositive_and_arc_averaged(self):
        frm = np.array([0.0, 50.0, 0.0])
        action = np.array([2.0, 0.0])
        to = self.sys.apply_action(frm, action)
        r = self.sys.trans_reward(frm, to, action)
        # straight segment along the midline: average the pointwise costs
        xs = np.linspace(0.0, 1.0, 5)
        expect = np.mean([terrain_cost(x, 50.0) for x in xs]) * 0.5
        assert r == pytest.approx(expect, abs=1e-12)
        assert r < 0

    def test_distance_345(self):
        assert self.sys.distance(np.array([3.0, 4.0, 0.0]), np.zeros(3)) == pytest.approx(5.0)

    def test_distance_heading_wrap(self):
        a = np.array([0.0, 0.0, 3.1])
        b = np.array([0.0, 0.0, -3.1])
        wrapped = 2 * np.pi - 6.2
        assert self.sys.distance(a, b) == pytest.approx(math.sqrt(0.5) * wrapped, abs=1e-9)

    def test_distance_identity(self):
        s = np.array([10.0, 20.0, 1.0])
        assert self.sys.distance(s, s) == 0.0

    def test_goal_predicate(self):
        assert self.sys.is_goal(np.array([99.0, 50.0, 0.0]))
        assert not self.sys.is_goal(np.array([90.0, 50.0, 0.0]))


class TestAcrobot:
    def setup_method(self):
        self.sys = Acrobot()

    def test_rest_equilibrium(self):
        s = self.sys.apply_action(np.zeros(4), np.array([0.0]))
        assert np.max(np.abs(s)) < 1e-9

    def test_upright_is_equilibrium_but_unstable(self):
        upright = np.array([np.pi, 0.0, 0.0, 0.0])
        s = self.sys.apply_action(upright.copy(), np.array([0.0]))
        # wrap maps pi to -pi; compare via distance
        assert self.sys.distance(s, upright) < 1e-9
        s = np.array([np.pi - 1e-3, 0.0, 0.0, 0.0])
        dists = []
        for _ in range(3):  # 0.6 s
            s = self.sys.apply_action(s, np.array([0.0]))
            dists.append(self.sys.distance(s, self.sys.goal_state))
        assert dists == sorted(dists)
        assert dists[-1] > 1e-3

    def test_torque_bound(self):
        with pytest.raises(ValueError):
            self.sys.apply_action(np.zeros(4), np.array([1.5]))

    def test_passive_energy_conservation_with_gravity(self):
        sys_ = Acrobot(AcrobotParams(dt=1e-3, substeps=1))
        s = np.array([1.0, 0.5, 0.0, 0.0])
        e0 = sys_.total_energy(s)
        worst = 0.0
        for _ in range(2000):  # 2 simulated seconds
            s = sys_.apply_action(s, np.array([0.0]))
            worst = max(worst, abs(sys_.total_energy(s) - e0))
        assert worst / abs(e0) < 1e-3

    def test_zero_gravity_kinetic_energy_conserved(self):
        sys_ = Acrobot(AcrobotParams(g=1e-12, dt=1e-3, substeps=1))
        s = np.array([0.3, -0.2, 1.0, -0.5])
        e0 = sys_.total_energy(s)
        for _ in range(2000):
            s = sys_.apply_action(s, np.array([0.0]))
        assert abs(sys_.total_energy(s) - e0) / abs(e0) < 1e-3

    def test_steer_picks_best_torque(self):
        rng = np.random.default_rng(2)
        for _ in range(20):
            frm = self.sys.sample_state(rng)
            toward = self.sys.sample_state(rng)
            new_state, action = self.sys.steer(frm, toward)
            candidates = []
            for tau in (-1.0, 0.0, 1.0):
                cand = self.sys.apply_action(frm, np.array([tau]))
                candidates.append(self.sys.distance(cand, toward))
            assert self.sys.distance(new_state, toward) == pytest.approx(min(candidates))
            assert np.array_equal(new_state, self.sys.apply_action(frm, action))

    def test_discrete_action_sampling(self):
        rng = np.random.default_rng(3)
        taus = {float(self.sys.sample_action(rng, np.zeros(4))[0]) for _ in range(200)}
        assert taus == {-1.0, 0.0, 1.0}

    def test_reward_is_time_cost(self):
        assert self.sys.trans_reward(np.zeros(4), np.ones(4), np.array([1.0])) == -0.2

    def test_goal_predicate(self):
        assert self.sys.is_goal(np.array([np.pi, 0.0, 0.0, 0.0]))
        assert not self.sys.is_goal(np.zeros(4))
        assert not self.sys.is_goal(np.array([np.pi, 0.0, 2.0, 0.0]))  # too fast

    def test_tip_height(self):
        assert self.sys.tip_height(np.zeros(4)) == pytest.approx(-2.0)
        assert self.sys.tip_height(np.array([np.pi, 0.0, 0.0, 0.0])) == pytest.approx(2.0)

    def test_velocity_clamp(self):
        s = np.array([0.1, 0.1, self.sys.params.max_omega1, self.sys.params.max_omega2])
        out = self.sys.apply_action(s, np.array([1.0]))
        assert abs(out[2]) <= self.sys.params.max_omega1
        assert abs(out[3]) <= self.sys.params.max_omega2


class TestNullSpaceBasis:
    def test_two_joint_single_constraint(self):
        basis = null_space_basis(np.array([[1.0, 1.0]]))
        assert basis.shape == (2, 1)
        assert np.allclose(basis[:, 0], [1 / math.sqrt(2), -1 / math.sqrt(2)], atol=1e-12)

    def test_coordinate_null_space(self):
        basis = null_space_basis(np.array([[1.0, 0.0, 0.0]]))
        assert basis.shape == (3, 2)
        assert np.allclose(basis.T @ basis, np.eye(2), atol=1e-12)
        assert np.max(np.abs(basis[0])) < 1e-12

    def test_padded_identity(self):
        basis = null_space_basis(np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]))
        assert np.allclose(basis[:, 0], [0.0, 0.0, 1.0], atol=1e-12)

    def test_sign_convention(self):
        rng = np.random.default_rng(4)
        for _ in range(20):
            m = rng.normal(size=(2, 5))
            basis = null_space_basis(m)
            for j in range(basis.shape[1]):
                col = basis[:, j]
                first = col[np.abs(col) > 1e-12][0]
                assert first > 0

    def test_rank_deficient_rejected(self):
        with pytest.raises(ValueError):
            null_space_basis(np.array([[1.0, 1.0, 0.0], [2.0, 2.0, 0.0]]))

    def test_orthonormal_and_annihilated(self):
        rng = np.random.default_rng(5)
        m = rng.normal(size=(2, 6))
        basis = null_space_basis(m)
        assert basis.shape == (6, 4)
        assert np.allclose(basis.T @ basis, np.eye(4), atol=1e-10)
        assert np.max(np.abs(m @ basis)) <= 1e-10

    def test_deterministic(self):
        m = np.random.default_rng(6).normal(size=(1, 4))
        assert np.array_equal(null_space_basis(m), null_space_basis(m))


class TestNullSpaceSystem:
    def setup_method(self):
        self.sys = NullSpace()

    def test_steer_projection_hand_case(self):
        sys_ = NullSpace(NullSpaceParams(
            n=2, b=1, lam=1.0, dt=1.0,
            coupling_matrix=np.array([[1.0, 1.0]]),
            theta_desired=np.array([-2.0, 0.0]),
        ))
        new_state, alpha = sys_.steer(np.zeros(2), np.array([-2.0, 0.0]))
        assert np.allclose(new_state, [-1.0, 1.0], atol=1e-12)
        assert alpha[0] == pytest.approx(-math.sqrt(2), abs=1e-12)

    def test_steer_fixed_point(self):
        target = self.sys.goal_state
        new_state, alpha = self.sys.steer(target.copy(), target)
        assert np.allclose(alpha, 0.0, atol=1e-12)
        assert np.allclose(new_state, target, atol=1e-12)

    def test_projection_identity_on_null_space(self):
        # requested rate already in the null space: move exactly lam*dt of it
        rng = np.random.default_rng(7)
        coeffs = rng.normal(size=self.sys.action_dim)
        direction = self.sys.basis @ coeffs
        frm = np.zeros(self.sys.state_dim)
        target = frm + direction  # theta_dot_req = -lam*(frm - target) = direction
        new_state, alpha = self.sys.steer(frm, target)
        expect = frm + direction * self.sys.params.dt
        assert np.allclose(new_state, wrap_angle(expect), atol=1e-12)

    def test_constraint_satisfied_for_all_transitions(self):
        rng = np.random.default_rng(8)
        worst = 0.0
        for _ in range(500):
            frm = self.sys.sample_state(rng)
            if rng.random() < 0.5:
                _, alpha = self.sys.steer(frm, self.sys.sample_state(rng))
            else:
                alpha = self.sys.sample_action(rng, frm)
            rate = self.sys.joint_rates(alpha)
            worst = max(worst, float(np.max(np.abs(self.sys.coupling @ rate))))
        assert worst <= 1e-9

    def test_projection_is_minimizer(self):
        # steer beats equal-norm random null-space rates at matching the
        # requested joint rate, over 100 random pairs x 1000 candidates
        rng = np.random.default_rng(9)
        basis = self.sys.basis
        u = basis.shape[1]
        for _ in range(100):
            frm = self.sys.sample_state(rng)
            target = self.sys.sample_state(rng)
            req = -self.sys.params.lam * wrap_angle(frm - target)
            _, alpha = self.sys.steer(frm, target)
            rate = basis @ alpha
            best = float(np.sum((rate - req) ** 2))
            coeffs = rng.normal(size=(1000, u))
            norms = np.linalg.norm(coeffs, axis=1, keepdims=True)
            norms[norms == 0] = 1.0
            coeffs = coeffs / norms * np.linalg.norm(alpha)
            cands = coeffs @ basis.T
            dists = np.sum((cands - req) ** 2, axis=1)
            assert np.all(dists >= best - 1e-9)

    def test_reward_effort_plus_time(self):
        alpha = np.array([1.0, 0.0, 0.0])
        frm = np.zeros(4)
        to = self.sys.apply_action(frm, alpha)
        r = self.sys.trans_reward(frm, to, alpha)
        assert r == pytest.approx(-(1.0 + 1.0) * 0.1, abs=1e-12)
        assert r < 0

    def test_goal_reachable_from_start(self):
        # the default goal sits in the start's null-space coset
        s = self.sys.start_state.copy()
        for _ in range(200):
            if self.sys.is_goal(s):
                break
            s, _ = self.sys.steer(s, self.sys.goal_state)
        assert self.sys.is_goal(s)

    def test_action_bounds_cover_steer(self):
        rng = np.random.default_rng(10)
        lo, hi = self.sys.action_bounds[:, 0], self.sys.action_bounds[:, 1]
        for _ in range(200):
            frm = self.sys.sample_state(rng)
            target = self.sys.sample_state(rng)
            _, alpha = self.sys.steer(frm, target)
            assert np.all(alpha >= lo) and np.all(alpha <= hi)


class TestMakeSystem:
    def test_names(self):
        for name, dim in (("diffdrive", 3), ("acrobot", 4), ("nullspace", 4)):
            sys_ = make_system(name)
            assert sys_.state_dim == dim
            assert sys_.name == name

    def test_unknown_name(self):
        with pytest.raises(ValueError):
            make_system("hovercraft")

    def test_param_overrides(self):
        sys_ = make_system("diffdrive", dt=0.25, max_linear_speed=1.0)
        assert sys_.params.dt == 0.25
        assert sys_.action_bounds[0, 1] == 1.0

    def test_steer_consistency_all_systems(self):
        rng = np.random.default_rng(11)
        for name in ("diffdrive", "acrobot", "nullspace"):
            sys_ = make_system(name)
            for _ in range(20):
                frm = sys_.sample_state(rng)
                toward = sys_.sample_state(rng)
                new_state, action = sys_.steer(frm, toward)
                assert np.array_equal(new_state, sys_.apply_action(frm, action)), name

    def test_rewards_nonpositive_all_systems(self):
        rng = np.random.default_rng(12)
        for name in ("diffdrive", "acrobot", "nullspace"):
            sys_ = make_system(name)
            for _ in range(200):
                frm = sys_.sample_state(rng)
                action = sys_.sample_action(rng, frm)
                to = sys_.apply_action(frm, action)
                assert sys_.trans_reward(frm, to, action) <= 0, name

    def test_distance_symmetry(self):
        rng = np.random.default_rng(13)
        for name in ("diffdrive", "acrobot", "nullspace"):
            sys_ = make_system(name)
            for _ in range(50):
                a, b = sys_.sample_state(rng), sys_.sample_state(rng)
                assert sys_.distance(a, b) == pytest.approx(sys_.distance(b, a), abs=1e-12)
                assert sys_.distance(a, a) == 0.0
