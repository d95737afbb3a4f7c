"""Incremental tree planner with goal- and quality-biased extensions.

Each iteration draws a sample type (random-state, goal-state, random-action,
or greedy-action), creates one node, and appends it to the tree. Whenever a
node lands in the goal region an episode completes: value targets are
updated along that solution path, the greedy policy is refit over the whole
tree, and the best of (best tree solution, greedy rollout) becomes the
running solution. A goal-biased baseline runs the same loop with the
quality bias forced to zero and no learning.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Optional

import numpy as np

from .learning import (
    LearnParams,
    TransitionGrouper,
    evaluate_greedy,
    td_update_chain,
    update_policy,
)
from .mlp import AdaptiveNet, TrainSettings, policy_net_for, value_net_for
from .systems import make_system
from .systems.base import SystemModel
from .tree import SampleType, Trajectory, Tree


@dataclass
class BiasSchedule:
    """Sampling probabilities for the extend operations.

    The greedy-action share grows stepwise with completed episodes; the goal
    share is fixed; the remainder is split between random-action and
    random-state extends by rand_action_share.
    """

    goal_bias: float = 0.01
    quality_bias_initial: float = 0.0
    quality_bias_increment: float = 0.003
    quality_bias_interval: int = 10
    quality_bias_max: float = 0.5
    rand_action_share: float = 0.5

    def __post_init__(self):
        for name in ("goal_bias", "quality_bias_initial", "quality_bias_max", "rand_action_share"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {v}")
        if self.quality_bias_increment < 0 or self.quality_bias_interval < 1:
            raise ValueError("quality bias increment must be >= 0 and interval >= 1")
        if self.goal_bias + self.quality_bias_max > 1.0 + 1e-12:
            raise ValueError("goal_bias + quality_bias_max must not exceed 1")

    def quality_bias(self, episode: int) -> float:
        stepped = self.quality_bias_initial + self.quality_bias_increment * (episode // self.quality_bias_interval)
        return min(self.quality_bias_max, stepped)


@dataclass
class PlannerConfig:
    system_name: str = "diffdrive"
    seed: int = 0
    schedule: BiasSchedule = field(default_factory=BiasSchedule)
    learn: LearnParams = field(default_factory=LearnParams)
    hidden: tuple[int, ...] = (32, 32)
    value_hidden: Optional[tuple[int, ...]] = None  # None: same as hidden
    value_init_bias: float = 0.0
    train: TrainSettings = field(default_factory=TrainSettings)
    policy_train: Optional[TrainSettings] = None  # None: same settings as train
    max_iterations: int = 200_000
    max_episodes: int = 300
    max_wall_seconds: float = math.inf
    greedy_rollout_steps: int = 500
    greedy_extend_steps: int = 1
    system_params: dict = field(default_factory=dict)

    def validate(self):
        if (
            not math.isfinite(self.max_iterations)
            and not math.isfinite(self.max_episodes)
            and not math.isfinite(self.max_wall_seconds)
        ):
            raise ValueError("at least one termination bound must be finite")
        if self.max_iterations < 0 or self.max_episodes < 0:
            raise ValueError("termination bounds must be nonnegative")
        if self.greedy_extend_steps < 1:
            raise ValueError("greedy_extend_steps must be >= 1")


class SolutionSource(Enum):
    TREE_SOLUTION = "TreeSolution"
    GREEDY_ROLLOUT = "GreedyRollout"


@dataclass(frozen=True)
class TrajStep:
    state: np.ndarray
    action: Optional[np.ndarray]
    trans_cost: float


@dataclass
class RunRecord:
    episode: int
    iteration: int
    tree_size: int
    best_return: float
    greedy_return: float
    greedy_success: bool
    value_loss: float
    policy_loss: float
    wall_ms: float


@dataclass
class PlannerResult:
    best_steps: list[TrajStep]
    best_return: float
    best_source: Optional[SolutionSource]
    first_solution_steps: list[TrajStep]
    episode_records: list[RunRecord]
    tree: Tree
    value_net: Optional[AdaptiveNet]
    policy_net: Optional[AdaptiveNet]
    draw_counts: dict
    iterations: int


def draw_sample_type(schedule: BiasSchedule, episode: int, rng: np.random.Generator) -> SampleType:
    """One draw from the extend-type distribution at the given episode."""
    qb = schedule.quality_bias(episode)
    u = rng.random()
    if u < qb:
        return SampleType.GREEDY_ACTION
    u -= qb
    if u < schedule.goal_bias:
        return SampleType.GOAL_STATE
    u -= schedule.goal_bias
    remainder = 1.0 - qb - schedule.goal_bias
    if remainder <= 0.0:
        return SampleType.RAND_STATE
    if u < remainder * schedule.rand_action_share:
        return SampleType.RAND_ACTION
    return SampleType.RAND_STATE


@dataclass(frozen=True)
class NodeProposal:
    parent: int
    state: np.ndarray
    action: np.ndarray
    trans_cost: float
    sample_type: SampleType


def extend_random_state(tree: Tree, system: SystemModel, rng: np.random.Generator) -> NodeProposal:
    """Steer the node nearest a random target one step toward it."""
    target = system.sample_state(rng)
    return _steer_extension(tree, system, target, SampleType.RAND_STATE)


def extend_goal_state(tree: Tree, system: SystemModel, rng: np.random.Generator) -> NodeProposal:
    """Steer the node nearest the goal one step toward the goal."""
    return _steer_extension(tree, system, system.goal_state, SampleType.GOAL_STATE)


def _steer_extension(tree, system, target, sample_type) -> NodeProposal:
    parent = tree.nearest(target, system.distance_batch)
    parent_state = tree.states[parent]
    new_state, action = system.steer(parent_state, target)
    reward = system.trans_reward(parent_state, new_state, action)
    return NodeProposal(parent, new_state, action, reward, sample_type)


def extend_random_action(tree: Tree, system: SystemModel, rng: np.random.Generator) -> NodeProposal:
    """Apply a random action from a uniformly random tree node."""
    parent = tree.random_node(rng)
    parent_state = tree.states[parent]
    action = system.sample_action(rng, parent_state)
    new_state = system.apply_action(parent_state, action)
    reward = system.trans_reward(parent_state, new_state, action)
    return NodeProposal(parent, new_state, action, reward, SampleType.RAND_ACTION)


def extend_greedy_action(
    tree: Tree,
    system: SystemModel,
    policy_net: AdaptiveNet,
    rng: np.random.Generator,
    value_net: Optional[AdaptiveNet] = None,
    max_steps: int = 1,
) -> list[NodeProposal]:
    """Apply the learned greedy action from a uniformly random tree node.

    With max_steps > 1 the extension chains further greedy steps while the
    value estimate keeps improving and the goal is not reached.
    """
    parent = tree.random_node(rng)
    parent_state = tree.states[parent].copy()
    proposals = []
    next_parent = parent
    for step in range(max_steps):
        action = system.clip_action(policy_net.predict(parent_state))
        new_state = system.apply_action(parent_state, action)
        reward = system.trans_reward(parent_state, new_state, action)
        proposals.append(NodeProposal(next_parent, new_state, action, reward, SampleType.GREEDY_ACTION))
        if system.is_goal(new_state):
            break
        if step + 1 < max_steps:
            if value_net is None or value_net.value(new_state) <= value_net.value(parent_state):
                break
        # Chained proposals parent onto ids that do not exist yet; the caller
        # adds them in order, so the id of proposal k is len(tree) + k.
        next_parent = len(tree) + step
        parent_state = new_state
    return proposals


def get_max_traj(tree: Tree, end_nodes: list[int], params: LearnParams) -> tuple[Trajectory, float]:
    """Best trajectory over goal-reaching terminals; ties to smallest id."""
    if not end_nodes:
        raise ValueError("no end nodes")
    best = None
    for nid in sorted(end_nodes):
        ret = tree.trajectory_return(nid, params.gamma, params.goal_reward)
        if best is None or ret > best[1]:
            best = (nid, ret)
    traj = tree.extract_trajectory(best[0], params.gamma, params.goal_reward)
    return traj, best[1]


def _trajectory_steps(traj: Trajectory) -> list[TrajStep]:
    return [TrajStep(n.state, n.action, n.trans_cost) for n in traj.nodes]


def _rollout_steps(rollout) -> list[TrajStep]:
    steps = [TrajStep(rollout.states[0], None, 0.0)]
    for s, a, r in zip(rollout.states[1:], rollout.actions, rollout.rewards):
        steps.append(TrajStep(s, a, r))
    return steps


def qrrt_plan(config: PlannerConfig) -> PlannerResult:
    """Run the full quality-biased planner; see the module docstring."""
    return _plan(config, learning=True)


def baseline_plan(config: PlannerConfig) -> PlannerResult:
    """Goal-biased incremental tree search: no learning, no quality bias."""
    schedule = replace(
        config.schedule,
        quality_bias_initial=0.0,
        quality_bias_increment=0.0,
        quality_bias_max=0.0,
    )
    config = replace(config, schedule=schedule)
    return _plan(config, learning=False)


def _plan(config: PlannerConfig, learning: bool) -> PlannerResult:
    config.validate()
    system = make_system(config.system_name, **config.system_params)
    rng = np.random.default_rng(config.seed)

    value_net = policy_net = None
    if learning:
        value_seed = int(rng.integers(2**31))
        policy_seed = int(rng.integers(2**31))
        value_net = AdaptiveNet(
            value_net_for(
                system.state_bounds, list(config.value_hidden or config.hidden), value_seed,
                upper_bound=config.learn.goal_reward,
                init_bias=config.value_init_bias,
            ),
            config.train,
        )
        policy_net = AdaptiveNet(
            policy_net_for(system.state_bounds, system.action_bounds, list(config.hidden), policy_seed),
            config.policy_train or config.train,
            replay=False,
        )

    tree = Tree(system.start_state)
    grouper = (
        TransitionGrouper(system, config.learn.effective_group_radius(system)) if learning else None
    )
    end_nodes: list[int] = []
    end_returns: list[float] = []
    records: list[RunRecord] = []
    draw_counts = {st: 0 for st in SampleType if st is not SampleType.ROOT}

    best_steps: list[TrajStep] = []
    best_return = float("-inf")
    best_source: Optional[SolutionSource] = None
    first_solution_steps: list[TrajStep] = []

    episode = 0
    iterations = 0
    t0 = time.perf_counter()

    def terminated() -> bool:
        return (
            iterations >= config.max_iterations
            or episode >= config.max_episodes
            or (time.perf_counter() - t0) >= config.max_wall_seconds
        )

    while not terminated():
        stype = draw_sample_type(config.schedule, episode, rng)
        draw_counts[stype] += 1
        if stype is SampleType.RAND_STATE:
            proposals = [extend_random_state(tree, system, rng)]
        elif stype is SampleType.GOAL_STATE:
            proposals = [extend_goal_state(tree, system, rng)]
        elif stype is SampleType.RAND_ACTION:
            proposals = [extend_random_action(tree, system, rng)]
        else:
            proposals = extend_greedy_action(
                tree, system, policy_net, rng, value_net, config.greedy_extend_steps
            )

        for prop in proposals:
            nid = tree.add(prop.parent, prop.state, prop.action, prop.trans_cost, prop.sample_type)
            iterations += 1
            if system.is_goal(prop.state):
                end_nodes.append(nid)
                end_returns.append(
                    tree.trajectory_return(nid, config.learn.gamma, config.learn.goal_reward)
                )
                value_loss = policy_loss = float("nan")
                greedy_return = float("nan")
                greedy_success = False
                if learning:
                    traj = tree.extract_trajectory(nid, config.learn.gamma, config.learn.goal_reward)
                    td_update_chain(value_net, traj, config.learn, system, rng)
                    value_loss = value_net.last_loss
                    update_policy(policy_net, value_net, tree, config.learn, system, rng, grouper)
                    policy_loss = policy_net.last_loss
                    rollout = evaluate_greedy(policy_net, system, config.learn, config.greedy_rollout_steps)
                    greedy_success = rollout.success
                    greedy_return = rollout.total_return if rollout.success else float("nan")
                else:
                    rollout = None

                # Best tree solution so far; returns are cached per end node.
                max_idx = int(np.argmax(end_returns))
                max_val = end_returns[max_idx]
                grd_val = rollout.total_return if (rollout and rollout.success) else float("-inf")
                if grd_val > max_val:
                    episode_steps, episode_val, episode_src = (
                        _rollout_steps(rollout), grd_val, SolutionSource.GREEDY_ROLLOUT
                    )
                else:
                    traj = tree.extract_trajectory(
                        end_nodes[max_idx], config.learn.gamma, config.learn.goal_reward
                    )
                    episode_steps, episode_val, episode_src = (
                        _trajectory_steps(traj), max_val, SolutionSource.TREE_SOLUTION
                    )
                if episode_val > best_return:
                    best_steps, best_return, best_source = episode_steps, episode_val, episode_src
                if not first_solution_steps:
                    first_solution_steps = episode_steps

                records.append(
                    RunRecord(
                        episode=episode,
                        iteration=iterations,
                        tree_size=len(tree),
                        best_return=best_return,
                        greedy_return=greedy_return,
                        greedy_success=greedy_success,
                        value_loss=value_loss,
                        policy_loss=policy_loss,
                        wall_ms=float("nan"),
                    )
                )
                episode += 1
            if terminated():
                break

    return PlannerResult(
        best_steps=best_steps,
        best_return=best_return,
        best_source=best_source,
        first_solution_steps=first_solution_steps,
        episode_records=records,
        tree=tree,
        value_net=value_net,
        policy_net=policy_net,
        draw_counts=draw_counts,
        iterations=iterations,
    )
