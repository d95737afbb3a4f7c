"""Value learning along solution paths and greedy-policy extraction.

Value targets come from one-step temporal-difference blending walked
backward from the goal node; the greedy policy is refit each episode by
grouping all tree transitions by source state and picking the action with
the best one-step quality in each group.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .mlp import AdaptiveNet, TrainSample
from .systems.base import SystemModel
from .tree import Trajectory, Tree


@dataclass
class LearnParams:
    eta: float = 0.1
    gamma: float = 0.99
    goal_reward: float = 0.0
    group_radius: Optional[float] = None  # default: 2% of the metric diagonal

    def __post_init__(self):
        if not 0.0 < self.eta <= 1.0:
            raise ValueError(f"eta must be in (0, 1], got {self.eta}")
        if not 0.0 < self.gamma <= 1.0:
            raise ValueError(f"gamma must be in (0, 1], got {self.gamma}")

    def effective_group_radius(self, system: SystemModel) -> float:
        if self.group_radius is not None:
            return self.group_radius
        return 0.02 * system.metric_diagonal()


@dataclass
class StateGroup:
    """Transitions whose source states sit within group_radius of the first."""

    representative_state: np.ndarray
    member_ids: list[int] = field(default_factory=list)


@dataclass
class GreedyRollout:
    """Result of running the policy network open-loop from the start state."""

    success: bool
    states: list[np.ndarray]
    actions: list[np.ndarray]
    rewards: list[float]
    total_return: float


def td_update_chain(
    value_net: AdaptiveNet,
    trajectory: Trajectory,
    params: LearnParams,
    system: SystemModel,
    rng: np.random.Generator,
) -> list[TrainSample]:
    """One-step TD targets along a solution path, then a value-net retrain.

    Walks the path backward from the goal node. Each node's target blends
    the current network estimate with the running next-state value:

        target   = (1 - eta) * V(s) + eta * next_val
        next_val = trans_cost + gamma * V(s)      (for the parent's turn)

    All estimates V(s) are read before retraining, and the network is
    retrained once with the whole batch. Emits one sample per node, goal
    node first, root last.
    """
    terminal = trajectory.nodes[-1]
    if not system.is_goal(terminal.state):
        raise ValueError("trajectory does not end at a goal state")
    states = np.stack([n.state for n in trajectory.nodes])
    current_vals = value_net.predict_batch(states)[:, 0]

    samples = []
    next_val = params.goal_reward
    for i in range(len(trajectory.nodes) - 1, -1, -1):
        node = trajectory.nodes[i]
        curr = float(current_vals[i])
        target = (1.0 - params.eta) * curr + params.eta * next_val
        samples.append(TrainSample(input=node.state, target=np.array([target])))
        if node.parent is not None:
            next_val = node.trans_cost + params.gamma * curr
    value_net.retrain(samples, rng)
    return samples


class TransitionGrouper:
    """Incremental state groups over tree transitions, keyed by source state.

    Each group is anchored to a representative: the source state of the
    first transition that opened it. A later transition joins the group with
    the smallest index whose representative lies within the radius, or opens
    a new one. Grouping one transition never reshuffles earlier ones, so the
    grouper is fed incrementally as the tree grows; feeding a whole tree at
    once gives identical groups (transitions arrive in child-id order either
    way).

    A hash grid over metric-scaled coordinates (cell width >= radius,
    modular indices on wrapped dimensions) keeps candidate lookups local.
    """

    def __init__(self, system: SystemModel, radius: float):
        if radius <= 0:
            raise ValueError("group radius must be positive")
        self.system = system
        self.radius = radius
        self._scale = np.sqrt(system.distance_weights)
        self._angular = system.angular_dims
        self._wrap_cells = {}
        for i in self._angular:
            span = 2.0 * np.pi * self._scale[i]
            self._wrap_cells[i] = max(1, int(span // radius))
        self._offsets = self._neighbor_offsets(system.state_dim)
        self._cells: dict[tuple, list[int]] = {}
        self.rep_states: list[np.ndarray] = []
        self.group_of_parent: dict[int, int] = {}
        self.child_ids: list[int] = []
        self.group_ids: list[int] = []
        self._next_child = 1

    @staticmethod
    def _neighbor_offsets(dim):
        grids = np.meshgrid(*([np.array([-1, 0, 1])] * dim), indexing="ij")
        return np.stack([g.ravel() for g in grids], axis=1)

    def _scaled(self, state):
        return state * self._scale

    def _cell_key(self, scaled):
        idx = np.floor(scaled / self.radius).astype(np.int64)
        return self._wrap_key(idx)

    def _wrap_key(self, idx):
        key = []
        for i, v in enumerate(idx):
            if i in self._wrap_cells:
                key.append(int(v) % self._wrap_cells[i])
            else:
                key.append(int(v))
        return tuple(key)

    def _assign_group(self, parent_state) -> int:
        scaled = self._scaled(parent_state)
        base = np.floor(scaled / self.radius).astype(np.int64)
        candidates = []
        for off in self._offsets:
            bucket = self._cells.get(self._wrap_key(base + off))
            if bucket:
                candidates.extend(bucket)
        if candidates:
            candidates = sorted(set(candidates))
            reps = np.stack([self.rep_states[g] for g in candidates])
            dists = self.system.distance_batch(reps, parent_state)
            hits = np.nonzero(dists <= self.radius)[0]
            if hits.size:
                return candidates[int(hits[0])]
        g = len(self.rep_states)
        self.rep_states.append(parent_state.copy())
        self._cells.setdefault(self._cell_key(scaled), []).append(g)
        return g

    def ingest(self, tree: Tree) -> None:
        """Feed transitions added since the last call, in child-id order."""
        parents = tree.parents
        states = tree.states
        for child in range(self._next_child, len(tree)):
            parent = int(parents[child])
            g = self.group_of_parent.get(parent)
            if g is None:
                g = self._assign_group(states[parent])
                self.group_of_parent[parent] = g
            self.child_ids.append(child)
            self.group_ids.append(g)
        self._next_child = len(tree)

    def groups(self) -> list[StateGroup]:
        """Materialized view of the current groups and their member children."""
        out = [StateGroup(rep) for rep in self.rep_states]
        for child, g in zip(self.child_ids, self.group_ids):
            out[g].member_ids.append(child)
        return out


def update_policy(
    policy_net: AdaptiveNet,
    value_net: AdaptiveNet,
    tree: Tree,
    params: LearnParams,
    system: SystemModel,
    rng: np.random.Generator,
    grouper: Optional[TransitionGrouper] = None,
) -> list[TrainSample]:
    """Greedy action per state group over the whole tree, then a policy refit.

    Quality of a transition is trans_cost + gamma * V(child state). Within a
    group the best-quality action wins; ties go to the smallest child id.
    Emits one sample per group, pairing the winning action with the source
    state it was actually taken from. Passing a persistent grouper lets
    repeated calls on a growing tree skip regrouping old transitions.
    """
    if len(tree) <= 1:
        return []
    if grouper is None:
        grouper = TransitionGrouper(system, params.effective_group_radius(system))
    grouper.ingest(tree)

    child_ids = np.asarray(grouper.child_ids, dtype=np.int64)
    group_ids = np.asarray(grouper.group_ids, dtype=np.int64)
    order = np.argsort(group_ids, kind="stable")  # within a group: child id ascending
    child_ids = child_ids[order]
    group_ids = group_ids[order]
    starts = np.nonzero(np.diff(group_ids, prepend=-1))[0]

    child_states = tree.states[child_ids]
    values = value_net.predict_batch(child_states)[:, 0]
    quality = tree.trans_costs[child_ids] + params.gamma * values

    seg = np.repeat(np.arange(starts.size), np.diff(np.append(starts, quality.size)))
    group_max = np.maximum.reduceat(quality, starts)
    is_max = quality == group_max[seg]
    big = np.iinfo(np.int64).max
    tie_key = np.where(is_max, child_ids, big)
    winner_child = np.minimum.reduceat(tie_key, starts)
    winner_rows = np.nonzero(tie_key == winner_child[seg])[0]

    actions = tree.actions
    states = tree.states
    parents = tree.parents
    samples = []
    for row in winner_rows:
        child = int(child_ids[int(row)])
        source = int(parents[child])
        samples.append(
            TrainSample(input=states[source].copy(), target=actions[child].copy())
        )
    policy_net.retrain(samples, rng)
    return samples


def evaluate_greedy(
    policy_net: AdaptiveNet,
    system: SystemModel,
    params: LearnParams,
    max_steps: int = 500,
) -> GreedyRollout:
    """Run the policy open-loop from the start state until goal or budget.

    Deterministic given fixed networks and system. Failure (budget exhausted)
    is a normal outcome; callers treat its value as -inf.
    """
    if max_steps < 1:
        raise ValueError("max_steps must be >= 1")
    state = system.start_state.copy()
    states = [state]
    actions: list[np.ndarray] = []
    rewards: list[float] = []
    if system.is_goal(state):
        return GreedyRollout(True, states, actions, rewards, params.goal_reward)
    total = 0.0
    discount = 1.0
    for _ in range(max_steps):
        action = policy_net.predict(state)
        action = system.clip_action(action)
        new_state = system.apply_action(state, action)
        reward = system.trans_reward(state, new_state, action)
        states.append(new_state)
        actions.append(action)
        rewards.append(reward)
        total += discount * reward
        discount *= params.gamma
        state = new_state
        if system.is_goal(state):
            return GreedyRollout(True, states, actions, rewards, total + discount * params.goal_reward)
    return GreedyRollout(False, states, actions, rewards, float("-inf"))
