"""Append-only search tree over configuration states.

Nodes are stored columnar (contiguous by id) so nearest-node queries and
full-tree replays run as vectorized scans. Nodes are never removed; parent
ids are always strictly smaller than child ids.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional

import numpy as np


class SampleType(Enum):
    """How a node's incoming transition was generated."""

    ROOT = "Root"
    RAND_STATE = "RandState"
    GOAL_STATE = "GoalState"
    RAND_ACTION = "RandAction"
    GREEDY_ACTION = "GreedyAction"


@dataclass(frozen=True)
class TreeNode:
    """Read-only view of one tree node."""

    id: int
    parent: Optional[int]
    state: np.ndarray
    action: Optional[np.ndarray]
    trans_cost: float
    sample_type: SampleType


@dataclass(frozen=True)
class Trajectory:
    """Root-to-terminal node path with its discounted return.

    total_return = sum_i gamma^(i-1) * trans_cost_i + gamma^L * goal_reward
    for a path of L transitions.
    """

    nodes: list[TreeNode]
    total_return: float


def _require_finite(state: np.ndarray) -> np.ndarray:
    state = np.asarray(state, dtype=float)
    if state.ndim != 1:
        raise ValueError(f"state must be a 1-d vector, got shape {state.shape}")
    if not np.all(np.isfinite(state)):
        raise ValueError(f"state contains non-finite components: {state}")
    return state


class Tree:
    """Search tree with O(1) id lookup and vectorized nearest-node scan."""

    _GROW = 1024

    def __init__(self, root_state: np.ndarray):
        root_state = _require_finite(root_state)
        self.state_dim = root_state.shape[0]
        self.action_dim: Optional[int] = None
        cap = self._GROW
        self._states = np.empty((cap, self.state_dim))
        self._actions: Optional[np.ndarray] = None
        self._parents = np.empty(cap, dtype=np.int64)
        self._trans_costs = np.empty(cap)
        self._sample_types: list[SampleType] = []
        self._size = 0
        self._append(-1, root_state, None, 0.0, SampleType.ROOT)

    def __len__(self) -> int:
        return self._size

    @property
    def states(self) -> np.ndarray:
        """(size, state_dim) view of all node states, indexed by id."""
        return self._states[: self._size]

    @property
    def parents(self) -> np.ndarray:
        """(size,) parent id per node; root has -1."""
        return self._parents[: self._size]

    @property
    def actions(self) -> np.ndarray:
        """(size, action_dim) incoming actions; the root row is NaN."""
        if self._actions is None:
            raise ValueError("tree has no non-root nodes yet")
        return self._actions[: self._size]

    @property
    def trans_costs(self) -> np.ndarray:
        return self._trans_costs[: self._size]

    @property
    def sample_types(self) -> list[SampleType]:
        return self._sample_types

    def node(self, node_id: int) -> TreeNode:
        if not 0 <= node_id < self._size:
            raise KeyError(f"node id {node_id} not in tree of size {self._size}")
        parent = int(self._parents[node_id])
        action = None
        if parent >= 0 and self._actions is not None:
            action = self._actions[node_id].copy()
        return TreeNode(
            id=node_id,
            parent=parent if parent >= 0 else None,
            state=self._states[node_id].copy(),
            action=action,
            trans_cost=float(self._trans_costs[node_id]),
            sample_type=self._sample_types[node_id],
        )

    def add(
        self,
        parent: int,
        state: np.ndarray,
        action: np.ndarray,
        trans_cost: float,
        sample_type: SampleType,
    ) -> int:
        """Append a node; returns its id (== previous size)."""
        if not 0 <= parent < self._size:
            raise KeyError(f"parent id {parent} not in tree of size {self._size}")
        state = _require_finite(state)
        if state.shape[0] != self.state_dim:
            raise ValueError(
                f"state dimension {state.shape[0]} != tree dimension {self.state_dim}"
            )
        action = np.asarray(action, dtype=float)
        if self.action_dim is None:
            self.action_dim = action.shape[0]
        elif action.shape[0] != self.action_dim:
            raise ValueError(
                f"action dimension {action.shape[0]} != tree dimension {self.action_dim}"
            )
        return self._append(parent, state, action, float(trans_cost), sample_type)

    def _append(self, parent, state, action, trans_cost, sample_type) -> int:
        i = self._size
        if i == self._states.shape[0]:
            new_cap = self._states.shape[0] + max(self._GROW, self._states.shape[0])
            self._states = np.resize(self._states, (new_cap, self.state_dim))
            self._parents = np.resize(self._parents, new_cap)
            self._trans_costs = np.resize(self._trans_costs, new_cap)
            if self._actions is not None:
                self._actions = np.resize(self._actions, (new_cap, self._actions.shape[1]))
        if action is not None and self._actions is None:
            self._actions = np.full((self._states.shape[0], action.shape[0]), np.nan)
        self._states[i] = state
        self._parents[i] = parent
        self._trans_costs[i] = trans_cost
        if action is not None:
            self._actions[i] = action
        self._sample_types.append(sample_type)
        self._size += 1
        return i

    def nearest(self, query: np.ndarray, batch_distance: Callable) -> int:
        """Id of the node minimizing batch_distance(states, query).

        Exhaustive scan; ties resolve to the smallest id (np.argmin picks the
        first minimum).
        """
        if self._size == 0:
            raise ValueError("empty tree")
        d = batch_distance(self.states, np.asarray(query, dtype=float))
        return int(np.argmin(d))

    def random_node(self, rng: np.random.Generator) -> int:
        """Uniformly random node id over the current size."""
        if self._size == 0:
            raise ValueError("empty tree")
        return int(rng.integers(self._size))

    def path_to_root(self, node_id: int) -> list[int]:
        """Ids from root to node_id, inclusive."""
        if not 0 <= node_id < self._size:
            raise KeyError(f"node id {node_id} not in tree of size {self._size}")
        ids = []
        i = node_id
        while i >= 0:
            ids.append(i)
            i = int(self._parents[i])
        ids.reverse()
        return ids

    def extract_trajectory(self, terminal: int, gamma: float, goal_reward: float) -> Trajectory:
        """Root-to-terminal path plus its discounted return.

        The transition into node i at depth k contributes gamma^(k-1) times
        its trans_cost; the terminal contributes gamma^L * goal_reward.
        """
        ids = self.path_to_root(terminal)
        nodes = [self.node(i) for i in ids]
        total = 0.0
        discount = 1.0
        for node in nodes[1:]:
            total += discount * node.trans_cost
            discount *= gamma
        total += discount * goal_reward
        return Trajectory(nodes=nodes, total_return=total)

    def trajectory_return(self, terminal: int, gamma: float, goal_reward: float) -> float:
        """Discounted return of the root-to-terminal path (no node copies)."""
        ids = self.path_to_root(terminal)
        total = 0.0
        discount = 1.0
        for i in ids[1:]:
            total += discount * float(self._trans_costs[i])
            discount *= gamma
        total += discount * goal_reward
        return total
