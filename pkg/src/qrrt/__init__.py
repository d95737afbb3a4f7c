"""Quality-biased tree planner with learned cost-to-go.

An incremental sampling-based motion planner for non-holonomic systems
that learns a value function from completed solution paths and biases
tree growth toward high-value regions, plus a goal-biased baseline and
three benchmark systems.
"""

from .learning import GreedyRollout, LearnParams, evaluate_greedy, td_update_chain, update_policy
from .mlp import AdaptiveNet, Mlp, TrainSample, TrainSettings, policy_net_for, value_net_for
from .planner import (
    BiasSchedule,
    PlannerConfig,
    PlannerResult,
    RunRecord,
    SolutionSource,
    TrajStep,
    baseline_plan,
    draw_sample_type,
    extend_goal_state,
    extend_greedy_action,
    extend_random_action,
    extend_random_state,
    get_max_traj,
    qrrt_plan,
)
from .systems import make_system
from .tree import SampleType, Trajectory, Tree, TreeNode

__version__ = "0.1.0"

__all__ = [
    "AdaptiveNet",
    "BiasSchedule",
    "GreedyRollout",
    "LearnParams",
    "Mlp",
    "PlannerConfig",
    "PlannerResult",
    "RunRecord",
    "SampleType",
    "SolutionSource",
    "TrainSample",
    "TrainSettings",
    "TrajStep",
    "Trajectory",
    "Tree",
    "TreeNode",
    "baseline_plan",
    "draw_sample_type",
    "evaluate_greedy",
    "extend_goal_state",
    "extend_greedy_action",
    "extend_random_action",
    "extend_random_state",
    "get_max_traj",
    "make_system",
    "policy_net_for",
    "qrrt_plan",
    "td_update_chain",
    "update_policy",
    "value_net_for",
]
