"""Planning systems: differential drive, acrobot, null-space constrained."""

from __future__ import annotations

from .acrobot import Acrobot, AcrobotParams
from .base import SystemModel, wrap_angle
from .diffdrive import DiffDrive, DiffDriveParams, terrain_cost
from .nullspace import NullSpace, NullSpaceParams, null_space_basis

SYSTEM_NAMES = ("diffdrive", "acrobot", "nullspace")


def make_system(name: str, **param_overrides) -> SystemModel:
    """Build a system by name with keyword overrides of its parameters."""
    if name == "diffdrive":
        return DiffDrive(DiffDriveParams(**param_overrides))
    if name == "acrobot":
        return Acrobot(AcrobotParams(**param_overrides))
    if name == "nullspace":
        return NullSpace(NullSpaceParams(**param_overrides))
    raise ValueError(f"unknown system {name!r}; expected one of {SYSTEM_NAMES}")


__all__ = [
    "Acrobot",
    "AcrobotParams",
    "DiffDrive",
    "DiffDriveParams",
    "NullSpace",
    "NullSpaceParams",
    "SYSTEM_NAMES",
    "SystemModel",
    "make_system",
    "null_space_basis",
    "terrain_cost",
    "wrap_angle",
]
