"""Block processes, reachability combinatorics, renormalisation iterations."""

from .blocks import BlockGapReport, BlockGenerator, BlockSpec, block_generator, gap_equality_check
from .reach import (
    EnergeticBottleneckReport,
    ReachSet,
    energetic_bottleneck,
    reachable_set,
    shell_projection,
)
from .knight import KnightClasses, knight_classes, knight_steps
from .tree import Arborescence, TreeGapReport, build_arborescence, tree_gap_comparison, tree_generator
from .maps import MAP_NAMES, RenormTrajectory, coefficient_map, h_map, renorm_iterate
from .schedule import (
    MultiscaleSchedule,
    midpoint_containment,
    multiscale_schedule,
    one_step_factor,
    product_factor_log2,
    telescoped_factor_log2,
    windows_nested,
)
from .flows import (
    FlowPieceReport,
    FlowRecursionReport,
    corner_resistance,
    flow_recursion,
    quadrant_box,
    shifted_target,
)

__all__ = [
    "BlockSpec",
    "BlockGenerator",
    "BlockGapReport",
    "block_generator",
    "gap_equality_check",
    "ReachSet",
    "reachable_set",
    "shell_projection",
    "EnergeticBottleneckReport",
    "energetic_bottleneck",
    "KnightClasses",
    "knight_classes",
    "knight_steps",
    "Arborescence",
    "build_arborescence",
    "tree_generator",
    "tree_gap_comparison",
    "TreeGapReport",
    "MAP_NAMES",
    "RenormTrajectory",
    "coefficient_map",
    "h_map",
    "renorm_iterate",
    "MultiscaleSchedule",
    "multiscale_schedule",
    "windows_nested",
    "midpoint_containment",
    "one_step_factor",
    "telescoped_factor_log2",
    "product_factor_log2",
    "FlowPieceReport",
    "FlowRecursionReport",
    "corner_resistance",
    "flow_recursion",
    "quadrant_box",
    "shifted_target",
]
