"""Joint-movement simulation engine."""

from .model import (
    Amoebot,
    Bond,
    Configuration,
    ConflictError,
    ConflictKind,
    ConflictReport,
    EMPTY_SCRIPT,
    HOLD,
    MoveAction,
    MoveKind,
    RoundScript,
    make_bond,
)
from .kinematics import (
    Kinematics,
    amoebot_parts,
    apply_releases,
    external_bonds,
    solve_kinematics,
    validate_script,
)
from .collision import (
    build_segments,
    detect_collisions,
    forbidden_contractions,
    segments_intersect,
)
from .round import (
    finalize_round,
    run_or_raise,
    run_script,
    step,
    step_or_raise,
)

__all__ = [
    "Amoebot",
    "Bond",
    "Configuration",
    "ConflictError",
    "ConflictKind",
    "ConflictReport",
    "EMPTY_SCRIPT",
    "HOLD",
    "Kinematics",
    "MoveAction",
    "MoveKind",
    "RoundScript",
    "amoebot_parts",
    "apply_releases",
    "build_segments",
    "detect_collisions",
    "external_bonds",
    "finalize_round",
    "forbidden_contractions",
    "make_bond",
    "run_or_raise",
    "run_script",
    "segments_intersect",
    "solve_kinematics",
    "step",
    "step_or_raise",
    "validate_script",
]
