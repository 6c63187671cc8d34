"""Whole-round semantics: releases, rigidity, conflicts, finalization.

The directed cases here pin down the model's required verdicts: what pushes,
what pulls, what collides, and what is structurally impossible.  Expected
configurations were worked out by hand on the triangular lattice and
cross-checked against the rigidity property test in test_engine_motion.py.
"""

import pytest

from amoebotsim.engine import (
    Amoebot,
    Configuration,
    ConflictError,
    ConflictKind,
    ConflictReport,
    EMPTY_SCRIPT,
    MoveAction,
    RoundScript,
    make_bond,
    step,
    step_or_raise,
)
from amoebotsim.lattice import Direction


def bots(cfg):
    return {(b.id, b.head, b.tail) for b in cfg.amoebots}


def test_lone_expansion_keeps_head_in_place():
    cfg = Configuration([Amoebot(0, (0, 0))])
    out = step_or_raise(cfg, RoundScript.make(actions={0: MoveAction.expand(Direction.E)}))
    assert bots(out) == {(0, (0, 0), (-1, 0))}


def test_expansion_with_static_anchor_grows_forward():
    cfg = Configuration([Amoebot(0, (0, 0))], statics=[(0, -1)])
    script = RoundScript.make(
        actions={0: MoveAction.expand(Direction.E, partition={(0, -1): "origin"})}
    )
    out = step_or_raise(cfg, script)
    assert bots(out) == {(0, (1, 0), (0, 0))}


def test_expansion_climb_pulls_body_toward_pinned_new_node():
    # the bond to the static is assigned to the new node, so the new node
    # stays put and the origin slides away from it
    cfg = Configuration([Amoebot(0, (0, 0))], statics=[(0, -1)])
    script = RoundScript.make(
        actions={0: MoveAction.expand(Direction.E, partition={(0, -1): "new"})}
    )
    out = step_or_raise(cfg, script)
    assert bots(out) == {(0, (0, 0), (-1, 0))}
    assert out.statics == cfg.statics


def test_expansion_pushes_neighbor_on_new_side():
    cfg = Configuration([Amoebot(0, (0, 0)), Amoebot(1, (1, 0))])
    script = RoundScript.make(
        actions={0: MoveAction.expand(Direction.E, partition={(1, 0): "new"})}
    )
    out = step_or_raise(cfg, script)
    # in the anchored frame the expander's head is fixed and the neighbor
    # sits one unit east of it, exactly as before the round
    assert bots(out) == {(0, (0, 0), (-1, 0)), (1, (1, 0), None)}


def test_expansion_onto_holding_neighbor_collides():
    cfg = Configuration([Amoebot(0, (0, 0)), Amoebot(1, (1, 0))])
    script = RoundScript.make(
        actions={0: MoveAction.expand(Direction.E, partition={(1, 0): "origin"})}
    )
    out = step(cfg, script)
    assert isinstance(out, ConflictReport)
    assert out.kind is ConflictKind.COLLISION


def test_expansion_onto_static_collides():
    cfg = Configuration([Amoebot(0, (0, 0))], statics=[(1, 0)])
    script = RoundScript.make(
        actions={0: MoveAction.expand(Direction.E, partition={(1, 0): "origin"})}
    )
    out = step(cfg, script)
    assert isinstance(out, ConflictReport)
    assert out.kind is ConflictKind.COLLISION
    assert out.evidence.get("static") is True


def test_contraction_pulls_bonded_neighbor():
    cfg = Configuration([Amoebot(0, (0, 0), (1, 0)), Amoebot(1, (2, 0))])
    out = step_or_raise(cfg, RoundScript.make(actions={0: MoveAction.contract("head")}))
    assert bots(out) == {(0, (0, 0), None), (1, (1, 0), None)}


def test_contraction_into_tail():
    cfg = Configuration([Amoebot(0, (0, 0), (1, 0))])
    out = step_or_raise(cfg, RoundScript.make(actions={0: MoveAction.contract("tail")}))
    # lowest-id head must not displace, and the kept node is the tail node
    assert bots(out) == {(0, (0, 0), None)}


def test_handover_moves_nothing():
    cfg = Configuration([Amoebot(0, (0, 0)), Amoebot(1, (1, 0), (2, 0))])
    via = ((0, 0), (1, 0))
    script = RoundScript.make(
        actions={0: MoveAction.handover(1, via), 1: MoveAction.handover(0, via)}
    )
    out = step_or_raise(cfg, script)
    assert bots(out) == {(0, (0, 0), (1, 0)), (1, (2, 0), None)}


def test_handover_through_expanded_head():
    # same pair, but the via bond touches the expanded amoebot's head
    cfg = Configuration([Amoebot(0, (0, 0)), Amoebot(1, (2, 0), (1, 0))])
    via = ((0, 0), (1, 0))
    script = RoundScript.make(
        actions={0: MoveAction.handover(1, via), 1: MoveAction.handover(0, via)}
    )
    out = step_or_raise(cfg, script)
    assert bots(out) == {(0, (0, 0), (1, 0)), (1, (2, 0), None)}


def test_release_that_disconnects_is_rejected():
    cfg = Configuration([Amoebot(0, (0, 0)), Amoebot(1, (1, 0))])
    script = RoundScript.make(releases={0: [make_bond((0, 0), (1, 0))]})
    out = step(cfg, script)
    assert isinstance(out, ConflictReport)
    assert out.kind is ConflictKind.CONNECTIVITY
    assert out.evidence["separated"] == [1]


def test_triangle_with_split_partition_cannot_stay_rigid():
    cfg = Configuration([Amoebot(0, (0, 0)), Amoebot(1, (1, 0)), Amoebot(2, (0, 1))])
    script = RoundScript.make(
        actions={
            0: MoveAction.expand(
                Direction.W, partition={(1, 0): "new", (0, 1): "origin"}
            )
        }
    )
    out = step(cfg, script)
    assert isinstance(out, ConflictReport)
    assert out.kind is ConflictKind.STRUCTURAL


def test_triangle_with_united_partition_is_fine():
    cfg = Configuration([Amoebot(0, (0, 0)), Amoebot(1, (1, 0)), Amoebot(2, (0, 1))])
    script = RoundScript.make(
        actions={
            0: MoveAction.expand(
                Direction.W, partition={(1, 0): "origin", (0, 1): "origin"}
            )
        }
    )
    out = step_or_raise(cfg, script)
    assert bots(out) == {
        (0, (0, 0), (1, 0)),
        (1, (2, 0), None),
        (2, (1, 1), None),
    }


def test_static_cannot_be_dragged():
    cfg = Configuration([Amoebot(0, (0, 0))], statics=[(0, -1), (1, -1)])
    script = RoundScript.make(
        actions={
            0: MoveAction.expand(
                Direction.E, partition={(0, -1): "origin", (1, -1): "new"}
            )
        }
    )
    out = step(cfg, script)
    assert isinstance(out, ConflictReport)
    assert out.kind is ConflictKind.STRUCTURAL
    assert out.evidence.get("static") == [1, -1]


def test_double_bond_contraction_is_a_collision():
    cfg = Configuration([Amoebot(0, (0, 0), (1, 0)), Amoebot(1, (0, 1))])
    out = step(cfg, RoundScript.make(actions={0: MoveAction.contract("head")}))
    assert isinstance(out, ConflictReport)
    assert out.kind is ConflictKind.COLLISION
    assert out.evidence["rule"] == "double-bond-contraction"


def test_double_bond_contraction_fixed_by_releasing_one():
    cfg = Configuration([Amoebot(0, (0, 0), (1, 0)), Amoebot(1, (0, 1))])
    script = RoundScript.make(
        releases={0: [make_bond((1, 0), (0, 1))]},
        actions={0: MoveAction.contract("head")},
    )
    out = step_or_raise(cfg, script)
    assert bots(out) == {(0, (0, 0), None), (1, (0, 1), None)}


def test_empty_script_is_identity():
    cfg = Configuration(
        [Amoebot(0, (0, 0)), Amoebot(1, (1, 0), (1, 1))], statics=[(0, -1)]
    )
    assert step(cfg, EMPTY_SCRIPT) == cfg


def test_conflict_error_wraps_report():
    cfg = Configuration([Amoebot(0, (0, 0)), Amoebot(1, (1, 0))])
    script = RoundScript.make(releases={0: [make_bond((0, 0), (1, 0))]})
    with pytest.raises(ConflictError) as info:
        step_or_raise(cfg, script)
    assert info.value.report.kind is ConflictKind.CONNECTIVITY


class TestScriptValidation:
    def setup_method(self):
        self.cfg = Configuration(
            [Amoebot(0, (0, 0)), Amoebot(1, (1, 0), (2, 0))]
        )

    def check_invalid(self, script):
        out = step(self.cfg, script)
        assert isinstance(out, ConflictReport)
        assert out.kind is ConflictKind.INVALID_SCRIPT
        return out

    def test_unknown_amoebot_in_actions(self):
        self.check_invalid(RoundScript.make(actions={9: MoveAction.contract("head")}))

    def test_unknown_amoebot_in_releases(self):
        self.check_invalid(
            RoundScript.make(releases={9: [make_bond((0, 0), (1, 0))]})
        )

    def test_release_of_nonexistent_bond(self):
        self.check_invalid(
            RoundScript.make(releases={0: [make_bond((0, 0), (5, 5))]})
        )

    def test_release_of_internal_bond(self):
        self.check_invalid(
            RoundScript.make(releases={1: [make_bond((1, 0), (2, 0))]})
        )

    def test_release_must_be_incident(self):
        cfg = Configuration(
            [Amoebot(0, (0, 0)), Amoebot(1, (1, 0)), Amoebot(2, (2, 0))]
        )
        script = RoundScript.make(releases={0: [make_bond((1, 0), (2, 0))]})
        out = step(cfg, script)
        assert isinstance(out, ConflictReport)
        assert out.kind is ConflictKind.INVALID_SCRIPT

    def test_expand_requires_contracted(self):
        self.check_invalid(
            RoundScript.make(actions={1: MoveAction.expand(Direction.E)})
        )

    def test_contract_requires_expanded(self):
        self.check_invalid(
            RoundScript.make(actions={0: MoveAction.contract("head")})
        )

    def test_expand_partition_must_cover_retained_bonds(self):
        self.check_invalid(
            RoundScript.make(actions={0: MoveAction.expand(Direction.NE)})
        )

    def test_expand_partition_must_not_name_strangers(self):
        self.check_invalid(
            RoundScript.make(
                actions={
                    0: MoveAction.expand(
                        Direction.NE, partition={(1, 0): "new", (5, 5): "origin"}
                    )
                }
            )
        )

    def test_handover_requires_reciprocal_actions(self):
        via = ((0, 0), (1, 0))
        self.check_invalid(
            RoundScript.make(actions={0: MoveAction.handover(1, via)})
        )

    def test_handover_partners_must_agree_on_via(self):
        self.check_invalid(
            RoundScript.make(
                actions={
                    0: MoveAction.handover(1, ((0, 0), (1, 0))),
                    1: MoveAction.handover(0, ((1, 0), (2, 0))),
                }
            )
        )

    def test_handover_via_must_not_be_released(self):
        via = ((0, 0), (1, 0))
        self.check_invalid(
            RoundScript.make(
                releases={0: [make_bond((0, 0), (1, 0))]},
                actions={
                    0: MoveAction.handover(1, via),
                    1: MoveAction.handover(0, via),
                },
            )
        )

    def test_handover_needs_one_contracted_one_expanded(self):
        cfg = Configuration([Amoebot(0, (0, 0)), Amoebot(1, (1, 0))])
        via = ((0, 0), (1, 0))
        script = RoundScript.make(
            actions={
                0: MoveAction.handover(1, via),
                1: MoveAction.handover(0, via),
            }
        )
        out = step(cfg, script)
        assert isinstance(out, ConflictReport)
        assert out.kind is ConflictKind.INVALID_SCRIPT
