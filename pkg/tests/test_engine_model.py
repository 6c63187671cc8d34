"""Configuration, bond derivation, and script plumbing."""

import pytest

from amoebotsim.engine import (
    Amoebot,
    Configuration,
    EMPTY_SCRIPT,
    HOLD,
    MoveAction,
    MoveKind,
    RoundScript,
    make_bond,
)
from amoebotsim.lattice import Direction


def test_amoebot_shape_validation():
    Amoebot(0, (0, 0))
    Amoebot(1, (0, 0), (1, 0))
    with pytest.raises(ValueError):
        Amoebot(2, (0, 0), (0, 0))
    with pytest.raises(ValueError):
        Amoebot(3, (0, 0), (2, 0))


def test_occupancy_is_injective():
    with pytest.raises(ValueError):
        Configuration([Amoebot(0, (0, 0)), Amoebot(1, (0, 0))])
    with pytest.raises(ValueError):
        Configuration([Amoebot(0, (0, 0))], statics=[(0, 0)])
    with pytest.raises(ValueError):
        Configuration([Amoebot(0, (0, 0)), Amoebot(0, (1, 0))])


def test_bonds_cover_all_adjacent_pairs():
    # two contracted amoebots, one expanded one, one static in range
    cfg = Configuration(
        [Amoebot(0, (0, 0)), Amoebot(1, (1, 0)), Amoebot(2, (0, 1), (1, 1))],
        statics=[(-1, 0), (-1, -1)],
    )
    bonds = cfg.bonds
    assert make_bond((0, 0), (1, 0)) in bonds
    assert make_bond((0, 0), (0, 1)) in bonds
    assert make_bond((1, 0), (1, 1)) in bonds
    # internal bond of the expanded amoebot is a bond
    assert make_bond((0, 1), (1, 1)) in bonds
    # amoebot-static yes, static-static no
    assert make_bond((0, 0), (-1, 0)) in bonds
    assert make_bond((-1, 0), (-1, -1)) not in bonds
    # nothing else
    for x, y in bonds:
        assert not (x in cfg.statics and y in cfg.statics)


def test_incident_bonds():
    cfg = Configuration([Amoebot(0, (0, 0), (1, 0)), Amoebot(1, (2, 0))])
    inc = cfg.incident_bonds(0)
    assert make_bond((0, 0), (1, 0)) in inc
    assert make_bond((1, 0), (2, 0)) in inc
    assert len(inc) == 2


def test_connectivity_ignores_statics():
    apart = Configuration(
        [Amoebot(0, (0, 0)), Amoebot(1, (2, 0))], statics=[(1, 0)]
    )
    # the two amoebots are joined only through a static node: not connected
    assert not apart.is_connected()
    joined = Configuration([Amoebot(0, (0, 0)), Amoebot(1, (1, 0))])
    assert joined.is_connected()
    assert Configuration([]).is_connected()
    assert Configuration([Amoebot(0, (4, 4))]).is_connected()


def test_configuration_equality_and_translation():
    a = Configuration([Amoebot(0, (0, 0)), Amoebot(1, (1, 0))], statics=[(0, -1)])
    b = Configuration([Amoebot(1, (1, 0)), Amoebot(0, (0, 0))], statics=[(0, -1)])
    assert a == b
    moved = a.translated((2, -1))
    assert moved.amoebot(0).head == (2, -1)
    assert (2, -2) in moved.statics
    assert moved != a


def test_configuration_json_round_trip():
    cfg = Configuration(
        [Amoebot(0, (0, 0)), Amoebot(1, (0, 1), (1, 1))], statics=[(1, -1)]
    )
    again = Configuration.from_json(cfg.to_json())
    assert again == cfg
    assert again.amoebot(1).tail == (1, 1)


def test_move_action_constructors():
    e = MoveAction.expand(Direction.NE, partition={(1, 0): "origin"})
    assert e.kind is MoveKind.EXPAND
    assert e.direction is Direction.NE
    assert e.partition_map() == {(1, 0): "origin"}

    c = MoveAction.contract("tail")
    assert c.kind is MoveKind.CONTRACT
    assert c.into == "tail"
    with pytest.raises(ValueError):
        MoveAction.contract("middle")

    h = MoveAction.handover(3, ((0, 0), (1, 0)))
    assert h.kind is MoveKind.HANDOVER
    assert h.partner == 3
    assert h.via == make_bond((1, 0), (0, 0))

    assert HOLD.kind is MoveKind.HOLD


def test_move_action_json_round_trip():
    actions = [
        HOLD,
        MoveAction.expand(Direction.SW, partition={(0, -1): "new", (1, 0): "origin"}),
        MoveAction.contract("head"),
        MoveAction.handover(7, ((2, 2), (3, 2))),
    ]
    for act in actions:
        assert MoveAction.from_json(act.to_json()) == act


def test_round_script_normalization():
    s = RoundScript.make(
        releases={0: [make_bond((0, 0), (1, 0)), make_bond((0, 0), (1, 0))]},
        actions={1: MoveAction.contract("head"), 0: HOLD},
    )
    # hold entries are dropped, duplicate releases collapse
    assert 0 not in s.actions
    assert s.action_for(0) is HOLD
    assert s.action_for(1).kind is MoveKind.CONTRACT
    assert len(s.releases[0]) == 1
    assert not s.is_empty()
    assert EMPTY_SCRIPT.is_empty()


def test_round_script_json_round_trip():
    s = RoundScript.make(
        releases={2: [make_bond((0, 0), (0, 1))]},
        actions={
            0: MoveAction.expand(Direction.E),
            1: MoveAction.handover(0, ((1, 0), (2, 0))),
        },
    )
    again = RoundScript.from_json(s.to_json())
    assert again == s
    assert RoundScript.from_json(EMPTY_SCRIPT.to_json()).is_empty()
