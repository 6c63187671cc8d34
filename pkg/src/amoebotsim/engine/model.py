"""Data model for amoebot structures and round scripts.

An amoebot occupies one node (contracted) or two adjacent nodes (expanded).
A configuration is a set of amoebots plus immovable static nodes; bonds exist
between every pair of adjacent occupied nodes and between occupied and static
nodes.  Bond sets are derived on demand: between rounds every possible bond
is present, so storing them would be redundant.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from ..lattice import (
    Direction,
    NodeCoord,
    add,
    is_adjacent,
    neighbors,
)

Bond = tuple[NodeCoord, NodeCoord]


def make_bond(a: NodeCoord, b: NodeCoord) -> Bond:
    return (a, b) if a <= b else (b, a)


@dataclass(frozen=True, order=True)
class Amoebot:
    id: int
    head: NodeCoord
    tail: NodeCoord | None = None

    def __post_init__(self):
        if self.tail is not None:
            if self.tail == self.head:
                raise ValueError(f"amoebot {self.id}: head equals tail")
            if not is_adjacent(self.head, self.tail):
                raise ValueError(f"amoebot {self.id}: head and tail not adjacent")

    @property
    def is_expanded(self) -> bool:
        return self.tail is not None

    def nodes(self) -> tuple[NodeCoord, ...]:
        if self.tail is None:
            return (self.head,)
        return (self.head, self.tail)

    def translated(self, delta: tuple[int, int]) -> "Amoebot":
        tail = None if self.tail is None else add(self.tail, delta)
        return Amoebot(self.id, head=add(self.head, delta), tail=tail)


class Configuration:
    """Amoebots plus statics with injective occupancy.

    Equality ignores derived state.  Connectivity of the amoebot structure is
    checked by is_connected(); the engine enforces it after every round, but
    partially built configurations (e.g. inside generators) may elect to skip
    the check.
    """

    __slots__ = ("amoebots", "statics", "_occupancy", "_bonds")

    def __init__(self, amoebots, statics=()):
        bots = sorted(amoebots, key=lambda a: a.id)
        ids = [a.id for a in bots]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate amoebot ids")
        self.amoebots: tuple[Amoebot, ...] = tuple(bots)
        self.statics: frozenset[NodeCoord] = frozenset(statics)
        occ: dict[NodeCoord, tuple[int, str]] = {}
        for a in bots:
            for which, node in (("head", a.head), ("tail", a.tail)):
                if node is None:
                    continue
                if node in occ or node in self.statics:
                    raise ValueError(f"node {node} occupied twice")
                occ[node] = (a.id, which)
        self._occupancy = occ
        self._bonds: frozenset[Bond] | None = None

    def __eq__(self, other):
        if not isinstance(other, Configuration):
            return NotImplemented
        return self.amoebots == other.amoebots and self.statics == other.statics

    def __hash__(self):
        return hash((self.amoebots, self.statics))

    def __repr__(self):
        return f"Configuration({len(self.amoebots)} amoebots, {len(self.statics)} statics)"

    def amoebot(self, aid: int) -> Amoebot:
        a = self.amoebot_map().get(aid)
        if a is None:
            raise KeyError(f"no amoebot {aid}")
        return a

    def amoebot_map(self) -> dict[int, Amoebot]:
        return {a.id: a for a in self.amoebots}

    @property
    def occupancy(self) -> dict[NodeCoord, tuple[int, str]]:
        return self._occupancy

    def occupant(self, node: NodeCoord) -> tuple[int, str] | None:
        return self._occupancy.get(node)

    def is_occupied(self, node: NodeCoord) -> bool:
        return node in self._occupancy or node in self.statics

    @property
    def bonds(self) -> frozenset[Bond]:
        """All bonds: adjacent occupied pairs and occupied-static pairs."""
        if self._bonds is None:
            found = set()
            for node in self._occupancy:
                for nb in neighbors(node):
                    if nb in self._occupancy or nb in self.statics:
                        found.add(make_bond(node, nb))
            self._bonds = frozenset(found)
        return self._bonds

    def incident_bonds(self, aid: int) -> set[Bond]:
        a = self.amoebot(aid)
        out = set()
        for node in a.nodes():
            for nb in neighbors(node):
                if nb in self._occupancy or nb in self.statics:
                    out.add(make_bond(node, nb))
        return out

    def is_connected(self) -> bool:
        """Connectivity of the amoebot structure; statics never count."""
        if not self.amoebots:
            return True
        ids = [a.id for a in self.amoebots]
        adj: dict[int, set[int]] = {i: set() for i in ids}
        for node, (aid, _) in self._occupancy.items():
            for nb in neighbors(node):
                hit = self._occupancy.get(nb)
                if hit is not None and hit[0] != aid:
                    adj[aid].add(hit[0])
                    adj[hit[0]].add(aid)
        seen = {ids[0]}
        stack = [ids[0]]
        while stack:
            for nxt in adj[stack.pop()]:
                if nxt not in seen:
                    seen.add(nxt)
                    stack.append(nxt)
        return len(seen) == len(ids)

    def translated(self, delta) -> "Configuration":
        dq, dr = delta
        return Configuration(
            [
                Amoebot(
                    a.id,
                    (a.head[0] + dq, a.head[1] + dr),
                    None if a.tail is None else (a.tail[0] + dq, a.tail[1] + dr),
                )
                for a in self.amoebots
            ],
            {(q + dq, r + dr) for q, r in self.statics},
        )

    def to_json(self) -> dict:
        bots = []
        for a in self.amoebots:
            rec = {"id": a.id, "head": list(a.head)}
            if a.tail is not None:
                rec["tail"] = list(a.tail)
            bots.append(rec)
        return {
            "amoebots": bots,
            "statics": sorted([list(n) for n in self.statics]),
            "bonds": sorted([[list(x), list(y)] for x, y in self.bonds]),
        }

    @staticmethod
    def from_json(data: dict) -> "Configuration":
        bots = []
        for rec in data["amoebots"]:
            tail = rec.get("tail")
            bots.append(
                Amoebot(
                    int(rec["id"]),
                    tuple(rec["head"]),
                    None if tail is None else tuple(tail),
                )
            )
        statics = {tuple(n) for n in data.get("statics", [])}
        return Configuration(bots, statics)


class MoveKind(Enum):
    HOLD = "hold"
    EXPAND = "expand"
    CONTRACT = "contract"
    HANDOVER = "handover"


@dataclass(frozen=True)
class MoveAction:
    """One amoebot's movement for a round.

    Expand carries the mandatory bond partition: for every retained bond
    incident to the splitting node, the partition names the bond's other
    endpoint and assigns it to the origin node or the new node.  Handover is
    declared symmetrically by both partners, each naming the other and the
    connecting bond.
    """

    kind: MoveKind
    direction: Direction | None = None
    partition: tuple[tuple[NodeCoord, str], ...] | None = None
    into: str | None = None
    partner: int | None = None
    via: Bond | None = None

    @staticmethod
    def hold() -> "MoveAction":
        return MoveAction(MoveKind.HOLD)

    @staticmethod
    def expand(direction: Direction, partition: dict[NodeCoord, str] | None = None) -> "MoveAction":
        items = tuple(sorted((partition or {}).items()))
        for _, side in items:
            if side not in ("origin", "new"):
                raise ValueError(f"bad partition side {side!r}")
        return MoveAction(MoveKind.EXPAND, direction=direction, partition=items)

    @staticmethod
    def contract(into: str) -> "MoveAction":
        if into not in ("head", "tail"):
            raise ValueError(f"bad contraction target {into!r}")
        return MoveAction(MoveKind.CONTRACT, into=into)

    @staticmethod
    def handover(partner: int, via: Bond) -> "MoveAction":
        return MoveAction(MoveKind.HANDOVER, partner=partner, via=make_bond(*via))

    def partition_map(self) -> dict[NodeCoord, str]:
        return dict(self.partition or ())

    def to_json(self) -> dict:
        if self.kind is MoveKind.HOLD:
            return {"kind": "hold"}
        if self.kind is MoveKind.EXPAND:
            part = {"origin": [], "new": []}
            for node, side in self.partition or ():
                part[side].append(list(node))
            return {"kind": "expand", "direction": self.direction.name, "partition": part}
        if self.kind is MoveKind.CONTRACT:
            return {"kind": "contract", "into": self.into}
        return {
            "kind": "handover",
            "partner": self.partner,
            "via": [list(self.via[0]), list(self.via[1])],
        }

    @staticmethod
    def from_json(data: dict) -> "MoveAction":
        kind = data["kind"]
        if kind == "hold":
            return MoveAction.hold()
        if kind == "expand":
            part = {}
            for side in ("origin", "new"):
                for node in data.get("partition", {}).get(side, []):
                    part[tuple(node)] = side
            return MoveAction.expand(Direction[data["direction"]], part)
        if kind == "contract":
            return MoveAction.contract(data["into"])
        if kind == "handover":
            via = data["via"]
            return MoveAction.handover(int(data["partner"]), (tuple(via[0]), tuple(via[1])))
        raise ValueError(f"unknown action kind {kind!r}")


HOLD = MoveAction.hold()


@dataclass(frozen=True)
class RoundScript:
    """Releases and movement actions for one round.

    Amoebots absent from either mapping release nothing and hold.
    """

    releases: dict[int, frozenset[Bond]] = field(default_factory=dict)
    actions: dict[int, MoveAction] = field(default_factory=dict)

    @staticmethod
    def make(releases=None, actions=None) -> "RoundScript":
        rel = {
            int(aid): frozenset(make_bond(*b) for b in bonds)
            for aid, bonds in (releases or {}).items()
            if bonds
        }
        act = {
            int(aid): a
            for aid, a in (actions or {}).items()
            if a.kind is not MoveKind.HOLD
        }
        return RoundScript(rel, act)

    def action_for(self, aid: int) -> MoveAction:
        return self.actions.get(aid, HOLD)

    def is_empty(self) -> bool:
        return not self.releases and not self.actions

    def to_json(self) -> dict:
        return {
            "releases": [
                {"id": aid, "bonds": sorted([[list(x), list(y)] for x, y in bonds])}
                for aid, bonds in sorted(self.releases.items())
            ],
            "actions": [
                {"id": aid, "action": act.to_json()}
                for aid, act in sorted(self.actions.items())
            ],
        }

    @staticmethod
    def from_json(data: dict) -> "RoundScript":
        releases = {
            rec["id"]: [(tuple(b[0]), tuple(b[1])) for b in rec["bonds"]]
            for rec in data.get("releases", [])
        }
        actions = {
            rec["id"]: MoveAction.from_json(rec["action"])
            for rec in data.get("actions", [])
        }
        return RoundScript.make(releases, actions)


EMPTY_SCRIPT = RoundScript()


class ConflictKind(Enum):
    CONNECTIVITY = "ConnectivityConflict"
    STRUCTURAL = "StructuralConflict"
    COLLISION = "Collision"
    INVALID_SCRIPT = "InvalidScript"


@dataclass
class ConflictReport:
    kind: ConflictKind
    message: str
    evidence: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "kind": self.kind.value,
            "message": self.message,
            "evidence": self.evidence,
        }

    def __str__(self):
        return f"{self.kind.value}: {self.message}"


class ConflictError(Exception):
    """Raised by helpers that expect conflict-free execution."""

    def __init__(self, report: ConflictReport):
        super().__init__(str(report))
        self.report = report


def invalid(message: str, **evidence) -> ConflictReport:
    return ConflictReport(ConflictKind.INVALID_SCRIPT, message, dict(evidence))
