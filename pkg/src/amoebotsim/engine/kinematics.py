"""Release bookkeeping and the rigid-bond rate solve for one round.

Every piece of moving matter is tracked as a *part*: a point that translates
linearly over the round, position(t) = start + t * rate with an integer
lattice vector rate.  A contracted amoebot is one part; an expanded amoebot
is two; an expanding amoebot splits into an origin part and a new part that
both start on the splitting node.  Retained bonds keep their orientation and
length, which pins the rates of their endpoint parts to each other; internal
bonds of expanding and contracting amoebots contribute the single unit of
deformation.  Handovers add no motion at all: the three nodes involved stay
rigid and only ownership flips at the end of the round.

Solving the round therefore reduces to propagating rates over a spanning
tree of the part graph and checking that every non-tree edge agrees, which
is exactly the "can the structure keep its relative positions" question.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..lattice import AffineVec, NodeCoord, Vec, add, sub
from .model import (
    Amoebot,
    Bond,
    Configuration,
    ConflictKind,
    ConflictReport,
    MoveAction,
    MoveKind,
    RoundScript,
    invalid,
    make_bond,
)

# A part is ("a", amoebot id, index) with index 0 for the head part and 1 for
# the tail/new part, or ("s", node) for a static node.
PartId = tuple


def amoebot_parts(bot: Amoebot, action: MoveAction) -> dict[PartId, NodeCoord]:
    """Part ids and their start nodes for one amoebot under its action."""
    pid = bot.id
    if bot.tail is None:
        if action.kind is MoveKind.EXPAND:
            return {("a", pid, 0): bot.head, ("a", pid, 1): bot.head}
        return {("a", pid, 0): bot.head}
    return {("a", pid, 0): bot.head, ("a", pid, 1): bot.tail}


def validate_script(cfg: Configuration, script: RoundScript) -> ConflictReport | None:
    """Structural validation that needs no geometry: ids, kinds, handovers."""
    bots = cfg.amoebot_map()
    for aid in list(script.releases) + list(script.actions):
        if aid not in bots:
            return invalid(f"script references unknown amoebot {aid}", amoebot=aid)

    bonds = cfg.bonds
    for aid, released in script.releases.items():
        incident = cfg.incident_bonds(aid)
        bot = bots[aid]
        internal = make_bond(bot.head, bot.tail) if bot.is_expanded else None
        for b in released:
            if b not in bonds:
                return invalid(f"amoebot {aid} releases nonexistent bond {b}", amoebot=aid, bond=list(map(list, b)))
            if b not in incident:
                return invalid(f"amoebot {aid} releases non-incident bond {b}", amoebot=aid, bond=list(map(list, b)))
            if b == internal:
                return invalid(f"amoebot {aid} releases its internal bond", amoebot=aid)

    for aid, act in script.actions.items():
        bot = bots[aid]
        if act.kind is MoveKind.EXPAND:
            if bot.is_expanded:
                return invalid(f"expanded amoebot {aid} cannot expand", amoebot=aid)
            if act.direction is None:
                return invalid(f"expansion of {aid} lacks a direction", amoebot=aid)
            for node in act.partition_map():
                if make_bond(bot.head, node) not in bonds:
                    return invalid(
                        f"expansion of {aid} partitions a bond to {node} that does not exist",
                        amoebot=aid,
                        node=list(node),
                    )
        elif act.kind is MoveKind.CONTRACT:
            if not bot.is_expanded:
                return invalid(f"contracted amoebot {aid} cannot contract", amoebot=aid)
            if act.into not in ("head", "tail"):
                return invalid(f"contraction of {aid} lacks a target end", amoebot=aid)
        elif act.kind is MoveKind.HANDOVER:
            report = _validate_handover(cfg, script, aid)
            if report is not None:
                return report
    return None


def _validate_handover(cfg: Configuration, script: RoundScript, aid: int) -> ConflictReport | None:
    bots = cfg.amoebot_map()
    act = script.actions[aid]
    if act.partner is None or act.via is None:
        return invalid(f"handover of {aid} lacks partner or via bond", amoebot=aid)
    if act.partner == aid or act.partner not in bots:
        return invalid(f"handover of {aid} names invalid partner {act.partner}", amoebot=aid)
    partner_act = script.action_for(act.partner)
    if (
        partner_act.kind is not MoveKind.HANDOVER
        or partner_act.partner != aid
        or partner_act.via != act.via
    ):
        return invalid(
            f"handover of {aid} is not reciprocated by {act.partner}",
            amoebot=aid,
            partner=act.partner,
        )
    me, other = bots[aid], bots[act.partner]
    contracted, expanded = (me, other) if not me.is_expanded else (other, me)
    if contracted.is_expanded or not expanded.is_expanded:
        return invalid(
            f"handover {aid}<->{act.partner} needs one contracted and one expanded amoebot",
            amoebot=aid,
        )
    u = contracted.head
    expected = {make_bond(u, expanded.head), make_bond(u, expanded.tail)}
    if act.via not in expected:
        return invalid(
            f"handover via bond {act.via} does not connect {contracted.id} to {expanded.id}",
            amoebot=aid,
        )
    if act.via not in cfg.bonds:
        return invalid(f"handover via bond {act.via} does not exist", amoebot=aid)
    for released in script.releases.values():
        if act.via in released:
            return invalid(
                f"handover via bond {act.via} is released in the same round",
                amoebot=aid,
            )
    return None


def apply_releases(cfg: Configuration, script: RoundScript) -> frozenset[Bond] | ConflictReport:
    """Remove released bonds and check amoebot connectivity of the remainder.

    A bond disappears when either endpoint releases it.  Static nodes never
    release anything and never count toward connectivity.
    """
    released: set[Bond] = set()
    for bonds in script.releases.values():
        released.update(bonds)
    retained = frozenset(cfg.bonds - released)

    bots = cfg.amoebots
    if len(bots) > 1:
        owner = {}
        for node, (aid, _) in cfg.occupancy.items():
            owner[node] = aid
        adj: dict[int, set[int]] = {a.id: set() for a in bots}
        for x, y in retained:
            ax, ay = owner.get(x), owner.get(y)
            if ax is not None and ay is not None and ax != ay:
                adj[ax].add(ay)
                adj[ay].add(ax)
        start = bots[0].id
        seen = {start}
        stack = [start]
        while stack:
            for nxt in adj[stack.pop()]:
                if nxt not in seen:
                    seen.add(nxt)
                    stack.append(nxt)
        if len(seen) != len(bots):
            rest = sorted(a.id for a in bots if a.id not in seen)
            return ConflictReport(
                ConflictKind.CONNECTIVITY,
                "bond releases disconnect the structure",
                {"component": sorted(seen), "separated": rest},
            )
    return retained


@dataclass
class Kinematics:
    """Solved part motions for one round."""

    part_start: dict[PartId, NodeCoord]
    part_rate: dict[PartId, Vec]
    retained: frozenset[Bond]

    @property
    def statics_pinned(self) -> bool:
        """True when a retained bond ties the structure to a static node."""
        return any(p[0] == "s" for p in self.part_start)

    def motion(self, part: PartId) -> AffineVec:
        """Position of the part over the round, evaluated with at(t)."""
        return AffineVec(self.part_start[part], self.part_rate[part])

    def end(self, part: PartId) -> NodeCoord:
        return add(self.part_start[part], self.part_rate[part])


def resolve_bond_end(
    cfg: Configuration,
    script: RoundScript,
    node: NodeCoord,
    other: NodeCoord,
) -> PartId | ConflictReport:
    """Which part carries the bond endpoint at `node` (other end at `other`)."""
    if node in cfg.statics:
        return ("s", node)
    aid, which = cfg.occupancy[node]
    act = script.action_for(aid)
    if act.kind is MoveKind.EXPAND:
        side = act.partition_map().get(other)
        if side is None:
            return invalid(
                f"expansion of {aid} does not assign the retained bond toward {other}",
                amoebot=aid,
                bond=[list(node), list(other)],
            )
        return ("a", aid, 0 if side == "origin" else 1)
    return ("a", aid, 0 if which == "head" else 1)


def external_bonds(cfg: Configuration, retained) -> list[Bond]:
    """Retained bonds minus the expanded amoebots' internal bonds.

    Internal bonds carry the deformation itself (they shrink or grow), so
    they are constrained by the owner's action, never as rigid bars.
    """
    out = []
    for x, y in sorted(retained):
        ox = cfg.occupancy.get(x)
        oy = cfg.occupancy.get(y)
        if ox is not None and oy is not None and ox[0] == oy[0]:
            continue
        out.append((x, y))
    return out


def _constraint_edges(cfg, script, retained):
    """Edges (a, b, offset, descr) meaning rate(b) - rate(a) = offset."""
    edges = []
    for x, y in external_bonds(cfg, retained):
        px = resolve_bond_end(cfg, script, x, y)
        if isinstance(px, ConflictReport):
            return px
        py = resolve_bond_end(cfg, script, y, x)
        if isinstance(py, ConflictReport):
            return py
        edges.append((px, py, (0, 0), ("bond", (x, y))))

    for bot in cfg.amoebots:
        act = script.action_for(bot.id)
        p0, p1 = ("a", bot.id, 0), ("a", bot.id, 1)
        if act.kind is MoveKind.EXPAND:
            edges.append((p0, p1, act.direction.vec, ("expansion", bot.id)))
        elif act.kind is MoveKind.CONTRACT:
            # The vacated part must land on the kept part's end node.
            if act.into == "head":
                edges.append((p0, p1, sub(bot.head, bot.tail), ("contraction", bot.id)))
            else:
                edges.append((p1, p0, sub(bot.tail, bot.head), ("contraction", bot.id)))
        elif bot.is_expanded:
            edges.append((p0, p1, (0, 0), ("internal", bot.id)))
    return edges


def solve_kinematics(
    cfg: Configuration,
    script: RoundScript,
    retained: frozenset[Bond],
) -> Kinematics | ConflictReport:
    """Propagate rates over the part graph; fail on any inconsistent cycle.

    Attached statics must come out with zero rate and pin the frame.  With
    no retained static bond the rates live in a working frame rooted at the
    lowest-id amoebot; finalize_round translates the result so that
    amoebot's head does not displace.  Relative motion, and therefore
    collision detection, is frame independent.
    """
    part_start: dict[PartId, NodeCoord] = {}
    for bot in cfg.amoebots:
        part_start.update(amoebot_parts(bot, script.action_for(bot.id)))
    for x, y in retained:
        for node in (x, y):
            if node in cfg.statics:
                part_start[("s", node)] = node

    edges = _constraint_edges(cfg, script, retained)
    if isinstance(edges, ConflictReport):
        return edges

    adj: dict[PartId, list[tuple[PartId, Vec, tuple]]] = {p: [] for p in part_start}
    for a, b, off, descr in edges:
        adj[a].append((b, off, descr))
        adj[b].append((a, (-off[0], -off[1]), descr))

    rate: dict[PartId, Vec] = {}
    static_parts = sorted(p for p in part_start if p[0] == "s")
    if static_parts:
        roots = [(static_parts[0], (0, 0))]
    elif cfg.amoebots:
        roots = [(("a", cfg.amoebots[0].id, 0), (0, 0))]
    else:
        roots = []

    for root, root_rate in roots:
        rate[root] = root_rate
        stack = [root]
        while stack:
            cur = stack.pop()
            for nxt, off, descr in adj[cur]:
                want = add(rate[cur], off)
                have = rate.get(nxt)
                if have is None:
                    rate[nxt] = want
                    stack.append(nxt)
                elif have != want:
                    return ConflictReport(
                        ConflictKind.STRUCTURAL,
                        "rigid constraints cannot all hold",
                        {
                            "constraint": descr[0],
                            "at": _descr_json(descr),
                            "expected_rate": list(want),
                            "actual_rate": list(have),
                        },
                    )

    if len(rate) != len(part_start):
        # G_R connectivity was checked, so only an unattached-static or
        # empty-structure corner can reach this; treat it as structural.
        missing = [p for p in part_start if p not in rate]
        for p in missing:
            rate[p] = (0, 0)

    for p in static_parts:
        if rate[p] != (0, 0):
            return ConflictReport(
                ConflictKind.STRUCTURAL,
                f"static node {part_start[p]} would have to move",
                {"static": list(part_start[p]), "rate": list(rate[p])},
            )

    return Kinematics(part_start, rate, retained)


def _descr_json(descr):
    if descr[0] == "bond":
        (x, y) = descr[1]
        return [list(x), list(y)]
    return descr[1]
