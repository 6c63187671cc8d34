"""Rhombical meta-modules and the rate-based round compiler.

A module is a named group of ell^2/2 amoebots filling a rhombus of side
length ell-1 when expanded, or a parallelogram of side lengths ell/2-1 and
ell-1 when contracted.  Scripts are never written bond by bond: a generator
assigns every moving amoebot a Motion (its action plus the lattice-vector
rate of a designated node) and compile_round derives which bonds can stay
rigid under those rates.  Everything that cannot stay is released, so the
generators only reason about rates.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..engine import (
    Amoebot,
    Configuration,
    HOLD,
    MoveAction,
    MoveKind,
    RoundScript,
    make_bond,
)
from ..lattice import (
    Direction,
    NodeCoord,
    Vec,
    add,
    cross,
    neg,
    neighbors,
    scale,
    sub,
)
from .planner import Plan, PlanError

EXPANDED = "expanded-rhombus"
CONTRACTED = "contracted-parallelogram"


@dataclass(frozen=True)
class Motion:
    """One amoebot's action for a round plus its reference rate.

    The rate names the motion of a specific node: the origin node when
    expanding, the kept node when contracting, the whole body otherwise.
    """

    action: MoveAction
    rate: Vec = (0, 0)


def ride(rate: Vec = (0, 0)) -> Motion:
    """Hold shape, translating rigidly at the given rate."""
    return Motion(HOLD, rate)


def expand_to(direction: Direction, rate: Vec = (0, 0)) -> Motion:
    """Expand along direction with the origin node moving at rate."""
    return Motion(MoveAction.expand(direction), rate)


def contract_onto(bot: Amoebot, node: NodeCoord, rate: Vec = (0, 0)) -> Motion:
    """Contract onto one of the amoebot's nodes, that node moving at rate."""
    if node == bot.head:
        into = "head"
    elif node == bot.tail:
        into = "tail"
    else:
        raise PlanError(f"amoebot {bot.id} does not occupy {node}")
    return Motion(MoveAction.contract(into), rate)


def handover_with(partner: int, via, rate: Vec = (0, 0)) -> Motion:
    return Motion(MoveAction.handover(partner, via), rate)


def _node_options(bot: Amoebot, motion: Motion | None):
    """Candidate (rate, side) carriers per node, preferred option first."""
    act = motion.action if motion else HOLD
    rate = motion.rate if motion else (0, 0)
    if act.kind is MoveKind.EXPAND:
        if bot.is_expanded:
            raise PlanError(f"expanded amoebot {bot.id} cannot expand")
        return {bot.head: [(rate, "origin"), (add(rate, act.direction.vec), "new")]}
    if act.kind is MoveKind.CONTRACT:
        if not bot.is_expanded:
            raise PlanError(f"contracted amoebot {bot.id} cannot contract")
        keep = bot.head if act.into == "head" else bot.tail
        gone = bot.tail if act.into == "head" else bot.head
        return {
            keep: [(rate, None)],
            gone: [(add(rate, sub(keep, gone)), None)],
        }
    return {node: [(rate, None)] for node in bot.nodes()}


_STATIC_OPTIONS = [((0, 0), None)]


def _release_owner(ox, oy, motions) -> int:
    ids = [o[0] for o in (ox, oy) if o is not None]
    explicit = [aid for aid in ids if aid in motions]
    return min(explicit or ids)


def compile_round(cfg: Configuration, motions: dict[int, Motion]) -> RoundScript:
    """Derive the full round script from per-amoebot motions.

    Amoebots absent from motions hold at rate zero; statics are rate zero by
    definition.  A bond is retained iff some carrier pair moves it rigidly,
    preferring origin-side carriers at expanding nodes; otherwise it is
    released by the endpoint whose motion was given explicitly (ties to the
    lower id).  Contractions drop the vacated end of any double bond so the
    result never trips the double-bond collision rule, and expansion
    partitions are rebuilt to cover exactly the retained incident bonds.
    """
    bots = cfg.amoebot_map()
    for aid in motions:
        if aid not in bots:
            raise PlanError(f"motion for unknown amoebot {aid}")

    options: dict[NodeCoord, list] = {}
    for bot in cfg.amoebots:
        options.update(_node_options(bot, motions.get(bot.id)))

    for aid, motion in motions.items():
        act = motion.action
        if act.kind is MoveKind.HANDOVER:
            partner = motions.get(act.partner)
            prate = partner.rate if partner else (0, 0)
            if prate != motion.rate:
                raise PlanError(
                    f"handover partners {aid} and {act.partner} disagree on rate"
                )

    releases: dict[int, set] = {}
    retained: dict[tuple, tuple] = {}
    for bond in sorted(cfg.bonds):
        x, y = bond
        ox = cfg.occupancy.get(x)
        oy = cfg.occupancy.get(y)
        if ox is not None and oy is not None and ox[0] == oy[0]:
            continue
        match = None
        for rx, sx in options.get(x, _STATIC_OPTIONS):
            for ry, sy in options.get(y, _STATIC_OPTIONS):
                if rx == ry:
                    match = (sx, sy)
                    break
            if match:
                break
        if match is None:
            releases.setdefault(_release_owner(ox, oy, motions), set()).add(bond)
        else:
            retained[bond] = match

    for aid, motion in motions.items():
        if motion.action.kind is not MoveKind.CONTRACT:
            continue
        bot = bots[aid]
        keep = bot.head if motion.action.into == "head" else bot.tail
        gone = bot.tail if motion.action.into == "head" else bot.head
        for nb in neighbors(gone):
            if nb == keep:
                continue
            dropped = make_bond(gone, nb)
            if dropped in retained and make_bond(keep, nb) in retained:
                del retained[dropped]
                releases.setdefault(aid, set()).add(dropped)

    actions: dict[int, MoveAction] = {}
    for aid, motion in motions.items():
        act = motion.action
        if act.kind is MoveKind.EXPAND:
            head = bots[aid].head
            part = {}
            for nb in neighbors(head):
                tags = retained.get(make_bond(head, nb))
                if tags is None:
                    continue
                part[nb] = tags[0] if make_bond(head, nb)[0] == head else tags[1]
            actions[aid] = MoveAction.expand(act.direction, part)
        elif act.kind is not MoveKind.HOLD:
            actions[aid] = act
    return RoundScript.make(releases, actions)


def predicted_nodes(bot: Amoebot, motion: Motion) -> tuple[NodeCoord, ...]:
    """Where the amoebot's nodes end up under its motion, before the engine
    re-anchors the frame."""
    act = motion.action
    r = motion.rate
    if act.kind is MoveKind.EXPAND:
        origin = add(bot.head, r)
        return (origin, add(origin, act.direction.vec))
    if act.kind is MoveKind.CONTRACT:
        keep = bot.head if act.into == "head" else bot.tail
        return (add(keep, r),)
    if act.kind is MoveKind.HANDOVER:
        if bot.is_expanded:
            keep = bot.tail if bot.head in act.via else bot.head
            return (add(keep, r),)
        other = act.via[0] if act.via[1] == bot.head else act.via[1]
        return (add(bot.head, r), add(other, r))
    return tuple(add(n, r) for n in bot.nodes())


class Stepper:
    """Executes compiled rounds while tracking the engine's frame shifts.

    Without a retained static bond the engine translates each round's result
    so the lowest-id head never displaces.  Generators do their geometry in
    the coordinates of the configuration they started from; the stepper folds
    the accumulated translation into every node lookup, so multi-round
    choreography never notices the re-anchoring.
    """

    def __init__(self, cfg: Configuration):
        self.configs: list[Configuration] = [cfg]
        self.scripts: list[RoundScript] = []
        self.offsets: list[Vec] = [(0, 0)]
        self.offset: Vec = (0, 0)

    @property
    def cfg(self) -> Configuration:
        return self.configs[-1]

    def at(self, node: NodeCoord) -> NodeCoord:
        """Actual coordinates of a node named in the starting frame."""
        return add(node, self.offset)

    def bot(self, node: NodeCoord) -> Amoebot:
        return member_at(self.cfg, self.at(node))

    def run(self, motions: dict[int, Motion]) -> Configuration:
        from ..engine import step_or_raise

        before = self.cfg
        script = compile_round(before, motions)
        after = step_or_raise(before, script)
        self.scripts.append(script)
        self.configs.append(after)

        probe = next((b.id for b in before.amoebots if b.id not in motions), None)
        if probe is not None:
            predicted = before.amoebot(probe).nodes()
        else:
            probe = min(motions)
            predicted = predicted_nodes(before.amoebot(probe), motions[probe])
        if predicted:
            drift = sub(sorted(after.amoebot(probe).nodes())[0], sorted(predicted)[0])
            self.offset = add(self.offset, drift)
        self.offsets.append(self.offset)
        return after

    def plan(self, modules=None, prep_rounds: int = 0) -> Plan:
        return Plan(
            tuple(self.scripts),
            tuple(self.configs),
            dict(modules or {}),
            prep_rounds,
            tuple(self.offsets),
        )


def _basis_coords(v: Vec, a: Vec, b: Vec) -> tuple[int, int]:
    det = cross(a, b)
    return (cross(v, b) * det, cross(a, v) * det)  # det is +-1, so this inverts


@dataclass(frozen=True)
class RhombusModule:
    """Descriptor of one rhombical meta-module inside a configuration.

    axes spans the footprint; orientation is the member expansion axis and
    must be one of the axes.  members lists amoebot ids; which member sits
    where is read from the live configuration, never stored, because moves
    scramble both positions and head/tail polarity.
    """

    name: str
    ell: int
    anchor: NodeCoord
    axes: tuple[Direction, Direction]
    orientation: Direction
    members: tuple[int, ...]
    state: str = EXPANDED

    def __post_init__(self):
        if self.ell < 2 or self.ell % 2:
            raise PlanError(f"ell must be even and at least 2, got {self.ell}")
        if self.orientation not in self.axes:
            raise PlanError("orientation must be one of the module axes")
        if cross(self.axes[0].vec, self.axes[1].vec) == 0:
            raise PlanError("module axes must not be parallel")
        if len(self.members) != self.ell * self.ell // 2:
            raise PlanError(
                f"module needs {self.ell * self.ell // 2} members, got {len(self.members)}"
            )
        if self.state not in (EXPANDED, CONTRACTED):
            raise PlanError(f"unknown module state {self.state!r}")

    @property
    def cross_axis(self) -> Direction:
        return self.axes[1] if self.orientation is self.axes[0] else self.axes[0]

    def footprint(self) -> frozenset:
        o = self.orientation.vec
        c = self.cross_axis.vec
        width = self.ell if self.state == EXPANDED else self.ell // 2
        return frozenset(
            add(self.anchor, add(scale(o, x), scale(c, y)))
            for x in range(width)
            for y in range(self.ell)
        )

    def row_nodes(self, j: int) -> list[NodeCoord]:
        """Nodes of row j (along the orientation axis), west to east."""
        o = self.orientation.vec
        c = self.cross_axis.vec
        width = self.ell if self.state == EXPANDED else self.ell // 2
        base = add(self.anchor, scale(c, j))
        return [add(base, scale(o, x)) for x in range(width)]

    def with_placement(self, anchor=None, axes=None, orientation=None, state=None):
        return RhombusModule(
            self.name,
            self.ell,
            self.anchor if anchor is None else anchor,
            self.axes if axes is None else axes,
            self.orientation if orientation is None else orientation,
            self.members,
            self.state if state is None else state,
        )

    def to_json(self) -> dict:
        return {
            "kind": "rhombus",
            "name": self.name,
            "ell": self.ell,
            "anchor": list(self.anchor),
            "axes": [d.name for d in self.axes],
            "orientation": self.orientation.name,
            "members": list(self.members),
            "state": self.state,
        }

    @staticmethod
    def from_json(data: dict) -> "RhombusModule":
        return RhombusModule(
            data["name"],
            int(data["ell"]),
            tuple(data["anchor"]),
            (Direction[data["axes"][0]], Direction[data["axes"][1]]),
            Direction[data["orientation"]],
            tuple(int(m) for m in data["members"]),
            data["state"],
        )


class ModuleMap(dict):
    """Named module descriptors, serializable into trace annotations."""

    _decoders = {"rhombus": RhombusModule.from_json}

    def to_json(self) -> dict:
        return {name: mod.to_json() for name, mod in sorted(self.items())}

    @classmethod
    def register_kind(cls, kind: str, decoder):
        cls._decoders[kind] = decoder

    @classmethod
    def from_json(cls, data: dict) -> "ModuleMap":
        out = cls()
        for name, rec in data.items():
            decoder = cls._decoders.get(rec.get("kind"))
            if decoder is None:
                raise ValueError(f"unknown module kind {rec.get('kind')!r}")
            out[name] = decoder(rec)
        return out


def build_rhombus(
    ell: int,
    anchor: NodeCoord,
    axes: tuple[Direction, Direction],
    orientation: Direction,
    first_id: int = 0,
    name: str = "R",
) -> tuple[Configuration, ModuleMap]:
    """Canonical expanded rhombus: member (i, j) lies on row j with its tail
    at anchor + 2i*o + j*c and head one step along the orientation axis."""
    module = RhombusModule(
        name, ell, anchor, axes, orientation, tuple(range(first_id, first_id + ell * ell // 2))
    )
    bots = module_amoebots(module, first_id)
    return Configuration(bots), ModuleMap({name: module})


def module_amoebots(module: RhombusModule, first_id: int | None = None) -> list[Amoebot]:
    """Members in canonical layout for the module's current placement."""
    o = module.orientation.vec
    c = module.cross_axis.vec
    half = module.ell // 2
    ids = sorted(module.members)
    bots = []
    for j in range(module.ell):
        for i in range(half):
            aid = ids[j * half + i]
            if module.state == EXPANDED:
                tail = add(module.anchor, add(scale(o, 2 * i), scale(c, j)))
                bots.append(Amoebot(aid, head=add(tail, o), tail=tail))
            else:
                bots.append(Amoebot(aid, head=add(module.anchor, add(scale(o, i), scale(c, j)))))
    return bots


def _axis_candidates():
    dirs = list(Direction)
    return [
        (o, c)
        for o in dirs
        for c in dirs
        if cross(o.vec, c.vec) != 0
    ]


def locate_module(
    cfg: Configuration,
    members,
    name: str,
    axes: tuple[Direction, Direction] | None = None,
    orientation: Direction | None = None,
) -> RhombusModule:
    """Rebuild a module descriptor from where its members actually sit.

    Tries the given axes/orientation first, then all axis pairs in Direction
    order.  Contracted ell=2 modules are a single node pair, where the short
    axis is ambiguous; pass the intended axes for those.
    """
    ids = tuple(sorted(members))
    bots = [cfg.amoebot(aid) for aid in ids]
    expanded = [b.is_expanded for b in bots]
    if all(expanded):
        state = EXPANDED
    elif not any(expanded):
        state = CONTRACTED
    else:
        raise PlanError(f"module {name!r} members are in mixed states")
    count = len(bots)
    ell = 2
    while ell * ell // 2 < count:
        ell += 2
    if ell * ell // 2 != count:
        raise PlanError(f"{count} members do not form any ell^2/2 module")

    candidates = []
    if orientation is not None and axes is not None:
        other = axes[1] if orientation is axes[0] else axes[0]
        candidates.append((orientation, other))
    elif axes is not None:
        candidates.extend([(axes[0], axes[1]), (axes[1], axes[0])])
    if state == EXPANDED:
        body = sub(bots[0].head, bots[0].tail)
        for o, c in _axis_candidates():
            if o.vec in (body, neg(body)) and (o, c) not in candidates:
                candidates.append((o, c))
    else:
        candidates.extend(p for p in _axis_candidates() if p not in candidates)

    nodes = set()
    for b in bots:
        nodes.update(b.nodes())
    for o, c in candidates:
        placement = _match_layout(nodes, bots, ell, state, o, c)
        if placement is not None:
            return RhombusModule(name, ell, placement, (o, c), o, ids, state)
    raise PlanError(f"members of {name!r} do not fill a module footprint")


def _match_layout(nodes, bots, ell, state, o: Direction, c: Direction):
    """Anchor node if the member bodies form the canonical grid, else None."""
    width = ell if state == EXPANDED else ell // 2
    base = next(iter(nodes))
    coords = {}
    for node in nodes:
        x, y = _basis_coords(sub(node, base), o.vec, c.vec)
        coords[node] = (x, y)
    xs = [x for x, _ in coords.values()]
    ys = [y for _, y in coords.values()]
    x0, y0 = min(xs), min(ys)
    if {(x - x0, y - y0) for x, y in coords.values()} != {
        (x, y) for x in range(width) for y in range(ell)
    }:
        return None
    if state == EXPANDED:
        for b in bots:
            hx, hy = coords[b.head]
            tx, ty = coords[b.tail]
            if hy != ty or abs(hx - tx) != 1 or (min(hx, tx) - x0) % 2:
                return None
    return add(base, add(scale(o.vec, x0), scale(c.vec, y0)))


def member_at(cfg: Configuration, node: NodeCoord) -> Amoebot:
    occ = cfg.occupant(node)
    if occ is None:
        raise PlanError(f"no amoebot occupies {node}")
    return cfg.amoebot(occ[0])


def contract_motions(cfg: Configuration, module: RhombusModule, base_rate: Vec = (0, 0)):
    """Motions packing each row westward: the member on columns (2i, 2i+1)
    contracts onto its rear node at rate base_rate - i*o, so column x lands
    on column floor(x/2) and the west column never moves relative to base."""
    if module.state != EXPANDED:
        raise PlanError(f"module {module.name!r} is not expanded")
    o = module.orientation.vec
    motions = {}
    for j in range(module.ell):
        row = module.row_nodes(j)
        for i in range(module.ell // 2):
            rear = row[2 * i]
            bot = member_at(cfg, rear)
            motions[bot.id] = contract_onto(bot, rear, add(base_rate, scale(o, -i)))
    return motions


def expand_motions(cfg: Configuration, module: RhombusModule, base_rate: Vec = (0, 0)):
    """Inverse of contract_motions: column i expands east at origin rate
    base_rate + i*o, interleaving back into the full rhombus."""
    if module.state != CONTRACTED:
        raise PlanError(f"module {module.name!r} is not contracted")
    o = module.orientation.vec
    motions = {}
    direction = module.orientation
    for j in range(module.ell):
        for i, node in enumerate(module.row_nodes(j)):
            bot = member_at(cfg, node)
            motions[bot.id] = expand_to(direction, add(base_rate, scale(o, i)))
    return motions


def relocated(stepper: Stepper, module: RhombusModule, axes=None, orientation=None):
    """The module's descriptor in the stepper's current configuration."""
    return locate_module(
        stepper.cfg,
        module.members,
        module.name,
        axes=module.axes if axes is None else axes,
        orientation=module.orientation if orientation is None else orientation,
    )


def contract_module(cfg: Configuration, module: RhombusModule) -> Plan:
    """Contract an expanded module into its parallelogram in one round."""
    stepper = Stepper(cfg)
    stepper.run(contract_motions(cfg, module))
    return stepper.plan({module.name: relocated(stepper, module)})


def expand_module(cfg: Configuration, module: RhombusModule) -> Plan:
    """Expand a contracted module back into its rhombus in one round."""
    stepper = Stepper(cfg)
    stepper.run(expand_motions(cfg, module))
    return stepper.plan({module.name: relocated(stepper, module)})


def reorient_module(cfg: Configuration, module: RhombusModule) -> Plan:
    """Flip every member onto the other axis in three rounds.

    Members pair up in 2x2 blocks: the block's first member contracts onto
    the shared corner, hands its freed node over to the second member, and
    the second member expands into the node vacated in round one.  No node
    ever moves (all rates are zero), so the footprint only ever loses the
    transiently vacated nodes and is restored exactly at the end.
    """
    if module.state != EXPANDED:
        raise PlanError(f"module {module.name!r} is not expanded")
    o = module.orientation.vec
    c = module.cross_axis.vec
    blocks = []
    for bj in range(module.ell // 2):
        lower = module.row_nodes(2 * bj)
        upper = module.row_nodes(2 * bj + 1)
        for bi in range(module.ell // 2):
            blocks.append((lower[2 * bi], upper[2 * bi]))

    stepper = Stepper(cfg)
    motions = {}
    for n00, _ in blocks:
        bot = stepper.bot(n00)
        motions[bot.id] = contract_onto(bot, stepper.at(n00))
    stepper.run(motions)

    motions = {}
    for n00, n01 in blocks:
        low = stepper.bot(n00)
        up = stepper.bot(n01)
        via = make_bond(stepper.at(n00), stepper.at(n01))
        motions[low.id] = handover_with(up.id, via)
        motions[up.id] = handover_with(low.id, via)
    stepper.run(motions)

    back = Direction(neg(c))
    motions = {}
    for n00, n01 in blocks:
        bot = stepper.bot(add(n01, o))
        motions[bot.id] = expand_to(back)
    stepper.run(motions)

    final = relocated(stepper, module, orientation=module.cross_axis)
    return stepper.plan({module.name: final})


def realignment_targets(module: RhombusModule) -> list[Direction]:
    """Cross axes reachable by one realignment: c - o and c + o, whichever
    are unit directions (exactly one is, for any non-parallel axis pair)."""
    o = module.orientation.vec
    c = module.cross_axis.vec
    out = []
    for v in (sub(c, o), add(c, o)):
        try:
            out.append(Direction(v))
        except ValueError:
            pass
    return out


def realign_module(cfg: Configuration, module: RhombusModule, new_axis: Direction) -> Plan:
    """Re-lean the rhombus onto (orientation, new_axis) in two rounds.

    Round one is the plain contraction.  Round two re-expands with a per-row
    stagger along the orientation axis; rows shift progressively so the far
    cross edge tilts from c to c-o or c+o while every row stays chained to
    its neighbors through rate-matched bonds.
    """
    if module.state != EXPANDED:
        raise PlanError(f"module {module.name!r} is not expanded")
    if new_axis not in realignment_targets(module):
        raise PlanError(
            f"axis {new_axis.name} is not reachable by one realignment of {module.name!r}"
        )
    o = module.orientation.vec
    lean = -1 if new_axis.vec == sub(module.cross_axis.vec, o) else 1

    stepper = Stepper(cfg)
    stepper.run(contract_motions(cfg, module))
    mid = relocated(stepper, module)

    motions = {}
    for j in range(module.ell):
        # Row 0 re-expands in place; row j slides j steps along the
        # orientation axis, tilting the cross edge onto the new axis while
        # adjacent rows stay bonded (their origin/new rates interleave).
        for i, node in enumerate(mid.row_nodes(j)):
            bot = member_at(stepper.cfg, node)
            motions[bot.id] = expand_to(module.orientation, scale(o, lean * j + i))
    stepper.run(motions)

    final = relocated(stepper, module, axes=(module.orientation, new_axis))
    return stepper.plan({module.name: final})
