"""Cell-to-cell transport of meta-modules: slide, tunnel and jump moves.

The in-place primitives reshape a module inside its own cell; the moves in
this file displace whole modules across the coarse grid of ell-pitch cells.
Matter is exchanged between neighbouring cells by contraction and expansion
waves, so module identity is positional: a cell keeps its module name even
when the amoebots inside it changed hands mid-move.

The wave arithmetic follows two packing patterns.  An expanded cell packs
into a half-cell slab some cells ahead: the member whose leading node sits
at coordinate t lands on slot (t - 1) / 2 of the slab, which chains every
vacated node onto the follower behind it.  A doubled cell spreads back out:
the member parked at coordinate t re-expands over nodes (2t, 2t + 1), which
refills its own cell plus the next one and can tow neighbour cells riding a
full pitch.  Both patterns step rates by one unit per member, so the rigid
bond solve realises them with the cell boundaries rate-matched.
"""

from __future__ import annotations

from ..engine import Configuration
from ..lattice import Direction, NodeCoord, Vec, add, neg, scale, sub
from .planner import Plan, PlanError, chain
from .rhombus import (
    EXPANDED,
    ModuleMap,
    Motion,
    RhombusModule,
    Stepper,
    _basis_coords,
    contract_onto,
    expand_to,
    locate_module,
    member_at,
    reorient_module,
    ride,
)

_DIR_BY_VEC = {d.vec: d for d in Direction}


class _Grid:
    """Cell bookkeeping for one move: ell-pitch tiles spanned by an axis pair."""

    def __init__(self, ell: int, axes: tuple[Direction, Direction]):
        self.ell = ell
        self.axes = axes
        self.a = axes[0].vec
        self.b = axes[1].vec

    def nodes(self, anchor: NodeCoord) -> list[NodeCoord]:
        return [
            add(anchor, add(scale(self.a, x), scale(self.b, y)))
            for y in range(self.ell)
            for x in range(self.ell)
        ]

    def step_vec(self, delta: Vec) -> Vec | None:
        """Unit cell direction for an anchor-to-anchor delta, if one pitch."""
        for unit in (self.a, neg(self.a), self.b, neg(self.b)):
            if scale(unit, self.ell) == delta:
                return unit
        return None

    def along(self, node: NodeCoord, base: NodeCoord, d: Vec) -> int:
        """Coordinate of a cell node, 0..ell-1 increasing along d."""
        x, y = _basis_coords(sub(node, base), self.a, self.b)
        if d == self.a:
            return x
        if d == neg(self.a):
            return self.ell - 1 - x
        if d == self.b:
            return y
        if d == neg(self.b):
            return self.ell - 1 - y
        raise PlanError(f"{d} is not a cell axis")


def _cell_ids(grid: _Grid, stepper: Stepper, anchor: NodeCoord) -> list[int]:
    """Ids of the amoebots occupying a cell, each listed once."""
    cfg = stepper.cfg
    ids: list[int] = []
    seen: set[int] = set()
    for node in grid.nodes(stepper.at(anchor)):
        occ = cfg.occupant(node)
        if occ is not None and occ[0] not in seen:
            seen.add(occ[0])
            ids.append(occ[0])
    return ids


def _require_free(cfg: Configuration, nodes) -> None:
    for node in nodes:
        if cfg.occupant(node) is not None or node in cfg.statics:
            raise PlanError("target cell is occupied")


def _ride_cell(grid, stepper, anchor, rate, motions) -> None:
    for aid in _cell_ids(grid, stepper, anchor):
        motions[aid] = ride(rate)


def _pack_cell(grid, stepper, anchor, d, shift, half, motions) -> None:
    """Contract a cell's expanded members along d into a half-cell slab.

    The slab is the trailing ("near") or leading ("far") half of the cell
    `shift` cells further along d.  Member bodies must lie along d; the one
    leading at coordinate t = 2u + 1 keeps its leading node, which lands on
    slab slot u while the vacated trailing node chases the member ahead.
    """
    base = stepper.at(anchor)
    offset = grid.ell // 2 if half == "far" else 0
    for aid in _cell_ids(grid, stepper, anchor):
        bot = stepper.cfg.amoebot(aid)
        if not bot.is_expanded:
            raise PlanError(f"amoebot {aid} is contracted and cannot pack")
        body = sub(bot.head, bot.tail)
        if body == d:
            lead = bot.head
        elif body == neg(d):
            lead = bot.tail
        else:
            raise PlanError(
                "packing cell members must be oriented along the move direction"
            )
        t = grid.along(lead, base, d)
        land = shift * grid.ell + offset + (t - 1) // 2
        motions[aid] = contract_onto(bot, lead, scale(d, land - t))


def _spread_cell(grid, stepper, anchor, d, motions) -> None:
    """Expand every parked member of a doubled cell along d.

    The member at coordinate t lands on nodes (2t, 2t + 1) of its lane, so
    the doubled cell unpacks over itself and the next cell along d.
    """
    direction = _DIR_BY_VEC[d]
    base = stepper.at(anchor)
    for node in grid.nodes(base):
        bot = member_at(stepper.cfg, node)
        if bot.is_expanded:
            raise PlanError("only a fully parked cell can spread")
        t = grid.along(node, base, d)
        motions[bot.id] = expand_to(direction, scale(d, t))


def _half_shift_cell(grid, stepper, anchor, d, motions) -> None:
    """Unpack a doubled cell by half a pitch: the trailing half re-expands
    in place while the leading half rides ell/2 into the next cell."""
    direction = _DIR_BY_VEC[d]
    base = stepper.at(anchor)
    half = grid.ell // 2
    for node in grid.nodes(base):
        bot = member_at(stepper.cfg, node)
        if bot.is_expanded:
            raise PlanError("only a fully parked cell can shift")
        t = grid.along(node, base, d)
        if t < half:
            motions[bot.id] = expand_to(direction, scale(d, t))
        else:
            motions[bot.id] = ride(scale(d, half))


def _shifted_module(module: RhombusModule, off: Vec) -> RhombusModule:
    return module.with_placement(
        add(module.anchor, off), module.axes, module.orientation, module.state
    )


def _carry_over(modules, moved: set, off: Vec) -> dict:
    """Descriptors of the uninvolved modules, rebased into the final frame."""
    return {
        name: _shifted_module(m, off)
        for name, m in modules.items()
        if name not in moved
    }


def _oriented_along(module: RhombusModule, d: Vec) -> bool:
    return module.orientation.vec in (d, neg(d))


# --------------------------------------------------------------------------
# slide


def slide_module(
    cfg: Configuration,
    modules: ModuleMap,
    mover: str,
    over: tuple[str, str],
    direction: Direction,
) -> Plan:
    """Slide a module one cell along the top of a two-cell substrate.

    The substrate surface row packs toward the far end, towing the mover a
    full pitch through the bond at its trailing corner, and re-expands
    underneath it in the second round; the mover itself only rides.  Both
    substrate cells are restored.  Substrate modules whose members lie
    across the movement axis are reoriented first and those rounds are
    reported as preparation; the mover's orientation does not matter.
    """
    for name in (mover, over[0], over[1]):
        if name not in modules:
            raise PlanError(f"unknown module {name!r}")
    work = {name: modules[name] for name in (mover, over[0], over[1])}
    r1, r2, r3 = work[mover], work[over[0]], work[over[1]]
    ell = r1.ell
    if r2.ell != ell or r3.ell != ell:
        raise PlanError("slide needs equal-size modules")
    for m in (r1, r2, r3):
        if m.state != EXPANDED:
            raise PlanError(f"module {m.name!r} is not expanded")
    d = direction.vec
    axis_vecs = {r2.axes[0].vec, neg(r2.axes[0].vec), r2.axes[1].vec, neg(r2.axes[1].vec)}
    if d not in axis_vecs:
        raise PlanError("slide direction must lie on a substrate axis")

    foot1, foot2, foot3 = r1.footprint(), r2.footprint(), r3.footprint()
    pitch = scale(d, ell)
    if {add(v, pitch) for v in foot3} == foot2:
        over = (over[1], over[0])
        r2, r3 = r3, r2
        foot2, foot3 = foot3, foot2
    if {add(v, pitch) for v in foot2} != foot3:
        raise PlanError("substrate cells must be adjacent along the slide direction")
    c = r2.axes[1].vec if d in (r2.axes[0].vec, neg(r2.axes[0].vec)) else r2.axes[0].vec
    if {add(v, scale(c, ell)) for v in foot2} != foot1:
        c = neg(c)
        if {add(v, scale(c, ell)) for v in foot2} != foot1:
            raise PlanError("mover must sit on top of the first substrate cell")
    _require_free(cfg, [add(v, pitch) for v in foot1])

    preps: list[Plan] = []
    current = cfg
    for name in over:
        if _oriented_along(work[name], d):
            continue
        prep = reorient_module(current, work[name]).as_prep()
        off = prep.offsets[-1]
        for other in work:
            work[other] = (
                prep.modules[other]
                if other in prep.modules
                else _shifted_module(work[other], off)
            )
        current = prep.final
        preps.append(prep)

    r1, r2, r3 = work[mover], work[over[0]], work[over[1]]
    substrate = r2.footprint() | r3.footprint()
    v0 = next(iter(substrate))
    raw = {v: _basis_coords(sub(v, v0), d, c) for v in substrate}
    smin = min(s for s, _ in raw.values())
    hmin = min(h for _, h in raw.values())
    origin = add(v0, add(scale(d, smin), scale(c, hmin)))

    def coords(node):
        return _basis_coords(sub(node, origin), d, c)

    def surface_node(s):
        return add(origin, add(scale(d, s), scale(c, ell - 1)))

    stepper = Stepper(current)
    motions: dict[int, Motion] = {}
    for q in range(ell):
        bot = stepper.bot(surface_node(2 * q))
        s_head = coords(sub(bot.head, stepper.offset))[0]
        s_tail = coords(sub(bot.tail, stepper.offset))[0]
        if {s_head, s_tail} != {2 * q, 2 * q + 1}:
            raise PlanError("substrate surface row is not aligned with the slide")
        lead = bot.head if s_head > s_tail else bot.tail
        motions[bot.id] = contract_onto(bot, lead, scale(d, ell - 1 - q))
    for aid in r1.members:
        motions[aid] = ride(pitch)
    stepper.run(motions)

    motions = {}
    for q in range(ell):
        bot = stepper.bot(surface_node(ell + q))
        motions[bot.id] = expand_to(direction, scale(d, q - ell))
    stepper.run(motions)

    final = {
        mover: locate_module(
            stepper.cfg, r1.members, mover, axes=r1.axes, orientation=r1.orientation
        ),
        over[0]: locate_module(
            stepper.cfg, r2.members, over[0], axes=r2.axes, orientation=r2.orientation
        ),
        over[1]: locate_module(
            stepper.cfg, r3.members, over[1], axes=r3.axes, orientation=r3.orientation
        ),
    }
    final.update(_carry_over(modules, set(final), stepper.offset))
    core = stepper.plan(final)
    return chain(*preps, core) if preps else core


# --------------------------------------------------------------------------
# tunnel


def _path_runs(grid: _Grid, anchors):
    """Straight spans of the path: (first cell index, last cell index, d)."""
    dirs = []
    for i in range(len(anchors) - 1):
        unit = grid.step_vec(sub(anchors[i + 1], anchors[i]))
        if unit is None:
            raise PlanError("path cells must be adjacent on the module grid")
        dirs.append(unit)
    runs = []
    start = 0
    for i in range(1, len(dirs)):
        if dirs[i] != dirs[i - 1]:
            runs.append((start, i, dirs[i - 1]))
            start = i
    runs.append((start, len(dirs), dirs[-1]))
    return runs


def _cell_module(grid: _Grid, modules, anchor) -> list[RhombusModule]:
    region = set(grid.nodes(anchor))
    inside = [m for m in modules.values() if m.footprint() <= region]
    covered = set()
    for m in inside:
        covered |= m.footprint()
    if covered != region:
        raise PlanError(f"modules do not tile the path cell at {anchor}")
    return inside


def tunnel_module(
    cfg: Configuration,
    modules: ModuleMap,
    path,
    k: int | None = None,
) -> Plan:
    """Transfer module matter along a path of grid cells, one round per
    straight span, so a path with k corners takes k + 1 rounds.

    Two endpoint shapes are supported.  When the first cell holds a single
    expanded module and the last cell is empty, the module funnels through
    the occupied cells in between and pops out at the far end.  When the
    first cell is doubled (two contracted modules parked on one cell) and
    every other cell is occupied, the doubling travels to the far cell and
    no free cell is needed.  Cells swap matter as the waves pass, so names
    stay with cells: the first form moves the mover's name to the far cell,
    the second shifts every name one cell down the path.

    A straight path in the first form would move nothing but the frame, so
    it is rejected; the doubled form handles straight paths, including the
    single-round two-cell shuffle.  Cells that pack during a span must be
    oriented along that span's direction; riding cells are unconstrained.
    """
    anchors = [tuple(a) for a in path]
    if len(anchors) < 2:
        raise PlanError("path needs at least two cells")
    if len(set(anchors)) != len(anchors):
        raise PlanError("path must be simple")

    probe = next((m for m in modules.values() if anchors[1] in m.footprint()), None)
    if probe is None:
        raise PlanError(f"no module occupies the path cell at {anchors[1]}")
    grid = _Grid(probe.ell, probe.axes)

    runs = _path_runs(grid, anchors)
    corners = len(runs) - 1
    if k is not None and k != corners:
        raise PlanError(f"path has {corners} corners, not {k}")

    head_mods = _cell_module(grid, modules, anchors[0])
    if len(head_mods) == 1 and head_mods[0].state == EXPANDED:
        mode = "full"
        tube = anchors[1:-1]
        _require_free(cfg, grid.nodes(anchors[-1]))
        if corners == 0:
            raise PlanError(
                "a straight tunnel with a free far cell is a rigid translation; "
                "the path needs a corner"
            )
    elif len(head_mods) == 2 and not any(m.state == EXPANDED for m in head_mods):
        mode = "bubble"
        tube = anchors[1:]
    else:
        raise PlanError(
            "path must start with one expanded module or two parked ones"
        )

    cell_names: dict[NodeCoord, str] = {}
    for anchor in tube:
        found = _cell_module(grid, modules, anchor)
        if len(found) != 1 or found[0].state != EXPANDED:
            raise PlanError(f"path cell at {anchor} must hold one expanded module")
        if found[0].ell != grid.ell:
            raise PlanError("tunnel needs equal-size modules")
        cell_names[anchor] = found[0].name

    pack_checks: list[tuple[NodeCoord, Vec]] = []
    for r, (s, e, d) in enumerate(runs):
        cells = anchors[s : e + 1]
        if mode == "full" and r == 0 and len(cells) == 2:
            pack_checks += [(cells[0], d), (cells[1], d)]
        elif mode == "full" and r == len(runs) - 1:
            pass
        elif len(cells) == 2:
            pack_checks.append((cells[1], d))
        else:
            pack_checks += [(cells[-2], d), (cells[-1], d)]
    for anchor, d in pack_checks:
        m = head_mods[0] if anchor == anchors[0] else modules[cell_names[anchor]]
        if not _oriented_along(m, d):
            raise PlanError(
                f"module {m.name!r} must be oriented along the span through it"
            )

    stepper = Stepper(cfg)
    last = len(runs) - 1
    for r, (s, e, d) in enumerate(runs):
        motions: dict[int, Motion] = {}
        cells = anchors[s : e + 1]
        if mode == "full" and r == 0:
            if len(cells) == 2:
                _pack_cell(grid, stepper, cells[0], d, 1, "near", motions)
                _pack_cell(grid, stepper, cells[1], d, 0, "far", motions)
            else:
                _ride_cell(grid, stepper, cells[0], scale(d, grid.ell), motions)
                for anchor in cells[1:-2]:
                    _ride_cell(grid, stepper, anchor, scale(d, grid.ell), motions)
                _pack_cell(grid, stepper, cells[-2], d, 1, "near", motions)
                _pack_cell(grid, stepper, cells[-1], d, 0, "far", motions)
        elif mode == "full" and r == last:
            _spread_cell(grid, stepper, cells[0], d, motions)
            for anchor in cells[1:-1]:
                _ride_cell(grid, stepper, anchor, scale(d, grid.ell), motions)
        elif len(cells) == 2:
            _half_shift_cell(grid, stepper, cells[0], d, motions)
            _pack_cell(grid, stepper, cells[1], d, 0, "far", motions)
        else:
            _spread_cell(grid, stepper, cells[0], d, motions)
            for anchor in cells[1:-2]:
                _ride_cell(grid, stepper, anchor, scale(d, grid.ell), motions)
            _pack_cell(grid, stepper, cells[-2], d, 1, "near", motions)
            _pack_cell(grid, stepper, cells[-1], d, 0, "far", motions)
        stepper.run(motions)

    d_last = runs[-1][2]
    axis_last = _DIR_BY_VEC[d_last if d_last in (grid.a, grid.b) else neg(d_last)]
    final: dict[str, RhombusModule] = {}
    if mode == "full":
        for anchor in tube:
            name = cell_names[anchor]
            final[name] = locate_module(
                stepper.cfg, _cell_ids(grid, stepper, anchor), name, axes=grid.axes
            )
        name = head_mods[0].name
        final[name] = locate_module(
            stepper.cfg, _cell_ids(grid, stepper, anchors[-1]), name, axes=grid.axes
        )
    else:
        d_first = runs[0][2]
        base0 = stepper.at(anchors[0])

        def start_sort(m):
            return min(grid.along(v, anchors[0], d_first) for v in m.footprint())

        pair = sorted(head_mods, key=start_sort)
        names = [pair[0].name, pair[1].name] + [cell_names[a] for a in tube]
        for i, anchor in enumerate(anchors[:-1]):
            final[names[i]] = locate_module(
                stepper.cfg, _cell_ids(grid, stepper, anchor), names[i], axes=grid.axes
            )
        base_live = stepper.at(anchors[-1])
        near_ids, far_ids = [], []
        for aid in _cell_ids(grid, stepper, anchors[-1]):
            node = stepper.cfg.amoebot(aid).head
            half = near_ids if grid.along(node, base_live, d_last) < grid.ell // 2 else far_ids
            half.append(aid)
        for name, ids in ((names[-2], near_ids), (names[-1], far_ids)):
            final[name] = locate_module(
                stepper.cfg,
                ids,
                name,
                axes=(axis_last, grid.axes[1] if axis_last is grid.axes[0] else grid.axes[0]),
                orientation=axis_last,
            )
    final.update(_carry_over(modules, set(final), stepper.offset))
    return stepper.plan(final)


def rotate_module(
    cfg: Configuration,
    modules: ModuleMap,
    mover: str,
    around: str,
    target: NodeCoord,
) -> Plan:
    """Move a module onto a free cell flanking its neighbour by tunnelling
    through that neighbour: a one-corner path, two rounds."""
    if mover not in modules or around not in modules:
        raise PlanError("unknown module")
    path = [modules[mover].anchor, modules[around].anchor, tuple(target)]
    return tunnel_module(cfg, modules, path, k=1)


# --------------------------------------------------------------------------
# jumps

JUMP_KINDS = ("leapfrog", "monkey_straight", "monkey_diagonal")


def jump_module(
    cfg: Configuration,
    modules: ModuleMap,
    kind: str,
    mover: str,
    supports: tuple[str, ...],
    target: NodeCoord | None = None,
) -> Plan:
    """Carry a module across its support modules, pack-and-spread style.

    leapfrog: one support in the adjacent cell; the mover crosses it and
    lands on the far side, two rounds.  monkey_straight: two supports in a
    line; the mover crosses both, three rounds.  monkey_diagonal: one
    support ahead and the mover lands on the support's flank, two rounds;
    target picks which flank.  The supports are restored in place and the
    mover's name moves to the landing cell.
    """
    if kind not in JUMP_KINDS:
        raise PlanError(f"unknown jump kind {kind!r}")
    if mover not in modules:
        raise PlanError(f"unknown module {mover!r}")
    for name in supports:
        if name not in modules:
            raise PlanError(f"unknown module {name!r}")
    r = modules[mover]
    grid = _Grid(r.ell, r.axes)
    expected = {"leapfrog": 1, "monkey_straight": 2, "monkey_diagonal": 1}[kind]
    if len(supports) != expected:
        raise PlanError(f"{kind} uses {expected} support module(s)")
    sups = [modules[name] for name in supports]
    for m in sups:
        if m.ell != r.ell:
            raise PlanError("jump needs equal-size modules")
        if m.state != EXPANDED or r.state != EXPANDED:
            raise PlanError("jump modules must be expanded")
    d = grid.step_vec(sub(sups[0].anchor, r.anchor))
    if d is None:
        raise PlanError("first support must occupy the cell next to the mover")

    if kind == "monkey_diagonal":
        if target is None:
            raise PlanError("monkey_diagonal needs a target cell")
        flank = sub(tuple(target), sups[0].anchor)
        if grid.step_vec(flank) is None or grid.step_vec(flank) in (d, neg(d)):
            raise PlanError("target must flank the support across the jump line")
        return tunnel_module(
            cfg, modules, [r.anchor, sups[0].anchor, tuple(target)], k=1
        )

    if kind == "monkey_straight":
        if sub(sups[1].anchor, sups[0].anchor) != scale(d, grid.ell):
            raise PlanError("supports must line up along the jump direction")
    landing = add(sups[-1].anchor, scale(d, grid.ell))
    if target is not None and tuple(target) != landing:
        raise PlanError(f"{kind} lands on {landing}, not {tuple(target)}")
    _require_free(cfg, grid.nodes(landing))
    for m in (r, *sups):
        if not _oriented_along(m, d):
            raise PlanError(
                f"module {m.name!r} must be oriented along the jump direction"
            )

    stepper = Stepper(cfg)
    motions: dict[int, Motion] = {}
    _pack_cell(grid, stepper, r.anchor, d, 1, "near", motions)
    _pack_cell(grid, stepper, sups[0].anchor, d, 0, "far", motions)
    stepper.run(motions)
    if kind == "monkey_straight":
        motions = {}
        _half_shift_cell(grid, stepper, sups[0].anchor, d, motions)
        _pack_cell(grid, stepper, sups[1].anchor, d, 0, "far", motions)
        stepper.run(motions)
    motions = {}
    _spread_cell(grid, stepper, sups[-1].anchor, d, motions)
    stepper.run(motions)

    final = {}
    for m in sups:
        final[m.name] = locate_module(
            stepper.cfg, _cell_ids(grid, stepper, m.anchor), m.name, axes=grid.axes
        )
    final[mover] = locate_module(
        stepper.cfg, _cell_ids(grid, stepper, landing), mover, axes=grid.axes
    )
    final.update(_carry_over(modules, set(final), stepper.offset))
    return stepper.plan(final)
