"""Round execution: compose releases, kinematics, collision check, remap."""

from __future__ import annotations

from ..lattice import sub
from .collision import detect_collisions, forbidden_contractions
from .kinematics import apply_releases, solve_kinematics, validate_script
from .model import (
    Amoebot,
    Configuration,
    ConflictError,
    ConflictKind,
    ConflictReport,
    MoveKind,
    RoundScript,
)


def finalize_round(cfg: Configuration, script: RoundScript, kin) -> Configuration | ConflictReport:
    """Evaluate motions at t = 1, apply handover flips, remap onto the grid.

    Expansion puts the head on the new node.  A handover leaves the formerly
    contracted amoebot's head where it was and adds the acquired node as its
    tail, so the stationary-frame picture of a pure handover moves nothing.
    Without a retained static bond the whole result is translated so the
    lowest-id amoebot's head displacement is zero.
    """
    new_bots = []
    for bot in cfg.amoebots:
        act = script.action_for(bot.id)
        p0 = ("a", bot.id, 0)
        p1 = ("a", bot.id, 1)
        if act.kind is MoveKind.EXPAND:
            new_bots.append(Amoebot(bot.id, head=kin.end(p1), tail=kin.end(p0)))
        elif act.kind is MoveKind.CONTRACT:
            kept = p0 if act.into == "head" else p1
            new_bots.append(Amoebot(bot.id, head=kin.end(kept)))
        elif act.kind is MoveKind.HANDOVER:
            if bot.is_expanded:
                kept = bot.tail if bot.head in act.via else bot.head
                idx = 0 if kept == bot.head else 1
                new_bots.append(Amoebot(bot.id, head=kin.end(("a", bot.id, idx))))
            else:
                acquired = act.via[0] if act.via[1] == bot.head else act.via[1]
                owner, which = cfg.occupancy[acquired]
                part = ("a", owner, 0 if which == "head" else 1)
                new_bots.append(Amoebot(bot.id, head=kin.end(p0), tail=kin.end(part)))
        elif bot.is_expanded:
            new_bots.append(Amoebot(bot.id, head=kin.end(p0), tail=kin.end(p1)))
        else:
            new_bots.append(Amoebot(bot.id, head=kin.end(p0)))

    if new_bots and not kin.statics_pinned:
        delta = sub(cfg.amoebots[0].head, new_bots[0].head)
        if delta != (0, 0):
            new_bots = [bot.translated(delta) for bot in new_bots]

    taken: dict = {}
    for bot in new_bots:
        for node in bot.nodes():
            if node in cfg.statics:
                return ConflictReport(
                    ConflictKind.COLLISION,
                    f"amoebot {bot.id} lands on static node {node}",
                    {"node": list(node), "amoebot": bot.id, "static": True},
                )
            if node in taken:
                return ConflictReport(
                    ConflictKind.COLLISION,
                    f"amoebots {taken[node]} and {bot.id} land on node {node}",
                    {"node": list(node), "amoebots": sorted([taken[node], bot.id])},
                )
            taken[node] = bot.id

    result = Configuration(new_bots, cfg.statics)
    # G_R stayed connected and retained bonds keep their length, so the
    # remapped structure is connected again; this guards the implementation.
    assert result.is_connected(), "finalize produced a disconnected structure"
    return result


def step(cfg: Configuration, script: RoundScript) -> Configuration | ConflictReport:
    """Execute one round; on any conflict the configuration is not advanced."""
    report = validate_script(cfg, script)
    if report is not None:
        return report
    retained = apply_releases(cfg, script)
    if isinstance(retained, ConflictReport):
        return retained
    report = forbidden_contractions(cfg, script, retained)
    if report is not None:
        return report
    kin = solve_kinematics(cfg, script, retained)
    if isinstance(kin, ConflictReport):
        return kin
    report = detect_collisions(cfg, script, kin)
    if report is not None:
        return report
    return finalize_round(cfg, script, kin)


def step_or_raise(cfg: Configuration, script: RoundScript) -> Configuration:
    out = step(cfg, script)
    if isinstance(out, ConflictReport):
        raise ConflictError(out)
    return out


def run_script(cfg: Configuration, scripts) -> "object":
    """Fold step over the scripts, returning a Trace or the first conflict."""
    from ..trace import Trace

    trace = Trace(initial=cfg)
    current = cfg
    for script in scripts:
        out = step(current, script)
        if isinstance(out, ConflictReport):
            return out
        trace.append(script, out)
        current = out
    return trace


def run_or_raise(cfg: Configuration, scripts):
    out = run_script(cfg, scripts)
    if isinstance(out, ConflictReport):
        raise ConflictError(out)
    return out
