"""Validated script sequences and composition of independent sub-plans."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from ..engine import Amoebot, Configuration, EMPTY_SCRIPT, RoundScript, step_or_raise
from ..lattice import Vec, add, neg, sub


class PlanError(ValueError):
    """Preconditions of a meta-module operation do not hold."""


@dataclass(frozen=True)
class Plan:
    """A conflict-checked sequence of round scripts.

    configs[0] is the starting configuration and configs[i + 1] the result of
    scripts[i]; building through run() guarantees the whole chain executed on
    the engine without a conflict.  modules maps module names to their
    descriptors in the final configuration.  prep_rounds counts leading
    scripts that merely prepare (reorientations and the like) so the core
    round count of a primitive stays separately checkable.

    Without statics the engine re-anchors each round to the lowest-id head,
    so configs can carry a translation that is pure bookkeeping.  offsets[i]
    is that accumulated translation; aligned(i) undoes it, putting every
    round back into the frame of the initial configuration.
    """

    scripts: tuple[RoundScript, ...]
    configs: tuple[Configuration, ...]
    modules: dict = field(default_factory=dict)
    prep_rounds: int = 0
    offsets: tuple[Vec, ...] = ()

    def __post_init__(self):
        if len(self.configs) != len(self.scripts) + 1:
            raise ValueError("configs must hold one entry more than scripts")
        if not 0 <= self.prep_rounds <= len(self.scripts):
            raise ValueError("prep_rounds out of range")
        if not self.offsets:
            object.__setattr__(self, "offsets", ((0, 0),) * len(self.configs))
        elif len(self.offsets) != len(self.configs):
            raise ValueError("offsets must match configs one to one")
        elif self.offsets[0] != (0, 0):
            raise ValueError("offsets are relative to the initial configuration")

    @property
    def initial(self) -> Configuration:
        return self.configs[0]

    @property
    def final(self) -> Configuration:
        return self.configs[-1]

    @property
    def rounds(self) -> int:
        return len(self.scripts)

    @property
    def core_rounds(self) -> int:
        return len(self.scripts) - self.prep_rounds

    def aligned(self, i: int) -> Configuration:
        """configs[i] translated back into the initial configuration's frame."""
        off = self.offsets[i]
        return self.configs[i] if off == (0, 0) else self.configs[i].translated(neg(off))

    @staticmethod
    def run(initial, scripts, modules=None, prep_rounds=0) -> "Plan":
        """Execute the scripts from initial, raising on any conflict."""
        configs = [initial]
        for script in scripts:
            configs.append(step_or_raise(configs[-1], script))
        return Plan(tuple(scripts), tuple(configs), dict(modules or {}), prep_rounds)

    def as_prep(self) -> "Plan":
        return replace(self, prep_rounds=len(self.scripts))

    def to_trace(self):
        from ..trace import Trace

        trace = Trace(initial=self.initial)
        for script, cfg in zip(self.scripts, self.configs[1:]):
            trace.append(script, cfg)
        return trace

    def acting_ids(self) -> set[int]:
        ids: set[int] = set()
        for script in self.scripts:
            ids.update(script.releases)
            ids.update(script.actions)
        return ids

    def envelope(self) -> frozenset:
        """All nodes ever occupied by the amoebots this plan acts on, in the
        initial configuration's frame."""
        ids = self.acting_ids()
        nodes = set()
        for i, cfg in enumerate(self.configs):
            off = self.offsets[i]
            for bot in cfg.amoebots:
                if bot.id in ids:
                    nodes.update(sub(n, off) for n in bot.nodes())
        return frozenset(nodes)


def chain(*plans: Plan) -> Plan:
    """Concatenate plans whose configurations meet end to start.

    Leading all-prep plans count into the result's prep_rounds, so a prepended
    reorientation keeps the following primitive's core round count intact.
    """
    if not plans:
        raise PlanError("nothing to chain")
    scripts = list(plans[0].scripts)
    configs = list(plans[0].configs)
    modules = dict(plans[0].modules)
    offsets = list(plans[0].offsets)
    for plan in plans[1:]:
        if plan.initial != configs[-1]:
            raise PlanError("chained plan does not start where the previous ended")
        scripts.extend(plan.scripts)
        configs.extend(plan.configs[1:])
        modules.update(plan.modules)
        base = offsets[-1]
        offsets.extend(add(base, off) for off in plan.offsets[1:])
    prep = 0
    for plan in plans:
        prep += plan.prep_rounds
        if plan.prep_rounds != plan.rounds:
            break
    return Plan(tuple(scripts), tuple(configs), modules, prep, tuple(offsets))


def merge_parallel(*plans: Plan) -> Plan:
    """Union per-round scripts of plans acting on disjoint parts.

    All plans must start from the same configuration, act on disjoint amoebot
    sets and keep disjoint node envelopes; shorter plans idle through the
    remaining rounds.  The merged script sequence is re-executed on the
    engine, so any interaction the static checks miss still surfaces as a
    ConflictError, and every round is cross-checked against the solo runs:
    each amoebot must sit exactly where the plan owning it predicted, up to
    one shared frame translation per round.
    """
    if not plans:
        raise PlanError("nothing to merge")
    initial = plans[0].initial
    for plan in plans[1:]:
        if plan.initial != initial:
            raise PlanError("parallel plans must share the initial configuration")

    id_sets = [plan.acting_ids() for plan in plans]
    envelopes = [plan.envelope() for plan in plans]
    for i in range(len(plans)):
        for j in range(i + 1, len(plans)):
            if id_sets[i] & id_sets[j]:
                raise PlanError("parallel plans act on overlapping amoebot sets")
            if envelopes[i] & envelopes[j]:
                raise PlanError("parallel plans sweep overlapping regions")

    rounds = max(plan.rounds for plan in plans)
    merged = []
    for r in range(rounds):
        releases: dict = {}
        actions: dict = {}
        for plan in plans:
            if r >= plan.rounds:
                continue
            script = plan.scripts[r]
            for aid, bonds in script.releases.items():
                releases.setdefault(aid, set()).update(bonds)
            for aid, act in script.actions.items():
                if aid in actions:
                    raise PlanError(f"amoebot {aid} acts in two parallel plans")
                actions[aid] = act
        merged.append(RoundScript.make(releases, actions) if releases or actions else EMPTY_SCRIPT)

    modules: dict = {}
    for plan in plans:
        for name, mod in plan.modules.items():
            if name in modules:
                raise PlanError(f"module name {name!r} appears in two parallel plans")
            modules[name] = mod
    result = Plan.run(initial, merged, modules)
    return replace(result, offsets=_merged_offsets(result, plans, id_sets))


def _shifted(bot: Amoebot, delta: Vec) -> Amoebot:
    if delta == (0, 0):
        return bot
    tail = None if bot.tail is None else add(bot.tail, delta)
    return Amoebot(bot.id, add(bot.head, delta), tail)


def _merged_offsets(result: Plan, plans, id_sets) -> tuple[Vec, ...]:
    """Frame offsets of the merged run, verified against every solo run."""
    owner = {aid: k for k, ids in enumerate(id_sets) for aid in ids}
    initial_map = result.initial.amoebot_map()
    ids = sorted(initial_map)
    offsets = [(0, 0)]
    for r in range(1, len(result.configs)):
        merged_map = result.configs[r].amoebot_map()
        solo_maps = []
        solo_offs = []
        for plan in plans:
            i = min(r, plan.rounds)
            solo_maps.append(plan.configs[i].amoebot_map())
            solo_offs.append(plan.offsets[i])

        def solo(aid):
            k = owner.get(aid)
            if k is None:
                return initial_map[aid]
            return _shifted(solo_maps[k][aid], neg(solo_offs[k]))

        off = sub(merged_map[ids[0]].head, solo(ids[0]).head)
        for aid in ids:
            if merged_map[aid] != _shifted(solo(aid), off):
                raise PlanError(
                    "parallel plans are kinematically coupled: "
                    f"amoebot {aid} strays from its solo path in round {r}"
                )
        offsets.append(off)
    return tuple(offsets)
