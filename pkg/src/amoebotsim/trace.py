"""Trace data model, analyzers and canonical JSONL serialization.

A trace is an initial configuration plus one record per round holding the
script, the resulting configuration and optional annotations.  The byte
format is JSON Lines with a versioned header record; all collections are
emitted in sorted order with compact separators, so equal traces always
serialize to identical bytes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction

from .engine.model import Bond, Configuration, ConflictReport, RoundScript, make_bond
from .lattice import NodeCoord, Vec, sub

FORMAT_NAME = "amoebotsim-trace"
FORMAT_VERSION = 1


class TraceError(ValueError):
    def __init__(self, message: str, offset: int | None = None):
        if offset is not None:
            message = f"{message} (byte offset {offset})"
        super().__init__(message)
        self.offset = offset


@dataclass
class RoundRecord:
    script: RoundScript
    configuration: Configuration
    conflict: ConflictReport | None = None
    annotations: dict = field(default_factory=dict)


@dataclass
class Trace:
    initial: Configuration
    records: list[RoundRecord] = field(default_factory=list)

    def append(self, script: RoundScript, configuration: Configuration, **annotations):
        self.records.append(RoundRecord(script, configuration, annotations=dict(annotations)))

    @property
    def rounds(self) -> int:
        return len(self.records)

    def configurations(self) -> list[Configuration]:
        return [self.initial] + [rec.configuration for rec in self.records]

    def final(self) -> Configuration:
        return self.records[-1].configuration if self.records else self.initial

    def __eq__(self, other):
        if not isinstance(other, Trace):
            return NotImplemented
        return export_trace(self) == export_trace(other)


def export_trace(trace: Trace) -> bytes:
    lines = [
        {"format": FORMAT_NAME, "version": FORMAT_VERSION, "rounds": trace.rounds},
        {"type": "initial", "configuration": trace.initial.to_json()},
    ]
    for i, rec in enumerate(trace.records):
        row = {
            "type": "round",
            "index": i,
            "script": rec.script.to_json(),
            "configuration": rec.configuration.to_json(),
        }
        if rec.conflict is not None:
            row["conflict"] = rec.conflict.to_json()
        if rec.annotations:
            row["annotations"] = rec.annotations
        lines.append(row)
    return b"".join(
        json.dumps(line, sort_keys=True, separators=(",", ":")).encode() + b"\n"
        for line in lines
    )


def import_trace(data: bytes) -> Trace:
    offset = 0
    rows = []
    for raw in data.split(b"\n"):
        if raw.strip():
            try:
                rows.append((offset, json.loads(raw)))
            except json.JSONDecodeError as exc:
                raise TraceError(f"malformed JSON line: {exc.msg}", offset) from exc
        offset += len(raw) + 1

    if not rows:
        raise TraceError("empty trace", 0)
    off, header = rows[0]
    if header.get("format") != FORMAT_NAME:
        raise TraceError("missing trace header", off)
    if header.get("version") != FORMAT_VERSION:
        raise TraceError(f"unsupported version {header.get('version')}", off)
    if len(rows) < 2 or rows[1][1].get("type") != "initial":
        raise TraceError("missing initial configuration", rows[1][0] if len(rows) > 1 else off)

    try:
        trace = Trace(initial=Configuration.from_json(rows[1][1]["configuration"]))
        for off, row in rows[2:]:
            if row.get("type") != "round":
                raise TraceError(f"unexpected record type {row.get('type')!r}", off)
            trace.records.append(
                RoundRecord(
                    script=RoundScript.from_json(row["script"]),
                    configuration=Configuration.from_json(row["configuration"]),
                    annotations=row.get("annotations", {}),
                )
            )
    except TraceError:
        raise
    except (KeyError, ValueError, TypeError) as exc:
        raise TraceError(f"invalid trace record: {exc}", off) from exc

    declared = header.get("rounds")
    if declared is not None and declared != trace.rounds:
        raise TraceError(
            f"header declares {declared} rounds but {trace.rounds} present (truncated?)",
            len(data),
        )
    return trace


def verify_replay(trace: Trace) -> bool:
    """Re-execute every script; configurations must match bit-exactly."""
    from .engine.round import step

    current = trace.initial
    for i, rec in enumerate(trace.records):
        out = step(current, rec.script)
        if isinstance(out, ConflictReport):
            raise TraceError(f"round {i} replays to a conflict: {out}")
        if out != rec.configuration:
            raise TraceError(f"round {i} replay diverges from recorded configuration")
        current = out
    return True


def reference_point(cfg: Configuration) -> NodeCoord:
    """The structure's reference point: the lowest-id amoebot's head."""
    if not cfg.amoebots:
        raise ValueError("empty configuration has no reference point")
    return cfg.amoebots[0].head


def measure_displacement(trace: Trace, frame: str = "static") -> dict:
    """Per-round and cumulative displacement of the reference point.

    frame="static" uses absolute grid coordinates and requires static nodes
    to exist (they pin the frame).  frame="amoebot" measures relative to the
    lowest-id amoebot itself, which is zero by definition and serves as the
    degenerate baseline.
    """
    if frame not in ("static", "amoebot"):
        raise ValueError(f"unknown frame {frame!r}")
    if frame == "static" and not trace.initial.statics:
        raise ValueError("static frame requires static nodes")
    configs = trace.configurations()
    per_round: list[Vec] = []
    for before, after in zip(configs, configs[1:]):
        delta = sub(reference_point(after), reference_point(before))
        if frame == "amoebot":
            delta = (0, 0)
        per_round.append(delta)
    total = (sum(d[0] for d in per_round), sum(d[1] for d in per_round))
    return {
        "frame": frame,
        "per_round": [list(d) for d in per_round],
        "cumulative": list(total),
    }


@dataclass
class RetentionSample:
    round_index: int
    component: frozenset[int]
    before: int
    after: int

    @property
    def ratio(self) -> Fraction:
        if self.before == 0:
            return Fraction(1)
        return Fraction(self.after, self.before)


def _boundary_bonds(cfg: Configuration, bonds, component: frozenset[int]) -> int:
    """Bonds with exactly one endpoint owned by the component.

    Static endpoints count as outside, so surface bonds are boundary bonds.
    """
    count = 0
    for x, y in bonds:
        ox = cfg.occupancy.get(x)
        oy = cfg.occupancy.get(y)
        in_x = ox is not None and ox[0] in component
        in_y = oy is not None and oy[0] in component
        if in_x != in_y:
            count += 1
    return count


def boundary_retention(trace: Trace, components) -> list[RetentionSample]:
    """Per-round boundary-bond retention for each amoebot-id component."""
    comps = [frozenset(c) for c in components]
    samples = []
    current = trace.initial
    for i, rec in enumerate(trace.records):
        bonds_before = current.bonds
        released: set[Bond] = set()
        for bs in rec.script.releases.values():
            released.update(make_bond(*b) for b in bs)
        bonds_after = bonds_before - released
        for comp in comps:
            samples.append(
                RetentionSample(
                    round_index=i,
                    component=comp,
                    before=_boundary_bonds(current, bonds_before, comp),
                    after=_boundary_bonds(current, bonds_after, comp),
                )
            )
        current = rec.configuration
    return samples
