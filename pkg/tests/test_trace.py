"""Trace round-tripping, replay verification, and measurements."""

import json
from fractions import Fraction

import pytest

from amoebotsim.engine import (
    Amoebot,
    Configuration,
    MoveAction,
    RoundScript,
    make_bond,
    run_or_raise,
)
from amoebotsim.lattice import Direction
from amoebotsim.trace import (
    Trace,
    TraceError,
    boundary_retention,
    export_trace,
    import_trace,
    measure_displacement,
    verify_replay,
)


def crawl_trace():
    """Two amoebots inch east along a static surface in two rounds."""
    cfg = Configuration(
        [Amoebot(0, (0, 0)), Amoebot(1, (1, 0))],
        statics=[(0, -1), (1, -1), (2, -1), (3, -1)],
    )
    grow = RoundScript.make(
        actions={
            1: MoveAction.expand(
                Direction.E,
                partition={(0, 0): "origin", (1, -1): "origin", (2, -1): "origin"},
            )
        }
    )
    pull = RoundScript.make(
        releases={
            0: [make_bond((0, 0), (0, -1)), make_bond((0, 0), (1, -1))],
            1: [make_bond((1, 0), (1, -1)), make_bond((1, 0), (2, -1))],
        },
        actions={1: MoveAction.contract("head")},
    )
    return run_or_raise(cfg, [grow, pull])


def test_crawl_advances_one_unit_per_cycle():
    trace = crawl_trace()
    final = trace.final()
    assert final.amoebot(0).head == (1, 0)
    assert final.amoebot(1).head == (2, 0)


def test_export_import_round_trip_is_bit_exact():
    trace = crawl_trace()
    data = export_trace(trace)
    again = import_trace(data)
    assert again == trace
    assert export_trace(again) == data


def test_export_header_and_record_shape():
    trace = crawl_trace()
    lines = export_trace(trace).decode().splitlines()
    header = json.loads(lines[0])
    assert header == {"format": "amoebotsim-trace", "version": 1, "rounds": 2}
    assert json.loads(lines[1])["type"] == "initial"
    round_one = json.loads(lines[2])
    assert round_one["type"] == "round"
    assert round_one["index"] == 0
    assert "script" in round_one and "configuration" in round_one


def test_import_reports_byte_offset_of_bad_line():
    data = export_trace(crawl_trace())
    lines = data.split(b"\n")
    broken = lines[:2] + [b"{not json"] + lines[2:]
    with pytest.raises(TraceError) as info:
        import_trace(b"\n".join(broken))
    expected_offset = len(lines[0]) + 1 + len(lines[1]) + 1
    assert info.value.offset == expected_offset


def test_import_detects_truncation():
    data = export_trace(crawl_trace())
    lines = data.splitlines()
    truncated = b"\n".join(lines[:-1]) + b"\n"
    with pytest.raises(TraceError, match="truncated"):
        import_trace(truncated)


def test_import_rejects_garbage_header():
    with pytest.raises(TraceError):
        import_trace(b'{"format":"something-else","version":1}\n')
    with pytest.raises(TraceError):
        import_trace(b"")


def test_verify_replay_accepts_honest_trace():
    assert verify_replay(crawl_trace())


def test_verify_replay_rejects_tampered_configuration():
    trace = crawl_trace()
    rec = trace.records[-1]
    tampered = Configuration(
        [b.translated((1, 0)) for b in rec.configuration.amoebots],
        rec.configuration.statics,
    )
    trace.records[-1] = type(rec)(
        script=rec.script, configuration=tampered, annotations=rec.annotations
    )
    with pytest.raises(TraceError, match="diverges"):
        verify_replay(trace)


def test_measure_displacement_static_frame():
    trace = crawl_trace()
    result = measure_displacement(trace, frame="static")
    assert result["per_round"] == [[0, 0], [1, 0]]
    assert result["cumulative"] == [1, 0]


def test_measure_displacement_amoebot_frame_is_zero():
    result = measure_displacement(crawl_trace(), frame="amoebot")
    assert result["cumulative"] == [0, 0]


def test_measure_displacement_static_frame_requires_statics():
    cfg = Configuration([Amoebot(0, (0, 0))])
    with pytest.raises(ValueError):
        measure_displacement(Trace(initial=cfg), frame="static")


def test_boundary_retention_counts_surface_bonds():
    trace = crawl_trace()
    samples = boundary_retention(trace, components=[{0, 1}])
    assert len(samples) == 2
    first, second = samples
    # round one releases nothing
    assert (first.before, first.after) == (4, 4)
    assert first.ratio == 1
    # round two drops four of six surface bonds
    assert (second.before, second.after) == (6, 2)
    assert second.ratio == Fraction(1, 3)
