"""Exact continuous collision detection for one round of joint movements.

The moving matter consists of closed segments: every retained bond, every
expanded amoebot's body, the growing body of an expanding amoebot, the
shrinking body of a contracting one, and contracted bodies as degenerate
point segments.  All endpoints move affinely, position(t) = start + t*rate
with integer vectors, so every orientation or distance comparison between
two segments is the sign of a quadratic in t with integer coefficients.

A pair of segments that share an endpoint part is adjacent and never tested.
For the rest, the intersection predicate can only change truth value at a
root of one of finitely many governing quadratics, and because "two closed
segments intersect" is a closed condition in t, it suffices to test the
predicate exactly at every root in (0,1) plus one rational sample inside
each gap between consecutive roots.  Roots are evaluated exactly as
quadratic surds; samples use plain Fractions.  Touching at t = 0 or t = 1
only is legal (node splits and merges); interior contact of any kind is a
collision, and the double-bond contraction rule is enforced separately.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from ..lattice import QuadExpr
from .model import (
    Configuration,
    ConflictKind,
    ConflictReport,
    MoveKind,
    RoundScript,
)
from .kinematics import Kinematics, PartId, external_bonds, resolve_bond_end

Quad = tuple[int, int, int]  # c0 + c1*t + c2*t^2


@dataclass
class Segment:
    end_a: PartId
    end_b: PartId
    a0: tuple
    ar: tuple
    b0: tuple
    br: tuple
    descr: tuple

    def box(self):
        """Swept bounding box in doubled coordinates (2q+r, r)."""
        xs = []
        ys = []
        for p0, pr in ((self.a0, self.ar), (self.b0, self.br)):
            for q, r in (p0, (p0[0] + pr[0], p0[1] + pr[1])):
                xs.append(2 * q + r)
                ys.append(r)
        return (min(xs), min(ys), max(xs), max(ys))

    def descr_json(self):
        kind, ident = self.descr
        if kind == "bond":
            return {"kind": "bond", "nodes": [list(ident[0]), list(ident[1])]}
        return {"kind": "body", "amoebot": ident}


def build_segments(cfg: Configuration, script: RoundScript, kin: Kinematics) -> list[Segment]:
    segments = []
    # Internal bonds are skipped: the body segment below covers that matter,
    # including its change of length during an expansion or contraction.
    for x, y in external_bonds(cfg, kin.retained):
        px = resolve_bond_end(cfg, script, x, y)
        py = resolve_bond_end(cfg, script, y, x)
        segments.append(
            Segment(px, py, x, kin.part_rate[px], y, kin.part_rate[py], ("bond", (x, y)))
        )
    for bot in cfg.amoebots:
        p0 = ("a", bot.id, 0)
        p1 = ("a", bot.id, 1)
        if p1 in kin.part_start:
            segments.append(
                Segment(
                    p0,
                    p1,
                    kin.part_start[p0],
                    kin.part_rate[p0],
                    kin.part_start[p1],
                    kin.part_rate[p1],
                    ("body", bot.id),
                )
            )
        else:
            start = kin.part_start[p0]
            rate = kin.part_rate[p0]
            segments.append(Segment(p0, p0, start, rate, start, rate, ("body", bot.id)))
    return segments


def detect_collisions(
    cfg: Configuration,
    script: RoundScript,
    kin: Kinematics,
) -> ConflictReport | None:
    segments = build_segments(cfg, script, kin)
    for i, j in _candidate_pairs(segments):
        s1, s2 = segments[i], segments[j]
        ends1 = {s1.end_a, s1.end_b}
        if s2.end_a in ends1 or s2.end_b in ends1:
            continue
        if s1.ar == s1.br == s2.ar == s2.br:
            # Rigidly co-moving pair: relative geometry is frozen, and the
            # valid start state keeps non-adjacent segments apart.
            continue
        hit = _pair_collision(s1, s2)
        if hit is not None:
            witness, window = hit
            return ConflictReport(
                ConflictKind.COLLISION,
                "moving segments intersect",
                {
                    "segments": [s1.descr_json(), s2.descr_json()],
                    "time_window": [str(window[0]), str(window[1])],
                    "time_witness": float(witness),
                },
            )
    return None


def forbidden_contractions(cfg, script, retained) -> ConflictReport | None:
    """A contracting amoebot may not hold two retained bonds to one node.

    Checked before the rigidity solve: rounding both bonds onto the merged
    node is ruled a collision whether or not the rest of the structure could
    absorb the motion.
    """
    for aid, act in sorted(script.actions.items()):
        if act.kind is not MoveKind.CONTRACT:
            continue
        bot = cfg.amoebot(aid)
        seen: set = set()
        for x, y in retained:
            if x in (bot.head, bot.tail):
                other = y
            elif y in (bot.head, bot.tail):
                other = x
            else:
                continue
            if other in (bot.head, bot.tail):
                continue  # the internal bond
            if other in seen:
                return ConflictReport(
                    ConflictKind.COLLISION,
                    f"contraction of {aid} would merge two bonds to {other}",
                    {"rule": "double-bond-contraction", "amoebot": aid, "node": list(other)},
                )
            seen.add(other)
    return None


def _candidate_pairs(segments):
    """Index pairs whose swept boxes overlap, via a coarse spatial hash."""
    cell = 8
    buckets: dict[tuple[int, int], list[int]] = {}
    boxes = []
    for idx, seg in enumerate(segments):
        x0, y0, x1, y1 = seg.box()
        boxes.append((x0, y0, x1, y1))
        for cx in range(x0 // cell, x1 // cell + 1):
            for cy in range(y0 // cell, y1 // cell + 1):
                buckets.setdefault((cx, cy), []).append(idx)
    pairs = set()
    for members in buckets.values():
        for i in range(len(members)):
            bi = boxes[members[i]]
            for j in range(i + 1, len(members)):
                a, b = members[i], members[j]
                if a > b:
                    a, b = b, a
                if (a, b) in pairs:
                    continue
                bj = boxes[members[j]]
                if bi[0] <= bj[2] and bj[0] <= bi[2] and bi[1] <= bj[3] and bj[1] <= bi[3]:
                    pairs.add((a, b))
    return sorted(pairs)


def _affine(p0, pr):
    return (p0, pr)


def _aff_sub(u, v):
    (u0, ur), (v0, vr) = u, v
    return ((u0[0] - v0[0], u0[1] - v0[1]), (ur[0] - vr[0], ur[1] - vr[1]))


def _cross_quad(u, v) -> Quad:
    (u0, ur), (v0, vr) = u, v
    c0 = u0[0] * v0[1] - u0[1] * v0[0]
    c1 = u0[0] * vr[1] - u0[1] * vr[0] + ur[0] * v0[1] - ur[1] * v0[0]
    c2 = ur[0] * vr[1] - ur[1] * vr[0]
    return (c0, c1, c2)


def _dot2_quad(u, v) -> Quad:
    def d2(a, b):
        return 2 * a[0] * b[0] + a[0] * b[1] + a[1] * b[0] + 2 * a[1] * b[1]

    (u0, ur), (v0, vr) = u, v
    return (d2(u0, v0), d2(u0, vr) + d2(ur, v0), d2(ur, vr))


def _quad_sub(a: Quad, b: Quad) -> Quad:
    return (a[0] - b[0], a[1] - b[1], a[2] - b[2])


def _governing_quads(s1: Segment, s2: Segment) -> list[Quad]:
    A = _affine(s1.a0, s1.ar)
    B = _affine(s1.b0, s1.br)
    C = _affine(s2.a0, s2.ar)
    D = _affine(s2.b0, s2.br)
    ab = _aff_sub(B, A)
    cd = _aff_sub(D, C)
    quads = [
        _cross_quad(ab, _aff_sub(C, A)),
        _cross_quad(ab, _aff_sub(D, A)),
        _cross_quad(cd, _aff_sub(A, C)),
        _cross_quad(cd, _aff_sub(B, C)),
    ]
    len_ab = _dot2_quad(ab, ab)
    len_cd = _dot2_quad(cd, cd)
    quads.append(len_ab)
    quads.append(len_cd)
    for point in (C, D):
        proj = _dot2_quad(_aff_sub(point, A), ab)
        quads.append(proj)
        quads.append(_quad_sub(proj, len_ab))
    for point in (A, B):
        proj = _dot2_quad(_aff_sub(point, C), cd)
        quads.append(proj)
        quads.append(_quad_sub(proj, len_cd))
    diff = _aff_sub(C, A)
    quads.append(_dot2_quad(diff, diff))
    return quads


def _roots_in_open_unit(quad: Quad):
    c0, c1, c2 = quad
    if c2 == 0:
        if c1 == 0:
            return []
        root = Fraction(-c0, c1)
        return [root] if 0 < root < 1 else []
    disc = c1 * c1 - 4 * c0 * c2
    if disc < 0:
        return []
    out = []
    for sign in (1, -1):
        root = QuadExpr(Fraction(-c1, 2 * c2), Fraction(sign, 2 * c2), disc)
        if 0 < root < 1:
            if not root.b:
                out.append(root.a)
            else:
                out.append(root)
    return out


def _sgn(x):
    if isinstance(x, QuadExpr):
        return x.sign()
    return (x > 0) - (x < 0)


def _cross_val(a, b):
    return a[0] * b[1] - a[1] * b[0]


def _dot2_val(a, b):
    return 2 * a[0] * b[0] + a[0] * b[1] + a[1] * b[0] + 2 * a[1] * b[1]


def _vsub(a, b):
    return (a[0] - b[0], a[1] - b[1])


def _is_zero(x) -> bool:
    return _sgn(x) == 0


def _point_on_segment(p, a, b):
    ab = _vsub(b, a)
    ap = _vsub(p, a)
    if _is_zero(ab[0]) and _is_zero(ab[1]):
        return _is_zero(ap[0]) and _is_zero(ap[1])
    if not _is_zero(_cross_val(ab, ap)):
        return False
    proj = _dot2_val(ap, ab)
    return _sgn(proj) >= 0 and _sgn(proj - _dot2_val(ab, ab)) <= 0


def segments_intersect(p1, p2, q1, q2) -> bool:
    """Closed-segment intersection, exact, degenerate-safe.

    Works for any scalar type with ring arithmetic and exact signs
    (int, Fraction, QuadExpr).
    """
    d1 = _vsub(p2, p1)
    d2 = _vsub(q2, q1)
    p_degenerate = _is_zero(d1[0]) and _is_zero(d1[1])
    q_degenerate = _is_zero(d2[0]) and _is_zero(d2[1])
    if p_degenerate and q_degenerate:
        diff = _vsub(p1, q1)
        return _is_zero(diff[0]) and _is_zero(diff[1])
    if p_degenerate:
        return _point_on_segment(p1, q1, q2)
    if q_degenerate:
        return _point_on_segment(q1, p1, p2)

    o1 = _sgn(_cross_val(d1, _vsub(q1, p1)))
    o2 = _sgn(_cross_val(d1, _vsub(q2, p1)))
    o3 = _sgn(_cross_val(d2, _vsub(p1, q1)))
    o4 = _sgn(_cross_val(d2, _vsub(p2, q1)))
    if o1 * o2 < 0 and o3 * o4 < 0:
        return True
    if o1 == 0 and _point_on_segment(q1, p1, p2):
        return True
    if o2 == 0 and _point_on_segment(q2, p1, p2):
        return True
    if o3 == 0 and _point_on_segment(p1, q1, q2):
        return True
    if o4 == 0 and _point_on_segment(p2, q1, q2):
        return True
    return False


def _eval_at(seg: Segment, t):
    a = (seg.a0[0] + t * seg.ar[0], seg.a0[1] + t * seg.ar[1])
    b = (seg.b0[0] + t * seg.br[0], seg.b0[1] + t * seg.br[1])
    return a, b


def _intersect_at(s1: Segment, s2: Segment, t) -> bool:
    p1, p2 = _eval_at(s1, t)
    q1, q2 = _eval_at(s2, t)
    return segments_intersect(p1, p2, q1, q2)


def _pair_collision(s1: Segment, s2: Segment):
    """Witness time and a bracketing window if the pair collides in (0,1)."""
    roots = []
    for quad in _governing_quads(s1, s2):
        roots.extend(_roots_in_open_unit(quad))

    for root in roots:
        if _intersect_at(s1, s2, root):
            approx = root if isinstance(root, Fraction) else root.approx(48)
            return root, (approx, approx)

    approxes = sorted(
        {r if isinstance(r, Fraction) else r.approx(48) for r in roots}
    )
    cuts = [Fraction(0)] + approxes + [Fraction(1)]
    for lo, hi in zip(cuts, cuts[1:]):
        mid = (lo + hi) / 2
        if 0 < mid < 1 and _intersect_at(s1, s2, mid):
            return mid, (lo, hi)
    return None
