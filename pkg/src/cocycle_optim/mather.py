"""Finite-depth Mather-set over-approximation, word complexity, and audits.

A word is admissible when some padding of the past makes every one-step
Barabanov increment along the word extremal up to a tolerance.  The set of
admissible words over-approximates the words of the Mather set; counts by
length give entropy evidence.  The audits check the cross-ratio and
configuration obstructions that optimal pairs must satisfy.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from . import multicone as mcm
from .barabanov import TOP, BarabanovTable, h_gain
from .errors import BudgetError, DomainError, PrecisionError
from .geom2 import (
    Configuration,
    Cocycle,
    classify_configuration,
    cross_ratio,
    fiber_log_derivative,
    proj_point,
)
from .multicone import ProjInterval, interval_image
from .splitting import (
    DominationCertificate,
    _enclosing_arc,
    periodic_e1,
    periodic_e2,
)

OVERAPPROX_CAVEAT = (
    "admissible word sets over-approximate the optimal words; the gap to the "
    "true Mather language is not bounded at finite depth"
)

MAX_SEARCH_NODES = 2_000_000


@dataclass(frozen=True)
class WordComplexityReport:
    mode: str
    lengths: tuple
    counts: tuple
    entropy_estimates: tuple
    pad_depth: int
    tol: float
    caveat: str = OVERAPPROX_CAVEAT

    def rows(self):
        return list(zip(self.lengths, self.counts, self.entropy_estimates))


@dataclass(frozen=True)
class AuditReport:
    mode: str
    tol: float
    pairs: tuple = field(repr=False)
    violations: tuple
    caveat: str = OVERAPPROX_CAVEAT

    @property
    def n_pairs(self) -> int:
        return len(self.pairs)

    @property
    def n_violations(self) -> int:
        return len(self.violations)

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "tol": self.tol,
            "n_pairs": self.n_pairs,
            "pairs": list(self.pairs),
            "violations": list(self.violations),
            "caveat": self.caveat,
        }


def default_tolerance(table: BarabanovTable) -> float:
    """Admissibility tolerance no tighter than the table's own accuracy."""
    return max(1e-3, 3.0 * table.residual + table.lipschitz_bound * table.metric_spacing)


def _psi_slope(table: BarabanovTable, cert: DominationCertificate, c: Cocycle) -> float:
    """Angle-Lipschitz bound for the one-step increment, for bracket slack."""
    d_max = 1.0
    for g in c.generators:
        for theta in table.angles[:: max(1, len(table.angles) // 64)]:
            d_max = max(d_max, fiber_log_derivative(g, float(theta)))
    return table.gain_lipschitz + table.angle_lipschitz * (1.0 + d_max)


def _hull_state(arcs) -> tuple:
    hull = _enclosing_arc(list(arcs))
    return (hull.start, hull.length)


def _push_state(state, m):
    start, length = state
    img = interval_image(ProjInterval(start, length), m)
    return (img.start, img.length)


def _merge_states(states, merge_gap: float):
    """Cluster single-arc states whose hulls touch within merge_gap."""
    if len(states) <= 1:
        return list(states)
    arcs = [ProjInterval(s, ln) for s, ln in states]
    merged = mcm.merge_arcs(arcs, gap=merge_gap)
    if merged is None:
        return [(_enclosing_arc(arcs).start, _enclosing_arc(arcs).length)]
    return [(iv.start, iv.length) for iv in merged]


def _start_states(cert: DominationCertificate, c: Cocycle, m: int, merge_gap: float = 1e-7):
    """Distinct direction brackets reachable by all pasts of length m."""
    states = [_hull_state(cert.multicone.intervals)]
    for _ in range(m):
        pushed = [_push_state(st, g) for st in states for g in c.generators]
        states = _merge_states(pushed, merge_gap)
    return states


def _representative(state, mc) -> tuple[float, float]:
    """An evaluation point inside the multicone plus the bracket radius.

    The state hull may straddle a gap between components; when the midpoint
    falls in a gap, use the midpoint of the largest intersection with a
    component and charge the full hull diameter as uncertainty.
    """
    start, length = state
    mid = proj_point(start + length / 2.0)
    if mc.contains(mid, slack=1e-12):
        return mid, length / 2.0
    best = None
    for iv in mc.intervals:
        off = (iv.start - start) % math.pi
        lo = min(off, length)
        hi = min(off + iv.length, length)
        if hi > lo:
            if best is None or hi - lo > best[1] - best[0]:
                best = (lo, hi)
    if best is None:
        raise DomainError("state bracket is disjoint from the multicone")
    return proj_point(start + (best[0] + best[1]) / 2.0), length


def _psi_at_state(table, c, mc, state, symbol):
    theta, radius = _representative(state, mc)
    g = c.generator(symbol)
    vec = g @ np.array([math.cos(theta), math.sin(theta)])
    img = proj_point(math.atan2(vec[1], vec[0]))
    psi = table.evaluate(img) + h_gain(c, symbol, theta) - table.evaluate(theta)
    return psi, radius


def _admissible_levels(table, cert, c, ell_max, m, tol):
    """BFS over words; at each node keep the surviving padding states."""
    if m < 1:
        raise DomainError("padding depth must be >= 1")
    tol = default_tolerance(table) if tol is None else float(tol)
    slope = _psi_slope(table, cert, c)
    merge_gap = min(1e-5, table.grid_spacing)
    mc = cert.multicone
    frontier = {(): _start_states(cert, c, m)}
    levels = []
    nodes = 0
    for _ in range(ell_max):
        nxt = {}
        for word, states in frontier.items():
            for s in range(1, c.k + 1):
                kept = []
                for state in states:
                    nodes += 1
                    if nodes > MAX_SEARCH_NODES:
                        raise BudgetError("admissible-word search budget exceeded")
                    psi, radius = _psi_at_state(table, c, mc, state, s)
                    if abs(psi - table.beta) <= tol + slope * radius:
                        kept.append(_push_state(state, c.generator(s)))
                if kept:
                    nxt[word + (s,)] = _merge_states(kept, merge_gap)
        frontier = nxt
        levels.append(sorted(frontier.keys()))
    return levels, tol


def admissible_words(
    table: BarabanovTable,
    cert: DominationCertificate,
    c: Cocycle,
    ell: int,
    m: int = 8,
    tol: float | None = None,
):
    """Words of length ell admissible at padding depth m and tolerance tol.

    Over-approximates the length-ell words of the Mather set for the table's
    mode: a word survives if some length-m past padding keeps every one-step
    increment within tol of the extremal value, with slack for the finite
    direction bracket.
    """
    levels, _ = _admissible_levels(table, cert, c, ell, m, tol)
    return levels[-1]


def complexity_report(
    table: BarabanovTable,
    cert: DominationCertificate,
    c: Cocycle,
    ell_max: int,
    m: int = 8,
    tol: float | None = None,
) -> WordComplexityReport:
    """Admissible word counts and entropy estimates for lengths 1..ell_max."""
    levels, used_tol = _admissible_levels(table, cert, c, ell_max, m, tol)
    lengths = tuple(range(1, ell_max + 1))
    counts = tuple(len(words) for words in levels)
    ents = tuple(
        (math.log(n) / ell) if n > 0 else -math.inf for ell, n in zip(lengths, counts)
    )
    return WordComplexityReport(
        mode=table.mode,
        lengths=lengths,
        counts=counts,
        entropy_estimates=ents,
        pad_depth=m,
        tol=used_tol,
    )


# ---------------------------------------------------------------------------
# Audits
# ---------------------------------------------------------------------------


def _periodic_directions(cert, c, words, max_radius):
    out = {}
    for w in words:
        e1 = periodic_e1(cert, c, w)
        e2 = periodic_e2(cert, c, w)
        if e1.radius > max_radius or e2.radius > max_radius:
            raise PrecisionError(
                f"direction bracket too wide for word {w}",
                radius=max(e1.radius, e2.radius),
            )
        out[tuple(w)] = (e1, e2)
    return out


def cross_ratio_audit(
    cert: DominationCertificate,
    c: Cocycle,
    mode: str,
    words,
    n_pairs: int = 50,
    tol: float = 1e-2,
    seed: int = 0,
    max_radius: float = 1e-6,
) -> AuditReport:
    """Check the cross-ratio obstruction on sampled pairs of periodic words.

    For the top mode, |[e1(xi), e1(eta); e2(xi), e2(eta)]| must be >= 1 and
    the configuration must not be coparallel; for the bottom mode the
    cross-ratio modulus must be <= 1 and crossing is forbidden.  Pairs whose
    directions coincide are recorded as degenerate and never violate.
    """
    words = [tuple(w) for w in words]
    dirs = _periodic_directions(cert, c, set(words), max_radius)
    uniq = sorted(dirs.keys())
    rng = np.random.default_rng(seed)
    pairs = []
    violations = []
    if len(uniq) >= 2:
        for _ in range(n_pairs):
            i, j = rng.choice(len(uniq), size=2, replace=False)
            wa, wb = uniq[i], uniq[j]
            e1a, e2a = dirs[wa]
            e1b, e2b = dirs[wb]
            if e1a.overlaps(e1b) and e2a.overlaps(e2b):
                continue  # projectively the same orbit data; skip as degenerate
            x1, y1 = e1a.direction, e1b.direction
            x2, y2 = e2a.direction, e2b.direction
            cr = cross_ratio(x1, y1, x2, y2)
            config = classify_configuration(x1, y1, x2, y2)
            entry = {
                "words": [list(wa), list(wb)],
                "cross_ratio": cr,
                "configuration": config.value,
            }
            pairs.append(entry)
            if mode == TOP:
                if math.isfinite(cr) and abs(cr) < 1.0 - tol:
                    violations.append({**entry, "magnitude": (1.0 - tol) - abs(cr)})
                if config is Configuration.COPARALLEL:
                    violations.append({**entry, "magnitude": float("nan"),
                                       "reason": "forbidden configuration"})
            else:
                if math.isfinite(cr) and abs(cr) > 1.0 + tol:
                    violations.append({**entry, "magnitude": abs(cr) - (1.0 + tol)})
                if config is Configuration.CROSSING:
                    violations.append({**entry, "magnitude": float("nan"),
                                       "reason": "forbidden configuration"})
    return AuditReport(mode=mode, tol=tol, pairs=tuple(pairs), violations=tuple(violations))


def _group_by_e1(dirs, merge_tol=1e-9):
    """Cluster word keys whose e1 brackets overlap."""
    keys = sorted(dirs.keys())
    groups = []
    for k in keys:
        e1 = dirs[k][0]
        placed = False
        for g in groups:
            rep = dirs[g[0]][0]
            if rep.overlaps(e1) or abs(rep.direction - e1.direction) < merge_tol:
                g.append(k)
                placed = True
                break
        if not placed:
            groups.append([k])
    return groups


def _interval_for_group(x_dir, e2_dirs):
    """Least closed arc avoiding x that contains the group's e2 directions."""
    offsets = sorted((proj_point(t) - x_dir) % math.pi for t in e2_dirs)
    lo, hi = offsets[0], offsets[-1]
    return ProjInterval(x_dir + lo, max(hi - lo, 1e-12))


def arcs_interiors_overlap(a: ProjInterval, b: ProjInterval) -> float:
    """Length of the interior overlap of two closed arcs (0 when disjoint)."""
    overlap = 0.0
    for lo, ln in ((a.start, a.length), (b.start, b.length)):
        other = b if (lo, ln) == (a.start, a.length) else a
        s = (lo - other.start) % math.pi
        if s < other.length:
            overlap = max(overlap, min(other.length - s, ln))
    return overlap


def _chord_angles(theta: float) -> float:
    """Disk-model boundary angle of a projective direction (doubling map)."""
    return (2.0 * proj_point(theta)) % (2.0 * math.pi)


def _strictly_inside(x, lo, hi):
    span = (hi - lo) % (2.0 * math.pi)
    off = (x - lo) % (2.0 * math.pi)
    return 1e-12 < off < span - 1e-12


def _chords_cross(a, b, c, d) -> bool:
    """Strict crossing of the geodesics (a,b) and (c,d) in the disk."""
    for u, v in itertools.product((a, b), (c, d)):
        if min((u - v) % (2 * math.pi), (v - u) % (2 * math.pi)) < 1e-12:
            return False
    return _strictly_inside(c, a, b) != _strictly_inside(d, a, b)


def triangles_interiors_overlap(t1, t2) -> bool:
    """Do two ideal triangles (vertex angle triples on the circle) overlap?"""

    def close(u, v):
        return min((u - v) % (2 * math.pi), (v - u) % (2 * math.pi)) < 1e-12

    shared = [(u, v) for u in t1 for v in t2 if close(u, v)]
    if len(shared) >= 3:
        return True
    sides1 = list(itertools.combinations(t1, 2))
    sides2 = list(itertools.combinations(t2, 2))
    for (a, b), (c, d) in itertools.product(sides1, sides2):
        if _chords_cross(a, b, c, d):
            return True
    if len(shared) == 2:
        a, b = shared[0][0], shared[1][0]
        x = next(v for v in t1 if not any(close(v, s[0]) for s in shared))
        y = next(v for v in t2 if not any(close(v, s[1]) for s in shared))
        return _strictly_inside(x, a, b) == _strictly_inside(y, a, b)
    return False


def geometry_audit(
    cert: DominationCertificate,
    c: Cocycle,
    mode: str,
    words,
    max_radius: float = 1e-6,
) -> AuditReport:
    """Check the disjointness obstructions for groups sharing an e1 direction.

    Top mode: for each e1 with several e2 partners, the least arc spanned by
    the partners must have interiors disjoint across groups.  Bottom mode:
    the ideal triangles (e1 vertex plus arc endpoints, in the disk model)
    must have disjoint interiors.
    """
    words = [tuple(w) for w in words]
    dirs = _periodic_directions(cert, c, set(words), max_radius)
    groups = _group_by_e1(dirs)
    regions = []
    for g in groups:
        x_dir = dirs[g[0]][0].direction
        e2s = []
        for k in g:
            e2 = dirs[k][1]
            if not any(e2.overlaps(prev) for prev in e2s):
                e2s.append(e2)
        if len(e2s) >= 2:
            arc = _interval_for_group(x_dir, [e.direction for e in e2s])
            regions.append({"words": [list(k) for k in g], "e1": x_dir, "arc": arc})
    pairs = []
    violations = []
    for r1, r2 in itertools.combinations(regions, 2):
        entry = {
            "words": [r1["words"], r2["words"]],
            "e1_pair": [r1["e1"], r2["e1"]],
        }
        if mode == TOP:
            overlap = arcs_interiors_overlap(r1["arc"], r2["arc"])
            entry["overlap"] = overlap
            if overlap > 1e-9:
                violations.append({**entry, "magnitude": overlap})
        else:
            t1 = (
                _chord_angles(r1["e1"]),
                _chord_angles(r1["arc"].start),
                _chord_angles(r1["arc"].end),
            )
            t2 = (
                _chord_angles(r2["e1"]),
                _chord_angles(r2["arc"].start),
                _chord_angles(r2["arc"].end),
            )
            crossed = triangles_interiors_overlap(t1, t2)
            entry["overlap"] = bool(crossed)
            if crossed:
                violations.append({**entry, "magnitude": 1.0})
        pairs.append(entry)
    # arcs are not JSON-serializable; flatten for the report
    for entry in pairs:
        entry.pop("arc", None)
    return AuditReport(mode=mode, tol=1e-9, pairs=tuple(pairs), violations=tuple(violations))
