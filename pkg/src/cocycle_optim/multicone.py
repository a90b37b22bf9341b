"""Multicones: disjoint unions of closed projective arcs.

An arc is the set of directions swept counterclockwise from ``start`` over
``length`` < pi.  Forward invariance (all generator images strictly inside),
complementary multicones, non-overlap checks, a seed-and-hull multicone
search, and the adapted contraction metric live here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import geom2
from .errors import CertificateError, DomainError
from .geom2 import PI, Cocycle, angle_gap_ccw, inv2, proj_act, proj_point

FORWARD = "forward"
BACKWARD = "backward"

# Minimal clearance for "strictly inside" tests.
INTERIOR_CLEARANCE = 1e-9


@dataclass(frozen=True)
class ProjInterval:
    """Closed arc of directions from ``start`` counterclockwise over ``length``."""

    start: float
    length: float

    def __post_init__(self):
        if not 0.0 < self.length < PI:
            raise DomainError(f"arc length must be in (0, pi), got {self.length}")
        object.__setattr__(self, "start", proj_point(self.start))

    @property
    def end(self) -> float:
        return proj_point(self.start + self.length)

    @property
    def midpoint(self) -> float:
        return proj_point(self.start + self.length / 2.0)

    def offset_of(self, theta: float) -> float:
        """Counterclockwise offset of theta from start, in [0, pi)."""
        return angle_gap_ccw(self.start, proj_point(theta))

    def contains(self, theta: float, slack: float = 0.0) -> bool:
        return self.offset_of(theta) <= self.length + slack

    def contains_interval(self, other: "ProjInterval", clearance: float = 0.0) -> bool:
        """True if other lies inside self with the given clearance at both ends."""
        off = self.offset_of(other.start)
        return off >= clearance and off + other.length <= self.length - clearance

    def sample(self, n: int) -> np.ndarray:
        """n angles evenly spaced over the closed arc (endpoints included)."""
        ts = np.linspace(0.0, self.length, n)
        return np.mod(self.start + ts, PI)


def interval_image(interval: ProjInterval, m) -> ProjInterval:
    """Image arc under the projective action of an invertible matrix.

    Endpoints map to endpoints; the image of the midpoint picks which of the
    two candidate arcs between them is the true image.
    """
    a = proj_act(m, interval.start)
    b = proj_act(m, interval.end)
    mid = proj_act(m, interval.midpoint)
    len_ab = angle_gap_ccw(a, b)
    if len_ab < 1e-15 or (PI - len_ab) < 1e-15:
        # endpoints (anti)coincide numerically; fall back to a tiny arc at mid
        return ProjInterval(mid - 5e-16, 1e-15)
    cand = ProjInterval(a, len_ab)
    if cand.contains(mid, slack=1e-12):
        return cand
    return ProjInterval(b, PI - len_ab)


@dataclass(frozen=True)
class Multicone:
    """Nonempty list of pairwise-disjoint closed arcs, sorted by start angle."""

    intervals: tuple

    def __init__(self, intervals):
        arcs = tuple(sorted(intervals, key=lambda iv: iv.start))
        if not arcs:
            raise DomainError("a multicone needs at least one arc")
        for i, iv in enumerate(arcs):
            nxt = arcs[(i + 1) % len(arcs)]
            if len(arcs) > 1 and angle_gap_ccw(iv.start, nxt.start) <= iv.length:
                raise DomainError("multicone arcs must be pairwise disjoint")
        object.__setattr__(self, "intervals", arcs)

    @property
    def n_components(self) -> int:
        return len(self.intervals)

    def total_length(self) -> float:
        return sum(iv.length for iv in self.intervals)

    def component_of(self, theta: float, slack: float = 0.0):
        """Index of the arc containing theta, or None."""
        for j, iv in enumerate(self.intervals):
            if iv.contains(theta, slack=slack):
                return j
        return None

    def contains(self, theta: float, slack: float = 0.0) -> bool:
        return self.component_of(theta, slack=slack) is not None


def merge_arcs(arcs, gap: float = 0.0):
    """Union of arcs on the circle, merging overlaps and gaps up to ``gap``.

    Returns a list of disjoint ProjIntervals, or None if the union covers
    (numerically) all of P^1.
    """
    if not arcs:
        return []
    items = sorted(((iv.start, iv.length) for iv in arcs))
    merged = [list(items[0])]
    for s, ln in items[1:]:
        ms, mln = merged[-1]
        if s - (ms + mln) <= gap:
            merged[-1][1] = max(mln, s + ln - ms)
        else:
            merged.append([s, ln])
    # wraparound: last arc may spill past pi into the first
    if len(merged) > 1:
        fs, fln = merged[0]
        ls, lln = merged[-1]
        if (ls + lln) - PI >= fs - gap:
            merged[0] = [ls, max(lln, (fs + fln) - ls + PI)]
            merged.pop()
    s, ln = merged[0]
    if ln >= PI - 1e-12:
        return None
    return [ProjInterval(s, min(ln, PI - 1e-9)) for s, ln in merged]


def mc_image(mc: Multicone, m) -> Multicone:
    """Componentwise projective image of a multicone under an invertible matrix."""
    return Multicone([interval_image(iv, m) for iv in mc.intervals])


def is_forward_invariant(mc: Multicone, c: Cocycle, clearance: float = INTERIOR_CLEARANCE) -> bool:
    """Every generator image arc sits inside the open interior of some arc of mc."""
    for g in c.generators:
        for iv in mc.intervals:
            img = interval_image(iv, g)
            if not any(host.contains_interval(img, clearance=clearance) for host in mc.intervals):
                return False
    return True


def complementary(mc: Multicone) -> Multicone:
    """Closure of the complement: the closed gap arcs between consecutive arcs."""
    arcs = mc.intervals
    if len(arcs) == 1:
        iv = arcs[0]
        return Multicone([ProjInterval(iv.end, PI - iv.length)])
    gaps = []
    for i, iv in enumerate(arcs):
        nxt = arcs[(i + 1) % len(arcs)]
        gap = angle_gap_ccw(iv.end, nxt.start)
        gaps.append(ProjInterval(iv.end, gap))
    return Multicone(gaps)


def inverse_generators(c: Cocycle) -> Cocycle:
    return Cocycle([inv2(g) for g in c.generators])


def check_noc(c: Cocycle, mc: Multicone, direction: str) -> bool:
    """Non-overlapping condition: distinct generator images are disjoint.

    ``forward`` checks generator images of mc (which must be forward
    invariant); ``backward`` checks inverse-generator images of the
    complementary multicone.
    """
    if direction == FORWARD:
        cocycle, cone = c, mc
        if not is_forward_invariant(mc, c):
            raise CertificateError("forward NOC requires a forward-invariant multicone")
    elif direction == BACKWARD:
        cocycle, cone = inverse_generators(c), complementary(mc)
        if not is_forward_invariant(cone, cocycle):
            raise CertificateError(
                "backward NOC requires the complementary multicone to be "
                "invariant under the inverse generators"
            )
    else:
        raise DomainError(f"direction must be 'forward' or 'backward', got {direction!r}")

    images = [mc_image(cone, g) for g in cocycle.generators]
    for i in range(len(images)):
        for j in range(i + 1, len(images)):
            for a in images[i].intervals:
                for b in images[j].intervals:
                    if a.contains(b.start) or b.contains(a.start):
                        return False
    return True


# ---------------------------------------------------------------------------
# Multicone search
# ---------------------------------------------------------------------------


def _attracting_directions(c: Cocycle, max_len: int = 4):
    """Attracting eigendirections of all word products up to max_len."""
    dirs = []
    words = [()]
    for _ in range(max_len):
        words = [w + (s,) for w in words for s in range(1, c.k + 1)]
        for w in words:
            p = c.product(w)
            tr = p[0, 0] + p[1, 1]
            det = geom2.det2(p)
            disc = tr * tr - 4.0 * det
            if disc <= 0.0:
                continue
            sq = math.sqrt(disc)
            lam1 = (tr + sq) / 2.0
            lam2 = (tr - sq) / 2.0
            if abs(lam1) < abs(lam2):
                lam1, lam2 = lam2, lam1
            if abs(lam1) <= abs(lam2) * (1.0 + 1e-9):
                continue
            # eigenvector of lam1; pick the better conditioned formula
            v1 = np.array([p[0, 1], lam1 - p[0, 0]])
            v2 = np.array([lam1 - p[1, 1], p[1, 0]])
            v = v1 if np.linalg.norm(v1) >= np.linalg.norm(v2) else v2
            if np.linalg.norm(v) == 0.0:
                continue
            dirs.append(geom2.proj_of_vector(v))
    return dirs


def _pad_arcs(arcs, pad: float):
    """Grow every arc by pad on each side, capped by a third of each gap."""
    n = len(arcs)
    out = []
    for i, iv in enumerate(arcs):
        if n == 1:
            gap_before = gap_after = PI - iv.length
        else:
            prev = arcs[(i - 1) % n]
            nxt = arcs[(i + 1) % n]
            gap_before = angle_gap_ccw(prev.end, iv.start)
            gap_after = angle_gap_ccw(iv.end, nxt.start)
        lo = min(pad, gap_before / 3.0)
        hi = min(pad, gap_after / 3.0)
        new_len = iv.length + lo + hi
        if new_len >= PI - 1e-9:
            return None
        out.append(ProjInterval(iv.start - lo, new_len))
    try:
        return Multicone(out)
    except DomainError:
        return None


def _cap_components(arcs, limit: int):
    """Merge across the smallest gaps until at most ``limit`` arcs remain."""
    arcs = list(arcs)
    while len(arcs) > limit:
        gaps = [
            angle_gap_ccw(arcs[i].end, arcs[(i + 1) % len(arcs)].start)
            for i in range(len(arcs))
        ]
        i = int(np.argmin(gaps))
        j = (i + 1) % len(arcs)
        bridged = ProjInterval(
            arcs[i].start, min(arcs[i].length + gaps[i] + arcs[j].length, PI - 1e-9)
        )
        rest = [arcs[t] for t in range(len(arcs)) if t not in (i, j)]
        merged = merge_arcs(rest + [bridged], gap=0.0)
        if merged is None:
            return None
        arcs = merged
    return arcs


def find_multicone(c: Cocycle, budget: int = 200):
    """Search for a forward-invariant multicone by seed-and-hull iteration.

    Seeds are small arcs around the attracting eigendirections of all short
    word products; each round adjoins the generator images to the running
    union, merging arcs that touch and keeping at most k^2 components.  The
    first padded candidate that passes the strict invariance test is
    returned.  Returning None is inconclusive, not a disproof of domination.
    """
    seed_halfwidth = 1e-3
    dirs = _attracting_directions(c)
    if not dirs:
        return None
    arcs = merge_arcs(
        [ProjInterval(d - seed_halfwidth, 2 * seed_halfwidth) for d in dirs], gap=0.0
    )
    limit = max(c.k * c.k, 1)
    pads = (1e-6, 1e-4, 1e-3, 1e-2)
    for _ in range(budget):
        if arcs is None:
            return None
        arcs = _cap_components(arcs, limit)
        if arcs is None:
            return None
        for pad in pads:
            cand = _pad_arcs(arcs, pad)
            if cand is not None and is_forward_invariant(cand, c):
                return cand
        images = [interval_image(iv, g) for g in c.generators for iv in arcs]
        new_arcs = merge_arcs(list(arcs) + images, gap=1e-6)
        if new_arcs is not None and [
            (iv.start, iv.length) for iv in new_arcs
        ] == [(iv.start, iv.length) for iv in arcs]:
            # stalled: union is stable but no pad certifies; widen pads once
            pads = tuple(p * 10 for p in pads)
        arcs = new_arcs
    return None


# ---------------------------------------------------------------------------
# Adapted metric
# ---------------------------------------------------------------------------


def _hilbert_distance(arc: ProjInterval, p, q):
    """Hilbert metric of the open arc at interior points p, q.

    Half the log of the 4-point cross-ratio of (start, p, q, end); additive
    along the arc and blowing up at the endpoints.  Accepts arrays.
    """
    tp = np.mod(np.asarray(p) - arc.start, PI)
    tq = np.mod(np.asarray(q) - arc.start, PI)
    num = np.sin(tq) * np.sin(arc.length - tp)
    den = np.sin(tp) * np.sin(arc.length - tq)
    if np.any(den <= 0.0) or np.any(num <= 0.0):
        raise DomainError("Hilbert distance needs interior points of the arc")
    out = 0.5 * np.abs(np.log(num / den))
    return float(out) if out.ndim == 0 else out


class AdaptedMetric:
    """Contraction metric on the projectivized multicone.

    Within a component: the Hilbert metric of a slightly enlarged arc,
    rescaled so sampled diameters stay at or below 1/2.  Across components:
    the least number of cocycle steps guaranteed to bring the pair into a
    single component (always an integer >= 1).
    """

    def __init__(self, multicone: Multicone, domains, scale: float, steps_apart: np.ndarray):
        self.multicone = multicone
        self.domains = tuple(domains)  # enlarged Hilbert arcs, one per component
        self.scale = scale
        self.steps_apart = steps_apart  # cross-component integer distances

    def component_of(self, theta: float) -> int:
        j = self.multicone.component_of(theta, slack=1e-12)
        if j is None:
            raise DomainError(f"direction {theta} is outside the multicone")
        return j

    def distance(self, p: float, q: float) -> float:
        jp = self.component_of(p)
        jq = self.component_of(q)
        if jp != jq:
            return float(self.steps_apart[jp, jq])
        if geom2.angle(p, q) < 1e-300:
            return 0.0
        return self.scale * _hilbert_distance(self.domains[jp], p, q)


def _component_transition(mc: Multicone, c: Cocycle) -> np.ndarray:
    """sigma[i, j] = component of mc receiving generator i's image of component j."""
    sigma = np.zeros((c.k, mc.n_components), dtype=int)
    for gi, g in enumerate(c.generators):
        for j, iv in enumerate(mc.intervals):
            img = interval_image(iv, g)
            host = mc.component_of(img.midpoint, slack=1e-12)
            if host is None:
                raise CertificateError("image escapes the multicone; invalid certificate")
            sigma[gi, j] = host
    return sigma


def _steps_apart_matrix(mc: Multicone, c: Cocycle) -> np.ndarray:
    """Least n such that all n-step images of the two components coincide."""
    nc = mc.n_components
    sigma = _component_transition(mc, c)
    ell = np.zeros((nc, nc))
    if nc == 1:
        return ell
    ell[:] = np.inf
    np.fill_diagonal(ell, 0.0)
    cap = nc * nc + 1
    for _ in range(cap + 1):
        nxt = ell.copy()
        for a in range(nc):
            for b in range(nc):
                if a == b:
                    continue
                worst = 0.0
                for gi in range(c.k):
                    worst = max(worst, ell[sigma[gi, a], sigma[gi, b]])
                nxt[a, b] = 1.0 + worst
        if np.array_equal(nxt, ell):
            break
        ell = nxt
    if not np.all(np.isfinite(ell)):
        raise CertificateError("components never merge under the cocycle; invalid certificate")
    return ell


def build_adapted_metric(mc: Multicone, c: Cocycle) -> AdaptedMetric:
    """Adapted metric of a forward-invariant multicone.

    Each component is placed inside an enlarged arc carrying its Hilbert
    metric; the enlargement is shrunk until the enlarged multicone is itself
    forward invariant, which keeps all generator images uniformly inside the
    Hilbert domains.
    """
    if not is_forward_invariant(mc, c):
        raise CertificateError("adapted metric requires a forward-invariant multicone")
    pad = 0.05
    domains_mc = None
    for _ in range(60):
        cand = _pad_arcs(mc.intervals, pad)
        if cand is not None and cand.n_components == mc.n_components and is_forward_invariant(
            cand, c, clearance=0.0
        ):
            domains_mc = cand
            break
        pad /= 2.0
    if domains_mc is None:
        raise CertificateError("could not enlarge the multicone for the Hilbert metric")

    # rescale so the sampled within-component diameter is <= 1/2
    diam = 0.0
    for iv, dom in zip(mc.intervals, domains_mc.intervals):
        lo = iv.start
        hi = iv.end
        diam = max(diam, _hilbert_distance(dom, lo, hi))
    scale = 1.0 if diam <= 0.5 else 0.5 / diam

    steps = _steps_apart_matrix(mc, c)
    return AdaptedMetric(mc, domains_mc.intervals, scale, steps)


def _batch_images(g, angles):
    vecs = g @ np.stack([np.cos(angles), np.sin(angles)])
    return np.mod(np.arctan2(vecs[1], vecs[0]), PI)


def contraction_factor(metric: AdaptedMetric, c: Cocycle, samples: int = 4096, seed: int = 0) -> float:
    """Empirical supremum of d(A_i x, A_i y)/d(x, y) over sampled pairs.

    A value below 1 supports the certificate; values >= 1 are returned as-is
    for the caller to reject.  The sample is a fixed seeded set so the
    reduction is deterministic.
    """
    mc = metric.multicone
    sigma = _component_transition(mc, c)
    rng = np.random.default_rng(seed)
    worst = 0.0
    for j, iv in enumerate(mc.intervals):
        margin = min(1e-9, iv.length * 1e-6)
        ts = rng.uniform(margin, iv.length - margin, size=(2, samples))
        keep = np.abs(ts[0] - ts[1]) > 1e-12
        p = np.mod(iv.start + ts[0, keep], PI)
        q = np.mod(iv.start + ts[1, keep], PI)
        d0 = metric.scale * _hilbert_distance(metric.domains[j], p, q)
        for gi, g in enumerate(c.generators):
            host = metric.domains[sigma[gi, j]]
            d1 = metric.scale * _hilbert_distance(host, _batch_images(g, p), _batch_images(g, q))
            worst = max(worst, float((d1 / d0).max()))
    if mc.n_components > 1:
        for a in range(mc.n_components):
            for b in range(a + 1, mc.n_components):
                iva, ivb = mc.intervals[a], mc.intervals[b]
                ts = rng.uniform(0.05, 0.95, size=(2, 64))
                p = np.mod(iva.start + ts[0] * iva.length, PI)
                q = np.mod(ivb.start + ts[1] * ivb.length, PI)
                d0 = float(metric.steps_apart[a, b])
                for gi, g in enumerate(c.generators):
                    ja, jb = sigma[gi, a], sigma[gi, b]
                    pi_, qi_ = _batch_images(g, p), _batch_images(g, q)
                    if ja == jb:
                        d1 = metric.scale * _hilbert_distance(metric.domains[ja], pi_, qi_)
                        worst = max(worst, float(d1.max()) / d0)
                    else:
                        worst = max(worst, float(metric.steps_apart[ja, jb]) / d0)
    return worst
