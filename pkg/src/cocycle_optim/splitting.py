"""Domination certificates and finite-depth invariant-direction estimates.

A certificate wraps a forward-invariant multicone with its complementary
multicone, an empirically sampled contraction factor for the adapted metric,
the angle-comparison constant, and the two non-overlap flags.  The invariant
directions are bracketed by pushing the (complementary) multicone through a
finite past (future), which shrinks geometrically under the certificate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import multicone as mcm
from . import spectral
from .errors import CertificateError, DomainError
from .geom2 import PI, Cocycle, angle, angle_gap_ccw, proj_point, validate_word
from .multicone import (
    AdaptedMetric,
    Multicone,
    ProjInterval,
    build_adapted_metric,
    check_noc,
    complementary,
    contraction_factor,
    find_multicone,
    interval_image,
    inverse_generators,
    is_forward_invariant,
)


@dataclass(frozen=True)
class DominationCertificate:
    multicone: Multicone
    complementary: Multicone
    tau: float
    c1: float
    noc_forward: bool
    noc_backward: bool
    metric: AdaptedMetric

    def __post_init__(self):
        if not self.tau < 1.0:
            raise CertificateError(f"contraction factor must be < 1, got {self.tau}")
        if not self.c1 >= 1.0:
            raise CertificateError(f"comparison constant must be >= 1, got {self.c1}")


@dataclass(frozen=True)
class DirectionEstimate:
    """An invariant direction bracketed by an arc: midpoint and half-width."""

    direction: float
    radius: float

    def interval(self) -> ProjInterval:
        return ProjInterval(self.direction - self.radius, max(2.0 * self.radius, 1e-15))

    def overlaps(self, other: "DirectionEstimate") -> bool:
        return angle(self.direction, other.direction) <= self.radius + other.radius


def _angles_between(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    d = np.abs(np.mod(p, PI) - np.mod(q, PI))
    return np.minimum(d, PI - d)


def _comparison_constant(metric: AdaptedMetric, samples: int = 512, seed: int = 1) -> float:
    """Empirical c1 >= 1 with d/c1 <= angle-distance <= c1*d on sampled pairs."""
    mc = metric.multicone
    rng = np.random.default_rng(seed)
    c1 = 1.0
    for j, iv in enumerate(mc.intervals):
        ts = rng.uniform(1e-6, 1.0 - 1e-6, size=(2, samples))
        keep = np.abs(ts[0] - ts[1]) > 1e-9
        p = np.mod(iv.start + ts[0, keep] * iv.length, PI)
        q = np.mod(iv.start + ts[1, keep] * iv.length, PI)
        d = metric.scale * mcm._hilbert_distance(metric.domains[j], p, q)
        a = _angles_between(p, q)
        c1 = max(c1, float((d / a).max()), float((a / d).max()))
    if mc.n_components > 1:
        for ja in range(mc.n_components):
            for jb in range(ja + 1, mc.n_components):
                iva, ivb = mc.intervals[ja], mc.intervals[jb]
                ts = rng.uniform(0.0, 1.0, size=(2, 32))
                p = np.mod(iva.start + ts[0] * iva.length, PI)
                q = np.mod(ivb.start + ts[1] * ivb.length, PI)
                d = float(metric.steps_apart[ja, jb])
                a = _angles_between(p, q)
                c1 = max(c1, float((d / a).max()), float((a / d).max()))
    return c1


def certify_domination(
    c: Cocycle, budget: int = 200, samples: int = 2048, seed: int = 0
):
    """Try to certify domination; returns a DominationCertificate or None.

    None is inconclusive: the seed-and-hull multicone search is not complete.
    Callers wanting a diagnostic should inspect nonconformality_min, which is
    identically zero for conformal (hence undominated) cocycles.
    """
    mc = find_multicone(c, budget=budget)
    if mc is None:
        return None
    metric = build_adapted_metric(mc, c)
    tau = contraction_factor(metric, c, samples=samples, seed=seed)
    if not tau < 1.0:
        return None
    c1 = _comparison_constant(metric)
    noc_f = check_noc(c, mc, mcm.FORWARD)
    noc_b = check_noc(c, mc, mcm.BACKWARD)
    if not noc_b:
        # the non-overlap condition is existential over multicones: the
        # complementary multicone may fail as a witness while a dedicated
        # invariant multicone of the inverse tuple certifies it
        inv = inverse_generators(c)
        mci = find_multicone(inv, budget=budget)
        if mci is not None and is_forward_invariant(mci, inv):
            noc_b = check_noc(inv, mci, mcm.FORWARD)
    return DominationCertificate(
        multicone=mc,
        complementary=complementary(mc),
        tau=tau,
        c1=c1,
        noc_forward=noc_f,
        noc_backward=noc_b,
        metric=metric,
    )


def nonconformality_min(c: Cocycle, n: int) -> float:
    """(1/n) log of the least norm/mininorm ratio over all length-n words.

    A nonincreasing-in-n sequence of upper bounds for the extremal
    nonconformality gap; identically zero for tuples of conformal matrices.
    Equals twice the minimal normalized-product norm exponent.
    """
    if n < 1:
        raise DomainError("depth must be >= 1")
    norm = spectral.normalize_cocycle(c)
    _, lo = spectral._norm_extremes(norm, n)
    # |P|/m(P) = |P_norm|^2 for the unit-determinant rescaling
    return 2.0 * lo / n


def _push_arcs(arcs, matrices):
    """Apply a sequence of matrices to a list of arcs, merging touching images."""
    current = list(arcs)
    for m in matrices:
        current = [interval_image(iv, m) for iv in current]
        merged = mcm.merge_arcs(current, gap=0.0)
        if merged is None:
            raise CertificateError("pushed arcs cover the whole circle")
        current = merged
    return current


def _enclosing_arc(arcs):
    """Smallest arc containing a list of disjoint arcs (drop the largest gap)."""
    if len(arcs) == 1:
        return arcs[0]
    arcs = sorted(arcs, key=lambda iv: iv.start)
    gaps = [
        angle_gap_ccw(arcs[i].end, arcs[(i + 1) % len(arcs)].start)
        for i in range(len(arcs))
    ]
    i = int(np.argmax(gaps))
    j = (i + 1) % len(arcs)
    length = PI - gaps[i]
    return ProjInterval(arcs[j].start, min(length, PI - 1e-12))


def _summarize(arcs) -> DirectionEstimate:
    hull = _enclosing_arc(arcs)
    return DirectionEstimate(direction=hull.midpoint, radius=hull.length / 2.0)


def e1_estimate(cert: DominationCertificate, c: Cocycle, past) -> DirectionEstimate:
    """Bracket the past-determined invariant direction e1.

    The multicone is pushed through the past word (oldest symbol first); the
    resulting arcs nest as the past grows and shrink geometrically at the
    certificate's contraction rate.
    """
    w = validate_word(past, c.k)
    if not w:
        raise DomainError("e1 estimate needs a nonempty past")
    if not is_forward_invariant(cert.multicone, c):
        raise CertificateError("certificate multicone is not forward invariant")
    mats = [c.generator(s) for s in w]
    arcs = _push_arcs(cert.multicone.intervals, mats)
    return _summarize(arcs)


def e2_estimate(cert: DominationCertificate, c: Cocycle, future) -> DirectionEstimate:
    """Bracket the future-determined direction e2.

    Same nesting applied to the complementary multicone under the inverse
    generators, newest symbol of the future applied first.
    """
    w = validate_word(future, c.k)
    if not w:
        raise DomainError("e2 estimate needs a nonempty future")
    inv = inverse_generators(c)
    if not is_forward_invariant(cert.complementary, inv):
        raise CertificateError("complementary multicone is not backward invariant")
    mats = [inv.generator(s) for s in reversed(w)]
    arcs = _push_arcs(cert.complementary.intervals, mats)
    return _summarize(arcs)


def _periodic_push(arcs, mats, reps: int, stop_radius: float) -> DirectionEstimate:
    est = None
    for _ in range(reps):
        arcs = _push_arcs(arcs, mats)
        est = _summarize(arcs)
        if est.radius < stop_radius:
            break
    return est


def periodic_e1(
    cert: DominationCertificate, c: Cocycle, word, depth: int = 120, stop_radius: float = 1e-12
) -> DirectionEstimate:
    """e1 of the periodic point word^inf, deepening the past until converged."""
    w = validate_word(word, c.k)
    if not w:
        raise DomainError("need a nonempty word")
    reps = max(1, math.ceil(depth / len(w)))
    mats = [c.generator(s) for s in w]
    return _periodic_push(cert.multicone.intervals, mats, reps, stop_radius)


def periodic_e2(
    cert: DominationCertificate, c: Cocycle, word, depth: int = 120, stop_radius: float = 1e-12
) -> DirectionEstimate:
    """e2 of the periodic point word^inf, deepening the future until converged."""
    w = validate_word(word, c.k)
    if not w:
        raise DomainError("need a nonempty word")
    reps = max(1, math.ceil(depth / len(w)))
    inv = inverse_generators(c)
    mats = [inv.generator(s) for s in reversed(w)]
    return _periodic_push(cert.complementary.intervals, mats, reps, stop_radius)
