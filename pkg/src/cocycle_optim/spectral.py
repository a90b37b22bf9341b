"""Brute-force extremal-exponent brackets and cocycle transforms.

Products over all words of a given length are enumerated level by level with
running renormalization (log norms accumulated separately), so only growth
rates are ever exponentiated.  Depths beyond direct enumeration are handled
by splitting each word into two halves and scanning all pairings.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BudgetError, DomainError
from .geom2 import Cocycle, inv2, validate_word

# Direct level enumeration cap (number of words held in memory at once).
DIRECT_CAP = 2**20
# Overall enumeration cap for split products.
TOTAL_CAP = 2**26


def _sv_bounds(batch: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized largest/smallest singular values of a (n,2,2) batch."""
    a = batch[:, 0, 0]
    b = batch[:, 0, 1]
    c = batch[:, 1, 0]
    d = batch[:, 1, 1]
    q = np.hypot((a + d) / 2.0, (c - b) / 2.0)
    r = np.hypot((a - d) / 2.0, (c + b) / 2.0)
    return q + r, np.abs(q - r)


def _spectral_radii(batch: np.ndarray) -> np.ndarray:
    """Vectorized spectral radii from trace and determinant."""
    tr = batch[:, 0, 0] + batch[:, 1, 1]
    det = batch[:, 0, 0] * batch[:, 1, 1] - batch[:, 0, 1] * batch[:, 1, 0]
    disc = tr * tr - 4.0 * det
    real = disc >= 0.0
    out = np.empty_like(tr)
    out[real] = (np.abs(tr[real]) + np.sqrt(disc[real])) / 2.0
    out[~real] = np.sqrt(np.abs(det[~real]))
    return out


def _iter_levels(c: Cocycle, n_max: int):
    """Yield (level, matrices, lognorms) for levels 1..n_max.

    ``matrices`` holds renormalized word products (unit Frobenius norm),
    ``lognorms`` the accumulated log of the factored-out scales, ordered so
    that index i encodes the word given by the base-k digits of i (most
    recent symbol in the highest digit).
    """
    gens = np.stack(c.generators)
    mats = gens.copy()
    scales = np.sqrt((mats * mats).sum(axis=(1, 2)))
    mats /= scales[:, None, None]
    logs = np.log(scales)
    yield 1, mats, logs
    for level in range(2, n_max + 1):
        if c.k ** level > DIRECT_CAP:
            return
        # new products: A_s @ P for each generator s and previous product P
        mats = np.matmul(gens[:, None], mats[None, :]).reshape(-1, 2, 2)
        logs = (logs[None, :] + np.zeros((c.k, 1))).reshape(-1)
        scales = np.sqrt((mats * mats).sum(axis=(1, 2)))
        mats /= scales[:, None, None]
        logs = logs + np.log(scales)
        yield level, mats, logs


def _norm_extremes_direct(c: Cocycle, n: int):
    for level, mats, logs in _iter_levels(c, n):
        if level == n:
            ops, _ = _sv_bounds(mats)
            lo = logs + np.log(ops)
            return float(lo.max()), float(lo.min())
    raise BudgetError(f"level {n} exceeds the direct enumeration cap")


def _norm_extremes_split(c: Cocycle, n: int):
    """Max/min log operator norm over length-n products via half products."""
    n1 = n // 2
    n2 = n - n1
    store = {}
    for level, mats, logs in _iter_levels(c, max(n1, n2)):
        if level in (n1, n2):
            store[level] = (mats.copy(), logs.copy())
    if n1 not in store or n2 not in store:
        raise BudgetError(f"depth {n} exceeds the enumeration budget")
    mats1, logs1 = store[n1]
    mats2, logs2 = store[n2]
    best_hi = -np.inf
    best_lo = np.inf
    for i in range(len(mats2)):
        prod = np.matmul(mats2[i], mats1)
        ops, _ = _sv_bounds(prod)
        vals = logs2[i] + logs1 + np.log(ops)
        best_hi = max(best_hi, float(vals.max()))
        best_lo = min(best_lo, float(vals.min()))
    return best_hi, best_lo


def _norm_extremes(c: Cocycle, n: int):
    if n < 1:
        raise DomainError("depth must be >= 1")
    total = c.k ** n
    if total <= DIRECT_CAP:
        return _norm_extremes_direct(c, n)
    if total <= TOTAL_CAP:
        return _norm_extremes_split(c, n)
    raise BudgetError(f"k^n = {total} exceeds the enumeration cap {TOTAL_CAP}")


@dataclass(frozen=True)
class ExponentBracket:
    lower: float
    upper: float
    depth: int

    def __post_init__(self):
        if self.lower > self.upper + 1e-9:
            raise DomainError("bracket lower bound exceeds upper bound")

    def width(self) -> float:
        return self.upper - self.lower

    def contains(self, x: float, slack: float = 1e-9) -> bool:
        return self.lower - slack <= x <= self.upper + slack


def periodic_exponent(c: Cocycle, word) -> float:
    """Top Lyapunov exponent of the periodic orbit on word^inf.

    Equals (1/|word|) log of the spectral radius of the word product,
    computed from trace and determinant with renormalization.
    """
    w = validate_word(word, c.k)
    if not w:
        raise DomainError("periodic exponent needs a nonempty word")
    p = np.eye(2)
    acc = 0.0
    for s in w:
        p = c.generator(s) @ p
        scale = math.sqrt((p * p).sum())
        p /= scale
        acc += math.log(scale)
    rho = float(_spectral_radii(p[None])[0])
    if rho <= 0.0:
        # nilpotent cannot happen for invertible factors; guard anyway
        raise DomainError("zero spectral radius")
    return (acc + math.log(rho)) / len(w)


def _best_periodic(c: Cocycle, n: int, want_max: bool) -> float:
    """Extremal periodic exponent over all words of length <= min(n, direct cap)."""
    best = -np.inf if want_max else np.inf
    for level, mats, logs in _iter_levels(c, n):
        rho = _spectral_radii(mats)
        ok = rho > 0.0
        vals = (logs[ok] + np.log(rho[ok])) / level
        if vals.size:
            v = float(vals.max() if want_max else vals.min())
            best = max(best, v) if want_max else min(best, v)
    return best


def jsr_bracket(c: Cocycle, n: int) -> ExponentBracket:
    """Bracket for the top extremal exponent (log joint spectral radius).

    Upper bound: (1/n) log of the maximal operator norm over all length-n
    words.  Lower bound: the best periodic exponent over words of length at
    most n (capped at the direct enumeration depth).
    """
    hi, _ = _norm_extremes(c, n)
    upper = hi / n
    lower = _best_periodic(c, n, want_max=True)
    return ExponentBracket(lower=lower, upper=upper, depth=n)


def jssr_upper(c: Cocycle, n: int) -> float:
    """Upper bound for the bottom extremal exponent (log joint spectral subradius).

    The minimum of (1/n) log of the minimal word norm at depth n and the
    best (smallest) periodic exponent over words of length at most n.  No
    finite-depth lower bound exists in general, so this is one-sided.
    """
    _, lo = _norm_extremes(c, n)
    periodic = _best_periodic(c, n, want_max=False)
    return min(lo / n, periodic)


def inverse_cocycle(c: Cocycle) -> Cocycle:
    """Generator-wise inverses; swaps and negates the exponent pair.

    The top/bottom exponents of the second singular direction of the
    original cocycle are the negated bottom/top exponents of this one.
    """
    return Cocycle([inv2(g) for g in c.generators])


def normalize_cocycle(c: Cocycle) -> Cocycle:
    """Rescale every generator to unit |det|.

    The top exponent of the result is half the extremal nonconformality
    (lambda_1 - lambda_2) of the original cocycle.
    """
    out = []
    for g in c.generators:
        d = abs(g[0, 0] * g[1, 1] - g[0, 1] * g[1, 0])
        out.append(np.asarray(g) / math.sqrt(d))
    return Cocycle(out)
