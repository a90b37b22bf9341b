"""2x2 linear algebra and projective geometry on the circle P^1.

Lines through the origin are parametrized by an angle theta in [0, pi):
the point `theta` is the line spanned by (cos theta, sin theta).  All
angle arithmetic is mod pi.  Matrices are plain 2x2 float64 numpy arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DegenerateError, DomainError

PI = math.pi

# Determinants below this are treated as singular.
SINGULAR_TOL = 1e-12

# Cross-ratio denominators below this return infinity.
CROSS_RATIO_DENOM_TOL = 1e-12


def mat2(a: float, b: float, c: float, d: float) -> np.ndarray:
    """Row-major 2x2 matrix for the linear map (x,y) -> (ax+by, cx+dy)."""
    return np.array([[a, b], [c, d]], dtype=float)


def as_mat2(m) -> np.ndarray:
    m = np.asarray(m, dtype=float)
    if m.shape != (2, 2):
        raise DomainError(f"expected a 2x2 matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise DomainError("matrix entries must be finite")
    return m


def det2(m) -> float:
    m = as_mat2(m)
    return float(m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0])


def inv2(m) -> np.ndarray:
    """Exact-as-possible inverse of a 2x2 matrix."""
    m = as_mat2(m)
    d = det2(m)
    if abs(d) <= SINGULAR_TOL:
        raise DomainError("matrix is singular")
    return np.array([[m[1, 1], -m[0, 1]], [-m[1, 0], m[0, 0]]]) / d


def _qr_split(m: np.ndarray) -> tuple[float, float]:
    # Stable closed-form 2x2 singular values: sigma = (q + r, |q - r|).
    a, b = m[0, 0], m[0, 1]
    c, d = m[1, 0], m[1, 1]
    q = math.hypot((a + d) / 2.0, (c - b) / 2.0)
    r = math.hypot((a - d) / 2.0, (c + b) / 2.0)
    return q, r


def op_norm(m) -> float:
    """Largest singular value (Euclidean operator norm)."""
    q, r = _qr_split(as_mat2(m))
    return q + r


def mininorm(m) -> float:
    """Smallest singular value, equal to 1/op_norm(inverse)."""
    m = as_mat2(m)
    if abs(det2(m)) <= SINGULAR_TOL:
        raise DomainError("mininorm requires an invertible matrix")
    q, r = _qr_split(m)
    return abs(q - r)


def hs_norm(m) -> float:
    """Hilbert-Schmidt (Frobenius) norm, sqrt(trace M^T M)."""
    m = as_mat2(m)
    return float(np.sqrt((m * m).sum()))


def proj_point(theta: float) -> float:
    """Canonical representative of a direction: theta mod pi in [0, pi)."""
    t = math.fmod(float(theta), PI)
    if t < 0.0:
        t += PI
    if t >= PI:  # fmod can round up to pi
        t -= PI
    return t


def unit_vector(theta: float) -> np.ndarray:
    return np.array([math.cos(theta), math.sin(theta)])


def proj_of_vector(v) -> float:
    v = np.asarray(v, dtype=float)
    if v.shape != (2,) or not np.any(v):
        raise DomainError("need a nonzero 2-vector")
    return proj_point(math.atan2(v[1], v[0]))


def proj_act(m, p: float) -> float:
    """Direction of M.(cos p, sin p), canonicalized into [0, pi)."""
    m = as_mat2(m)
    if abs(det2(m)) <= SINGULAR_TOL:
        raise DomainError("projective action requires an invertible matrix")
    w = m @ unit_vector(p)
    return proj_of_vector(w)


def angle(p: float, q: float) -> float:
    """Unoriented angle between two lines, in [0, pi/2]."""
    d = abs(proj_point(p) - proj_point(q))
    d = min(d, PI - d)
    return min(d, PI / 2.0)  # clamp rounding at d == pi/2


def angle_gap_ccw(p: float, q: float) -> float:
    """Counterclockwise distance from p to q on the circle [0, pi)."""
    d = math.fmod(q - p, PI)
    if d < 0.0:
        d += PI
    return d


def cross_ratio(x1: float, y1: float, x2: float, y2: float) -> float:
    """Projective cross-ratio [x1, y1; x2, y2] of four directions.

    Computed as (x1 X x2)/(x1 X y2) * (y1 X y2)/(y1 X x2) with unit
    representatives, so each cross product is the sine of an angle gap.
    Returns math.inf when a denominator (numerically) vanishes.
    """
    pts = [proj_point(t) for t in (x1, y1, x2, y2)]
    # no three of the four directions may coincide
    for i in range(4):
        coincident = sum(1 for j in range(4) if angle(pts[i], pts[j]) < 1e-14)
        if coincident >= 3:
            raise DegenerateError("cross-ratio undefined: three coincident directions")
    tx1, ty1, tx2, ty2 = pts
    num = math.sin(tx2 - tx1) * math.sin(ty2 - ty1)
    den = math.sin(ty2 - tx1) * math.sin(tx2 - ty1)
    if abs(den) < CROSS_RATIO_DENOM_TOL:
        return math.inf
    return num / den


class Configuration(Enum):
    ANTIPARALLEL = "antiparallel"
    COPARALLEL = "coparallel"
    CROSSING = "crossing"
    DEGENERATE = "degenerate"


def classify_configuration(x1: float, y1: float, x2: float, y2: float) -> Configuration:
    """Classify the 4-tuple of directions by its cross-ratio.

    Antiparallel iff cr < 0, coparallel iff 0 < cr < 1, crossing iff cr > 1;
    coincident points or cr in {0, 1, inf} are degenerate.
    """
    pts = [proj_point(t) for t in (x1, y1, x2, y2)]
    for i in range(4):
        for j in range(i + 1, 4):
            if angle(pts[i], pts[j]) < 1e-12:
                return Configuration.DEGENERATE
    try:
        cr = cross_ratio(x1, y1, x2, y2)
    except DegenerateError:
        return Configuration.DEGENERATE
    if math.isinf(cr) or abs(cr) < CROSS_RATIO_DENOM_TOL or abs(cr - 1.0) < CROSS_RATIO_DENOM_TOL:
        return Configuration.DEGENERATE
    if cr < 0.0:
        return Configuration.ANTIPARALLEL
    if cr < 1.0:
        return Configuration.COPARALLEL
    return Configuration.CROSSING


def fiber_log_derivative(b, x: float) -> float:
    """Derivative factor of the circle map induced by B at the direction x.

    Equals |det B| * (|Bv|/|v|)^-2 for any representative v, which is the
    limit of angle(Bx, By)/angle(x, y) as y -> x.
    """
    b = as_mat2(b)
    d = abs(det2(b))
    if d <= SINGULAR_TOL:
        raise DomainError("fiber derivative requires an invertible matrix")
    growth = float(np.linalg.norm(b @ unit_vector(x)))
    return d / (growth * growth)


@dataclass(frozen=True)
class Cocycle:
    """A k-tuple of invertible 2x2 matrices driving a one-step cocycle.

    Symbols are 1-based: symbol i selects ``generators[i-1]``.
    """

    generators: tuple

    def __init__(self, generators):
        mats = tuple(as_mat2(g) for g in generators)
        if len(mats) < 1:
            raise DomainError("a cocycle needs at least one generator")
        for i, g in enumerate(mats):
            if abs(det2(g)) <= SINGULAR_TOL:
                raise DomainError(f"generator {i + 1} is singular")
        for g in mats:
            g.setflags(write=False)
        object.__setattr__(self, "generators", mats)

    @property
    def k(self) -> int:
        return len(self.generators)

    def generator(self, symbol: int) -> np.ndarray:
        if not 1 <= symbol <= self.k:
            raise DomainError(f"symbol {symbol} out of range 1..{self.k}")
        return self.generators[symbol - 1]

    def product(self, word) -> np.ndarray:
        """Product A_{w[-1]} ... A_{w[0]} read along the word left to right."""
        p = np.eye(2)
        for s in validate_word(word, self.k):
            p = self.generator(s) @ p
        return p


def validate_word(word, k: int) -> tuple:
    w = tuple(int(s) for s in word)
    for s in w:
        if not 1 <= s <= k:
            raise DomainError(f"symbol {s} out of range 1..{k}")
    return w
