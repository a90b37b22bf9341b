"""Positive-entropy constructions for unit-determinant cocycles.

If the generated semigroup can contract every direction below a threshold
with uniformly bounded word lengths (a finite robust grid stands in for the
compactness argument), free symbols can be planted at the start of every
block while gap symbols keep all partial products bounded.  The number of
such words grows like k^(n/ell), giving an entropy lower bound log(k)/ell.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import DomainError, HypothesisError, SchemeError
from .geom2 import Cocycle, as_mat2, det2, op_norm, validate_word

UNIT_DET_TOL = 1e-9


def _require_unit_det(m) -> np.ndarray:
    m = as_mat2(m)
    if abs(abs(det2(m)) - 1.0) > UNIT_DET_TOL:
        raise DomainError("operation requires a unit-determinant matrix")
    return m


def is_elliptic(m) -> bool:
    """True iff the unit-determinant matrix has |trace| < 2."""
    m = _require_unit_det(m)
    return abs(m[0, 0] + m[1, 1]) < 2.0


def _unit_det_cocycle(c: Cocycle) -> None:
    for g in c.generators:
        _require_unit_det(g)


def find_elliptic_product(c: Cocycle, max_len: int = 8):
    """Shortest word whose product is elliptic, or None.

    Words are scanned by length and then lexicographically, so the result is
    deterministic.
    """
    _unit_det_cocycle(c)
    words = [()]
    for _ in range(max_len):
        words = [w + (s,) for w in words for s in range(1, c.k + 1)]
        for w in sorted(words):
            p = c.product(w)
            if abs(p[0, 0] + p[1, 1]) < 2.0:
                return w
    return None


@dataclass(frozen=True)
class ContractionScheme:
    """Per-direction contracting words over a robust angular grid.

    ``cell_edges`` has grid_size+1 angles spanning [0, pi]; cell j covers
    [cell_edges[j], cell_edges[j+1]] and stores a word of length ell-1 whose
    product contracts every direction of the cell below kappa/C (checked at
    both endpoints), so any one-step extension stays below kappa.
    """

    cell_edges: np.ndarray = field(repr=False)
    words: tuple = field(repr=False)
    C: float
    kappa: float
    ell: int
    C1: float
    coverage: float

    @property
    def grid_size(self) -> int:
        return len(self.words)

    def lookup(self, theta: float):
        t = math.fmod(float(theta), math.pi)
        if t < 0.0:
            t += math.pi
        j = min(int(t / math.pi * self.grid_size), self.grid_size - 1)
        w = self.words[j]
        if w is None:
            raise SchemeError(f"direction {theta} falls in an uncovered cell")
        return w

    def summary(self) -> dict:
        return {
            "C": self.C,
            "kappa": self.kappa,
            "ell": self.ell,
            "C1": self.C1,
            "grid_size": self.grid_size,
            "coverage_fraction": self.coverage,
        }


def _decode_word(index: int, k: int, length: int) -> tuple:
    """Word (oldest symbol first) for a level-array index.

    Level arrays stack as new-generator-major, so the newest symbol sits in
    the highest base-k digit of the index.
    """
    out = []
    for _ in range(length):
        out.append(index % k + 1)
        index //= k
    return tuple(out)


def class_c_scheme(
    c: Cocycle,
    grid_size: int = 720,
    max_len: int = 24,
    kappa_target: float = 0.9,
):
    """Search for a uniform-length contracting word per grid cell.

    Scans word lengths upward until a single length L covers every cell with
    both endpoint norms below kappa_target/C; returns the scheme with
    ell = L + 1, or None when no length up to max_len works (inconclusive
    for membership in the contracting class, conclusive enough in practice).
    """
    _unit_det_cocycle(c)
    C = max(op_norm(g) for g in c.generators)
    thresh = kappa_target / C
    edges = np.linspace(0.0, math.pi, grid_size + 1)
    dirs = np.stack([np.cos(edges), np.sin(edges)])  # endpoint directions

    gens = np.stack(c.generators)
    mats = gens.copy()
    chunk = 8192
    for length in range(1, max_len + 1):
        if length > 1:
            if mats.shape[0] * c.k > 2**21:
                break  # level would not fit the enumeration budget
            mats = np.matmul(gens[:, None], mats[None, :]).reshape(-1, 2, 2)
        # first word index covering each cell (both endpoints below threshold)
        first = np.full(grid_size, -1, dtype=np.int64)
        for lo in range(0, mats.shape[0], chunk):
            batch = mats[lo : lo + chunk]
            norms = np.linalg.norm(np.matmul(batch, dirs), axis=1)  # (b, G+1)
            ok = norms < thresh
            cell_ok = ok[:, :-1] & ok[:, 1:]
            hit = cell_ok.any(axis=0)
            new = (first < 0) & hit
            if np.any(new):
                first[new] = lo + cell_ok[:, new].argmax(axis=0)
            if np.all(first >= 0):
                break
        if np.all(first >= 0):
            cell_words = tuple(_decode_word(int(i), c.k, length) for i in first)
            kappa = kappa_target
            ell = length + 1
            c1 = math.sqrt(2.0) * C**ell / math.sqrt(1.0 - kappa * kappa)
            return ContractionScheme(
                cell_edges=edges,
                words=cell_words,
                C=C,
                kappa=kappa,
                ell=ell,
                C1=c1,
                coverage=1.0,
            )
    return None


def _top_image_direction(p: np.ndarray) -> np.ndarray:
    """Unit v with P u = |P| v for the top singular pair of P."""
    u_mat, _, _ = np.linalg.svd(p)
    return u_mat[:, 0]


def verify_bounded_lemma(b_seq, C: float, kappa: float) -> bool:
    """Check the bounded-partial-products bound along a block sequence.

    Hypotheses: every block has norm at most C and contracts the running
    product's top singular image direction below kappa.  Conclusion: every
    partial product has norm at most sqrt(2) C / sqrt(1 - kappa^2).  A
    hypothesis failure raises; a conclusion failure returns False and
    indicates a bug in the bound, not in the inputs.
    """
    if not 0.0 < kappa < 1.0 < C:
        raise HypothesisError("need 0 < kappa < 1 < C")
    mats = [_require_unit_det(b) for b in b_seq]
    bound = math.sqrt(2.0) * C / math.sqrt(1.0 - kappa * kappa) + 1e-9
    p = np.eye(2)
    for i, b in enumerate(mats):
        if op_norm(b) > C + 1e-9:
            raise HypothesisError(f"block {i} has norm {op_norm(b):.6g} > C")
        v = _top_image_direction(p)
        if float(np.linalg.norm(b @ v)) > kappa + 1e-9:
            raise HypothesisError(f"block {i} does not contract the image direction")
        p = b @ p
        if op_norm(p) > bound:
            return False
    return True


def build_bounded_word(scheme: ContractionScheme, c: Cocycle, free_symbols, n_blocks: int):
    """Plant free symbols at block starts, filling gaps from the scheme.

    Returns a word of length ell * n_blocks whose block-end partial products
    all have norm at most C1.  The gap word is the scheme entry for the
    direction of the free generator's image of the current top singular
    direction.
    """
    free = validate_word(free_symbols, c.k)
    if len(free) != n_blocks:
        raise DomainError("need exactly one free symbol per block")
    if n_blocks == 0:
        return ()
    word = []
    p = np.eye(2)
    for sym in free:
        v = _top_image_direction(p)
        word.append(sym)
        g = c.generator(sym)
        p = g @ p
        img = g @ v
        theta = math.atan2(img[1], img[0])
        gap = scheme.lookup(theta)
        for s in gap:
            word.append(s)
            p = c.generator(s) @ p
        if op_norm(p) > scheme.C1 + 1e-9:
            raise SchemeError(
                f"block-end norm {op_norm(p):.6g} exceeded C1 = {scheme.C1:.6g}"
            )
    return tuple(word)


def entropy_lower_bound(scheme: ContractionScheme, k: int) -> float:
    """Topological entropy lower bound log(k)/ell from the free-symbol count."""
    if k < 1:
        raise DomainError("alphabet size must be >= 1")
    return math.log(k) / scheme.ell


class PerturbationResult(NamedTuple):
    theta: float | None
    trace_derivative: float


def _rotation(theta: float) -> np.ndarray:
    ct, st = math.cos(theta), math.sin(theta)
    return np.array([[ct, -st], [st, ct]])


def elliptic_perturbation_search(
    c: Cocycle, elliptic_word, theta_max: float = 0.5, margin: float = 0.1
) -> PerturbationResult:
    """Rotate every factor of a near-elliptic product into clear ellipticity.

    Scans theta in [-theta_max, theta_max] for the smallest |theta| putting
    the trace of R_theta A_{i_n} ... R_theta A_{i_1} inside
    (-2 + margin, 2 - margin); also reports the finite-difference derivative
    of the trace at theta = 0, which is nonzero for non-commuting products.
    """
    w = validate_word(elliptic_word, c.k)
    if not w:
        raise DomainError("need a nonempty word")
    _unit_det_cocycle(c)

    def trace_at(theta: float) -> float:
        p = np.eye(2)
        r = _rotation(theta)
        for s in w:
            p = r @ c.generator(s) @ p
        return float(p[0, 0] + p[1, 1])

    h = 1e-6
    deriv = (trace_at(h) - trace_at(-h)) / (2.0 * h)
    target = 2.0 - margin
    if abs(trace_at(0.0)) < target:
        return PerturbationResult(theta=0.0, trace_derivative=deriv)
    for t in np.linspace(0.0, theta_max, 2001)[1:]:
        for theta in (t, -t):
            if abs(trace_at(theta)) < target:
                return PerturbationResult(theta=float(theta), trace_derivative=deriv)
    return PerturbationResult(theta=None, trace_derivative=deriv)
