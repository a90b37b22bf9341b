"""Named example cocycles with constructor-time verification.

Each constructor builds its matrices from defining constraints (eigen-axis
angles, eigenvalues, trace conditions, the heteroclinic identity) rather
than from frozen entries, and re-checks every constraint numerically before
returning, so the examples stay honest witnesses of the properties the test
suite relies on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from .geom2 import PI, Cocycle, angle_gap_ccw, det2, mat2, proj_act, proj_point

CONSTRUCTION_TOL = 1e-9


@dataclass(frozen=True)
class NamedExample:
    name: str
    cocycle: Cocycle
    expected: dict = field(default_factory=dict)


def _axes_matrix(u_theta: float, s_theta: float, chi_u: float, chi_s: float) -> np.ndarray:
    """Matrix with eigendirection u_theta for chi_u and s_theta for chi_s."""
    q = np.array(
        [
            [math.cos(u_theta), math.cos(s_theta)],
            [math.sin(u_theta), math.sin(s_theta)],
        ]
    )
    if abs(np.linalg.det(q)) < 1e-12:
        raise DomainError("eigendirections must be distinct")
    return q @ np.diag([chi_u, chi_s]) @ np.linalg.inv(q)


def _check(condition: bool, message: str) -> None:
    if not condition:
        raise AssertionError(f"example construction failed: {message}")


def noc_remark_example(alpha: float, beta: float) -> NamedExample:
    """Diagonal/triangular pair with asymmetric non-overlap behavior.

    Requires alpha, beta > 0 and alpha^2 + beta^2 < 1.  The pair is
    dominated and satisfies the forward non-overlap condition but not the
    backward one.
    """
    if not (alpha > 0.0 and beta > 0.0):
        raise DomainError("alpha and beta must be positive")
    if not alpha * alpha + beta * beta < 1.0:
        raise DomainError("need alpha^2 + beta^2 < 1")
    a1 = mat2(1.0 / alpha, 0.0, 0.0, alpha)
    a2 = mat2(1.0 / beta, 0.0, 1.0, beta)
    return NamedExample(
        name="noc-remark",
        cocycle=Cocycle([a1, a2]),
        expected={
            "dominated": True,
            "noc_forward": True,
            "noc_backward": False,
            "alpha": alpha,
            "beta": beta,
        },
    )


def heteroclinic_example() -> NamedExample:
    """Unit-determinant triple with a heteroclinic connection.

    A1, A2 are hyperbolic with positive traces and tr(A1 A2) < -2; A3 is
    hyperbolic with its expanding axis between s(A1) and u(A1), its
    contracting axis between s(A2) and u(A2), and maps u(A2) exactly onto
    s(A1).  The resulting cocycle is not uniformly hyperbolic but every
    periodic orbit has a positive exponent, so no minimizing measure exists.
    """
    lam = 3.3
    theta_u2, theta_s1, theta_u1, theta_s2 = 0.23, 0.86, 1.76, 2.35
    a1 = _axes_matrix(theta_u1, theta_s1, lam, 1.0 / lam)
    a2 = _axes_matrix(theta_u2, theta_s2, lam, 1.0 / lam)

    _check(a1[0, 0] + a1[1, 1] > 2.0, "tr A1 > 2")
    _check(a2[0, 0] + a2[1, 1] > 2.0, "tr A2 > 2")
    p12 = a1 @ a2
    _check(p12[0, 0] + p12[1, 1] < -2.0, "tr A1 A2 < -2")

    # expanding axis of A3 inside (s1, u1), contracting inside (s2, u2+pi);
    # the contracting axis sits close to u(A2) so the heteroclinic channel
    # words 1^a 3 2^b keep small norms
    theta_u3 = 1.48
    theta_s3 = 3.31
    u2 = np.array([math.cos(theta_u2), math.sin(theta_u2)])
    s1 = np.array([math.cos(theta_s1), math.sin(theta_s1)])
    q3 = np.array(
        [
            [math.cos(theta_u3), math.cos(theta_s3)],
            [math.sin(theta_u3), math.sin(theta_s3)],
        ]
    )
    q3inv = np.linalg.inv(q3)
    a_coef, b_coef = q3inv @ u2  # u2 in the A3 eigenbasis
    c_coef, d_coef = q3inv @ s1
    mu_sq = (c_coef * b_coef) / (d_coef * a_coef)
    _check(mu_sq > 1.0, "heteroclinic identity solvable with expanding mu")
    mu = math.sqrt(mu_sq)
    a3 = q3 @ np.diag([mu, 1.0 / mu]) @ q3inv

    for name, m in (("A1", a1), ("A2", a2), ("A3", a3)):
        _check(abs(det2(m) - 1.0) < CONSTRUCTION_TOL, f"det {name} = 1")
    _check(a3[0, 0] + a3[1, 1] > 2.0 - CONSTRUCTION_TOL, "A3 hyperbolic")

    # exact heteroclinic identity: A3 maps u(A2) to s(A1)
    img = proj_act(a3, theta_u2)
    _check(min(abs(img - theta_s1), PI - abs(img - theta_s1)) < CONSTRUCTION_TOL,
           "A3 u(A2) = s(A1)")

    # cyclic order of the eigendirections and the mixed-product axes
    def axis_angles(m):
        tr = m[0, 0] + m[1, 1]
        det = det2(m)
        disc = tr * tr - 4 * det
        _check(disc > 0.0, "hyperbolic product in cyclic-order check")
        lam1 = (tr + math.sqrt(disc)) / 2.0
        lam2 = (tr - math.sqrt(disc)) / 2.0
        out = []
        for ev in (lam1, lam2):
            v = np.array([m[0, 1], ev - m[0, 0]])
            if np.linalg.norm(v) < 1e-12:
                v = np.array([ev - m[1, 1], m[1, 0]])
            out.append(proj_point(math.atan2(v[1], v[0])))
        if abs(lam1) < abs(lam2):
            out.reverse()
        return out  # (expanding, contracting)

    u12, s12 = axis_angles(a1 @ a2)
    u21, s21 = axis_angles(a2 @ a1)
    ring = [theta_u2, u21, s21, theta_s1, theta_u1, u12, s12, theta_s2]
    total = sum(
        angle_gap_ccw(ring[i], ring[(i + 1) % len(ring)]) for i in range(len(ring))
    )
    _check(abs(total - PI) < 1e-9, "eigendirections in the stated cyclic order")

    return NamedExample(
        name="heteroclinic",
        cocycle=Cocycle([a1, a2, a3]),
        expected={
            "dominated": False,
            "uniformly_hyperbolic": False,
            "minimizing_measure": False,
            "periodic_exponent_floor": 0.01,
        },
    )


def nonunique_example(mode: str) -> NamedExample:
    """Pair with equal top eigenvalues and two optimizing fixed words.

    ``top``: the eigen-axis geodesics cross, so the maximizing Mather set is
    exactly the two fixed points.  ``bottom``: the geodesics are coparallel
    and the minimizing Mather set is the two fixed points.  Both variants
    carry forward and backward non-overlapping invariant cones.
    """
    chi1, chi2 = 2.0, 0.5
    if mode == "top":
        # crossing axes: u/s angles interleave around the circle
        a1 = _axes_matrix(math.radians(30.0), math.radians(120.0), chi1, chi2)
        a2 = _axes_matrix(math.radians(150.0), math.radians(60.0), chi1, chi2)
        known = ((1,), (2,))
    elif mode == "bottom":
        # coparallel axes: each matrix's axes sit in a shared half-arc
        a1 = _axes_matrix(math.radians(30.0), math.radians(60.0), chi1, chi2)
        a2 = _axes_matrix(math.radians(150.0), math.radians(120.0), chi1, chi2)
        known = ((1,), (2,))
    else:
        raise DomainError(f"mode must be 'top' or 'bottom', got {mode!r}")

    for m in (a1, a2):
        tr = m[0, 0] + m[1, 1]
        disc = tr * tr - 4.0 * det2(m)
        _check(disc > 0.0, "real distinct eigenvalues")
        _check(abs((tr + math.sqrt(disc)) / 2.0 - chi1) < CONSTRUCTION_TOL,
               "equal top eigenvalues")

    return NamedExample(
        name=f"nonunique-{mode}",
        cocycle=Cocycle([a1, a2]),
        expected={
            "dominated": True,
            "noc_forward": True,
            "noc_backward": True,
            "mode": mode,
            "mather_words": known,
            "top_eigenvalue": chi1,
        },
    )


GOLDEN_ANGLE = math.pi * (3.0 - math.sqrt(5.0))


def no_minimizer_simple(c_scale: float, theta: float = GOLDEN_ANGLE) -> NamedExample:
    """Hyperbolic-plus-scaled-rotation pair without a minimizing measure.

    For c_scale > 1 and a generic rotation angle, the infimum of the top
    exponent is not attained; the upper estimates keep decreasing while
    every short periodic exponent stays above the rotation floor.  The
    degenerate parameters c_scale = 1, theta = 0 are flagged.
    """
    h = mat2(2.0, 0.0, 0.0, 0.5)
    r = c_scale * np.array(
        [[math.cos(theta), -math.sin(theta)], [math.sin(theta), math.cos(theta)]]
    )
    degenerate = c_scale == 1.0 and theta == 0.0
    return NamedExample(
        name="no-minimizer",
        cocycle=Cocycle([h, r]),
        expected={
            "dominated": False,
            "minimizing_measure_expected": degenerate,
            "degenerate": degenerate,
            "c_scale": c_scale,
            "theta": theta,
        },
    )


BUILDERS = {
    "noc-remark": lambda: noc_remark_example(0.6, 0.6),
    "heteroclinic": heteroclinic_example,
    "nonunique-top": lambda: nonunique_example("top"),
    "nonunique-bottom": lambda: nonunique_example("bottom"),
    "no-minimizer": lambda: no_minimizer_simple(1.5),
}


def list_examples() -> list:
    return sorted(BUILDERS)


def build_example(name: str) -> NamedExample:
    if name not in BUILDERS:
        raise DomainError(f"unknown example {name!r}; choices: {', '.join(list_examples())}")
    return BUILDERS[name]()
