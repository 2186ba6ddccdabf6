"""Margulis-invariant coordinates on the once-holed torus.

For the rank-2 holonomy of a one-holed torus in normalized position
(generators w1, w2 from `build_once_holed_torus`, boundary word
g1 = [w1, w2]), the functional u -> margulis(u, g1) is linear in the six
frame coordinates of the generator values u(w1), u(w2).  This module

  * measures that functional coordinate by coordinate and matches it
    against a closed-form coefficient pattern, extracting the overall
    scale K (`mar_g1_coefficients`), and likewise for the product word
    w1 w2 with scale K' (`mar_w1w2_coefficients`);
  * expands u(g1) in the generator values (`u_g1`);
  * builds the canonical coboundary representative of a cocycle
    (`normalize`) and the linear parametrization of classes by the
    invariant triple (margulis(w1), margulis(w2), margulis(g1))
    (`phi_T`);
  * evaluates the relation tying margulis(g1) to margulis(w1 w2)
    (`kappa_zeta3_residual`, `zeta_elimination_coefficients`);
  * re-coordinatizes a cocycle by any other generating pair
    (`generator_change_coords`).

Everything degenerates when the two generator axes cross at a right
angle: there the boundary invariant is pinned by the generator
invariants (see `k_right_angle`), and the operations that need the extra
degree of freedom refuse with `RightAngleError`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cocycle import Cocycle, coboundary, margulis
from .fuchsian import Word, commutator
from .lorentz import J, NullFrame, axis_relation, null_frame

ANGLE_TOL = 1e-6   # refusal window around a right-angle crossing
FRAME_TOL = 1e-8   # normalized-position check on the generator frames

W1_WORD = Word((1,))
W2_WORD = Word((2,))
PRODUCT_WORD = Word((1, 2))
BOUNDARY_WORD = Word((1, 2, -1, -2))

_ROOT2 = math.sqrt(2.0)


class NotNormalizedFrameError(ValueError):
    """The generator axes are not in the normalized position."""


class RightAngleError(ValueError):
    """The generator axes cross at (numerically) a right angle."""


class NotGeneratingError(ValueError):
    """The given pair of words does not generate the rank-2 free group."""


# ---------------------------------------------------------------------------
# frame data


@dataclass
class TorusFrameData:
    """Null frames and eigenvalue data of a normalized one-holed torus.

    lambda1, lambda2 are the smallest eigenvalues of the generator images
    acting on vectors (e^{-l1}, e^{-l2}); theta is the crossing angle of
    the two generator axes at the frame origin.
    """

    rep: object
    theta: float
    lambda1: float
    lambda2: float
    frame1: NullFrame
    frame2: NullFrame
    frame_boundary: NullFrame

    @classmethod
    def from_rep(cls, rep):
        """Read the frames off a rank-2 rep, checking normalized position.

        Normalized position means the first generator axis is the e1-axis
        of the hyperboloid (neutral vector [1, 0, 0]) and the second runs
        through the same point rotated by theta in (0, pi).
        """
        if rep.rank != 2:
            raise ValueError(f"expected a rank-2 rep, got rank {rep.rank}")
        frame1 = null_frame(rep.gens[0])
        frame2 = null_frame(rep.gens[1])
        if np.max(np.abs(frame1.x0 - np.array([1.0, 0.0, 0.0]))) > FRAME_TOL:
            raise NotNormalizedFrameError(
                f"first generator axis has neutral vector {frame1.x0}, "
                "expected [1, 0, 0]"
            )
        if abs(frame2.x0[2]) > FRAME_TOL or frame2.x0[1] <= 0.0:
            raise NotNormalizedFrameError(
                f"second generator axis has neutral vector {frame2.x0}, "
                "expected [cos theta, sin theta, 0] with sin theta > 0"
            )
        theta = math.atan2(frame2.x0[1], frame2.x0[0])
        frame_boundary = null_frame(rep.evaluate(BOUNDARY_WORD))
        return cls(
            rep=rep,
            theta=theta,
            lambda1=frame1.lam,
            lambda2=frame2.lam,
            frame1=frame1,
            frame2=frame2,
            frame_boundary=frame_boundary,
        )

    @classmethod
    def from_pair(cls, rep):
        """Frame data for a rank-2 rep in arbitrary position.

        The generator axes must cross; the angle is read off the pairing
        of the neutral vectors instead of from normalized coordinates.
        Useful for a torus subgroup sitting inside a larger surface
        group, where the axes cross away from the origin.
        """
        if rep.rank != 2:
            raise ValueError(f"expected a rank-2 rep, got rank {rep.rank}")
        relation = axis_relation(rep.gens[0], rep.gens[1])
        if relation.kind != "cross":
            raise ValueError("generator axes do not cross")
        frame1 = null_frame(rep.gens[0])
        frame2 = null_frame(rep.gens[1])
        frame_boundary = null_frame(rep.evaluate(BOUNDARY_WORD))
        return cls(
            rep=rep,
            theta=relation.angle,
            lambda1=frame1.lam,
            lambda2=frame2.lam,
            frame1=frame1,
            frame2=frame2,
            frame_boundary=frame_boundary,
        )


@dataclass(frozen=True)
class CoeffVector:
    """Six coefficients of a Margulis functional in the frame coordinates.

    The coordinates of a cocycle are the components of u(w1) along
    (frame1.x0, frame1.xm, frame1.xp) and of u(w2) along
    (frame2.x0, frame2.xm, frame2.xp), ordered as
    (zeta1, zeta2, a, b, c, d) = (neutral1, neutral2, contracting1,
    expanding1, contracting2, expanding2).
    """

    zeta1: float
    zeta2: float
    a: float
    b: float
    c: float
    d: float

    def as_array(self):
        return np.array([self.zeta1, self.zeta2, self.a, self.b, self.c, self.d])

    @classmethod
    def from_array(cls, arr):
        z1, z2, a, b, c, d = (float(x) for x in arr)
        return cls(z1, z2, a, b, c, d)


def _coordinate_cocycles(t):
    """The six basis cocycles dual to the CoeffVector coordinates."""
    placements = [
        (0, t.frame1.x0),
        (1, t.frame2.x0),
        (0, t.frame1.xm),
        (0, t.frame1.xp),
        (1, t.frame2.xm),
        (1, t.frame2.xp),
    ]
    out = []
    for slot, vec in placements:
        values = np.zeros((2, 3))
        values[slot] = vec
        out.append(Cocycle(t.rep, values))
    return out


def margulis_gradient(t, w):
    """Gradient of u -> margulis(u, w) in the six frame coordinates."""
    word = t.rep.word_of(w)
    return np.array([margulis(u, word) for u in _coordinate_cocycles(t)])


# ---------------------------------------------------------------------------
# coefficient patterns


def boundary_pattern(lambda1, lambda2, theta):
    """Coefficient pattern (up to overall scale K) of u -> margulis(u, g1)."""
    st, ct = math.sin(theta), math.cos(theta)
    return np.array(
        [
            st * (1.0 + lambda1) * (-1.0 + lambda2),
            st * (1.0 + lambda2) * (-1.0 + lambda1),
            -_ROOT2 * ct * (-1.0 + lambda2),
            _ROOT2 * ct * lambda1 * (-1.0 + lambda2),
            _ROOT2 * ct * (-1.0 + lambda1),
            -_ROOT2 * ct * lambda2 * (-1.0 + lambda1),
        ]
    )


def product_pattern(lambda1, lambda2, theta):
    """Coefficient pattern (up to overall scale K') of u -> margulis(u, w1 w2)."""
    st, ct = math.sin(theta), math.cos(theta)
    coef1 = ((1.0 + lambda1) * (-1.0 + lambda2) * ct
             + (-1.0 + lambda1) * (1.0 + lambda2)) / st
    coef2 = ((-1.0 + lambda1) * (1.0 + lambda2) * ct
             + (1.0 + lambda1) * (-1.0 + lambda2)) / st
    return np.array(
        [
            -coef1,
            -coef2,
            -_ROOT2 * (-1.0 + lambda2),
            _ROOT2 * lambda1 * (-1.0 + lambda2),
            _ROOT2 * (-1.0 + lambda1),
            -_ROOT2 * lambda2 * (-1.0 + lambda1),
        ]
    )


def k_right_angle(lambda1, lambda2):
    """Closed form of the boundary-pattern scale K at a right angle."""
    disc = (
        (-1.0 + lambda2) ** 2
        + lambda1 ** 2 * (-1.0 + lambda2) ** 2
        - 2.0 * lambda1 * (1.0 + 6.0 * lambda2 + lambda2 ** 2)
    )
    if disc <= 0.0:
        raise ValueError(
            f"right-angle scale undefined: discriminant {disc} is not positive"
        )
    return -2.0 / math.sqrt(disc)


def _fit_scale(measured, pattern):
    """Least-squares scale fitting measured ~ scale * pattern, max residual."""
    denom = float(pattern @ pattern)
    if denom == 0.0:
        raise ValueError("coefficient pattern is identically zero")
    scale = float(measured @ pattern) / denom
    residual = float(np.max(np.abs(measured - scale * pattern)))
    return scale, residual


def mar_g1_coefficients(t):
    """Measured coefficients of margulis(., g1) and the fitted scale K.

    Returns (CoeffVector, K, residual) where residual is the max-abs
    mismatch between the measured coefficients and K times the pattern.
    """
    grad = margulis_gradient(t, BOUNDARY_WORD)
    scale, residual = _fit_scale(grad, boundary_pattern(t.lambda1, t.lambda2, t.theta))
    return CoeffVector.from_array(grad), scale, residual


def mar_w1w2_coefficients(t):
    """Measured coefficients of margulis(., w1 w2) and the fitted scale K'."""
    grad = margulis_gradient(t, PRODUCT_WORD)
    scale, residual = _fit_scale(grad, product_pattern(t.lambda1, t.lambda2, t.theta))
    return CoeffVector.from_array(grad), scale, residual


# ---------------------------------------------------------------------------
# the boundary value of a cocycle


def u_g1(u):
    """Value of a cocycle on the boundary word, expanded in generator values.

    For g1 = w1 w2 w1^-1 w2^-1 the cocycle rule collapses to

        u(g1) = (I - R(w1 w2 w1^-1)) u(w1) + (R(w1) - R(g1)) u(w2)

    where R is the rep's action on vectors; the result equals
    u.evaluate(g1) identically.
    """
    rep = u.rep
    if rep.rank != 2:
        raise ValueError(f"expected a rank-2 rep, got rank {rep.rank}")
    conj = rep.evaluate(Word((1, 2, -1))).mat
    m_w1 = rep.gens[0].mat
    m_g1 = rep.evaluate(BOUNDARY_WORD).mat
    v1, v2 = u.values
    return (np.eye(3) - conj) @ v1 + (m_w1 - m_g1) @ v2


# ---------------------------------------------------------------------------
# normalization and the class parametrization


def _require_generic_angle(theta):
    if abs(theta - math.pi / 2.0) < ANGLE_TOL:
        raise RightAngleError(
            "generator axes cross at a right angle, where the boundary "
            "invariant is pinned by the generator invariants: "
            "margulis(g1) = K * ((1+lam1)(-1+lam2) zeta1 + "
            "(-1+lam1)(1+lam2) zeta2) with K = k_right_angle(lam1, lam2); "
            "use generator_change_coords with a different pair instead"
        )


def normalize(u):
    """Canonical coboundary representative (u + delta_v, v).

    v is the unique translation vector such that the shifted cocycle has

      * boundary value purely along the boundary's neutral direction
        (both null components of (u + delta_v)(g1) vanish), and
      * no expanding-frame component in (u + delta_v)(w2).

    The first two conditions fix v up to its component along the
    boundary's neutral vector; the third pins that component, and
    degenerates exactly at a right-angle crossing (RightAngleError).
    """
    t = TorusFrameData.from_rep(u.rep)
    _require_generic_angle(t.theta)
    fb = t.frame_boundary
    g1 = u.rep.evaluate(BOUNDARY_WORD)
    c = u.evaluate(BOUNDARY_WORD)

    # kill the null components of the boundary value: (I - g1) scales the
    # contracting/expanding directions by (1 - lam) and (1 - 1/lam)
    vm = -fb.component_in(c, "xm") / (1.0 - fb.lam)
    vp = -fb.component_in(c, "xp") / (1.0 - 1.0 / fb.lam)
    v_null = vm * fb.xm + vp * fb.xp

    # the remaining freedom s * x0 is pinned by deleting the expanding
    # component of the shifted value on w2
    w2 = u.rep.gens[1]
    shift_base = u.values[1] + v_null - w2.apply(v_null)
    probe = fb.x0 - w2.apply(fb.x0)
    base_comp = t.frame2.component_in(shift_base, "xp")
    rate = t.frame2.component_in(probe, "xp")
    if abs(rate) < 1e-12:
        raise RightAngleError(
            "expanding-component deletion on w2 degenerated: the boundary "
            "neutral direction is invisible to the w2 frame"
        )
    s = -base_comp / rate
    v = v_null + s * fb.x0
    return u + coboundary(u.rep, v), v


def phi_T(t, z1, z2, k):
    """The cocycle with invariant triple (z1, z2, k) in normalized form.

    Solves the 6x6 linear system on the generator values (u(w1), u(w2)):

      * margulis(u, w1) = z1 and margulis(u, w2) = z2,
      * the expanding-frame component of u(w2) vanishes,
      * u(g1) = k * (boundary neutral vector)  (three equations).

    The system is linear in (z1, z2, k) and nonsingular away from a
    right-angle crossing, where it refuses (RightAngleError).
    """
    _require_generic_angle(t.theta)
    rep = t.rep
    w1, w2 = rep.gens
    m_conj = rep.evaluate(Word((1, 2, -1))).mat
    m_g1 = rep.evaluate(BOUNDARY_WORD).mat
    fb = t.frame_boundary

    system = np.zeros((6, 6))
    rhs = np.zeros(6)
    system[0, :3] = J @ t.frame1.x0
    rhs[0] = z1
    system[1, 3:] = J @ t.frame2.x0
    rhs[1] = z2
    cross2 = float(t.frame2.xm @ (J @ t.frame2.xp))
    system[2, 3:] = (J @ t.frame2.xm) / cross2
    system[3:, :3] = np.eye(3) - m_conj
    system[3:, 3:] = w1.mat - m_g1
    rhs[3:] = k * fb.x0

    values = np.linalg.solve(system, rhs)
    values += np.linalg.solve(system, rhs - system @ values)
    return Cocycle(rep, values.reshape(2, 3))


# ---------------------------------------------------------------------------
# the relation between the boundary and product invariants


def zeta_elimination_coefficients(t):
    """Coefficients (e1, e2) of the measured elimination identity.

    Eliminating the four null-direction coefficients between the boundary
    pattern and the product pattern leaves

        margulis(g1)/K - cos(theta) * margulis(w1 w2)/K'
            = e1 * margulis(w1) + e2 * margulis(w2)

    with e1 = (P1 + P2 cos theta)/sin theta and
    e2 = (P2 + P1 cos theta)/sin theta, where P1 = (1+lam1)(-1+lam2) and
    P2 = (1+lam2)(-1+lam1).
    """
    st, ct = math.sin(t.theta), math.cos(t.theta)
    p1 = (1.0 + t.lambda1) * (-1.0 + t.lambda2)
    p2 = (1.0 + t.lambda2) * (-1.0 + t.lambda1)
    return (p1 + ct * p2) / st, (p2 + ct * p1) / st


def kappa_zeta3_residual(t, u):
    """Residual of the symmetric form of the boundary/product relation.

    Evaluates |kappa/K - cos(theta) * zeta3/K' -
    2(lam1 lam2 - 1)/sin(theta) * (zeta1 + zeta2)| with kappa =
    margulis(u, g1), zeta3 = margulis(u, w1 w2), and K, K' fitted from
    the coefficient patterns.

    Note the elimination identity actually satisfied by the measured
    patterns carries the coefficients of `zeta_elimination_coefficients`,
    which differ from the symmetric pair above except as theta -> 0; this
    function evaluates the symmetric form.
    """
    kappa = margulis(u, BOUNDARY_WORD)
    zeta3 = margulis(u, PRODUCT_WORD)
    zeta1 = margulis(u, W1_WORD)
    zeta2 = margulis(u, W2_WORD)
    _, k_scale, _ = mar_g1_coefficients(t)
    _, kp_scale, _ = mar_w1w2_coefficients(t)
    st, ct = math.sin(t.theta), math.cos(t.theta)
    symmetric = 2.0 * (t.lambda1 * t.lambda2 - 1.0) / st * (zeta1 + zeta2)
    return abs(kappa / k_scale - ct * zeta3 / kp_scale - symmetric)


# ---------------------------------------------------------------------------
# change of generating pair


def _cyclic_reduce(letters):
    letters = list(letters)
    while len(letters) >= 2 and letters[0] == -letters[-1]:
        letters = letters[1:-1]
    return tuple(letters)


def _sl2_commutator_trace(m1, m2):
    """Trace of [m1, m2] for unit-determinant 2x2 matrices."""

    def adjugate(m):
        return np.array([[m[1, 1], -m[0, 1]], [-m[1, 0], m[0, 0]]])

    prod = m1 @ m2 @ adjugate(m1) @ adjugate(m2)
    return float(prod[0, 0] + prod[1, 1])


def pair_generates(w1, w2):
    """Whether two words generate the full rank-2 free group.

    A pair generates exactly when its commutator is conjugate to the
    commutator of the standard basis or to its inverse; conjugacy of words
    is equality of cyclic reductions up to rotation.
    """
    comm = _cyclic_reduce(commutator(w1, w2).letters)
    if len(comm) != 4:
        return False
    rotations = {comm[i:] + comm[:i] for i in range(4)}
    return ((1, 2, -1, -2) in rotations) or ((2, 1, -2, -1) in rotations)


def generator_change_coords(rep, om1, om2, u):
    """Invariant triple of u with respect to a new generating pair.

    Returns (margulis(u, om1), margulis(u, om2), margulis(u, [om1, om2])).
    The triple pins the cohomology class: two cocycles with equal triples
    are cohomologous.  Refuses pairs that do not generate
    (NotGeneratingError) and pairs whose axes cross at a right angle
    (RightAngleError).
    """
    om1 = rep.word_of(om1)
    om2 = rep.word_of(om2)
    if not pair_generates(om1, om2):
        raise NotGeneratingError(
            f"words {om1} and {om2} do not generate the rank-2 free group"
        )
    h1 = rep.evaluate(om1)
    h2 = rep.evaluate(om2)
    relation = axis_relation(h1, h2)
    if relation.kind != "cross":
        raise NotGeneratingError(
            f"axes of the images are {relation.kind}, expected crossing axes"
        )
    _require_generic_angle(relation.angle)
    # the commutator trace is lift-independent, so compute it from fixed
    # unit-determinant lifts (the canonical-sign mob of a product may hide
    # the sign)
    comm_trace = _sl2_commutator_trace(h1.mob, h2.mob)
    if comm_trace > -2.0:
        raise NotGeneratingError(
            f"commutator of the images has trace {comm_trace}, not below -2"
        )
    return (
        margulis(u, om1),
        margulis(u, om2),
        margulis(u, commutator(om1, om2)),
    )
