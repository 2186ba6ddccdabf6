"""(2+1)-dimensional Lorentzian linear algebra and the PSL(2,R) bridge.

The quadratic form is B(x, y) = x1*y1 + x2*y2 - x3*y3, i.e. the Gram matrix
J = diag(1, 1, -1).  A vector is spacelike / null / timelike according to the
sign of B(x, x); "future-pointing" means x3 > 0.

PSL(2,R) acts on its Lie algebra sl2(R) by conjugation.  With the basis

    E1 = [[1, 0], [0, -1]],   E2 = [[0, 1], [1, 0]],   E3 = [[0, -1], [1, 0]],

one half of the trace form, <M, N> = tr(M N)/2, has Gram matrix J, so the
adjoint action gives a group map from 2x2 matrices of determinant one to the
identity component SO°(2,1).  The basis is oriented so that the boost
diag(e^t, e^-t) with t > 0 fixes [1,0,0], contracts [0,1,1] by e^{-2t}, and
expands [0,-1,1] by e^{2t}; this sign choice is what makes the length
derivative of a twist deformation come out as +2 times the Margulis invariant
(calibrated in twistflow).

A hyperbolic isometry h carries a *null frame* (x0, xm, xp):

  * xm: future-pointing null eigenvector for the smallest eigenvalue
    lam in (0,1), scaled to Euclidean norm 1;
  * xp: future-pointing null eigenvector for the largest eigenvalue 1/lam,
    Euclidean norm 1;
  * x0: unit spacelike eigenvector for eigenvalue 1 (the axis direction),
    with sign fixed by det[x0 | xm | xp] > 0.

Eigenvectors are computed in closed form from the fixed points of the 2x2
matrix on the boundary circle, not with a generic 3x3 eigensolver: the
boundary direction (p, q) corresponds to the future null ray through
[p*q, (q^2 - p^2)/2, (p^2 + q^2)/2], the attracting fixed point gives xp and
the repelling one gives xm, and x0 is the image of the normalized traceless
part of the 2x2 matrix itself.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

J = np.diag([1.0, 1.0, -1.0])

E1 = np.array([[1.0, 0.0], [0.0, -1.0]])
E2 = np.array([[0.0, 1.0], [1.0, 0.0]])
E3 = np.array([[0.0, -1.0], [1.0, 0.0]])

DET_TOL = 1e-12        # |det - 1| allowed for 2x2 inputs
ORTHO_TOL = 1e-10      # m^T J m = J residual allowed for 3x3 inputs
NULL_TOL = 1e-10       # |B(x,x)| below which a vector counts as null
PARABOLIC_MARGIN = 1e-8  # ||tr| - 2| below which we refuse to classify


class NotHyperbolicError(ValueError):
    """Raised when an operation needs a hyperbolic isometry but got none."""


def lorentz_form(u, v):
    """B(u, v) = u1*v1 + u2*v2 - u3*v3."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    return u[0] * v[0] + u[1] * v[1] - u[2] * v[2]


def classify_vector(v, tol=NULL_TOL):
    """Return 'spacelike', 'null' or 'timelike' for a 3-vector."""
    q = lorentz_form(v, v)
    if abs(q) <= tol:
        return "null"
    return "spacelike" if q > 0 else "timelike"


def vec_to_sl2(v):
    """Linear isomorphism R^{2,1} -> sl2(R), e_i -> E_i."""
    v = np.asarray(v, dtype=float)
    return v[0] * E1 + v[1] * E2 + v[2] * E3


def sl2_to_vec(m):
    """Inverse of vec_to_sl2 (input must be traceless)."""
    m = np.asarray(m, dtype=float)
    return np.array([m[0, 0], (m[0, 1] + m[1, 0]) / 2.0, (m[1, 0] - m[0, 1]) / 2.0])


def make_mob(m, trust_unit_det=False):
    """Normalize a 2x2 matrix to determinant one and canonical sign.

    The representative of {A, -A} is chosen so that the first entry of
    the first row (in row-major order) that is not numerically zero is
    positive.  Raises ValueError if the determinant is not close to a
    positive number (a negative determinant is not an isometry of H^2).

    With trust_unit_det (used for internal products of already-normalized
    matrices), the determinant renormalization is skipped when the entries
    are so large that computing ad - bc is pure cancellation noise; the
    product of unit-determinant matrices has unit determinant exactly.
    """
    m = np.asarray(m, dtype=float)
    if m.shape != (2, 2):
        raise ValueError(f"expected a 2x2 matrix, got shape {m.shape}")
    det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
    amax = float(np.max(np.abs(m)))
    det_noise = 32.0 * np.finfo(float).eps * amax * amax
    if trust_unit_det and (det_noise > 0.5 or abs(det - 1.0) <= det_noise):
        # the measured deviation is within the cancellation noise of
        # computing ad - bc itself; dividing by sqrt(det) would inject
        # that noise into entries that are more accurate than it
        pass
    elif det <= 0:
        raise ValueError(f"determinant {det} is not positive")
    else:
        m = m / math.sqrt(det)
    for entry in m.reshape(-1):
        if abs(entry) > 1e-14:
            if entry < 0:
                m = -m
            break
    return m


def mob_to_iso(a):
    """Adjoint action of a determinant-one 2x2 matrix on R^{2,1}.

    Columns of the result are the images of the basis vectors e_i, i.e.
    sl2_to_vec(a E_i a^{-1}).  The map is a group homomorphism and kills
    the sign: a and -a give the same 3x3 matrix.
    """
    a = np.asarray(a, dtype=float)
    det = a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0]
    # ad - bc is pure cancellation for large entries; only reject beyond
    # what float evaluation of a true unit determinant could produce
    amax = float(np.max(np.abs(a)))
    det_noise = 32.0 * np.finfo(float).eps * amax * amax
    if abs(det - 1.0) > max(1e-9, det_noise):
        raise ValueError(f"matrix is not in SL(2,R): det = {det}")
    ainv = np.array([[a[1, 1], -a[0, 1]], [-a[1, 0], a[0, 0]]])
    cols = [sl2_to_vec(a @ e @ ainv) for e in (E1, E2, E3)]
    return np.column_stack(cols)


def is_lorentz_matrix(m, tol=ORTHO_TOL):
    """Check m^T J m = J, det m = 1 and m33 > 0 (identity component)."""
    m = np.asarray(m, dtype=float)
    if m.shape != (3, 3):
        return False
    if np.max(np.abs(m.T @ J @ m - J)) > tol:
        return False
    if abs(np.linalg.det(m) - 1.0) > 10 * tol:
        return False
    return m[2, 2] > 0


class Isometry:
    """An orientation-preserving isometry of H^2, carried in both pictures.

    `mob` is the normalized 2x2 matrix (determinant one, canonical sign),
    `mat` is its image in SO°(2,1).  Group operations update both so that a
    word evaluated in either picture stays consistent; `mat` is what acts on
    3-vectors.
    """

    __slots__ = ("mob", "mat")

    def __init__(self, mob, mat=None, _normalized=False):
        self.mob = np.asarray(mob, dtype=float) if _normalized else make_mob(mob)
        self.mat = mob_to_iso(self.mob) if mat is None else np.asarray(mat, dtype=float)

    @classmethod
    def identity(cls):
        return cls(np.eye(2), np.eye(3))

    def __matmul__(self, other):
        if isinstance(other, Isometry):
            # derive the 3x3 from the 2x2 product: chaining 3x3 factors
            # loses digits to the large intermediates of long words, while
            # the quadratic formula keeps mat consistent with mob to
            # working precision
            return Isometry(_mob_mul(self.mob, other.mob), _normalized=True)
        return NotImplemented

    def inv(self):
        m = self.mob
        mob_inv = make_mob(
            np.array([[m[1, 1], -m[0, 1]], [-m[1, 0], m[0, 0]]]), trust_unit_det=True
        )
        return Isometry(mob_inv, J @ self.mat.T @ J, _normalized=True)

    def apply(self, v):
        """Act on a 3-vector."""
        return self.mat @ np.asarray(v, dtype=float)

    @property
    def trace(self):
        """Trace of the normalized 2x2 representative (always >= 0 or mixed
        sign depending on the canonical-sign normalization; use abs for
        classification)."""
        return self.mob[0, 0] + self.mob[1, 1]

    def __repr__(self):
        return f"Isometry(mob={self.mob.tolist()})"


def _mob_mul(a, b):
    return make_mob(a @ b, trust_unit_det=True)


def classify(h):
    """Classify an isometry: 'identity', 'elliptic', 'parabolic', 'hyperbolic'.

    Inputs whose 2x2 trace is within PARABOLIC_MARGIN of +-2 (but which are
    not the identity) are reported as 'parabolic'; downstream code treats
    that as "numerically parabolic" and refuses to build frames for it.
    """
    mob = h.mob if isinstance(h, Isometry) else make_mob(h)
    if np.max(np.abs(mob - np.eye(2))) < 1e-12 or np.max(np.abs(mob + np.eye(2))) < 1e-12:
        return "identity"
    t = abs(mob[0, 0] + mob[1, 1])
    if abs(t - 2.0) <= PARABOLIC_MARGIN:
        return "parabolic"
    return "hyperbolic" if t > 2.0 else "elliptic"


def translation_length(h):
    """Hyperbolic translation length, 2*arccosh(|tr|/2).

    Raises NotHyperbolicError unless classify(h) == 'hyperbolic'.
    """
    kind = classify(h)
    if kind != "hyperbolic":
        raise NotHyperbolicError(f"translation length needs a hyperbolic isometry, got {kind}")
    mob = h.mob if isinstance(h, Isometry) else make_mob(h)
    t = abs(mob[0, 0] + mob[1, 1])
    return 2.0 * math.acosh(t / 2.0)


@dataclass(frozen=True)
class NullFrame:
    """Null frame of a hyperbolic isometry.

    x0:  unit spacelike axis vector, eigenvalue 1,
    xm:  future null contracting direction, eigenvalue lam, Euclidean norm 1,
    xp:  future null expanding direction, eigenvalue 1/lam, Euclidean norm 1,
    lam: smallest eigenvalue of the 3x3 matrix, in (0, 1),
    ell: translation length, ell = -log(lam).

    Oriented so that det[x0 | xm | xp] > 0.
    """

    x0: np.ndarray
    xm: np.ndarray
    xp: np.ndarray
    lam: float
    ell: float

    def matrix(self):
        """Column matrix P = [x0 | xm | xp]."""
        return np.column_stack([self.x0, self.xm, self.xp])

    def component_in(self, v, direction):
        """Coefficient of v along x0 / xm / xp in this frame.

        Uses the dual pairings: B(x0, x0) = 1, B(xm, xp) != 0 while all
        other pairings between distinct frame vectors vanish.
        """
        v = np.asarray(v, dtype=float)
        if direction == "x0":
            return lorentz_form(v, self.x0)
        cross = lorentz_form(self.xm, self.xp)
        if direction == "xm":
            return lorentz_form(v, self.xp) / cross
        if direction == "xp":
            return lorentz_form(v, self.xm) / cross
        raise ValueError(f"unknown frame direction {direction!r}")


def _boundary_null_vector(p, q):
    """Future-pointing Euclidean-unit null vector for boundary direction (p,q)."""
    n = np.array([p * q, (q * q - p * p) / 2.0, (p * p + q * q) / 2.0])
    return n / np.linalg.norm(n)


def _eigen_directions(mob):
    """Attracting and repelling boundary directions of a trace-positive
    hyperbolic 2x2 matrix, as Euclidean-unit 2-vectors."""
    tr = mob[0, 0] + mob[1, 1]
    s = math.sqrt(tr * tr - 4.0)
    nu_plus = (tr + s) / 2.0
    a, b, c, d = mob[0, 0], mob[0, 1], mob[1, 0], mob[1, 1]

    def eigendir(nu):
        # (A - nu) v = 0; the two candidate rows give the same direction,
        # pick the numerically larger one.
        v1 = np.array([b, nu - a])
        v2 = np.array([nu - d, c])
        v = v1 if np.linalg.norm(v1) >= np.linalg.norm(v2) else v2
        return v / np.linalg.norm(v)

    return eigendir(nu_plus), eigendir(1.0 / nu_plus)


def trace_positive_mob(h):
    """The 2x2 representative with positive trace (input must not have
    trace within PARABOLIC_MARGIN of zero ... any hyperbolic is fine)."""
    mob = h.mob if isinstance(h, Isometry) else make_mob(h)
    return -mob if mob[0, 0] + mob[1, 1] < 0 else mob


def diagonalizer(h):
    """V in SL(2,R) with V^{-1} h V = diag(e^{ell/2}, e^{-ell/2}).

    Columns are the attracting and repelling eigendirections of the
    trace-positive representative, so conjugating the standard boost of the
    same length by V reproduces h with matching axis orientation.  Column
    scales are fixed deterministically (unit columns, then det-normalized
    with the sign pushed into the repelling column).
    """
    if classify(h) != "hyperbolic":
        raise NotHyperbolicError("diagonalizer requires a hyperbolic isometry")
    mob = trace_positive_mob(h)
    vp, vm = _eigen_directions(mob)
    det = vp[0] * vm[1] - vp[1] * vm[0]
    if det < 0:
        vm = -vm
        det = -det
    v = np.column_stack([vp, vm]) / math.sqrt(det)
    return Isometry(v)


def null_frame(h):
    """Null frame of a hyperbolic isometry (see NullFrame).

    Everything is closed-form in the 2x2 picture: the eigenvalue
    nu = e^{ell/2} of the trace-positive representative, its eigenvectors
    as fixed directions on the boundary, and the traceless part for x0.
    """
    if classify(h) != "hyperbolic":
        raise NotHyperbolicError("null frame requires a hyperbolic isometry")
    mob = trace_positive_mob(h)
    tr = mob[0, 0] + mob[1, 1]
    ell = 2.0 * math.acosh(tr / 2.0)
    lam = math.exp(-ell)

    dir_plus, dir_minus = _eigen_directions(mob)
    xp = _boundary_null_vector(*dir_plus)    # attracting
    xm = _boundary_null_vector(*dir_minus)   # repelling

    u = (mob - (tr / 2.0) * np.eye(2)) / math.sinh(ell / 2.0)
    x0 = sl2_to_vec(u)

    # det[x0 | xm | xp] equals |B(xm, xp)| > 0 in exact arithmetic; it
    # collapses (and can flip sign through noise) only when the two fixed
    # points nearly coincide on the boundary circle, i.e. the axis is so far
    # from the base frame that no reliable frame exists in this precision
    det = np.linalg.det(np.column_stack([x0, xm, xp]))
    if det <= 0 or det < 1e-13 * (1.0 + float(x0 @ x0)):
        raise NotHyperbolicError(
            "eigendirections are numerically degenerate: the axis is too far "
            "from the base frame for a reliable null frame at this precision"
        )
    return NullFrame(x0=x0, xm=xm, xp=xp, lam=lam, ell=ell)


def frame_reconstruction(nf):
    """The 3x3 matrix P diag(1, lam, 1/lam) P^{-1} determined by a frame."""
    p = nf.matrix()
    return p @ np.diag([1.0, nf.lam, 1.0 / nf.lam]) @ np.linalg.inv(p)


@dataclass(frozen=True)
class AxisRelation:
    """Relative position of two hyperbolic axes.

    kind is one of 'equal', 'cross', 'asymptotic', 'disjoint'.  For
    crossing axes, `angle` = arccos B(x0_1, x0_2) in (0, pi) and `point`
    is the intersection point on the hyperboloid B(x,x) = -1, x3 > 0.
    """

    kind: str
    angle: float | None = None
    point: np.ndarray | None = None


def axis_relation(h1, h2, tol=1e-9):
    """Classify the relative position of the axes of two hyperbolics.

    |B(x0_1, x0_2)| < 1 means the axes cross (at angle arccos of the
    pairing), = 1 with distinct axes means asymptotic, > 1 disjoint.
    Equality of axes is detected as x0_2 = +-x0_1.
    """
    f1 = null_frame(h1)
    f2 = null_frame(h2)
    pairing = lorentz_form(f1.x0, f2.x0)
    if min(np.max(np.abs(f2.x0 - f1.x0)), np.max(np.abs(f2.x0 + f1.x0))) <= 1e-8:
        return AxisRelation(kind="equal")
    if abs(abs(pairing) - 1.0) <= tol:
        return AxisRelation(kind="asymptotic")
    if abs(pairing) > 1.0:
        return AxisRelation(kind="disjoint")
    # Lorentzian cross product: B(u x v, w) = det[u, v, w]
    cross = J @ np.cross(f1.x0, f2.x0)
    norm2 = -lorentz_form(cross, cross)
    point = cross / math.sqrt(norm2)
    if point[2] < 0:
        point = -point
    return AxisRelation(kind="cross", angle=math.acos(np.clip(pairing, -1.0, 1.0)), point=point)
