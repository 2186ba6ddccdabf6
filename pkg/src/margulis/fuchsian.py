"""Holonomy representations of surfaces with geodesic boundary.

A surface S_{g,b} (genus g, b boundary components, excluding the disk and
the annulus) has free fundamental group of rank 2g + b - 1.  This module
builds discrete faithful representations into PSL(2,R) from Fenchel-Nielsen
style data:

  * `build_pants(l1, l2, l3)`: three-holed sphere with cuff lengths l_i and
    cuff product c1 c2 c3 = 1;
  * `build_once_holed_torus(l1, l2, theta)`: one-holed torus whose two
    generator geodesics have lengths l1, l2 and cross at angle theta, in the
    normalized position where the first axis points along e1 through the
    origin of the hyperboloid and the second is rotated by theta;
  * `assemble_surface(spec)`: S_{g,b} glued from a chain of g + b - 2 pants
    whose free cuffs carry the b boundary curves and g one-holed tori.

Free-group words are tuples of signed 1-based generator indices (-k is the
inverse of generator k), always freely reduced.

Chain layout.  Pants P_1 ... P_N (N = g + b - 2) are glued in a row along
interior curves f_1 ... f_{N-1}.  The free cuffs, in chain order, carry
boundary curves gamma^1 ... gamma^{b-1}, then the g handles, and finally
gamma^b, which is a word in the other generators rather than a generator
itself (the surface relation).  Pants relations fix the interior words:
f_1 = (s_1 s_2)^{-1} and f_i = s^{-1} f_{i-1}, where s is the pants-side
word of the free cuff (the generator gamma^i for a boundary cuff, the
*inverse* commutator [w1_j, w2_j]^{-1} for a handle cuff, since the two
sides of a gluing curve traverse it with opposite orientations).

Every positioned piece keeps its body on a consistent side of each of its
oriented boundary geodesics, so matching a new piece's cuff to the inverse
word of an old cuff automatically lands the two bodies on opposite sides of
the common axis; this is asserted at every gluing.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .lorentz import (
    Isometry,
    classify,
    diagonalizer,
    make_mob,
    trace_positive_mob,
    translation_length,
)

LENGTH_TOL = 1e-9          # lengths at or below this are rejected
DISCRETENESS_MARGIN = 1e-8  # commutator trace must be < -2 - margin
GLUE_TOL = 1e-8            # matched cuffs must agree to this


class InvalidLengthError(ValueError):
    """A requested geodesic length is too small (or not finite)."""


class InvalidAngleError(ValueError):
    """A crossing angle is outside the open interval (0, pi)."""


class NotDiscreteError(ValueError):
    """The requested parameters do not give a discrete holonomy."""


class GluingMismatchError(RuntimeError):
    """Matched cuffs disagree, or a glued piece landed on the wrong side."""


# ---------------------------------------------------------------------------
# words


def _free_reduce(letters):
    out = []
    for x in letters:
        x = int(x)
        if x == 0:
            raise ValueError("word letters are signed nonzero generator indices")
        if out and out[-1] == -x:
            out.pop()
        else:
            out.append(x)
    return tuple(out)


@dataclass(frozen=True)
class Word:
    """Freely reduced word in a free group.

    Letters are signed 1-based generator indices: 2 is the second generator,
    -2 its inverse.  The empty word is the identity.
    """

    letters: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "letters", _free_reduce(self.letters))

    @classmethod
    def parse(cls, text):
        """Parse a whitespace/comma separated list of signed indices."""
        toks = text.replace(",", " ").split()
        return cls(tuple(int(t) for t in toks))

    def __mul__(self, other):
        return Word(self.letters + other.letters)

    def inv(self):
        return Word(tuple(-x for x in reversed(self.letters)))

    def __pow__(self, n):
        if n < 0:
            return self.inv() ** (-n)
        w = Word()
        for _ in range(n):
            w = w * self
        return w

    def __len__(self):
        return len(self.letters)

    def __str__(self):
        return " ".join(str(x) for x in self.letters) if self.letters else "e"


def commutator(a, b):
    """[a, b] = a b a^-1 b^-1 for words."""
    return a * b * a.inv() * b.inv()


# ---------------------------------------------------------------------------
# representations


@dataclass
class FreeRep:
    """Representation of a free group into PSL(2,R) (with the SO(2,1) shadow).

    gens[k] is the image of generator k+1.  `labels` names distinguished
    curves as words in the generators; each generator usually appears under
    its own name as well.  `structure` is populated by assemble_surface.
    """

    gens: list[Isometry]
    labels: dict[str, Word] = field(default_factory=dict)
    structure: "SurfaceStructure | None" = None

    @property
    def rank(self):
        return len(self.gens)

    def word_of(self, w):
        """Coerce a label name, Word, or letter sequence to a Word."""
        if isinstance(w, str):
            if w in self.labels:
                return self.labels[w]
            return Word.parse(w)
        if isinstance(w, Word):
            return w
        return Word(tuple(w))

    def evaluate(self, w):
        """Image of a word (or label) under the representation."""
        word = self.word_of(w)
        out = Isometry.identity()
        for x in word.letters:
            k = abs(x) - 1
            if k >= len(self.gens):
                raise ValueError(f"word uses generator {abs(x)} but rank is {self.rank}")
            out = out @ (self.gens[k] if x > 0 else self.gens[k].inv())
        return out


def evaluate_word(rep, w):
    """Module-level alias for FreeRep.evaluate."""
    return rep.evaluate(w)


# ---------------------------------------------------------------------------
# surface data


@dataclass(frozen=True)
class Handle:
    """One-holed-torus gluing data: generator lengths and crossing angle."""

    l1: float
    l2: float
    theta: float


@dataclass
class SurfaceSpec:
    """Fenchel-Nielsen style data for S_{g,b}.

    boundary_lengths: b lengths of the boundary geodesics gamma^i.
    curve_lengths:    g+b-3 lengths of the interior chain curves f_k.
    twists:           g+b-3 interior twists followed by g handle twists.
    handles:          g triples (l1, l2, theta) for the one-holed tori.
    """

    g: int
    b: int
    boundary_lengths: list[float]
    curve_lengths: list[float] = field(default_factory=list)
    twists: list[float] = field(default_factory=list)
    handles: list[Handle] = field(default_factory=list)

    def __post_init__(self):
        self.handles = [h if isinstance(h, Handle) else Handle(**h) for h in self.handles]
        if self.g < 0 or self.b < 1 or (self.g, self.b) in ((0, 1), (0, 2)):
            raise ValueError(f"no such surface: genus {self.g} with {self.b} boundary components")
        n_interior = max(self.g + self.b - 3, 0)
        if len(self.boundary_lengths) != self.b:
            raise ValueError(f"expected {self.b} boundary lengths, got {len(self.boundary_lengths)}")
        if len(self.curve_lengths) != n_interior:
            raise ValueError(f"expected {n_interior} interior curve lengths, got {len(self.curve_lengths)}")
        if len(self.twists) != n_interior + self.g:
            raise ValueError(
                f"expected {n_interior} interior + {self.g} handle twists, got {len(self.twists)}"
            )
        if len(self.handles) != self.g:
            raise ValueError(f"expected {self.g} handles, got {len(self.handles)}")
        for ell in list(self.boundary_lengths) + list(self.curve_lengths):
            _check_length(ell)
        for h in self.handles:
            _check_length(h.l1)
            _check_length(h.l2)
            if not (0.0 < h.theta < math.pi):
                raise InvalidAngleError(f"crossing angle {h.theta} is not in (0, pi)")

    def to_json(self):
        return json.dumps(
            {
                "g": self.g,
                "b": self.b,
                "boundary_lengths": list(self.boundary_lengths),
                "curve_lengths": list(self.curve_lengths),
                "twists": list(self.twists),
                "handles": [{"l1": h.l1, "l2": h.l2, "theta": h.theta} for h in self.handles],
            },
            indent=2,
        )

    @classmethod
    def from_json(cls, text):
        d = json.loads(text)
        return cls(
            g=d["g"],
            b=d["b"],
            boundary_lengths=d["boundary_lengths"],
            curve_lengths=d.get("curve_lengths", []),
            twists=d.get("twists", []),
            handles=[Handle(**h) for h in d.get("handles", [])],
        )


@dataclass
class SurfaceStructure:
    """Combinatorics of an assembled surface, for coordinate bookkeeping.

    For each interior curve f_k, `interior_sides[k]` lists the free-generator
    names on the two sides of the curve (the curve itself belongs to the
    second side's subgroup).  For handle j, the torus side is exactly
    (w1_j, w2_j) and the handle curve g_j = [w1_j, w2_j].
    """

    spec: SurfaceSpec
    boundary_labels: list[str]
    interior_labels: list[str]
    handle_labels: list[str]
    handle_gens: list[tuple[str, str]]
    interior_sides: list[tuple[list[str], list[str]]]


def _check_length(ell):
    if not (np.isfinite(ell) and ell > LENGTH_TOL):
        raise InvalidLengthError(f"geodesic length must exceed {LENGTH_TOL}, got {ell}")


def _mobs_agree(a, b, tol=GLUE_TOL):
    """Entrywise agreement of two canonical-sign 2x2 matrices, relative to
    their magnitude (long chains produce large entries)."""
    scale = max(1.0, float(np.max(np.abs(b))))
    return float(np.max(np.abs(a - b))) <= tol * scale


# ---------------------------------------------------------------------------
# standard pieces


def _rot(phi):
    return np.array([[math.cos(phi), -math.sin(phi)], [math.sin(phi), math.cos(phi)]])


def _boost(ell):
    return np.diag([math.exp(ell / 2.0), math.exp(-ell / 2.0)])


def _x_boost(s):
    """Boost along the geodesic (-1, 1) (the unit half-circle)."""
    return np.array([[math.cosh(s), math.sinh(s)], [math.sinh(s), math.cosh(s)]])


def build_pants(l1, l2, l3):
    """Three-holed sphere with cuff lengths (l1, l2, l3).

    Generators are the first two cuffs c1, c2; the third cuff is labeled
    c3 = (c1 c2)^{-1}, so c1 c2 c3 = 1.  c1 is the standard boost along the
    imaginary-axis geodesic; c2's axis is pushed off to the side at the
    unique distance making tr(c1 c2) = -2 cosh(l3/2).  The body of the pants
    (probed by each cuff axis against the others) lies on a consistent side
    of all three oriented cuffs, which is what makes gluings along inverse
    words land on opposite sides automatically.
    """
    for ell in (l1, l2, l3):
        _check_length(ell)
    a, b, c = l1 / 2.0, l2 / 2.0, l3 / 2.0
    # distance parameter between the two axes: from the trace of the product.
    # The sign of s picks the mirror image; -s puts the body of the pants on
    # the same side of its oriented cuffs as the one-holed torus keeps
    # relative to its boundary, so the two kinds of piece glue directly.
    arg = (math.cosh(a) * math.cosh(b) + math.cosh(c)) / (math.sinh(a) * math.sinh(b))
    s = -math.acosh(arg) / 2.0
    c1 = Isometry(_boost(l1))
    c2 = Isometry(_x_boost(s) @ _boost(-l2) @ _x_boost(-s))
    rep = FreeRep(gens=[c1, c2])
    rep.labels = {
        "c1": Word((1,)),
        "c2": Word((2,)),
        "c3": Word((-2, -1)),
    }
    return rep


def torus_commutator_trace(l1, l2, theta):
    """tr[w1, w2] from the character variety identity
    tr[A,B] = x^2 + y^2 + z^2 - xyz - 2 with x = tr A, y = tr B, z = tr AB."""
    x = 2.0 * math.cosh(l1 / 2.0)
    y = 2.0 * math.cosh(l2 / 2.0)
    z = 2.0 * (
        math.cosh(l1 / 2.0) * math.cosh(l2 / 2.0)
        + math.sinh(l1 / 2.0) * math.sinh(l2 / 2.0) * math.cos(theta)
    )
    return x * x + y * y + z * z - x * y * z - 2.0


def torus_boundary_length(l1, l2, theta):
    """Length of the boundary geodesic [w1, w2] of the one-holed torus."""
    tr = torus_commutator_trace(l1, l2, theta)
    return 2.0 * math.acosh(abs(tr) / 2.0)


def build_once_holed_torus(l1, l2, theta):
    """One-holed torus in normalized position.

    w1 is the boost of length l1 along the e1-axis of the hyperboloid
    (matrix diag(e^{l1/2}, e^{-l1/2})); w2 is the boost of length l2 along
    the axis through the same point rotated by theta.  The boundary curve is
    the commutator g = [w1, w2] = w1 w2 w1^{-1} w2^{-1}; discreteness holds
    exactly when tr g < -2, and parameters within DISCRETENESS_MARGIN of
    that boundary are rejected.
    """
    _check_length(l1)
    _check_length(l2)
    if not (0.0 < theta < math.pi):
        raise InvalidAngleError(f"crossing angle {theta} is not in (0, pi)")
    w1 = Isometry(_boost(l1))
    w2 = Isometry(_rot(theta / 2.0) @ _boost(l2) @ _rot(-theta / 2.0))
    g = w1 @ w2 @ w1.inv() @ w2.inv()
    tr = g.mob[0, 0] + g.mob[1, 1]
    # the canonical-sign representative can hide the sign; recover it from
    # the word in SL(2,R) directly
    m = (
        _boost(l1)
        @ (_rot(theta / 2.0) @ _boost(l2) @ _rot(-theta / 2.0))
        @ _boost(-l1)
        @ (_rot(theta / 2.0) @ _boost(-l2) @ _rot(-theta / 2.0))
    )
    tr = m[0, 0] + m[1, 1]
    if tr > -2.0 - DISCRETENESS_MARGIN:
        raise NotDiscreteError(
            f"commutator trace {tr} is not below -2: the two curves do not "
            "embed in a hyperbolic one-holed torus with these lengths and angle"
        )
    rep = FreeRep(gens=[w1, w2])
    rep.labels = {
        "w1": Word((1,)),
        "w2": Word((2,)),
        "g": Word((1, 2, -1, -2)),
    }
    return rep


# ---------------------------------------------------------------------------
# axis sides


def _boundary_apply(mob, p, q):
    """Image of the boundary point p/q under a 2x2 matrix, projectively."""
    return mob[0, 0] * p + mob[0, 1] * q, mob[1, 0] * p + mob[1, 1] * q


def _fixed_directions(h):
    mob = trace_positive_mob(h)
    from .lorentz import _eigen_directions

    return _eigen_directions(mob)


def axis_side(h, probe):
    """Side (+1 or -1) of the oriented axis of h on which probe's axis lies.

    Conjugate so the axis of h is the imaginary-axis geodesic oriented
    upward; the sign of the real part of the probe's fixed points is the
    side.  Raises GluingMismatchError if the two fixed points of the probe
    disagree (its axis crosses the axis of h).
    """
    v = diagonalizer(h).inv().mob
    signs = []
    for d in _fixed_directions(probe):
        p, q = _boundary_apply(v, d[0], d[1])
        val = p * q
        if abs(val) < 1e-13:
            continue  # fixed point at 0 or infinity: on the axis boundary
        signs.append(1.0 if val > 0 else -1.0)
    if not signs or min(signs) != max(signs):
        raise GluingMismatchError("probe axis is not on one side of the gluing axis")
    return signs[0]


# ---------------------------------------------------------------------------
# assembly


def assemble_surface(spec):
    """Discrete holonomy of S_{g,b} from a chain-of-pants decomposition.

    Returns a FreeRep of rank 2g + b - 1 whose generators are, in order,
    gamma_1 ... gamma_{b-1}, then w1_1, w2_1, ..., w1_g, w2_g.  Labels:

      gamma_i   boundary curves, i = 1..b (gamma_b is a product word),
      f_k       interior chain curves, k = 1..g+b-3,
      g_j       handle curves [w1_j, w2_j],
      w1_j, w2_j  handle generators.

    The surface S_{1,1} is not a chain of pants; use
    build_once_holed_torus for it.
    """
    g, b = spec.g, spec.b
    if g + b < 3:
        raise ValueError("assemble_surface needs g + b >= 3; S_{1,1} is built by build_once_holed_torus")
    n_pants = g + b - 2
    n_interior = g + b - 3

    # slots: the free cuffs in chain order
    slots = (
        [("boundary", i) for i in range(1, b)]
        + [("handle", j) for j in range(1, g + 1)]
        + [("boundary", b)]
    )

    # standard tori and the cuff length each handle imposes on its pants
    tori = [build_once_holed_torus(h.l1, h.l2, h.theta) for h in spec.handles]
    tor_boundary = [t.evaluate("g") for t in tori]

    def slot_length(slot):
        kind, idx = slot
        if kind == "boundary":
            return spec.boundary_lengths[idx - 1]
        return translation_length(tor_boundary[idx - 1])

    interior_twists = spec.twists[:n_interior]
    handle_twists = spec.twists[n_interior:]

    gens: list[Isometry | None] = [None] * (2 * g + b - 1)
    labels: dict[str, Word] = {}
    handle_gens: list[tuple[str, str]] = []

    def gen_index(slot):
        """1-based index block of the free generators carried by a slot."""
        kind, idx = slot
        if kind == "boundary":
            return idx  # gamma_idx, only for idx < b
        return b + 2 * (idx - 1)  # w1_idx at b + 2(idx-1), w2_idx next

    def attach(slot, cuff_iso, pants_probe):
        """Bind a positioned free cuff to its slot; return the pants-side word.

        For a boundary slot the cuff isometry becomes the generator.  For a
        handle slot the standard torus is conjugated so that its boundary
        commutator equals the inverse of the pants-side cuff, twisted by the
        handle twist, and checked to land on the opposite side of the axis
        from the pants body.
        """
        kind, idx = slot
        if kind == "boundary":
            k = gen_index(slot)
            gens[k - 1] = cuff_iso
            labels[f"gamma_{idx}"] = Word((k,))
            return Word((k,))
        j = idx
        torus = tori[j - 1]
        target = cuff_iso.inv()  # torus-side boundary word is the inverse curve
        w_target = diagonalizer(target) @ Isometry(_boost(handle_twists[j - 1]))
        w_std = diagonalizer(tor_boundary[j - 1])
        conj = w_target @ w_std.inv()
        k = gen_index(slot)
        w1 = conj @ torus.gens[0] @ conj.inv()
        w2 = conj @ torus.gens[1] @ conj.inv()
        gens[k - 1] = w1
        gens[k] = w2
        comm = w1 @ w2 @ w1.inv() @ w2.inv()
        if not _mobs_agree(comm.mob, target.mob):
            raise GluingMismatchError(f"handle {j}: boundary commutator does not match the cuff")
        torus_side = axis_side(cuff_iso, w1)
        if torus_side != -pants_probe:
            raise GluingMismatchError(f"handle {j}: torus landed on the pants side of the cuff")
        word = Word((k, k + 1, -k, -(k + 1)))
        labels[f"w1_{j}"] = Word((k,))
        labels[f"w2_{j}"] = Word((k + 1,))
        labels[f"g_{j}"] = word
        return word.inv()

    f_word: Word | None = None
    f_iso: Isometry | None = None
    f_probe: Isometry | None = None  # an axis inside the previous pants
    for i in range(1, n_pants + 1):
        first = i == 1
        last = i == n_pants
        if first:
            cuff_slots = [slots[0], slots[1]]
        else:
            cuff_slots = [slots[i]]
        if last:
            cuff_slots.append(slots[n_pants + 1])

        # cuff lengths for the standard pants
        if first:
            lens = [slot_length(cuff_slots[0]), slot_length(cuff_slots[1])]
        else:
            lens = [translation_length(f_iso), slot_length(cuff_slots[0])]
        if last:
            lens.append(slot_length(cuff_slots[-1]))
        else:
            lens.append(spec.curve_lengths[i - 1])

        std = build_pants(*lens)
        if first:
            conj = Isometry.identity()
        else:
            conj = diagonalizer(f_iso.inv()) @ Isometry(_boost(interior_twists[i - 2]))
        c1 = conj @ std.gens[0] @ conj.inv()
        c2 = conj @ std.gens[1] @ conj.inv()
        c3 = (c1 @ c2).inv()

        if first:
            s1 = attach(cuff_slots[0], c1, axis_side(c1, c2))
            s2 = attach(cuff_slots[1], c2, axis_side(c2, c1))
            chain_word = (s1 * s2).inv()
        else:
            if not _mobs_agree(c1.mob, f_iso.inv().mob):
                raise GluingMismatchError(f"pants {i}: chain cuff does not match f_{i-1}")
            if axis_side(f_iso, c2) != -axis_side(f_iso, f_probe):
                raise GluingMismatchError(f"pants {i}: landed on the same side as pants {i-1}")
            s = attach(cuff_slots[0], c2, axis_side(c2, c1))
            chain_word = s.inv() * f_word
        if last:
            kind, idx = cuff_slots[-1]
            labels[f"gamma_{idx}"] = chain_word
            closing_iso = c3
        else:
            # the pants relations make rho(f_i) = c3 = (c1 c2)^{-1}
            labels[f"f_{i}"] = chain_word
            f_word = chain_word
            f_iso = c3
            f_probe = c2

    for j in range(1, g + 1):
        handle_gens.append((f"w1_{j}", f"w2_{j}"))

    rep = FreeRep(gens=[x for x in gens if x is not None], labels=labels)
    if rep.rank != 2 * g + b - 1:
        raise GluingMismatchError("internal error: generator count mismatch")

    # the closing boundary word must evaluate to the closing cuff and realize
    # its requested length
    check = rep.evaluate(labels[f"gamma_{b}"])
    if not _mobs_agree(check.mob, closing_iso.mob):
        raise GluingMismatchError("closing boundary word does not evaluate to the closing cuff")
    if abs(translation_length(check) - spec.boundary_lengths[b - 1]) > 1e-6:
        raise GluingMismatchError("closing boundary does not realize its requested length")

    # structural bookkeeping: free generators on the two sides of each f_k
    interior_sides = []
    for k in range(1, n_interior + 1):
        near: list[str] = []
        far: list[str] = []
        for pos, slot in enumerate(slots):
            kind, idx = slot
            if kind == "boundary" and idx == b:
                continue
            names = [f"gamma_{idx}"] if kind == "boundary" else [f"w1_{idx}", f"w2_{idx}"]
            # slots 0..k belong to pants P_1..P_k (near side of f_k)
            (near if pos <= k else far).extend(names)
        interior_sides.append((near, far))

    rep.structure = SurfaceStructure(
        spec=spec,
        boundary_labels=[f"gamma_{i}" for i in range(1, b + 1)],
        interior_labels=[f"f_{k}" for k in range(1, n_interior + 1)],
        handle_labels=[f"g_{j}" for j in range(1, g + 1)],
        handle_gens=handle_gens,
        interior_sides=interior_sides,
    )
    return rep
