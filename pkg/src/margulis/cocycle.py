"""Translational deformation cocycles of Fuchsian representations.

An affine deformation of a holonomy rho assigns to each group element a
translation part u(h) in R^{2,1} subject to the cocycle rule

    u(h1 h2) = u(h1) + rho(h1) u(h2),

so u is determined by its values on free generators and any generator
values define a cocycle.  Coboundaries u(h) = v - rho(h) v are the
deformations obtained by conjugating the affine action by the translation
v; the quotient (cocycles mod coboundaries) is the tangent space of the
deformation space.

The Margulis invariant of a cocycle at a hyperbolic h,

    mar(u, h) = B(u(h), x0(h)),

pairs the translation part with the unit axis vector of h.  It is a class
function (conjugation invariant), equal on h and h^{-1}, vanishes on
coboundaries, and is linear in u; these are the structural identities the
tests pin down.  Geometrically it is the signed displacement along the
axis direction of the associated affine isometry, and (after the factor-2
calibration in twistflow) half the derivative of translation length along
the deformation.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .lorentz import Isometry, classify, diagonalizer, lorentz_form, null_frame
from .fuchsian import FreeRep, Word

COHOMOLOGY_TOL = 1e-8


@dataclass
class Cocycle:
    """A cocycle for rep, stored as its values on the free generators.

    values has shape (rank, 3); row k is u(generator k+1).
    """

    rep: FreeRep
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.rep.rank, 3):
            raise ValueError(
                f"expected values of shape ({self.rep.rank}, 3), got {self.values.shape}"
            )

    @classmethod
    def zero(cls, rep):
        return cls(rep, np.zeros((rep.rank, 3)))

    def evaluate(self, w):
        """Value u(w) on a word (or label name)."""
        word = self.rep.word_of(w)
        acc = np.zeros(3)
        prefix = np.eye(3)
        for x in word.letters:
            k = abs(x) - 1
            iso = self.rep.gens[k]
            if x > 0:
                val = self.values[k]
                mat = iso.mat
            else:
                mat = iso.inv().mat
                val = -mat @ self.values[k]  # u(g^{-1}) = -rho(g)^{-1} u(g)
            acc = acc + prefix @ val
            prefix = prefix @ mat
        return acc

    def __add__(self, other):
        if other.rep is not self.rep and other.rep.gens is not self.rep.gens:
            raise ValueError("cocycles live over different representations")
        return Cocycle(self.rep, self.values + other.values)

    def __sub__(self, other):
        return self + (-1.0) * other

    def __rmul__(self, scalar):
        return Cocycle(self.rep, float(scalar) * self.values)

    def to_json(self):
        return json.dumps({"generator_values": self.values.tolist()}, indent=2)

    @classmethod
    def from_json(cls, rep, text):
        d = json.loads(text)
        return cls(rep, np.asarray(d["generator_values"], dtype=float))


def coboundary(rep, v):
    """The cocycle u(h) = v - rho(h) v (conjugation of the affine action)."""
    v = np.asarray(v, dtype=float)
    vals = np.array([v - g.mat @ v for g in rep.gens])
    return Cocycle(rep, vals)


def margulis(cocycle, w):
    """Margulis invariant B(u(w), x0(w)) of a hyperbolic word.

    Paired block by block: B(u(w), x0) = sum_m B(u(block_m), y_m) with
    y_m the axis vector transported back through the preceding blocks.
    Two scale problems are dodged this way.  Expanding u(w) outright
    would run the stored values through the word's prefix matrices,
    whose entries grow without bound along long words; here y moves only
    by whole-block holonomies, which are curve-scale.  And inside a
    commutator block the transport itself would take a large excursion,
    so those four letters are evaluated as one value in a frame centered
    on the block's own axis, where its generators are smallest.
    """
    return _margulis_terms(cocycle, w)[0]


def _margulis_terms(cocycle, w):
    """(Margulis invariant, pairing mass) of a hyperbolic word.

    The invariant is a sum of pairings B(value, y) that can cancel; the
    mass adds up their coarse sizes |value||y| instead.  Rounding in the
    invariant scales with the mass, not with the (cancelled) result, so
    the mass is the honest yardstick for agreement checks on it.
    """
    rep = cocycle.rep
    word = rep.word_of(w)
    h = rep.evaluate(word)
    nf = null_frame(h)
    y = nf.x0
    total = 0.0
    mass = 0.0
    for chunk in _commutator_chunks(word.letters):
        if len(chunk) == 1:
            x = chunk[0]
            k = abs(x) - 1
            iso = rep.gens[k]
            if x > 0:
                total += lorentz_form(cocycle.values[k], y)
                mass += float(np.linalg.norm(cocycle.values[k]) * np.linalg.norm(y))
                y = iso.inv().apply(y)
            else:
                y = iso.apply(y)
                total -= lorentz_form(cocycle.values[k], y)
                mass += float(np.linalg.norm(cocycle.values[k]) * np.linalg.norm(y))
        else:
            value = _block_value(cocycle, Word(chunk))
            total += lorentz_form(value, y)
            mass += float(np.linalg.norm(value) * np.linalg.norm(y))
            y = rep.evaluate(Word(chunk)).inv().apply(y)
    return total, mass


def _commutator_chunks(letters):
    """Split letters into commutator patterns (a, b, -a, -b) and singletons."""
    chunks = []
    i = 0
    while i < len(letters):
        nxt = letters[i : i + 4]
        if len(nxt) == 4 and nxt[2] == -nxt[0] and nxt[3] == -nxt[1]:
            chunks.append(nxt)
            i += 4
        else:
            chunks.append(letters[i : i + 1])
            i += 1
    return chunks


def _block_value(cocycle, word):
    """u(word) for a short word, in the frame where its letters are smallest.

    Conjugating by the diagonalizer of rho(word) helps exactly when the
    word's letters live near its axis (handle commutators); when it would
    inflate the generators instead, the ambient frame is kept.
    """
    rep = cocycle.rep
    used = sorted({abs(x) for x in word.letters})
    gens = {k: rep.gens[k - 1] for k in used}
    vals = {k: cocycle.values[k - 1] for k in used}
    center = None
    h = rep.evaluate(word)
    if classify(h) == "hyperbolic":
        cand = diagonalizer(h)
        cinv = cand.inv()
        conj = {k: cinv @ g @ cand for k, g in gens.items()}
        if max(np.max(np.abs(g.mat)) for g in conj.values()) < max(
            np.max(np.abs(g.mat)) for g in gens.values()
        ):
            center = cand
            gens = conj
            vals = {k: cinv.apply(v) for k, v in vals.items()}
    acc = np.zeros(3)
    prefix = np.eye(3)
    for x in word.letters:
        k = abs(x)
        iso = gens[k]
        if x > 0:
            val = vals[k]
            mat = iso.mat
        else:
            mat = iso.inv().mat
            val = -mat @ vals[k]
        acc = acc + prefix @ val
        prefix = prefix @ mat
    return acc if center is None else center.apply(acc)


def _centered_restriction(cocycle, word, center):
    """The cocycle conjugated by center, restricted to the word's letters.

    Returns (sub_cocycle, relabelled_word) with sub_cocycle living over the
    conjugated generators that actually occur in the word.
    """
    rep = cocycle.rep
    cinv = center.inv()
    used = sorted({abs(x) for x in word.letters})
    remap = {k: i + 1 for i, k in enumerate(used)}
    gens = [cinv @ rep.gens[k - 1] @ center for k in used]
    vals = np.array([cinv.apply(cocycle.values[k - 1]) for k in used])
    letters = tuple(
        remap[abs(x)] if x > 0 else -remap[abs(x)] for x in word.letters
    )
    return Cocycle(FreeRep(gens=gens), vals), Word(letters)


def translation_fit(cocycle_a, cocycle_b):
    """Best translation v with (coboundary of v) = a - b, and its residual.

    Solves the stacked linear system (I - rho(g_k)) v = (a - b)(g_k) in the
    least-squares sense.  The residual is the largest entry of the unmatched
    part, scaled by the size of the right-hand side.
    """
    rep = cocycle_a.rep
    rows = np.vstack([np.eye(3) - g.mat for g in rep.gens])
    rhs = (cocycle_a.values - cocycle_b.values).reshape(-1)
    v, *_ = np.linalg.lstsq(rows, rhs, rcond=None)
    resid = np.max(np.abs(rows @ v - rhs))
    scale = 1.0 + np.max(np.abs(rhs)) if rhs.size else 1.0
    return v, resid / scale


def cohomologous(cocycle_a, cocycle_b, tol=COHOMOLOGY_TOL):
    """Whether two cocycles differ by a coboundary (within tolerance)."""
    _, resid = translation_fit(cocycle_a, cocycle_b)
    return bool(resid <= tol)
