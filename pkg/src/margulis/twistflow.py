"""Length derivatives of twist deformations, checked three ways.

A translational cocycle u deforms a Fuchsian representation: each
generator image g picks up a first-order factor exp(t * vec_to_sl2(u(g))).
Along the deformed family every hyperbolic word keeps a translation
length, and its derivative at t = 0 is an algebraic quantity: twice the
Margulis invariant of u on the word.  For the unit affine twist along a
separating curve the invariant collapses further, to a sum of crossing
cosines: one Lorentzian pairing of unit axis vectors per crossing of the
curve by the word.

This module realizes the deformation (`deform_rep`), differentiates
lengths by central differences (`length_derivative`), evaluates the
crossing-cosine sum (`cosine_sum`), and packages the three-way agreement
as a report (`verify_cosine_formula`, and `multi_twist_derivative` for a
linear combination of twists along pairwise disjoint curves).  Words are
handed around split into blocks that alternate between the two sides of
the curve (`AlternatingWord`); only the far-side blocks contribute
crossings.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cocycle import Cocycle, margulis
from .fuchsian import FreeRep, Word
from .glue import GluePartition, affine_twist
from .lorentz import (
    Isometry,
    NotHyperbolicError,
    classify,
    lorentz_form,
    null_frame,
    translation_length,
    vec_to_sl2,
)

FD_STEP = 1e-5          # default central-difference step
TRACE_MARGIN = 1e-6     # required |tr| - 2 of the word being differentiated
THIN_MARGIN = 1e-2      # below this margin the difference is Richardson-corrected


class StepTooLarge(RuntimeError):
    """A finite-difference endpoint left the hyperbolic locus."""


class AxesDontCross(ValueError):
    """A rotation's axis fails to cross the curve axis transversally."""


class CurvesNotDisjoint(ValueError):
    """The partitions of a multi-twist are not pairwise compatible."""


# ---------------------------------------------------------------------------
# deforming a representation along a cocycle


def _sl2_exp(m):
    """exp of a traceless 2x2 matrix via its quadratic minimal polynomial."""
    d = -(m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0])  # m @ m == d * I
    if d > 0.0:
        r = math.sqrt(d)
        c, s = math.cosh(r), math.sinh(r) / r
    elif d < 0.0:
        r = math.sqrt(-d)
        c, s = math.cos(r), math.sin(r) / r
    else:
        c, s = 1.0, 1.0
    return c * np.eye(2) + s * np.asarray(m, dtype=float)


def deform_rep(rep, u, t):
    """The representation moved time t along the deformation direction u.

    Each generator image g becomes exp(t * vec_to_sl2(u(g))) * g, so the
    velocity of the generator image at t = 0 is vec_to_sl2(u(g)) * g.  At
    t = 0 the input rep itself is returned.  Labels carry over; the
    surface structure does not (lengths drift with t, so the assembled
    geometry no longer describes the deformed rep).
    """
    if t == 0.0:
        return rep
    gens = [
        Isometry(_sl2_exp(t * vec_to_sl2(v)) @ g.mob)
        for v, g in zip(u.values, rep.gens)
    ]
    return FreeRep(gens, labels=dict(rep.labels))


def length_derivative(rep, u, w, step=FD_STEP):
    """d/dt of the translation length of w along deform_rep(rep, u, t) at 0.

    Central difference with the given step.  When the word's trace margin
    is thin the square-root behaviour of the length near the parabolic
    locus inflates the truncation error, so a second difference at ten
    times the step Richardson-corrects the leading term.

    Raises NotHyperbolicError when the undeformed word is not safely
    hyperbolic, StepTooLarge when an endpoint of the difference leaves
    the hyperbolic locus.
    """
    word = rep.word_of(w)
    h = rep.evaluate(word)
    margin = abs(h.trace) - 2.0
    if classify(h) != "hyperbolic" or margin <= TRACE_MARGIN:
        raise NotHyperbolicError(
            f"word {word} has trace margin {margin:.3e}; cannot differentiate its length"
        )

    def central(s):
        ells = []
        for t in (s, -s):
            g = deform_rep(rep, u, t).evaluate(word)
            if classify(g) != "hyperbolic":
                raise StepTooLarge(
                    f"step {s:g} leaves the hyperbolic locus at t = {t:g} for word {word}"
                )
            ells.append(translation_length(g))
        return (ells[0] - ells[1]) / (2.0 * s)

    if margin < THIN_MARGIN:
        coarse = central(10.0 * step)
        fine = central(step)
        return (100.0 * fine - coarse) / 99.0
    return central(step)


# ---------------------------------------------------------------------------
# words split along a separating curve


@dataclass(frozen=True)
class AlternatingWord:
    """A word presented as nonempty blocks alternating between sides 1 and 2.

    blocks is a sequence of (side, word) pairs; consecutive sides differ.
    Which generators belong to which side is the business of the
    GluePartition the word is used with; membership is checked there.
    """

    blocks: tuple

    def __post_init__(self):
        blocks = tuple((side, Word(w.letters) if isinstance(w, Word) else Word(tuple(w))) for side, w in self.blocks)
        object.__setattr__(self, "blocks", blocks)
        if not blocks:
            raise ValueError("an alternating word needs at least one block")
        for side, w in blocks:
            if side not in (1, 2):
                raise ValueError(f"block side must be 1 or 2, got {side!r}")
            if not w.letters:
                raise ValueError("blocks must be nonempty")
        for (s1, _), (s2, _) in zip(blocks, blocks[1:]):
            if s1 == s2:
                raise ValueError("consecutive blocks must lie on opposite sides")

    @classmethod
    def decompose(cls, p, w):
        """Split a word into maximal runs on one side of the partition p."""
        word = p.rep.word_of(w)
        if not word.letters:
            raise ValueError("cannot decompose the empty word")
        runs = []
        for x in word.letters:
            side = 1 if abs(x) in p.q1_gens else 2
            if runs and runs[-1][0] == side:
                runs[-1][1].append(x)
            else:
                runs.append([side, [x]])
        return cls(tuple((side, Word(tuple(ls))) for side, ls in runs))

    def word(self):
        """The concatenation of the blocks."""
        letters = []
        for _, w in self.blocks:
            letters.extend(w.letters)
        return Word(tuple(letters))

    def __str__(self):
        return " | ".join(f"{side}:{w}" for side, w in self.blocks)


def _coerce_blocks(p, s):
    """Blocks of s against partition p, validated and cyclically merged.

    Returns a list of (side, letters) with maximal blocks in cyclic order:
    if the first and last blocks share a side they are one cyclic block,
    listed once starting at the last block's letters.  Raises ValueError
    when a block strays from its side's generators or when letters cancel
    across block boundaries (the word must be cyclically reduced as
    written, otherwise the rotations below are not conjugates of it).
    """
    if not isinstance(s, AlternatingWord):
        s = AlternatingWord.decompose(p, s)
    blocks = []
    for side, w in s.blocks:
        gens = p.q1_gens if side == 1 else p.q2_gens
        stray = {abs(x) for x in w.letters} - gens
        if stray:
            raise ValueError(
                f"block {w} on side {side} uses generators {sorted(stray)} of the other side"
            )
        blocks.append((side, list(w.letters)))
    if len(blocks) > 1 and blocks[0][0] == blocks[-1][0]:
        side, tail = blocks.pop()
        blocks[0] = (side, tail + blocks[0][1])
    total = sum(len(ls) for _, ls in blocks)
    flat = []
    for _, ls in blocks:
        flat.extend(ls)
    if len(Word(tuple(flat)).letters) != total:
        raise ValueError("letters cancel across block boundaries; word is not cyclically reduced")
    return blocks


def _rotation(blocks, j):
    """The word read cyclically starting at block j."""
    letters = []
    for side, ls in blocks[j:] + blocks[:j]:
        letters.extend(ls)
    return Word(tuple(letters))


def crossing_count(p, s):
    """Number of crossing cosines the word contributes against p's curve.

    Each far-side (side 2) block of the cyclic word enters the curve once
    and leaves it once, so the count is twice the number of such blocks;
    it is zero when the word stays on one side.
    """
    blocks = _coerce_blocks(p, s)
    if len({side for side, _ in blocks}) < 2:
        return 0
    return 2 * sum(1 for side, _ in blocks if side == 2)


def _crossing_pairings(rep, p, blocks):
    """The signed unit-vector pairings of every crossing, in word order.

    For each side-2 block, the cyclic rotation starting at the block and
    the rotation starting right after it are the conjugates of the word
    whose axes cross the curve where the block enters and leaves; their
    neutral axis vectors paired against the curve's give the two crossing
    cosines (the leaving one with a minus sign).  Raises AxesDontCross,
    naming the rotation, when a pairing falls outside the open unit
    interval, i.e. the axes are tangent or disjoint.
    """
    y0 = null_frame(rep.evaluate(p.f)).x0
    terms = []
    for j, (side, _) in enumerate(blocks):
        if side != 2:
            continue
        for sign, start in ((1.0, j), (-1.0, (j + 1) % len(blocks))):
            rot = _rotation(blocks, start)
            c = lorentz_form(null_frame(rep.evaluate(rot)).x0, y0)
            if abs(c) >= 1.0:
                raise AxesDontCross(
                    f"axis of rotation {rot} does not cross the curve axis: |B| = {abs(c):.6f} >= 1"
                )
            terms.append(sign * c)
    return terms


def cosine_sum(rep, p, s):
    """Sum of crossing cosines of a word against the curve of partition p.

    s may be an AlternatingWord, a Word, or anything rep.word_of accepts;
    plain words are decomposed along p.  A word confined to one side
    never crosses and contributes zero.  The value equals the Margulis
    invariant of the unit affine twist along p on the word; the pairing
    route here never leaves unit scale, one term per crossing.
    """
    if p.rep is not rep:
        raise ValueError("partition belongs to a different rep")
    blocks = _coerce_blocks(p, s)
    if len({side for side, _ in blocks}) < 2:
        return 0.0
    return float(sum(_crossing_pairings(rep, p, blocks)))


# ---------------------------------------------------------------------------
# three-way verification reports


def _as_word(rep, s):
    return s.word() if isinstance(s, AlternatingWord) else rep.word_of(s)


def verify_cosine_formula(rep, p, s, step=FD_STEP):
    """Three-way agreement report for one word and one twist curve.

    Computes the Margulis invariant of the unit affine twist along p on
    the word (generic cocycle pairing), the crossing cosine sum (axis
    geometry), and the finite-difference length derivative (deformation),
    and reports |mar - cosine_sum| and |fd/2 - mar|.
    """
    if p.rep is not rep:
        raise ValueError("partition belongs to a different rep")
    word = _as_word(rep, s)
    at = affine_twist(p)
    mar = margulis(at, word)
    cosum = cosine_sum(rep, p, s)
    fd = length_derivative(rep, at, word, step=step)
    return {
        "word": str(word),
        "mar": mar,
        "cosine_sum": cosum,
        "fd_derivative": fd,
        "residual_algebraic": abs(mar - cosum),
        "residual_fd": abs(fd / 2.0 - mar),
    }


def _compatible_sides(a, b, rank):
    """Whether two generator partitions can come from disjoint curves.

    The far-side generator sets must be nested, disjoint, or jointly
    covering; anything else forces the curves to intersect.
    """
    inter = a & b
    if not inter or inter == a or inter == b:
        return True
    return a | b == set(range(1, rank + 1))


def multi_twist_derivative(rep, twists, s, step=FD_STEP):
    """Three-way report for a linear combination of disjoint-curve twists.

    twists is a sequence of (partition, weight).  The cocycle is the
    weighted sum of unit affine twists; its invariant on the word should
    match the same weighting of the per-curve cosine sums, and half the
    length derivative should match both.
    """
    twists = list(twists)
    for p, _ in twists:
        if p.rep is not rep:
            raise ValueError("partition belongs to a different rep")
    for i, (pa, _) in enumerate(twists):
        for pb, _ in twists[i + 1:]:
            if not _compatible_sides(set(pa.q2_gens), set(pb.q2_gens), rep.rank):
                raise CurvesNotDisjoint(
                    f"curves {pa.f} and {pb.f} induce crossing partitions"
                )
    word = _as_word(rep, s)
    at = Cocycle.zero(rep)
    cosum = 0.0
    for p, weight in twists:
        at = at + weight * affine_twist(p)
        cosum += weight * cosine_sum(rep, p, word)
    mar = margulis(at, word)
    fd = length_derivative(rep, at, word, step=step)
    return {
        "word": str(word),
        "mar": mar,
        "cosine_sum": cosum,
        "fd_derivative": fd,
        "residual_algebraic": abs(mar - cosum),
        "residual_fd": abs(fd / 2.0 - mar),
    }


# ---------------------------------------------------------------------------
# random word supply for the verification suites


def random_block(p, side, rng, max_len):
    """A random nonempty reduced word over one side's generators."""
    gens = p.side_words(side)
    while True:
        n = int(rng.integers(1, max_len + 1))
        letters = []
        for _ in range(n):
            k = int(rng.choice(gens))
            letters.append(k if rng.random() < 0.5 else -k)
        w = Word(tuple(letters))
        if w.letters:
            return w


def random_alternating_word(
    p, rng, max_blocks=5, max_len_near=2, max_len_far=1, margin=1e-4, attempts=200
):
    """A random word usable by the cosine checks: alternating blocks,
    hyperbolic holonomy with a trace margin, every crossing transversal.

    Draws up to max_blocks block pairs (the far side occasionally dropped
    from the last pair, leaving an odd presentation), redraws on any
    violated precondition, and keeps far-side blocks short so that the
    generic invariant evaluation stays at unit scale.
    """
    for _ in range(attempts):
        pairs = int(rng.integers(1, max_blocks + 1))
        blocks = []
        for _ in range(pairs):
            blocks.append((1, random_block(p, 1, rng, max_len_near)))
            blocks.append((2, random_block(p, 2, rng, max_len_far)))
        if pairs > 1 and rng.random() < 0.3:
            blocks.pop()  # odd presentation: trailing near-side block run
        s = AlternatingWord(tuple(blocks))
        word = s.word()
        if len(word.letters) != sum(len(w) for _, w in blocks):
            continue
        h = p.rep.evaluate(word)
        if classify(h) != "hyperbolic" or abs(h.trace) - 2.0 <= margin:
            continue
        try:
            _crossing_pairings(p.rep, p, _coerce_blocks(p, s))
        except (ValueError, NotHyperbolicError):
            continue
        return s
    raise RuntimeError("no usable alternating word found; loosen the draw parameters")
