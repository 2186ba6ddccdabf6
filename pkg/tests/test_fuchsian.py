"""Tests for words, pants/torus builders, and surface assembly."""

import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from margulis.fuchsian import (
    GluingMismatchError,
    Handle,
    InvalidAngleError,
    InvalidLengthError,
    NotDiscreteError,
    SurfaceSpec,
    Word,
    assemble_surface,
    axis_side,
    build_once_holed_torus,
    build_pants,
    commutator,
    evaluate_word,
    torus_boundary_length,
    torus_commutator_trace,
)
from margulis.lorentz import axis_relation, classify, lorentz_form, null_frame, translation_length


letters = st.integers(-4, 4).filter(lambda x: x != 0)
words = st.lists(letters, max_size=12).map(lambda ls: Word(tuple(ls)))


class TestWord:
    def test_free_reduction(self):
        assert Word((1, -1)).letters == ()
        assert Word((1, 2, -2, -1)).letters == ()
        assert Word((1, 2, -2, 3)).letters == (1, 3)

    def test_parse_and_str(self):
        w = Word.parse("1 -2, 3")
        assert w.letters == (1, -2, 3)
        assert str(w) == "1 -2 3"
        assert str(Word()) == "e"
        assert Word.parse(str(w)) == w

    def test_rejects_zero(self):
        with pytest.raises(ValueError):
            Word((0,))

    @given(words)
    def test_inverse(self, w):
        assert (w * w.inv()).letters == ()
        assert (w.inv() * w).letters == ()

    @given(words, words, words)
    def test_associative(self, a, b, c):
        assert ((a * b) * c) == (a * (b * c))

    def test_pow_and_commutator(self):
        w = Word((1, 2))
        assert (w ** 3).letters == (1, 2, 1, 2, 1, 2)
        assert (w ** -1) == w.inv()
        assert commutator(Word((1,)), Word((2,))).letters == (1, 2, -1, -2)


class TestBuildPants:
    def test_cuff_lengths(self):
        rep = build_pants(1.3, 2.1, 0.8)
        assert translation_length(rep.evaluate("c1")) == pytest.approx(1.3, abs=1e-9)
        assert translation_length(rep.evaluate("c2")) == pytest.approx(2.1, abs=1e-9)
        assert translation_length(rep.evaluate("c3")) == pytest.approx(0.8, abs=1e-9)

    def test_relation(self):
        rep = build_pants(1.3, 2.1, 0.8)
        prod = rep.evaluate(Word((1,)) * Word((2,)) * rep.labels["c3"])
        assert np.max(np.abs(prod.mob - np.eye(2))) < 1e-12

    def test_third_cuff_trace_sign(self):
        # the product of the first two cuffs has trace <= -2: the classical
        # discreteness criterion for a pants group
        rep = build_pants(1.0, 1.0, 1.0)
        m = rep.gens[0].mob @ rep.gens[1].mob
        assert abs(m[0, 0] + m[1, 1]) >= 2.0 + 1e-6

    @given(
        st.floats(0.2, 4.0),
        st.floats(0.2, 4.0),
        st.floats(0.2, 4.0),
    )
    @settings(max_examples=60)
    def test_lengths_realized_and_sides_consistent(self, l1, l2, l3):
        rep = build_pants(l1, l2, l3)
        c1, c2 = rep.gens
        c3 = rep.evaluate("c3")
        assert translation_length(c1) == pytest.approx(l1, rel=1e-9, abs=1e-9)
        assert translation_length(c2) == pytest.approx(l2, rel=1e-9, abs=1e-9)
        assert translation_length(c3) == pytest.approx(l3, rel=1e-8, abs=1e-8)
        sides = [axis_side(c1, c2), axis_side(c1, c3), axis_side(c2, c1), axis_side(c3, c1)]
        assert sides == [-1.0, -1.0, -1.0, -1.0]

    def test_rejects_tiny_length(self):
        with pytest.raises(InvalidLengthError):
            build_pants(0.0, 1.0, 1.0)
        with pytest.raises(InvalidLengthError):
            build_pants(1.0, 1e-12, 1.0)


class TestBuildTorus:
    def test_generator_lengths_and_angle(self):
        rep = build_once_holed_torus(1.9, 2.4, 1.1)
        w1, w2 = rep.gens
        assert translation_length(w1) == pytest.approx(1.9, abs=1e-12)
        assert translation_length(w2) == pytest.approx(2.4, abs=1e-12)
        rel = axis_relation(w1, w2)
        assert rel.kind == "cross"
        assert rel.angle == pytest.approx(1.1, abs=1e-12)
        assert np.allclose(rel.point, [0, 0, 1], atol=1e-12)

    def test_normalized_frames(self):
        theta = 1.1
        rep = build_once_holed_torus(1.9, 2.4, theta)
        f1 = null_frame(rep.gens[0])
        f2 = null_frame(rep.gens[1])
        assert np.allclose(f1.x0, [1, 0, 0], atol=1e-12)
        assert np.allclose(f2.x0, [math.cos(theta), math.sin(theta), 0], atol=1e-12)

    def test_square_torus_example(self):
        # the "square" one-holed torus: equal generator lengths at a right
        # angle, with cosh(l/2) = 1 + sqrt(2)
        ell = 2.0 * math.acosh(1.0 + math.sqrt(2.0))
        rep = build_once_holed_torus(ell, ell, math.pi / 2)
        g = rep.evaluate("g")
        tr_identity = torus_commutator_trace(ell, ell, math.pi / 2)
        assert tr_identity < -2.0
        assert abs(g.trace) == pytest.approx(abs(tr_identity), rel=1e-12)

    @given(st.floats(1.5, 4.0), st.floats(1.5, 4.0), st.floats(0.6, math.pi - 0.6))
    @settings(max_examples=60)
    def test_commutator_trace_identity(self, l1, l2, theta):
        # dual route: Fricke trace identity vs the actual matrix product
        expected = torus_commutator_trace(l1, l2, theta)
        if expected > -2.0 - 1e-6:
            with pytest.raises(NotDiscreteError):
                build_once_holed_torus(l1, l2, theta)
            return
        rep = build_once_holed_torus(l1, l2, theta)
        g = rep.evaluate("g")
        assert abs(g.trace) == pytest.approx(abs(expected), rel=1e-9)
        assert translation_length(g) == pytest.approx(
            torus_boundary_length(l1, l2, theta), rel=1e-9
        )

    def test_rejects_non_discrete(self):
        with pytest.raises(NotDiscreteError):
            build_once_holed_torus(0.1, 0.1, math.pi / 2)

    def test_rejects_bad_angle(self):
        with pytest.raises(InvalidAngleError):
            build_once_holed_torus(2.0, 2.0, 0.0)
        with pytest.raises(InvalidAngleError):
            build_once_holed_torus(2.0, 2.0, math.pi)
        with pytest.raises(InvalidAngleError):
            build_once_holed_torus(2.0, 2.0, -0.3)

    def test_rejects_tiny_length(self):
        with pytest.raises(InvalidLengthError):
            build_once_holed_torus(1e-10, 2.0, 1.0)


class TestSurfaceSpec:
    def test_validation(self):
        with pytest.raises(ValueError):
            SurfaceSpec(g=0, b=1, boundary_lengths=[1.0])
        with pytest.raises(ValueError):
            SurfaceSpec(g=0, b=2, boundary_lengths=[1.0, 1.0])
        with pytest.raises(ValueError):
            SurfaceSpec(g=-1, b=3, boundary_lengths=[1.0] * 3)
        with pytest.raises(ValueError):
            SurfaceSpec(g=0, b=4, boundary_lengths=[1.0] * 4, curve_lengths=[], twists=[])
        with pytest.raises(InvalidLengthError):
            SurfaceSpec(g=0, b=3, boundary_lengths=[1.0, 1.0, 0.0])
        with pytest.raises(InvalidAngleError):
            SurfaceSpec(
                g=1, b=2, boundary_lengths=[1.0, 1.0], twists=[0.0],
                handles=[Handle(2.0, 2.0, math.pi)],
            )

    def test_json_round_trip(self):
        spec = SurfaceSpec(
            g=1, b=2, boundary_lengths=[1.0, 1.4], twists=[0.3],
            handles=[Handle(2.0, 2.2, 1.2)],
        )
        spec2 = SurfaceSpec.from_json(spec.to_json())
        assert spec2 == spec

    def test_json_keys(self):
        import json

        spec = SurfaceSpec(g=0, b=3, boundary_lengths=[1.0, 1.5, 2.0])
        d = json.loads(spec.to_json())
        assert set(d) == {"g", "b", "boundary_lengths", "curve_lengths", "twists", "handles"}


class TestAssembleSurface:
    def test_s03(self):
        spec = SurfaceSpec(g=0, b=3, boundary_lengths=[1.0, 1.5, 2.0])
        rep = assemble_surface(spec)
        assert rep.rank == 2
        assert sorted(rep.labels) == ["gamma_1", "gamma_2", "gamma_3"]
        assert rep.labels["gamma_3"] == Word((-2, -1))
        for i, ell in enumerate(spec.boundary_lengths, 1):
            assert translation_length(rep.evaluate(f"gamma_{i}")) == pytest.approx(ell, abs=1e-6)

    def test_s04(self):
        spec = SurfaceSpec(
            g=0, b=4, boundary_lengths=[1.0, 1.5, 2.0, 1.2],
            curve_lengths=[1.7], twists=[0.4],
        )
        rep = assemble_surface(spec)
        assert rep.rank == 3
        assert rep.labels["f_1"] == Word((-2, -1))
        assert rep.labels["gamma_4"] == Word((-3, -2, -1))
        assert translation_length(rep.evaluate("f_1")) == pytest.approx(1.7, abs=1e-6)
        assert rep.structure.interior_sides == [(["gamma_1", "gamma_2"], ["gamma_3"])]

    def test_s12(self):
        spec = SurfaceSpec(
            g=1, b=2, boundary_lengths=[1.0, 1.4], twists=[0.3],
            handles=[Handle(2.0, 2.2, 1.2)],
        )
        rep = assemble_surface(spec)
        assert rep.rank == 3
        assert sorted(rep.labels) == ["g_1", "gamma_1", "gamma_2", "w1_1", "w2_1"]
        assert rep.labels["g_1"] == Word((2, 3, -2, -3))
        assert translation_length(rep.evaluate("w1_1")) == pytest.approx(2.0, abs=1e-9)
        assert translation_length(rep.evaluate("w2_1")) == pytest.approx(2.2, abs=1e-9)
        assert translation_length(rep.evaluate("g_1")) == pytest.approx(
            torus_boundary_length(2.0, 2.2, 1.2), abs=1e-8
        )
        # the handle generators cross at the requested angle
        rel = axis_relation(rep.evaluate("w1_1"), rep.evaluate("w2_1"))
        assert rel.kind == "cross"
        assert rel.angle == pytest.approx(1.2, abs=1e-9)

    def test_s21(self):
        spec = SurfaceSpec(
            g=2, b=1, boundary_lengths=[2.5], twists=[0.8, -0.7],
            handles=[Handle(2.0, 2.0, math.pi / 2), Handle(2.2, 1.9, 1.0)],
        )
        rep = assemble_surface(spec)
        assert rep.rank == 4
        # closing word: gamma_1 = [w1_2, w2_2] [w1_1, w2_1]
        assert rep.labels["gamma_1"] == Word((3, 4, -3, -4, 1, 2, -1, -2))
        assert translation_length(rep.evaluate("gamma_1")) == pytest.approx(2.5, abs=1e-6)

    def test_s05_chain(self):
        spec = SurfaceSpec(
            g=0, b=5, boundary_lengths=[1, 1.2, 1.4, 1.6, 1.8],
            curve_lengths=[2.0, 2.1], twists=[0.5, -0.3],
        )
        rep = assemble_surface(spec)
        assert rep.rank == 4
        assert translation_length(rep.evaluate("f_2")) == pytest.approx(2.1, abs=1e-6)
        assert rep.structure.interior_sides[1] == (
            ["gamma_1", "gamma_2", "gamma_3"], ["gamma_4"],
        )

    def test_s22_mixed(self):
        spec = SurfaceSpec(
            g=2, b=2, boundary_lengths=[1.0, 1.3], curve_lengths=[2.2],
            twists=[0.5, -0.2, 1.1],
            handles=[Handle(2.0, 2.0, math.pi / 2), Handle(2.2, 1.9, 1.0)],
        )
        rep = assemble_surface(spec)
        assert rep.rank == 5
        assert rep.structure.interior_sides == [
            (["gamma_1", "w1_1", "w2_1"], ["w1_2", "w2_2"]),
        ]
        assert translation_length(rep.evaluate("f_1")) == pytest.approx(2.2, abs=1e-6)

    def test_twist_preserves_lengths(self):
        base = dict(
            g=1, b=2, boundary_lengths=[1.0, 1.4], handles=[Handle(2.0, 2.2, 1.2)],
        )
        rep0 = assemble_surface(SurfaceSpec(twists=[0.0], **base))
        rep1 = assemble_surface(SurfaceSpec(twists=[1.7], **base))
        for name in ["gamma_1", "gamma_2", "g_1", "w1_1", "w2_1"]:
            assert translation_length(rep0.evaluate(name)) == pytest.approx(
                translation_length(rep1.evaluate(name)), abs=1e-8
            )
        # but the representations differ (twist moves the torus around the cuff)
        assert np.max(np.abs(rep0.evaluate("w1_1").mob - rep1.evaluate("w1_1").mob)) > 1e-3

    def test_rejects_once_holed_torus(self):
        spec = SurfaceSpec(g=1, b=1, boundary_lengths=[3.0], twists=[0.0],
                           handles=[Handle(2.0, 2.0, math.pi / 2)])
        with pytest.raises(ValueError):
            assemble_surface(spec)

    def test_short_words_stay_hyperbolic(self):
        spec = SurfaceSpec(
            g=1, b=2, boundary_lengths=[1.0, 1.4], twists=[2.9],
            handles=[Handle(2.0, 2.2, 1.2)],
        )
        rep = assemble_surface(spec)
        seen = set()
        for w in itertools.product([1, -1, 2, -2, 3, -3], repeat=3):
            word = Word(tuple(w))
            if not word.letters or word.letters in seen:
                continue
            seen.add(word.letters)
            assert classify(rep.evaluate(word)) in ("hyperbolic", "identity")

    def test_evaluate_word_function(self):
        spec = SurfaceSpec(g=0, b=3, boundary_lengths=[1.0, 1.5, 2.0])
        rep = assemble_surface(spec)
        h = evaluate_word(rep, Word((1, 2)))
        assert np.allclose(h.mob, (rep.gens[0] @ rep.gens[1]).mob, atol=1e-14)
        assert np.allclose(evaluate_word(rep, "gamma_3").mob, h.inv().mob, atol=1e-12)
