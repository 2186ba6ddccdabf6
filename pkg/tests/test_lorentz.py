"""Tests for the Lorentzian linear algebra layer and the 2x2 <-> 3x3 bridge."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from margulis.lorentz import (
    E1,
    E2,
    E3,
    J,
    AxisRelation,
    Isometry,
    NotHyperbolicError,
    axis_relation,
    classify,
    classify_vector,
    frame_reconstruction,
    is_lorentz_matrix,
    lorentz_form,
    make_mob,
    mob_to_iso,
    null_frame,
    sl2_to_vec,
    translation_length,
    vec_to_sl2,
)

from conftest import boost, cartan, conjugators, hyperbolics, rotation, vectors3


class TestForm:
    def test_frozen_values(self):
        assert lorentz_form([1, 0, 0], [1, 0, 0]) == 1.0
        assert lorentz_form([0, 0, 1], [0, 0, 1]) == -1.0
        assert lorentz_form([1, 2, 3], [4, 5, 6]) == -4.0

    def test_classify_vector(self):
        assert classify_vector([1, 0, 0]) == "spacelike"
        assert classify_vector([0, 0, 1]) == "timelike"
        assert classify_vector([0, 1, 1]) == "null"
        assert classify_vector([0, 1, 1 + 1e-12]) == "null"  # within tolerance

    @given(vectors3(), vectors3())
    def test_symmetric_bilinear(self, u, v):
        assert lorentz_form(u, v) == pytest.approx(lorentz_form(v, u), abs=1e-12)
        assert lorentz_form(u, v) == pytest.approx(u @ J @ v, abs=1e-9)


class TestSl2Bridge:
    def test_basis_is_orthonormal_for_half_trace_form(self):
        basis = [E1, E2, E3]
        gram = np.array([[np.trace(a @ b) / 2.0 for b in basis] for a in basis])
        assert np.allclose(gram, J, atol=1e-14)

    @given(vectors3())
    def test_vec_sl2_round_trip(self, v):
        m = vec_to_sl2(v)
        assert abs(np.trace(m)) < 1e-12
        assert np.allclose(sl2_to_vec(m), v, atol=1e-12)

    @given(vectors3(), vectors3())
    def test_half_trace_form_matches_lorentz_form(self, u, v):
        val = np.trace(vec_to_sl2(u) @ vec_to_sl2(v)) / 2.0
        assert val == pytest.approx(lorentz_form(u, v), abs=1e-9)

    @given(conjugators(), conjugators())
    @settings(max_examples=200)
    def test_mob_to_iso_is_homomorphism(self, g, h):
        prod = mob_to_iso(g.mob @ h.mob)
        assert np.max(np.abs(mob_to_iso(g.mob) @ mob_to_iso(h.mob) - prod)) < 1e-10

    @given(conjugators())
    def test_mob_to_iso_lands_in_identity_component(self, g):
        assert is_lorentz_matrix(mob_to_iso(g.mob))

    @given(conjugators())
    def test_sign_is_killed(self, g):
        assert np.allclose(mob_to_iso(g.mob), mob_to_iso(-g.mob), atol=1e-14)

    def test_boost_bridge_frozen(self):
        t = 0.7
        m = mob_to_iso(np.diag([math.exp(t), math.exp(-t)]))
        expected = np.array(
            [
                [1.0, 0.0, 0.0],
                [0.0, math.cosh(2 * t), -math.sinh(2 * t)],
                [0.0, -math.sinh(2 * t), math.cosh(2 * t)],
            ]
        )
        assert np.allclose(m, expected, atol=1e-12)
        # contracts [0,1,1] by e^{-2t}, expands [0,-1,1] by e^{2t}
        assert np.allclose(m @ [0, 1, 1], math.exp(-2 * t) * np.array([0, 1, 1]), atol=1e-12)
        assert np.allclose(m @ [0, -1, 1], math.exp(2 * t) * np.array([0, -1, 1]), atol=1e-12)

    def test_rotation_bridge_frozen(self):
        phi = 0.3
        m = rotation(phi).mat
        assert np.allclose(m @ [1, 0, 0], [math.cos(2 * phi), math.sin(2 * phi), 0], atol=1e-12)
        assert np.allclose(m @ [0, 0, 1], [0, 0, 1], atol=1e-12)


class TestMakeMob:
    def test_normalizes_determinant(self):
        m = make_mob([[2.0, 0.0], [0.0, 2.0]])
        assert np.allclose(m, np.eye(2))

    def test_canonical_sign(self):
        m = make_mob([[-1.0, 0.0], [0.0, -1.0]])
        assert m[0, 0] > 0
        # first nonzero entry of the row-major scan must be positive
        m = make_mob([[0.0, -1.0], [1.0, 0.0]])
        flat = m.reshape(-1)
        first = flat[np.nonzero(np.abs(flat) > 1e-14)[0][0]]
        assert first > 0

    def test_rejects_negative_determinant(self):
        with pytest.raises(ValueError):
            make_mob([[0.0, 1.0], [1.0, 0.0]])

    @given(conjugators())
    def test_idempotent(self, g):
        assert np.allclose(make_mob(g.mob), g.mob, atol=1e-14)


class TestIsometry:
    @given(conjugators(), conjugators())
    def test_group_consistency(self, g, h):
        prod = g @ h
        assert np.max(np.abs(prod.mat - g.mat @ h.mat)) < 1e-10
        assert np.max(np.abs((g @ g.inv()).mat - np.eye(3))) < 1e-10
        assert np.max(np.abs(g.inv().mat - np.linalg.inv(g.mat))) < 1e-8

    def test_apply(self):
        b = boost(2.0)
        v = b.apply([0, 1, 1])
        assert np.allclose(v, math.exp(-2.0) * np.array([0, 1, 1]), atol=1e-12)


class TestClassify:
    def test_frozen_cases(self):
        assert classify(Isometry(np.eye(2))) == "identity"
        assert classify(Isometry([[1.0, 1.0], [0.0, 1.0]])) == "parabolic"
        assert classify(rotation(0.4)) == "elliptic"
        assert classify(boost(1.0)) == "hyperbolic"

    def test_margin(self):
        # trace within 1e-8 of 2 is refused as numerically parabolic
        t = 2.0 + 1e-9
        m = np.array([[t / 2 + math.sqrt(t * t / 4 - 1), 0.0], [0.0, t / 2 - math.sqrt(t * t / 4 - 1)]])
        assert classify(Isometry(m)) == "parabolic"
        t = 2.0 + 1e-6
        m = np.array([[t / 2 + math.sqrt(t * t / 4 - 1), 0.0], [0.0, t / 2 - math.sqrt(t * t / 4 - 1)]])
        assert classify(Isometry(m)) == "hyperbolic"

    @given(hyperbolics())
    def test_conjugation_invariant(self, h):
        assert classify(h) == "hyperbolic"


class TestTranslationLength:
    def test_frozen_value(self):
        assert translation_length(Isometry(np.diag([math.e, 1.0 / math.e]))) == pytest.approx(2.0, abs=1e-12)

    @given(st.floats(0.1, 5.0), conjugators())
    def test_conjugation_invariant(self, ell, g):
        h = g @ boost(ell) @ g.inv()
        assert translation_length(h) == pytest.approx(ell, rel=1e-9, abs=1e-9)

    def test_rejects_non_hyperbolic(self):
        with pytest.raises(NotHyperbolicError):
            translation_length(rotation(0.3))
        with pytest.raises(NotHyperbolicError):
            translation_length(Isometry([[1.0, 1.0], [0.0, 1.0]]))
        with pytest.raises(NotHyperbolicError):
            translation_length(Isometry(np.eye(2)))


class TestNullFrame:
    def test_boost_frame_frozen(self):
        t = 0.7
        nf = null_frame(boost(2 * t))
        assert np.allclose(nf.x0, [1, 0, 0], atol=1e-12)
        assert np.allclose(nf.xm, np.array([0, 1, 1]) / math.sqrt(2), atol=1e-12)
        assert np.allclose(nf.xp, np.array([0, -1, 1]) / math.sqrt(2), atol=1e-12)
        assert nf.lam == pytest.approx(math.exp(-2 * t), rel=1e-12)
        assert nf.ell == pytest.approx(2 * t, rel=1e-12)

    @given(hyperbolics())
    @settings(max_examples=200)
    def test_eigen_residuals(self, h):
        nf = null_frame(h)
        scale = np.max(np.abs(h.mat))
        assert np.max(np.abs(h.apply(nf.x0) - nf.x0)) <= 1e-9 * scale
        assert np.max(np.abs(h.apply(nf.xm) - nf.lam * nf.xm)) <= 1e-9 * scale
        assert np.max(np.abs(h.apply(nf.xp) - nf.xp / nf.lam)) <= 1e-9 * scale

    @given(hyperbolics())
    def test_frame_normalization_and_orientation(self, h):
        nf = null_frame(h)
        assert lorentz_form(nf.x0, nf.x0) == pytest.approx(1.0, abs=1e-9)
        assert np.linalg.norm(nf.xm) == pytest.approx(1.0, abs=1e-12)
        assert np.linalg.norm(nf.xp) == pytest.approx(1.0, abs=1e-12)
        assert abs(lorentz_form(nf.xm, nf.xm)) < 1e-9
        assert abs(lorentz_form(nf.xp, nf.xp)) < 1e-9
        assert nf.xm[2] > 0 and nf.xp[2] > 0  # future-pointing
        assert 0 < nf.lam < 1
        assert np.linalg.det(nf.matrix()) > 0

    @given(hyperbolics())
    @settings(max_examples=200)
    def test_reconstruction(self, h):
        nf = null_frame(h)
        scale = np.max(np.abs(h.mat))
        assert np.max(np.abs(frame_reconstruction(nf) - h.mat)) <= 1e-8 * scale

    @given(hyperbolics(), conjugators())
    def test_equivariance(self, h, g):
        nf = null_frame(h)
        nfc = null_frame(g @ h @ g.inv())
        gx0 = g.apply(nf.x0)
        gxm = g.apply(nf.xm)
        gxp = g.apply(nf.xp)
        assert np.allclose(nfc.x0, gx0, atol=1e-7 * max(1, np.max(np.abs(gx0))))
        assert np.allclose(nfc.xm, gxm / np.linalg.norm(gxm), atol=1e-7)
        assert np.allclose(nfc.xp, gxp / np.linalg.norm(gxp), atol=1e-7)

    def test_inverse_swaps_null_directions(self):
        h = cartan(0.3, 1.2, 0.9) @ boost(1.7) @ cartan(0.3, 1.2, 0.9).inv()
        nf = null_frame(h)
        nfi = null_frame(h.inv())
        assert np.allclose(nfi.xm, nf.xp, atol=1e-10)
        assert np.allclose(nfi.xp, nf.xm, atol=1e-10)
        assert np.allclose(nfi.x0, -nf.x0, atol=1e-10)

    def test_component_extraction(self):
        nf = null_frame(boost(1.4))
        v = 2.0 * nf.x0 - 0.7 * nf.xm + 3.1 * nf.xp
        assert nf.component_in(v, "x0") == pytest.approx(2.0, abs=1e-12)
        assert nf.component_in(v, "xm") == pytest.approx(-0.7, abs=1e-12)
        assert nf.component_in(v, "xp") == pytest.approx(3.1, abs=1e-12)

    def test_rejects_non_hyperbolic(self):
        with pytest.raises(NotHyperbolicError):
            null_frame(rotation(1.0))


class TestAxisRelation:
    def test_equal(self):
        h = boost(1.0)
        assert axis_relation(h, h @ h).kind == "equal"
        assert axis_relation(h, h.inv()).kind == "equal"

    def test_cross_at_known_angle(self):
        theta = 1.1
        h1 = boost(1.0)
        h2 = rotation(theta / 2) @ boost(2.0) @ rotation(-theta / 2)
        rel = axis_relation(h1, h2)
        assert rel.kind == "cross"
        assert rel.angle == pytest.approx(theta, abs=1e-10)
        assert np.allclose(rel.point, [0, 0, 1], atol=1e-10)
        assert lorentz_form(rel.point, rel.point) == pytest.approx(-1.0, abs=1e-10)

    def test_asymptotic(self):
        h1 = boost(1.0)  # axis endpoints {0, oo}
        h2 = Isometry([[2.0, 1.0], [0.0, 0.5]])  # fixes oo and -2/3
        assert axis_relation(h1, h2).kind == "asymptotic"

    def test_disjoint(self):
        h1 = boost(1.0)  # axis {0, oo}
        m = Isometry([[2.0, 1.0], [1.0, 1.0]])  # sends {0, oo} to {1, 2}
        h2 = m @ boost(1.5) @ m.inv()
        assert axis_relation(h1, h2).kind == "disjoint"

    @given(hyperbolics(), conjugators())
    def test_crossing_point_is_fixed_by_neither(self, h, g):
        h2 = g @ rotation(0.8) @ h @ rotation(-0.8) @ g.inv()
        rel = axis_relation(g @ h @ g.inv(), h2)
        if rel.kind == "cross":
            assert lorentz_form(rel.point, rel.point) == pytest.approx(-1.0, abs=1e-7)
            assert rel.point[2] > 0
