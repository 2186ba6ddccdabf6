"""Shared strategies and helpers for the test suite."""

import math

import numpy as np
from hypothesis import strategies as st

from margulis.lorentz import Isometry


def rotation(phi):
    """Elliptic element exp(phi * E3); acts on R^{2,1} as rotation by 2*phi."""
    return Isometry([[math.cos(phi), -math.sin(phi)], [math.sin(phi), math.cos(phi)]])


def boost(ell):
    """Hyperbolic element diag(e^{ell/2}, e^{-ell/2}), translation length ell."""
    return Isometry(np.diag([math.exp(ell / 2.0), math.exp(-ell / 2.0)]))


def cartan(phi, s, psi):
    """Well-conditioned group element rot(phi) boost(s) rot(psi)."""
    return rotation(phi) @ boost(s) @ rotation(psi)


@st.composite
def conjugators(draw, max_boost=3.0):
    phi = draw(st.floats(0.0, math.pi, allow_nan=False))
    s = draw(st.floats(0.0, max_boost, allow_nan=False))
    psi = draw(st.floats(0.0, math.pi, allow_nan=False))
    return cartan(phi, s, psi)


@st.composite
def hyperbolics(draw, min_ell=0.1, max_ell=5.0):
    """Random hyperbolic isometry: conjugated boost with bounded distortion."""
    ell = draw(st.floats(min_ell, max_ell, allow_nan=False))
    g = draw(conjugators())
    return g @ boost(ell) @ g.inv()


@st.composite
def vectors3(draw, scale=5.0):
    comps = [draw(st.floats(-scale, scale, allow_nan=False)) for _ in range(3)]
    return np.array(comps)
