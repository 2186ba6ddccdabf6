"""Affine deformations of Fuchsian surface groups.

Holonomy representations of surfaces with boundary into SO°(2,1), their
translational deformations as cocycles, Margulis invariants, twist
coordinates, and length derivatives of twist flows.
"""

from .lorentz import (
    Isometry,
    NullFrame,
    AxisRelation,
    NotHyperbolicError,
    lorentz_form,
    classify,
    classify_vector,
    null_frame,
    translation_length,
    axis_relation,
    mob_to_iso,
    vec_to_sl2,
    sl2_to_vec,
)

__all__ = [
    "Isometry",
    "NullFrame",
    "AxisRelation",
    "NotHyperbolicError",
    "lorentz_form",
    "classify",
    "classify_vector",
    "null_frame",
    "translation_length",
    "axis_relation",
    "mob_to_iso",
    "vec_to_sl2",
    "sl2_to_vec",
]
