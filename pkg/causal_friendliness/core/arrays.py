"""Pydantic glue for numpy arrays.

Arrays held by models are copied, checked finite and frozen (read-only), then
serialized as nested lists. Complex arrays serialize as ``{"re": ..., "im": ...}``
so a 2x2 real matrix is never confused with a list of complex pairs.
"""
from __future__ import annotations

from typing import Annotated, Any

import numpy as np
from pydantic import BeforeValidator, PlainSerializer


def _freeze(a: np.ndarray) -> np.ndarray:
    if not np.all(np.isfinite(a)):
        raise ValueError("array contains NaN or Inf")
    a.setflags(write=False)
    return a


def to_real_array(v: Any) -> np.ndarray:
    return _freeze(np.array(v, dtype=float))


def to_complex_array(v: Any) -> np.ndarray:
    if isinstance(v, dict):
        if set(v) != {"re", "im"}:
            raise ValueError("complex array must be given as {'re': ..., 'im': ...}")
        return _freeze(np.array(v["re"], dtype=float) + 1j * np.array(v["im"], dtype=float))
    return _freeze(np.array(v, dtype=complex))


def _complex_payload(a: np.ndarray) -> dict:
    return {"re": a.real.tolist(), "im": a.imag.tolist()}


RealArray = Annotated[
    np.ndarray,
    BeforeValidator(to_real_array),
    PlainSerializer(lambda a: a.tolist(), return_type=list),
]

ComplexArray = Annotated[
    np.ndarray,
    BeforeValidator(to_complex_array),
    PlainSerializer(_complex_payload, return_type=dict),
]
