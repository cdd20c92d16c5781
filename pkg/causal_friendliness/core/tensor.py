"""Dense complex linear algebra for 2- to 8-dimensional Hilbert spaces.

Matrices are plain ``complex128`` numpy arrays; :class:`DensityMatrix` and
:class:`BlochVector` are validated, immutable wrappers. Qubit measurements use
analytic Bloch projectors, so no eigensolver is needed anywhere.
"""
from __future__ import annotations

import math
from typing import Sequence, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator

from causal_friendliness.core.arrays import ComplexArray
from causal_friendliness.core.errors import DimensionError, InvalidStateError

MAX_DIM = 8
HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
PSD_PIVOT_TOL = 1e-10
UNIT_TOL = 1e-12

ComplexMatrix = np.ndarray


def _const(m) -> np.ndarray:
    a = np.array(m, dtype=complex)
    a.setflags(write=False)
    return a


PAULI_X = _const([[0, 1], [1, 0]])
PAULI_Y = _const([[0, -1j], [1j, 0]])
PAULI_Z = _const([[1, 0], [0, -1]])


def pauli() -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    return PAULI_X, PAULI_Y, PAULI_Z


# ------------------- matrices -------------------

def as_matrix(a) -> ComplexMatrix:
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2:
        raise DimensionError(f"expected a 2-D matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise InvalidStateError("matrix has NaN/Inf entries")
    return m


def _square(a) -> ComplexMatrix:
    m = as_matrix(a)
    if m.shape[0] != m.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {m.shape}")
    return m


def identity(dim: int) -> ComplexMatrix:
    return np.eye(dim, dtype=complex)


def kron(a, b) -> ComplexMatrix:
    return np.kron(as_matrix(a), as_matrix(b))


def matmul(a, b) -> ComplexMatrix:
    ma, mb = as_matrix(a), as_matrix(b)
    if ma.shape[1] != mb.shape[0]:
        raise DimensionError(f"cannot multiply {ma.shape} by {mb.shape}")
    return ma @ mb


def dagger(a) -> ComplexMatrix:
    return as_matrix(a).conj().T


def trace(a) -> complex:
    return complex(np.trace(_square(a)))


def is_unitary(u, tolerance: float = 1e-12) -> bool:
    m = _square(u)
    return bool(np.allclose(m.conj().T @ m, identity(m.shape[0]), rtol=0.0, atol=tolerance))


# ------------------- qubit observables -------------------

class BlochVector(BaseModel):
    """Unit vector n naming the qubit observable n·σ."""

    model_config = ConfigDict(frozen=True)

    x: float
    y: float
    z: float

    @model_validator(mode="after")
    def _unit(self) -> "BlochVector":
        v = self.as_array()
        if not np.all(np.isfinite(v)):
            raise ValueError("Bloch vector has NaN/Inf components")
        norm = float(np.linalg.norm(v))
        if abs(norm - 1.0) > UNIT_TOL:
            raise ValueError(f"Bloch vector must be unit norm (got |n| = {norm!r})")
        return self

    @classmethod
    def from_angles(cls, polar: float, azimuth: float = 0.0) -> "BlochVector":
        return cls(
            x=math.sin(polar) * math.cos(azimuth),
            y=math.sin(polar) * math.sin(azimuth),
            z=math.cos(polar),
        )

    @classmethod
    def normalized(cls, x: float, y: float, z: float, slack: float = 1e-6) -> "BlochVector":
        """Accept vectors written with rounded decimals (e.g. 0.70710678) and rescale them.

        Anything further than ``slack`` from unit norm is rejected rather than
        silently rescaled.
        """
        v = np.array([x, y, z], dtype=float)
        norm = float(np.linalg.norm(v))
        if not math.isfinite(norm) or abs(norm - 1.0) > slack:
            raise InvalidStateError(f"Bloch vector ({x}, {y}, {z}) is not unit norm (|n| = {norm})")
        v = v / norm
        return cls(x=float(v[0]), y=float(v[1]), z=float(v[2]))

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z], dtype=float)

    def dot(self, other: "BlochVector") -> float:
        return float(self.as_array() @ other.as_array())

    def __neg__(self) -> "BlochVector":
        return BlochVector(x=-self.x, y=-self.y, z=-self.z)


def observable_from_bloch(n: BlochVector) -> ComplexMatrix:
    return n.x * PAULI_X + n.y * PAULI_Y + n.z * PAULI_Z


def projector_from_bloch(n: BlochVector, outcome: int) -> ComplexMatrix:
    """Eigenprojector (I + outcome·n·σ)/2 for outcome ±1."""
    if outcome not in (1, -1):
        raise ValueError(f"outcome must be +1 or -1, got {outcome!r}")
    return (identity(2) + outcome * observable_from_bloch(n)) / 2


# ------------------- states -------------------

def _is_psd(m: np.ndarray) -> bool:
    if m.shape[0] == 2:
        minors = (m[0, 0].real, m[1, 1].real, float(np.linalg.det(m).real))
        return all(v >= -PSD_PIVOT_TOL for v in minors)
    try:
        np.linalg.cholesky(m + PSD_PIVOT_TOL * identity(m.shape[0]))
    except np.linalg.LinAlgError:
        return False
    return True


class DensityMatrix(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    matrix: ComplexArray

    @model_validator(mode="after")
    def _valid_state(self) -> "DensityMatrix":
        m = self.matrix
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"density matrix must be square, got shape {m.shape}")
        if not 1 <= m.shape[0] <= MAX_DIM:
            raise ValueError(f"dimension {m.shape[0]} outside 1..{MAX_DIM}")
        if not np.allclose(m, m.conj().T, rtol=0.0, atol=HERMITIAN_TOL):
            raise ValueError("density matrix is not Hermitian")
        tr = np.trace(m)
        if abs(tr - 1.0) > TRACE_TOL:
            raise ValueError(f"density matrix trace is {tr.real!r}, expected 1")
        if not _is_psd(m):
            raise ValueError("density matrix is not positive semidefinite")
        return self

    @property
    def dim(self) -> int:
        return int(self.matrix.shape[0])

    @classmethod
    def from_vector(cls, psi: Sequence[complex]) -> "DensityMatrix":
        v = np.asarray(psi, dtype=complex).reshape(-1)
        norm = np.linalg.norm(v)
        if norm == 0.0:
            raise InvalidStateError("zero vector is not a state")
        v = v / norm
        return cls(matrix=np.outer(v, v.conj()))

    @classmethod
    def maximally_mixed(cls, dim: int = 2) -> "DensityMatrix":
        return cls(matrix=identity(dim) / dim)

    @classmethod
    def pure_qubit(cls, polar: float, azimuth: float = 0.0) -> "DensityMatrix":
        """cos(θ/2)|0⟩ + e^{iφ} sin(θ/2)|1⟩."""
        return cls.from_vector([math.cos(polar / 2), np.exp(1j * azimuth) * math.sin(polar / 2)])


StateLike = Union[DensityMatrix, np.ndarray]


def partial_trace(rho: StateLike, dims: Sequence[int], keep: int) -> StateLike:
    """Reduce ``rho`` onto subsystem ``keep``.

    A :class:`DensityMatrix` comes back as a :class:`DensityMatrix`; a bare
    array (e.g. an unnormalized measurement branch) comes back as a bare array.
    """
    is_state = isinstance(rho, DensityMatrix)
    m = rho.matrix if is_state else _square(rho)
    dims = tuple(int(d) for d in dims)
    if any(d < 1 for d in dims) or math.prod(dims) != m.shape[0]:
        raise DimensionError(f"subsystem dims {dims} do not match matrix dimension {m.shape[0]}")
    if not 0 <= keep < len(dims):
        raise DimensionError(f"keep={keep} is not a valid subsystem index for {len(dims)} subsystems")

    rows = [chr(ord("a") + k) for k in range(len(dims))]
    cols = [r if k != keep else "z" for k, r in enumerate(rows)]
    spec = f"{''.join(rows)}{''.join(cols)}->{rows[keep]}z"
    reduced = np.einsum(spec, m.reshape(dims + dims))
    if is_state:
        return DensityMatrix(matrix=reduced)
    return reduced
