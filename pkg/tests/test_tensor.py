import math

import numpy as np
import pytest
from hypothesis import given, settings
from pydantic import ValidationError

from causal_friendliness.core.errors import DimensionError, InvalidStateError
from causal_friendliness.core.tensor import (
    PAULI_X,
    PAULI_Y,
    PAULI_Z,
    BlochVector,
    DensityMatrix,
    identity,
    is_unitary,
    kron,
    matmul,
    observable_from_bloch,
    partial_trace,
    pauli,
    projector_from_bloch,
)
from causal_friendliness.core.wigner import dilation_unitary

from conftest import bloch_vectors

_TOL = 1e-12


class TestPauli:
    def test_squares_are_identity(self):
        for s in pauli():
            assert np.allclose(s @ s, identity(2), atol=_TOL)

    def test_xy_is_iz(self):
        assert np.allclose(PAULI_X @ PAULI_Y, 1j * PAULI_Z, atol=_TOL)

    def test_constants_are_read_only(self):
        with pytest.raises(ValueError):
            PAULI_X[0, 0] = 5

    def test_matmul_checks_shapes(self):
        with pytest.raises(DimensionError):
            matmul(np.eye(2), np.eye(3))


class TestBlochVector:
    def test_rejects_non_unit(self):
        with pytest.raises(ValidationError):
            BlochVector(x=1.0, y=1.0, z=0.0)

    def test_rounded_decimals_are_rescaled(self):
        n = BlochVector.normalized(0.70710678, 0.0, 0.70710678)
        assert math.isclose(float(np.linalg.norm(n.as_array())), 1.0, abs_tol=1e-15)
        assert n.x == pytest.approx(1 / math.sqrt(2), abs=1e-15)

    def test_normalized_refuses_far_vectors(self):
        with pytest.raises(InvalidStateError):
            BlochVector.normalized(1.0, 1.0, 0.0)

    @given(n=bloch_vectors(), m=bloch_vectors())
    def test_dot_matches_observable_trace(self, n, m):
        # Tr[(n·σ)(m·σ)] = 2 n·m
        t = np.trace(observable_from_bloch(n) @ observable_from_bloch(m)).real
        assert t == pytest.approx(2 * n.dot(m), abs=1e-12)

    @given(n=bloch_vectors())
    def test_projectors_resolve_identity(self, n):
        plus, minus = projector_from_bloch(n, 1), projector_from_bloch(n, -1)
        assert np.allclose(plus + minus, identity(2), atol=_TOL)
        assert np.allclose(plus @ plus, plus, atol=_TOL)
        assert np.allclose(plus @ minus, 0, atol=_TOL)

    def test_projector_outcome_must_be_signed(self):
        with pytest.raises(ValueError):
            projector_from_bloch(BlochVector(x=0, y=0, z=1), 0)


class TestDensityMatrix:
    def test_maximally_mixed(self):
        assert np.allclose(DensityMatrix.maximally_mixed().matrix, np.eye(2) / 2)

    def test_pure_qubit_on_equator_is_plus(self):
        rho = DensityMatrix.pure_qubit(math.pi / 2, 0.0)
        assert np.allclose(rho.matrix, np.full((2, 2), 0.5), atol=_TOL)

    @pytest.mark.parametrize(
        "matrix",
        [
            [[0.5, 0.1], [0.2, 0.5]],          # not Hermitian
            [[0.6, 0.0], [0.0, 0.6]],          # trace 1.2
            [[1.5, 0.0], [0.0, -0.5]],         # negative eigenvalue
            np.eye(16) / 16,                    # too large
            [[1.0, 0.0, 0.0]],                 # not square
        ],
    )
    def test_invalid_states(self, matrix):
        with pytest.raises(ValidationError):
            DensityMatrix(matrix=matrix)

    def test_matrix_is_frozen(self):
        rho = DensityMatrix.maximally_mixed()
        with pytest.raises(ValueError):
            rho.matrix[0, 0] = 1.0

    def test_json_keeps_real_and_imaginary_parts(self):
        rho = DensityMatrix.pure_qubit(math.pi / 2, math.pi / 2)
        back = DensityMatrix.model_validate_json(rho.model_dump_json())
        assert np.allclose(back.matrix, rho.matrix, atol=_TOL)

    def test_complex_entries_serialize_as_real_and_imaginary_arrays(self):
        payload = DensityMatrix.pure_qubit(math.pi / 2, math.pi / 2).model_dump(mode="json")["matrix"]
        assert set(payload) == {"re", "im"}
        assert np.allclose(payload["re"], [[0.5, 0.0], [0.0, 0.5]], atol=_TOL)
        assert np.allclose(payload["im"], [[0.0, -0.5], [0.5, 0.0]], atol=_TOL)


class TestPartialTrace:
    @given(n=bloch_vectors(), m=bloch_vectors())
    @settings(max_examples=50)
    def test_product_states_factor(self, n, m):
        a = (identity(2) + observable_from_bloch(n)) / 2
        b = (identity(2) + observable_from_bloch(m)) / 2
        joint = DensityMatrix(matrix=kron(a, b))
        assert np.allclose(partial_trace(joint, (2, 2), keep=0).matrix, a, atol=_TOL)
        assert np.allclose(partial_trace(joint, (2, 2), keep=1).matrix, b, atol=_TOL)

    def test_bell_state_reduces_to_maximally_mixed(self):
        bell = DensityMatrix.from_vector([1, 0, 0, 1])
        reduced = partial_trace(bell, (2, 2), keep=1)
        assert isinstance(reduced, DensityMatrix)
        assert np.allclose(reduced.matrix, np.eye(2) / 2, atol=_TOL)

    def test_bare_array_stays_bare(self):
        branch = np.diag([0.3, 0.0, 0.0, 0.0]).astype(complex)
        out = partial_trace(branch, (2, 2), keep=0)
        assert isinstance(out, np.ndarray)
        assert out[0, 0] == pytest.approx(0.3)

    def test_three_qubits_middle(self):
        rho = kron(kron(np.eye(2) / 2, np.diag([1.0, 0.0])), np.eye(2) / 2)
        assert np.allclose(partial_trace(rho, (2, 2, 2), keep=1), np.diag([1.0, 0.0]), atol=_TOL)

    @pytest.mark.parametrize("dims, keep", [((2, 3), 0), ((2, 2), 2), ((0, 4), 0)])
    def test_bad_dims(self, dims, keep):
        with pytest.raises(DimensionError):
            partial_trace(np.eye(4) / 4, dims, keep)


@given(n=bloch_vectors())
def test_dilation_is_unitary(n):
    assert is_unitary(dilation_unitary(n))
