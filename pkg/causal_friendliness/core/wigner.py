# causal_friendliness/core/wigner.py
"""Circuit-level simulation of the Wigner's Friend lab and the timelike protocol.

Each friend's measurement is a unitary dilation onto a fresh memory qubit.
A super-observer either reads the memory (setting 0: the friend's outcome is
copied) or rewinds the dilation and measures the system herself (setting 1).
Stages run sequentially on the system qubit alone, so no state ever exceeds
dimension 4.
"""
from __future__ import annotations

import logging
from typing import List, Optional, Tuple

import numpy as np

from causal_friendliness.core.errors import DimensionError, LabelMismatchError, NumericalInvariantError
from causal_friendliness.core.models import (
    OUTCOMES,
    SETTINGS,
    SIGNS,
    AssumptionReport,
    BehaviorTable,
    PrepMeasureRecord,
    ScenarioConfig,
    SignallingReport,
    Verdict,
    Witness,
)
from causal_friendliness.core.tensor import (
    BlochVector,
    ComplexMatrix,
    DensityMatrix,
    dagger,
    identity,
    kron,
    partial_trace,
    projector_from_bloch,
)

log = logging.getLogger(__name__)

ZERO_BRANCH = 1e-14
REWIND_TOL = 1e-12

_MEMORY_READY = np.array([[1, 0], [0, 0]], dtype=complex)
_MEMORY_FLIP = np.array([[0, 1], [1, 0]], dtype=complex)

# (probability, normalized post-measurement system state or None)
Branch = Tuple[float, Optional[np.ndarray]]


# ------------------- original lab construction -------------------

def lab_isometry() -> ComplexMatrix:
    """The map f as an 8x2 isometry: |↑⟩ -> |↑↑↑⟩, |↓⟩ -> |↓↓↓⟩ (system ⊗ device ⊗ friend)."""
    v = np.zeros((8, 2), dtype=complex)
    v[0b000, 0] = 1.0
    v[0b111, 1] = 1.0
    return v


def lab_map_f(system_state: DensityMatrix) -> DensityMatrix:
    if system_state.dim != 2:
        raise DimensionError(f"the lab map acts on a qubit, got dimension {system_state.dim}")
    v = lab_isometry()
    return DensityMatrix(matrix=v @ system_state.matrix @ dagger(v))


# ------------------- friend measurement -------------------

def dilation_unitary(basis: BlochVector) -> ComplexMatrix:
    """Controlled flip of a |0⟩ memory, conditioned on the system's eigenstate of basis·σ.

    U = Π₊ ⊗ I + Π₋ ⊗ X on system ⊗ memory; the memory reads 0 for outcome +1.
    """
    return kron(projector_from_bloch(basis, +1), identity(2)) + kron(projector_from_bloch(basis, -1), _MEMORY_FLIP)


def _normalize(branch: np.ndarray) -> Branch:
    p = float(np.trace(branch).real)
    if p < ZERO_BRANCH:
        return 0.0, None
    return p, branch / p


def _stage(rho: np.ndarray, friend: BlochVector, super_observer: BlochVector, read_memory: bool) -> List[Branch]:
    """One friend + super-observer stage; returns one branch per outcome (+1, -1)."""
    u = dilation_unitary(friend)
    lab = u @ kron(rho, _MEMORY_READY) @ dagger(u)

    if read_memory:
        branches = []
        for k in range(2):
            ket = np.zeros((2, 2), dtype=complex)
            ket[k, k] = 1.0
            proj = kron(identity(2), ket)
            branches.append(_normalize(partial_trace(proj @ lab @ proj, (2, 2), keep=0)))
        return branches

    rewound = dagger(u) @ lab @ u
    memory = partial_trace(rewound, (2, 2), keep=1)
    if not np.allclose(memory, _MEMORY_READY, rtol=0.0, atol=REWIND_TOL):
        raise NumericalInvariantError("memory qubit is still entangled after the rewind")
    system = partial_trace(rewound, (2, 2), keep=0)
    out = []
    for outcome in OUTCOMES:
        proj = projector_from_bloch(super_observer, outcome)
        out.append(_normalize(proj @ system @ proj))
    return out


def _two_stage_table(rho: np.ndarray, first: Tuple[BlochVector, BlochVector],
                     second: Tuple[BlochVector, BlochVector]) -> np.ndarray:
    """table[i, j, s, t] = p(first outcome i, second outcome j | first setting s, second setting t)."""
    table = np.zeros((2, 2, 2, 2))
    for s in SETTINGS:
        for t in SETTINGS:
            for i, (p_i, state) in enumerate(_stage(rho, first[0], first[1], read_memory=(s == 0))):
                if state is None:
                    continue
                for j, (p_j, _) in enumerate(_stage(state, second[0], second[1], read_memory=(t == 0))):
                    table[i, j, s, t] = p_i * p_j
    return table


def run_forward(config: ScenarioConfig) -> BehaviorTable:
    """Charlie/Alice act on the input, then the system travels to Debbie/Bob."""
    table = _two_stage_table(config.input_state.matrix, config.first_side(), config.second_side())
    return BehaviorTable(p=table)


def run_reverse(config: ScenarioConfig) -> BehaviorTable:
    """Debbie/Bob act first; p_←(b,a|y,x) comes back re-indexed as p[a][b][x][y]."""
    table = _two_stage_table(config.input_state.matrix, config.second_side(), config.first_side())
    return BehaviorTable(p=table.transpose(1, 0, 3, 2))


def correlators(behavior: BehaviorTable) -> np.ndarray:
    """E[x, y] = ⟨A_x B_y⟩ = Σ ab p(a,b|x,y)."""
    return np.einsum("a,b,abxy->xy", SIGNS, SIGNS, behavior.p)


def channel_correlator(n: BlochVector, m: BlochVector, rho_in: DensityMatrix) -> float:
    """Σ_ab a·b·Tr[Π_b^m Π_a^n ρ Π_a^n]: sequential Lüders measurements, no dilation."""
    total = 0.0
    for a in OUTCOMES:
        pa = projector_from_bloch(n, a)
        post = pa @ rho_in.matrix @ pa
        for b in OUTCOMES:
            total += a * b * float(np.trace(projector_from_bloch(m, b) @ post).real)
    return total


# ------------------- operational time symmetry -------------------

def record_from_forward(behavior: BehaviorTable) -> PrepMeasureRecord:
    return PrepMeasureRecord(p=behavior.p, u_labels=("x=0", "x=1"), v_labels=("y=0", "y=1"))


def record_from_reverse(behavior: BehaviorTable) -> PrepMeasureRecord:
    """Reverse run stored in its own temporal order: e=b, f=a, u=y, v=x."""
    return PrepMeasureRecord(p=behavior.p.transpose(1, 0, 3, 2), u_labels=("y=0", "y=1"), v_labels=("x=0", "x=1"))


def ots_check(forward: PrepMeasureRecord, reverse: PrepMeasureRecord, tol: float = 1e-12) -> AssumptionReport:
    """p_←(f,e|v,u) = p_→(e,f|u,v) for every outcome and setting."""
    if tuple(forward.u_labels) != tuple(reverse.v_labels) or tuple(forward.v_labels) != tuple(reverse.u_labels):
        raise LabelMismatchError(
            f"setting labels do not pair up: forward u={forward.u_labels} v={forward.v_labels}, "
            f"reverse u={reverse.u_labels} v={reverse.v_labels}"
        )
    rev = reverse.p.transpose(1, 0, 3, 2)
    diff = np.abs(rev - forward.p)
    worst = float(diff.max())
    if worst <= tol:
        return AssumptionReport(name="operational time symmetry", verdict=Verdict.PASS, max_deviation=worst)
    e, f, u, v = np.unravel_index(int(diff.argmax()), diff.shape)
    witness = Witness(
        clause="p_rev(f,e|v,u) = p_fwd(e,f|u,v)",
        index={"e": OUTCOMES[e], "f": OUTCOMES[f], "u": int(u), "v": int(v)},
        expected=float(forward.p[e, f, u, v]),
        observed=float(rev[e, f, u, v]),
    )
    return AssumptionReport(name="operational time symmetry", verdict=Verdict.FAIL, max_deviation=worst, witness=witness)


def marginal_signalling(behavior: BehaviorTable, tol: float) -> SignallingReport:
    pa = behavior.p.sum(axis=1)  # [a][x][y]
    pb = behavior.p.sum(axis=0)  # [b][x][y]
    future_to_past = float(np.abs(pa[:, :, 0] - pa[:, :, 1]).max())
    past_to_future = float(np.abs(pb[:, 0, :] - pb[:, 1, :]).max())
    return SignallingReport(
        past_to_future_ok=past_to_future <= tol,
        past_to_future_deviation=past_to_future,
        future_to_past_ok=future_to_past <= tol,
        future_to_past_deviation=future_to_past,
    )


def nst_check(config: ScenarioConfig, tol: float = 1e-12) -> SignallingReport:
    """No-signalling in time of the forward behavior, both directions."""
    report = marginal_signalling(run_forward(config), tol)
    if not report.past_to_future_ok:
        log.info("input preparation leaves the no-signalling-in-time sector (deviation %.3e)",
                 report.past_to_future_deviation)
    return report
