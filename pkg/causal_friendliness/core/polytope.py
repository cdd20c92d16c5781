# causal_friendliness/core/polytope.py
"""Causal Friendliness polytope: the convex hull of the 16 deterministic behaviors.

Membership is decided by a Phase-1 feasibility LP over vertex weights. An
infeasible LP hands back a Farkas hyperplane; when one of the eight CHSH
facets also separates, the most violated of those is reported instead so the
certificate reads as "S vs 2".
"""
from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import List, Optional, Sequence, Tuple

import numpy as np

from causal_friendliness.core.errors import NumericalInvariantError
from causal_friendliness.core.models import (
    OUTCOMES,
    SIGNS,
    BehaviorTable,
    ContextDependentModel,
    DeterministicStrategy,
    Facet,
    Membership,
    MembershipCertificate,
    ScenarioConfig,
    SignallingReport,
)
from causal_friendliness.core.simplex import LPStatus, TwoPhaseSimplex
from causal_friendliness.core.tensor import BlochVector, DensityMatrix
from causal_friendliness.core.wigner import channel_correlator, correlators, marginal_signalling, run_forward

log = logging.getLogger(__name__)

CLASSICAL_BOUND = 2.0
TSIRELSON_BOUND = 2.0 * math.sqrt(2.0)
BOXWORLD_BOUND = 4.0
RECONSTRUCTION_TOL = 1e-9

# sign pattern of ⟨A_xB_y⟩ in S = E00 + E01 + E10 - E11
CHSH_PATTERN = np.array([[1.0, 1.0], [1.0, -1.0]])


# ------------------- CHSH -------------------

def chsh(behavior: BehaviorTable) -> float:
    """S = ⟨A₀B₀⟩ + ⟨A₀B₁⟩ + ⟨A₁B₀⟩ − ⟨A₁B₁⟩."""
    return float(np.sum(CHSH_PATTERN * correlators(behavior)))


def _chsh_variants() -> List[Tuple[str, np.ndarray]]:
    """The eight CHSH facets as coefficient arrays over p[a][b][x][y]."""
    ab = np.outer(SIGNS, SIGNS)
    out = []
    for minus in itertools.product((0, 1), repeat=2):
        pattern = np.ones((2, 2))
        pattern[minus] = -1.0
        for overall in (1.0, -1.0):
            coeffs = overall * ab[:, :, None, None] * pattern[None, None, :, :]
            name = f"{'+' if overall > 0 else '-'}CHSH(minus at x={minus[0]}, y={minus[1]})"
            out.append((name, coeffs))
    return out


# ------------------- vertices -------------------

def enumerate_strategies() -> List[DeterministicStrategy]:
    return [
        DeterministicStrategy(a_of_x=a, b_of_y=b)
        for a in itertools.product(OUTCOMES, repeat=2)
        for b in itertools.product(OUTCOMES, repeat=2)
    ]


def enumerate_vertices() -> List[BehaviorTable]:
    return [s.behavior() for s in enumerate_strategies()]


@lru_cache(maxsize=1)
def _vertex_matrix() -> np.ndarray:
    """Columns are the flattened vertex behaviors."""
    v = np.column_stack([t.vector() for t in enumerate_vertices()])
    v.setflags(write=False)
    return v


# ------------------- membership -------------------

def _validate_behavior(behavior: BehaviorTable) -> np.ndarray:
    p = behavior.vector()
    if not np.all(np.isfinite(p)):
        raise NumericalInvariantError("behavior contains non-finite entries")
    return p


def _farkas_facet(y: np.ndarray, p: np.ndarray) -> Facet:
    vertices = _vertex_matrix()
    coeffs = y[:16]
    scale = float(np.abs(coeffs).max())
    if scale == 0.0:
        raise NumericalInvariantError("Phase-1 dual is degenerate; cannot build a separating hyperplane")
    coeffs = coeffs / scale
    bound = float((coeffs @ vertices).max())
    return Facet(kind="farkas", coefficients=coeffs, bound=bound, value=float(coeffs @ p))


def _best_chsh_facet(p: np.ndarray, tol: float) -> Optional[Facet]:
    best: Optional[Facet] = None
    for _, coeffs in _chsh_variants():
        flat = coeffs.reshape(-1)
        value = float(flat @ p)
        if value > CLASSICAL_BOUND + tol and (best is None or value > best.value):
            best = Facet(kind="chsh", coefficients=flat, bound=CLASSICAL_BOUND, value=value)
    return best


def membership(behavior: BehaviorTable, tol: float = 1e-9,
               solver: Optional[TwoPhaseSimplex] = None) -> MembershipCertificate:
    """Inside: convex weights over the 16 vertices. Outside: a separating hyperplane."""
    p = _validate_behavior(behavior)
    vertices = _vertex_matrix()
    A = np.vstack([vertices, np.ones((1, 16))])
    b = np.append(p, 1.0)
    result = (solver or TwoPhaseSimplex(feasibility_tol=tol)).solve(np.zeros(16), A, b)

    if result.status is LPStatus.OPTIMAL:
        w = np.clip(result.x, 0.0, None)
        w = w / w.sum()
        err = float(np.abs(vertices @ w - p).max())
        if err > RECONSTRUCTION_TOL:
            raise NumericalInvariantError(f"inside certificate reconstructs the behavior only to {err:.3e}")
        return MembershipCertificate(verdict=Membership.INSIDE, weights=w, phase1_residual=result.phase1_residual)

    if result.status is not LPStatus.INFEASIBLE:
        raise NumericalInvariantError(f"membership LP ended with status {result.status}")

    facet = _best_chsh_facet(p, tol) or _farkas_facet(result.farkas, p)
    if float((facet.coefficients @ vertices).max()) > facet.bound or facet.value <= facet.bound + tol:
        raise NumericalInvariantError("separating hyperplane fails its own soundness check")
    log.debug("behavior outside: %s facet %.9g vs bound %.9g", facet.kind, facet.value, facet.bound)
    return MembershipCertificate(verdict=Membership.OUTSIDE, facet=facet, phase1_residual=result.phase1_residual)


def white_noise_visibility(behavior: BehaviorTable, solver: Optional[TwoPhaseSimplex] = None) -> float:
    """Largest λ with λ·p + (1−λ)·uniform inside the polytope (inf if p is uniform)."""
    p = _validate_behavior(behavior)
    u = BehaviorTable.uniform().vector()
    vertices = _vertex_matrix()
    A = np.zeros((17, 17))
    A[:16, :16] = vertices
    A[:16, 16] = -(p - u)
    A[16, :16] = 1.0
    b = np.append(u, 1.0)
    c = np.zeros(17)
    c[16] = -1.0
    result = (solver or TwoPhaseSimplex()).solve(c, A, b)
    if result.status is LPStatus.UNBOUNDED:
        return math.inf
    if result.status is not LPStatus.OPTIMAL:
        raise NumericalInvariantError(f"visibility LP ended with status {result.status}")
    return float(result.x[16])


def signalling_check(behavior: BehaviorTable, tol: float = 1e-12) -> SignallingReport:
    return marginal_signalling(behavior, tol)


# ------------------- Tsirelson search -------------------

PARTIES = ("charlie", "alice", "debbie", "bob")


@dataclass(frozen=True)
class SearchResult:
    best_s: float
    settings: Tuple[BlochVector, BlochVector, BlochVector, BlochVector]
    angles: Tuple[float, ...]
    history: List[float] = field(default_factory=list)

    def as_config(self, input_state: DensityMatrix) -> ScenarioConfig:
        return ScenarioConfig(input_state=input_state, **dict(zip(PARTIES, self.settings)))


def _plane_vector(theta: float) -> BlochVector:
    # x–z plane; theta sweeps the full circle
    return BlochVector(x=math.sin(theta), y=0.0, z=math.cos(theta))


def _vectors(angles: Sequence[float], parameterization: str) -> List[BlochVector]:
    if parameterization == "plane":
        return [_plane_vector(t) for t in angles]
    return [BlochVector.from_angles(angles[2 * i], angles[2 * i + 1]) for i in range(4)]


def _s_at(input_state: DensityMatrix, angles: Sequence[float], parameterization: str) -> float:
    vecs = _vectors(angles, parameterization)
    return chsh(run_forward(ScenarioConfig(input_state=input_state, **dict(zip(PARTIES, vecs)))))


def grid_search(input_state: DensityMatrix, charlie: Sequence[float], alice: Sequence[float],
                debbie: Sequence[float], bob: Sequence[float]) -> SearchResult:
    """Exhaustive planar search over explicit angle grids.

    S splits into pairwise correlators, so each (first-side, second-side) pair
    is evaluated once; ties go to the lexicographically smallest index.
    """
    grids = [np.asarray(g, dtype=float) for g in (charlie, alice, debbie, bob)]
    first = sorted(set(grids[0].tolist()) | set(grids[1].tolist()))
    second = sorted(set(grids[2].tolist()) | set(grids[3].tolist()))
    table = {
        (n, m): channel_correlator(_plane_vector(n), _plane_vector(m), input_state)
        for n in first for m in second
    }
    k = np.array([[table[(n, m)] for m in grids[2]] for n in grids[0]])   # charlie × debbie
    l = np.array([[table[(n, m)] for m in grids[3]] for n in grids[0]])   # charlie × bob
    kj = np.array([[table[(n, m)] for m in grids[2]] for n in grids[1]])  # alice × debbie
    lj = np.array([[table[(n, m)] for m in grids[3]] for n in grids[1]])  # alice × bob

    best_s, best_idx = -math.inf, (0, 0, 0, 0)
    for i in range(len(grids[0])):
        block = k[i][None, :, None] + l[i][None, None, :] + kj[:, :, None] - lj[:, None, :]
        flat = int(block.argmax())
        if block.flat[flat] > best_s:
            best_s = float(block.flat[flat])
            best_idx = (i, *np.unravel_index(flat, block.shape))
    angles = tuple(float(grids[p][best_idx[p]]) for p in range(4))
    return SearchResult(best_s=best_s, settings=tuple(_vectors(angles, "plane")), angles=angles, history=[best_s])


def refine(input_state: DensityMatrix, angles: Sequence[float], iterations: int, step: float,
           parameterization: str = "plane", min_step: float = 1e-12, min_gain: float = 1e-13) -> SearchResult:
    """Coordinate descent on S; each iteration sweeps every angle once, halving the step after an idle sweep."""
    angles = list(angles)
    best = _s_at(input_state, angles, parameterization)
    history = [best]
    for _ in range(iterations):
        if step < min_step:
            break
        moved = False
        for i in range(len(angles)):
            for delta in (step, -step):
                trial = list(angles)
                trial[i] += delta
                s = _s_at(input_state, trial, parameterization)
                if s > best + min_gain:
                    best, angles, moved = s, trial, True
                    break
        if not moved:
            step /= 2
        history.append(best)
    return SearchResult(best_s=best, settings=tuple(_vectors(angles, parameterization)),
                        angles=tuple(angles), history=history)


def tsirelson_search(input_state: DensityMatrix, grid: int, refine_iters: int,
                     parameterization: str = "plane") -> SearchResult:
    """Coarse planar grid followed by coordinate-descent refinement through the circuit simulator.

    ``parameterization="sphere"`` refines over polar and azimuthal angles per
    observable, starting from the planar grid optimum.
    """
    if grid < 8:
        raise ValueError(f"grid must be at least 8, got {grid}")
    if parameterization not in ("plane", "sphere"):
        raise ValueError(f"unknown parameterization {parameterization!r}")
    thetas = np.arange(grid) * (2 * math.pi / grid)
    coarse = grid_search(input_state, thetas, thetas, thetas, thetas)
    log.info("grid %d: best S = %.9f", grid, coarse.best_s)

    start: Sequence[float] = coarse.angles
    if parameterization == "sphere":
        # planar angle θ on the full circle is polar |θ| with azimuth 0 or π
        start = [v for t in coarse.angles for v in (abs(math.remainder(t, 2 * math.pi)),
                                                     0.0 if math.remainder(t, 2 * math.pi) >= 0 else math.pi)]
    refined = refine(input_state, start, refine_iters, step=2 * math.pi / grid, parameterization=parameterization)
    history = [coarse.best_s] + refined.history
    # grid and circuit values of the same point differ by round-off
    if refined.best_s < coarse.best_s - 1e-12:
        return SearchResult(coarse.best_s, coarse.settings, coarse.angles, history)
    log.info("refined: best S = %.9f after %d iterations", refined.best_s, len(refined.history) - 1)
    return SearchResult(refined.best_s, refined.settings, refined.angles, history)


# ------------------- context-dependent construction -------------------

def boxworld_construction() -> Tuple[ContextDependentModel, BehaviorTable]:
    """Setting-dependent pseudo events with deterministic responses reaching S = 4.

    p(c,d|x,y) puts all weight on (c,d) = (x,y). Responses that never receive
    weight are fixed to +1.
    """
    pcd = np.zeros((2, 2, 2, 2))
    for x in (0, 1):
        for y in (0, 1):
            pcd[x, y, x, y] = 1.0
    a_response = np.ones((2, 2))          # A_x^(c)
    b_response = np.ones((2, 2, 2))       # B_y^(c,d)
    b_response[1, 1, 1] = -1.0            # B_1^(1,1)
    model = ContextDependentModel(pcd=pcd, a_response=a_response, b_response=b_response)
    bundle = model.to_bundle()
    behavior = np.einsum("cdxy,axc,bycd->abxy", bundle.pcd, bundle.pa, bundle.pb)
    return model, BehaviorTable(p=behavior)


def pr_box() -> BehaviorTable:
    """a·b = +1 except when x = y = 1, each allowed pair with probability 1/2."""
    p = np.zeros((2, 2, 2, 2))
    for ia, a in enumerate(OUTCOMES):
        for ib, b in enumerate(OUTCOMES):
            for x in (0, 1):
                for y in (0, 1):
                    want = -1 if (x, y) == (1, 1) else 1
                    p[ia, ib, x, y] = 0.5 if a * b == want else 0.0
    return BehaviorTable(p=p)
