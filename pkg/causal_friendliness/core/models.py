# causal_friendliness/core/models.py
"""Probability tables, reports and certificates shared across the package.

Outcome encoding is ±1 everywhere; table axes index outcome +1 at 0 and
outcome -1 at 1. Settings index directly (0 or 1).
"""
from __future__ import annotations

try:
    from enum import StrEnum
except ImportError:  # Python < 3.11: equivalent of the stdlib StrEnum
    from enum import Enum

    class StrEnum(str, Enum):
        __str__ = str.__str__
        __format__ = str.__format__
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from causal_friendliness.core.arrays import RealArray
from causal_friendliness.core.tensor import BlochVector, DensityMatrix

OUTCOMES: Tuple[int, int] = (1, -1)
SETTINGS: Tuple[int, int] = (0, 1)
SIGNS = np.array([1.0, -1.0])
NORMALIZATION_TOL = 1e-12


def outcome_index(outcome: int) -> int:
    if outcome not in OUTCOMES:
        raise ValueError(f"outcome must be +1 or -1, got {outcome!r}")
    return OUTCOMES.index(outcome)


def _check_table(p: np.ndarray, shape: Tuple[int, ...], sum_axes: Sequence[int], what: str) -> None:
    if p.shape != shape:
        raise ValueError(f"{what} must have shape {shape}, got {p.shape}")
    if p.min() < -NORMALIZATION_TOL or p.max() > 1 + NORMALIZATION_TOL:
        raise ValueError(f"{what} has entries outside [0, 1]")
    sums = p.sum(axis=tuple(sum_axes))
    worst = float(np.max(np.abs(sums - 1.0)))
    if worst > NORMALIZATION_TOL:
        raise ValueError(f"{what} is not normalized (worst deviation {worst:.3e})")


class _Table(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)


# ------------------- observed statistics -------------------

class BehaviorTable(_Table):
    """p(a,b|x,y) stored as p[a][b][x][y]."""

    p: RealArray

    @model_validator(mode="after")
    def _valid(self) -> "BehaviorTable":
        _check_table(self.p, (2, 2, 2, 2), (0, 1), "behavior table")
        return self

    @classmethod
    def uniform(cls) -> "BehaviorTable":
        return cls(p=np.full((2, 2, 2, 2), 0.25))

    def prob(self, a: int, b: int, x: int, y: int) -> float:
        return float(self.p[outcome_index(a), outcome_index(b), x, y])

    def vector(self) -> np.ndarray:
        return self.p.reshape(-1)


class PrepMeasureRecord(_Table):
    """p(e,f|u,v) of a prepare-measure experiment; e,u belong to whoever acts first."""

    p: RealArray
    u_labels: Tuple[str, str] = ("x=0", "x=1")
    v_labels: Tuple[str, str] = ("y=0", "y=1")

    @model_validator(mode="after")
    def _valid(self) -> "PrepMeasureRecord":
        _check_table(self.p, (2, 2, 2, 2), (0, 1), "prepare-measure record")
        return self


class JointTable(_Table):
    """p(c,a,d,b|x,y) stored as p[c][a][d][b][x][y].

    For a time-reversed experiment the same layout is read in that experiment's
    own order: first pseudo event, first observed event, second pseudo event,
    second observed event, first setting, second setting.
    """

    p: RealArray

    @model_validator(mode="after")
    def _valid(self) -> "JointTable":
        _check_table(self.p, (2,) * 6, (0, 1, 2, 3), "joint table")
        return self

    @classmethod
    def uniform(cls) -> "JointTable":
        return cls(p=np.full((2,) * 6, 1 / 16))


class MarginalBundle(_Table):
    """Operational marginals without a presumed global joint.

    pcd[c][d][x][y] = p(c,d|x,y), pa[a][x][c] = p(a|x,c), pb[b][y][c][d] = p(b|y,c,d).
    """

    pcd: RealArray
    pa: RealArray
    pb: RealArray

    @model_validator(mode="after")
    def _valid(self) -> "MarginalBundle":
        _check_table(self.pcd, (2, 2, 2, 2), (0, 1), "p(c,d|x,y)")
        _check_table(self.pa, (2, 2, 2), (0,), "p(a|x,c)")
        _check_table(self.pb, (2, 2, 2, 2), (0,), "p(b|y,c,d)")
        return self


class ContextDependentModel(_Table):
    """Setting-dependent pseudo-event weights with response expectations in [-1, 1].

    a_response[x][c] = A_x^(c), b_response[y][c][d] = B_y^(c,d).
    """

    pcd: RealArray
    a_response: RealArray
    b_response: RealArray

    @model_validator(mode="after")
    def _valid(self) -> "ContextDependentModel":
        _check_table(self.pcd, (2, 2, 2, 2), (0, 1), "p(c,d|x,y)")
        if self.a_response.shape != (2, 2) or self.b_response.shape != (2, 2, 2):
            raise ValueError("responses must have shapes (2,2) and (2,2,2)")
        if np.abs(self.a_response).max() > 1 or np.abs(self.b_response).max() > 1:
            raise ValueError("responses must lie in [-1, 1]")
        return self

    def to_bundle(self) -> MarginalBundle:
        pa = (1 + SIGNS[:, None, None] * self.a_response[None, :, :]) / 2
        pb = (1 + SIGNS[:, None, None, None] * self.b_response[None, :, :, :]) / 2
        return MarginalBundle(pcd=self.pcd, pa=pa, pb=pb)


# ------------------- scenario -------------------

class ScenarioConfig(BaseModel):
    """Input state plus the observables behind x=0, x=1 (charlie, alice) and y=0, y=1 (debbie, bob)."""

    model_config = ConfigDict(frozen=True)

    input_state: DensityMatrix = Field(default_factory=DensityMatrix.maximally_mixed)
    charlie: BlochVector
    alice: BlochVector
    debbie: BlochVector
    bob: BlochVector

    @field_validator("input_state")
    @classmethod
    def _qubit(cls, v: DensityMatrix) -> DensityMatrix:
        if v.dim != 2:
            raise ValueError(f"input state must be a qubit, got dimension {v.dim}")
        return v

    @classmethod
    def complementary(cls, input_state: Optional[DensityMatrix] = None) -> "ScenarioConfig":
        r = 1 / np.sqrt(2)
        return cls(
            input_state=input_state or DensityMatrix.maximally_mixed(),
            charlie=BlochVector(x=0.0, y=0.0, z=1.0),
            alice=BlochVector(x=1.0, y=0.0, z=0.0),
            debbie=BlochVector(x=r, y=0.0, z=r),
            bob=BlochVector(x=-r, y=0.0, z=r),
        )

    def first_side(self) -> Tuple[BlochVector, BlochVector]:
        return self.charlie, self.alice

    def second_side(self) -> Tuple[BlochVector, BlochVector]:
        return self.debbie, self.bob


# ------------------- reports -------------------

class Verdict(StrEnum):
    PASS = "pass"
    FAIL = "fail"
    VACUOUS = "vacuous"


class Witness(BaseModel):
    clause: str
    index: Dict[str, int]
    expected: float
    observed: float


class AssumptionReport(BaseModel):
    name: str
    verdict: Verdict
    max_deviation: float = Field(ge=0.0)
    witness: Optional[Witness] = None
    indeterminate: int = 0
    preconditions: List["AssumptionReport"] = Field(default_factory=list)
    conclusion: Optional["AssumptionReport"] = None

    @model_validator(mode="after")
    def _witness_iff_fail(self) -> "AssumptionReport":
        if (self.witness is not None) != (self.verdict is Verdict.FAIL):
            raise ValueError("a witness is required exactly when the verdict is 'fail'")
        return self

    @property
    def passed(self) -> bool:
        return self.verdict is Verdict.PASS


class SignallingReport(BaseModel):
    """Marginal independence in both temporal directions.

    past_to_future: Σ_a p(a,b|x,y) independent of x (earlier choices do not alter later marginals).
    future_to_past: Σ_b p(a,b|x,y) independent of y (later choices do not alter earlier marginals).
    """

    past_to_future_ok: bool
    past_to_future_deviation: float
    future_to_past_ok: bool
    future_to_past_deviation: float

    @property
    def max_deviation(self) -> float:
        return max(self.past_to_future_deviation, self.future_to_past_deviation)

    @property
    def holds(self) -> bool:
        return self.past_to_future_ok and self.future_to_past_ok


class DeterministicStrategy(BaseModel):
    model_config = ConfigDict(frozen=True)

    a_of_x: Tuple[int, int]
    b_of_y: Tuple[int, int]

    @field_validator("a_of_x", "b_of_y")
    @classmethod
    def _pm_one(cls, v: Tuple[int, int]) -> Tuple[int, int]:
        if any(o not in OUTCOMES for o in v):
            raise ValueError(f"deterministic responses must be ±1, got {v}")
        return v

    def behavior(self) -> BehaviorTable:
        p = np.zeros((2, 2, 2, 2))
        for x in SETTINGS:
            for y in SETTINGS:
                p[outcome_index(self.a_of_x[x]), outcome_index(self.b_of_y[y]), x, y] = 1.0
        return BehaviorTable(p=p)


class Membership(StrEnum):
    INSIDE = "inside"
    OUTSIDE = "outside"


class Facet(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    kind: str  # "chsh" or "farkas"
    coefficients: RealArray  # over p[a][b][x][y], flattened in that order
    bound: float
    value: float


class MembershipCertificate(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    verdict: Membership
    weights: Optional[RealArray] = None
    facet: Optional[Facet] = None
    phase1_residual: float = 0.0

    @model_validator(mode="after")
    def _consistent(self) -> "MembershipCertificate":
        if self.verdict is Membership.INSIDE:
            if self.weights is None or self.facet is not None:
                raise ValueError("an inside certificate carries weights and no facet")
            if self.weights.shape != (16,) or self.weights.min() < 0:
                raise ValueError("weights must be 16 nonnegative reals")
            if abs(self.weights.sum() - 1.0) > 1e-9:
                raise ValueError("weights must sum to 1")
        else:
            if self.facet is None or self.weights is not None:
                raise ValueError("an outside certificate carries a facet and no weights")
        return self


class RunReport(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    command: str
    tool_version: str
    config: Dict[str, Any] = Field(default_factory=dict)
    seed: Optional[int] = None
    correlators: Optional[Dict[str, float]] = None
    chsh: Optional[float] = None
    membership: Optional[MembershipCertificate] = None
    signalling: Optional[SignallingReport] = None
    assumptions: List[AssumptionReport] = Field(default_factory=list)
    details: Dict[str, Any] = Field(default_factory=dict)


AssumptionReport.model_rebuild()


# ------------------- campaigns -------------------

class Counterexample(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    sample: int
    report: AssumptionReport
    forward: Optional[JointTable] = None


class CampaignResult(BaseModel):
    """Tally of one property campaign over ``samples`` seeded draws."""

    name: str
    samples: int
    seed: int
    passes: int = 0
    failures: int = 0
    vacuous: int = 0
    max_deviation: float = 0.0
    counterexamples: List[Counterexample] = Field(default_factory=list)

    @property
    def clean(self) -> bool:
        return self.failures == 0 and self.vacuous == 0
