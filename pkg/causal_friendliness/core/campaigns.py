# causal_friendliness/core/campaigns.py
"""Seeded property campaigns over sampled classical models.

Each sample draws from its own generator seeded with (master_seed, index), so
a campaign gives the same tally whether it runs sequentially or on a pool.
"""
from __future__ import annotations

import asyncio
import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Optional, Tuple

import numpy as np

from causal_friendliness.core.causal import (
    DEFAULT_TOL,
    build_cf_model,
    check_spe,
    lemma1_check,
    lemma2_check,
    opem_mediator_independence,
    opem_q,
    time_reversed,
)
from causal_friendliness.core.config import settings
from causal_friendliness.core.models import (
    AssumptionReport,
    CampaignResult,
    Counterexample,
    JointTable,
    MarginalBundle,
    Membership,
    Verdict,
    Witness,
)
from causal_friendliness.core.polytope import CLASSICAL_BOUND, chsh, membership

log = logging.getLogger(__name__)

MAX_COUNTEREXAMPLES = 3

Trial = Callable[[int, np.random.Generator], Tuple[AssumptionReport, Optional[JointTable]]]


def sample_rng(master_seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng([master_seed, index])


def _conditional(rng: np.random.Generator, size: Tuple[int, ...]) -> np.ndarray:
    """Binary conditionals of shape (2, *size); the first axis is the outcome."""
    draws = rng.dirichlet(np.ones(2), size=size)
    return np.moveaxis(draws, -1, 0)


# ------------------- samplers -------------------

def sample_cf_factors(rng: np.random.Generator) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """p(c,d) as [c][d], p(a|x,c) as [a][x][c], p(b|y,c,d) as [b][y][c][d]."""
    pcd = rng.dirichlet(np.ones(4)).reshape(2, 2)
    pa = _conditional(rng, (2, 2))
    pb = _conditional(rng, (2, 2, 2))
    return pcd, pa, pb


def sample_time_symmetric_pair(rng: np.random.Generator) -> Tuple[JointTable, JointTable]:
    """A forward joint and its reverse, both built from one set of shared factors.

    The reverse is assembled straight into its own order (d,b,c,a|y,x) rather
    than re-indexed from the forward table.
    """
    pcd, pa, pb = sample_cf_factors(rng)
    fwd, _ = build_cf_model(pcd, pa, pb)
    rev = JointTable(p=np.einsum("cd,axc,bycd->dbcayx", pcd, pa, pb))
    return fwd, rev


def sample_time_symmetric_bundles(rng: np.random.Generator) -> Tuple[MarginalBundle, MarginalBundle]:
    """Forward and reverse bundles whose operational joints coincide.

    Bob's response depends on d only, which is what lets the reverse bundle
    carry Alice's response as its own second-stage conditional.
    """
    pcd = rng.dirichlet(np.ones(4)).reshape(2, 2)
    pa = _conditional(rng, (2, 2))          # [a][x][c]
    g = _conditional(rng, (2, 2))           # [b][y][d]

    fwd = MarginalBundle(
        pcd=np.broadcast_to(pcd[:, :, None, None], (2, 2, 2, 2)),
        pa=pa,
        pb=np.broadcast_to(g[:, :, None, :], (2, 2, 2, 2)),
    )
    rev = MarginalBundle(
        pcd=np.broadcast_to(pcd.T[:, :, None, None], (2, 2, 2, 2)),
        pa=g,
        pb=np.broadcast_to(pa[:, :, None, :], (2, 2, 2, 2)),
    )
    return fwd, rev


def sample_setting_leak_pair(rng: np.random.Generator) -> Tuple[JointTable, JointTable]:
    """NRC and SPE hold forward, yet Bob's response reads x through c.

    The leak is balanced so that p(b|y,d,x) stays free of x; ATS fixes the
    reverse table to the mirror of the forward one.
    """
    pcd = rng.dirichlet(np.ones(4)).reshape(2, 2)
    pa = _conditional(rng, (2, 2))
    base = rng.uniform(0.1, 0.9, size=(2, 2, 2))  # p(b=+1|y,c,d)
    pc_d = pcd / pcd.sum(axis=0, keepdims=True)
    s = rng.uniform(0.2, 1.0) * np.minimum(base, 1 - base).min() * pc_d.min()
    delta = np.stack([s / pc_d[0], -s / pc_d[1]])  # Σ_c p(c|d) delta[c][d] = 0
    plus = base[:, :, :, None] + np.array([-0.5, 0.5]) * delta[None, :, :, None]
    pb = np.stack([plus, 1.0 - plus])  # [b][y][c][d][x]
    fwd = JointTable(p=np.einsum("cd,axc,bycdx->cadbxy", pcd, pa, pb))
    return fwd, time_reversed(fwd)


def random_joint(rng: np.random.Generator) -> JointTable:
    """Unstructured joint: an independent Dirichlet fill per (x,y)."""
    draws = rng.dirichlet(np.ones(16), size=(2, 2))
    return JointTable(p=np.moveaxis(draws, -1, 0).reshape(2, 2, 2, 2, 2, 2))


# ------------------- predicate-separating witnesses -------------------

_HALF = np.full(2, 0.5)
_ONE = np.ones(2)


def nrc_without_ats_pair() -> Tuple[JointTable, JointTable]:
    """NRC holds forward, but d leans on x so the pseudo events are not setting free.

    The reverse table satisfies its own causal order, leaving ATS as the only
    broken precondition.
    """
    pd = np.array([[0.8, 0.3], [0.2, 0.7]])  # [d][x]
    fwd = JointTable(p=np.einsum("c,a,dx,b,y->cadbxy", _HALF, _HALF, pd, _HALF, _ONE))
    return fwd, time_reversed(JointTable.uniform())


def spe_without_om_joint() -> JointTable:
    """b leans on x (0.65 vs 0.35) but never on a."""
    pb = np.array([[0.65, 0.35], [0.35, 0.65]])  # [b][x]
    return JointTable(p=np.einsum("c,a,d,bx,y->cadbxy", _HALF, _HALF, _HALF, pb, _ONE))


def spe_and_om_failing_joint() -> JointTable:
    pb = np.array([[0.9, 0.1], [0.1, 0.9]])  # [b][a]
    return JointTable(p=np.einsum("c,a,d,ba,x,y->cadbxy", _HALF, _HALF, _HALF, pb, _ONE, _ONE))


def aoe_without_nrc_joint() -> JointTable:
    """Any joint is its own AOE witness; this one lets c lean on x."""
    pc = np.array([[0.6, 0.4], [0.4, 0.6]])  # [c][x]
    return JointTable(p=np.einsum("cx,a,d,b,y->cadbxy", pc, _HALF, _HALF, _HALF, _ONE))


# ------------------- campaign runner -------------------

async def _gather(trial: Trial, seed: int, samples: int, workers: int):
    loop = asyncio.get_running_loop()
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return await asyncio.gather(*[
            loop.run_in_executor(pool, trial, i, sample_rng(seed, i)) for i in range(samples)
        ])


def run_campaign(name: str, trial: Trial, samples: int, seed: int,
                 workers: Optional[int] = None) -> CampaignResult:
    workers = settings.workers if workers is None else workers
    if samples < 0:
        raise ValueError(f"samples must be nonnegative, got {samples}")
    if workers > 1:
        outcomes = asyncio.run(_gather(trial, seed, samples, workers))
    else:
        outcomes = [trial(i, sample_rng(seed, i)) for i in range(samples)]

    result = CampaignResult(name=name, samples=samples, seed=seed)
    for i, (report, table) in enumerate(outcomes):
        result.max_deviation = max(result.max_deviation, report.max_deviation)
        if report.verdict is Verdict.PASS:
            result.passes += 1
            continue
        if report.verdict is Verdict.VACUOUS:
            result.vacuous += 1
        else:
            result.failures += 1
        if len(result.counterexamples) < MAX_COUNTEREXAMPLES:
            result.counterexamples.append(Counterexample(sample=i, report=report, forward=table))

    log.info("%s: %d/%d pass, %d fail, %d vacuous, max deviation %.3e",
             name, result.passes, samples, result.failures, result.vacuous, result.max_deviation,
             extra={"campaign": name, "seed": seed})
    return result


# ------------------- campaigns -------------------

def lemma_campaign(samples: int, seed: int, tol: float = DEFAULT_TOL,
                   workers: Optional[int] = None) -> List[CampaignResult]:
    """Both lemmas over the same precondition-satisfying pairs."""

    def first(_: int, rng: np.random.Generator):
        fwd, rev = sample_time_symmetric_pair(rng)
        return lemma1_check(fwd, rev, tol), fwd

    def second(_: int, rng: np.random.Generator):
        fwd, rev = sample_time_symmetric_pair(rng)
        return lemma2_check(fwd, rev, tol), fwd

    return [
        run_campaign("lemma: mediator independence", first, samples, seed, workers),
        run_campaign("lemma: pseudo-event screening", second, samples, seed, workers),
    ]


def opem_campaign(samples: int, seed: int, tol: float = DEFAULT_TOL,
                  workers: Optional[int] = None) -> CampaignResult:
    def trial(_: int, rng: np.random.Generator):
        fwd, rev = sample_time_symmetric_bundles(rng)
        return opem_mediator_independence(fwd, rev, tol), opem_q(fwd)

    return run_campaign("OPEM mediator independence", trial, samples, seed, workers)


def cf_polytope_campaign(samples: int, seed: int, tol: float = DEFAULT_TOL,
                         workers: Optional[int] = None) -> CampaignResult:
    """Every sampled classical model stays under S = 2 and is certified inside."""

    def trial(_: int, rng: np.random.Generator):
        joint, behavior = build_cf_model(*sample_cf_factors(rng))
        s = chsh(behavior)
        cert = membership(behavior, tol)
        excess = max(abs(s) - CLASSICAL_BOUND, 0.0)
        if excess <= tol and cert.verdict is Membership.INSIDE:
            return AssumptionReport(name="CF polytope", verdict=Verdict.PASS, max_deviation=excess), joint
        witness = Witness(clause="|S| <= 2 and inside the polytope", index={},
                          expected=CLASSICAL_BOUND, observed=s)
        return AssumptionReport(name="CF polytope", verdict=Verdict.FAIL, max_deviation=excess,
                                witness=witness), joint

    return run_campaign("CF polytope", trial, samples, seed, workers)


def setting_leak_campaign(samples: int, seed: int, tol: float = DEFAULT_TOL,
                          workers: Optional[int] = None) -> CampaignResult:
    """Search for an SPE model whose x-dependence survives NRC, reverse order and ATS.

    A failure is such a model. Samples that break a precondition are vacuous.
    """

    def trial(_: int, rng: np.random.Generator):
        fwd, rev = sample_setting_leak_pair(rng)
        report = lemma2_check(fwd, rev, tol)
        spe = check_spe(fwd, tol)
        if not spe.passed and report.verdict is not Verdict.VACUOUS:
            report = report.model_copy(update={"verdict": Verdict.VACUOUS, "witness": None})
        report = report.model_copy(update={"name": "SPE setting leak",
                                           "preconditions": [spe, *report.preconditions]})
        return report, fwd

    return run_campaign("SPE setting leak", trial, samples, seed, workers)
