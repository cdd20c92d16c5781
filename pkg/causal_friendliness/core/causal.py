# causal_friendliness/core/causal.py
"""Classical probability-table engine.

Every assumption is a conditional-independence predicate over a JointTable
p(c,a,d,b|x,y). A clause "p(T|G,D) = p(T|G)" is scored by the largest spread of
p(T|G,D) across the values of D at fixed (T,G); cells whose conditioning event
has probability below 1e-12 are indeterminate and never count as failures.
"""
from __future__ import annotations

import logging
from typing import Dict, Iterable, List, Optional, Tuple

import numpy as np

from causal_friendliness.core.models import (
    OUTCOMES,
    AssumptionReport,
    BehaviorTable,
    JointTable,
    MarginalBundle,
    Verdict,
    Witness,
)

log = logging.getLogger(__name__)

AXES: Tuple[str, ...] = ("c", "a", "d", "b", "x", "y")
OUTCOME_AXES = {"c", "a", "d", "b"}
ZERO_EVENT = 1e-12
DEFAULT_TOL = 1e-9
EJPD_IMPLICATION = "EOM + EJPD => AOE"
NRC_IMPLICATION = "EOM + NRC => ATOE + APE"

# clause label -> (target, given, dropped)
Clause = Tuple[Tuple[str, ...], Tuple[str, ...], Tuple[str, ...]]

CAUSAL_ORDER_CLAUSES: Dict[str, Clause] = {
    "p(c|x,y) = p(c)": (("c",), (), ("x", "y")),
    "p(a|c,x,y) = p(a|c,x)": (("a",), ("c", "x"), ("y",)),
    "p(d|c,a,x,y) = p(d|c,a,x)": (("d",), ("c", "a", "x"), ("y",)),
}
NRC_CLAUSES: Dict[str, Clause] = {
    **CAUSAL_ORDER_CLAUSES,
    "p(a|c,x,d) = p(a|c,x)": (("a",), ("c", "x", "y"), ("d",)),
}
SPE_CLAUSES: Dict[str, Clause] = {"p(b|c,x,a,d,y) = p(b|c,x,d,y)": (("b",), ("c", "x", "d", "y"), ("a",))}
OM_CLAUSES: Dict[str, Clause] = {"p(b|a,c,d,x,y) = p(b|c,d,y)": (("b",), ("c", "d", "y"), ("a", "x"))}
SETTING_INDEPENDENCE_CLAUSES: Dict[str, Clause] = {"p(c,d|x,y) = p(c,d)": (("c", "d"), (), ("x", "y"))}
LEMMA2_CLAUSES: Dict[str, Clause] = {
    "p(a|c,d,x,y) = p(a|c,x,d)": (("a",), ("c", "d", "x"), ("y",)),
    "p(b|y,c,x,d) = p(b|y,c,d)": (("b",), ("c", "d", "y"), ("x",)),
    "p(a|c,x,d) = p(a|c,x)": (("a",), ("c", "x", "y"), ("d",)),
}


# ------------------- conditional independence -------------------

def _axes(names: Iterable[str]) -> Tuple[int, ...]:
    return tuple(AXES.index(n) for n in names)


def _label(axis: str, i: int) -> int:
    return OUTCOMES[i] if axis in OUTCOME_AXES else int(i)


def _ci_deviation(table: np.ndarray, clause: Clause) -> Tuple[float, Witness, int]:
    """Largest spread of p(T|G,D) over D, at fixed T and G."""
    target, given, dropped = clause
    keep = set(_axes(target + given + dropped))
    others = tuple(i for i in range(len(AXES)) if i not in keep)
    t_ax, d_ax = _axes(target), _axes(dropped)

    num = table.sum(axis=others, keepdims=True)
    den = num.sum(axis=t_ax, keepdims=True)
    ok = den >= ZERO_EVENT
    indeterminate = int(np.count_nonzero(~ok))

    with np.errstate(divide="ignore", invalid="ignore"):
        cond = num / np.where(ok, den, 1.0)
    okb = np.broadcast_to(ok, cond.shape)
    lo = np.where(okb, cond, np.inf).min(axis=d_ax, keepdims=True)
    gap = np.where(okb & np.isfinite(lo), cond - lo, 0.0)

    flat = int(gap.argmax())
    cell = np.unravel_index(flat, gap.shape)
    lo_cell = tuple(0 if ax in d_ax else i for ax, i in enumerate(cell))
    index = {AXES[ax]: _label(AXES[ax], cell[ax]) for ax in sorted(keep)}
    witness = Witness(clause="", index=index, expected=float(lo[lo_cell]), observed=float(cond[cell]))
    return float(gap.flat[flat]), witness, indeterminate


def _report(name: str, table: np.ndarray, clauses: Dict[str, Clause], tol: float) -> AssumptionReport:
    worst_dev = 0.0
    worst_witness: Optional[Witness] = None
    indeterminate = 0
    for label, clause in clauses.items():
        dev, witness, undetermined = _ci_deviation(table, clause)
        indeterminate += undetermined
        if dev > worst_dev:
            worst_dev = dev
            worst_witness = witness.model_copy(update={"clause": label})
    if worst_dev > tol:
        log.debug("%s fails: %s deviation %.3e", name, worst_witness.clause, worst_dev)
        return AssumptionReport(name=name, verdict=Verdict.FAIL, max_deviation=worst_dev,
                                witness=worst_witness, indeterminate=indeterminate)
    return AssumptionReport(name=name, verdict=Verdict.PASS, max_deviation=worst_dev, indeterminate=indeterminate)


# ------------------- table transforms -------------------

def marginalize_ab(joint: JointTable) -> BehaviorTable:
    """p(a,b|x,y) = Σ_{c,d} p(c,a,d,b|x,y)."""
    return BehaviorTable(p=np.einsum("cadbxy->abxy", joint.p))


def time_reversed(joint: JointTable) -> JointTable:
    """Re-index a forward table into the reversed experiment's own order (d,b,c,a|y,x)."""
    return JointTable(p=joint.p.transpose(2, 3, 0, 1, 5, 4))


def relabel_outcomes(joint: JointTable) -> JointTable:
    """Swap +1 and -1 on every outcome simultaneously."""
    return JointTable(p=joint.p[::-1, ::-1, ::-1, ::-1, :, :])


def setting_marginal_cd(joint: JointTable) -> np.ndarray:
    """p(c,d|x,y) as [c][d][x][y]."""
    return np.einsum("cadbxy->cdxy", joint.p)


# ------------------- assumption predicates -------------------

def check_causal_order(joint: JointTable, tol: float = DEFAULT_TOL) -> AssumptionReport:
    """The forward causal factorisation p(c) p(a|x,c) p(d|c,x,a) p(b|c,x,a,d,y)."""
    return _report("causal order", joint.p, CAUSAL_ORDER_CLAUSES, tol)


def check_nrc(joint: JointTable, tol: float = DEFAULT_TOL) -> AssumptionReport:
    """No retrocausality: causal order plus a screened from the later pseudo event d."""
    return _report("NRC", joint.p, NRC_CLAUSES, tol)


def check_ats(fwd: JointTable, rev: JointTable, tol: float = DEFAULT_TOL) -> AssumptionReport:
    """p_←(d,b,c,a|y,x) = p_→(c,a,d,b|x,y); ``rev`` is stored in its own temporal order."""
    mirrored = rev.p.transpose(2, 3, 0, 1, 5, 4)
    diff = np.abs(mirrored - fwd.p)
    worst = float(diff.max())
    if worst <= tol:
        return AssumptionReport(name="ATS", verdict=Verdict.PASS, max_deviation=worst)
    cell = np.unravel_index(int(diff.argmax()), diff.shape)
    witness = Witness(
        clause="p_rev(d,b,c,a|y,x) = p_fwd(c,a,d,b|x,y)",
        index={AXES[ax]: _label(AXES[ax], cell[ax]) for ax in range(len(AXES))},
        expected=float(fwd.p[cell]),
        observed=float(mirrored[cell]),
    )
    return AssumptionReport(name="ATS", verdict=Verdict.FAIL, max_deviation=worst, witness=witness)


def check_spe(joint: JointTable, tol: float = DEFAULT_TOL) -> AssumptionReport:
    return _report("SPE", joint.p, SPE_CLAUSES, tol)


def check_om(table: JointTable | MarginalBundle, tol: float = DEFAULT_TOL) -> AssumptionReport:
    """Operational mediation: b depends on neither a nor x once c, d, y are fixed.

    A MarginalBundle satisfies it by construction (p(b|y,c,d) has no a or x slot),
    so bundles are checked through their operational joint.
    """
    joint = opem_q(table) if isinstance(table, MarginalBundle) else table
    return _report("OM", joint.p, OM_CLAUSES, tol)


def check_setting_independence(joint: JointTable, tol: float = DEFAULT_TOL, name: str = "mediator independence") -> AssumptionReport:
    """p(c,d|x,y) = p(c,d)."""
    return _report(name, joint.p, SETTING_INDEPENDENCE_CLAUSES, tol)


def check_ape(bundle: MarginalBundle, tol: float = DEFAULT_TOL) -> AssumptionReport:
    """Absolute pseudo events: a single setting-free p(c,d) underlies every context."""
    return check_setting_independence(opem_q(bundle), tol, name="APE")


# ------------------- lemmas -------------------

def _lemma(name: str, fwd: JointTable, rev: JointTable, tol: float,
           conclusion_clauses: Dict[str, Clause]) -> AssumptionReport:
    preconditions = [
        check_nrc(fwd, tol),
        check_causal_order(rev, tol).model_copy(update={"name": "reverse causal order"}),
        check_ats(fwd, rev, tol),
    ]
    conclusion = _report(f"{name} conclusion", fwd.p, conclusion_clauses, tol)
    if all(p.passed for p in preconditions):
        verdict = conclusion.verdict
        witness = conclusion.witness
    else:
        verdict, witness = Verdict.VACUOUS, None
    return AssumptionReport(
        name=name,
        verdict=verdict,
        max_deviation=conclusion.max_deviation,
        witness=witness,
        indeterminate=conclusion.indeterminate,
        preconditions=preconditions,
        conclusion=conclusion,
    )


def lemma1_check(fwd: JointTable, rev: JointTable, tol: float = DEFAULT_TOL) -> AssumptionReport:
    """Pseudo events independent of both settings once NRC, reverse order and ATS hold."""
    return _lemma("lemma: mediator independence", fwd, rev, tol, SETTING_INDEPENDENCE_CLAUSES)


def lemma2_check(fwd: JointTable, rev: JointTable, tol: float = DEFAULT_TOL) -> AssumptionReport:
    """Observed events screened off from the other party's setting by the pseudo events."""
    return _lemma("lemma: pseudo-event screening", fwd, rev, tol, LEMMA2_CLAUSES)


# ------------------- model constructors -------------------

def build_cf_model(pcd, pa, pb) -> Tuple[JointTable, BehaviorTable]:
    """p(c,d) p(a|x,c) p(b|y,c,d) and its observed behavior.

    ``pcd`` is [c][d], ``pa`` is [a][x][c], ``pb`` is [b][y][c][d]. The behavior
    is summed directly from the factors rather than marginalized from the joint.
    """
    pcd, pa, pb = (np.asarray(t, dtype=float) for t in (pcd, pa, pb))
    if pcd.shape != (2, 2) or pa.shape != (2, 2, 2) or pb.shape != (2, 2, 2, 2):
        raise ValueError("expected pcd (2,2), pa (2,2,2), pb (2,2,2,2)")
    pcd_xy = np.broadcast_to(pcd[:, :, None, None], (2, 2, 2, 2))
    # validates the normalization invariants
    MarginalBundle(pcd=pcd_xy, pa=pa, pb=pb)
    joint = np.einsum("cd,axc,bycd->cadbxy", pcd, pa, pb)
    behavior = np.einsum("cd,axc,bycd->abxy", pcd, pa, pb)
    return JointTable(p=joint), BehaviorTable(p=behavior)


def bundle_behavior(bundle: MarginalBundle) -> BehaviorTable:
    """Context-weighted behavior Σ_{c,d} p(c,d|x,y) p(a|x,c) p(b|y,c,d)."""
    return BehaviorTable(p=np.einsum("cdxy,axc,bycd->abxy", bundle.pcd, bundle.pa, bundle.pb))


def opem_q(bundle: MarginalBundle) -> JointTable:
    """Operationally constructed joint q = p(c,d|x,y) p(a|x,c) p(b|y,c,d), laid out as c,a,d,b,x,y."""
    q = np.einsum("cdxy,axc,bycd->cadbxy", bundle.pcd, bundle.pa, bundle.pb)
    return JointTable(p=q)


def opem_mediator_independence(fwd_bundle: MarginalBundle, rev_bundle: MarginalBundle,
                               tol: float = DEFAULT_TOL) -> AssumptionReport:
    """p(c,d|x,y) = p(c,d) once the forward and reverse operational joints agree.

    The reverse bundle is read in its own order: pcd[d][c][y][x], pa[b][y][d], pb[a][x][d][c].
    """
    q_fwd = opem_q(fwd_bundle)
    q_rev = opem_q(rev_bundle)
    fwd_nrc = _report("forward pseudo events free of y", q_fwd.p,
                      {"p(c,d|x,y) = p(c,d|x)": (("c", "d"), ("x",), ("y",))}, tol)
    rev_nrc = _report("reverse pseudo events free of x", q_rev.p,
                      {"p(d,c|y,x) = p(d,c|y)": (("c", "d"), ("x",), ("y",))}, tol)
    compat = check_ats(q_fwd, q_rev, tol).model_copy(update={"name": "ATS compatibility"})
    preconditions = [compat, fwd_nrc, rev_nrc]

    conclusion = check_setting_independence(q_fwd, tol, name="OPEM conclusion")
    if all(p.passed for p in preconditions):
        verdict, witness = conclusion.verdict, conclusion.witness
    else:
        verdict, witness = Verdict.VACUOUS, None
    return AssumptionReport(
        name="OPEM mediator independence",
        verdict=verdict,
        max_deviation=conclusion.max_deviation,
        witness=witness,
        indeterminate=conclusion.indeterminate,
        preconditions=preconditions,
        conclusion=conclusion,
    )


# ------------------- implication ledger -------------------

def check_ejpd(bundle: MarginalBundle, joint: JointTable, tol: float = DEFAULT_TOL) -> AssumptionReport:
    """Does ``joint`` reproduce every operational marginal of ``bundle``?"""
    deviations = {"p(c,d|x,y)": float(np.abs(setting_marginal_cd(joint) - bundle.pcd).max())}

    # conditionals only where the conditioning event carries weight
    pacx = np.einsum("cadbxy->acxy", joint.p)
    pcx = pacx.sum(axis=0, keepdims=True)
    ok = pcx >= ZERO_EVENT
    cond_a = np.where(ok, pacx / np.where(ok, pcx, 1.0), 0.0)
    want_a = np.broadcast_to(bundle.pa.transpose(0, 2, 1)[:, :, :, None], cond_a.shape)
    deviations["p(a|x,c)"] = float(np.where(np.broadcast_to(ok, cond_a.shape), np.abs(cond_a - want_a), 0.0).max())

    pbcd = np.einsum("cadbxy->bcdxy", joint.p)
    pcd = pbcd.sum(axis=0, keepdims=True)
    ok = pcd >= ZERO_EVENT
    cond_b = np.where(ok, pbcd / np.where(ok, pcd, 1.0), 0.0)
    want_b = np.broadcast_to(bundle.pb.transpose(0, 2, 3, 1)[:, :, :, None, :], cond_b.shape)
    deviations["p(b|y,c,d)"] = float(np.where(np.broadcast_to(ok, cond_b.shape), np.abs(cond_b - want_b), 0.0).max())

    label, worst = max(deviations.items(), key=lambda kv: kv[1])
    if worst <= tol:
        return AssumptionReport(name="EJPD", verdict=Verdict.PASS, max_deviation=worst)
    return AssumptionReport(
        name="EJPD",
        verdict=Verdict.FAIL,
        max_deviation=worst,
        witness=Witness(clause=f"joint reproduces {label}", index={}, expected=0.0, observed=worst),
    )


def check_aoe(joint: JointTable, behavior: BehaviorTable, tol: float = DEFAULT_TOL) -> AssumptionReport:
    """The observed behavior is the (a,b)-marginal of the joint."""
    diff = np.abs(marginalize_ab(joint).p - behavior.p)
    worst = float(diff.max())
    if worst <= tol:
        return AssumptionReport(name="AOE", verdict=Verdict.PASS, max_deviation=worst)
    a, b, x, y = np.unravel_index(int(diff.argmax()), diff.shape)
    return AssumptionReport(
        name="AOE",
        verdict=Verdict.FAIL,
        max_deviation=worst,
        witness=Witness(clause="p(a,b|x,y) = Σ_cd p(c,a,d,b|x,y)",
                        index={"a": OUTCOMES[a], "b": OUTCOMES[b], "x": int(x), "y": int(y)},
                        expected=float(behavior.p[a, b, x, y]), observed=float(marginalize_ab(joint).p[a, b, x, y])),
    )


def check_atoe(bundle: MarginalBundle, behavior: Optional[BehaviorTable] = None,
               tol: float = DEFAULT_TOL) -> AssumptionReport:
    """Absolute truly-observed events: the bundle assembles a distribution p(a,b|x,y) in every context.

    With ``behavior`` given, that distribution must also be the observed one.
    """
    t = np.einsum("cdxy,axc,bycd->abxy", bundle.pcd, bundle.pa, bundle.pb)
    deviations = {
        "Σ_ab p(a,b|x,y) = 1": float(np.abs(t.sum(axis=(0, 1)) - 1.0).max()),
        "p(a,b|x,y) >= 0": float(max(0.0, -t.min())),
    }
    if behavior is not None:
        deviations["p(a,b|x,y) = observed"] = float(np.abs(t - behavior.p).max())
    label, worst = max(deviations.items(), key=lambda kv: kv[1])
    if worst <= tol:
        return AssumptionReport(name="ATOE", verdict=Verdict.PASS, max_deviation=worst)
    return AssumptionReport(
        name="ATOE",
        verdict=Verdict.FAIL,
        max_deviation=worst,
        witness=Witness(clause=label, index={}, expected=0.0, observed=worst),
    )


def _implication(name: str, preconditions: List[AssumptionReport],
                 conclusions: List[AssumptionReport]) -> AssumptionReport:
    failed = [c for c in conclusions if not c.passed]
    conclusion = max(failed or conclusions, key=lambda c: c.max_deviation)
    if all(p.passed for p in preconditions):
        verdict, witness = conclusion.verdict, conclusion.witness
    else:
        verdict, witness = Verdict.VACUOUS, None
    return AssumptionReport(
        name=name,
        verdict=verdict,
        max_deviation=conclusion.max_deviation,
        witness=witness,
        preconditions=preconditions,
        conclusion=conclusion,
    )


def implication_ledger(bundle: MarginalBundle, joint: Optional[JointTable] = None,
                       tol: float = DEFAULT_TOL) -> Dict[str, AssumptionReport]:
    """Both implications out of EOM, with every predicate they mention.

    EOM + EJPD ⟹ AOE, and EOM + NRC ⟹ ATOE + APE. When no joint is given the
    operational construction q is the candidate global joint; NRC is judged on
    that candidate.
    """
    joint = joint if joint is not None else opem_q(bundle)
    behavior = bundle_behavior(bundle)
    ledger = {
        "EJPD": check_ejpd(bundle, joint, tol),
        "AOE": check_aoe(joint, behavior, tol),
        "NRC": check_nrc(joint, tol),
        "ATOE": check_atoe(bundle, behavior, tol),
        "APE": check_ape(bundle, tol),
    }
    ledger[EJPD_IMPLICATION] = _implication(EJPD_IMPLICATION, [ledger["EJPD"]], [ledger["AOE"]])
    ledger[NRC_IMPLICATION] = _implication(NRC_IMPLICATION, [ledger["NRC"]], [ledger["ATOE"], ledger["APE"]])
    return ledger
