import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from causal_friendliness.core.campaigns import cf_polytope_campaign, sample_cf_factors, sample_rng
from causal_friendliness.core.causal import build_cf_model, check_ape
from causal_friendliness.core.errors import NumericalInvariantError
from causal_friendliness.core.models import BehaviorTable, Membership, ScenarioConfig, Verdict
from causal_friendliness.core.polytope import (
    CLASSICAL_BOUND,
    BOXWORLD_BOUND,
    _s_at,
    _vertex_matrix,
    boxworld_construction,
    chsh,
    enumerate_strategies,
    enumerate_vertices,
    grid_search,
    membership,
    pr_box,
    refine,
    signalling_check,
    tsirelson_search,
    white_noise_visibility,
)
from causal_friendliness.core.tensor import DensityMatrix
from causal_friendliness.core.wigner import run_forward

from conftest import R, TSIRELSON, seeds

MIXED = DensityMatrix.maximally_mixed()


@pytest.fixture(scope="module")
def quantum_behavior() -> BehaviorTable:
    return run_forward(ScenarioConfig.complementary())


class TestVertices:
    def test_sixteen_distinct_vertices(self):
        vectors = {tuple(v.vector()) for v in enumerate_vertices()}
        assert len(vectors) == 16
        assert len(enumerate_strategies()) == 16

    def test_classical_bound_is_attained_exactly(self):
        assert max(chsh(v) for v in enumerate_vertices()) == CLASSICAL_BOUND
        assert min(chsh(v) for v in enumerate_vertices()) == -CLASSICAL_BOUND

    def test_pr_box_reaches_algebraic_bound(self):
        assert chsh(pr_box()) == BOXWORLD_BOUND


class TestMembership:
    def test_uniform_is_inside(self):
        cert = membership(BehaviorTable.uniform())
        assert cert.verdict is Membership.INSIDE
        assert cert.weights.sum() == pytest.approx(1.0)
        assert np.allclose(_vertex_matrix() @ cert.weights, BehaviorTable.uniform().vector(), atol=1e-9)

    def test_vertex_is_inside(self):
        vertex = enumerate_vertices()[5]
        cert = membership(vertex)
        assert cert.verdict is Membership.INSIDE
        assert np.allclose(_vertex_matrix() @ cert.weights, vertex.vector(), atol=1e-9)

    def test_quantum_behavior_is_outside_by_chsh(self, quantum_behavior):
        cert = membership(quantum_behavior)
        assert cert.verdict is Membership.OUTSIDE
        assert cert.facet.kind == "chsh"
        assert cert.facet.bound == CLASSICAL_BOUND
        assert cert.facet.value == pytest.approx(TSIRELSON, abs=1e-6)
        assert np.all(cert.facet.coefficients @ _vertex_matrix() <= CLASSICAL_BOUND)

    def test_pr_box_is_outside(self):
        cert = membership(pr_box())
        assert cert.verdict is Membership.OUTSIDE
        assert cert.facet.value == pytest.approx(4.0)

    def test_signalling_behavior_needs_a_farkas_facet(self):
        # a always +1, b = +1 for x = 0 and -1 for x = 1: b reads Alice's setting
        p = np.zeros((2, 2, 2, 2))
        p[0, 0, 0, :] = 1.0
        p[0, 1, 1, :] = 1.0
        cert = membership(BehaviorTable(p=p))
        assert cert.verdict is Membership.OUTSIDE
        facet = cert.facet
        assert facet.kind == "farkas"
        assert np.abs(facet.coefficients).max() == pytest.approx(1.0)
        assert np.all(facet.coefficients @ _vertex_matrix() <= facet.bound)
        assert facet.value > facet.bound

    def test_sampled_classical_models_are_inside(self):
        result = cf_polytope_campaign(100, seed=0)
        assert result.failures == 0
        assert result.passes == 100

    def test_thousand_classical_models_respect_the_bound(self):
        for i in range(1000):
            _, behavior = build_cf_model(*sample_cf_factors(sample_rng(21, i)))
            assert abs(chsh(behavior)) <= 2 + 1e-9

    def test_certificate_is_serializable(self, quantum_behavior):
        cert = membership(quantum_behavior)
        payload = cert.model_dump(mode="json")
        assert payload["verdict"] == "outside"
        assert len(payload["facet"]["coefficients"]) == 16

    def test_non_finite_behavior_is_rejected_early(self):
        with pytest.raises(ValueError):
            BehaviorTable(p=np.full((2, 2, 2, 2), np.nan))


class TestVisibility:
    def test_quantum_optimum(self, quantum_behavior):
        assert white_noise_visibility(quantum_behavior) == pytest.approx(R, abs=1e-9)

    def test_pr_box(self):
        assert white_noise_visibility(pr_box()) == pytest.approx(0.5, abs=1e-9)

    def test_vertex(self):
        assert white_noise_visibility(enumerate_vertices()[0]) == pytest.approx(1.0, abs=1e-9)

    def test_uniform_is_unbounded(self):
        assert white_noise_visibility(BehaviorTable.uniform()) == math.inf


class TestBoxworld:
    def test_reaches_four(self):
        _, behavior = boxworld_construction()
        assert chsh(behavior) == 4.0

    def test_outside_and_pseudo_events_not_absolute(self):
        model, behavior = boxworld_construction()
        assert membership(behavior).verdict is Membership.OUTSIDE
        assert check_ape(model.to_bundle()).verdict is Verdict.FAIL

    def test_bob_reads_alices_setting(self):
        _, behavior = boxworld_construction()
        report = signalling_check(behavior)
        assert not report.past_to_future_ok
        assert report.future_to_past_ok

    def test_quantum_behavior_does_not_signal(self, quantum_behavior):
        assert signalling_check(quantum_behavior).holds


class TestTsirelsonSearch:
    def test_grid_containing_quarter_turns_is_exact(self):
        thetas = np.arange(8) * (2 * math.pi / 8)
        result = grid_search(MIXED, thetas, thetas, thetas, thetas)
        assert result.best_s == pytest.approx(TSIRELSON, abs=1e-9)

    def test_full_sweep(self):
        result = tsirelson_search(MIXED, grid=64, refine_iters=200)
        assert TSIRELSON - 1e-4 <= result.best_s <= TSIRELSON + 1e-6
        charlie, alice, _, _ = result.settings
        assert abs(charlie.dot(alice)) < 1e-3

    def test_refinement_closes_a_coarse_grid(self):
        result = tsirelson_search(MIXED, grid=12, refine_iters=60)
        assert result.best_s >= TSIRELSON - 1e-4
        steps = result.history[1:]
        assert all(b >= a for a, b in zip(steps, steps[1:]))

    def test_sphere_refinement_does_not_lose_ground(self):
        result = tsirelson_search(MIXED, grid=8, refine_iters=10, parameterization="sphere")
        assert result.best_s == pytest.approx(TSIRELSON, abs=1e-9)
        assert len(result.angles) == 8

    def test_shared_axis_restriction(self):
        # first side both on the z axis: S collapses to the classical bound
        thetas = np.arange(16) * (2 * math.pi / 16)
        result = grid_search(MIXED, [0.0], [0.0], thetas, thetas)
        assert result.best_s == pytest.approx(2.0, abs=1e-9)

    def test_refine_alone(self):
        start = [0.0, math.pi / 2, 0.5, -0.5]
        result = refine(MIXED, start, iterations=80, step=0.2)
        assert result.best_s >= result.history[0]
        assert result.best_s == pytest.approx(TSIRELSON, abs=1e-5)

    def test_result_rebuilds_a_config(self):
        result = tsirelson_search(MIXED, grid=8, refine_iters=0)
        config = result.as_config(MIXED)
        assert chsh(run_forward(config)) == pytest.approx(result.best_s, abs=1e-12)

    @pytest.mark.parametrize("grid, parameterization", [(4, "plane"), (16, "torus")])
    def test_bad_arguments(self, grid, parameterization):
        with pytest.raises(ValueError):
            tsirelson_search(MIXED, grid=grid, refine_iters=0, parameterization=parameterization)


def test_invariant_error_is_arithmetic():
    assert issubclass(NumericalInvariantError, ArithmeticError)


def _random_behavior(seed: int) -> BehaviorTable:
    draws = np.random.default_rng(seed).dirichlet(np.ones(4), size=(2, 2))
    return BehaviorTable(p=np.moveaxis(draws, -1, 0).reshape(2, 2, 2, 2))


def _signalling_behavior() -> BehaviorTable:
    # a always +1, b = +1 for x = 0 and -1 for x = 1
    p = np.zeros((2, 2, 2, 2))
    p[0, 0, 0, :] = 1.0
    p[0, 1, 1, :] = 1.0
    return BehaviorTable(p=p)


def _mix(lam: float, p: BehaviorTable, q: BehaviorTable) -> BehaviorTable:
    return BehaviorTable(p=lam * p.p + (1 - lam) * q.p)


@given(first=seeds, second=seeds, lam=st.floats(min_value=0.0, max_value=1.0))
@settings(max_examples=100, deadline=None)
def test_chsh_is_linear_under_mixing(first, second, lam):
    p, q = _random_behavior(first), _random_behavior(second)
    assert chsh(_mix(lam, p, q)) == pytest.approx(lam * chsh(p) + (1 - lam) * chsh(q), abs=1e-12)


class TestPushedPastAFacet:
    @pytest.mark.parametrize("excess", [1e-6, 1e-4, 1e-2, 1.0])
    def test_noisy_pr_box_beyond_chsh(self, excess):
        behavior = _mix((CLASSICAL_BOUND + excess) / BOXWORLD_BOUND, pr_box(), BehaviorTable.uniform())
        assert chsh(behavior) == pytest.approx(CLASSICAL_BOUND + excess, abs=1e-12)
        cert = membership(behavior)
        assert cert.verdict is Membership.OUTSIDE
        assert cert.facet.kind == "chsh"
        assert cert.facet.value - cert.facet.bound == pytest.approx(excess, rel=1e-6)

    @pytest.mark.parametrize("lam", [1e-6, 1e-4, 1e-2, 1.0])
    def test_signalling_push(self, lam):
        behavior = _mix(lam, _signalling_behavior(), BehaviorTable.uniform())
        assert not signalling_check(behavior, tol=lam / 2).past_to_future_ok
        cert = membership(behavior)
        assert cert.verdict is Membership.OUTSIDE
        assert cert.facet.kind == "farkas"
        assert np.all(cert.facet.coefficients @ _vertex_matrix() <= cert.facet.bound)
        assert cert.facet.value > cert.facet.bound

    def test_classical_bound_itself_is_inside(self):
        behavior = _mix(CLASSICAL_BOUND / BOXWORLD_BOUND, pr_box(), BehaviorTable.uniform())
        assert membership(behavior).verdict is Membership.INSIDE


class TestOptimalSettings:
    # charlie σ_z, alice σ_x, debbie (σ_z+σ_x)/√2, bob (σ_z-σ_x)/√2
    EXACT = (0.0, math.pi / 2, math.pi / 4, -math.pi / 4)

    def test_exact_settings_reach_tsirelson(self):
        assert _s_at(MIXED, self.EXACT, "plane") == pytest.approx(TSIRELSON, abs=1e-12)

    @pytest.mark.parametrize("axis", range(4))
    def test_gradient_vanishes(self, axis):
        h = 1e-5
        up, down = list(self.EXACT), list(self.EXACT)
        up[axis] += h
        down[axis] -= h
        gradient = (_s_at(MIXED, up, "plane") - _s_at(MIXED, down, "plane")) / (2 * h)
        assert abs(gradient) < 1e-6

    def test_refinement_stays_put(self):
        result = refine(MIXED, self.EXACT, iterations=30, step=1e-3)
        assert result.angles == self.EXACT
        assert result.best_s == pytest.approx(TSIRELSON, abs=1e-12)


@pytest.mark.parametrize("grid", [8, 10, 12, 16, 24, 32])
def test_search_never_exceeds_tsirelson(grid):
    result = tsirelson_search(MIXED, grid=grid, refine_iters=20)
    assert result.best_s <= TSIRELSON + 1e-6
    assert result.best_s >= result.history[0] - 1e-12


@given(angles=st.lists(st.floats(min_value=-math.pi, max_value=math.pi), min_size=4, max_size=4))
@settings(max_examples=50, deadline=None)
def test_any_planar_settings_stay_under_tsirelson(angles):
    assert _s_at(MIXED, angles, "plane") <= TSIRELSON + 1e-9
