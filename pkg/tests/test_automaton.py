import itertools

import pytest

from tmv import history as H
from tmv.automaton import (
    Determinizer, ExplicitAutomaton, Internal, ResourceExhausted,
    SimulationRelation, accepts, check_forward_simulation, equivalent_lts,
    identity_relation, iter_traces, max_states_default, reachable, refines,
    traces,
)
from tmv.history import Bounds, History
from tmv.models import build_model
from tmv.opacity import is_opaque
from tmv.stm import norec, norec_cga, ronorec_cga, tml, tml_cga
from tmv.stm.relations import RELATIONS, r_tml, sc_tml
from tmv.tms import TMS, TMS3

from helpers import load

B1 = Bounds(1, 1, 2)
B21 = Bounds(2, 1, 2)


def test_no_actions_means_only_start_states():
    A = ExplicitAutomaton(["s", "t"], [])
    assert reachable(A) == {"s", "t"}
    assert traces(A, 5) == {()}


def test_tml_cga_reaches_locked_state():
    states = reachable(tml_cga(Bounds(1, 1, 2)))
    assert any(s.glb % 2 == 1 for s in states)


def test_explicit_reachability_ignores_unreachable():
    A = ExplicitAutomaton([0], [(0, "a", 1), (1, "b", 0), (2, "c", 0)])
    assert reachable(A) == {0, 1}


def test_traces_depth_zero():
    assert traces(tml_cga(B1), 0) == {()}


def test_begin_pair_within_two_events():
    assert (H.begin_inv(0), H.begin_resp(0)) in traces(tml_cga(B1), 2)


def test_traces_skip_internal_steps():
    A = ExplicitAutomaton([0], [(0, Internal("tau"), 1), (1, H.begin_inv(0), 2)])
    assert traces(A, 1) == {(), (H.begin_inv(0),)}


def test_iter_traces_yields_each_trace_once_prefix_first():
    seen = list(iter_traces(tml_cga(Bounds(2, 1, 2)), 5))
    assert len(seen) == len(set(seen))
    pos = {t: i for i, t in enumerate(seen)}
    assert all(pos[t[:-1]] < pos[t] for t in seen if t)


def test_tml_traces_are_tml_cga_traces():
    spec = Determinizer(tml_cga(B21))
    assert all(spec.accepts(t) for t in traces(tml(B21), 8))


class TestRefinement:
    def test_reflexive(self):
        for A in (tml_cga(B21), norec_cga(B21), TMS(B21)):
            assert refines(A, A)

    def test_norec_cga_does_not_admit_h1_shape(self):
        b = Bounds(2, 1, 1)
        res = refines(norec_cga(b), tml_cga(b))
        assert not res
        ce = res.counterexample
        assert len(ce) == len(load("h1"))
        assert ce[-1].pol == H.ABORT
        assert accepts(tml_cga(b), ce) and not accepts(norec_cga(b), ce)
        assert is_opaque(History(ce, b))

    def test_tml_cga_rejects_h2_shape(self):
        b = Bounds(2, 1, 1)
        res = refines(tml_cga(b), norec_cga(b))
        assert res.counterexample == load("h2").events

    def test_tml_cga_within_tml(self):
        assert refines(tml(Bounds(2, 2, 2)), tml_cga(Bounds(2, 2, 2)))

    def test_counterexample_is_shortest(self):
        b = Bounds(2, 1, 1)
        res = refines(norec_cga(b), tml_cga(b))
        spec = Determinizer(norec_cga(b))
        shorter = [t for t in traces(tml_cga(b), len(res.counterexample) - 1) if not spec.accepts(t)]
        assert shorter == []

    def test_transitive_on_catalogue(self):
        names = ["tml", "tml-cga", "norec", "norec-cga", "ronorec-cga", "tms2", "tms3"]
        b = Bounds(2, 1, 1)
        models = {n: build_model(n, b) for n in names}
        rel = {(a, c): refines(models[a], models[c]).ok for a in names for c in names}
        for a, c, d in itertools.product(names, repeat=3):
            # d within c and c within a gives d within a
            if rel[(a, c)] and rel[(c, d)]:
                assert rel[(a, d)], (a, c, d)

    def test_depth_cap(self):
        with pytest.raises(ResourceExhausted) as info:
            refines(tml_cga(B21), tml(B21), max_depth=3)
        assert info.value.what == "depth"

    def test_state_cap(self):
        with pytest.raises(ResourceExhausted):
            refines(tml_cga(B21), tml(B21), max_states=50)
        with pytest.raises(ResourceExhausted):
            reachable(norec(B21), max_states=50)

    def test_state_cap_from_environment(self, monkeypatch):
        monkeypatch.setenv("TMV_MAX_STATES", "40")
        assert max_states_default() == 40
        with pytest.raises(ResourceExhausted):
            reachable(norec(B21))
        monkeypatch.delenv("TMV_MAX_STATES")
        assert max_states_default() == 50_000_000


class TestEquivalence:
    def test_self(self):
        assert equivalent_lts(tml_cga(B21), tml_cga(B21))

    def test_tml_cga_vs_norec_cga(self):
        b = Bounds(2, 1, 1)
        res = equivalent_lts(tml_cga(b), norec_cga(b))
        assert not res
        assert res.direction == "a-not-in-b"
        assert accepts(tml_cga(b), res.counterexample)
        assert not accepts(norec_cga(b), res.counterexample)

    def test_direction_b_not_in_a(self):
        b = Bounds(2, 1, 1)
        res = equivalent_lts(tml_cga(b), TMS(b))
        assert not res
        assert res.direction == "b-not-in-a"
        assert res.forward.ok
        assert accepts(TMS(b), res.counterexample)
        assert not accepts(tml_cga(b), res.counterexample)

    def test_parallel_matches_sequential(self):
        b = Bounds(2, 1, 1)
        seq = equivalent_lts(tml_cga(b), norec_cga(b))
        par = equivalent_lts(tml_cga(b), norec_cga(b), jobs=2)
        assert (seq.ok, seq.counterexample, seq.direction) == (par.ok, par.counterexample, par.direction)


class TestForwardSimulation:
    def test_identity(self):
        A = tml_cga(B21)
        assert check_forward_simulation(A, A, identity_relation())

    @pytest.mark.parametrize("name", list(RELATIONS))
    def test_relations_small_bounds(self, name):
        impl, spec, rel = RELATIONS[name]
        res = check_forward_simulation(build_model(impl, B21), build_model(spec, B21), rel)
        assert res, res.violation

    @pytest.mark.parametrize("name", list(RELATIONS))
    def test_simulation_implies_refinement(self, name):
        impl, spec, rel = RELATIONS[name]
        A, S = build_model(impl, B21), build_model(spec, B21)
        assert check_forward_simulation(A, S, rel)
        assert refines(S, A)

    def test_wrong_step_correspondence_is_caught(self):
        def sc_always_first_snapshot(cs, action):
            got = sc_tml(cs, action)
            if got is not None and got.name == "DoRead":
                return Internal("DoRead", got.txn, (got.args[0], 0))
            return got

        rel = SimulationRelation(r_tml, sc_always_first_snapshot, "bad")
        res = check_forward_simulation(tml_cga(B21), TMS(B21), rel)
        assert not res
        assert "not matched" in res.violation["reason"]
        assert res.violation["action"].name == "ATXRead"

    def test_all_stutter_cannot_answer_reads(self):
        rel = SimulationRelation(lambda c, a: True, lambda c, act: None, "everything")
        res = check_forward_simulation(norec_cga(B21), TMS(B21, TMS3), rel)
        assert not res
        assert res.violation["reason"] == "external step not matched"
        assert res.violation["action"].kind == H.READ

    def test_relation_too_strong_for_start(self):
        rel = SimulationRelation(lambda c, a: False, lambda c, act: None, "nothing")
        res = check_forward_simulation(tml_cga(B1), TMS(B1), rel)
        assert not res and res.violation["reason"] == "no related start state"

    def test_stutter_that_breaks_relation(self):
        rel = SimulationRelation(r_tml, lambda c, act: None, "always stutter")
        res = check_forward_simulation(tml_cga(B1), TMS(B1), rel)
        assert not res
        assert res.violation["reason"] == "stuttering step breaks relation"
        path = res.violation["path"]
        assert all(isinstance(a, (H.Event, Internal)) for a in path)


def test_counterexamples_replay():
    b = Bounds(2, 1, 2)
    for spec, impl in ((tml_cga, norec_cga), (norec_cga, tml_cga), (norec_cga, ronorec_cga), (ronorec_cga, norec_cga)):
        res = refines(spec(b), impl(b))
        assert not res
        assert accepts(impl(b), res.counterexample)
        assert not Determinizer(spec(b)).accepts(res.counterexample)

