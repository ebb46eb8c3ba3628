"""Finite labelled transition systems and checks over them.

An automaton exposes ``start_states()`` and ``enabled(state)``, the latter
yielding ``(action, next_state)`` pairs.  Actions that are
:class:`~tmv.history.Event` instances are external; everything else is
internal and erased from traces.
"""
from __future__ import annotations

import os
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Optional

from .history import Event

DEFAULT_MAX_STATES = 50_000_000


class ResourceExhausted(RuntimeError):
    """A configured state or depth cap was hit; this is not a verdict."""

    def __init__(self, what, limit):
        super().__init__(f"{what} cap of {limit} exceeded")
        self.what = what
        self.limit = limit


class Internal(NamedTuple):
    name: str
    txn: int = -1
    args: tuple = ()

    def __str__(self):
        inner = ",".join(str(a) for a in (self.txn,) + tuple(self.args))
        return f"{self.name}({inner})"


def is_external(action) -> bool:
    return isinstance(action, Event)


def max_states_default():
    env = os.environ.get("TMV_MAX_STATES")
    return int(env) if env else DEFAULT_MAX_STATES


class Automaton:
    """Base class; subclasses implement ``start_states`` and ``enabled``."""

    name = "automaton"

    def start_states(self):
        raise NotImplementedError

    def enabled(self, state):
        raise NotImplementedError

    def __repr__(self):
        return f"<{type(self).__name__} {self.name}>"


class ExplicitAutomaton(Automaton):
    """Automaton given by a transition table; handy for tests."""

    def __init__(self, starts, transitions, name="explicit"):
        self._starts = list(starts)
        self._trans = {}
        for s, a, s2 in transitions:
            self._trans.setdefault(s, []).append((a, s2))
        self.name = name

    def start_states(self):
        return list(self._starts)

    def enabled(self, state):
        return list(self._trans.get(state, ()))


# --- reachability and traces -----------------------------------------------

def reachable(A, max_states=None) -> set:
    cap = max_states or max_states_default()
    seen = set(A.start_states())
    work = deque(seen)
    while work:
        s = work.popleft()
        for _, s2 in A.enabled(s):
            if s2 not in seen:
                seen.add(s2)
                if len(seen) > cap:
                    raise ResourceExhausted("state", cap)
                work.append(s2)
    return seen


def traces(A, depth: int, max_states=None) -> set:
    """External traces with at most ``depth`` events.

    Internal steps are free, so spin loops and multi-step bodies do not
    eat into the bound.
    """
    return set(iter_traces(A, depth, max_states))


class Determinizer:
    """Subset construction after erasing internal actions, built lazily.

    Macro-states are frozensets of states closed under internal steps.
    """

    def __init__(self, A, max_states=None):
        self.A = A
        self.cap = max_states or max_states_default()
        self._succ = {}
        self._start = None

    def closure(self, states) -> frozenset:
        seen = set(states)
        work = list(seen)
        A = self.A
        while work:
            s = work.pop()
            for a, s2 in A.enabled(s):
                if not isinstance(a, Event) and s2 not in seen:
                    seen.add(s2)
                    work.append(s2)
            if len(seen) > self.cap:
                raise ResourceExhausted("state", self.cap)
        return frozenset(seen)

    def start(self) -> frozenset:
        if self._start is None:
            self._start = self.closure(self.A.start_states())
        return self._start

    def successors(self, macro) -> dict:
        """Map each external action to the closed successor macro-state."""
        got = self._succ.get(macro)
        if got is None:
            raw = {}
            for s in macro:
                for a, s2 in self.A.enabled(s):
                    if isinstance(a, Event):
                        raw.setdefault(a, set()).add(s2)
            got = {a: self.closure(ss) for a, ss in raw.items()}
            self._succ[macro] = got
        return got

    def step(self, macro, action) -> frozenset:
        return self.successors(macro).get(action, frozenset())

    def accepts(self, trace) -> bool:
        m = self.start()
        for a in trace:
            m = self.step(m, a)
            if not m:
                return False
        return True


def iter_traces(A, max_len: int, max_states=None):
    """Yield every distinct external trace of length <= ``max_len`` once,
    in depth-first order (each prefix before its extensions)."""
    det = Determinizer(A, max_states)
    stack = [((), det.start())]
    while stack:
        tr, m = stack.pop()
        yield tr
        if len(tr) < max_len:
            succ = det.successors(m)
            for a in sorted(succ, key=_event_key, reverse=True):
                stack.append((tr + (a,), succ[a]))


def _event_key(e):
    return (e.txn, e.kind or "", e.pol, -1 if e.addr is None else e.addr,
            -1 if e.value is None else e.value)


def accepts(A, trace) -> bool:
    return Determinizer(A).accepts(trace)


def replay(A, trace) -> bool:
    """Whether ``trace`` is a trace of ``A`` (alias kept for readability)."""
    return accepts(A, trace)


# --- refinement ------------------------------------------------------------

@dataclass
class RefinementResult:
    ok: bool
    counterexample: Optional[tuple] = None
    pairs: int = 0

    def __bool__(self):
        return self.ok


@dataclass
class EquivalenceResult:
    ok: bool
    counterexample: Optional[tuple] = None
    # "a-not-in-b": a trace of the first automaton the second cannot produce
    direction: Optional[str] = None
    forward: Optional[RefinementResult] = None
    backward: Optional[RefinementResult] = None

    def __bool__(self):
        return self.ok


def refines(spec, impl, max_states=None, max_depth=None) -> RefinementResult:
    """Check that every trace of ``impl`` is a trace of ``spec``.

    Breadth-first over pairs (impl state, closed spec macro-state), so the
    first failure found yields a shortest counterexample.  A pair is pruned
    when a pair with the same impl state and a subset macro-state has
    already been queued (antichain subsumption).
    """
    cap = max_states or max_states_default()
    det = Determinizer(spec, cap)
    start_macro = det.start()
    seen = set()
    antichain = {}
    parents = []
    work = deque()

    def push(s, m, parent, action, depth):
        key = (s, m)
        if key in seen:
            return
        chain = antichain.get(s)
        if chain is not None:
            for m2 in chain:
                if m2 <= m:
                    return
            chain.append(m)
        else:
            antichain[s] = [m]
        seen.add(key)
        if len(seen) > cap:
            raise ResourceExhausted("state", cap)
        parents.append((parent, action))
        work.append((s, m, len(parents) - 1, depth))

    for s in impl.start_states():
        push(s, start_macro, -1, None, 0)

    while work:
        s, m, idx, depth = work.popleft()
        if max_depth is not None and depth >= max_depth:
            raise ResourceExhausted("depth", max_depth)
        for a, s2 in impl.enabled(s):
            if isinstance(a, Event):
                m2 = det.step(m, a)
                if not m2:
                    return RefinementResult(False, _trace_to(parents, idx) + (a,), len(seen))
                push(s2, m2, idx, a, depth + 1)
            else:
                push(s2, m, idx, None, depth + 1)
    return RefinementResult(True, None, len(seen))


def _trace_to(parents, idx):
    out = []
    while idx >= 0:
        parent, a = parents[idx]
        if a is not None:
            out.append(a)
        idx = parent
    return tuple(reversed(out))


def equivalent_lts(A, B, max_states=None, max_depth=None, jobs=1) -> EquivalenceResult:
    if jobs > 1:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(2) as pool:
            f1 = pool.submit(refines, B, A, max_states, max_depth)
            f2 = pool.submit(refines, A, B, max_states, max_depth)
            fwd, bwd = f1.result(), f2.result()
    else:
        fwd = refines(B, A, max_states, max_depth)
        bwd = refines(A, B, max_states, max_depth) if fwd.ok else None
    if not fwd.ok:
        return EquivalenceResult(False, fwd.counterexample, "a-not-in-b", fwd, bwd)
    if not bwd.ok:
        return EquivalenceResult(False, bwd.counterexample, "b-not-in-a", fwd, bwd)
    return EquivalenceResult(True, None, None, fwd, bwd)


# --- forward simulation ----------------------------------------------------

@dataclass
class SimulationRelation:
    """A candidate forward simulation.

    ``related(cs, as_)`` is the state relation.  ``correspond(cs, action)``
    maps a concrete internal action taken from ``cs`` to the abstract
    internal action that must match it, or None for a stuttering step.
    """

    related: Callable
    correspond: Callable
    name: str = "relation"


def identity_relation():
    return SimulationRelation(lambda c, a: c == a, lambda c, act: act, "identity")


@dataclass
class SimResult:
    ok: bool
    pairs: int = 0
    violation: Optional[dict] = field(default=None)

    def __bool__(self):
        return self.ok


def check_forward_simulation(impl, spec, rel, max_states=None) -> SimResult:
    """Explore related reachable pairs and check every concrete step is
    matched: external steps by a same-labelled abstract step, internal ones
    by the designated abstract internal step or by stuttering."""
    cap = max_states or max_states_default()
    spec_starts = list(spec.start_states())
    seen = set()
    parents = []
    work = deque()

    def push(pair, parent, action):
        if pair in seen:
            return
        seen.add(pair)
        if len(seen) > cap:
            raise ResourceExhausted("state", cap)
        parents.append((parent, action))
        work.append((pair, len(parents) - 1))

    def fail(cs, as_, action, reason, idx):
        path = []
        while idx >= 0:
            parent, a = parents[idx]
            if a is not None:
                path.append(a)
            idx = parent
        return SimResult(False, len(seen), {
            "concrete": cs, "abstract": as_, "action": action,
            "reason": reason, "path": tuple(reversed(path)),
        })

    for cs in impl.start_states():
        matched = [as_ for as_ in spec_starts if rel.related(cs, as_)]
        if not matched:
            return fail(cs, None, None, "no related start state", -1)
        for as_ in matched:
            push((cs, as_), -1, None)

    while work:
        (cs, as_), idx = work.popleft()
        for a, cs2 in impl.enabled(cs):
            if isinstance(a, Event):
                cands = [s2 for b, s2 in spec.enabled(as_) if b == a and rel.related(cs2, s2)]
                if not cands:
                    return fail(cs, as_, a, "external step not matched", idx)
            else:
                target = rel.correspond(cs, a)
                if target is None:
                    if not rel.related(cs2, as_):
                        return fail(cs, as_, a, "stuttering step breaks relation", idx)
                    cands = [as_]
                else:
                    cands = [s2 for b, s2 in spec.enabled(as_) if b == target and rel.related(cs2, s2)]
                    if not cands:
                        return fail(cs, as_, a, f"corresponding step {target} not matched", idx)
            for s2 in cands:
                push((cs2, s2), idx, a)
    return SimResult(True, len(seen))
