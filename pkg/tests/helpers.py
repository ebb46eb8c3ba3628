"""Independent oracles and generators shared by the test modules.

The oracles here deliberately share no code with ``tmv.opacity``: they work
on raw event tuples and enumerate candidates naively.
"""
from __future__ import annotations

import itertools
import random
from pathlib import Path

from tmv import history as H
from tmv.history import Bounds, History, parse_history

FIXTURES = Path(__file__).parent / "fixtures"


def load(name: str) -> History:
    return parse_history((FIXTURES / f"{name}.hist").read_text())


# --- memory interpreter oracle ---------------------------------------------

def valid_by_state_search(events, addrs: int, values: int) -> bool:
    """Validity by searching over every sequence of memory states.

    A matched alternating history of n pairs is valid when some sequence
    s_0..s_n of total maps exists with s_0 all zeros, a successful write
    pair producing s_{i+1} = s_i[a := v], any other pair leaving the state
    alone, and every successful read pair seeing its value in s_i.
    """
    pairs = [events[i:i + 2] for i in range(0, len(events), 2)]
    states = list(itertools.product(range(values), repeat=addrs))
    zero = (0,) * addrs

    def ok(i, s):
        if i == len(pairs):
            return True
        inv, resp = pairs[i]
        for s2 in states:
            if inv.kind == "W" and resp.pol == "resp":
                want = tuple(inv.value if a == inv.addr else s[a] for a in range(addrs))
                if s2 != want:
                    continue
            elif s2 != s:
                continue
            if inv.kind == "R" and resp.pol == "resp" and s[inv.addr] != resp.value:
                continue
            if ok(i + 1, s2):
                return True
        return False

    return ok(0, zero)


# --- naive opacity oracle --------------------------------------------------

def _responses(inv, values):
    t = inv.txn
    if inv.kind == "B":
        return [H.Event("B", "resp", t)]
    if inv.kind == "R":
        return [H.Event("R", "resp", t, None, v) for v in range(values)] + [H.Event(None, "abort", t)]
    if inv.kind == "W":
        return [H.Event("W", "resp", t), H.Event(None, "abort", t)]
    return [H.Event("C", "resp", t), H.Event(None, "abort", t)]


def _naive_extensions(events, values):
    pending = {}
    for i, e in enumerate(events):
        if e.pol == "inv":
            pending[e.txn] = i
        else:
            pending.pop(e.txn, None)
    idx = sorted(pending.values())
    options = [[None] + _responses(events[i], values) for i in idx]
    for combo in itertools.product(*options):
        added = [r for r in combo if r is not None]
        dropped = {i for i, r in zip(idx, combo) if r is None}
        yield [e for i, e in enumerate(events) if i not in dropped] + added


def _serial_ok(blocks, order, addrs):
    mem = [0] * addrs
    for t in order:
        view = list(mem)
        evs = blocks[t]
        for inv, resp in zip(evs[0::2], evs[1::2]):
            if inv.kind == "W" and resp.pol == "resp":
                view[inv.addr] = inv.value
            if inv.kind == "R" and resp.pol == "resp" and view[inv.addr] != resp.value:
                return False
        if evs[-1].kind == "C" and evs[-1].pol == "resp":
            mem = view
    return True


def naive_end_to_end(events, addrs, values) -> bool:
    """Try every extension and every permutation of its transactions."""
    for c in _naive_extensions(list(events), values):
        blocks = {}
        for e in c:
            blocks.setdefault(e.txn, []).append(e)
        first = {t: min(i for i, e in enumerate(c) if e.txn == t) for t in blocks}
        last = {t: max(i for i, e in enumerate(c) if e.txn == t) for t in blocks}
        done = [t for t, b in blocks.items() if b[-1].pol == "abort" or (b[-1].kind == "C" and b[-1].pol == "resp")]
        for order in itertools.permutations(sorted(blocks)):
            pos = {t: k for k, t in enumerate(order)}
            if any(last[p] < first[q] and pos[p] > pos[q] for p in done for q in blocks):
                continue
            if _serial_ok(blocks, order, addrs):
                return True
    return False


def naive_opaque(h: History) -> bool:
    b = h.bounds
    return all(naive_end_to_end(h.events[:k], b.addrs, b.values) for k in range(len(h) + 1))


# --- random histories ------------------------------------------------------

def random_history(rng: random.Random, bounds: Bounds, length: int) -> History:
    """A random well-formed history: each step picks a transaction and one
    of its enabled invocations or responses.  Read values are uniform."""
    state = {t: "new" for t in range(bounds.txns)}
    pend = {}
    evs = []
    for _ in range(length):
        live = [t for t, s in state.items() if s not in ("done",)]
        if not live:
            break
        t = rng.choice(live)
        s = state[t]
        if s == "new":
            evs.append(H.begin_inv(t))
            state[t], pend[t] = "pending", "B"
        elif s == "ready":
            r = rng.random()
            if r < 0.4:
                evs.append(H.read_inv(t, rng.randrange(bounds.addrs)))
                pend[t] = "R"
            elif r < 0.8:
                evs.append(H.write_inv(t, rng.randrange(bounds.addrs), rng.randrange(bounds.values)))
                pend[t] = "W"
            else:
                evs.append(H.commit_inv(t))
                pend[t] = "C"
            state[t] = "pending"
        else:
            k = pend.pop(t)
            if k == "B":
                evs.append(H.begin_resp(t))
                state[t] = "ready"
            elif rng.random() < 0.15:
                evs.append(H.abort_resp(t))
                state[t] = "done"
            elif k == "R":
                evs.append(H.read_resp(t, rng.randrange(bounds.values)))
                state[t] = "ready"
            elif k == "W":
                evs.append(H.write_resp(t))
                state[t] = "ready"
            else:
                evs.append(H.commit_resp(t))
                state[t] = "done"
    return History(tuple(evs), bounds)


def random_walk_trace(rng: random.Random, automaton, steps: int) -> tuple:
    """External trace of a random execution of ``automaton``."""
    from tmv.automaton import is_external

    s = rng.choice(list(automaton.start_states()))
    out = []
    for _ in range(steps):
        en = automaton.enabled(s)
        if not en:
            break
        a, s = rng.choice(en)
        if is_external(a):
            out.append(a)
    return tuple(out)


def random_linearization(rng: random.Random, he: History) -> History:
    """A random alternating history respecting the operation order of
    ``complete(he)``: a random topological sort of its operations."""
    c = H.complete(he)
    ops = {o: ir for o, ir in H.operations(c).items() if ir[1] is not None}
    preds = {o: set() for o in ops}
    for a, b in H.op_order(c):
        preds[b].add(a)
    placed, out = set(), []
    while len(placed) < len(ops):
        ready = [o for o in ops if o not in placed and preds[o] <= placed]
        o = rng.choice(sorted(ready))
        placed.add(o)
        i, r = ops[o]
        out.extend((c.events[i], c.events[r]))
    return c.with_events(out)
