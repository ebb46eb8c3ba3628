"""Linearizability of a concurrent history against alternating histories."""
from __future__ import annotations

from typing import Optional

from .history import (
    OpOccurrence, as_history, complete, equivalent, extensions,
    is_alternating, op_order, operations,
)


def lin(h, ha) -> bool:
    """``complete(h)`` is equivalent to ``ha`` and ``ha`` preserves the
    real-time order of operations of ``complete(h)``."""
    c = complete(as_history(h))
    ha = as_history(ha)
    if not is_alternating(ha):
        return False
    return equivalent(c, ha) and op_order(c) <= op_order(ha)


def linearized_by(h, spec, depth: int) -> Optional[object]:
    """Find an alternating external trace of ``spec`` (at most ``depth``
    events long) that linearizes some extension of ``h``.

    The search is guided: it only feeds ``spec`` the operations of the
    completed extension, one invocation/response pair at a time, choosing
    among operations whose real-time predecessors are already placed and
    which are next in their transaction's program order.
    """
    from .automaton import Determinizer

    h = as_history(h)
    det = Determinizer(spec)
    for he in extensions(h):
        c = complete(he)
        if len(c) > depth:
            continue
        found = _search(c, det)
        if found is not None:
            return c.with_events(found)
    return None


def _search(c, det):
    ops = {o: ir for o, ir in operations(c).items() if ir[1] is not None}
    evs = c.events
    pairs = {o: (evs[i], evs[r]) for o, (i, r) in ops.items()}
    preds = {o: set() for o in ops}
    for a, b in op_order(c):
        preds[b].add(a)
    per_txn = {}
    for o in sorted(ops):
        per_txn.setdefault(o.txn, []).append(o)
    txns = sorted(per_txn)
    failed = set()

    def go(progress, macro, done, out):
        if len(done) == len(ops):
            return list(out)
        key = (progress, macro)
        if key in failed:
            return None
        for ti, t in enumerate(txns):
            k = progress[ti]
            if k >= len(per_txn[t]):
                continue
            o = OpOccurrence(t, k)
            if not preds[o] <= done:
                continue
            inv, resp = pairs[o]
            m1 = det.step(macro, inv)
            if not m1:
                continue
            m2 = det.step(m1, resp)
            if not m2:
                continue
            out.extend((inv, resp))
            nxt = progress[:ti] + (k + 1,) + progress[ti + 1:]
            res = go(nxt, m2, done | {o}, out)
            if res is not None:
                return res
            del out[-2:]
        failed.add(key)
        return None

    return go(tuple(0 for _ in txns), det.start(), frozenset(), [])
