"""Definition-level opacity checking by brute force.

Nothing here is clever on purpose: the checkers follow the textbook
definitions (valid, non-interleaved, legal, sequential, end-to-end opaque,
opaque) so that they can serve as an oracle for the model-level checks.
The witness search enumerates extensions, then transaction orders that
respect real-time order, and prunes an order as soon as a transaction
block reads something inconsistent with the committed state before it.
"""
from __future__ import annotations

from itertools import product
from typing import Optional

from .history import (
    ABORT, BEGIN, COMMIT, COMMITTED, READ, RESP, WRITE, History, OpOccurrence,
    as_history, complete, equivalent, extensions, is_matched_alternating,
    is_terminal, matching_responses, op_order, pending_invocations, project,
    status, txn_order, well_formed,
)


class MemorySnapshot(tuple):
    """Total map from ``range(len(self))`` addresses to values."""

    @classmethod
    def initial(cls, addrs):
        return cls((0,) * addrs)

    def update(self, a, v):
        return MemorySnapshot(self[:a] + (v,) + self[a + 1:])


def is_valid(h) -> bool:
    """Replay matched pairs against a single memory starting from zeros."""
    h = as_history(h)
    if not is_matched_alternating(h):
        raise ValueError("is_valid needs a fully matched alternating history")
    naddr = max([h.bounds.addrs] + [e.addr + 1 for e in h if e.addr is not None])
    sigma = MemorySnapshot.initial(naddr)
    evs = h.events
    for i in range(0, len(evs), 2):
        inv, resp = evs[i], evs[i + 1]
        if inv.kind == WRITE and resp.kind == WRITE and resp.pol == RESP:
            sigma = sigma.update(inv.addr, inv.value)
        elif inv.kind == READ and resp.kind == READ and resp.pol == RESP:
            if sigma[inv.addr] != resp.value:
                return False
    return True


def is_non_interleaved(h) -> bool:
    h = as_history(h)
    evs = h.events
    begins = [i for i, e in enumerate(evs) if e.kind == BEGIN and e.is_inv]
    for i, j in zip(begins, begins[1:]):
        p = evs[i].txn
        ended = any(
            e.txn == p and (e.pol == ABORT or (e.kind == COMMIT and e.pol == RESP))
            for e in evs[i + 1:j]
        )
        if not ended and any(e.txn == p for e in evs[j + 1:]):
            return False
    return True


def is_legal(hs) -> bool:
    """Legal at every index: the committed transactions' events plus the
    current transaction's own events, up to and including that index,
    form a valid history once its unanswered invocation is dropped."""
    hs = as_history(hs)
    if not is_non_interleaved(hs):
        raise ValueError("is_legal needs a non-interleaved history")
    committed = {p for p in hs.txns() if status(hs, p) == COMMITTED}
    evs = hs.events
    for i, e in enumerate(evs):
        keep = committed | {e.txn}
        sub = hs.with_events(x for x in evs[: i + 1] if x.txn in keep)
        if not is_valid(complete(sub)):
            return False
    return True


def is_sequential(hs) -> bool:
    hs = as_history(hs)
    return well_formed(hs) and is_non_interleaved(hs) and is_legal(hs)


# --- witness search --------------------------------------------------------

def _block_effect(events, mem):
    """Run one transaction block on ``mem``.

    Returns None if some read disagrees with the transaction's view
    (committed memory overridden by its own earlier writes), else the
    memory after the block if it committed, or ``mem`` unchanged.
    """
    view = mem
    for i in range(0, len(events) - 1, 2):
        inv, resp = events[i], events[i + 1]
        if resp.pol != RESP:
            continue
        if inv.kind == WRITE:
            view = view.update(inv.addr, inv.value)
        elif inv.kind == READ and view[inv.addr] != resp.value:
            return None
    last = events[-1] if events else None
    if last is not None and last.kind == COMMIT and last.pol == RESP:
        return view
    return mem


def _search_order(blocks, preds, naddr):
    """DFS over transaction orders respecting ``preds``; memoises failures."""
    txns = sorted(blocks)
    failed = set()

    def go(placed, mem, order):
        if len(placed) == len(txns):
            return list(order)
        key = (placed, mem)
        if key in failed:
            return None
        for t in txns:
            if t in placed or not preds[t] <= placed:
                continue
            nxt = _block_effect(blocks[t], mem)
            if nxt is None:
                continue
            order.append(t)
            res = go(placed | {t}, nxt, order)
            if res is not None:
                return res
            order.pop()
        failed.add(key)
        return None

    return go(frozenset(), MemorySnapshot.initial(naddr), [])


def find_witness(h) -> Optional[tuple]:
    """Return ``(he, hs)`` witnessing end-to-end opacity, or None.

    Extensions are tried in the order :func:`extensions` lists them; each
    is completed and searched on plain event lists for speed.
    """
    h = as_history(h)
    evs = h.events
    naddr = max([h.bounds.addrs] + [e.addr + 1 for e in evs if e.addr is not None])
    pend = pending_invocations(h)
    pts = sorted(pend)
    choices = [[None] + matching_responses(evs[pend[t]], h.bounds.values) for t in pts]
    for combo in product(*choices):
        added = [r for r in combo if r is not None]
        drop = {pend[t] for t, r in zip(pts, combo) if r is None}
        blocks, first, last = {}, {}, {}
        for i, e in enumerate([e for i, e in enumerate(evs) if i not in drop] + added):
            blocks.setdefault(e.txn, []).append(e)
            first.setdefault(e.txn, i)
            last[e.txn] = i
        finished = [p for p, bl in blocks.items() if is_terminal(bl[-1])]
        preds = {q: frozenset(p for p in finished if last[p] < first[q]) for q in blocks}
        order = _search_order(blocks, preds, naddr)
        if order is not None:
            he = h + added
            hs = h.with_events(e for t in order for e in blocks[t])
            return he, hs
    return None


def end_to_end_opaque(h) -> Optional[History]:
    """A sequential witness for some extension of ``h``, or None."""
    found = find_witness(h)
    return None if found is None else found[1]


def is_opaque(h) -> bool:
    h = as_history(h)
    return all(end_to_end_opaque(h[:k]) is not None for k in range(len(h) + 1))


def first_non_opaque_prefix(h) -> Optional[int]:
    """Length of the shortest prefix that is not end-to-end opaque."""
    h = as_history(h)
    for k in range(len(h) + 1):
        if end_to_end_opaque(h[:k]) is None:
            return k
    return None


def check_witness(h, he, hs) -> bool:
    """Independent confirmation of a witness against the definition."""
    c = complete(he)
    return (
        he in extensions(h)
        and is_sequential(hs)
        and equivalent(c, hs)
        and txn_order(c) <= txn_order(hs)
    )


# --- constructive linearization --------------------------------------------

def alternating_ops(h):
    """Split an alternating history into operations with their identity."""
    ops, counters = [], {}
    evs = h.events
    for i in range(0, len(evs), 2):
        t = evs[i].txn
        k = counters.get(t, 0)
        counters[t] = k + 1
        ops.append((OpOccurrence(t, k), evs[i:i + 2]))
    return ops


def misordered_pairs(ops, order):
    """Index pairs (i, j), i < j, with ops[j] before ops[i] in ``order``."""
    ids = [o for o, _ in ops]
    return [
        (i, j)
        for i in range(len(ids))
        for j in range(i + 1, len(ids))
        if (ids[j], ids[i]) in order
    ]


def linearization_steps(he, hs):
    """Yield the successive alternating histories produced by transposing
    the closest mis-ordered pair until none remain (first item is ``hs``)."""
    hs = as_history(hs)
    order = op_order(complete(he))
    ops = alternating_ops(hs)
    yield hs
    while True:
        pairs = misordered_pairs(ops, order)
        if not pairs:
            return
        i, j = min(pairs, key=lambda ij: (ij[1] - ij[0], ij[0]))
        o_t, o_u = ops[i], ops[j]
        gap = ops[i + 1:j]
        if o_t[1][0].kind != BEGIN:
            ops = ops[:i] + gap + [o_u, o_t] + ops[j + 1:]
        else:
            ops = ops[:i] + [o_u, o_t] + gap + ops[j + 1:]
        yield hs.with_events(e for _, pair in ops for e in pair)


def construct_linearization(h, witness=None) -> History:
    """Reorder a sequential witness of ``h`` into an alternating history
    that linearizes an extension of ``h``.

    ``witness`` may supply ``(he, hs)``; otherwise one is searched for.
    """
    h = as_history(h)
    if not is_opaque(h):
        raise ValueError("history is not opaque")
    he, hs = witness if witness is not None else find_witness(h)
    ha = hs
    for ha in linearization_steps(he, hs):
        pass
    return ha
