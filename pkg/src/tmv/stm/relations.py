"""Step correspondences and simulation relations from the CGAs to TMS2/TMS3.

Statuses of the CGA models and of TMS share one vocabulary, except that a
CGA has two extra transient statuses: ``beginResp`` (the atomic begin body
ran, response not yet given) and ``abortResp`` (the body decided to abort).
TMS has neither, so they map back to ``beginPending`` and to the status of
the aborted invocation.
"""
from __future__ import annotations

from ..automaton import Internal, SimulationRelation
from ..tms import (
    ABORTED, BEGIN_PENDING, COMMIT_RESP, COMMITTED, NOT_STARTED, is_empty,
    override, subset_of, valid_idx,
)


def tms_status(status):
    name = status[0]
    if name == "beginResp":
        return BEGIN_PENDING
    if name == "abortResp":
        return status[1]
    return status


def _begun(status):
    return status not in (NOT_STARTED, BEGIN_PENDING)


def _finished(status):
    return status in (COMMITTED, ABORTED)


# --- TML-CGA -> TMS2 -------------------------------------------------------

def sc_tml(cs, action):
    """Abstract TMS2 step for a TML-CGA internal step, or None (stutter)."""
    t = action.txn
    tx = cs.txns[t]
    name = action.name
    if name == "ATXRead":
        if tx.loc == cs.glb:
            return Internal("DoRead", t, (action.args[0], tx.loc // 2))
        return None
    if name == "ATXWrite":
        return Internal("DoWrite", t, action.args) if tx.loc == cs.glb else None
    if name == "ATXCommit":
        if tx.loc % 2 == 0:
            return Internal("DoCommitReadOnly", t, (tx.loc // 2,))
        return Internal("DoCommitWriter", t)
    return None


def r_tml(cs, as_) -> bool:
    """Eager TML-CGA memory vs. TMS2's snapshot sequence.

    Per transaction (once its begin body ran and until it finishes):
    even ``loc`` iff empty write set; an odd ``loc`` that has not yet
    committed equals ``glb``; ``beginIdx <= loc/2 <= maxIdx``; the read set
    agrees with snapshot ``loc/2``.  Globally ``glb/2 = maxIdx`` and ``mem``
    is the latest snapshot overridden by the live writer's write set.
    """
    max_idx = as_.max_idx
    if cs.glb // 2 != max_idx:
        return False
    writer = None
    for t, (ctx, atx) in enumerate(zip(cs.txns, as_.txns)):
        st = ctx.status
        if tms_status(st) != atx.status:
            return False
        if not _begun(st):
            if not (is_empty(atx.rd) and is_empty(atx.wr)):
                return False
            continue
        if _finished(st):
            continue
        loc = ctx.loc
        if (loc % 2 == 0) != is_empty(atx.wr):
            return False
        if loc % 2 and st != COMMIT_RESP:
            if cs.glb != loc or writer is not None:
                return False
            writer = t
        n = loc // 2
        if not (atx.begin_idx <= n <= max_idx and subset_of(atx.rd, as_.mem_seq[n])):
            return False
    if (cs.glb % 2 == 1) != (writer is not None):
        return False
    expected = as_.latest if writer is None else override(as_.latest, as_.txns[writer].wr)
    return cs.mem == expected


# --- NORec-CGA / RO-NORec-CGA -> TMS3 --------------------------------------

def sc_norec(cs, action):
    t = action.txn
    tx = cs.txns[t]
    name = action.name
    if name == "ATXRead":
        a = action.args[0]
        if tx.wr[a] is not None or subset_of(tx.rd, cs.mem):
            return Internal("DoRead", t, (a, cs.commits))
        return None
    if name == "ATXWrite":
        return Internal("DoWrite", t, action.args)
    if name == "ATXCommit":
        if is_empty(tx.wr):
            return Internal("DoCommitReadOnly", t)
        if subset_of(tx.rd, cs.mem):
            return Internal("DoCommitWriter", t)
        return None
    return None


def sc_ronorec(cs, action):
    """As :func:`sc_norec`, except a read-set hit reads the snapshot the
    transaction last validated against."""
    if action.name == "ATXRead":
        t, a = action.txn, action.args[0]
        tx = cs.txns[t]
        if tx.wr[a] is None and tx.rd[a] is not None:
            return Internal("DoRead", t, (a, tx.snap))
    return sc_norec(cs, action)


def r_norec(cs, as_) -> bool:
    """Same read/write sets per transaction, commit count = maxIdx, and
    current memory = latest snapshot."""
    if cs.commits != as_.max_idx or cs.mem != as_.latest:
        return False
    for ctx, atx in zip(cs.txns, as_.txns):
        if tms_status(ctx.status) != atx.status or ctx.rd != atx.rd or ctx.wr != atx.wr:
            return False
    return True


def r_ronorec(cs, as_) -> bool:
    """:func:`r_norec` plus: a live transaction's read set is valid at the
    snapshot recorded at its last validating read."""
    if not r_norec(cs, as_):
        return False
    for ctx, atx in zip(cs.txns, as_.txns):
        if not _begun(ctx.status) or _finished(ctx.status) or is_empty(ctx.rd):
            continue
        if not (atx.begin_idx <= ctx.snap <= as_.max_idx and subset_of(atx.rd, as_.mem_seq[ctx.snap])):
            return False
    return True


# --- TMS3 <-> TMS2 ---------------------------------------------------------

def _equal(cs, as_):
    return cs == as_


def sc_tms3_tms2(cs, action):
    """Identity, except the read-only commit gets a valid index witness."""
    if action.name == "DoCommitReadOnly":
        t = action.txn
        for n in range(cs.max_idx, -1, -1):
            if valid_idx(cs, t, n):
                return Internal("DoCommitReadOnly", t, (n,))
        # no witness: let the checker report the unmatched step
        return Internal("DoCommitReadOnly", t, (-1,))
    return action


def sc_tms2_tms3(cs, action):
    if action.name == "DoCommitReadOnly":
        return Internal("DoCommitReadOnly", action.txn)
    return action


RELATIONS = {
    "tml-tms2": ("tml-cga", "tms2", SimulationRelation(r_tml, sc_tml, "tml-tms2")),
    "norec-tms3": ("norec-cga", "tms3", SimulationRelation(r_norec, sc_norec, "norec-tms3")),
    "ronorec-tms3": ("ronorec-cga", "tms3", SimulationRelation(r_ronorec, sc_ronorec, "ronorec-tms3")),
    "tms3-tms2": ("tms3", "tms2", SimulationRelation(_equal, sc_tms3_tms2, "tms3-tms2")),
    "tms2-tms3": ("tms2", "tms3", SimulationRelation(_equal, sc_tms2_tms3, "tms2-tms3")),
}
