"""Coarse-grained abstractions: TML-CGA, NORec-CGA and RO-NORec-CGA.

Each operation is an external invocation, exactly one atomic internal
step carrying the whole body, and an external response.  A transaction
is single-shot: once begun it may invoke reads, writes and a commit in
any order the client likes, or simply stop.
"""
from __future__ import annotations

from typing import NamedTuple

from .. import history as H
from ..automaton import Automaton, Internal
from ..history import Bounds
from ..tms import (
    ABORTED, BEGIN_PENDING, COMMIT_RESP, COMMITTED, DO_COMMIT, NOT_STARTED,
    READY, WRITE_RESP, is_empty, override, set_at, subset_of,
)

# after the atomic begin body ran, before the begin response
BEGIN_RESP = ("beginResp",)


def aborting(prior):
    """Status of a transaction whose body decided to abort; keeps the
    invocation status so relations can map it back."""
    return ("abortResp", prior)


def client_steps(t, status, bounds, put):
    """External invocations and responses shared by all CGA models.

    ``put(status)`` builds the successor with the transaction's status
    replaced (and scratch cleared on return to ready).
    """
    name = status[0]
    if name == "notStarted":
        return [(H.begin_inv(t), put(BEGIN_PENDING))]
    if name == "ready":
        out = []
        for a in range(bounds.addrs):
            out.append((H.read_inv(t, a), put(("doRead", a))))
            for v in range(bounds.values):
                out.append((H.write_inv(t, a, v), put(("doWrite", a, v))))
        out.append((H.commit_inv(t), put(DO_COMMIT)))
        return out
    if name == "beginResp":
        return [(H.begin_resp(t), put(READY))]
    if name == "readResp":
        return [(H.read_resp(t, status[1]), put(READY))]
    if name == "writeResp":
        return [(H.write_resp(t), put(READY))]
    if name == "commitResp":
        return [(H.commit_resp(t), put(COMMITTED))]
    if name == "abortResp":
        return [(H.abort_resp(t), put(ABORTED))]
    return []


class TmlTxn(NamedTuple):
    status: tuple
    loc: int


class TmlCgaState(NamedTuple):
    txns: tuple
    glb: int
    mem: tuple


class TmlCga(Automaton):
    """Atomic TML: begin awaits an even ``glb``; the first write takes the
    lock by making ``glb`` odd; reads and writes abort once ``glb`` moved."""

    name = "tml-cga"

    def __init__(self, bounds: Bounds):
        self.bounds = bounds

    def start_states(self):
        b = self.bounds
        return [TmlCgaState((TmlTxn(NOT_STARTED, 0),) * b.txns, 0, (0,) * b.addrs)]

    def enabled(self, s):
        out = []
        for t, tx in enumerate(s.txns):
            st = tx.status

            def put(status, loc=tx.loc, glb=s.glb, mem=s.mem):
                return TmlCgaState(set_at(s.txns, t, TmlTxn(status, loc)), glb, mem)

            out.extend(client_steps(t, st, self.bounds, put))
            name = st[0]
            if name == "beginPending":
                if s.glb % 2 == 0:
                    out.append((Internal("ATXBegin", t), put(BEGIN_RESP, loc=s.glb)))
            elif name == "doRead":
                a = st[1]
                act = Internal("ATXRead", t, (a,))
                if s.glb == tx.loc:
                    out.append((act, put(("readResp", s.mem[a]))))
                else:
                    out.append((act, put(aborting(st))))
            elif name == "doWrite":
                _, a, v = st
                act = Internal("ATXWrite", t, (a, v))
                if s.glb != tx.loc:
                    out.append((act, put(aborting(st))))
                elif tx.loc % 2 == 0:
                    out.append((act, put(WRITE_RESP, loc=tx.loc + 1, glb=s.glb + 1,
                                         mem=set_at(s.mem, a, v))))
                else:
                    out.append((act, put(WRITE_RESP, mem=set_at(s.mem, a, v))))
            elif name == "doCommit":
                glb = s.glb + 1 if tx.loc % 2 else s.glb
                out.append((Internal("ATXCommit", t), put(COMMIT_RESP, glb=glb)))
        return out


class NorecTxn(NamedTuple):
    status: tuple
    rd: tuple
    wr: tuple
    # auxiliary: commit count observed at the last validating read
    snap: int = 0


class NorecCgaState(NamedTuple):
    txns: tuple
    mem: tuple
    # auxiliary: number of successful writer commits
    commits: int


class NorecCga(Automaton):
    """Atomic NORec: buffered writes, value-based validation of the read
    set against current memory on reads and on writer commit."""

    name = "norec-cga"
    read_set_fast_path = False

    def __init__(self, bounds: Bounds):
        self.bounds = bounds

    def start_states(self):
        b = self.bounds
        empty = (None,) * b.addrs
        return [NorecCgaState((NorecTxn(NOT_STARTED, empty, empty),) * b.txns, (0,) * b.addrs, 0)]

    def enabled(self, s):
        out = []
        for t, tx in enumerate(s.txns):
            st = tx.status

            def put(status, rd=tx.rd, wr=tx.wr, snap=tx.snap, mem=s.mem, commits=s.commits):
                return NorecCgaState(set_at(s.txns, t, NorecTxn(status, rd, wr, snap)), mem, commits)

            out.extend(client_steps(t, st, self.bounds, put))
            name = st[0]
            if name == "beginPending":
                out.append((Internal("ATXBegin", t), put(BEGIN_RESP)))
            elif name == "doRead":
                a = st[1]
                act = Internal("ATXRead", t, (a,))
                if tx.wr[a] is not None:
                    out.append((act, put(("readResp", tx.wr[a]))))
                elif self.read_set_fast_path and tx.rd[a] is not None:
                    out.append((act, put(("readResp", tx.rd[a]))))
                elif subset_of(tx.rd, s.mem):
                    v = s.mem[a]
                    snap = s.commits if self.read_set_fast_path else 0
                    out.append((act, put(("readResp", v), rd=set_at(tx.rd, a, v), snap=snap)))
                else:
                    out.append((act, put(aborting(st))))
            elif name == "doWrite":
                _, a, v = st
                out.append((Internal("ATXWrite", t, (a, v)), put(WRITE_RESP, wr=set_at(tx.wr, a, v))))
            elif name == "doCommit":
                act = Internal("ATXCommit", t)
                if is_empty(tx.wr):
                    out.append((act, put(COMMIT_RESP)))
                elif subset_of(tx.rd, s.mem):
                    out.append((act, put(COMMIT_RESP, mem=override(s.mem, tx.wr), commits=s.commits + 1)))
                else:
                    out.append((act, put(aborting(st))))
        return out


class RoNorecCga(NorecCga):
    """NORec-CGA plus a read-set fast path: re-reading an address already
    in the read set returns the recorded value without validating."""

    name = "ronorec-cga"
    read_set_fast_path = True


def tml_cga(bounds: Bounds) -> TmlCga:
    return TmlCga(bounds)


def norec_cga(bounds: Bounds) -> NorecCga:
    return NorecCga(bounds)


def ronorec_cga(bounds: Bounds) -> RoNorecCga:
    return RoNorecCga(bounds)
