"""TMS2 and its TMS3 variant as explicit-state automata.

State layout: ``(txns, mem_seq)`` where ``txns[t] = (status, begin_idx,
rd, wr)``.  ``rd`` and ``wr`` are per-address tuples with ``None`` for
"not in the domain"; ``mem_seq`` is a tuple of memory snapshots, oldest
first.  Statuses are small tuples such as ``("doRead", a)``.
"""
from __future__ import annotations

from typing import NamedTuple

from . import history as H
from .automaton import Automaton, Internal
from .history import Bounds

NOT_STARTED = ("notStarted",)
BEGIN_PENDING = ("beginPending",)
READY = ("ready",)
WRITE_RESP = ("writeResp",)
DO_COMMIT = ("doCommit",)
COMMIT_RESP = ("commitResp",)
COMMITTED = ("committed",)
ABORTED = ("aborted",)

# statuses from which respAbort is *not* enabled
NO_ABORT = {NOT_STARTED, READY, COMMIT_RESP, COMMITTED, ABORTED}

TMS2, TMS3 = "TMS2", "TMS3"


class TxnState(NamedTuple):
    status: tuple
    begin_idx: int
    rd: tuple
    wr: tuple


class TMSState(NamedTuple):
    txns: tuple
    mem_seq: tuple

    @property
    def max_idx(self):
        return len(self.mem_seq) - 1

    @property
    def latest(self):
        return self.mem_seq[-1]


def subset_of(partial, mem) -> bool:
    """``partial`` (per-address, None = absent) agrees with ``mem``."""
    return all(v is None or mem[a] == v for a, v in enumerate(partial))


def override(mem, partial):
    return tuple(mem[a] if v is None else v for a, v in enumerate(partial))


def set_at(tup, i, v):
    return tup[:i] + (v,) + tup[i + 1:]


def valid_idx(s: TMSState, t: int, n: int) -> bool:
    tx = s.txns[t]
    return tx.begin_idx <= n <= s.max_idx and subset_of(tx.rd, s.mem_seq[n])


def is_empty(partial) -> bool:
    return all(v is None for v in partial)


class TMS(Automaton):
    def __init__(self, bounds: Bounds, variant=TMS2):
        if variant not in (TMS2, TMS3):
            raise ValueError(f"unknown TMS variant {variant!r}")
        self.bounds = bounds
        self.variant = variant
        self.name = variant.lower()

    def start_states(self):
        b = self.bounds
        empty = (None,) * b.addrs
        tx = TxnState(NOT_STARTED, 0, empty, empty)
        return [TMSState((tx,) * b.txns, ((0,) * b.addrs,))]

    def enabled(self, s: TMSState):
        out = []
        b = self.bounds
        for t, tx in enumerate(s.txns):
            st = tx.status
            name = st[0]

            def put(newtx, mem_seq=s.mem_seq):
                return TMSState(set_at(s.txns, t, newtx), mem_seq)

            if name == "notStarted":
                out.append((H.begin_inv(t), put(tx._replace(status=BEGIN_PENDING, begin_idx=s.max_idx))))
            elif name == "beginPending":
                out.append((H.begin_resp(t), put(tx._replace(status=READY))))
            elif name == "ready":
                for a in range(b.addrs):
                    out.append((H.read_inv(t, a), put(tx._replace(status=("doRead", a)))))
                    for v in range(b.values):
                        out.append((H.write_inv(t, a, v), put(tx._replace(status=("doWrite", a, v)))))
                out.append((H.commit_inv(t), put(tx._replace(status=DO_COMMIT))))
            elif name == "readResp":
                out.append((H.read_resp(t, st[1]), put(tx._replace(status=READY))))
            elif name == "writeResp":
                out.append((H.write_resp(t), put(tx._replace(status=READY))))
            elif name == "commitResp":
                out.append((H.commit_resp(t), put(tx._replace(status=COMMITTED))))
            elif name == "doRead":
                a = st[1]
                if tx.wr[a] is not None:
                    newtx = tx._replace(status=("readResp", tx.wr[a]))
                    for n in range(s.max_idx + 1):
                        out.append((Internal("DoRead", t, (a, n)), put(newtx)))
                else:
                    for n in range(tx.begin_idx, s.max_idx + 1):
                        if valid_idx(s, t, n):
                            v = s.mem_seq[n][a]
                            newtx = tx._replace(status=("readResp", v), rd=set_at(tx.rd, a, v))
                            out.append((Internal("DoRead", t, (a, n)), put(newtx)))
            elif name == "doWrite":
                _, a, v = st
                newtx = tx._replace(status=WRITE_RESP, wr=set_at(tx.wr, a, v))
                out.append((Internal("DoWrite", t, (a, v)), put(newtx)))
            elif name == "doCommit":
                if is_empty(tx.wr):
                    newtx = tx._replace(status=COMMIT_RESP)
                    if self.variant == TMS2:
                        for n in range(tx.begin_idx, s.max_idx + 1):
                            if valid_idx(s, t, n):
                                out.append((Internal("DoCommitReadOnly", t, (n,)), put(newtx)))
                    else:
                        out.append((Internal("DoCommitReadOnly", t), put(newtx)))
                # no write-set guard on the writer commit, as in the automaton
                if subset_of(tx.rd, s.latest):
                    new_mem = override(s.latest, tx.wr)
                    out.append((Internal("DoCommitWriter", t),
                                put(tx._replace(status=COMMIT_RESP), s.mem_seq + (new_mem,))))
            if st not in NO_ABORT:
                out.append((H.abort_resp(t), put(tx._replace(status=ABORTED))))
        return out


def tms_automaton(bounds: Bounds, variant=TMS2) -> TMS:
    return TMS(bounds, variant)
