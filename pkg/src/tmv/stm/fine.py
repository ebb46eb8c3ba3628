"""Fine-grained TML, NORec and RO-NORec automata.

Every pseudocode line is one internal step.  Shared variables are numbered:
variable 0 is ``glb`` and variable ``1 + a`` is ``mem(a)``.  All shared
accesses go through :class:`SCMemory` (or :class:`tmv.tso.TSOMemory`), which
is what lets the same code run under sequential consistency or TSO.

State: ``FineState(shared, bufs, txns)`` where ``txns[t]`` is a
:class:`FTxn`.  Scratch fields are reset on every response so dead values
do not split states.
"""
from __future__ import annotations

from typing import NamedTuple, Optional

from .. import history as H
from ..automaton import Automaton, Internal
from ..history import Bounds
from ..tms import set_at

GLB = 0

# pcs with an external step
IDLE, READY, DONE, ABORTED = "idle", "ready", "done", "aborted"
R_BEGIN, R_READ, R_WRITE, R_COMMIT, R_ABORT = "rB", "rR", "rW", "rC", "rA"


class FTxn(NamedTuple):
    pc: str
    loc: int = 0
    time: int = 0
    a: Optional[int] = None
    v: Optional[int] = None
    rd: tuple = ()
    wr: tuple = ()
    it: int = 0


class FineState(NamedTuple):
    shared: tuple
    bufs: tuple
    txns: tuple


class SCMemory:
    """Sequentially consistent shared memory: buffers are always empty."""

    name = "sc"

    def load(self, s, t, var):
        return s.shared[var]

    def store(self, s, t, var, val):
        """(shared, bufs) after the store, or None if the store must wait."""
        return set_at(s.shared, var, val), s.bufs

    def cas(self, s, t, var, expected, new):
        """(ok, shared, bufs), or None if the cas must wait."""
        if s.shared[var] == expected:
            return True, set_at(s.shared, var, new), s.bufs
        return False, s.shared, s.bufs

    def start_bufs(self, txns):
        return ()

    def background(self, s):
        return []


def _next_in(partial, start):
    for a in range(start, len(partial)):
        if partial[a] is not None:
            return a
    return None


class FineGrained(Automaton):
    """Shared client protocol and response handling; subclasses supply
    the operation bodies in ``body``."""

    def __init__(self, bounds: Bounds, memory=None):
        self.bounds = bounds
        self.memory = memory or SCMemory()
        if self.memory.name != "sc":
            self.name = f"{self.base_name}+{self.memory.name}"
        else:
            self.name = self.base_name

    def start_states(self):
        b = self.bounds
        empty = (None,) * b.addrs
        tx = FTxn(IDLE, rd=empty, wr=empty)
        shared = (0,) * (1 + b.addrs)
        return [FineState(shared, self.memory.start_bufs(b.txns), (tx,) * b.txns)]

    def enabled(self, s):
        out = []
        b = self.bounds
        for t, tx in enumerate(s.txns):
            pc = tx.pc
            if pc == IDLE:
                out.append((H.begin_inv(t), self._put(s, t, tx._replace(pc="B1"))))
            elif pc == READY:
                for a in range(b.addrs):
                    out.append((H.read_inv(t, a), self._put(s, t, tx._replace(pc="R1", a=a))))
                    for v in range(b.values):
                        out.append((H.write_inv(t, a, v), self._put(s, t, tx._replace(pc="W1", a=a, v=v))))
                out.append((H.commit_inv(t), self._put(s, t, tx._replace(pc="C1"))))
            elif pc == R_BEGIN:
                out.append((H.begin_resp(t), self._put(s, t, self._idle(tx, READY))))
            elif pc == R_READ:
                out.append((H.read_resp(t, tx.v), self._put(s, t, self._idle(tx, READY))))
            elif pc == R_WRITE:
                out.append((H.write_resp(t), self._put(s, t, self._idle(tx, READY))))
            elif pc == R_COMMIT:
                out.append((H.commit_resp(t), self._put(s, t, self._idle(tx, DONE))))
            elif pc == R_ABORT:
                out.append((H.abort_resp(t), self._put(s, t, self._idle(tx, ABORTED))))
            elif pc not in (DONE, ABORTED):
                step = self.body(s, t, tx)
                if step is not None:
                    newtx, shared, bufs = step
                    out.append((Internal(pc, t), FineState(shared, bufs, set_at(s.txns, t, newtx))))
        for act, (shared, bufs) in self.memory.background(s):
            out.append((act, FineState(shared, bufs, s.txns)))
        return out

    @staticmethod
    def _idle(tx, pc):
        return tx._replace(pc=pc, time=0, a=None, v=None, it=0)

    @staticmethod
    def _put(s, t, tx):
        return FineState(s.shared, s.bufs, set_at(s.txns, t, tx))

    def _begin(self, s, t, tx):
        mem = self.memory
        if tx.pc == "B1":
            return tx._replace(pc="B2", loc=mem.load(s, t, GLB)), s.shared, s.bufs
        if tx.pc == "B2":
            return tx._replace(pc=R_BEGIN if tx.loc % 2 == 0 else "B1"), s.shared, s.bufs
        return None

    def body(self, s, t, tx):
        raise NotImplementedError


class Tml(FineGrained):
    """Transactional Mutex Lock."""

    base_name = "tml"

    def body(self, s, t, tx):
        pc, mem = tx.pc, self.memory
        if pc in ("B1", "B2"):
            return self._begin(s, t, tx)
        keep = (s.shared, s.bufs)
        if pc == "R1":
            return (tx._replace(pc="R2", v=mem.load(s, t, 1 + tx.a)),) + keep
        if pc == "R2":
            ok = mem.load(s, t, GLB) == tx.loc
            return (tx._replace(pc=R_READ if ok else R_ABORT),) + keep
        if pc == "W1":
            return (tx._replace(pc="W2" if tx.loc % 2 == 0 else "W4"),) + keep
        if pc == "W2":
            res = mem.cas(s, t, GLB, tx.loc, tx.loc + 1)
            if res is None:
                return None
            ok, shared, bufs = res
            return tx._replace(pc="W3" if ok else R_ABORT), shared, bufs
        if pc == "W3":
            return (tx._replace(pc="W4", loc=tx.loc + 1),) + keep
        if pc == "W4":
            res = mem.store(s, t, 1 + tx.a, tx.v)
            if res is None:
                return None
            return (tx._replace(pc=R_WRITE),) + res
        if pc == "C1":
            return (tx._replace(pc="C2" if tx.loc % 2 else R_COMMIT),) + keep
        if pc == "C2":
            res = mem.store(s, t, GLB, tx.loc + 1)
            if res is None:
                return None
            return (tx._replace(pc=R_COMMIT),) + res
        raise AssertionError(f"unknown TML pc {pc}")


class Norec(FineGrained):
    """NORec: lazy writes, value-based validation, commit lock via cas."""

    base_name = "norec"
    read_set_fast_path = False

    def body(self, s, t, tx):
        pc, mem = tx.pc, self.memory
        if pc in ("B1", "B2"):
            return self._begin(s, t, tx)
        keep = (s.shared, s.bufs)
        if pc == "W1":
            return (tx._replace(pc=R_WRITE, wr=set_at(tx.wr, tx.a, tx.v)),) + keep
        if pc == "R1":
            if tx.wr[tx.a] is not None:
                return (tx._replace(pc=R_READ, v=tx.wr[tx.a]),) + keep
            return (tx._replace(pc="R1b" if self.read_set_fast_path else "R2"),) + keep
        if pc == "R1b":
            if tx.rd[tx.a] is not None:
                return (tx._replace(pc=R_READ, v=tx.rd[tx.a]),) + keep
            return (tx._replace(pc="R2"),) + keep
        if pc in ("R2", "R5"):
            return (tx._replace(pc="R3", v=mem.load(s, t, 1 + tx.a)),) + keep
        if pc == "R3":
            if tx.loc != mem.load(s, t, GLB):
                return (tx._replace(pc="V1"),) + keep
            return (tx._replace(pc="R6"),) + keep
        if pc == "R6":
            return (tx._replace(pc=R_READ, rd=set_at(tx.rd, tx.a, tx.v)),) + keep
        if pc == "C1":
            empty = all(x is None for x in tx.wr)
            return (tx._replace(pc=R_COMMIT if empty else "C2"),) + keep
        if pc == "C2":
            res = mem.cas(s, t, GLB, tx.loc, tx.loc + 1)
            if res is None:
                return None
            ok, shared, bufs = res
            return tx._replace(pc="C3" if ok else "V1", it=0), shared, bufs
        if pc == "C3":
            a = _next_in(tx.wr, tx.it)
            if a is None:
                return (tx._replace(pc="C4", it=0),) + keep
            res = mem.store(s, t, 1 + a, tx.wr[a])
            if res is None:
                return None
            return (tx._replace(it=a + 1),) + res
        if pc == "C4":
            res = mem.store(s, t, GLB, tx.loc + 2)
            if res is None:
                return None
            return (tx._replace(pc=R_COMMIT),) + res
        # Validate; returns to R5 (read) or C2 (commit) with loc := time
        if pc == "V1":
            return (tx._replace(pc="V2", time=mem.load(s, t, GLB)),) + keep
        if pc == "V2":
            return (tx._replace(pc="V1" if tx.time % 2 else "V3", it=0),) + keep
        if pc == "V3":
            a = _next_in(tx.rd, tx.it)
            if a is None:
                return (tx._replace(pc="V4", it=0),) + keep
            if mem.load(s, t, 1 + a) != tx.rd[a]:
                return (tx._replace(pc=R_ABORT),) + keep
            return (tx._replace(it=a + 1),) + keep
        if pc == "V4":
            if tx.time != mem.load(s, t, GLB):
                return (tx._replace(pc="V1"),) + keep
            back = "R5" if tx.a is not None else "C2"
            return (tx._replace(pc=back, loc=tx.time, time=0),) + keep
        raise AssertionError(f"unknown NORec pc {pc}")


class RoNorec(Norec):
    """NORec whose reads first try the read set (no validation on a hit)."""

    base_name = "ronorec"
    read_set_fast_path = True


def tml(bounds: Bounds, memory=None) -> Tml:
    return Tml(bounds, memory)


def norec(bounds: Bounds, memory=None) -> Norec:
    return Norec(bounds, memory)


def ronorec(bounds: Bounds, memory=None) -> RoNorec:
    return RoNorec(bounds, memory)
