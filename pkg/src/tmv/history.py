"""Transactional histories: events, projection, completion, extension, orders.

A history is a finite sequence of invocation/response events exchanged
between a TM and its clients.  Transaction ids are small naturals and
addresses are 0-based indices; values range over ``range(bounds.values)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from typing import Iterable, NamedTuple, Optional

# operation kinds
BEGIN, READ, WRITE, COMMIT = "B", "R", "W", "C"
# polarities
INV, RESP, ABORT = "inv", "resp", "abort"

NOT_PRESENT, LIVE, COMMITTED, ABORTED = "not-present", "live", "committed", "aborted"

ADDR_NAMES = ("x", "y", "z", "u", "v", "w")


class Event(NamedTuple):
    """One invocation or response.

    Abort responses carry ``kind=None``: the operation they answer is
    whatever invocation of ``txn`` is pending.
    """

    kind: Optional[str]
    pol: str
    txn: int
    addr: Optional[int] = None
    value: Optional[int] = None

    @property
    def is_inv(self):
        return self.pol == INV

    @property
    def is_resp(self):
        return self.pol != INV

    def __str__(self):
        return format_event(self)


def begin_inv(t):
    return Event(BEGIN, INV, t)


def begin_resp(t):
    return Event(BEGIN, RESP, t)


def read_inv(t, a):
    return Event(READ, INV, t, a)


def read_resp(t, v):
    return Event(READ, RESP, t, None, v)


def write_inv(t, a, v):
    return Event(WRITE, INV, t, a, v)


def write_resp(t):
    return Event(WRITE, RESP, t)


def commit_inv(t):
    return Event(COMMIT, INV, t)


def commit_resp(t):
    return Event(COMMIT, RESP, t)


def abort_resp(t):
    return Event(None, ABORT, t)


def matches(inv: Event, resp: Event) -> bool:
    """True iff ``resp`` is a legal response to ``inv``; a begin can never be aborted."""
    if not inv.is_inv or not resp.is_resp or inv.txn != resp.txn:
        return False
    if resp.pol == ABORT:
        return inv.kind != BEGIN
    return resp.kind == inv.kind


# --- pairs -----------------------------------------------------------------
# Shorthands for the two-event sequences used throughout the tests.

def BEGIN_PAIR(t):
    return [begin_inv(t), begin_resp(t)]


def READ_PAIR(t, a, v):
    return [read_inv(t, a), read_resp(t, v)]


def WRITE_PAIR(t, a, v):
    return [write_inv(t, a, v), write_resp(t)]


def COMMIT_PAIR(t):
    return [commit_inv(t), commit_resp(t)]


@dataclass(frozen=True)
class Bounds:
    txns: int = 2
    addrs: int = 2
    values: int = 2

    def __post_init__(self):
        if self.txns < 1 or self.addrs < 1 or self.values < 1:
            raise ValueError(f"bounds must be positive: {self}")


@dataclass(frozen=True)
class History:
    events: tuple = ()
    bounds: Optional[Bounds] = field(default=None)

    def __post_init__(self):
        object.__setattr__(self, "events", tuple(self.events))
        if self.bounds is None:
            object.__setattr__(self, "bounds", derive_bounds(self.events))

    def __len__(self):
        return len(self.events)

    def __iter__(self):
        return iter(self.events)

    def __getitem__(self, i):
        if isinstance(i, slice):
            return History(self.events[i], self.bounds)
        return self.events[i]

    def __add__(self, other):
        other_events = other.events if isinstance(other, History) else tuple(other)
        return History(self.events + other_events, self.bounds)

    def with_events(self, events):
        return History(tuple(events), self.bounds)

    def txns(self):
        return sorted({e.txn for e in self.events})

    def __str__(self):
        return serialize_history(self)


def derive_bounds(events, min_values: int = 2) -> Bounds:
    """Smallest bounds covering ``events`` (at least ``min_values`` values)."""
    txns, addrs, values = 1, 1, min_values
    for e in events:
        txns = max(txns, e.txn + 1)
        if e.addr is not None:
            addrs = max(addrs, e.addr + 1)
        if e.value is not None:
            values = max(values, e.value + 1)
    return Bounds(txns, addrs, values)


def as_history(h) -> History:
    return h if isinstance(h, History) else History(tuple(h))


# --- projection and status -------------------------------------------------

def project(h, p) -> History:
    h = as_history(h)
    return h.with_events(e for e in h.events if e.txn == p)


def status(h, p) -> str:
    last = None
    for e in as_history(h).events:
        if e.txn == p:
            last = e
    if last is None:
        return NOT_PRESENT
    if last.pol == ABORT:
        return ABORTED
    if last.kind == COMMIT and last.pol == RESP:
        return COMMITTED
    return LIVE


def is_finished(h, p) -> bool:
    return status(h, p) in (COMMITTED, ABORTED)


def is_terminal(e: Event) -> bool:
    return e.pol == ABORT or (e.kind == COMMIT and e.pol == RESP)


def _txn_well_formed(events) -> bool:
    if not events:
        return True
    if events[0] != begin_inv(events[0].txn):
        return False
    pending = None
    for i, e in enumerate(events):
        if e.is_inv:
            if pending is not None:
                return False
            if e.kind == BEGIN and i != 0:
                return False
            pending = e
        else:
            if pending is None or not matches(pending, e):
                return False
            if e.kind == BEGIN and e.pol == RESP and i != 1:
                return False
            if is_terminal(e) and i != len(events) - 1:
                return False
            pending = None
    return True


def well_formed(h) -> bool:
    """Every transaction's projection is alternating, begins with a begin
    invocation and has terminal responses only at its end."""
    h = as_history(h)
    per_txn = {}
    for e in h.events:
        per_txn.setdefault(e.txn, []).append(e)
    return all(_txn_well_formed(evs) for evs in per_txn.values())


def is_alternating(h) -> bool:
    evs = as_history(h).events
    for i, e in enumerate(evs):
        if i % 2 == 0:
            if not e.is_inv:
                return False
        elif not matches(evs[i - 1], e):
            return False
    return True


def is_matched_alternating(h) -> bool:
    return is_alternating(h) and len(as_history(h)) % 2 == 0


# --- completion and extension ----------------------------------------------

def pending_invocations(h) -> dict:
    """Map txn -> index of its pending (unanswered) invocation."""
    pending = {}
    for i, e in enumerate(as_history(h).events):
        if e.is_inv:
            pending[e.txn] = i
        else:
            pending.pop(e.txn, None)
    return pending


def complete(h) -> History:
    h = as_history(h)
    drop = set(pending_invocations(h).values())
    return h.with_events(e for i, e in enumerate(h.events) if i not in drop)


def matching_responses(inv: Event, values: int):
    t = inv.txn
    if inv.kind == BEGIN:
        return [begin_resp(t)]
    if inv.kind == READ:
        return [read_resp(t, v) for v in range(values)] + [abort_resp(t)]
    if inv.kind == WRITE:
        return [write_resp(t), abort_resp(t)]
    return [commit_resp(t), abort_resp(t)]


def extensions(h) -> list:
    """All histories obtained by answering any subset of pending invocations.

    Responses are appended in transaction order; the order among appended
    responses cannot affect equivalence or either real-time order.
    """
    h = as_history(h)
    pend = pending_invocations(h)
    choices = []
    for t in sorted(pend):
        inv = h.events[pend[t]]
        choices.append([None] + matching_responses(inv, h.bounds.values))
    out = []
    for combo in product(*choices):
        out.append(h + [r for r in combo if r is not None])
    return out


def equivalent(h1, h2) -> bool:
    h1, h2 = as_history(h1), as_history(h2)
    txns = set(h1.txns()) | set(h2.txns())
    return all(project(h1, p).events == project(h2, p).events for p in txns)


# --- real-time orders ------------------------------------------------------

def _first_last(h):
    first, last = {}, {}
    for i, e in enumerate(as_history(h).events):
        first.setdefault(e.txn, i)
        last[e.txn] = i
    return first, last


def txn_precedes(h, p, q) -> bool:
    h = as_history(h)
    if not is_finished(h, p):
        return False
    first, last = _first_last(h)
    if q not in first:
        return False
    return last[p] < first[q]


def txn_order(h) -> set:
    """The real-time order on transactions as a set of (p, q) pairs."""
    h = as_history(h)
    first, last = _first_last(h)
    fin = [p for p in first if is_finished(h, p)]
    return {(p, q) for p in fin for q in first if last[p] < first[q]}


class OpOccurrence(NamedTuple):
    txn: int
    index: int  # position among the transaction's invocations


def operations(h) -> dict:
    """Map each operation occurrence to (inv position, resp position or None)."""
    h = as_history(h)
    ops, counters, open_ = {}, {}, {}
    for i, e in enumerate(h.events):
        if e.is_inv:
            k = counters.get(e.txn, 0)
            counters[e.txn] = k + 1
            op = OpOccurrence(e.txn, k)
            ops[op] = (i, None)
            open_[e.txn] = op
        else:
            op = open_.pop(e.txn, None)
            if op is not None:
                ops[op] = (ops[op][0], i)
    return ops


def op_precedes(h, o1, o2) -> bool:
    ops = operations(h)
    for o in (o1, o2):
        if o not in ops or ops[o][1] is None:
            raise ValueError(f"operation {o} is not a matched pair in the history")
    return ops[o1][1] < ops[o2][0]


def op_order(h) -> set:
    """Real-time order on matched operations as a set of pairs."""
    ops = {o: ir for o, ir in operations(h).items() if ir[1] is not None}
    return {(a, b) for a, (_, ra) in ops.items() for b, (ib, _) in ops.items() if ra < ib}


# --- text format -----------------------------------------------------------

class ParseError(ValueError):
    def __init__(self, line, msg):
        super().__init__(f"line {line}: {msg}")
        self.line = line


def addr_name(a: int) -> str:
    return ADDR_NAMES[a] if a < len(ADDR_NAMES) else f"a{a}"


def _addr_index(tok, table, line):
    if tok in ADDR_NAMES:
        return ADDR_NAMES.index(tok)
    if tok.startswith("a") and tok[1:].isdigit():
        return int(tok[1:])
    if tok.isdigit():
        return int(tok)
    if not tok.isidentifier():
        raise ParseError(line, f"bad address token {tok!r}")
    if tok not in table:
        table[tok] = len(ADDR_NAMES) + len(table)
    return table[tok]


_ARITY = {"B": 1, "Br": 1, "R": 2, "Rr": 2, "W": 3, "Wr": 1, "C": 1, "Cr": 1, "A": 1}


def _nat(tok, line, what):
    if not tok.isdigit():
        raise ParseError(line, f"expected {what}, got {tok!r}")
    return int(tok)


def parse_history(text: str) -> History:
    events, bounds, table = [], None, {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        toks = line.split()
        op, args = toks[0], toks[1:]
        if op == "bounds":
            if len(args) != 3:
                raise ParseError(lineno, "bounds takes T A V")
            try:
                bounds = Bounds(*(_nat(a, lineno, "bound") for a in args))
            except ValueError as exc:
                raise ParseError(lineno, str(exc)) from None
            continue
        if op not in _ARITY:
            raise ParseError(lineno, f"unknown event {op!r}")
        if len(args) != _ARITY[op]:
            raise ParseError(lineno, f"{op} expects {_ARITY[op]} argument(s), got {len(args)}")
        t = _nat(args[0], lineno, "transaction id")
        if op == "B":
            e = begin_inv(t)
        elif op == "Br":
            e = begin_resp(t)
        elif op == "R":
            e = read_inv(t, _addr_index(args[1], table, lineno))
        elif op == "Rr":
            e = read_resp(t, _nat(args[1], lineno, "value"))
        elif op == "W":
            e = write_inv(t, _addr_index(args[1], table, lineno), _nat(args[2], lineno, "value"))
        elif op == "Wr":
            e = write_resp(t)
        elif op == "C":
            e = commit_inv(t)
        elif op == "Cr":
            e = commit_resp(t)
        else:
            e = abort_resp(t)
        events.append(e)
    h = History(tuple(events), bounds)
    if bounds is not None:
        need = derive_bounds(events, min_values=1)
        if need.txns > bounds.txns or need.addrs > bounds.addrs or need.values > bounds.values:
            raise ParseError(0, f"content exceeds declared bounds {bounds}")
    return h


def format_event(e: Event) -> str:
    if e.pol == ABORT:
        return f"A {e.txn}"
    if e.pol == INV:
        if e.kind == READ:
            return f"R {e.txn} {addr_name(e.addr)}"
        if e.kind == WRITE:
            return f"W {e.txn} {addr_name(e.addr)} {e.value}"
        return f"{e.kind} {e.txn}"
    if e.kind == READ:
        return f"Rr {e.txn} {e.value}"
    return f"{e.kind}r {e.txn}"


def serialize_history(h, header=True) -> str:
    h = as_history(h)
    lines = []
    if header:
        b = h.bounds
        lines.append(f"bounds {b.txns} {b.addrs} {b.values}")
    lines.extend(format_event(e) for e in h.events)
    return "\n".join(lines) + "\n"


def parse_many(text: str) -> list:
    """Blank-line separated blocks, each a history (used by ``enumerate``)."""
    blocks, cur = [], []
    for raw in text.splitlines():
        if raw.strip() == "":
            if cur:
                blocks.append("\n".join(cur))
                cur = []
        else:
            cur.append(raw)
    if cur:
        blocks.append("\n".join(cur))
    return [parse_history(b) for b in blocks]


def concat(*parts: Iterable[Event]) -> tuple:
    out = []
    for p in parts:
        out.extend(p)
    return tuple(out)
