"""Total store order: per-transaction FIFO store buffers plus a flusher.

Stores enqueue into the writer's buffer (and wait while it is full);
loads forward from the newest matching entry of the reader's own buffer;
``cas`` acts as a fence and is only enabled once the caller's buffer has
drained; one ``flush(t)`` step moves the oldest entry of ``t``'s buffer
to shared memory and may happen at any time.
"""
from __future__ import annotations

from .automaton import Internal
from .history import Bounds
from .stm.fine import Norec, RoNorec, Tml
from .tms import set_at


class TSOMemory:
    def __init__(self, bufsize: int):
        if bufsize < 1:
            raise ValueError("buffer size must be at least 1")
        self.bufsize = bufsize
        self.name = f"tso{bufsize}"

    def start_bufs(self, txns):
        return ((),) * txns

    def load(self, s, t, var):
        for v, val in reversed(s.bufs[t]):
            if v == var:
                return val
        return s.shared[var]

    def store(self, s, t, var, val):
        buf = s.bufs[t]
        if len(buf) >= self.bufsize:
            return None
        return s.shared, set_at(s.bufs, t, buf + ((var, val),))

    def cas(self, s, t, var, expected, new):
        if s.bufs[t]:
            return None
        if s.shared[var] == expected:
            return True, set_at(s.shared, var, new), s.bufs
        return False, s.shared, s.bufs

    def background(self, s):
        out = []
        for t, buf in enumerate(s.bufs):
            if buf:
                var, val = buf[0]
                out.append((Internal("flush", t), (set_at(s.shared, var, val), set_at(s.bufs, t, buf[1:]))))
        return out


_BASES = {"tml": Tml, "norec": Norec, "ronorec": RoNorec}


def tso_wrap(model: str, bounds: Bounds, bufsize: int = 2):
    """The fine-grained ``model`` running on TSO memory."""
    try:
        cls = _BASES[model]
    except KeyError:
        raise ValueError(f"no TSO variant for model {model!r}") from None
    return cls(bounds, TSOMemory(bufsize))
