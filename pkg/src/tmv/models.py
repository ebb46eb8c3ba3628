"""Look up automata by name, as used on the command line."""
from __future__ import annotations

from .history import Bounds
from .stm import norec, norec_cga, ronorec, ronorec_cga, tml, tml_cga
from .tms import TMS2, TMS3, TMS
from .tso import tso_wrap

_FINE = {"tml": tml, "norec": norec, "ronorec": ronorec}
_ATOMIC = {
    "tml-cga": tml_cga,
    "norec-cga": norec_cga,
    "ronorec-cga": ronorec_cga,
    "tms2": lambda b: TMS(b, TMS2),
    "tms3": lambda b: TMS(b, TMS3),
}

MODEL_NAMES = tuple(_FINE) + tuple(_ATOMIC)


def build_model(name: str, bounds: Bounds, tso: bool = False, bufsize: int = 2):
    """Build the named automaton.  ``tso`` only affects the fine-grained
    algorithms; abstractions and specifications have no shared memory
    accesses to buffer."""
    if name in _FINE:
        return tso_wrap(name, bounds, bufsize) if tso else _FINE[name](bounds)
    if name in _ATOMIC:
        return _ATOMIC[name](bounds)
    raise ValueError(f"unknown model {name!r}; choose from {', '.join(MODEL_NAMES)}")
