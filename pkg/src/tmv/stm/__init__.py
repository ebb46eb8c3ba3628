"""STM models: fine-grained algorithms and their coarse-grained abstractions."""
from .cga import NorecCga, RoNorecCga, TmlCga, norec_cga, ronorec_cga, tml_cga
from .fine import Norec, RoNorec, Tml, norec, ronorec, tml

MODELS = ("tml", "tml-cga", "norec", "norec-cga", "ronorec", "ronorec-cga")

__all__ = [
    "MODELS", "Norec", "NorecCga", "RoNorec", "RoNorecCga", "Tml", "TmlCga",
    "norec", "norec_cga", "ronorec", "ronorec_cga", "tml", "tml_cga",
]
