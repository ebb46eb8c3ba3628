"""Bounded verification of software transactional memory via linearizability."""
from .history import Bounds, Event, History, parse_history, serialize_history

__version__ = "0.1.0"

__all__ = ["Bounds", "Event", "History", "parse_history", "serialize_history", "__version__"]
