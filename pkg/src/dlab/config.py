"""Size caps for the exponential enumerations.

Defaults can be overridden with the ``DLAB_MAX_STATES`` environment variable
(state-space cap) or temporarily with :func:`override`.
"""
from __future__ import annotations

import contextlib
import dataclasses
import os


@dataclasses.dataclass
class Caps:
    max_states: int = 4096
    # subsets are enumerated as n-bit codes
    max_hyperspace_states: int = 26
    # 2**cycles enumerations (invariant subsets, joining oracle)
    max_cycles: int = 24
    # induced map is tabulated up to 2**table_bits subsets
    table_bits: int = 22
    # explicit p-block word graphs
    max_block_words: int = 1 << 18
    # period window used by hitting_compat_set
    max_period: int = 1 << 20
    max_vertices: int = 1 << 12


def _from_env() -> Caps:
    caps = Caps()
    raw = os.environ.get("DLAB_MAX_STATES")
    if raw:
        caps.max_states = int(raw)
    return caps


CAPS = _from_env()


@contextlib.contextmanager
def override(**changes):
    """Temporarily change caps, e.g. ``with override(max_states=100): ...``."""
    saved = dataclasses.replace(CAPS)
    for key, value in changes.items():
        if not hasattr(CAPS, key):
            raise AttributeError(key)
        setattr(CAPS, key, value)
    try:
        yield CAPS
    finally:
        for field in dataclasses.fields(Caps):
            setattr(CAPS, field.name, getattr(saved, field.name))
