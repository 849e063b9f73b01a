"""Capacity caps for the exhaustive computations.

Defaults can be overridden with the ``HYPERTREE_CAPS`` environment variable,
a comma separated list of ``key=value`` pairs, e.g.
``HYPERTREE_CAPS="coset=24,ambient=22"``.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, fields, replace

ENV_VAR = "HYPERTREE_CAPS"


@dataclass(frozen=True)
class Caps:
    #: max rank of the coboundary space walked by the Gray-code coset search
    coset: int = 30
    #: max dim C^i for exact expansion constants
    ambient: int = 25
    #: max candidate face sets in exhaustive hypertree enumeration
    enumeration: int = 1_000_000
    #: max vertex count for the exhaustive skeleton-expansion search
    skeleton: int = 22
    #: max ground-set size for which hypertree kernels are materialized densely
    dense: int = 4096

    def as_dict(self) -> dict[str, int]:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def parse_caps(text: str, base: Caps | None = None) -> Caps:
    """Parse ``key=value[,key=value...]`` into a :class:`Caps`."""
    base = base or Caps()
    known = {f.name for f in fields(Caps)}
    updates = {}
    for item in filter(None, (s.strip() for s in text.split(","))):
        key, sep, value = item.partition("=")
        key = key.strip()
        if not sep or key not in known:
            raise ValueError(f"bad cap specification {item!r}; known caps: {sorted(known)}")
        updates[key] = int(value)
    return replace(base, **updates)


def default_caps() -> Caps:
    text = os.environ.get(ENV_VAR)
    return parse_caps(text) if text else Caps()
