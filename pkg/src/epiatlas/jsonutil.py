"""Canonical JSON serialization.

Sorted keys, no whitespace, shortest round-trip float formatting, ASCII
escapes.  Two equal values always serialize to identical bytes, which is
what makes byte-equality checks between the HTTP API and CLI exports
meaningful.
"""
from __future__ import annotations

import json
from typing import Any


def canonical(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False)


def canonical_bytes(obj: Any) -> bytes:
    return canonical(obj).encode("utf-8")


def clean_float(x: float) -> float:
    """Normalize -0.0 to 0.0 so serialized output has one zero."""
    return 0.0 if x == 0.0 else float(x)
