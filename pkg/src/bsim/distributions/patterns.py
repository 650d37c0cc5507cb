"""Occupation-pattern spaces and their deterministic enumeration."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from math import comb

import numpy as np

MAX_PATTERNS = 10**6

KINDS = ("collision-free", "max-occupancy-2", "fixed-n", "full-truncated")


class DomainTooLargeError(ValueError):
    """Pattern space exceeds the enumeration guard."""


@dataclass(frozen=True)
class Domain:
    """A set of m-mode patterns.

    collision-free: n photons, at most one per mode.
    max-occupancy-2: n photons, at most two per mode.
    fixed-n: n photons, any occupancy.
    full-truncated: every pattern with at most n photons.
    """

    kind: str
    m: int
    n: int

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown domain kind {self.kind!r}; choose from {KINDS}")
        if self.m < 0 or self.n < 0:
            raise ValueError("mode and photon counts must be non-negative")

    @property
    def tag(self) -> str:
        return f"{self.kind}-{self.n}"

    def size(self) -> int:
        return domain_size(self.kind, self.m, self.n)

    def contains(self, pattern) -> bool:
        p = tuple(pattern)
        if len(p) != self.m or any(k < 0 for k in p):
            return False
        total = sum(p)
        if self.kind == "full-truncated":
            return total <= self.n
        if total != self.n:
            return False
        cap = {"collision-free": 1, "max-occupancy-2": 2}.get(self.kind)
        return cap is None or max(p, default=0) <= cap

    def patterns(self) -> list[tuple[int, ...]]:
        return enumerate_patterns(self.m, self.n, self.kind)


def _bounded_count(m: int, n: int, cap: int) -> int:
    # ways to place n photons in m modes with at most `cap` per mode
    ways = [1] + [0] * n
    for _ in range(m):
        ways = [sum(ways[t - c] for c in range(min(cap, t) + 1)) for t in range(n + 1)]
    return ways[n]


def domain_size(kind: str, m: int, n: int) -> int:
    if kind == "collision-free":
        return comb(m, n)
    if kind == "max-occupancy-2":
        return _bounded_count(m, n, 2)
    if kind == "fixed-n":
        return comb(m + n - 1, n) if m else int(n == 0)
    if kind == "full-truncated":
        return comb(m + n, n) if m else 1
    raise ValueError(f"unknown domain kind {kind!r}")


def _from_modes(m: int, modes) -> tuple[int, ...]:
    out = [0] * m
    for q in modes:
        out[q] += 1
    return tuple(out)


def enumerate_patterns(m: int, n: int, kind: str = "collision-free") -> list[tuple[int, ...]]:
    """All patterns of a domain, ordered by their sorted lists of occupied modes.

    For collision-free patterns this is (0,1,2), (0,1,3), ... in zero-based
    mode labels.
    """
    size = domain_size(kind, m, n)
    if size > MAX_PATTERNS:
        raise DomainTooLargeError(
            f"{kind} domain with m={m}, n={n} has {size} patterns (limit {MAX_PATTERNS}); "
            "reduce the photon number or mode count"
        )
    if kind == "full-truncated":
        return [p for t in range(n + 1) for p in enumerate_patterns(m, t, "fixed-n")]
    if kind == "collision-free":
        return [_from_modes(m, c) for c in itertools.combinations(range(m), n)]
    pats = (_from_modes(m, c) for c in itertools.combinations_with_replacement(range(m), n))
    if kind == "max-occupancy-2":
        return [p for p in pats if max(p, default=0) <= 2]
    return list(pats)


@lru_cache(maxsize=64)
def pattern_array(m: int, n: int, kind: str) -> np.ndarray:
    """Enumerated patterns as a read-only (count, m) int64 array."""
    pats = enumerate_patterns(m, n, kind)
    arr = np.array(pats, dtype=np.int64).reshape(len(pats), m)
    arr.setflags(write=False)
    return arr


def pattern_label(pattern) -> str:
    """Comma-joined occupations, as used in CSV exports."""
    return ",".join(str(int(k)) for k in pattern)


def parse_pattern(text: str) -> tuple[int, ...]:
    text = text.strip()
    return tuple(int(t) for t in text.split(",")) if text else ()
