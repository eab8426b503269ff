"""The induced system on nonempty subsets, the order function and quasifactors.

Subsets are n-bit integer codes.  The Hausdorff metric over the discrete
metric is itself the 0/1 metric, so the hyperspace is discrete too: every map
is continuous, quasifactors of a minimal system are just the cycles of the
induced map, and joining fibres need no closure.
"""
from __future__ import annotations

import dataclasses
import functools
import itertools
import math
from collections import Counter
from typing import Iterator, Sequence

import numpy as np

from .config import CAPS
from .core import FiniteSystem, StateSet, is_minimal, minimal_decomposition
from .errors import (
    BaseMismatch,
    CapExceeded,
    EmptySet,
    InfiniteOrder,
    InputError,
    NotAJoining,
    NotDisjoint,
    NotMinimal,
    YNotMinimal,
)
from .joinings import is_joining


@functools.total_ordering
@dataclasses.dataclass(frozen=True)
class OrdValue:
    """``ord(A)``: a positive integer, or infinite when ``value`` is None."""

    value: int | None

    @property
    def infinite(self) -> bool:
        return self.value is None

    def __lt__(self, other: "OrdValue") -> bool:
        if self.infinite:
            return False
        return other.infinite or self.value < other.value

    def __str__(self) -> str:
        return "inf" if self.infinite else str(self.value)

    def to_json(self):
        return "inf" if self.infinite else self.value


INFINITE = OrdValue(None)


def _check_hyperspace_size(n: int):
    if n > CAPS.max_hyperspace_states:
        raise CapExceeded(f"hyperspace of {n} states exceeds cap {CAPS.max_hyperspace_states}")


def image_code(x: FiniteSystem, code: int) -> int:
    out = 0
    perm = x.perm
    while code:
        low = code & -code
        out |= 1 << perm[low.bit_length() - 1]
        code ^= low
    return out


@dataclasses.dataclass(frozen=True, eq=False)
class InducedSystem:
    """``A -> TA`` on the 2**n - 1 nonempty subsets of the base."""

    base: FiniteSystem

    def __post_init__(self):
        _check_hyperspace_size(self.base.n)

    @property
    def size(self) -> int:
        return (1 << self.base.n) - 1

    @functools.cached_property
    def table(self) -> np.ndarray | None:
        """Image of every code (index 0 is the empty set), or None above the table cap."""
        n = self.base.n
        if n > CAPS.table_bits:
            return None
        table = np.zeros(1 << n, dtype=np.uint32)
        for i, target in enumerate(self.base.perm):
            lo = 1 << i
            table[lo : 2 * lo] = table[:lo] | np.uint32(1 << target)
        return table

    def __call__(self, code: int) -> int:
        table = self.table
        if table is not None:
            return int(table[code])
        return image_code(self.base, code)

    def orbit(self, code: int) -> list[int]:
        out = [code]
        nxt = self(code)
        while nxt != code:
            out.append(nxt)
            nxt = self(nxt)
        return out

    def cycles(self) -> Iterator[list[int]]:
        """Cycles of the induced map, ordered by least code, each starting there."""
        table = self.table
        if table is None:
            seen = bytearray(1 << self.base.n)
            for code in range(1, 1 << self.base.n):
                if not seen[code]:
                    orbit = self.orbit(code)
                    for c in orbit:
                        seen[c] = 1
                    yield orbit
            return
        # least code on each orbit, computed for all codes at once
        codes = np.arange(table.size, dtype=np.uint32)
        least = codes.copy()
        cur = codes
        for _ in range(self.base.period - 1):
            cur = table[cur]
            np.minimum(least, cur, out=least)
        for rep in np.flatnonzero(least == codes)[1:]:
            yield self.orbit(int(rep))


def induced_system(x: FiniteSystem) -> InducedSystem:
    return InducedSystem(x)


def _full_cycle_inside(x: FiniteSystem, code: int) -> bool:
    return any(c.bits & code == c.bits for c in minimal_decomposition(x).cycles)


def ord(x: FiniteSystem, a: StateSet) -> OrdValue:
    """Largest k with A ∩ TA ∩ ... ∩ T^(k-1)A nonempty.

    A point lies in every such intersection iff its whole backward orbit stays
    in A, i.e. A contains its cycle; otherwise the intersections shrink to
    the empty set within the cycle lengths.
    """
    if a.n != x.n:
        raise InputError(f"set over {a.n} states, system has {x.n}")
    if not a:
        raise EmptySet("ord is defined for nonempty sets")
    if _full_cycle_inside(x, a.bits):
        return INFINITE
    # I_{k+1} = A ∩ T(I_k)
    k, cur = 1, a.bits
    while True:
        cur = a.bits & image_code(x, cur)
        if not cur:
            return OrdValue(k)
        k += 1


def _rotate(code: int, n: int) -> int:
    # shift positions along the cycle by one
    return ((code << 1) | (code >> (n - 1))) & ((1 << n) - 1)


def _necklaces(n: int) -> Iterator[tuple[int, int]]:
    """Binary necklaces of length n as (code, primitive period), FKM order."""
    a = [0] * (n + 1)

    def gen(t: int, p: int):
        if t > n:
            if n % p == 0:
                code = 0
                for i in range(n):
                    if a[i + 1]:
                        code |= 1 << i
                yield code, p
            return
        a[t] = a[t - p]
        yield from gen(t + 1, p)
        if a[t - p] == 0:
            a[t] = 1
            yield from gen(t + 1, t)

    yield from gen(1, 1)


class _Relabel:
    """Maps position codes along a single cycle to state codes."""

    def __init__(self, orbit: Sequence[int]):
        self.orbit = tuple(orbit)
        self.identity = self.orbit == tuple(range(len(orbit)))
        self.tables = []
        for start in range(0, len(orbit), 8):
            chunk = self.orbit[start : start + 8]
            table = [0] * 256
            for byte in range(256):
                bits = 0
                for j, s in enumerate(chunk):
                    if byte >> j & 1:
                        bits |= 1 << s
                table[byte] = bits
            self.tables.append(table)

    def __call__(self, code: int) -> int:
        if self.identity:
            return code
        out = 0
        for i, table in enumerate(self.tables):
            out |= table[(code >> (8 * i)) & 255]
        return out


def _position_ord(code: int, n: int) -> OrdValue:
    full = (1 << n) - 1
    if code == full:
        return INFINITE
    k, cur = 1, code
    while True:
        cur = code & _rotate(cur, n)
        if not cur:
            return OrdValue(k)
        k += 1


@dataclasses.dataclass(frozen=True, eq=False)
class Quasifactor:
    """One cycle of the induced system of a minimal base.

    ``elements[0]`` is the member with the least code; later elements follow
    the induced map.
    """

    base: FiniteSystem
    elements: tuple[StateSet, ...]
    order: OrdValue

    @property
    def length(self) -> int:
        return len(self.elements)

    @property
    def trivial(self) -> bool:
        return self.elements[0].is_full()

    def codes(self) -> list[int]:
        return [e.bits for e in self.elements]

    def to_json(self) -> dict:
        return {
            "length": self.length,
            "order": self.order.to_json(),
            "trivial": self.trivial,
            "representative": self.elements[0].to_list(),
        }


def _require_minimal(x: FiniteSystem, exc=NotMinimal):
    if not is_minimal(x):
        raise exc("base system must be minimal (a single cycle)")


def quasifactors(x: FiniteSystem) -> list[Quasifactor]:
    """Every quasifactor of the minimal system ``x``, including the trivial {X}.

    Subsets of an n-cycle are binary words up to rotation, so the cycles of
    the induced map are enumerated as binary necklaces.
    """
    _require_minimal(x)
    _check_hyperspace_size(x.n)
    n = x.n
    relabel = _Relabel(minimal_decomposition(x).orbits[0])
    found = []
    for code, period in _necklaces(n):
        if not code:
            continue
        states = []
        cur = code
        for _ in range(period):
            states.append(relabel(cur))
            cur = _rotate(cur, n)
        start = states.index(min(states))
        states = states[start:] + states[:start]
        found.append((states, _position_ord(code, n)))
    found.sort(key=lambda item: item[0][0])
    return [Quasifactor(x, tuple(StateSet(c, n) for c in states), order) for states, order in found]


def quasifactor_census(x: FiniteSystem) -> list[tuple[int, OrdValue, int]]:
    """(length, order, count) rows sorted by length then order."""
    counts = Counter((q.length, q.order) for q in quasifactors(x))
    return sorted(((length, order, c) for (length, order), c in counts.items()), key=lambda r: (r[0], r[1]))


def _same_base(q1: Quasifactor, q2: Quasifactor):
    if q1.base != q2.base:
        raise BaseMismatch("quasifactors live over different base systems")


def quasifactor_disjoint(q1: Quasifactor, q2: Quasifactor) -> bool:
    # both are cycles, and cycles are disjoint iff their lengths are coprime
    _same_base(q1, q2)
    return math.gcd(q1.length, q2.length) == 1


class Counterexample(tuple):
    """A failing pair of sets; falsy so that checks read as booleans."""

    def __new__(cls, a: StateSet, b: StateSet):
        return super().__new__(cls, (a, b))

    def __bool__(self) -> bool:
        return False

    def __repr__(self) -> str:
        return f"Counterexample({self[0].to_list()}, {self[1].to_list()})"


def check_union_covers(x: FiniteSystem, q: Quasifactor) -> bool:
    _require_minimal(x)
    if q.base != x:
        raise BaseMismatch("quasifactor is over another base")
    bits = 0
    for e in q.elements:
        bits |= e.bits
    return bits == (1 << x.n) - 1


def check_pairwise_meet(q1: Quasifactor, q2: Quasifactor):
    """True if every A in q1 meets every B in q2, else the first failing pair."""
    if not quasifactor_disjoint(q1, q2):
        raise NotDisjoint("quasifactors are not disjoint")
    for a in q1.elements:
        for b in q2.elements:
            if not a.bits & b.bits:
                return Counterexample(a, b)
    return True


def check_small_disjoint(q1: Quasifactor, q2: Quasifactor):
    """True if A ∩ TB ∩ ... ∩ T^k B is nonempty for all A in q1, B in q2 (k = ord q2)."""
    if not quasifactor_disjoint(q1, q2):
        raise NotDisjoint("quasifactors are not disjoint")
    if q2.order.infinite:
        raise InfiniteOrder("second quasifactor has infinite order")
    base = q1.base
    k = q2.order.value
    for b in q2.elements:
        shifted = (1 << base.n) - 1
        cur = b.bits
        for _ in range(k):
            cur = image_code(base, cur)
            shifted &= cur
        for a in q1.elements:
            if not a.bits & shifted:
                return Counterexample(a, b)
    return True


def check_family_separation(family: Sequence[Quasifactor]):
    """Shifted-intersection condition over all ordered pairs of a disjoint family."""
    for q1, q2 in itertools.permutations(family, 2):
        verdict = check_small_disjoint(q1, q2)
        if not verdict:
            return verdict
    return True


def _max_coprime_subset(lengths: Sequence[int]) -> list[int]:
    best: list[int] = []

    def search(i: int, chosen: list[int]):
        nonlocal best
        if len(chosen) + len(lengths) - i <= len(best):
            return
        if i == len(lengths):
            best = list(chosen)
            return
        if all(math.gcd(lengths[i], c) == 1 for c in chosen):
            chosen.append(lengths[i])
            search(i + 1, chosen)
            chosen.pop()
        search(i + 1, chosen)

    search(0, [])
    return best


def max_disjoint_family(x: FiniteSystem) -> list[Quasifactor]:
    """A largest family of pairwise disjoint non-trivial quasifactors.

    Equal lengths >= 2 are never coprime, so the search runs over the set of
    lengths that occur; each chosen length is realised by its first
    quasifactor in canonical order.
    """
    _require_minimal(x)
    if x.n > 20:
        raise CapExceeded(f"family search capped at 20 states, got {x.n}")
    first_of_length: dict[int, Quasifactor] = {}
    for q in quasifactors(x):
        if not q.trivial:
            first_of_length.setdefault(q.length, q)
    lengths = sorted(first_of_length)
    return [first_of_length[k] for k in _max_coprime_subset(lengths)]


def joining_quasifactor(x: FiniteSystem, y: FiniteSystem, j: StateSet) -> list[StateSet]:
    """The fibres J[y] = {x : (x, y) in J}, one per distinct fibre, along y's orbit."""
    if not is_joining(x, y, j):
        raise NotAJoining("set is not a joining of the two systems")
    _require_minimal(y, YNotMinimal)
    fibres = [0] * y.n
    for s in j:
        a, b = divmod(s, y.n)
        fibres[b] |= 1 << a
    out: list[StateSet] = []
    for b in y.orbit(0):
        f = StateSet(fibres[b], x.n)
        if f not in out:
            out.append(f)
    return out


def induced_dot(x: FiniteSystem, max_size: int) -> str:
    """DOT graph of the induced map restricted to subsets of size <= max_size."""
    _check_hyperspace_size(x.n)
    lines = ["digraph induced {"]
    for code in range(1, 1 << x.n):
        if bin(code).count("1") > max_size:
            continue
        src = StateSet(code, x.n).to_list()
        dst = StateSet(image_code(x, code), x.n).to_list()
        lines.append(f'  "{src}" -> "{dst}";')
    lines.append("}")
    return "\n".join(lines) + "\n"

