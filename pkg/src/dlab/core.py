"""Exact finite dynamical systems.

A system is a bijection ``perm`` of the state space ``{0, ..., n-1}``.  Every
subset of a finite discrete space is open and closed, so closed invariant
sets are unions of cycles, minimal sets are single cycles, and the discrete
metric (distance 1 between distinct states) is the only metric ever needed.
"""
from __future__ import annotations

import dataclasses
import functools
import math
from typing import Iterable, Iterator, Sequence

from .config import CAPS
from .errors import EmptySystem, InputError, NotABijection, NotInvariant, OverflowCap


@dataclasses.dataclass(frozen=True)
class StateSet:
    """A subset of ``{0, ..., n-1}`` stored as an n-bit integer."""

    bits: int
    n: int

    def __post_init__(self):
        if self.bits < 0 or self.bits >> self.n:
            raise InputError(f"state set {self.bits:#x} not inside {self.n} states")

    @classmethod
    def of(cls, states: Iterable[int], n: int) -> "StateSet":
        bits = 0
        for s in states:
            if not 0 <= s < n:
                raise InputError(f"state {s} out of range 0..{n - 1}")
            bits |= 1 << s
        return cls(bits, n)

    @classmethod
    def full(cls, n: int) -> "StateSet":
        return cls((1 << n) - 1, n)

    @classmethod
    def empty(cls, n: int) -> "StateSet":
        return cls(0, n)

    def __iter__(self) -> Iterator[int]:
        bits = self.bits
        while bits:
            low = bits & -bits
            yield low.bit_length() - 1
            bits ^= low

    def __len__(self) -> int:
        return bin(self.bits).count("1")

    def __contains__(self, state: int) -> bool:
        return 0 <= state < self.n and bool(self.bits >> state & 1)

    def __bool__(self) -> bool:
        return self.bits != 0

    def _check(self, other: "StateSet"):
        if other.n != self.n:
            raise InputError(f"state sets over {self.n} and {other.n} states")

    def __or__(self, other: "StateSet") -> "StateSet":
        self._check(other)
        return StateSet(self.bits | other.bits, self.n)

    def __and__(self, other: "StateSet") -> "StateSet":
        self._check(other)
        return StateSet(self.bits & other.bits, self.n)

    def __sub__(self, other: "StateSet") -> "StateSet":
        self._check(other)
        return StateSet(self.bits & ~other.bits, self.n)

    def complement(self) -> "StateSet":
        return StateSet(((1 << self.n) - 1) ^ self.bits, self.n)

    def is_full(self) -> bool:
        return self.bits == (1 << self.n) - 1

    def issubset(self, other: "StateSet") -> bool:
        self._check(other)
        return self.bits & ~other.bits == 0

    def least(self) -> int:
        if not self.bits:
            raise InputError("empty state set has no least element")
        return (self.bits & -self.bits).bit_length() - 1

    def to_list(self) -> list[int]:
        return list(self)

    def __repr__(self) -> str:
        return f"StateSet({self.to_list()}, n={self.n})"


@dataclasses.dataclass(frozen=True)
class FiniteSystem:
    """A homeomorphism of a finite discrete space, i.e. a permutation."""

    perm: tuple[int, ...]

    def __post_init__(self):
        perm = tuple(int(v) for v in self.perm)
        object.__setattr__(self, "perm", perm)
        if not perm:
            raise EmptySystem("a system needs at least one state")
        n = len(perm)
        seen = [False] * n
        for i, v in enumerate(perm):
            if not 0 <= v < n:
                raise NotABijection(f"perm[{i}] = {v} is out of range 0..{n - 1}")
            if seen[v]:
                raise NotABijection(f"value {v} appears twice")
            seen[v] = True

    @property
    def n(self) -> int:
        return len(self.perm)

    def __call__(self, state: int) -> int:
        return self.perm[state]

    @functools.cached_property
    def inverse_perm(self) -> tuple[int, ...]:
        inv = [0] * self.n
        for i, v in enumerate(self.perm):
            inv[v] = i
        return tuple(inv)

    def inverse(self) -> "FiniteSystem":
        return FiniteSystem(self.inverse_perm)

    def power(self, k: int) -> "FiniteSystem":
        """The system ``(X, T^k)``; negative ``k`` allowed."""
        dec = minimal_decomposition(self)
        out = [0] * self.n
        for cycle in dec.orbits:
            m = len(cycle)
            for pos, s in enumerate(cycle):
                out[s] = cycle[(pos + k) % m]
        return FiniteSystem(tuple(out))

    def image(self, states: StateSet) -> StateSet:
        bits = 0
        for s in states:
            bits |= 1 << self.perm[s]
        return StateSet(bits, self.n)

    def preimage(self, states: StateSet) -> StateSet:
        bits = 0
        for s in states:
            bits |= 1 << self.inverse_perm[s]
        return StateSet(bits, self.n)

    def orbit(self, state: int) -> list[int]:
        out = [state]
        s = self.perm[state]
        while s != state:
            out.append(s)
            s = self.perm[s]
        return out

    @functools.cached_property
    def period(self) -> int:
        """Least k >= 1 with T^k = id (lcm of cycle lengths)."""
        return math.lcm(*minimal_decomposition(self).lengths)

    def is_invariant(self, states: StateSet) -> bool:
        return self.image(states) == states

    def to_descriptor(self) -> dict:
        return {"type": "finite", "perm": list(self.perm)}


def make_finite_system(perm: Sequence[int]) -> FiniteSystem:
    return FiniteSystem(tuple(perm))


def from_descriptor(desc: dict) -> FiniteSystem:
    if desc.get("type", "finite") != "finite":
        raise InputError(f"expected a finite system descriptor, got type {desc.get('type')!r}")
    if "perm" not in desc:
        raise InputError("finite system descriptor needs a 'perm' list")
    return make_finite_system(desc["perm"])


def cycle_system(k: int) -> FiniteSystem:
    """C_k: rotation ``i -> i+1 mod k``."""
    if k < 1:
        raise EmptySystem("cycle length must be positive")
    return FiniteSystem(tuple((i + 1) % k for i in range(k)))


def identity_system(n: int) -> FiniteSystem:
    return FiniteSystem(tuple(range(n)))


def disjoint_union(*systems: FiniteSystem) -> FiniteSystem:
    """Systems laid side by side, later ones offset by the earlier sizes."""
    perm: list[int] = []
    for s in systems:
        base = len(perm)
        perm.extend(base + v for v in s.perm)
    return FiniteSystem(tuple(perm))


def product(a: FiniteSystem, b: FiniteSystem) -> FiniteSystem:
    """Product system; state ``(x, y)`` is encoded as ``x * b.n + y``."""
    size = a.n * b.n
    if size > CAPS.max_states:
        raise OverflowCap(f"product has {size} states, cap is {CAPS.max_states}")
    nb = b.n
    return FiniteSystem(tuple(a.perm[x] * nb + b.perm[y] for x in range(a.n) for y in range(nb)))


def project(states: StateSet, na: int, nb: int) -> tuple[StateSet, StateSet]:
    """Coordinate projections of a subset of a product state space."""
    xs = ys = 0
    for s in states:
        x, y = divmod(s, nb)
        xs |= 1 << x
        ys |= 1 << y
    return StateSet(xs, na), StateSet(ys, nb)


@dataclasses.dataclass(frozen=True)
class CycleDecomposition:
    """Cycles of a permutation, ordered by least element.

    ``orbits[i]`` lists cycle ``i`` in dynamical order starting at its least
    state; ``cycle_of[s]`` is the index of the cycle containing ``s``.
    """

    orbits: tuple[tuple[int, ...], ...]
    n: int

    @functools.cached_property
    def cycles(self) -> tuple[StateSet, ...]:
        return tuple(StateSet.of(o, self.n) for o in self.orbits)

    @property
    def lengths(self) -> tuple[int, ...]:
        return tuple(len(o) for o in self.orbits)

    @functools.cached_property
    def cycle_of(self) -> tuple[int, ...]:
        out = [0] * self.n
        for i, o in enumerate(self.orbits):
            for s in o:
                out[s] = i
        return tuple(out)

    def __len__(self) -> int:
        return len(self.orbits)

    def to_json(self) -> dict:
        return {"cycles": [sorted(o) for o in self.orbits]}


@functools.lru_cache(maxsize=4096)
def minimal_decomposition(x: FiniteSystem) -> CycleDecomposition:
    seen = [False] * x.n
    orbits = []
    for start in range(x.n):
        if seen[start]:
            continue
        orbit = x.orbit(start)
        for s in orbit:
            seen[s] = True
        orbits.append(tuple(orbit))
    return CycleDecomposition(tuple(orbits), x.n)


def is_minimal(x: FiniteSystem) -> bool:
    return len(minimal_decomposition(x)) == 1


def is_transitive(x: FiniteSystem) -> bool:
    # a dense orbit in a finite discrete space is the whole space
    return len(x.orbit(0)) == x.n


def is_totally_transitive(x: FiniteSystem) -> bool:
    # T^n is the identity on an n-cycle, which is transitive only for n = 1
    return x.n == 1


def is_weakly_mixing(x: FiniteSystem) -> bool:
    return is_transitive(product(x, x))


def is_semi_simple(x: FiniteSystem) -> bool:
    """Every point lies in a cycle, hence in a minimal set."""
    dec = minimal_decomposition(x)
    return sum(dec.lengths) == x.n


def subsystem(x: FiniteSystem, states: StateSet) -> tuple[FiniteSystem, tuple[int, ...]]:
    """Restrict ``x`` to an invariant subset.

    Returns the relabelled subsystem and the original label of each new state
    (ascending order).
    """
    if not states:
        raise EmptySystem("subsystem of the empty set")
    if not x.is_invariant(states):
        raise NotInvariant(f"{states.to_list()} is not invariant")
    labels = tuple(states)
    index = {s: i for i, s in enumerate(labels)}
    return FiniteSystem(tuple(index[x.perm[s]] for s in labels)), labels


@dataclasses.dataclass(frozen=True)
class Partition:
    """A partition of the state space into blocks, canonically ordered."""

    blocks: tuple[StateSet, ...]

    def __post_init__(self):
        if not self.blocks:
            raise InputError("partition has no blocks")
        n = self.blocks[0].n
        seen = 0
        for b in self.blocks:
            if b.n != n:
                raise InputError("blocks over different state spaces")
            if not b:
                raise InputError("empty block")
            if seen & b.bits:
                raise InputError("blocks overlap")
            seen |= b.bits
        if seen != (1 << n) - 1:
            raise InputError("blocks do not cover the state space")
        object.__setattr__(self, "blocks", tuple(sorted(self.blocks, key=StateSet.least)))

    @property
    def n(self) -> int:
        return self.blocks[0].n

    @classmethod
    def from_blocks(cls, blocks: Iterable[Iterable[int]], n: int) -> "Partition":
        return cls(tuple(StateSet.of(b, n) for b in blocks))

    @classmethod
    def from_labels(cls, labels: Sequence[int]) -> "Partition":
        groups: dict[int, list[int]] = {}
        for s, lab in enumerate(labels):
            groups.setdefault(lab, []).append(s)
        return cls.from_blocks(groups.values(), len(labels))

    def labels(self) -> tuple[int, ...]:
        out = [0] * self.n
        for i, b in enumerate(self.blocks):
            for s in b:
                out[s] = i
        return tuple(out)


def quotient_map(x: FiniteSystem, p: Partition) -> tuple[int, ...]:
    """Block index of every state; raises NotInvariant unless the partition is T-invariant."""
    if p.n != x.n:
        raise InputError(f"partition over {p.n} states, system has {x.n}")
    labels = p.labels()
    for b in p.blocks:
        targets = {labels[x.perm[s]] for s in b}
        if len(targets) > 1:
            raise NotInvariant(f"image of block {b.to_list()} meets blocks {sorted(targets)}")
    return labels


def factor_by_partition(x: FiniteSystem, p: Partition) -> FiniteSystem:
    labels = quotient_map(x, p)
    return FiniteSystem(tuple(labels[x.perm[b.least()]] for b in p.blocks))


def diagonal(n: int) -> frozenset[tuple[int, int]]:
    return frozenset((i, i) for i in range(n))


def proximal_relation(x: FiniteSystem) -> frozenset[tuple[int, int]]:
    """Proximal pairs: always the diagonal.

    For x != y, T^k x != T^k y for every k because T^k is a bijection, so the
    discrete distance stays 1 along the whole orbit.
    """
    return diagonal(x.n)


def regionally_proximal(x: FiniteSystem) -> frozenset[tuple[int, int]]:
    """Q(X): the diagonal.

    Convergent sequences in a discrete space are eventually constant, so the
    defining sequences force x = y; every finite system is its own maximal
    equicontinuous factor.
    """
    return diagonal(x.n)


def random_system(rng, n: int) -> FiniteSystem:
    perm = list(range(n))
    rng.shuffle(perm)
    return FiniteSystem(tuple(perm))


def random_invariant_partition(rng, x: FiniteSystem) -> Partition:
    """A random T-invariant partition.

    Each cycle of length m is folded onto a divisor d of m (state at position
    i goes to residue i mod d); cycles folded to the same d may then be
    aligned with a random phase and merged.
    """
    dec = minimal_decomposition(x)
    labels = [0] * x.n
    # representative residue classes, keyed by divisor d
    classes: dict[int, list[list[int]]] = {}
    for orbit in dec.orbits:
        m = len(orbit)
        d = rng.choice([k for k in range(1, m + 1) if m % k == 0])
        groups = [[orbit[i] for i in range(r, m, d)] for r in range(d)]
        pool = classes.setdefault(d, [])
        if pool and rng.random() < 0.5:
            target = rng.choice(pool)
            shift = rng.randrange(d)
            for r in range(d):
                target[(r + shift) % d].extend(groups[r])
        else:
            pool.append(groups)
    label = 0
    for pool in classes.values():
        for groups in pool:
            for g in groups:
                for s in g:
                    labels[s] = label
                label += 1
    return Partition.from_labels(labels)
