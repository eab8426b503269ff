"""Finite measure-preserving systems and their joining polytopes.

Every invariant probability measure of a permutation is constant on each
cycle: invariance gives mu(T s) = mu(s), and following a cycle returns to the
start.  So invariant measures on a product are exactly convex combinations
of the uniform measures on product cycles, and a joining of two finite MPTs
is a nonnegative weight per product cycle subject to the two marginal
equations.  The feasible set is a polytope; the product measure always lies
in it, and it puts positive weight on every product cycle that avoids the
null states.  Cycles through a null state are forced to weight zero, so the
affine dimension of the polytope equals the nullity of the marginal system
restricted to the remaining cycles.

All arithmetic is exact (``fractions.Fraction``); nothing here has a
tolerance.
"""
from __future__ import annotations

import dataclasses
import itertools
from fractions import Fraction
from typing import Sequence

from .config import CAPS
from .core import FiniteSystem, StateSet, cycle_system, minimal_decomposition, product, subsystem
from .errors import (
    CapExceeded,
    InputError,
    InternalInconsistency,
    NotInvariant,
    NotProbability,
    PreconditionFailed,
)


def _fraction(value) -> Fraction:
    try:
        return Fraction(value)
    except (ValueError, TypeError, ZeroDivisionError) as exc:
        raise InputError(f"cannot read {value!r} as a rational") from exc


@dataclasses.dataclass(frozen=True)
class FiniteMPT:
    sys: FiniteSystem
    mu: tuple[Fraction, ...]

    def __post_init__(self):
        mu = tuple(_fraction(v) for v in self.mu)
        object.__setattr__(self, "mu", mu)
        if len(mu) != self.sys.n:
            raise InputError(f"mu has {len(mu)} entries for {self.sys.n} states")
        if any(v < 0 for v in mu):
            raise NotProbability("negative mass")
        if sum(mu) != 1:
            raise NotProbability(f"masses sum to {sum(mu)}, not 1")
        for i, v in enumerate(self.sys.perm):
            if mu[v] != mu[i]:
                raise NotInvariant(f"mu[{i}] = {mu[i]} but mu[T({i})] = {mu[v]}")

    @property
    def n(self) -> int:
        return self.sys.n

    def to_descriptor(self) -> dict:
        return {"type": "mpt", "perm": list(self.sys.perm), "mu": [str(v) for v in self.mu]}


def make_mpt(perm: Sequence[int], mu: Sequence) -> FiniteMPT:
    return FiniteMPT(FiniteSystem(tuple(perm)), tuple(mu))


def from_descriptor(desc: dict) -> FiniteMPT:
    if desc.get("type") != "mpt":
        raise InputError(f"expected an mpt descriptor, got type {desc.get('type')!r}")
    for key in ("perm", "mu"):
        if key not in desc:
            raise InputError(f"mpt descriptor needs {key!r}")
    return make_mpt(desc["perm"], desc["mu"])


def uniform(x: FiniteSystem) -> FiniteMPT:
    """Uniform measure; invariant for every permutation."""
    return FiniteMPT(x, tuple(Fraction(1, x.n) for _ in range(x.n)))


def uniform_cycle(k: int) -> FiniteMPT:
    return uniform(cycle_system(k))


@dataclasses.dataclass(frozen=True)
class ErgodicComponent:
    cycle: StateSet
    weight: Fraction

    @property
    def null(self) -> bool:
        return self.weight == 0


def ergodic_components(m: FiniteMPT) -> list[ErgodicComponent]:
    return [
        ErgodicComponent(c, sum((m.mu[s] for s in c), Fraction(0)))
        for c in minimal_decomposition(m.sys).cycles
    ]


def component_system(m: FiniteMPT, comp: ErgodicComponent) -> FiniteMPT:
    """A positive-weight component as an ergodic MPT (uniform on its cycle)."""
    if comp.null:
        raise InputError("null components carry no normalised measure")
    sub, _ = subsystem(m.sys, comp.cycle)
    return uniform(sub)


def rref(rows: list[list[Fraction]]) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row echelon form over the rationals; returns (matrix, pivot columns)."""
    m = [list(r) for r in rows]
    if not m:
        return m, []
    ncols = len(m[0])
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        pivot = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if pivot is None:
            continue
        m[r], m[pivot] = m[pivot], m[r]
        lead = m[r][c]
        m[r] = [v / lead for v in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                factor = m[i][c]
                m[i] = [a - factor * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return m[:r], pivots


def rank(rows: list[list[Fraction]]) -> int:
    return len(rref(rows)[1])


def solve_unique(rows: list[list[Fraction]], rhs: list[Fraction]) -> list[Fraction] | None:
    """Unique solution of rows * w = rhs, or None if inconsistent or underdetermined."""
    if not rows:
        return None
    ncols = len(rows[0])
    aug = [list(r) + [b] for r, b in zip(rows, rhs)]
    red, pivots = rref(aug)
    if ncols in pivots or len(pivots) != ncols:
        return None
    return [red[i][-1] for i in range(ncols)]


@dataclasses.dataclass(frozen=True)
class JoiningPolytope:
    """Joinings as weights on product cycles (weight = total mass of the cycle)."""

    m1: FiniteMPT
    m2: FiniteMPT
    cycles: tuple[StateSet, ...]
    equality_system: tuple[tuple[tuple[Fraction, ...], ...], tuple[Fraction, ...]]
    # cycles through a null state, forced to weight 0
    forced_zero: frozenset[int]
    dimension: int
    product_weights: tuple[Fraction, ...]

    @property
    def variables(self) -> int:
        return len(self.cycles)

    def is_feasible(self, weights: Sequence[Fraction]) -> bool:
        rows, rhs = self.equality_system
        if len(weights) != self.variables or any(w < 0 for w in weights):
            return False
        return all(sum(a * w for a, w in zip(r, weights)) == b for r, b in zip(rows, rhs))

    def vertices(self) -> list[tuple[Fraction, ...]]:
        """Basic feasible solutions, enumerated over supports (capped).

        Sorted descending, so vertices weighting the earliest cycles come first.
        """
        free = [i for i in range(self.variables) if i not in self.forced_zero]
        rows, rhs = self.equality_system
        if len(free) > 20:
            raise CapExceeded(f"vertex enumeration over {len(free)} free cycles")
        r = rank([[row[i] for i in free] for row in rows])
        found: set[tuple[Fraction, ...]] = set()
        for size in range(1, r + 1):
            for support in itertools.combinations(free, size):
                sub = [[row[i] for i in support] for row in rows]
                sol = solve_unique(sub, list(rhs))
                if sol is None or any(v < 0 for v in sol):
                    continue
                w = [Fraction(0)] * self.variables
                for i, v in zip(support, sol):
                    w[i] = v
                found.add(tuple(w))
                if len(found) > CAPS.max_vertices:
                    raise CapExceeded(f"more than {CAPS.max_vertices} vertices")
        return sorted(found, reverse=True)


def joining_polytope(m1: FiniteMPT, m2: FiniteMPT) -> JoiningPolytope:
    x, y = m1.sys, m2.sys
    prod = product(x, y)
    cycles = minimal_decomposition(prod).cycles
    nb = y.n
    # coefficient of w_g in the equation for state s: visits of g to s's fibre / |g|
    x_rows = [[Fraction(0)] * len(cycles) for _ in range(x.n)]
    y_rows = [[Fraction(0)] * len(cycles) for _ in range(y.n)]
    for g, c in enumerate(cycles):
        length = len(c)
        for s in c:
            a, b = divmod(s, nb)
            x_rows[a][g] += Fraction(1, length)
            y_rows[b][g] += Fraction(1, length)
    rows = x_rows + y_rows
    rhs = list(m1.mu) + list(m2.mu)

    forced = frozenset(
        g
        for g, c in enumerate(cycles)
        if any(m1.mu[s // nb] == 0 or m2.mu[s % nb] == 0 for s in c)
    )
    product_weights = tuple(
        sum((m1.mu[s // nb] * m2.mu[s % nb] for s in c), Fraction(0)) for c in cycles
    )
    free = [g for g in range(len(cycles)) if g not in forced]
    dimension = len(free) - rank([[r[g] for g in free] for r in rows])
    poly = JoiningPolytope(
        m1, m2, cycles, (tuple(map(tuple, rows)), tuple(rhs)), forced, dimension, product_weights
    )
    if not poly.is_feasible(product_weights):
        raise InternalInconsistency("product measure is not a feasible joining")
    if any(product_weights[g] == 0 for g in free):
        raise InternalInconsistency("product measure vanishes on a free cycle")
    return poly


@dataclasses.dataclass(frozen=True)
class MeasureDisjointness:
    disjoint: bool
    polytope: JoiningPolytope
    witness: tuple[Fraction, ...] | None = None

    def __bool__(self) -> bool:
        return self.disjoint


def is_measure_disjoint(m1: FiniteMPT, m2: FiniteMPT) -> MeasureDisjointness:
    poly = joining_polytope(m1, m2)
    if poly.dimension == 0:
        return MeasureDisjointness(True, poly)
    for v in poly.vertices():
        if v != poly.product_weights:
            return MeasureDisjointness(False, poly, v)
    raise InternalInconsistency("positive-dimensional polytope with a single vertex")


def validate_measure_witness(m1: FiniteMPT, m2: FiniteMPT, weights: Sequence) -> bool:
    """A replayable witness is a feasible joining different from the product."""
    poly = joining_polytope(m1, m2)
    w = tuple(_fraction(v) for v in weights)
    return poly.is_feasible(w) and w != poly.product_weights


def _max_cycle_length(m: FiniteMPT) -> int:
    return max(minimal_decomposition(m.sys).lengths)


def restrict_to_support(m: FiniteMPT) -> FiniteMPT:
    """The same MPT on its support; joinings never charge null states."""
    support = StateSet.of((s for s in range(m.n) if m.mu[s] > 0), m.n)
    sub, labels = subsystem(m.sys, support)
    return FiniteMPT(sub, tuple(m.mu[s] for s in labels))


def disjoint_from_all_cycles(m: FiniteMPT, bound: int | None = None) -> bool:
    """m ⊥ C_p (uniform) for every p up to ``bound`` (default: longest cycle)."""
    bound = bound or _max_cycle_length(m)
    core_m = restrict_to_support(m)
    return all(is_measure_disjoint(core_m, uniform_cycle(p)).disjoint for p in range(1, bound + 1))


@dataclasses.dataclass(frozen=True)
class A2Report:
    disjoint_from_ergodic: bool
    disjoint_from_own_components: bool

    @property
    def consistent(self) -> bool:
        return self.disjoint_from_ergodic == self.disjoint_from_own_components

    def __bool__(self) -> bool:
        return self.disjoint_from_ergodic


def check_thmA2_finite(m: FiniteMPT) -> A2Report:
    """Disjoint from every ergodic cycle system iff disjoint from each of its
    own positive-weight ergodic components."""
    lhs = disjoint_from_all_cycles(m)
    rhs = all(
        is_measure_disjoint(m, component_system(m, comp)).disjoint
        for comp in ergodic_components(m)
        if not comp.null
    )
    report = A2Report(lhs, rhs)
    if not report.consistent:
        raise InternalInconsistency(f"ergodic-component criterion disagrees: {report}")
    return report


def product_mpt(m1: FiniteMPT, m2: FiniteMPT) -> FiniteMPT:
    prod = product(m1.sys, m2.sys)
    return FiniteMPT(prod, tuple(a * b for a in m1.mu for b in m2.mu))


def check_thmA3_finite(m1: FiniteMPT, m2: FiniteMPT) -> bool:
    """If both factors are disjoint from all ergodic cycles, so is the product."""
    for name, m in (("first", m1), ("second", m2)):
        if not disjoint_from_all_cycles(m):
            raise PreconditionFailed(f"{name} system is not disjoint from every ergodic cycle")
    prod = product_mpt(restrict_to_support(m1), restrict_to_support(m2))
    return disjoint_from_all_cycles(prod, max(_max_cycle_length(m1), _max_cycle_length(m2), _max_cycle_length(prod)))


def random_mpt(rng, n: int, null_probability: float = 0.2) -> FiniteMPT:
    """Random permutation with random rational cycle weights (some possibly zero)."""
    perm = list(range(n))
    rng.shuffle(perm)
    x = FiniteSystem(tuple(perm))
    cycles = minimal_decomposition(x).orbits
    raw = [0 if rng.random() < null_probability else rng.randint(1, 6) for _ in cycles]
    if not any(raw):
        raw[rng.randrange(len(raw))] = 1
    total = sum(raw)
    mu = [Fraction(0)] * n
    for orbit, r in zip(cycles, raw):
        for s in orbit:
            mu[s] = Fraction(r, total * len(orbit))
    return FiniteMPT(x, tuple(mu))
