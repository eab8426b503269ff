"""Joinings and disjointness of finite systems.

A joining of ``x`` and ``y`` is a closed invariant subset of the product with
full projections.  On finite spaces that means a union of product cycles
covering every state of both factors; ``x`` and ``y`` are disjoint when the
full product is the only one.

"Dense" and "residual" subsets of a finite discrete space are the whole
space, and the finite forms of the residual statements below use that
reading throughout.
"""
from __future__ import annotations

import dataclasses
import math
from typing import Iterator

from .config import CAPS
from .core import (
    FiniteSystem,
    Partition,
    StateSet,
    cycle_system,
    factor_by_partition,
    is_minimal,
    is_transitive,
    minimal_decomposition,
    product,
    project,
    proximal_relation,
    regionally_proximal,
    subsystem,
)
from .errors import CapExceeded, EmptyWindow, InputError, InternalInconsistency, NotTransitive


@dataclasses.dataclass(frozen=True)
class JoiningWitness:
    """A proper joining: a union of product cycles with full projections."""

    cycle_indices: frozenset[int]
    as_states: StateSet

    def to_json(self) -> dict:
        return {"cycle_indices": sorted(self.cycle_indices), "states": self.as_states.to_list()}


@dataclasses.dataclass(frozen=True)
class DisjointnessResult:
    disjoint: bool
    witness: JoiningWitness | None = None

    def __post_init__(self):
        if self.disjoint != (self.witness is None):
            raise InternalInconsistency("witness must be present exactly when not disjoint")

    def __bool__(self) -> bool:
        return self.disjoint


def _cycle_projections(x: FiniteSystem, y: FiniteSystem, prod: FiniteSystem) -> list[tuple[int, int]]:
    dec = minimal_decomposition(prod)
    out = []
    for c in dec.cycles:
        px, py = project(c, x.n, y.n)
        out.append((px.bits, py.bits))
    return out


def invariant_subsets(x: FiniteSystem) -> Iterator[StateSet]:
    """Every nonempty closed invariant subset (union of cycles), ordered by cycle mask."""
    cycles = minimal_decomposition(x).cycles
    if len(cycles) > CAPS.max_cycles:
        raise CapExceeded(f"{len(cycles)} cycles, cap is {CAPS.max_cycles}")
    for mask in range(1, 1 << len(cycles)):
        bits = 0
        for i, c in enumerate(cycles):
            if mask >> i & 1:
                bits |= c.bits
        yield StateSet(bits, x.n)


def is_joining(x: FiniteSystem, y: FiniteSystem, states: StateSet) -> bool:
    """Invariant under T x S with full projections."""
    if states.n != x.n * y.n or not states:
        return False
    prod = product(x, y)
    if not prod.is_invariant(states):
        return False
    px, py = project(states, x.n, y.n)
    return px.is_full() and py.is_full()


def validate_witness(x: FiniteSystem, y: FiniteSystem, witness: JoiningWitness) -> bool:
    """Check every stated property of a witness against the two systems."""
    if witness.as_states.n != x.n * y.n:
        return False
    dec = minimal_decomposition(product(x, y))
    if any(not 0 <= i < len(dec) for i in witness.cycle_indices):
        return False
    bits = 0
    for i in witness.cycle_indices:
        bits |= dec.cycles[i].bits
    if bits != witness.as_states.bits:
        return False
    return is_joining(x, y, witness.as_states) and not witness.as_states.is_full()


def is_disjoint(x: FiniteSystem, y: FiniteSystem) -> DisjointnessResult:
    """Decide ``x ⊥ y``.

    Coverage of the projections is monotone under union, so a proper joining
    exists iff the union of all product cycles but one still covers both
    factors for some cycle.  The witness found that way is then shrunk
    greedily, trying the latest cycles first.
    """
    prod = product(x, y)
    proj = _cycle_projections(x, y, prod)
    k = len(proj)
    full_x, full_y = (1 << x.n) - 1, (1 << y.n) - 1
    # suffix unions so each leave-one-out union is prefix | suffix
    suffix = [(0, 0)] * (k + 1)
    for i in range(k - 1, -1, -1):
        suffix[i] = (suffix[i + 1][0] | proj[i][0], suffix[i + 1][1] | proj[i][1])
    prefix_x = prefix_y = 0
    droppable = []
    for i in range(k):
        if prefix_x | suffix[i + 1][0] == full_x and prefix_y | suffix[i + 1][1] == full_y:
            droppable.append(i)
        prefix_x |= proj[i][0]
        prefix_y |= proj[i][1]
    if not droppable:
        return DisjointnessResult(True)

    # shrink from the back so the witness keeps the earliest cycles
    keep = [i for i in range(k) if i != droppable[-1]]
    for i in reversed(list(keep)):
        trial = [j for j in keep if j != i]
        cx = cy = 0
        for j in trial:
            cx |= proj[j][0]
            cy |= proj[j][1]
        if cx == full_x and cy == full_y:
            keep = trial
    cycles = minimal_decomposition(prod).cycles
    bits = 0
    for i in keep:
        bits |= cycles[i].bits
    return DisjointnessResult(False, JoiningWitness(frozenset(keep), StateSet(bits, prod.n)))


def enumerate_joinings(x: FiniteSystem, y: FiniteSystem, cap: int | None = None) -> list[StateSet]:
    """Brute force: every union of product cycles with full projections.

    Returns at most ``cap`` joinings (all of them when ``cap`` is None).
    """
    prod = product(x, y)
    proj = _cycle_projections(x, y, prod)
    if len(proj) > CAPS.max_cycles:
        raise CapExceeded(f"{len(proj)} product cycles, cap is {CAPS.max_cycles}")
    cycles = minimal_decomposition(prod).cycles
    full_x, full_y = (1 << x.n) - 1, (1 << y.n) - 1
    found = []
    for mask in range(1, 1 << len(proj)):
        cx = cy = bits = 0
        for i in range(len(proj)):
            if mask >> i & 1:
                cx |= proj[i][0]
                cy |= proj[i][1]
                bits |= cycles[i].bits
        if cx == full_x and cy == full_y:
            found.append(StateSet(bits, prod.n))
            if cap is not None and len(found) >= cap:
                break
    return found


def is_weakly_disjoint(x: FiniteSystem, y: FiniteSystem) -> bool:
    return is_transitive(product(x, y))


def hitting_compat_set(x: FiniteSystem, y: FiniteSystem, u: StateSet, v: StateSet) -> StateSet:
    """States ``a`` such that every ``b`` in Y has a common hitting time.

    That is, ``{a : for all b there is n with T^n a in U and S^n b in V}``.
    Hitting times are periodic, so one window of length lcm(periods) is exact.
    """
    if not u or not v:
        raise EmptyWindow("U and V must be nonempty")
    if u.n != x.n or v.n != y.n:
        raise InputError("window sets do not match the systems")
    period = math.lcm(x.period, y.period)
    if period > CAPS.max_period:
        raise CapExceeded(f"common period {period} exceeds cap {CAPS.max_period}")

    def hit_masks(system: FiniteSystem, window: StateSet) -> list[int]:
        # bit n set in masks[s] iff T^n s in window, for 0 <= n < period
        masks = [0] * system.n
        for orbit in minimal_decomposition(system).orbits:
            m = len(orbit)
            reps = period // m
            for pos, s in enumerate(orbit):
                block = 0
                for t in range(m):
                    if orbit[(pos + t) % m] in window:
                        block |= 1 << t
                word = 0
                for r in range(reps):
                    word |= block << (r * m)
                masks[s] = word
        return masks

    hx, hy = hit_masks(x, u), hit_masks(y, v)
    bits = 0
    for a in range(x.n):
        if all(hx[a] & hy[b] for b in range(y.n)):
            bits |= 1 << a
    return StateSet(bits, x.n)


def orbit_saturation(x: FiniteSystem, states: StateSet) -> StateSet:
    """Union of T^n U over all n."""
    dec = minimal_decomposition(x)
    bits = 0
    for s in states:
        bits |= dec.cycles[dec.cycle_of[s]].bits
    return StateSet(bits, x.n)


def residual_set(x: FiniteSystem, y: FiniteSystem, u: StateSet, v: StateSet) -> StateSet:
    """(X minus the closed orbit of U) union hitting_compat_set(x, y, U, V)."""
    return orbit_saturation(x, u).complement() | hitting_compat_set(x, y, u, v)


def cycle_systems(x: FiniteSystem) -> list[FiniteSystem]:
    """Each cycle of ``x`` as a standalone minimal system."""
    return [subsystem(x, c)[0] for c in minimal_decomposition(x).cycles]


@dataclasses.dataclass(frozen=True)
class MperpCertificate:
    """Three independent verdicts on membership in M-perp for a finite system."""

    verdict: bool
    all_fixed: bool
    cycles_disjoint_and_covering: bool
    cycle_sweep: bool
    # first obstruction found, for reporting
    failing_cycle: int | None = None
    failing_p: int | None = None

    def __bool__(self) -> bool:
        return self.verdict

    def to_json(self) -> dict:
        return dataclasses.asdict(self)


def in_Mperp_finite(x: FiniteSystem) -> MperpCertificate:
    dec = minimal_decomposition(x)
    all_fixed = all(length == 1 for length in dec.lengths)

    failing_cycle = None
    covered = 0
    for i, c in enumerate(cycle_systems(x)):
        covered |= dec.cycles[i].bits
        if failing_cycle is None and not is_disjoint(c, x).disjoint:
            failing_cycle = i
    right_side = failing_cycle is None and covered == (1 << x.n) - 1

    failing_p = None
    for p in range(1, max(dec.lengths) + 1):
        if not is_disjoint(x, cycle_system(p)).disjoint:
            failing_p = p
            break
    sweep = failing_p is None

    if not all_fixed == right_side == sweep:
        raise InternalInconsistency(
            f"M-perp predicates disagree: all_fixed={all_fixed}, "
            f"cycles_disjoint={right_side}, sweep={sweep}"
        )
    return MperpCertificate(all_fixed, all_fixed, right_side, sweep, failing_cycle, failing_p)


def ddms_check(x: FiniteSystem) -> bool:
    """A covering family of cycles, each disjoint from ``x``.

    Cycles partition the space, so the only candidate family is all of them.
    """
    return all(is_disjoint(c, x).disjoint for c in cycle_systems(x))


def delta_perp(x: FiniteSystem) -> frozenset[tuple[int, int]]:
    """Pairs whose orbit closures are disjoint systems."""
    dec = minimal_decomposition(x)
    systems = cycle_systems(x)
    k = len(systems)
    table = [[False] * k for _ in range(k)]
    for i in range(k):
        for j in range(i, k):
            table[i][j] = table[j][i] = is_disjoint(systems[i], systems[j]).disjoint
    cyc = dec.cycle_of
    return frozenset((a, b) for a in range(x.n) for b in range(x.n) if table[cyc[a]][cyc[b]])


@dataclasses.dataclass(frozen=True)
class TransitiveReport:
    mperp: bool
    disjoint_cycle_cover: bool
    proximal_on_cover: bool
    dense_minimal_and_proximal: bool

    @property
    def consistent(self) -> bool:
        return self.mperp == self.disjoint_cycle_cover == self.proximal_on_cover == self.dense_minimal_and_proximal

    def to_json(self) -> dict:
        return {**dataclasses.asdict(self), "consistent": self.consistent}


def check_transitive_characterization(x: FiniteSystem) -> TransitiveReport:
    """Four equivalent conditions for a transitive system to lie in M-perp."""
    if not is_transitive(x):
        raise NotTransitive("the characterization applies to transitive systems")
    cond1 = in_Mperp_finite(x).verdict
    cond2 = ddms_check(x)
    prox = proximal_relation(x)
    dec = minimal_decomposition(x)
    transitive_points = [s for s in range(x.n) if len(x.orbit(s)) == x.n]
    # the only covering family of minimal sets is the set of all cycles
    cover_points = [s for c in dec.cycles for s in c]
    cond3 = all((a, b) in prox for a in transitive_points for b in cover_points)
    minimal_points = list(range(x.n))
    dense = set(minimal_points) == set(range(x.n))
    cond4 = dense and all((a, b) in prox for a in transitive_points for b in minimal_points)
    report = TransitiveReport(cond1, cond2, cond3, cond4)
    if not report.consistent:
        raise InternalInconsistency(f"transitive characterization disagrees: {report}")
    return report


# Finite forms of the structural statements, each returning a list of
# violations (empty when the statement holds on the given instance).


def disjointness_property_violations(x: FiniteSystem, y: FiniteSystem, partition: Partition | None = None) -> list[str]:
    out = []
    res = is_disjoint(x, y)
    if res.disjoint and not (is_minimal(x) or is_minimal(y)):
        out.append("disjoint but neither factor is minimal")
    if res.disjoint != is_disjoint(y, x).disjoint:
        out.append("disjointness not symmetric")
    if partition is not None and res.disjoint:
        if not is_disjoint(factor_by_partition(x, partition), y).disjoint:
            out.append("factor of a disjoint system is not disjoint")
    if is_minimal(x) and is_minimal(y):
        by_gcd = math.gcd(x.n, y.n) == 1
        if not res.disjoint == is_transitive(product(x, y)) == by_gcd:
            out.append("minimal pair: disjointness, product minimality and gcd disagree")
    return out


def residual_disjointness_violations(x: FiniteSystem, y: FiniteSystem) -> list[str]:
    """Finite forms of the residual-disjointness statements for minimal ``y``."""
    out = []
    disjoint = is_disjoint(x, y).disjoint
    every_orbit = all(is_disjoint(c, y).disjoint for c in cycle_systems(x))
    if every_orbit and not disjoint:
        out.append("every orbit closure disjoint from y, but x is not")
    if is_minimal(y) and disjoint != every_orbit:
        out.append("x ⊥ y but some orbit closure is not (or conversely)")
    return out


def theorem_consistency(x: FiniteSystem) -> dict[str, bool]:
    """All predicates that must coincide with membership in M-perp."""
    cert = in_Mperp_finite(x)
    full = len(delta_perp(x)) == x.n * x.n
    q = regionally_proximal(x)
    cycles = minimal_decomposition(x).cycles
    w_in_q = all((a, b) in q for c in cycles for a in c for b in c)
    return {
        "all_fixed": cert.all_fixed,
        "cycles_disjoint_and_covering": cert.cycles_disjoint_and_covering,
        "cycle_sweep": cert.cycle_sweep,
        "ddms": ddms_check(x),
        "delta_perp_full": full,
        "minimal_sets_in_Q": w_in_q,
    }
