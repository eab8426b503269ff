"""Subshifts of finite type, decided on finite graphs.

Shift points are never materialised.  An SFT is given by a 0/1 transition
matrix; after trimming symbols with no successor or no predecessor, the
allowed words are exactly the finite paths of the transition graph.

Disjointness from a cycle.  For a transitive SFT ``X`` and the cycle ``C_p``
the following reduction is used (derived here, not quoted):

    X ⊥ C_p  iff  (X, σ^p) is transitive.

If ``(X, σ^p)`` is not transitive, take a proper closed σ^p-invariant set E
whose σ-translates cover X (for an irreducible graph of period d these are
the points whose zeroth symbol lies in a union of cyclic classes, one class
in every gcd(p, d)); then ``J = {(x, j) : σ^{-j} x in E}`` is a proper
joining of X and C_p.  Conversely, a proper joining J has fibre
``J_0 = {x : (x, 0) in J}`` which is closed, σ^p-invariant, and with
σ-translates covering X; by Baire one translate has interior, and a
transitive σ^p would force it to be all of X, making J the full product.
For an irreducible graph of period d, σ^p is transitive iff gcd(p, d) = 1;
that identity is cross-checked against the p-block graph in the tests.

The p-block graph has the allowed p-words as vertices and an edge u -> v when
``u v`` is an allowed 2p-word, i.e. when the last symbol of u may precede the
first symbol of v.  Words with the same first and last symbols therefore have
identical neighbourhoods, and the graph is strongly connected iff its
quotient by (first, last) type is; the decision procedure uses that quotient.
"""
from __future__ import annotations

import dataclasses
import enum
import math
from collections import deque
from typing import Iterator, Sequence

from .config import CAPS
from .errors import CapExceeded, EmptyShift, InputError, NotTransitive


@dataclasses.dataclass(frozen=True)
class SFT:
    """Essential (trimmed) vertex shift.

    ``symbols[i]`` is the original label of row/column ``i`` of ``matrix``.
    """

    matrix: tuple[tuple[int, ...], ...]
    symbols: tuple[int, ...]
    original_size: int

    @property
    def alphabet(self) -> int:
        return len(self.symbols)

    @property
    def essential(self) -> bool:
        return True

    def successors(self, i: int) -> list[int]:
        return [j for j, v in enumerate(self.matrix[i]) if v]

    def predecessors(self, j: int) -> list[int]:
        return [i for i in range(self.alphabet) if self.matrix[i][j]]

    def allowed(self, a: int, b: int) -> bool:
        return bool(self.matrix[a][b])

    def index(self, symbol: int) -> int:
        try:
            return self.symbols.index(symbol)
        except ValueError:
            raise InputError(f"symbol {symbol} is not in the trimmed alphabet {list(self.symbols)}") from None

    def is_path(self, word: Sequence[int], closed: bool = False) -> bool:
        """Whether a word over original symbols is allowed (cyclically when ``closed``)."""
        try:
            idx = [self.index(s) for s in word]
        except InputError:
            return False
        pairs = list(zip(idx, idx[1:]))
        if closed and idx:
            pairs.append((idx[-1], idx[0]))
        return all(self.allowed(a, b) for a, b in pairs)

    def to_descriptor(self) -> dict:
        # the trimmed matrix re-parses to an equal SFT up to relabelling
        return {"type": "sft", "matrix": [list(r) for r in self.matrix]}


def make_sft(matrix: Sequence[Sequence[int]]) -> SFT:
    rows = [list(r) for r in matrix]
    k = len(rows)
    if k == 0 or any(len(r) != k for r in rows):
        raise InputError("transition matrix must be square and nonempty")
    if any(v not in (0, 1) for r in rows for v in r):
        raise InputError("transition matrix entries must be 0 or 1")
    alive = set(range(k))
    changed = True
    while changed:
        changed = False
        for i in sorted(alive):
            has_out = any(rows[i][j] for j in alive)
            has_in = any(rows[j][i] for j in alive)
            if not (has_out and has_in):
                alive.discard(i)
                changed = True
    if not alive:
        raise EmptyShift("no bi-infinite path survives trimming")
    keep = sorted(alive)
    trimmed = tuple(tuple(rows[i][j] for j in keep) for i in keep)
    return SFT(trimmed, tuple(keep), k)


def from_descriptor(desc: dict) -> SFT:
    if desc.get("type") != "sft":
        raise InputError(f"expected an sft descriptor, got type {desc.get('type')!r}")
    if "matrix" not in desc:
        raise InputError("sft descriptor needs a 'matrix'")
    return make_sft(desc["matrix"])


def full_shift(k: int = 2) -> SFT:
    return make_sft([[1] * k for _ in range(k)])


def _reach(succ: Sequence[Sequence[int]], start: int) -> set[int]:
    seen = {start}
    stack = [start]
    while stack:
        v = stack.pop()
        for w in succ[v]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return seen


def strongly_connected(succ: Sequence[Sequence[int]]) -> bool:
    """Strong connectivity of a graph given by successor lists."""
    n = len(succ)
    if n == 0:
        return False
    pred: list[list[int]] = [[] for _ in range(n)]
    for v, ws in enumerate(succ):
        for w in ws:
            pred[w].append(v)
    return len(_reach(succ, 0)) == n and len(_reach(pred, 0)) == n


def strong_components(succ: Sequence[Sequence[int]]) -> list[list[int]]:
    """Kosaraju, iterative; components ordered by least vertex."""
    n = len(succ)
    order: list[int] = []
    seen = [False] * n
    for root in range(n):
        if seen[root]:
            continue
        seen[root] = True
        stack = [(root, iter(succ[root]))]
        while stack:
            v, it = stack[-1]
            for w in it:
                if not seen[w]:
                    seen[w] = True
                    stack.append((w, iter(succ[w])))
                    break
            else:
                stack.pop()
                order.append(v)
    pred: list[list[int]] = [[] for _ in range(n)]
    for v, ws in enumerate(succ):
        for w in ws:
            pred[w].append(v)
    comp = [-1] * n
    comps: list[list[int]] = []
    for root in reversed(order):
        if comp[root] >= 0:
            continue
        members = []
        comp[root] = len(comps)
        stack2 = [root]
        while stack2:
            v = stack2.pop()
            members.append(v)
            for w in pred[v]:
                if comp[w] < 0:
                    comp[w] = len(comps)
                    stack2.append(w)
        comps.append(sorted(members))
    return sorted(comps, key=lambda c: c[0])


def _graph(x: SFT) -> list[list[int]]:
    return [x.successors(i) for i in range(x.alphabet)]


def sft_is_transitive(x: SFT) -> bool:
    return strongly_connected(_graph(x))


def _component_period(succ: Sequence[Sequence[int]], members: Sequence[int]) -> int:
    inside = set(members)
    level = {members[0]: 0}
    queue = deque([members[0]])
    g = 0
    while queue:
        v = queue.popleft()
        for w in succ[v]:
            if w not in inside:
                continue
            if w not in level:
                level[w] = level[v] + 1
                queue.append(w)
            else:
                g = math.gcd(g, level[v] + 1 - level[w])
    return g


def sft_period(x: SFT) -> int:
    """gcd of the lengths of all cycles of the transition graph."""
    succ = _graph(x)
    g = 0
    for members in strong_components(succ):
        g = math.gcd(g, _component_period(succ, members))
    return g


def cyclic_classes(x: SFT) -> list[list[int]]:
    """Period classes D_0, ..., D_{d-1} of an irreducible graph (D_i -> D_{i+1})."""
    if not sft_is_transitive(x):
        raise NotTransitive("cyclic classes need an irreducible graph")
    d = sft_period(x)
    level = {0: 0}
    queue = deque([0])
    while queue:
        v = queue.popleft()
        for w in x.successors(v):
            if w not in level:
                level[w] = level[v] + 1
                queue.append(w)
    classes: list[list[int]] = [[] for _ in range(d)]
    for v in range(x.alphabet):
        classes[level[v] % d].append(v)
    return classes


def sft_is_mixing(x: SFT) -> bool:
    return sft_is_transitive(x) and sft_period(x) == 1


def _bool_matmul(a, b):
    k = len(a)
    return [[int(any(a[i][m] and b[m][j] for m in range(k))) for j in range(k)] for i in range(k)]


def bool_power(x: SFT, p: int) -> list[list[int]]:
    """Boolean matrix of paths with exactly p steps."""
    k = x.alphabet
    result = [[int(i == j) for j in range(k)] for i in range(k)]
    base = [list(r) for r in x.matrix]
    while p:
        if p & 1:
            result = _bool_matmul(result, base)
        base = _bool_matmul(base, base)
        p >>= 1
    return result


def block_type_graph(x: SFT, p: int) -> tuple[list[tuple[int, int]], list[list[int]]]:
    """The p-block graph with twin words merged: vertices are the (first, last)
    symbol pairs realised by some allowed p-word."""
    if p < 1:
        raise InputError("p must be positive")
    reach = bool_power(x, p - 1)
    k = x.alphabet
    types = [(f, l) for f in range(k) for l in range(k) if reach[f][l]]
    by_first: dict[int, list[int]] = {}
    for idx, (f, _) in enumerate(types):
        by_first.setdefault(f, []).append(idx)
    succ = []
    for f, l in types:
        out = []
        for nxt in x.successors(l):
            out.extend(by_first.get(nxt, []))
        succ.append(out)
    return types, succ


def sft_power_transitive(x: SFT, p: int) -> bool:
    """Transitivity of (X, σ^p) via the p-block graph."""
    _, succ = block_type_graph(x, p)
    return strongly_connected(succ)


def allowed_words(x: SFT, length: int) -> Iterator[tuple[int, ...]]:
    """Allowed words of the given length as trimmed indices, lexicographic."""
    if length == 0:
        yield ()
        return
    stack = [(v,) for v in reversed(range(x.alphabet))]
    while stack:
        w = stack.pop()
        if len(w) == length:
            yield w
            continue
        for nxt in reversed(x.successors(w[-1])):
            stack.append(w + (nxt,))


def p_block_graph(x: SFT, p: int) -> tuple[list[tuple[int, ...]], list[list[int]]]:
    """Explicit p-block graph; a hub node per symbol keeps it linear in size.

    Vertices ``0..W-1`` are the words, ``W + s`` is the hub "next block starts
    with s".  Word-to-word reachability is unchanged by the hubs.
    """
    words = []
    for w in allowed_words(x, p):
        words.append(w)
        if len(words) > CAPS.max_block_words:
            raise CapExceeded(f"more than {CAPS.max_block_words} allowed {p}-words")
    nw = len(words)
    succ: list[list[int]] = [[nw + s for s in x.successors(w[-1])] for w in words]
    hubs: list[list[int]] = [[] for _ in range(x.alphabet)]
    for i, w in enumerate(words):
        hubs[w[0]].append(i)
    succ.extend(hubs)
    return words, succ


def explicit_power_transitive(x: SFT, p: int) -> bool:
    _, succ = p_block_graph(x, p)
    return strongly_connected(succ)


@dataclasses.dataclass(frozen=True)
class CycleJoiningWitness:
    """A proper joining of X and C_p, described by a set of symbols F.

    E = {x : x_0 in F} is closed and σ^p-invariant, and
    J = {(x, j) : x_{-j} in F} is the joining.
    """

    p: int
    phase_symbols: frozenset[int]

    def to_json(self) -> dict:
        return {"p": self.p, "phase_symbols": sorted(self.phase_symbols)}


@dataclasses.dataclass(frozen=True)
class CycleDisjointness:
    disjoint: bool
    p: int
    witness: CycleJoiningWitness | None = None

    def __bool__(self) -> bool:
        return self.disjoint


def validate_cycle_witness(x: SFT, witness: CycleJoiningWitness) -> bool:
    """Re-check a witness on the block-graph level.

    * F is nonempty and proper, so J is nonempty and not the full product;
    * F is closed forwards and backwards under p-step paths, so E is
      σ^p-invariant and J is invariant;
    * every allowed p-word meets F, so the translates σ^j E (j < p) cover X
      and J projects onto X (and onto C_p because F is nonempty).
    """
    p = witness.p
    if p < 1:
        return False
    try:
        f = {x.index(s) for s in witness.phase_symbols}
    except InputError:
        return False
    if not f or len(f) == x.alphabet:
        return False
    reach = bool_power(x, p)
    for a in range(x.alphabet):
        for b in range(x.alphabet):
            if reach[a][b] and (a in f) != (b in f):
                return False
    # ends of F-avoiding paths with j+1 symbols, for j = 0..p-1
    ends = {v for v in range(x.alphabet) if v not in f}
    for _ in range(p - 1):
        ends = {w for v in ends for w in x.successors(v) if w not in f}
    return not ends


def _require_transitive(x: SFT):
    if not sft_is_transitive(x):
        raise NotTransitive("the SFT must be transitive (irreducible graph)")


def sft_disjoint_from_cycle(x: SFT, p: int) -> CycleDisjointness:
    _require_transitive(x)
    if sft_power_transitive(x, p):
        return CycleDisjointness(True, p)
    reach = bool_power(x, p)
    # F: the p-step closure of symbol 0
    f = {0}
    stack = [0]
    while stack:
        v = stack.pop()
        for w in range(x.alphabet):
            if reach[v][w] and w not in f:
                f.add(w)
                stack.append(w)
    witness = CycleJoiningWitness(p, frozenset(x.symbols[v] for v in f))
    return CycleDisjointness(False, p, witness)


@dataclasses.dataclass(frozen=True, order=True)
class PeriodicOrbit:
    """A primitive cycle word (least rotation) over the original symbols."""

    word: tuple[int, ...]

    @property
    def period(self) -> int:
        return len(self.word)

    def point(self, length: int, phase: int = 0) -> tuple[int, ...]:
        return tuple(self.word[(phase + i) % self.period] for i in range(length))


def _is_lyndon(w: Sequence[int]) -> bool:
    n = len(w)
    t = tuple(w)
    return all(t < t[i:] + t[:i] for i in range(1, n))


def sft_periodic_points(x: SFT, up_to: int) -> list[PeriodicOrbit]:
    """All periodic orbits of period <= up_to, sorted by (period, word)."""
    out = []
    visited = 0
    for length in range(1, up_to + 1):
        for start in range(x.alphabet):
            stack = [(start,)]
            while stack:
                w = stack.pop()
                visited += 1
                if visited > CAPS.max_block_words:
                    raise CapExceeded(f"periodic search visited more than {CAPS.max_block_words} words")
                if len(w) == length:
                    if x.allowed(w[-1], w[0]) and _is_lyndon(w):
                        out.append(PeriodicOrbit(tuple(x.symbols[v] for v in w)))
                    continue
                for nxt in x.successors(w[-1]):
                    # a Lyndon word starts with its least symbol
                    if nxt >= start:
                        stack.append(w + (nxt,))
    return sorted(out, key=lambda o: (o.period, o.word))


def _return_paths(x: SFT) -> list[list[list[int] | None]]:
    """paths[a][b]: shortest path a -> ... -> b with at least one step, as
    the list of intermediate symbols, or None if b is unreachable."""
    k = x.alphabet
    paths: list[list[list[int] | None]] = []
    for a in range(k):
        parent: dict[int, int | None] = {}
        queue = deque()
        for w in x.successors(a):
            if w not in parent:
                parent[w] = None
                queue.append(w)
        while queue:
            v = queue.popleft()
            for w in x.successors(v):
                if w not in parent:
                    parent[w] = v
                    queue.append(w)
        row: list[list[int] | None] = []
        for b in range(k):
            if b not in parent:
                row.append(None)
                continue
            inner = []
            v = parent[b]
            while v is not None:
                inner.append(v)
                v = parent[v]
            row.append(inner[::-1])
        paths.append(row)
    return paths


@dataclasses.dataclass(frozen=True)
class DensityResult:
    dense: bool
    depth: int
    words_checked: int
    counterexample: tuple[int, ...] | None = None

    def __bool__(self) -> bool:
        return self.dense


def sft_dense_periodic(x: SFT, depth: int = 8) -> DensityResult:
    """Constructively extend every allowed word of length <= depth to a periodic point."""
    paths = _return_paths(x)
    checked = 0
    for length in range(1, depth + 1):
        for w in allowed_words(x, length):
            checked += 1
            if checked > CAPS.max_block_words:
                raise CapExceeded(f"more than {CAPS.max_block_words} words up to length {depth}")
            inner = paths[w[-1]][w[0]]
            if inner is None:
                return DensityResult(False, depth, checked, tuple(x.symbols[v] for v in w))
            cycle = list(w) + inner
            if not all(x.allowed(a, b) for a, b in zip(cycle, cycle[1:] + cycle[:1])):
                raise AssertionError(f"constructed cycle {cycle} is not a closed path")
    return DensityResult(True, depth, checked)


class Verdict(enum.Enum):
    YES = "yes"
    NO = "no"
    UNKNOWN = "unknown"


@dataclasses.dataclass(frozen=True)
class MperpVerdict:
    verdict: Verdict
    reasons: tuple[tuple[str, object], ...]
    depth: int

    def to_json(self) -> dict:
        return {
            "verdict": self.verdict.value,
            "depth": self.depth,
            "reasons": [[name, value] for name, value in self.reasons],
        }


def sft_in_Mperp(x: SFT, depth: int = 8) -> MperpVerdict:
    """Sufficient condition: totally transitive with dense periodic points.
    Necessary condition: weak mixing, which fails for period >= 2."""
    transitive = sft_is_transitive(x)
    reasons: list[tuple[str, object]] = [("transitive", transitive)]
    if not transitive:
        reasons.append(
            ("note", "not decided for non-transitive SFTs; unions of full shifts can still be disjoint from all minimal systems")
        )
        return MperpVerdict(Verdict.UNKNOWN, tuple(reasons), depth)
    d = sft_period(x)
    reasons.append(("period", d))
    if d >= 2:
        reasons.append(("weakly_mixing", False))
        return MperpVerdict(Verdict.NO, tuple(reasons), depth)
    reasons.append(("mixing", True))
    density = sft_dense_periodic(x, depth)
    reasons.append(("dense_periodic", density.dense))
    verdict = Verdict.YES if density.dense else Verdict.UNKNOWN
    return MperpVerdict(verdict, tuple(reasons), depth)


def transitive_point_prefix(x: SFT, length: int) -> tuple[int, ...]:
    """All allowed words up to ``length``, in (length, lexicographic) order,
    chained by shortest connecting paths."""
    _require_transitive(x)
    paths = _return_paths(x)
    out: list[int] = []
    for size in range(1, length + 1):
        for w in allowed_words(x, size):
            if out:
                out.extend(paths[out[-1]][w[0]])
            out.extend(w)
    return tuple(x.symbols[v] for v in out)


def proximality_depth(x: SFT, prefix: Sequence[int], orbit: PeriodicOrbit, depth: int) -> int:
    """Longest window (<= depth) on which some shift of the prefix agrees with
    some phase of the periodic point."""
    _require_transitive(x)
    best = 0
    n = len(prefix)
    for i in range(n):
        for phase in range(orbit.period):
            m = 0
            while m < depth and i + m < n and prefix[i + m] == orbit.word[(phase + m) % orbit.period]:
                m += 1
            best = max(best, m)
            if best == depth:
                return best
    return best


def cycle_sweep(x: SFT, max_p: int) -> list[dict]:
    _require_transitive(x)
    d = sft_period(x)
    rows = []
    for p in range(1, max_p + 1):
        res = sft_disjoint_from_cycle(x, p)
        rows.append({"p": p, "disjoint": res.disjoint, "gcd_criterion": math.gcd(p, d) == 1})
    return rows
