"""Acceptance criteria 1-10.

Each test prints one ``criterion N PASS|FAIL`` line (also collected into the
terminal summary) and asserts both correctness and its time budget.
"""
import io
import itertools
import json
import math
import random
import time

import pytest

from oracles import (
    all_joinings,
    binary_necklaces,
    block_graph_strongly_connected,
    hitting_set,
    ord_by_intersection,
)

from dlab import cli, core, hyperspace, joinings, measure, symbolic
from dlab.core import FiniteSystem, StateSet, cycle_system
from dlab.errors import EmptyShift, InternalInconsistency
from dlab.symbolic import Verdict, make_sft

RESULTS: list[str] = []


def record(number, title, failures, elapsed, limit=None):
    ok = not failures and (limit is None or elapsed < limit)
    budget = f"{elapsed:.1f}s" + (f" of {limit}s" if limit is not None else "")
    detail = "" if not failures else f"; first failure: {failures[0]}"
    line = f"criterion {number} {'PASS' if ok else 'FAIL'}: {title} ({budget}, {len(failures)} failures{detail})"
    RESULTS.append(line)
    print(line)
    assert not failures, failures[:5]
    if limit is not None:
        assert elapsed < limit, f"took {elapsed:.1f}s, budget {limit}s"


def irreducible_matrices(rng, k, count):
    out = []
    while len(out) < count:
        m = [[int(rng.random() < 0.45) for _ in range(k)] for _ in range(k)]
        try:
            x = make_sft(m)
        except EmptyShift:
            continue
        if x.alphabet == k and symbolic.sft_is_transitive(x):
            out.append(m)
    return out


def all_irreducible_matrices(k):
    for bits in range(1 << (k * k)):
        m = [[bits >> (i * k + j) & 1 for j in range(k)] for i in range(k)]
        try:
            x = make_sft(m)
        except EmptyShift:
            continue
        if x.alphabet == k and symbolic.sft_is_transitive(x):
            yield m


# -- 1 ---------------------------------------------------------------------------


def test_criterion_1_gcd_law():
    start = time.perf_counter()
    failures = []
    for m, n in itertools.product(range(1, 9), repeat=2):
        x, y = cycle_system(m), cycle_system(n)
        res = joinings.is_disjoint(x, y)
        expected = math.gcd(m, n) == 1
        count = len(joinings.enumerate_joinings(x, y))
        if res.disjoint != expected or (count == 1) != expected:
            failures.append((m, n, res.disjoint, count))
        if m * n <= 12 and (len(all_joinings(x.perm, y.perm)) == 1) != expected:
            failures.append(("subset oracle", m, n))
        if not res.disjoint and not joinings.validate_witness(x, y, res.witness):
            failures.append(("witness", m, n))
    record(1, "gcd law for C_m x C_n, m,n <= 8, vs joining enumeration", failures, time.perf_counter() - start, 10)


# -- 2 ---------------------------------------------------------------------------


def test_criterion_2_disjointness_properties():
    start = time.perf_counter()
    rng = random.Random(31)
    failures = []
    disjoint_seen = 0
    for trial in range(500):
        x = core.random_system(rng, rng.randint(1, 10))
        y = core.random_system(rng, rng.randint(1, 10))
        partition = core.random_invariant_partition(rng, x)
        v = joinings.disjointness_property_violations(x, y, partition)
        if v:
            failures.append((trial, x.perm, y.perm, v))
        disjoint_seen += joinings.is_disjoint(x, y).disjoint
    assert disjoint_seen > 0
    record(2, f"disjointness properties on 500 seeded pairs ({disjoint_seen} disjoint)", failures, time.perf_counter() - start, 60)


# -- 3 ---------------------------------------------------------------------------


def test_criterion_3_ord_oracle():
    start = time.perf_counter()
    rng = random.Random(53)
    failures = []
    subsets = 0
    for trial in range(200):
        x = core.random_system(rng, rng.randint(1, 12))
        for code in range(1, 1 << x.n):
            a = StateSet(code, x.n)
            got = hyperspace.ord(x, a).value
            if got != ord_by_intersection(x.perm, list(a)):
                failures.append((x.perm, a.to_list(), got))
            subsets += 1
        if not hyperspace.ord(x, StateSet.full(x.n)).infinite:
            failures.append(("ord(X)", x.perm))
        for s in range(x.n):
            value = hyperspace.ord(x, StateSet.of([s], x.n))
            fixed = x.perm[s] == s
            if (fixed and not value.infinite) or (not fixed and value.value != 1):
                failures.append(("singleton", x.perm, s, value))
    record(3, f"ord vs iterated intersection on {subsets} subsets", failures, time.perf_counter() - start, 120)


# -- 4 ---------------------------------------------------------------------------


def test_criterion_4_order_lemmas():
    start = time.perf_counter()
    failures = []
    pairs = 0
    for n in range(1, 13):
        x = cycle_system(n)
        qs = hyperspace.quasifactors(x)
        for q in qs:
            if not hyperspace.check_union_covers(x, q):
                failures.append(("union", n, q.codes()[0]))
            orders = {hyperspace.ord(x, e) for e in q.elements}
            if orders != {q.order}:
                failures.append(("constant order", n, q.codes()[0]))
            if not q.trivial and q.order.infinite:
                failures.append(("finite off X", n, q.codes()[0]))
        for q1, q2 in itertools.product(qs, repeat=2):
            if not hyperspace.quasifactor_disjoint(q1, q2):
                continue
            pairs += 1
            meet = hyperspace.check_pairwise_meet(q1, q2)
            if meet is not True:
                failures.append(("meet", n, meet))
            if not q2.order.infinite:
                small = hyperspace.check_small_disjoint(q1, q2)
                if small is not True:
                    failures.append(("shifted intersection", n, small))
    record(4, f"order lemmas on C_n, n <= 12 ({pairs} disjoint pairs)", failures, time.perf_counter() - start, 120)


# -- 5 ---------------------------------------------------------------------------


def test_criterion_5_quasifactor_census():
    start = time.perf_counter()
    failures = []
    c6 = cycle_system(6)
    count = len(hyperspace.quasifactors(c6))
    if count != 13 or binary_necklaces(6) - 1 != 13:
        failures.append(("count", count))
    family = hyperspace.max_disjoint_family(c6)
    if len(family) != 2 or sorted(q.length for q in family) != [2, 3]:
        failures.append(("family", [q.length for q in family]))
    via_table = sum(1 for _ in hyperspace.induced_system(c6).cycles())
    if via_table != 13:
        failures.append(("induced cycles", via_table))
    for n in range(1, 13):
        got = len(hyperspace.quasifactors(cycle_system(n)))
        if got != binary_necklaces(n) - 1:
            failures.append(("burnside", n, got))
    record(5, "C_6 has 13 quasifactors, max disjoint family 2", failures, time.perf_counter() - start)


# -- 6 ---------------------------------------------------------------------------


def test_criterion_6_theorem_consistency():
    start = time.perf_counter()
    rng = random.Random(67)
    failures = []
    members = 0
    for trial in range(300):
        x = core.random_system(rng, rng.randint(1, 12))
        if trial % 10 == 0:
            # make sure systems of fixed points are represented
            x = core.identity_system(rng.randint(1, 12))
        try:
            verdicts = joinings.theorem_consistency(x)
            if core.is_transitive(x):
                joinings.check_transitive_characterization(x)
        except InternalInconsistency as exc:
            failures.append((x.perm, str(exc)))
            continue
        if len(set(verdicts.values())) != 1:
            failures.append((x.perm, verdicts))
        members += verdicts["all_fixed"]
    record(6, f"M-perp predicates agree on 300 systems ({members} members)", failures, time.perf_counter() - start, 60)


# -- 7 ---------------------------------------------------------------------------


def _nonempty(n):
    return [StateSet(code, n) for code in range(1, 1 << n)]


def test_criterion_7_residual_set():
    start = time.perf_counter()
    failures = []
    checked = 0
    for m, n in itertools.product(range(1, 9), repeat=2):
        if math.gcd(m, n) != 1:
            continue
        x, y = cycle_system(m), cycle_system(n)
        for u in _nonempty(m):
            for v in _nonempty(n):
                checked += 1
                if not joinings.residual_set(x, y, u, v).is_full():
                    failures.append((m, n, u.to_list(), v.to_list()))
    # oracle spot check on the smaller pairs
    for m, n in ((2, 3), (3, 4), (1, 5)):
        x, y = cycle_system(m), cycle_system(n)
        for u in _nonempty(m):
            for v in _nonempty(n):
                if set(joinings.hitting_compat_set(x, y, u, v)) != hitting_set(x.perm, y.perm, set(u), set(v)):
                    failures.append(("oracle", m, n, u.to_list(), v.to_list()))
    c2 = cycle_system(2)
    proper = [
        (u.to_list(), v.to_list())
        for u in _nonempty(2)
        for v in _nonempty(2)
        if not joinings.residual_set(c2, c2, u, v).is_full()
    ]
    if not proper:
        failures.append("no proper set for (C_2, C_2)")
    record(7, f"residual set is all of X on {checked} (U,V) for coprime pairs; (C_2,C_2) proper for {proper[:1]}", failures, time.perf_counter() - start)


# -- 8 ---------------------------------------------------------------------------

EXPLICIT_WORDS = 1 << 14


def word_count(m, p):
    """Number of allowed words of length p (sum of the entries of A^(p-1))."""
    k = len(m)
    row = [1] * k
    for _ in range(p - 1):
        row = [sum(row[i] * m[i][j] for i in range(k)) for j in range(k)]
    return sum(row)


def test_criterion_8_sft_suite():
    start = time.perf_counter()
    failures = []
    full = make_sft([[1, 1], [1, 1]])
    if symbolic.sft_in_Mperp(full).verdict is not Verdict.YES:
        failures.append("full shift not Yes")
    for p in range(1, 13):
        if not symbolic.sft_disjoint_from_cycle(full, p).disjoint:
            failures.append(("full shift vs C_p", p))
    swap = make_sft([[0, 1], [1, 0]])
    v = symbolic.sft_in_Mperp(swap)
    if v.verdict is not Verdict.NO or ("period", 2) not in v.reasons:
        failures.append(("swap verdict", v))
    res = symbolic.sft_disjoint_from_cycle(swap, 2)
    if res.disjoint or not symbolic.validate_cycle_witness(swap, res.witness):
        failures.append(("swap witness", res))
    golden = symbolic.sft_in_Mperp(make_sft([[1, 1], [1, 0]]), depth=8)
    if golden.verdict is not Verdict.YES or golden.depth != 8:
        failures.append(("golden", golden))

    rng = random.Random(88)
    sample = [m for k in (1, 2, 3) for m in all_irreducible_matrices(k)]
    sample += irreducible_matrices(rng, 4, 150) + irreducible_matrices(rng, 5, 150)
    explicit = oracle = 0
    for m in sample:
        x = make_sft(m)
        d = symbolic.sft_period(x)
        for p in range(1, 13):
            fast = symbolic.sft_power_transitive(x, p)
            if fast != (math.gcd(p, d) == 1):
                failures.append(("gcd", m, p))
            if word_count(m, p) <= EXPLICIT_WORDS:
                if symbolic.explicit_power_transitive(x, p) != fast:
                    failures.append(("explicit", m, p))
                explicit += 1
            if len(m) ** p <= 400 and block_graph_strongly_connected(m, p) != fast:
                failures.append(("oracle", m, p))
            oracle += len(m) ** p <= 400
            if not fast:
                w = symbolic.sft_disjoint_from_cycle(x, p).witness
                if not symbolic.validate_cycle_witness(x, w):
                    failures.append(("witness", m, p))
    title = (
        f"SFT anchors; gcd(p,d) vs p-block connectivity on {len(sample)} matrices x 12 powers "
        f"({explicit} explicit graphs, {oracle} oracle graphs)"
    )
    record(8, title, failures, time.perf_counter() - start, 120)


# -- 9 ---------------------------------------------------------------------------


def test_criterion_9_measure_suite():
    start = time.perf_counter()
    failures = []
    for m, n in itertools.product(range(1, 9), repeat=2):
        vs = measure.joining_polytope(measure.uniform_cycle(m), measure.uniform_cycle(n)).vertices()
        if len(vs) != math.gcd(m, n):
            failures.append(("vertices", m, n, len(vs)))
    for m, n in itertools.product(range(1, 11), repeat=2):
        top = joinings.is_disjoint(cycle_system(m), cycle_system(n)).disjoint
        if measure.is_measure_disjoint(measure.uniform_cycle(m), measure.uniform_cycle(n)).disjoint != top:
            failures.append(("topology", m, n))
    rng = random.Random(99)
    mpts = [measure.random_mpt(rng, rng.randint(1, 12)) for _ in range(200)]
    qualifying = []
    for i, mpt in enumerate(mpts):
        try:
            rep = measure.check_thmA2_finite(mpt)
        except InternalInconsistency as exc:
            failures.append(("A2", i, str(exc)))
            continue
        if rep.disjoint_from_ergodic:
            qualifying.append(mpt)
    a3_pairs = 0
    for m1, m2 in itertools.combinations_with_replacement(qualifying, 2):
        a3_pairs += 1
        if not measure.check_thmA3_finite(m1, m2):
            failures.append(("A3", m1.sys.perm, m2.sys.perm))
    title = f"joining polytopes, A2 on 200 random MPTs, A3 on {a3_pairs} qualifying pairs"
    record(9, title, failures, time.perf_counter() - start, 120)


# -- 10 --------------------------------------------------------------------------


def _run(argv):
    buf = io.StringIO()
    code = cli.run([str(a) for a in argv], stdout=buf)
    return code, buf.getvalue()


def _replay(argv, verify_argv, tmp_path, name):
    """Run, save the report, feed it back through --verify; return a failure or None."""
    code, out = _run(argv)
    if code != 1:
        return (argv, "expected a negative verdict", code)
    path = tmp_path / name
    path.write_text(out)
    code2, out2 = _run(verify_argv + ["--verify", path])
    body = json.loads(out2) if code2 == 1 else {}
    if code2 != 1 or not body.get("verified") or body.get("witness") != json.loads(out)["witness"]:
        return (argv, "replay failed", code2)
    return None


def test_criterion_10_cli_contract(tmp_path):
    start = time.perf_counter()
    failures = []
    replays = 0

    def save(name, desc):
        path = tmp_path / name
        path.write_text(json.dumps(desc))
        return path

    for m, n in itertools.product(range(1, 9), repeat=2):
        if math.gcd(m, n) == 1:
            continue
        a = save(f"c{m}.json", cycle_system(m).to_descriptor())
        b = save(f"c{n}.json", cycle_system(n).to_descriptor())
        argv = ["disjoint", a, b]
        failures.append(_replay(argv + ["--witness"], argv, tmp_path, f"d{m}_{n}.json"))
        replays += 1
        ua = save(f"u{m}.json", measure.uniform_cycle(m).to_descriptor())
        ub = save(f"u{n}.json", measure.uniform_cycle(n).to_descriptor())
        argv = ["measure", "disjoint", ua, ub]
        failures.append(_replay(argv, argv, tmp_path, f"m{m}_{n}.json"))
        replays += 1

    sft_cases = [[[0, 1], [1, 0]]] + irreducible_matrices(random.Random(88), 4, 20)
    for i, m in enumerate(sft_cases):
        path = save(f"sft{i}.json", {"type": "sft", "matrix": m})
        for p in range(1, 13):
            if symbolic.sft_disjoint_from_cycle(make_sft(m), p).disjoint:
                continue
            argv = ["sft", "cycle-disjoint", path, "--p", str(p)]
            failures.append(_replay(argv + ["--witness"], argv, tmp_path, f"s{i}_{p}.json"))
            replays += 1

    for argv in (
        ["sweep", "measure-a2", "--trials", "200", "--seed", "7"],
        ["sweep", "measure-a2", "--trials", "50", "--seed", "7", "--out", "json"],
        ["sweep", "gcd", "--max", "8"],
        ["quasifactors", save("c6.json", cycle_system(6).to_descriptor()), "--orders", "--family"],
    ):
        if _run(argv) != _run(argv):
            failures.append(("not byte-identical", argv))
    failures = [f for f in failures if f is not None]
    record(10, f"{replays} witness replays and byte-identical reruns", failures, time.perf_counter() - start)
