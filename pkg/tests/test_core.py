import itertools
import random

import pytest
from hypothesis import given, settings

from conftest import systems
from oracles import orbit_count, product_perm

from dlab import core
from dlab.config import override
from dlab.core import FiniteSystem, Partition, StateSet, cycle_system
from dlab.errors import EmptySystem, InputError, NotABijection, NotInvariant, OverflowCap


def test_make_finite_system_examples():
    assert core.make_finite_system([0]).n == 1
    assert core.make_finite_system([1, 0]) == cycle_system(2)
    with pytest.raises(NotABijection):
        core.make_finite_system([0, 0])
    with pytest.raises(NotABijection):
        core.make_finite_system([0, 2])
    with pytest.raises(EmptySystem):
        core.make_finite_system([])


def test_state_set_basics():
    s = StateSet.of([0, 2, 4], 6)
    assert list(s) == [0, 2, 4]
    assert len(s) == 3 and 2 in s and 3 not in s
    assert s.complement() == StateSet.of([1, 3, 5], 6)
    assert (s | StateSet.of([1], 6)).to_list() == [0, 1, 2, 4]
    assert s.least() == 0
    with pytest.raises(InputError):
        StateSet.of([6], 6)
    with pytest.raises(InputError):
        s | StateSet.of([0], 5)


def test_product_examples():
    # oracle: orbit tracing on the explicitly built product permutation
    c2, c3 = cycle_system(2), cycle_system(3)
    assert orbit_count(product_perm(c2.perm, c3.perm)) == 1
    assert core.minimal_decomposition(core.product(c2, c3)).lengths == (6,)
    assert orbit_count(product_perm(c2.perm, c2.perm)) == 2
    assert core.minimal_decomposition(core.product(c2, c2)).lengths == (2, 2)
    x = FiniteSystem((2, 0, 1, 4, 3))
    assert core.product(core.identity_system(1), x) == x


def test_product_encoding_is_x_times_nb_plus_y():
    a, b = FiniteSystem((1, 2, 0)), FiniteSystem((1, 0))
    p = core.product(a, b)
    for x in range(3):
        for y in range(2):
            assert p.perm[x * 2 + y] == a.perm[x] * 2 + b.perm[y]


def test_product_cap():
    with override(max_states=10):
        with pytest.raises(OverflowCap):
            core.product(cycle_system(4), cycle_system(3))


@given(systems(max_n=4), systems(max_n=4), systems(max_n=4))
def test_product_associative_up_to_reencoding(a, b, c):
    left = core.product(core.product(a, b), c)
    right = core.product(a, core.product(b, c))
    nb, nc = b.n, c.n
    for x, y, z in itertools.product(range(a.n), range(b.n), range(c.n)):
        li = (x * nb + y) * nc + z
        ri = x * (nb * nc) + (y * nc + z)
        assert li == ri
        assert left.perm[li] == right.perm[ri]


def test_minimal_decomposition_examples():
    assert core.minimal_decomposition(cycle_system(4)).lengths == (4,)
    dec = core.minimal_decomposition(FiniteSystem((0, 2, 1)))
    assert [c.to_list() for c in dec.cycles] == [[0], [1, 2]]
    assert dec.lengths == (1, 2)
    assert core.minimal_decomposition(FiniteSystem((1, 0, 3, 2))).lengths == (2, 2)
    assert dec.to_json() == {"cycles": [[0], [1, 2]]}


def test_decomposition_partitions_exhaustive_small():
    for n in range(1, 7):
        for perm in itertools.permutations(range(n)):
            x = FiniteSystem(perm)
            dec = core.minimal_decomposition(x)
            bits = 0
            for c in dec.cycles:
                assert not bits & c.bits
                bits |= c.bits
                assert x.image(c) == c
            assert bits == (1 << n) - 1
            assert [c.least() for c in dec.cycles] == sorted(c.least() for c in dec.cycles)
            assert core.is_transitive(x) == (dec.lengths == (n,))


@settings(max_examples=200)
@given(systems(max_n=14))
def test_decomposition_partitions_random(x):
    dec = core.minimal_decomposition(x)
    assert sum(dec.lengths) == x.n
    assert len(dec) == orbit_count(x.perm)
    assert core.is_transitive(x) == (len(dec) == 1 and dec.lengths[0] == x.n)


@pytest.mark.parametrize(
    "perm, transitive, total, wm",
    [
        ((0,), True, True, True),
        ((1, 0), True, False, False),
        ((1, 2, 0), True, False, False),
        ((1, 2, 3, 4, 0), True, False, False),
        ((1, 2, 3, 4, 5, 6, 0), True, False, False),
        ((1, 0, 3, 2), False, False, False),
    ],
)
def test_transitivity_hierarchy(perm, transitive, total, wm):
    x = FiniteSystem(perm)
    assert core.is_transitive(x) is transitive
    assert core.is_totally_transitive(x) is total
    assert core.is_weakly_mixing(x) is wm


def test_totally_transitive_matches_powers():
    for k in range(1, 9):
        x = cycle_system(k)
        powers_transitive = all(core.is_transitive(x.power(m)) for m in range(1, k + 1))
        assert core.is_totally_transitive(x) == powers_transitive


def test_factor_by_partition_examples():
    c4 = cycle_system(4)
    p = Partition.from_blocks([[0, 2], [1, 3]], 4)
    assert core.factor_by_partition(c4, p) == cycle_system(2)
    x = FiniteSystem((2, 0, 1, 4, 3))
    singletons = Partition.from_blocks([[i] for i in range(5)], 5)
    assert core.factor_by_partition(x, singletons) == x
    with pytest.raises(NotInvariant):
        core.factor_by_partition(cycle_system(3), Partition.from_blocks([[0, 1], [2]], 3))


def test_partition_validation():
    with pytest.raises(InputError):
        Partition.from_blocks([[0, 1], [1, 2]], 3)
    with pytest.raises(InputError):
        Partition.from_blocks([[0]], 2)


@settings(max_examples=150)
@given(systems(max_n=10))
def test_random_partitions_are_invariant_and_quotients_commute(x):
    rng = random.Random(str(x.perm))
    for _ in range(3):
        p = core.random_invariant_partition(rng, x)
        labels = core.quotient_map(x, p)
        y = core.factor_by_partition(x, p)
        for s in range(x.n):
            assert labels[x.perm[s]] == y.perm[labels[s]]


def test_proximal_and_regionally_proximal_examples():
    assert core.proximal_relation(cycle_system(2)) == {(0, 0), (1, 1)}
    assert core.proximal_relation(core.identity_system(1)) == {(0, 0)}
    assert len(core.regionally_proximal(cycle_system(3))) == 3
    assert core.regionally_proximal(core.identity_system(1)) == {(0, 0)}
    c2c3 = core.disjoint_union(cycle_system(2), cycle_system(3))
    assert core.regionally_proximal(c2c3) == core.diagonal(5)


@settings(max_examples=100)
@given(systems(max_n=9))
def test_proximal_matches_orbit_distance(x):
    # inf over one full period of the discrete distance along the orbit
    brute = {
        (a, b)
        for a in range(x.n)
        for b in range(x.n)
        if any(x.power(k).perm[a] == x.power(k).perm[b] for k in range(x.period))
    }
    assert core.proximal_relation(x) == brute == core.regionally_proximal(x)
    assert len(brute) == x.n


def test_semi_simple():
    assert core.is_semi_simple(cycle_system(4))
    assert core.is_semi_simple(FiniteSystem((0, 2, 1)))


def test_subsystem_relabels():
    x = FiniteSystem((0, 3, 2, 1))
    sub, labels = core.subsystem(x, StateSet.of([1, 3], 4))
    assert labels == (1, 3) and sub == cycle_system(2)
    with pytest.raises(NotInvariant):
        core.subsystem(x, StateSet.of([1], 4))


def test_descriptor_round_trip():
    x = FiniteSystem((2, 0, 1))
    assert core.from_descriptor(x.to_descriptor()) == x
    with pytest.raises(InputError):
        core.from_descriptor({"type": "sft", "matrix": [[1]]})
