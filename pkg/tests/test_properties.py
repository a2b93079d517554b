"""Oracles: max union, union-boundedness, matchings, intersections,
cross-dependence, and the incremental union profile."""
import random
from itertools import combinations, product

import pytest
from hypothesis import given, settings, strategies as st

from ufam.core import (
    Family,
    complete_family,
    fully_shift,
    ksubset_masks,
    link,
    shadow,
    shift_family,
)
from ufam.catalog import prefix_family
from ufam.properties import (
    UnionProfile,
    are_cross_dependent,
    is_t_intersecting,
    is_union_bounded,
    matching_number,
    max_union,
    union_bound_equivalences,
)


def fam(sets, n):
    return Family.from_sets(sets, n)


def brute_max_union(family, s):
    """Independent oracle: enumerate all subfamilies of size min(s, |F|)."""
    masks = family.masks
    if not masks:
        return 0
    t = min(s, len(masks))
    best = 0
    for sub in combinations(masks, t):
        u = 0
        for m in sub:
            u |= m
        best = max(best, u.bit_count())
    return best


def random_family(rng, n_max=9, k_max=3, size_max=12):
    n = rng.randint(3, n_max)
    k = rng.randint(2, min(k_max, n))
    universe = ksubset_masks(n, k)
    size = rng.randint(0, min(size_max, len(universe)))
    return Family.from_masks(n, k, rng.sample(universe, size))


# ---------------------------------------------------------------------------
# max_union / is_union_bounded
# ---------------------------------------------------------------------------

def test_max_union_examples():
    assert max_union(fam([[1, 2], [3, 4]], 6), 2) == 4
    # star: s members of a star cover at most 1 + s(k-1) elements, attained
    for s in (2, 3, 4):
        n, k = 1 + s * 2 + 1, 3
        star = prefix_family(1, 1, n, k)
        assert max_union(star, s) == 1 + s * (k - 1)
    # the complete 3-graph on [7] never unions past 7, and attains it
    assert max_union(complete_family(7, 3), 3) == 7


def test_max_union_empty_and_errors():
    assert max_union(Family.empty(5, 2), 3) == 0
    with pytest.raises(ValueError):
        max_union(fam([[1, 2]], 5), 0)


def test_max_union_agrees_with_bruteforce():
    rng = random.Random(11)
    for _ in range(250):
        g = random_family(rng)
        for s in (2, 3):
            assert max_union(g, s) == brute_max_union(g, s)


def test_max_union_monotone_in_s():
    rng = random.Random(5)
    for _ in range(100):
        g = random_family(rng)
        values = [max_union(g, s) for s in (1, 2, 3, 4)]
        assert values == sorted(values)


def test_union_bounded_examples():
    assert is_union_bounded(complete_family(7, 3), 3, 7)
    # three 3-sets of [8] can cover all 8 elements
    assert not is_union_bounded(complete_family(8, 3), 3, 7)
    assert max_union(complete_family(8, 3), 3) == 8
    # a single member unions to k with itself, whatever s
    single = fam([[2, 5, 6]], 8)
    for s in (2, 5):
        assert is_union_bounded(single, s, 3)
        assert not is_union_bounded(single, s, 2)


def test_union_bounded_matches_max_union():
    rng = random.Random(23)
    for _ in range(150):
        g = random_family(rng)
        if not g.masks:
            continue  # empty family is vacuously bounded for every q
        s = rng.randint(2, 4)
        mu = max_union(g, s)
        for q in (mu - 1, mu, mu + 1):
            assert is_union_bounded(g, s, q) == (mu <= q)


# ---------------------------------------------------------------------------
# UnionProfile
# ---------------------------------------------------------------------------

def test_union_profile_agrees_with_scratch_recompute():
    rng = random.Random(17)
    for _ in range(120):
        g = random_family(rng, size_max=10)
        s = rng.randint(1, 4)
        order = list(g.masks)
        rng.shuffle(order)
        profile = UnionProfile(s)
        inserted = []
        for m in order:
            profile.add(m)
            inserted.append(m)
            partial = Family.from_masks(g.n, g.k, inserted)
            assert profile.max_union() == max_union(partial, s)


def test_union_profile_levels_are_antichains():
    rng = random.Random(29)
    for _ in range(60):
        g = random_family(rng, size_max=10)
        profile = UnionProfile(3)
        for m in g.masks:
            profile.add(m)
        for level in profile.levels:
            for a in level:
                for b in level:
                    if a != b:
                        assert a | b != a and a | b != b


def test_union_profile_with_added_matches_bound_check():
    rng = random.Random(31)
    for _ in range(120):
        g = random_family(rng, size_max=9)
        if not g.masks:
            continue
        s = rng.randint(2, 3)
        q = rng.randint(g.k, 2 * g.k + 2)
        profile = UnionProfile(s)
        members = []
        for m in g.masks:
            child = profile.with_added(m, q)
            extended = Family.from_masks(g.n, g.k, members + [m])
            if max_union(extended, s) <= q:
                assert child is not None
                profile = child
                members.append(m)
            else:
                assert child is None


# ---------------------------------------------------------------------------
# matching number
# ---------------------------------------------------------------------------

def test_matching_number_complete_families():
    # nu of the complete k-graph on (s+1)k - 1 vertices is s
    for s, k in product((1, 2, 3), (2, 3)):
        assert matching_number(complete_family((s + 1) * k - 1, k)) == s


def test_matching_number_examples():
    assert matching_number(fam([[1, 2], [2, 3], [1, 3]], 4)) == 1
    assert matching_number(Family.empty(5, 2)) == 0


def brute_matching(family):
    best = 0
    masks = family.masks
    for size in range(1, len(masks) + 1):
        for sub in combinations(masks, size):
            u = 0
            ok = True
            for m in sub:
                if m & u:
                    ok = False
                    break
                u |= m
            if ok:
                best = size
    return best


def test_matching_number_agrees_with_bruteforce():
    rng = random.Random(41)
    for _ in range(120):
        g = random_family(rng, n_max=8, size_max=8)
        assert matching_number(g) == brute_matching(g)


# ---------------------------------------------------------------------------
# t-intersecting
# ---------------------------------------------------------------------------

def test_t_intersecting_examples():
    star = prefix_family(1, 1, 7, 3)
    assert is_t_intersecting(star, 1)
    assert not is_t_intersecting(fam([[1, 2, 3], [4, 5, 6]], 6), 1)
    with pytest.raises(ValueError):
        is_t_intersecting(star, 4)


def test_two_band_candidates_are_t_intersecting():
    # A(2i+t, i+t) is t-intersecting: any two members each hold i+t of the
    # first 2i+t elements, so they overlap in >= t of them
    for n in range(6, 11):
        for t in (1, 2):
            for i in range(0, 3):
                k = 3
                if i + t > k or 2 * i + t > n:
                    continue
                g = prefix_family(2 * i + t, i + t, n, k)
                assert is_t_intersecting(g, t), (n, t, i)


# ---------------------------------------------------------------------------
# cross-dependence
# ---------------------------------------------------------------------------

def test_cross_dependent_examples():
    a = fam([[1, 2]], 4)
    assert are_cross_dependent([a, a])
    assert not are_cross_dependent([fam([[1, 2]], 4), fam([[3, 4]], 4)])
    with pytest.raises(ValueError):
        are_cross_dependent([])


def test_cross_dependent_repeats_with_small_matching():
    # s+1 copies of a family with matching number < s+1 admit no transversal
    g = complete_family(5, 2)  # nu = 2
    assert are_cross_dependent([g, g, g])
    assert not are_cross_dependent([g, g])


def brute_has_transversal(families):
    for choice in product(*[f.masks for f in families]):
        used = 0
        ok = True
        for m in choice:
            if m & used:
                ok = False
                break
            used |= m
        if ok:
            return True
    return False


def test_cross_dependent_agrees_with_bruteforce():
    rng = random.Random(53)
    for _ in range(80):
        n = rng.randint(4, 7)
        k = 2
        universe = ksubset_masks(n, k)
        fams = [Family.from_masks(n, k, rng.sample(universe, rng.randint(1, 5)))
                for _ in range(rng.randint(2, 3))]
        assert are_cross_dependent(fams) == (not brute_has_transversal(fams))


# ---------------------------------------------------------------------------
# classical equivalences
# ---------------------------------------------------------------------------

def test_equivalences_on_fixed_families():
    # k=3: union-bounded (2,5) <=> intersecting; (3,8) <=> matching <= 2
    for g in (prefix_family(1, 1, 8, 3), complete_family(8, 3),
              prefix_family(4, 2, 8, 3)):
        rep = union_bound_equivalences(g, 2, 1)
        assert rep.ok


def test_equivalences_randomized():
    rng = random.Random(8)
    for _ in range(100):
        universe = ksubset_masks(8, 3)
        g = Family.from_masks(8, 3, rng.sample(universe, rng.randint(1, 14)))
        for t in (1, 2, 3):
            for s in (1, 2, 3):
                assert union_bound_equivalences(g, s, t).ok


# ---------------------------------------------------------------------------
# compression preserves the union bound
# ---------------------------------------------------------------------------

@given(st.data())
@settings(max_examples=150, deadline=None)
def test_shift_never_increases_max_union(data):
    n = data.draw(st.integers(4, 10))
    k = data.draw(st.integers(2, 3))
    universe = ksubset_masks(n, k)
    members = data.draw(st.lists(st.sampled_from(universe), max_size=10, unique=True))
    g = Family.from_masks(n, k, members)
    i = data.draw(st.integers(1, n - 1))
    j = data.draw(st.integers(i + 1, n))
    s = data.draw(st.integers(2, 3))
    assert max_union(shift_family(g, i, j), s) <= max_union(g, s)


def test_restriction_of_shifted_family_tightens_union_bound():
    # for a shifted family whose s-member unions stay within sk - 1, the
    # subfamily avoiding [r] keeps its unions within sk - 1 - r
    rng = random.Random(99)
    checked = 0
    for _ in range(800):
        n = rng.randint(4, 9)
        k = rng.randint(2, 3)
        s = rng.randint(2, 3)
        universe = ksubset_masks(n, k)
        g = fully_shift(Family.from_masks(
            n, k, rng.sample(universe, rng.randint(1, min(14, len(universe))))))
        q = s * k - 1
        if not is_union_bounded(g, s, q):
            continue
        for r in range(1, min(3, n)):
            restricted = link(g, [], list(range(1, r + 1)))
            if restricted.masks:
                assert is_union_bounded(restricted, s, q - r)
                checked += 1
    assert checked > 100


# ---------------------------------------------------------------------------
# shadow vs matching inequality
# ---------------------------------------------------------------------------

def test_shadow_size_bounds_family_size_for_bounded_matchings():
    rng = random.Random(61)
    for _ in range(120):
        g = random_family(rng, n_max=9, size_max=12)
        if not g.masks or g.k < 2:
            continue
        nu = matching_number(g)
        assert nu * len(shadow(g)) >= len(g)
