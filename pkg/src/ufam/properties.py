"""Decision oracles for structural properties of uniform families.

The central property is being *union-bounded* with parameters (s, q): every
choice of s members, repetition allowed, has union of size at most q.  The
classical special cases, both checked exactly here, are t-intersecting
families (s=2, q=2k-t) and families with matching number below s
(parameters s+1 and (s+1)k-1).
"""
from __future__ import annotations

from dataclasses import dataclass

from .core import Family


def _suffix_unions(masks) -> list[int]:
    suffix = [0] * (len(masks) + 1)
    for i in range(len(masks) - 1, -1, -1):
        suffix[i] = suffix[i + 1] | masks[i]
    return suffix


def max_union(family: Family, s: int) -> int:
    """Largest union over subfamilies of size min(s, |family|); 0 if empty.

    Repetition in the s choices never increases a union, so subfamilies of
    size min(s, |family|) dominate all multiset choices; partial unions are
    likewise dominated by full-size ones, so they may be scored eagerly.
    """
    if s < 1:
        raise ValueError(f"s must be >= 1, got {s}")
    masks = family.masks
    if not masks:
        return 0
    t = min(s, len(masks))
    suffix = _suffix_unions(masks)
    best = 0

    def rec(i: int, depth: int, acc: int) -> None:
        nonlocal best
        size = acc.bit_count()
        if size > best:
            best = size
        if depth == t or (acc | suffix[i]).bit_count() <= best:
            return
        gain = 0
        for j in range(i, len(masks)):
            g = (masks[j] & ~acc).bit_count()
            if g > gain:
                gain = g
        if size + (t - depth) * gain <= best:
            return
        for j in range(i, len(masks)):
            if masks[j] & ~acc:  # zero-gain members are dominated
                rec(j + 1, depth + 1, acc | masks[j])

    rec(0, 0, 0)
    return best


def _union_exceeding(masks, t: int, q: int):
    """A <=t-subfamily whose union exceeds q elements, or None.

    Any partial union above q already witnesses failure: extending it to t
    members keeps the union above q.
    """
    suffix = _suffix_unions(masks)
    found: list[int] | None = None

    def rec(i: int, depth: int, acc: int, picked: list[int]) -> bool:
        nonlocal found
        size = acc.bit_count()
        if size > q:
            found = picked.copy()
            return True
        if depth == t or (acc | suffix[i]).bit_count() <= q:
            return False
        gain = 0
        for j in range(i, len(masks)):
            g = (masks[j] & ~acc).bit_count()
            if g > gain:
                gain = g
        if size + (t - depth) * gain <= q:
            return False
        for j in range(i, len(masks)):
            if not masks[j] & ~acc:
                continue
            picked.append(masks[j])
            if rec(j + 1, depth + 1, acc | masks[j], picked):
                return True
            picked.pop()
        return False

    rec(0, 0, 0, [])
    return found


def is_union_bounded(family: Family, s: int, q: int) -> bool:
    """True iff every s members (repetition allowed) have union of size <= q."""
    if s < 1:
        raise ValueError(f"s must be >= 1, got {s}")
    if not family.masks:
        return True
    t = min(s, len(family.masks))
    return _union_exceeding(family.masks, t, q) is None


class UnionProfile:
    """Incremental union tracker for a growing family.

    For each level j in 1..s it stores the antichain of inclusion-maximal
    unions achievable by some j-member subfamily of the sets added so far.
    Dominated masks are pruned at every level: every extension of a
    dominated union is itself dominated.  Mutable; owned by one worker.
    """

    __slots__ = ("s", "count", "levels")

    def __init__(self, s: int):
        if s < 1:
            raise ValueError(f"s must be >= 1, got {s}")
        self.s = s
        self.count = 0
        self.levels: list[list[int]] = [[] for _ in range(s)]

    def copy(self) -> "UnionProfile":
        dup = UnionProfile.__new__(UnionProfile)
        dup.s = self.s
        dup.count = self.count
        dup.levels = [level.copy() for level in self.levels]
        return dup

    @staticmethod
    def _merge(level: list[int], new: int) -> None:
        for m in level:
            if new | m == m:  # dominated by an existing union
                return
        level[:] = [m for m in level if m | new != new]
        level.append(new)

    def add(self, mask: int) -> None:
        """Account for one more member set."""
        top = min(self.s, self.count + 1)
        for j in range(top, 1, -1):
            below = self.levels[j - 2]
            target = self.levels[j - 1]
            for m in below:
                self._merge(target, mask | m)
        self._merge(self.levels[0], mask)
        self.count += 1

    def with_added(self, mask: int, q: int) -> "UnionProfile | None":
        """A new profile with one more member, or None if some union of at
        most s members would exceed q elements."""
        if mask.bit_count() > q:
            return None
        top = min(self.s, self.count + 1)
        for j in range(top, 1, -1):
            for m in self.levels[j - 2]:
                if (mask | m).bit_count() > q:
                    return None
        dup = self.copy()
        dup.add(mask)
        return dup

    def max_union(self) -> int:
        """Equals max_union(family, s) for the family added so far."""
        if self.count == 0:
            return 0
        level = self.levels[min(self.s, self.count) - 1]
        return max(m.bit_count() for m in level)


def matching_number(family: Family) -> int:
    """Maximum number of pairwise disjoint members, by branch and bound.

    Members are tried by smallest minimum element, ties broken by colex order.
    """
    masks = sorted(family.masks, key=lambda m: ((m & -m).bit_length(), m))
    if not masks:
        return 0
    n = family.n
    k = family.k
    best = 0

    def rec(start: int, used: int, size: int) -> None:
        nonlocal best
        if size > best:
            best = size
        if size + (n - used.bit_count()) // k <= best:
            return
        for i in range(start, len(masks)):
            m = masks[i]
            if not m & used:
                rec(i + 1, used | m, size + 1)

    rec(0, 0, 0)
    return best


def is_t_intersecting(family: Family, t: int) -> bool:
    """True iff every pair of members meets in at least t elements."""
    if not 1 <= t <= family.k:
        raise ValueError(f"t must be in [1, k={family.k}], got {t}")
    masks = family.masks
    for i in range(len(masks)):
        for j in range(i + 1, len(masks)):
            if (masks[i] & masks[j]).bit_count() < t:
                return False
    return True


def are_cross_dependent(families: list[Family]) -> bool:
    """True iff there is no transversal of pairwise disjoint representatives,
    one member chosen from each family (families may repeat)."""
    if not families:
        raise ValueError("need at least one family")
    n = families[0].n
    k = families[0].k
    for f in families:
        if f.n != n or f.k != k:
            raise ValueError("families must share ground size and uniformity")

    def rec(i: int, used: int) -> bool:
        # True iff a disjoint transversal of families[i:] avoiding `used` exists
        if i == len(families):
            return True
        for m in families[i].masks:
            if not m & used and rec(i + 1, used | m):
                return True
        return False

    return not rec(0, 0)


@dataclass(frozen=True)
class EquivalenceReport:
    """Cross-oracle consistency check between the union-bound oracle and the
    classical intersection / matching oracles."""

    union_bounded_2k_t: bool
    t_intersecting: bool
    union_bounded_matching: bool
    matching_at_most_s: bool

    @property
    def intersection_equivalence_holds(self) -> bool:
        return self.union_bounded_2k_t == self.t_intersecting

    @property
    def matching_equivalence_holds(self) -> bool:
        return self.union_bounded_matching == self.matching_at_most_s

    @property
    def ok(self) -> bool:
        return self.intersection_equivalence_holds and self.matching_equivalence_holds


def union_bound_equivalences(family: Family, s: int, t: int) -> EquivalenceReport:
    """Check both classical equivalences on one family:

    - union-bounded (2, 2k-t)  <=>  t-intersecting,
    - union-bounded (s+1, (s+1)k - 1)  <=>  matching number <= s.
    """
    k = family.k
    return EquivalenceReport(
        union_bounded_2k_t=is_union_bounded(family, 2, 2 * k - t),
        t_intersecting=is_t_intersecting(family, t),
        union_bounded_matching=is_union_bounded(family, s + 1, (s + 1) * k - 1),
        matching_at_most_s=matching_number(family) <= s,
    )
