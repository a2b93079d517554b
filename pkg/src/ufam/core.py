"""Ground representations for k-uniform set families over [n] = {1, ..., n}.

Sets are stored as bitmasks (element i occupies bit i-1), so all set algebra
is integer arithmetic.  On top of the raw masks this module provides the
coordinatewise shifting order on k-sets, the (i,j)-compression operator and
its fixpoint, shadows, and link/restriction subfamilies, plus a plain-text
family file format.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Iterator

# All set algebra is single-mask arithmetic; grounds beyond one machine word
# are out of scope for desk-scale instances.
MAX_GROUND = 64


class FamilyFormatError(ValueError):
    """Raised when a family text file does not parse."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)


def mask_of(elements: Iterable[int], n: int) -> int:
    """Pack ascending 1-based elements into a bitmask, validating range."""
    if not 1 <= n <= MAX_GROUND:
        raise ValueError(f"ground size must be in [1, {MAX_GROUND}], got {n}")
    mask = 0
    prev = 0
    count = 0
    for e in elements:
        if e <= prev:
            raise ValueError(f"elements must be strictly ascending, got {e} after {prev}")
        if e > n:
            raise ValueError(f"element {e} exceeds ground size {n}")
        mask |= 1 << (e - 1)
        prev = e
        count += 1
    if count == 0:
        raise ValueError("empty element list")
    return mask


def elements_of(mask: int) -> tuple[int, ...]:
    """Unpack a bitmask into its ascending 1-based elements."""
    out = []
    while mask:
        lsb = mask & -mask
        out.append(lsb.bit_length())
        mask ^= lsb
    return tuple(out)


@dataclass(frozen=True, slots=True)
class KSet:
    """A k-element subset of [n], stored as a bitmask.

    Immutable; the sorted element view is recovered from the mask.
    """

    mask: int
    n: int

    @property
    def k(self) -> int:
        return self.mask.bit_count()

    @property
    def elements(self) -> tuple[int, ...]:
        return elements_of(self.mask)

    def __contains__(self, element: int) -> bool:
        return 1 <= element <= self.n and bool(self.mask >> (element - 1) & 1)

    def __repr__(self) -> str:
        return "{" + ",".join(str(e) for e in self.elements) + "}"


def make_set(elements: Iterable[int], n: int) -> KSet:
    """Build a KSet from strictly ascending 1-based elements."""
    return KSet(mask_of(elements, n), n)


def ksubset_masks(n: int, k: int) -> list[int]:
    """All k-subset masks of [n] in colex order (= ascending mask value)."""
    if k < 0 or k > n:
        return []
    if k == 0:
        return [0]
    return sorted(mask_of(c, n) for c in combinations(range(1, n + 1), k))


@dataclass(frozen=True, slots=True)
class Family:
    """A duplicate-free k-uniform family over ground [n].

    Member masks are kept sorted in colex order (numeric mask order), which
    makes equality and down-set checks canonical.  Instances are immutable
    values; all operations return new families.
    """

    n: int
    k: int
    masks: tuple[int, ...]

    @staticmethod
    def from_masks(n: int, k: int, masks: Iterable[int]) -> "Family":
        uniq = sorted(set(masks))
        ground_mask = (1 << n) - 1
        for m in uniq:
            if m.bit_count() != k:
                raise ValueError(f"mask {m:#x} has {m.bit_count()} elements, expected {k}")
            if m & ~ground_mask:
                raise ValueError(f"mask {m:#x} has elements outside [1, {n}]")
        return Family(n, k, tuple(uniq))

    @staticmethod
    def from_sets(sets: Iterable[Iterable[int]], n: int, k: int | None = None) -> "Family":
        masks = [mask_of(s, n) for s in sets]
        if k is None:
            if not masks:
                raise ValueError("cannot infer k from an empty family; pass k explicitly")
            k = masks[0].bit_count()
        return Family.from_masks(n, k, masks)

    @staticmethod
    def empty(n: int, k: int) -> "Family":
        return Family(n, k, ())

    @property
    def members(self) -> tuple[KSet, ...]:
        return tuple(KSet(m, self.n) for m in self.masks)

    def sets(self) -> list[tuple[int, ...]]:
        return [elements_of(m) for m in self.masks]

    def __len__(self) -> int:
        return len(self.masks)

    def __iter__(self) -> Iterator[KSet]:
        return iter(self.members)

    def __contains__(self, item) -> bool:
        if isinstance(item, KSet):
            item = item.mask
        elif not isinstance(item, int):
            item = mask_of(item, self.n)
        return item in set(self.masks)

    def __repr__(self) -> str:
        body = ", ".join(repr(m) for m in self.members[:6])
        if len(self) > 6:
            body += f", ... ({len(self)} members)"
        return f"Family(n={self.n}, k={self.k}, {{{body}}})"


def complete_family(n: int, k: int) -> Family:
    """The full k-uniform hypergraph on [n]."""
    return Family(n, k, tuple(ksubset_masks(n, k)))


# ---------------------------------------------------------------------------
# Shifting order and compression
# ---------------------------------------------------------------------------

def precedes(g: KSet, f: KSet) -> bool:
    """Coordinatewise order on sorted element vectors: g precedes f iff the
    j-th smallest element of g is <= the j-th smallest element of f for all j.
    Reflexive."""
    if g.n != f.n:
        raise ValueError(f"ground mismatch: {g.n} vs {f.n}")
    if g.k != f.k:
        raise ValueError(f"uniformity mismatch: {g.k} vs {f.k}")
    return mask_precedes(g.mask, f.mask)


@dataclass(frozen=True, slots=True)
class ShiftOrderCertificate:
    """Auditable comparison of two k-sets in the shifting order: the pair
    plus the coordinatewise element comparison; valid iff every coordinate of
    the lower set is at most the matching coordinate of the upper set."""

    lower: KSet
    upper: KSet
    comparisons: tuple[tuple[int, int], ...]

    @property
    def valid(self) -> bool:
        return all(a <= b for a, b in self.comparisons)


def shift_order_certificate(g: KSet, f: KSet) -> ShiftOrderCertificate:
    if g.n != f.n or g.k != f.k:
        raise ValueError("certificate requires matching ground and uniformity")
    cert = ShiftOrderCertificate(g, f, tuple(zip(g.elements, f.elements)))
    assert cert.valid == precedes(g, f)
    return cert


def mask_precedes(g: int, f: int) -> bool:
    # a_j(g) <= a_j(f) for all j  <=>  every prefix [1..t] holds at least as
    # many elements of g as of f; checking prefixes ending at f's elements
    # suffices.
    rest = f
    while rest:
        lsb = rest & -rest
        prefix = 2 * lsb - 1
        if (g & prefix).bit_count() < (f & prefix).bit_count():
            return False
        rest ^= lsb
    return True


def cover_predecessor_masks(mask: int) -> list[int]:
    """Immediate predecessors in the shifting order: move one element down by
    one into a free slot.  Cover-closure equals full closure in this poset."""
    out = []
    m = mask
    while m:
        lsb = m & -m
        pos = lsb.bit_length() - 1  # 0-based bit position
        if pos > 0 and not (mask >> (pos - 1)) & 1:
            out.append(mask ^ lsb | (lsb >> 1))
        m ^= lsb
    return out


def shift_pair(f: KSet, i: int, j: int) -> KSet:
    """(i,j)-exchange on a single set: replace j by i when j is present and i
    is absent; otherwise return f unchanged.  Requires i < j."""
    if i >= j:
        raise ValueError(f"shift requires i < j, got i={i}, j={j}")
    if i < 1 or j > f.n:
        raise ValueError(f"positions ({i},{j}) outside ground [1, {f.n}]")
    bi, bj = 1 << (i - 1), 1 << (j - 1)
    if f.mask & bj and not f.mask & bi:
        return KSet(f.mask ^ bj | bi, f.n)
    return f


def shift_family(family: Family, i: int, j: int) -> Family:
    """(i,j)-compression of a family: each member is exchanged unless its
    image already lies in the family, in which case it is kept.  Cardinality
    is preserved."""
    if i >= j:
        raise ValueError(f"shift requires i < j, got i={i}, j={j}")
    bi, bj = 1 << (i - 1), 1 << (j - 1)
    present = set(family.masks)
    out = []
    for m in family.masks:
        if m & bj and not m & bi:
            image = m ^ bj | bi
            out.append(m if image in present else image)
        else:
            out.append(m)
    result = Family(family.n, family.k, tuple(sorted(out)))
    assert len(result) == len(family)
    return result


def fully_shift(family: Family) -> Family:
    """Apply (i,j)-compressions in lexicographic sweeps until a fixpoint.

    Terminates because each effective exchange strictly decreases the total
    element sum over all members.  The fixpoint is shifted and has the same
    cardinality; its identity may depend on sweep order.
    """
    cur = family
    while True:
        changed = False
        for j in range(2, cur.n + 1):
            for i in range(1, j):
                nxt = shift_family(cur, i, j)
                if nxt != cur:
                    cur = nxt
                    changed = True
        if not changed:
            return cur


def is_shifted(family: Family) -> bool:
    """True iff the family is downward closed under the shifting order."""
    present = set(family.masks)
    for m in family.masks:
        for pred in cover_predecessor_masks(m):
            if pred not in present:
                return False
    return True


# ---------------------------------------------------------------------------
# Shadows and links
# ---------------------------------------------------------------------------

def shadow(family: Family) -> Family:
    """All (k-1)-subsets of members."""
    if family.k < 1:
        raise ValueError("shadow requires k >= 1")
    out = set()
    for m in family.masks:
        rest = m
        while rest:
            lsb = rest & -rest
            out.add(m ^ lsb)
            rest ^= lsb
    return Family(family.n, family.k - 1, tuple(sorted(out)))


def link(family: Family, b: Iterable[int], x: Iterable[int]) -> Family:
    """The subfamily {F \\ X : F in family, F intersect X = B}, for B a subset
    of X.  Element labels are kept (no re-indexing); the result is
    (k - |B|)-uniform on the original ground."""
    n = family.n
    bmask = 0 if not b else mask_of(b, n)
    xmask = 0 if not x else mask_of(x, n)
    if bmask & ~xmask:
        raise ValueError("B must be a subset of X")
    out = [m & ~xmask for m in family.masks if m & xmask == bmask]
    return Family(n, family.k - bmask.bit_count(), tuple(sorted(set(out))))


def compact_ground(family: Family, drop: Iterable[int]) -> Family:
    """Relabel onto [n - |drop|] after removing unused ground elements.

    Every dropped element must be absent from all members; remaining labels
    are compacted order-preservingly.
    """
    n = family.n
    dmask = 0 if not drop else mask_of(drop, n)
    remap = {}
    new = 0
    for e in range(1, n + 1):
        if not (dmask >> (e - 1)) & 1:
            new += 1
            remap[e] = new
    out = []
    for m in family.masks:
        if m & dmask:
            raise ValueError("dropped element occurs in a member")
        out.append(mask_of([remap[e] for e in elements_of(m)], new) if m else 0)
    return Family(new, family.k, tuple(sorted(out)))


# ---------------------------------------------------------------------------
# Family text format
# ---------------------------------------------------------------------------
# One set per line as comma-separated ascending 1-based integers.  Blank
# lines and '#' comments are ignored.  A header line `ground=<n> k=<k>` is
# required before the first set.

def parse_family(text: str) -> Family:
    n = k = None
    masks = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if n is None:
            parts = line.split()
            try:
                fields = dict(p.split("=", 1) for p in parts)
                n = int(fields["ground"])
                k = int(fields["k"])
            except (ValueError, KeyError):
                raise FamilyFormatError(
                    f"expected header 'ground=<n> k=<k>', got {line!r}", lineno
                ) from None
            if not 1 <= n <= MAX_GROUND:
                raise FamilyFormatError(f"ground={n} outside [1, {MAX_GROUND}]", lineno)
            if not 0 <= k <= n:
                raise FamilyFormatError(f"k={k} outside [0, {n}]", lineno)
            continue
        try:
            elems = [int(tok) for tok in line.split(",")]
        except ValueError:
            raise FamilyFormatError(f"not a comma-separated integer list: {line!r}", lineno) from None
        try:
            m = mask_of(elems, n)
        except ValueError as exc:
            raise FamilyFormatError(str(exc), lineno) from None
        if m.bit_count() != k:
            raise FamilyFormatError(f"set has {m.bit_count()} elements, expected k={k}", lineno)
        masks.append(m)
    if n is None:
        raise FamilyFormatError("missing header 'ground=<n> k=<k>'")
    return Family.from_masks(n, k, masks)


def format_family(family: Family) -> str:
    lines = [f"ground={family.n} k={family.k}"]
    lines.extend(",".join(str(e) for e in elements_of(m)) for m in family.masks)
    return "\n".join(lines) + "\n"


def read_family(path) -> Family:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_family(fh.read())


def write_family(family: Family, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_family(family))
