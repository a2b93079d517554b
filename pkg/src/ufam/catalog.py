"""Closed-form constructions, cardinality formulas, and exact-value rules.

The extremal candidates are the prefix families A(p, r, n, k): all k-subsets
of [n] meeting [p] in at least r elements.  For a union budget q written as
q = (k-r)s + p with r <= p <= s+r-2 (a decomposition that exists and is
unique for every q in [k, sk-1]), the conjectured maximum is the largest of
the candidates A(p+is, r+i) for 0 <= i <= k-r, each of which is
union-bounded (s, q).

Every rule that pins the maximum exactly in some parameter range is exposed
as a provenance-tagged BoundRecord; records for one instance are reconciled
and any lower > upper inconsistency is a hard error.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import comb

from .core import Family, ksubset_masks

KIND_LOWER = "lower"
KIND_UPPER = "upper"
KIND_EXACT = "exact"

PROV_CONSTRUCTION = "construction-max"
PROV_COVER_SUM = "shifted-cover-sum"
PROV_SMALL_Q = "small-q-complete"
PROV_K2 = "k2-two-candidate"
PROV_SECOND_BAND = "second-band-two-candidate"
PROV_THRESHOLD = "large-n-threshold"
PROV_STAR_THRESHOLD = "star-threshold"
PROV_K3_CLIQUE = "k3-clique-range"
PROV_K3_MIDDLE = "k3-middle-range"
PROV_K3_Q7 = "k3-q7-complete"
PROV_LIFT = "ground-lift"
PROV_SEARCH = "search"

_CITATIONS = {
    PROV_CONSTRUCTION: "largest candidate construction A(p+is, r+i)",
    PROV_COVER_SUM: "shifted families lie in the union of the candidates; sum of candidate sizes",
    PROV_SMALL_Q: "for q <= k+s-2 the complete k-graph on [q] is extremal",
    PROV_K2: "k=2: the larger of A(r,1) and A(s+r,2) is exact for all n",
    PROV_SECOND_BAND: "r=k-1 band: the larger of A(p,k-1) and A(q,k) is exact",
    PROV_THRESHOLD: "above the explicit n-threshold the construction A(p,r) is exact",
    PROV_STAR_THRESHOLD: "coarse threshold n > s(s+2)k: the star is extremal",
    PROV_K3_CLIQUE: "k=3, q=2s+1, n <= 3s, s >= 10: the clique on [2s+1] is extremal",
    PROV_K3_MIDDLE: "k=3, q=2s+t, 5(s+t) <= n <= (s+t)^2/(3t): A(s+t,2) is extremal",
    PROV_K3_Q7: "k=3, s=3, q=7: the largest of the three candidates is exact for every n",
    PROV_LIFT: "lifted from the exact value at (n-1, q-1) in the first band",
    PROV_SEARCH: "exhaustive branch-and-bound over shifted families",
}


def citation_for(provenance: str) -> str:
    return _CITATIONS.get(provenance, provenance)


class NoDecompositionError(ValueError):
    pass


class BoundConflictError(RuntimeError):
    """Two bound records for one instance contradict each other."""


def decompose_q(k: int, s: int, q: int) -> tuple[int, int]:
    """The unique (p, r) with q = (k-r)s + p, 1 <= r <= k, r <= p <= s+r-2.

    The ranges for consecutive r tile [k, sk-1] contiguously, so the
    decomposition exists and is unique exactly on that interval.
    """
    if k < 1 or s < 2:
        raise ValueError(f"need k >= 1 and s >= 2, got k={k}, s={s}")
    if not k <= q <= s * k - 1:
        raise NoDecompositionError(f"q={q} outside [k, sk-1] = [{k}, {s * k - 1}]")
    for r in range(1, k + 1):
        p = q - (k - r) * s
        if r <= p <= s + r - 2:
            return p, r
    raise NoDecompositionError(f"no decomposition for k={k}, s={s}, q={q}")  # unreachable


@dataclass(frozen=True)
class ParamQuad:
    """A problem instance (n, k, s, q) with its derived decomposition (p, r)."""

    n: int
    k: int
    s: int
    q: int
    p: int = field(init=False)
    r: int = field(init=False)

    def __post_init__(self):
        if self.k < 2 or self.s < 2:
            raise ValueError(f"need k >= 2 and s >= 2, got k={self.k}, s={self.s}")
        if not self.k <= self.q < self.s * self.k:
            raise ValueError(f"need k <= q < s*k, got q={self.q}")
        if self.n <= self.q:
            raise ValueError(f"need n > q, got n={self.n}, q={self.q}")
        p, r = decompose_q(self.k, self.s, self.q)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "r", r)

    def key(self) -> str:
        return f"n={self.n},k={self.k},s={self.s},q={self.q}"


@dataclass(frozen=True)
class BoundRecord:
    """A value for the maximum family size, with provenance and status."""

    value: int
    kind: str  # KIND_LOWER | KIND_UPPER | KIND_EXACT
    provenance: str
    citation: str = ""
    detail: dict | None = None

    def __post_init__(self):
        if self.kind not in (KIND_LOWER, KIND_UPPER, KIND_EXACT):
            raise ValueError(f"bad kind {self.kind!r}")
        if not self.citation:
            object.__setattr__(self, "citation", citation_for(self.provenance))

    def to_dict(self) -> dict:
        d = {"value": self.value, "kind": self.kind, "provenance": self.provenance,
             "citation": self.citation}
        if self.detail:
            d["detail"] = self.detail
        return d

    @staticmethod
    def from_dict(d: dict) -> "BoundRecord":
        return BoundRecord(d["value"], d["kind"], d["provenance"],
                           d.get("citation", ""), d.get("detail"))


# ---------------------------------------------------------------------------
# Constructions and their sizes
# ---------------------------------------------------------------------------

def prefix_family(p: int, r: int, n: int, k: int) -> Family:
    """All k-subsets of [n] containing at least r of the first p elements.

    Shifted by construction: lowering an element never decreases the overlap
    with a prefix.
    """
    _check_prefix_params(p, r, n, k)
    pmask = (1 << p) - 1
    masks = [m for m in ksubset_masks(n, k) if (m & pmask).bit_count() >= r]
    return Family(n, k, tuple(masks))


def prefix_family_size(p: int, r: int, n: int, k: int) -> int:
    """|prefix_family(p, r, n, k)| = sum over i >= r of C(p,i) * C(n-p,k-i)."""
    _check_prefix_params(p, r, n, k)
    return sum(comb(p, i) * comb(n - p, k - i) for i in range(r, k + 1))


def _check_prefix_params(p: int, r: int, n: int, k: int) -> None:
    if not (0 <= r <= p <= n and r <= k <= n):
        raise ValueError(f"need 0 <= r <= p <= n and r <= k <= n, got p={p}, r={r}, n={n}, k={k}")


def conjecture_value(quad: ParamQuad) -> BoundRecord:
    """The conjectured exact value: max over i of |A(p+is, r+i)|.

    Each candidate is union-bounded (s, q) since any s of its members union
    to at most (p+is) + s(k-r-i) = q elements; the max is therefore always a
    valid lower bound.  The attaining i is recorded.
    """
    n, k, s = quad.n, quad.k, quad.s
    best_value, best_i = -1, -1
    for i in range(0, k - quad.r + 1):
        v = prefix_family_size(quad.p + i * s, quad.r + i, n, k)
        if v > best_value:
            best_value, best_i = v, i
    return BoundRecord(best_value, KIND_LOWER, PROV_CONSTRUCTION,
                       detail={"argmax_i": best_i,
                               "p": quad.p + best_i * s, "r": quad.r + best_i})


def conjecture_witness(quad: ParamQuad) -> Family:
    """The candidate construction attaining the conjectured value."""
    rec = conjecture_value(quad)
    assert rec.detail is not None
    return prefix_family(rec.detail["p"], rec.detail["r"], quad.n, quad.k)


def candidate_cover_upper(quad: ParamQuad) -> BoundRecord:
    """Upper bound: every shifted union-bounded family is contained in the
    union of the candidate constructions, so their total size bounds the max."""
    total = sum(prefix_family_size(quad.p + i * quad.s, quad.r + i, quad.n, quad.k)
                for i in range(0, quad.k - quad.r + 1))
    return BoundRecord(total, KIND_UPPER, PROV_COVER_SUM)


def candidate_universe(quad: ParamQuad) -> Family:
    """The union of the candidate constructions; hosts every maximal shifted
    union-bounded family."""
    masks: set[int] = set()
    for i in range(0, quad.k - quad.r + 1):
        masks.update(prefix_family(quad.p + i * quad.s, quad.r + i, quad.n, quad.k).masks)
    return Family(quad.n, quad.k, tuple(sorted(masks)))


# ---------------------------------------------------------------------------
# Threshold rules
# ---------------------------------------------------------------------------

def threshold_factor(s: int, p: int, r: int) -> Fraction:
    """The exact rational factor f(s, p, r) = s(s+1) * sum_{j<r} s^(r-1-j) C(p,j) / C(p,r)
    appearing in the large-n threshold.  Requires 1 <= r <= p."""
    if not 1 <= r <= p:
        raise ValueError(f"need 1 <= r <= p, got r={r}, p={p}")
    if s < 1:
        raise ValueError(f"need s >= 1, got {s}")
    numerator = sum(s ** (r - 1 - j) * comb(p, j) for j in range(r))
    return Fraction(s * (s + 1) * numerator, comb(p, r))


def large_n_exact_bound(n: int, k: int, s: int, p: int, r: int) -> BoundRecord | None:
    """Exact value |A(p,r)| when n clears the threshold p+1+(s+f(s,p,r))(k-r).

    Here s counts one fewer than the number of unioned members: the rule
    applies to instances with union parameters (s+1, (k-r)(s+1)+p).  The
    comparison is exact rational arithmetic; returns None below threshold.
    """
    if not (1 <= r <= k and r <= p <= s + r - 1):
        raise ValueError(f"need 1 <= r <= k and r <= p <= s+r-1, got p={p}, r={r}, k={k}, s={s}")
    threshold = p + 1 + (s + threshold_factor(s, p, r)) * (k - r)
    if Fraction(n) < threshold:
        return None
    return BoundRecord(prefix_family_size(p, r, n, k), KIND_EXACT, PROV_THRESHOLD,
                       detail={"threshold": str(threshold), "p": p, "r": r})


def star_threshold_bound(n: int, k: int, s: int) -> BoundRecord | None:
    """Exact star value C(n-1, k-1) under the coarser hypothesis n > s(s+2)k,
    for instances with union parameters (s+1, k+s(k-1))."""
    if n <= s * (s + 2) * k:
        return None
    return BoundRecord(comb(n - 1, k - 1), KIND_EXACT, PROV_STAR_THRESHOLD,
                       detail={"threshold": s * (s + 2) * k})


def threshold_exact_bound(quad: ParamQuad) -> BoundRecord | None:
    """Quad-level dispatch of the large-n threshold rule (uses the displayed
    threshold, which is weaker than the coarse star form)."""
    return large_n_exact_bound(quad.n, quad.k, quad.s - 1, quad.p, quad.r)


# ---------------------------------------------------------------------------
# Exact-range rules and the dispatcher
# ---------------------------------------------------------------------------

def special_bounds(quad: ParamQuad, ledger: "BoundsLedger | None" = None) -> list[BoundRecord]:
    """All applicable exact-range rules for one instance; possibly empty."""
    n, k, s, q, p, r = quad.n, quad.k, quad.s, quad.q, quad.p, quad.r
    out: list[BoundRecord] = []

    if r == k:  # q <= k + s - 2
        out.append(BoundRecord(comb(q, k), KIND_EXACT, PROV_SMALL_Q))

    if k == 2 and r == 1:
        value = max(prefix_family_size(p, 1, n, 2), prefix_family_size(s + p, 2, n, 2))
        out.append(BoundRecord(value, KIND_EXACT, PROV_K2))

    if r == k - 1:  # q = s + t + k - 3 with t = p - k + 3 in [2, s]
        value = max(prefix_family_size(q, k, n, k), prefix_family_size(p, k - 1, n, k))
        out.append(BoundRecord(value, KIND_EXACT, PROV_SECOND_BAND,
                               detail={"t": p - k + 3}))

    if k == 3 and r == 1 and p == 1 and s >= 10 and n <= 3 * s:
        out.append(BoundRecord(comb(2 * s + 1, 3), KIND_EXACT, PROV_K3_CLIQUE))

    if k == 3 and r == 1 and s > p >= 1:
        t = p
        if 5 * (s + t) <= n and 3 * t * n <= (s + t) ** 2:
            out.append(BoundRecord(prefix_family_size(s + t, 2, n, 3), KIND_EXACT,
                                   PROV_K3_MIDDLE, detail={"t": t}))

    if k == 3 and s == 3 and q == 7:
        value = max(prefix_family_size(1, 1, n, 3),
                    prefix_family_size(4, 2, n, 3),
                    prefix_family_size(7, 3, n, 3))
        out.append(BoundRecord(value, KIND_EXACT, PROV_K3_Q7))

    if ledger is not None and r == 1 and p >= 2:
        lifted = _ground_lift(quad, ledger)
        if lifted is not None:
            out.append(lifted)

    thr = threshold_exact_bound(quad)
    if thr is not None:
        out.append(thr)

    return out


def _ground_lift(quad: ParamQuad, ledger: "BoundsLedger") -> BoundRecord | None:
    """First-band recursion: an exact value C(n-1,k) - C(n-p,k) at
    (n-1, k, s, q-1) lifts to the exact value C(n,k) - C(n-p,k) here."""
    n, k, s, q, p = quad.n, quad.k, quad.s, quad.q, quad.p
    try:
        base = ParamQuad(n - 1, k, s, q - 1)
    except ValueError:
        return None
    stored = ledger.exact(base)
    if stored is None or stored.value != comb(n - 1, k) - comb(n - p, k):
        return None
    return BoundRecord(comb(n, k) - comb(n - p, k), KIND_EXACT, PROV_LIFT,
                       detail={"base": base.key()})


def all_bounds(quad: ParamQuad, ledger: "BoundsLedger | None" = None) -> list[BoundRecord]:
    """Conjectured value, cover-sum upper bound, and every applicable exact
    rule; the combined list is reconciled (hard error on inconsistency)."""
    records = [conjecture_value(quad), candidate_cover_upper(quad)]
    records.extend(special_bounds(quad, ledger))
    reconcile(quad, records)
    return records


def reconcile(quad: ParamQuad, records: list[BoundRecord]) -> tuple[int, int, int | None]:
    """Best (lower, upper, exact-or-None) over the records; raises
    BoundConflictError naming both provenances on any contradiction."""
    lower: BoundRecord | None = None
    upper: BoundRecord | None = None
    exact: BoundRecord | None = None
    for rec in records:
        if rec.kind == KIND_EXACT:
            if exact is not None and exact.value != rec.value:
                raise BoundConflictError(
                    f"{quad.key()}: exact {exact.value} ({exact.provenance}) vs "
                    f"exact {rec.value} ({rec.provenance})")
            exact = exact or rec
        elif rec.kind == KIND_LOWER:
            if lower is None or rec.value > lower.value:
                lower = rec
        else:
            if upper is None or rec.value < upper.value:
                upper = rec
    for low, high in ((lower, upper), (lower, exact), (exact, upper)):
        if low is not None and high is not None and low.value > high.value:
            raise BoundConflictError(
                f"{quad.key()}: {low.kind} {low.value} ({low.provenance}) exceeds "
                f"{high.kind} {high.value} ({high.provenance})")
    return (
        lower.value if lower else 0,
        upper.value if upper else comb(quad.n, quad.k),
        exact.value if exact else None,
    )


class BoundsLedger:
    """Keyed accumulation of bound records per instance, with monotone merge:
    lower bounds only increase, upper bounds only decrease, exact values are
    set once and never silently contradicted."""

    def __init__(self):
        self._table: dict[str, dict[str, BoundRecord]] = {}

    def add(self, quad: ParamQuad, record: BoundRecord) -> None:
        slot = self._table.setdefault(quad.key(), {})
        kept = dict(slot)
        if record.kind == KIND_EXACT:
            if KIND_EXACT in kept and kept[KIND_EXACT].value != record.value:
                raise BoundConflictError(
                    f"{quad.key()}: exact {kept[KIND_EXACT].value} "
                    f"({kept[KIND_EXACT].provenance}) vs exact {record.value} "
                    f"({record.provenance})")
            kept.setdefault(KIND_EXACT, record)
        elif record.kind == KIND_LOWER:
            if KIND_LOWER not in kept or record.value > kept[KIND_LOWER].value:
                kept[KIND_LOWER] = record
        else:
            if KIND_UPPER not in kept or record.value < kept[KIND_UPPER].value:
                kept[KIND_UPPER] = record
        reconcile(quad, list(kept.values()))
        slot.clear()
        slot.update(kept)

    def add_all(self, quad: ParamQuad, records: list[BoundRecord]) -> None:
        for rec in records:
            self.add(quad, rec)

    def records(self, quad: ParamQuad) -> list[BoundRecord]:
        return list(self._table.get(quad.key(), {}).values())

    def exact(self, quad: ParamQuad) -> BoundRecord | None:
        return self._table.get(quad.key(), {}).get(KIND_EXACT)

    def __len__(self) -> int:
        return len(self._table)

    def items(self):
        """(key, {kind: record}) pairs for every stored instance."""
        return self._table.items()

    def _sorted_keys(self) -> list[str]:
        def sort_key(key):
            fields = dict(part.split("=") for part in key.split(","))
            return tuple(int(fields[name]) for name in ("k", "s", "q", "n"))

        return sorted(self._table, key=sort_key)

    def export_json(self) -> list[dict]:
        """Every stored record as a flat dict with instance parameters."""
        out = []
        for key in self._sorted_keys():
            fields = dict(part.split("=") for part in key.split(","))
            n, k, s, q = (int(fields[name]) for name in ("n", "k", "s", "q"))
            p, r = decompose_q(k, s, q)
            for kind in (KIND_EXACT, KIND_LOWER, KIND_UPPER):
                rec = self._table[key].get(kind)
                if rec is None:
                    continue
                out.append({"n": n, "k": k, "s": s, "q": q, "p": p, "r": r,
                            "value": rec.value, "kind": rec.kind,
                            "provenance": rec.provenance,
                            "citation": rec.citation})
        return out

    def export_csv(self) -> str:
        """One row per instance carrying its best-known record (an exact
        value when stored, otherwise the strongest lower bound)."""
        lines = ["n,k,s,q,p,r,value,kind,provenance,citation"]
        for key in self._sorted_keys():
            slot = self._table[key]
            rec = slot.get(KIND_EXACT) or slot.get(KIND_LOWER) or slot.get(KIND_UPPER)
            fields = dict(part.split("=") for part in key.split(","))
            n, k, s, q = (int(fields[name]) for name in ("n", "k", "s", "q"))
            p, r = decompose_q(k, s, q)
            citation = rec.citation.replace('"', "'")
            lines.append(f'{n},{k},{s},{q},{p},{r},{rec.value},{rec.kind},'
                         f'{rec.provenance},"{citation}"')
        return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# k=3 crossover report
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class K3CrossoverReport:
    """Sizes and pairwise differences of the three k=3 candidates
    F1 = A(t,1), F2 = A(s+t,2), F3 = A(2s+t,3), by formula and by explicit
    construction (the two must agree)."""

    n: int
    s: int
    t: int
    sizes: tuple[int, int, int]
    sizes_constructed: tuple[int, int, int]
    diffs: dict[str, int]
    diffs_constructed: dict[str, int]
    maximal: tuple[int, ...]  # indices in {1,2,3} attaining the max size

    @property
    def consistent(self) -> bool:
        return self.sizes == self.sizes_constructed and self.diffs == self.diffs_constructed

    @property
    def f3_ge_f2(self) -> bool:
        return self.sizes[2] >= self.sizes[1]

    def t1_boundary_predicts_f3_ge_f2(self) -> bool | None:
        """For t=1 the crossover has the closed form
        3(s+1)(n-3s) <= (s-1)(s-2); None for t > 1."""
        if self.t != 1:
            return None
        return 3 * (self.s + 1) * (self.n - 3 * self.s) <= (self.s - 1) * (self.s - 2)


def k3_crossover_report(n: int, s: int, t: int) -> K3CrossoverReport:
    """Compare the three k=3 candidate families for union budget q = 2s + t."""
    if not s > t >= 1:
        raise ValueError(f"need s > t >= 1, got s={s}, t={t}")
    q = 2 * s + t
    if n <= q:
        raise ValueError(f"need n > q = 2s+t = {q} to host the families, got n={n}")

    f1 = prefix_family_size(t, 1, n, 3)
    f2 = prefix_family_size(s + t, 2, n, 3)
    f3 = comb(2 * s + t, 3)
    diffs = {
        "f1-f2": t * comb(n - s - t, 2),
        "f2-f1": comb(s, 2) * (n - s - t) + comb(s, 3),
        "f2-f3": comb(s + t, 2) * (n - 2 * s - t),
        "f3-f2": comb(s, 3) + (s + t) * comb(s, 2),
    }

    a1 = set(prefix_family(t, 1, n, 3).masks)
    a2 = set(prefix_family(s + t, 2, n, 3).masks)
    a3 = set(prefix_family(2 * s + t, 3, n, 3).masks)
    sizes_c = (len(a1), len(a2), len(a3))
    diffs_c = {
        "f1-f2": len(a1 - a2),
        "f2-f1": len(a2 - a1),
        "f2-f3": len(a2 - a3),
        "f3-f2": len(a3 - a2),
    }

    sizes = (f1, f2, f3)
    top = max(sizes)
    maximal = tuple(i + 1 for i, v in enumerate(sizes) if v == top)
    return K3CrossoverReport(n, s, t, sizes, sizes_c, diffs, diffs_c, maximal)


def second_candidate_comparison(n: int, k: int, s: int, p: int) -> dict:
    """Numeric comparison of the star-band candidate A(p,1) against the
    second candidate A(s+p,2); a report, not a theorem record."""
    star = prefix_family_size(p, 1, n, k)
    second = prefix_family_size(s + p, 2, n, k)
    return {"n": n, "k": k, "s": s, "p": p, "star_band": star,
            "second": second, "second_bigger": second > star}
