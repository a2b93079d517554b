"""Exact computation of the maximum union-bounded family size.

The main engine enumerates shifted families only: the union-bound property
is preserved by compression, so the maximum over shifted families equals the
overall maximum.  Shifted families are exactly the down-sets of the
coordinatewise order, and the candidate k-sets are scanned in colex order (a
linear extension of that order), so down-set consistency reduces to simple
bookkeeping: excluding a set excludes all its successors, and a set whose
predecessors are all present may be freely included.

A separate brute-force oracle searches over *all* families (no shifting,
no candidate-universe restriction) on tiny instances and is used to validate
the reduction end to end.
"""
from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from math import comb

from .catalog import ParamQuad, conjecture_value, conjecture_witness, candidate_universe
from .core import MAX_GROUND, Family, complete_family, elements_of, mask_of, mask_precedes
from .properties import UnionProfile

STATUS_OPTIMAL = "proved-optimal"
STATUS_BUDGET = "budget-exhausted"

STOP_NODES = "node-budget"
STOP_TIME = "time-budget"
STOP_TARGET = "target-reached"


class InstanceTooLargeError(ValueError):
    pass


class BudgetExhaustedError(RuntimeError):
    """Raised when an enumeration cannot be completed within budget."""


class CheckpointMismatchError(ValueError):
    """A checkpoint does not replay against the current instance."""


@dataclass(frozen=True)
class SearchBudget:
    """Limits for one search run; None means explicitly unbounded."""

    max_nodes: int | None = None
    max_seconds: float | None = None
    target: int | None = None


@dataclass(frozen=True)
class SearchOutcome:
    value: int
    witness: Family
    nodes: int
    elapsed: float
    status: str
    stop_reason: str | None = None

    @property
    def proved_optimal(self) -> bool:
        return self.status == STATUS_OPTIMAL


@dataclass
class SearchCheckpoint:
    """Resumable search state: the decided prefix over the colex candidate
    list, plus the best value and witness so far.

    `first_flags[i]` records whether decision i was the first-explored branch
    at its node; resuming re-runs the pending sibling subtrees only.
    """

    n: int
    k: int
    s: int
    q: int
    restricted: bool
    decided: str
    first_flags: str
    best_value: int
    best_witness: list[list[int]] = field(default_factory=list)

    def to_json(self) -> str:
        return json.dumps(self.__dict__, indent=1)

    @staticmethod
    def from_json(text: str) -> "SearchCheckpoint":
        return SearchCheckpoint(**json.loads(text))

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_json())

    @staticmethod
    def load(path) -> "SearchCheckpoint":
        with open(path, "r", encoding="utf-8") as fh:
            return SearchCheckpoint.from_json(fh.read())


class _Exhausted(Exception):
    def __init__(self, reason: str, trail: list[tuple[int, int]]):
        self.reason = reason
        self.trail = trail


class _ShiftedSearch:
    """Down-set branch and bound over a colex-ordered candidate list."""

    def __init__(self, quad: ParamQuad, candidates: list[int], budget: SearchBudget,
                 seed_value: int, conjecture: int, mode: str = "value",
                 resume: SearchCheckpoint | None = None):
        self.quad = quad
        self.cands = candidates
        self.N = len(candidates)
        self.budget = budget
        self.mode = mode
        self.conjecture = conjecture
        self.best = seed_value
        self.best_masks: list[int] | None = None
        self.ties: list[tuple[int, ...]] = []
        self.nodes = 0
        self.trail: list[tuple[int, int]] = []
        self.guide = resume
        # successor masks over candidate indices; colex is a linear extension,
        # so successors always sit at higher indices
        succ = [0] * self.N
        for i in range(self.N):
            mi = candidates[i]
            for j in range(i + 1, self.N):
                if mask_precedes(mi, candidates[j]):
                    succ[i] |= 1 << j
        self.succ = succ
        if resume is not None:
            if len(resume.decided) != len(resume.first_flags) or len(resume.decided) > self.N:
                raise CheckpointMismatchError("checkpoint prefix longer than candidate list")
            if resume.best_value > self.best:
                self.best = resume.best_value
                self.best_masks = [mask_of(elems, quad.n) for elems in resume.best_witness]

    def run(self) -> tuple[str, str | None, list[tuple[int, int]] | None]:
        self.t0 = time.perf_counter()
        self.deadline = (self.t0 + self.budget.max_seconds
                         if self.budget.max_seconds is not None else None)
        if self.budget.target is not None and self.best >= self.budget.target:
            return STATUS_BUDGET, STOP_TARGET, []
        try:
            self._dfs(0, 0, 0, UnionProfile(self.quad.s), [], self.guide is not None)
        except _Exhausted as stop:
            return STATUS_BUDGET, stop.reason, stop.trail
        return STATUS_OPTIMAL, None, None

    @property
    def elapsed(self) -> float:
        return time.perf_counter() - self.t0

    def _cutoff(self) -> int:
        if self.mode == "ties":
            return max(self.best, self.conjecture) - 1
        return self.best

    def _check_budget(self) -> None:
        b = self.budget
        if b.max_nodes is not None and self.nodes >= b.max_nodes:
            raise _Exhausted(STOP_NODES, list(self.trail))
        if self.deadline is not None and time.perf_counter() > self.deadline:
            raise _Exhausted(STOP_TIME, list(self.trail))

    def _leaf(self, size: int, chosen: list[int]) -> None:
        if self.mode == "ties":
            if size > self.best:
                self.best = size
                self.ties = [tuple(chosen)]
            elif size == self.best:
                self.ties.append(tuple(chosen))
            return
        if size > self.best:
            self.best = size
            self.best_masks = chosen.copy()
            if self.budget.target is not None and self.best >= self.budget.target:
                raise _Exhausted(STOP_TARGET, list(self.trail))

    def _dfs(self, idx: int, size: int, blocked: int, profile: UnionProfile,
             chosen: list[int], on_guide: bool) -> None:
        self.nodes += 1
        self._check_budget()
        forced = 0
        try:
            while idx < self.N and (blocked >> idx) & 1:
                self.trail.append((0, 1))
                forced += 1
                idx += 1
            if idx == self.N:
                self._leaf(size, chosen)
                return
            admissible = self.N - idx - (blocked >> idx).bit_count()
            if size + admissible <= self._cutoff():
                return

            guide_entry = None
            if on_guide and self.guide is not None and idx < len(self.guide.decided):
                guide_entry = (int(self.guide.decided[idx]),
                               int(self.guide.first_flags[idx]))

            if guide_entry is not None:
                glabel, gfirst = guide_entry
                if not self._branch(idx, size, blocked, profile, chosen,
                                    glabel, bool(gfirst), True):
                    raise CheckpointMismatchError(
                        f"checkpoint takes include at candidate {idx}, now infeasible")
                if gfirst:
                    self._branch(idx, size, blocked, profile, chosen,
                                 1 - glabel, False, False)
            else:
                first = 0 if self.best >= self.conjecture else 1
                ran = self._branch(idx, size, blocked, profile, chosen,
                                   first, True, False)
                self._branch(idx, size, blocked, profile, chosen,
                             1 - first, not ran, False)
        finally:
            del self.trail[len(self.trail) - forced:]

    def _branch(self, idx: int, size: int, blocked: int, profile: UnionProfile,
                chosen: list[int], label: int, first: bool, on_guide: bool) -> bool:
        """Execute one child subtree; returns False when an include branch is
        infeasible (union bound violated) and was not executed."""
        if label == 0:
            self.trail.append((0, int(first)))
            try:
                self._dfs(idx + 1, size, blocked | self.succ[idx], profile,
                          chosen, on_guide)
            finally:
                self.trail.pop()
            return True
        child = profile.with_added(self.cands[idx], self.quad.q)
        if child is None:
            return False
        self.trail.append((1, int(first)))
        chosen.append(self.cands[idx])
        try:
            self._dfs(idx + 1, size + 1, blocked, child, chosen, on_guide)
        finally:
            chosen.pop()
            self.trail.pop()
        return True


def _shifted_candidates(quad: ParamQuad, restrict: bool) -> list[int]:
    if quad.n > MAX_GROUND:
        raise InstanceTooLargeError(f"ground {quad.n} exceeds {MAX_GROUND}")
    fam = candidate_universe(quad) if restrict else complete_family(quad.n, quad.k)
    return list(fam.masks)


def exact_max_shifted(quad: ParamQuad, budget: SearchBudget | None = None, *,
                      restrict_universe: bool = True, seed: bool = True,
                      resume: SearchCheckpoint | None = None,
                      checkpoint_out=None) -> SearchOutcome:
    """The exact maximum size of a union-bounded family, by branch and bound
    over shifted families.

    The search is seeded with the conjectured construction value, so the
    returned value never falls below it; the witness is the construction
    itself unless the search finds something strictly larger.  On budget
    exhaustion the outcome carries a certified lower bound only, and a
    resumable checkpoint is written when `checkpoint_out` is given.
    """
    budget = budget or SearchBudget()
    if resume is not None:
        _validate_checkpoint(resume, quad, restrict_universe)
    conj = conjecture_value(quad).value
    seed_value = conj if seed else 0
    engine = _ShiftedSearch(quad, _shifted_candidates(quad, restrict_universe),
                            budget, seed_value, conj, "value", resume)
    status, stop_reason, trail = engine.run()
    if engine.best_masks is not None:
        witness = Family.from_masks(quad.n, quad.k, engine.best_masks)
    elif seed:
        witness = conjecture_witness(quad)
    else:
        witness = Family.empty(quad.n, quad.k)
    if status == STATUS_BUDGET and checkpoint_out is not None:
        _checkpoint_from_trail(quad, restrict_universe, trail or [],
                               engine.best, witness).save(checkpoint_out)
    return SearchOutcome(engine.best, witness, engine.nodes, engine.elapsed,
                         status, stop_reason)


def _validate_checkpoint(ck: SearchCheckpoint, quad: ParamQuad, restricted: bool) -> None:
    if (ck.n, ck.k, ck.s, ck.q) != (quad.n, quad.k, quad.s, quad.q):
        raise CheckpointMismatchError(
            f"checkpoint is for n={ck.n},k={ck.k},s={ck.s},q={ck.q}, not {quad.key()}")
    if ck.restricted != restricted:
        raise CheckpointMismatchError("checkpoint universe restriction differs")


def _checkpoint_from_trail(quad: ParamQuad, restricted: bool,
                           trail: list[tuple[int, int]], best_value: int,
                           witness: Family) -> SearchCheckpoint:
    return SearchCheckpoint(
        n=quad.n, k=quad.k, s=quad.s, q=quad.q, restricted=restricted,
        decided="".join(str(label) for label, _ in trail),
        first_flags="".join(str(flag) for _, flag in trail),
        best_value=best_value,
        best_witness=[list(elements_of(m)) for m in witness.masks],
    )


def enumerate_maximum_families(quad: ParamQuad, budget: SearchBudget | None = None, *,
                               restrict_universe: bool = True) -> list[Family]:
    """All shifted union-bounded families attaining the maximum size.

    The cutoff starts one below the conjectured value and ties are never cut,
    so co-optimal families are not suppressed.  Raises BudgetExhaustedError
    if the enumeration cannot be certified complete.
    """
    budget = budget or SearchBudget()
    conj = conjecture_value(quad).value
    engine = _ShiftedSearch(quad, _shifted_candidates(quad, restrict_universe),
                            budget, -1, conj, "ties")
    status, stop_reason, _ = engine.run()
    if status != STATUS_OPTIMAL:
        raise BudgetExhaustedError(
            f"tie enumeration for {quad.key()} stopped early ({stop_reason}); "
            f"{len(engine.ties)} families of size {engine.best} found so far")
    return [Family.from_masks(quad.n, quad.k, masks) for masks in sorted(engine.ties)]


# ---------------------------------------------------------------------------
# Brute-force validation oracle
# ---------------------------------------------------------------------------

def _union_violation_direct(mask: int, chosen: list[int], s: int, q: int) -> bool:
    # deliberately independent of UnionProfile: existence of at most s-1
    # chosen members whose union with `mask` exceeds q
    def rec(start: int, acc: int, slots: int) -> bool:
        if acc.bit_count() > q:
            return True
        if slots == 0:
            return False
        for i in range(start, len(chosen)):
            if rec(i + 1, acc | chosen[i], slots - 1):
                return True
        return False

    return rec(0, mask, s - 1)


def exact_max_bruteforce(quad: ParamQuad, max_candidates: int = 24) -> SearchOutcome:
    """The exact maximum over ALL families (not only shifted ones), by
    include/exclude search over every k-set with union-monotone pruning.

    Only feasible when C(n, k) <= max_candidates; used to validate the
    shifting reduction.
    """
    total = comb(quad.n, quad.k)
    if total > max_candidates:
        raise InstanceTooLargeError(
            f"C({quad.n},{quad.k}) = {total} exceeds the brute-force cap {max_candidates}")
    masks = list(complete_family(quad.n, quad.k).masks)
    N = len(masks)
    s, q = quad.s, quad.q
    t0 = time.perf_counter()
    best = 0
    best_masks: list[int] = []
    chosen: list[int] = []
    nodes = 0

    def dfs(idx: int, size: int) -> None:
        nonlocal best, best_masks, nodes
        nodes += 1
        if size + (N - idx) <= best:
            return
        if idx == N:
            best = size
            best_masks = chosen.copy()
            return
        m = masks[idx]
        if not _union_violation_direct(m, chosen, s, q):
            chosen.append(m)
            dfs(idx + 1, size + 1)
            chosen.pop()
        dfs(idx + 1, size)

    dfs(0, 0)
    witness = Family.from_masks(quad.n, quad.k, best_masks)
    return SearchOutcome(best, witness, nodes, time.perf_counter() - t0,
                         STATUS_OPTIMAL)
