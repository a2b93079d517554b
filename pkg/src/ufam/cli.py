"""Command-line driver for verification campaigns.

Subcommands: bounds (formula ledger), exact (search one or more instances),
verify (search vs conjectured value, nonzero exit on refutation), oracle
(brute force vs shifted search), ties (enumerate all maximum families),
check-family (property report for a family file), crossover (k=3 candidate
comparison).  Campaign tables are emitted as CSV or JSON, optionally with
figures rendered alongside.
"""
from __future__ import annotations

import argparse
import csv
import fcntl
import io
import json
import sys
from dataclasses import dataclass, field
from itertools import product
from math import comb
from pathlib import Path

from . import __version__
from .catalog import (
    KIND_EXACT,
    KIND_LOWER,
    PROV_SEARCH,
    BoundConflictError,
    BoundRecord,
    BoundsLedger,
    ParamQuad,
    all_bounds,
    candidate_universe,
    conjecture_value,
    conjecture_witness,
    k3_crossover_report,
)
from .core import Family, FamilyFormatError, is_shifted, read_family, write_family
from .properties import is_union_bounded, matching_number, max_union
from .search import (
    STATUS_OPTIMAL,
    BudgetExhaustedError,
    SearchBudget,
    SearchCheckpoint,
    SearchOutcome,
    exact_max_bruteforce,
    exact_max_shifted,
    enumerate_maximum_families,
)

CAMPAIGN_FIELDS = ["n", "k", "s", "q", "p", "r", "value", "kind", "provenance",
                   "status", "nodes", "elapsed_ms", "citation"]
VERIFY_FIELDS = CAMPAIGN_FIELDS + ["verdict"]
CROSSOVER_FIELDS = ["s", "t", "n", "f1", "f2", "f3", "f1-f2", "f2-f1", "f2-f3",
                    "f3-f2", "maximal", "formula_matches_construction",
                    "t1_boundary_consistent"]


# ---------------------------------------------------------------------------
# Campaign plumbing
# ---------------------------------------------------------------------------

def parse_range(spec: str) -> list[int]:
    """Accepts 'A', 'A..B', or 'A,B,C'."""
    spec = spec.strip()
    if ".." in spec:
        lo, hi = spec.split("..", 1)
        lo_i, hi_i = int(lo), int(hi)
        if hi_i < lo_i:
            raise argparse.ArgumentTypeError(f"empty range {spec!r}")
        return list(range(lo_i, hi_i + 1))
    if "," in spec:
        return [int(tok) for tok in spec.split(",") if tok.strip()]
    return [int(spec)]


@dataclass
class Campaign:
    """Parameter ranges and execution settings for one CLI run."""

    ns: list[int]
    ks: list[int]
    ss: list[int]
    qs: list[int]
    mode: str
    budget: SearchBudget = field(default_factory=SearchBudget)
    fmt: str = "csv"
    out: str | None = None
    cache_path: str | None = None
    plot: bool = False

    def instances(self):
        """(n, k, s, q) tuples sorted so that ground lifts can chain."""
        return sorted(product(self.ns, self.ks, self.ss, self.qs),
                      key=lambda t: (t[1], t[2], t[3], t[0]))


def _campaign(args, mode: str) -> Campaign:
    return Campaign(
        ns=args.n, ks=args.k, ss=args.s, qs=args.q, mode=mode,
        budget=SearchBudget(max_nodes=getattr(args, "budget_nodes", None),
                            max_seconds=getattr(args, "budget_secs", None),
                            target=getattr(args, "target", None)),
        fmt=args.format, out=args.out,
        cache_path=getattr(args, "cache", None), plot=getattr(args, "plot", False),
    )


def _quad_or_error(n: int, k: int, s: int, q: int):
    try:
        return ParamQuad(n, k, s, q), None
    except ValueError as exc:
        return None, str(exc)


def _record_row(quad: ParamQuad, rec: BoundRecord, status: str = "",
                nodes="", elapsed_ms="") -> dict:
    return {"n": quad.n, "k": quad.k, "s": quad.s, "q": quad.q,
            "p": quad.p, "r": quad.r, "value": rec.value, "kind": rec.kind,
            "provenance": rec.provenance, "status": status, "nodes": nodes,
            "elapsed_ms": elapsed_ms, "citation": rec.citation}


def _error_row(n: int, k: int, s: int, q: int, message: str) -> dict:
    return {"n": n, "k": k, "s": s, "q": q, "p": "", "r": "", "value": "",
            "kind": "", "provenance": "error", "status": "error", "nodes": "",
            "elapsed_ms": "", "citation": message}


def _outcome_row(quad: ParamQuad, outcome: SearchOutcome, status=None) -> dict:
    kind = KIND_EXACT if outcome.proved_optimal else KIND_LOWER
    rec = BoundRecord(outcome.value, kind, PROV_SEARCH)
    return _record_row(quad, rec, status or outcome.status, outcome.nodes,
                       round(outcome.elapsed * 1000, 3))


def emit_rows(rows: list[dict], fieldnames: list[str], fmt: str,
              out: str | None) -> None:
    """Print the table to stdout and optionally write it to a file; CSV and
    JSON emissions carry identical values."""
    if fmt == "json":
        text = json.dumps(rows, indent=2, default=str) + "\n"
    else:
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=fieldnames, extrasaction="ignore",
                                lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
        text = buf.getvalue()
    sys.stdout.write(text)
    if out:
        Path(out).write_text(text, encoding="utf-8")


# ---------------------------------------------------------------------------
# Result cache
# ---------------------------------------------------------------------------

class ResultCache:
    """JSON-backed store of best known bounds and search summaries per
    instance.  Merge never degrades: exact values are set once, lower bounds
    only increase, upper bounds only decrease.  The cache file is owned
    exclusively by one campaign process (advisory lock)."""

    def __init__(self, path: str):
        self.path = Path(path)
        self.ledger = BoundsLedger()
        self.searches: dict[str, dict] = {}
        self._lock_fh = None

    def __enter__(self) -> "ResultCache":
        self._lock_fh = open(str(self.path) + ".lock", "w")
        try:
            fcntl.flock(self._lock_fh, fcntl.LOCK_EX | fcntl.LOCK_NB)
        except OSError:
            self._lock_fh.close()
            raise RuntimeError(f"cache {self.path} is in use by another campaign")
        self._load()
        return self

    def __exit__(self, exc_type, exc, tb) -> None:
        if exc_type is None:
            self.save()
        fcntl.flock(self._lock_fh, fcntl.LOCK_UN)
        self._lock_fh.close()
        self._lock_fh = None

    def _load(self) -> None:
        if not self.path.exists():
            return
        data = json.loads(self.path.read_text(encoding="utf-8"))
        stored = data.get("version")
        if stored != __version__:
            print(f"warning: cache {self.path} was written by version {stored}, "
                  f"this is {__version__}; cached exact values are reused",
                  file=sys.stderr)
        for key, entry in data.get("entries", {}).items():
            quad = _quad_from_key(key)
            for rec_dict in entry.get("bounds", {}).values():
                self.ledger.add(quad, BoundRecord.from_dict(rec_dict))
            if "search" in entry:
                self.searches[key] = entry["search"]

    def save(self) -> None:
        entries: dict[str, dict] = {}
        for key, slot in self.ledger.items():
            entries.setdefault(key, {})["bounds"] = {
                kind: rec.to_dict() for kind, rec in slot.items()}
        for key, summary in self.searches.items():
            entries.setdefault(key, {})["search"] = summary
        payload = {"version": __version__, "entries": entries}
        self.path.write_text(json.dumps(payload, indent=1, sort_keys=True) + "\n",
                             encoding="utf-8")

    def merge_outcome(self, quad: ParamQuad, outcome: SearchOutcome) -> None:
        kind = KIND_EXACT if outcome.proved_optimal else KIND_LOWER
        self.ledger.add(quad, BoundRecord(outcome.value, kind, PROV_SEARCH))
        summary = {
            "value": outcome.value,
            "status": outcome.status,
            "stop_reason": outcome.stop_reason,
            "nodes": outcome.nodes,
            "elapsed_ms": round(outcome.elapsed * 1000, 3),
            "witness": [list(ks.elements) for ks in outcome.witness],
        }
        old = self.searches.get(quad.key())
        if old is not None:
            old_proved = old.get("status") == STATUS_OPTIMAL
            if old_proved and outcome.proved_optimal and old["value"] != outcome.value:
                raise BoundConflictError(
                    f"{quad.key()}: cached proved value {old['value']} vs new "
                    f"{outcome.value}")
            if old_proved or (not outcome.proved_optimal and
                              old["value"] >= outcome.value):
                return  # never degrade
        self.searches[quad.key()] = summary

    def exact_record(self, quad: ParamQuad) -> BoundRecord | None:
        return self.ledger.exact(quad)

    def cached_witness(self, quad: ParamQuad) -> Family | None:
        summary = self.searches.get(quad.key())
        if summary and summary.get("witness") is not None:
            return Family.from_sets(summary["witness"], quad.n, quad.k) \
                if summary["witness"] else Family.empty(quad.n, quad.k)
        return None


def _quad_from_key(key: str) -> ParamQuad:
    fields = dict(part.split("=") for part in key.split(","))
    return ParamQuad(int(fields["n"]), int(fields["k"]), int(fields["s"]),
                     int(fields["q"]))


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_bounds(args) -> int:
    camp = _campaign(args, "bounds")
    ledger = BoundsLedger()
    rows = []
    for n, k, s, q in camp.instances():
        quad, err = _quad_or_error(n, k, s, q)
        if quad is None:
            rows.append(_error_row(n, k, s, q, err))
            continue
        records = all_bounds(quad, ledger)
        ledger.add_all(quad, records)
        rows.extend(_record_row(quad, rec) for rec in records)
    emit_rows(rows, CAMPAIGN_FIELDS, camp.fmt, camp.out)
    if camp.cache_path:
        with ResultCache(camp.cache_path) as cache:
            for key, slot in ledger.items():
                for rec in slot.values():
                    cache.ledger.add(_quad_from_key(key), rec)
    if camp.plot:
        _plot_bounds(rows, camp)
    return 0


def _plot_bounds(rows: list[dict], camp: Campaign) -> None:
    from .plots import save_bounds_figure

    stem = Path(camp.out).with_suffix("") if camp.out else Path("ufam-bounds")
    groups: dict[tuple, list[dict]] = {}
    for row in rows:
        if row.get("provenance") == "error":
            continue
        groups.setdefault((row["k"], row["s"], row["q"]), []).append(row)
    for (k, s, q), group in groups.items():
        path = Path(f"{stem}-k{k}-s{s}-q{q}.png")
        save_bounds_figure(group, path)
        print(f"figure: {path}", file=sys.stderr)


def _witness_path(directory: str, quad: ParamQuad, tag: str = "witness") -> Path:
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    return out / f"{tag}-n{quad.n}-k{quad.k}-s{quad.s}-q{quad.q}.family"


def cmd_exact(args) -> int:
    if args.threads != 1:
        print("error: parallel search is not implemented; use --threads 1",
              file=sys.stderr)
        return 2
    camp = _campaign(args, "exact")
    resume = SearchCheckpoint.load(args.resume) if args.resume else None
    if resume is not None and len(camp.instances()) != 1:
        print("error: --resume applies to a single instance", file=sys.stderr)
        return 2
    rows = []
    with ResultCache(camp.cache_path) as cache:
        for n, k, s, q in camp.instances():
            quad, err = _quad_or_error(n, k, s, q)
            if quad is None:
                rows.append(_error_row(n, k, s, q, err))
                continue
            cached = cache.exact_record(quad)
            if cached is not None:
                witness = cache.cached_witness(quad) or conjecture_witness(quad)
                rows.append(_record_row(quad, cached, "cached", 0, 0))
            else:
                outcome = exact_max_shifted(quad, camp.budget, resume=resume,
                                            checkpoint_out=args.checkpoint)
                cache.merge_outcome(quad, outcome)
                witness = outcome.witness
                rows.append(_outcome_row(quad, outcome))
            wpath = _witness_path(args.witness_dir, quad)
            write_family(witness, wpath)
            print(f"witness: {wpath}", file=sys.stderr)
    emit_rows(rows, CAMPAIGN_FIELDS, camp.fmt, camp.out)
    return 0


def verify_quad(quad: ParamQuad, budget: SearchBudget,
                cache: ResultCache | None = None,
                conjectured: int | None = None) -> tuple[str, SearchOutcome, int]:
    """Verdict for one instance: CONFIRMED (exact equals the conjectured
    value), REFUTED (a strictly larger family exists; witness attached), or
    OPEN (budget exhausted before optimality was proved)."""
    conj = conjectured if conjectured is not None else conjecture_value(quad).value
    cached = cache.exact_record(quad) if cache is not None else None
    if cached is not None:
        witness = (cache.cached_witness(quad) if cache else None) or conjecture_witness(quad)
        outcome = SearchOutcome(cached.value, witness, 0, 0.0, STATUS_OPTIMAL)
    else:
        outcome = exact_max_shifted(quad, budget)
        if cache is not None:
            cache.merge_outcome(quad, outcome)
    if outcome.value > conj:
        return "REFUTED", outcome, conj
    if outcome.proved_optimal and outcome.value == conj:
        return "CONFIRMED", outcome, conj
    if outcome.proved_optimal:
        raise BoundConflictError(
            f"{quad.key()}: proved maximum {outcome.value} below the "
            f"construction value {conj}")
    return "OPEN", outcome, conj


def cmd_verify(args) -> int:
    camp = _campaign(args, "verify")
    rows = []
    refuted = False
    with ResultCache(camp.cache_path) as cache:
        for n, k, s, q in camp.instances():
            quad, err = _quad_or_error(n, k, s, q)
            if quad is None:
                rows.append({**_error_row(n, k, s, q, err), "verdict": "error"})
                continue
            verdict, outcome, _ = verify_quad(quad, camp.budget, cache)
            row = _outcome_row(quad, outcome)
            row["verdict"] = verdict
            rows.append(row)
            if verdict == "REFUTED":
                refuted = True
                wpath = _witness_path(args.witness_dir, quad, tag="refutation")
                write_family(outcome.witness, wpath)
                print(f"refutation witness: {wpath}", file=sys.stderr)
    emit_rows(rows, VERIFY_FIELDS, camp.fmt, camp.out)
    return 1 if refuted else 0


def cmd_oracle(args) -> int:
    camp = _campaign(args, "oracle")
    rows = []
    mismatch = False
    for n, k, s, q in camp.instances():
        quad, err = _quad_or_error(n, k, s, q)
        if quad is None:
            rows.append(_error_row(n, k, s, q, err))
            continue
        if comb(n, k) > args.max_candidates:
            rows.append(_error_row(n, k, s, q,
                                   f"C({n},{k}) exceeds brute-force cap"))
            continue
        shifted = exact_max_shifted(quad, camp.budget)
        brute = exact_max_bruteforce(quad, args.max_candidates)
        if not shifted.proved_optimal:
            status = "inconclusive"
        elif shifted.value == brute.value:
            status = "match"
        else:
            status = "MISMATCH"
            mismatch = True
        row = _outcome_row(quad, shifted, status=status)
        row["citation"] = f"shifted={shifted.value} brute={brute.value}"
        rows.append(row)
    emit_rows(rows, CAMPAIGN_FIELDS, camp.fmt, camp.out)
    return 1 if mismatch else 0


def cmd_ties(args) -> int:
    camp = _campaign(args, "ties")
    rows = []
    for n, k, s, q in camp.instances():
        quad, err = _quad_or_error(n, k, s, q)
        if quad is None:
            rows.append(_error_row(n, k, s, q, err))
            continue
        try:
            families = enumerate_maximum_families(quad, camp.budget)
        except BudgetExhaustedError as exc:
            rows.append(_error_row(n, k, s, q, str(exc)))
            continue
        for i, fam in enumerate(families, start=1):
            wpath = Path(args.witness_dir) / (
                f"maximum-n{n}-k{k}-s{s}-q{q}-{i}of{len(families)}.family")
            write_family(fam, wpath)
            rec = BoundRecord(len(fam), KIND_EXACT, PROV_SEARCH,
                              citation=str(wpath))
            rows.append(_record_row(quad, rec, status=f"tie {i}/{len(families)}"))
    emit_rows(rows, CAMPAIGN_FIELDS, camp.fmt, camp.out)
    return 0


def cmd_check_family(args) -> int:
    try:
        family = read_family(args.path)
    except FamilyFormatError as exc:
        print(f"parse error in {args.path}: {exc}", file=sys.stderr)
        return 2
    s, q = args.s, args.q
    report = {
        "path": str(args.path),
        "ground": family.n,
        "k": family.k,
        "size": len(family),
        "is_shifted": is_shifted(family),
        "max_union": max_union(family, s),
        "union_bounded": is_union_bounded(family, s, q),
        "matching_number": matching_number(family),
    }
    try:
        quad = ParamQuad(family.n, family.k, s, q)
        universe = set(candidate_universe(quad).masks)
        report["p"], report["r"] = quad.p, quad.r
        report["in_candidate_universe"] = all(m in universe for m in family.masks)
    except ValueError as exc:
        report["decomposition"] = f"n/a ({exc})"
    if args.format == "json":
        print(json.dumps(report, indent=2))
    else:
        for key, val in report.items():
            print(f"{key}: {val}")
    return 0


def cmd_crossover(args) -> int:
    rows = []
    reports = []
    for s in args.s:
        for t in args.t:
            if not s > t >= 1:
                continue
            for n in args.n:
                try:
                    rep = k3_crossover_report(n, s, t)
                except ValueError:
                    continue
                reports.append(rep)
                boundary = rep.t1_boundary_predicts_f3_ge_f2()
                rows.append({
                    "s": s, "t": t, "n": n,
                    "f1": rep.sizes[0], "f2": rep.sizes[1], "f3": rep.sizes[2],
                    "f1-f2": rep.diffs["f1-f2"], "f2-f1": rep.diffs["f2-f1"],
                    "f2-f3": rep.diffs["f2-f3"], "f3-f2": rep.diffs["f3-f2"],
                    "maximal": "/".join(f"F{i}" for i in rep.maximal),
                    "formula_matches_construction": rep.consistent,
                    "t1_boundary_consistent":
                        "" if boundary is None else boundary == rep.f3_ge_f2,
                })
    emit_rows(rows, CROSSOVER_FIELDS, args.format, args.out)
    if args.plot and reports:
        from .plots import save_crossover_figure

        stem = Path(args.out).with_suffix("") if args.out else Path("ufam-crossover")
        for (s, t) in sorted({(r.s, r.t) for r in reports}):
            group = [r for r in reports if (r.s, r.t) == (s, t)]
            path = Path(f"{stem}-s{s}-t{t}.png")
            save_crossover_figure(group, path)
            print(f"figure: {path}", file=sys.stderr)
    return 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def _add_ranges(sp, required=("n", "k", "s", "q")) -> None:
    for name in ("n", "k", "s", "q"):
        sp.add_argument(f"--{name}", type=parse_range, required=name in required,
                        help=f"value, A..B range, or comma list for {name}")


def _add_budget(sp) -> None:
    sp.add_argument("--budget-nodes", type=int, default=None)
    sp.add_argument("--budget-secs", type=float, default=None)
    sp.add_argument("--target", type=int, default=None,
                    help="stop as soon as this family size is matched")


def _add_output(sp, default_cache: str | None) -> None:
    sp.add_argument("--format", choices=("csv", "json"), default="csv")
    sp.add_argument("--out", default=None, help="also write the table to this file")
    sp.add_argument("--cache", default=default_cache,
                    help="persistent result cache (JSON)")
    sp.add_argument("--witness-dir", default=".",
                    help="directory for witness family files")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ufam",
        description="Exact workbench for union-bounded uniform set families.")
    parser.add_argument("--version", action="version", version=f"ufam {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("bounds", help="formula bounds and exact-range rules")
    _add_ranges(sp)
    _add_output(sp, default_cache=None)
    sp.add_argument("--plot", action="store_true",
                    help="render figures next to the table")
    sp.set_defaults(func=cmd_bounds)

    sp = sub.add_parser("exact", help="exact search over shifted families")
    _add_ranges(sp)
    _add_budget(sp)
    _add_output(sp, default_cache="./ufam-cache.json")
    sp.add_argument("--threads", type=int, default=1,
                    help="worker count (only 1 is implemented)")
    sp.add_argument("--checkpoint", default=None,
                    help="write a resumable checkpoint here on budget exhaustion")
    sp.add_argument("--resume", default=None, help="resume from a checkpoint file")
    sp.set_defaults(func=cmd_exact)

    sp = sub.add_parser("verify", help="exact search vs conjectured value")
    _add_ranges(sp)
    _add_budget(sp)
    _add_output(sp, default_cache="./ufam-cache.json")
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("oracle", help="brute force vs shifted search")
    _add_ranges(sp)
    _add_budget(sp)
    _add_output(sp, default_cache=None)
    sp.add_argument("--max-candidates", type=int, default=24,
                    help="brute-force cap on C(n,k)")
    sp.set_defaults(func=cmd_oracle)

    sp = sub.add_parser("ties", help="enumerate all maximum families")
    _add_ranges(sp)
    _add_budget(sp)
    _add_output(sp, default_cache=None)
    sp.set_defaults(func=cmd_ties)

    sp = sub.add_parser("check-family", help="property report for a family file")
    sp.add_argument("path")
    sp.add_argument("--s", type=int, required=True)
    sp.add_argument("--q", type=int, required=True)
    sp.add_argument("--format", choices=("text", "json"), default="text")
    sp.set_defaults(func=cmd_check_family)

    sp = sub.add_parser("crossover", help="k=3 candidate comparison report")
    sp.add_argument("--s", type=parse_range, required=True)
    sp.add_argument("--t", type=parse_range, default=[1])
    sp.add_argument("--n", type=parse_range, required=True)
    sp.add_argument("--format", choices=("csv", "json"), default="csv")
    sp.add_argument("--out", default=None)
    sp.add_argument("--plot", action="store_true")
    sp.set_defaults(func=cmd_crossover)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except BoundConflictError as exc:
        print(f"bound conflict: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
