"""Command-line reports: analyze, sweep, catalog-verify and global."""

from __future__ import annotations

import argparse
import json
import sys
import time
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from .catalog import CATALOG, CatalogEntry
from .closed_forms import (
    global_abelian_valuation,
    index_report,
    minimal_index_abs_abelian,
    nu_data,
    sweep,
)
from .errors import (
    ArtifactError,
    BudgetExceeded,
    InputError,
    PrecisionError,
    PrecisionExhausted,
    SearchExhausted,
)
from .field_tower import build_lattice_model, tower_from_spec
from .oracle import BASE_PRECISION, DEFAULT_BUDGET, PRECISION_CAP, run_oracle
from .ramification import RamificationProfile, profile, profile_from_invariants

EXIT_OK, EXIT_DISAGREE, EXIT_INPUT, EXIT_EXHAUSTED = 0, 1, 2, 3


def dumps(doc) -> str:
    return json.dumps(doc, sort_keys=True, indent=2, separators=(",", ": "))


def with_precision_retry(fn: Callable[[int], object], start: int, cap: int = PRECISION_CAP):
    """Call fn(N) with N doubling from ``start`` until it stops raising PrecisionExhausted."""
    N = start
    while True:
        try:
            return fn(N), N
        except PrecisionExhausted:
            if 2 * N > cap:
                raise
            N *= 2


def formula_pivots(prof: RamificationProfile) -> List[int]:
    """Associated-order exponents predicted by the closed forms, sorted."""
    if not prof.wild:
        return [0] * prof.n
    if prof.a == 0:
        return sorted(prof.e_K * i // (prof.p - 1) for i in range(prof.p))
    return sorted(nu_data(prof).n)


def _profile_from_doc(doc) -> RamificationProfile:
    data = doc["profile"]
    try:
        return profile_from_invariants(data["p"], data["e_K"], data.get("f_K", 1), data["t"])
    except KeyError as exc:
        raise InputError(f"profile is missing {exc}") from exc


def analyze(
    doc: dict,
    oracle: bool = False,
    precision: Optional[int] = None,
    budget: int = DEFAULT_BUDGET,
    workers: int = 1,
) -> dict:
    """Report document for an extension spec or a bare invariant profile."""
    if not isinstance(doc, dict):
        raise InputError("spec must be a JSON object")
    t0 = time.perf_counter()
    start = precision or doc.get("precision", BASE_PRECISION)
    if "profile" in doc:
        if oracle:
            raise InputError("the oracle needs a field spec, not a bare profile")
        prof, used, model = _profile_from_doc(doc), None, None
    else:

        def build(N):
            L, K = tower_from_spec({**doc, "precision": N})
            m = build_lattice_model(L, K)
            return m, profile(m)

        (model, prof), used = with_precision_retry(build, start)
    rep = index_report(prof)
    t1 = time.perf_counter()
    out = {
        "input": doc,
        "profile": prof.to_dict(),
        "formulas": rep.to_dict(),
        "oracle": None,
        "agreement": None,
        "precision": used,
    }
    out["formulas"]["assoc_pivots"] = formula_pivots(prof)
    timing = {"formulas_s": round(t1 - t0, 3)}
    if oracle:

        def run(N):
            m = model if N == used else build_lattice_model(*_towers(doc, N))
            return run_oracle(m, prof, budget, workers)

        res, used2 = with_precision_retry(run, used)
        out["precision"] = used2
        o = res.to_dict()
        out["oracle"] = o
        agree = {
            "v_p_m": o["v_p_m"] == rep.v_p_m,
            "v_p_assoc_index": o["v_p_assoc_index"] == rep.v_p_assoc_index,
            "free_over_assoc": o["free_over_assoc"] == rep.free_over_assoc,
            "assoc_pivots": o["assoc_pivots"] == formula_pivots(prof),
        }
        agree["all"] = all(agree.values())
        out["agreement"] = agree
        timing["oracle_s"] = round(time.perf_counter() - t1, 3)
    timing["total_s"] = round(time.perf_counter() - t0, 3)
    out["timing"] = timing
    return out


def _towers(doc, N):
    return tower_from_spec({**doc, "precision": N})


def stable_values(report: dict) -> dict:
    """Report content that must not depend on precision, scheduling or wall time."""
    return {k: v for k, v in report.items() if k not in ("timing", "precision")}


# catalog


def verify_entry(
    entry: CatalogEntry,
    precision: Optional[int] = None,
    budget: int = DEFAULT_BUDGET,
    workers: int = 1,
    v_p_m_offset: int = 0,
) -> Tuple[bool, Dict[str, Tuple[object, object]], dict]:
    """Run one entry with the oracle; returns (ok, {check: (expected, got)}, report)."""
    rep = analyze(entry.spec, oracle=True, precision=precision, budget=budget, workers=workers)
    f, o = rep["formulas"], rep["oracle"]
    expected_m = entry.v_p_m + v_p_m_offset
    checks = {
        "t": (entry.t, rep["profile"]["t"]),
        "v_p_m formula": (expected_m, f["v_p_m"]),
        "v_p_m oracle": (expected_m, o["v_p_m"]),
        "free formula": (entry.free, f["free_over_assoc"]),
        "free oracle": (entry.free, o["free_over_assoc"]),
        "formula/oracle agreement": (True, rep["agreement"]["all"]),
    }
    if entry.v_p_assoc_index is not None:
        checks["assoc index oracle"] = (entry.v_p_assoc_index, o["v_p_assoc_index"])
    if entry.v_p_maximal_order_index is not None:
        checks["maximal order index"] = (
            entry.v_p_maximal_order_index,
            f["v_p_maximal_order_index"],
        )
    if entry.assoc_pivots is not None:
        checks["assoc pivots"] = (list(entry.assoc_pivots), o["assoc_pivots"])
    if entry.nu is not None:
        checks["nu"] = (list(entry.nu), f.get("nu"))
    ok = all(exp == got for exp, got in checks.values())
    return ok, checks, rep


def catalog_verify(
    precision: Optional[int] = None,
    budget: int = DEFAULT_BUDGET,
    workers: int = 1,
    corrupt: Optional[str] = None,
    out=None,
) -> int:
    out = out or sys.stdout
    width = max(len(e.name) for e in CATALOG)
    print(f"{'entry':<{width}}  {'t':>3}  {'v_p(m) exp':>10}  {'formula':>7}  {'oracle':>6}  "
          f"{'free':>5}  {'secs':>6}  status", file=out)
    failures = 0
    for e in CATALOG:
        offset = 1 if corrupt == e.name else 0
        ok, checks, rep = verify_entry(e, precision, budget, workers, offset)
        failures += not ok
        print(
            f"{e.name:<{width}}  {rep['profile']['t']:>3}  {e.v_p_m + offset:>10}  "
            f"{rep['formulas']['v_p_m']:>7}  {rep['oracle']['v_p_m']:>6}  "
            f"{str(rep['oracle']['free_over_assoc']):>5}  {rep['timing']['total_s']:>6.2f}  "
            f"{'ok' if ok else 'MISMATCH'}",
            file=out,
        )
        for name, (exp, got) in checks.items():
            if exp != got:
                print(f"    {name}: expected {exp}, got {got}", file=out)
    print(f"{len(CATALOG) - failures}/{len(CATALOG)} entries agree", file=out)
    return EXIT_OK if failures == 0 else EXIT_DISAGREE


# text rendering


def render_report(rep: dict) -> str:
    prof, f = rep["profile"], rep["formulas"]
    lines = [
        f"p = {prof['p']}  e_K = {prof['e_K']}  f_K = {prof['f_K']}  [L:K] = {prof['n']}  "
        f"e_L/K = {prof['e_LK']}  f_L/K = {prof['f_LK']}",
        f"jump t = {prof['t']}  a = {prof['a']}  t0 = {prof['t0']}",
        f"m(L/K)            {f['m']}",
        f"[A : O_K[G]]      {prof['p']}^{f['v_p_assoc_index']}",
        f"free over A       {f['free_over_assoc']}",
        f"[M : O_K[G]]      "
        + ("n/a" if f["v_p_maximal_order_index"] is None else f"{prof['p']}^{f['v_p_maximal_order_index']}"),
        f"bounds            {f['bound_general']} (general), {f['bound_easy']} (easy)",
    ]
    if f.get("witness"):
        lines.append(f"witness           {f['witness']}")
    if "nu" in f:
        lines.append(f"nu = {f['nu']}  mu = {f['mu']}  n = {f['n']}")
    o = rep.get("oracle")
    if o:
        lines += [
            f"oracle m          {prof['p']}^{o['v_p_m']}  (R_0 = {o['R_0']}, "
            f"{o['classes_enumerated']} classes)",
            f"oracle witness    {o['witness_coords']}",
            f"oracle pivots     {o['assoc_pivots']}  free = {o['free_over_assoc']}",
            f"agreement         {'yes' if rep['agreement']['all'] else 'NO'}",
        ]
    lines.append(f"precision         {rep['precision']}")
    return "\n".join(lines)


def _write_json(path: Optional[str], doc) -> None:
    if path is None:
        return
    text = dumps(doc) + "\n"
    if path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


# subcommands


def cmd_analyze(args) -> int:
    try:
        with open(args.spec) as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read spec {args.spec}: {exc}") from exc
    rep = analyze(doc, args.oracle, args.precision, args.budget, args.workers)
    print(render_report(rep))
    _write_json(args.json, rep)
    if rep["agreement"] is not None and not rep["agreement"]["all"]:
        return EXIT_DISAGREE
    return EXIT_OK


def cmd_sweep(args) -> int:
    if args.e_max < 1 or args.f < 1:
        raise InputError("bounds must be positive")
    try:
        rows = sweep(args.p, args.e_max, args.f)
    except ArtifactError as exc:
        raise InputError(str(exc)) from exc
    head = f"{'e_K':>4} {'t':>4} {'a':>3} {'sum nu':>6} {'mu':>4} {'v_p(m)':>6} {'sum n':>5} {'free':>5} {'bound':>8}"
    print(head)
    bad = 0
    for r in rows:
        print(
            f"{r.e_K:>4} {r.t:>4} {r.a:>3} {str(r.nu_sum):>6} {str(r.mu):>4} {r.v_p_m:>6} "
            f"{str(r.n_sum):>5} {str(r.free):>5} {str(r.bound):>8}"
        )
        for v in r.violations:
            bad += 1
            print(f"    violation: {v}")
    print(f"{len(rows)} rows, {bad} violations")
    _write_json(args.json, {"rows": [r.to_dict() for r in rows], "violations": bad})
    return EXIT_DISAGREE if bad else EXIT_OK


def cmd_catalog_verify(args) -> int:
    return catalog_verify(args.precision, args.budget, args.workers, args.corrupt)


def parse_ram(items: Sequence[str]) -> Dict[int, Tuple[int, ...]]:
    ram = {}
    for item in items:
        try:
            p, rest = item.split(":")
            ram[int(p)] = tuple(int(x) for x in rest.split(","))
        except ValueError as exc:
            raise InputError(f"bad ramification datum {item!r}; expected p:n,d[,f]") from exc
    return ram


def global_report(degree: int, ram: Dict[int, Tuple[int, ...]]) -> dict:
    vals = global_abelian_valuation(degree, ram)
    recomb = {}
    for p, data in sorted(ram.items()):
        n, d = data[0], data[1]
        f = data[2] if len(data) == 3 else 1
        local = minimal_index_abs_abelian(p, f, n, d)
        recomb[str(p)] = {
            "local_v_p": local,
            "places": degree // (p**n * d * f),
            "recombined": degree // (p**n * d * f) * local,
        }
    return {
        "degree": degree,
        "valuations": {str(p): v for p, v in vals.items()},
        "recombination": recomb,
    }


def cmd_global(args) -> int:
    rep = global_report(args.degree, parse_ram(args.ram))
    print(dumps(rep))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="artifact",
        description="Minimal group-ring indices of rings of integers in p-adic extensions.",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", help="closed forms (and optionally the oracle) for one extension")
    a.add_argument("--spec", required=True, help="extension spec JSON file")
    a.add_argument("--oracle", action="store_true", help="also run the brute-force oracle")
    a.add_argument("--precision", type=int, default=None)
    a.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    a.add_argument("--workers", type=int, default=1)
    a.add_argument("--json", default=None, help="write the JSON report here ('-' for stdout)")
    a.set_defaults(func=cmd_analyze)

    s = sub.add_parser("sweep", help="closed forms over every admissible jump")
    s.add_argument("--p", type=int, required=True)
    s.add_argument("--e-max", type=int, required=True)
    s.add_argument("--f", type=int, default=1)
    s.add_argument("--json", default=None)
    s.set_defaults(func=cmd_sweep)

    c = sub.add_parser("catalog-verify", help="run the built-in catalog through the oracle")
    c.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    c.add_argument("--precision", type=int, default=None)
    c.add_argument("--workers", type=int, default=1)
    c.add_argument("--corrupt", default=None, help=argparse.SUPPRESS)
    c.set_defaults(func=cmd_catalog_verify)

    g = sub.add_parser("global", help="v_p(m(L/Q)) for an abelian number field")
    g.add_argument("--degree", type=int, required=True)
    g.add_argument("--ram", nargs="+", default=[], metavar="p:n,d[,f]")
    g.set_defaults(func=cmd_global)
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (PrecisionError, BudgetExceeded, SearchExhausted) as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_EXHAUSTED
    except ArtifactError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DISAGREE
