"""``sopnlab`` command-line front end.

Every command writes a deterministic text report.  Reports embed their
inputs, so ``sopnlab recheck REPORT`` can rebuild and compare them.

Exit status: 0 verified success, 1 verified negative result, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .amalgam import (AmalgamError, AmalgamProblem, Obstruction, closure_amalgam,
                      cyclic_amalgam, ordered_amalgam)
from .core import StructureError, format_structure, parse_structure
from .generic import GenericError, ec_extend, outstanding_problems
from .invariants import (CutError, format_cuts, model_invariants, order_invariants,
                         parse_cuts)
from .logic import FormulaError, evaluate, parse_formula, reduce_sop
from .reports import Report, ReportError, parse_report
from .sop import (ChainError, WitnessChain, build_witness, certify, check_chain,
                  check_sop_sequence, check_strict_order, sequence_witness)
from .theories import TheoryError, check_model, theory_spec

USAGE_ERRORS = (FileNotFoundError, IsADirectoryError, StructureError, FormulaError,
                TheoryError, AmalgamError, ChainError, CutError, GenericError, ReportError,
                json.JSONDecodeError, KeyError, ValueError)


class UsageError(Exception):
    pass


def threads() -> int:
    raw = os.environ.get("SOPNLAB_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise UsageError(f"SOPNLAB_THREADS must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise UsageError("SOPNLAB_THREADS must be >= 1")
    return n


def _fmt_set(s) -> str:
    return "{" + ",".join(map(str, sorted(s))) + "}"


def _fmt_tuples(ts) -> str:
    return " ".join("(" + ",".join(map(str, t)) + ")" for t in ts)


# ---------------------------------------------------------------------------
# Commands.  Each takes plain inputs (texts and numbers) and returns a Report.

def cmd_check_model(structure: str, theory: str) -> Report:
    s, t = parse_structure(structure), theory_spec(theory)
    rep = Report("check-model").add("input.theory", t.id).block("input.structure", structure)
    v = check_model(s, t)
    if v is None:
        return _done(rep.add("verdict", "model"), 0)
    rep.add("verdict", "violation").add("violation", v.describe())
    rep.add("witness", " ".join(map(str, v.elements)))
    return _done(rep, 1)


def cmd_find_forbidden(structure: str, theory: str) -> Report:
    from .core import iter_embeddings
    s, t = parse_structure(structure), theory_spec(theory)
    rep = Report("find-forbidden").add("input.theory", t.id).block("input.structure", structure)
    found = 0
    for label, pat in zip(t.forbidden_labels, t.forbidden):
        maps = list(iter_embeddings(pat, s, "weak"))
        found += len(maps)
        rep.add(f"pattern.{label}", f"{len(maps)} embeddings")
        if maps:
            rep.add(f"first.{label}", " ".join(map(str, maps[0])))
    rep.add("total", found)
    rep.add("verdict", "none" if not found else "found")
    return _done(rep, 1 if found else 0)


def cmd_amalgamate(theory: str, m0: str, m1: str, m2: str, map1=None, map2=None) -> Report:
    t = theory_spec(theory)
    s0, s1, s2 = parse_structure(m0), parse_structure(m1), parse_structure(m2)
    map1 = tuple(range(s0.size)) if map1 is None else tuple(map1)
    map2 = tuple(range(s0.size)) if map2 is None else tuple(map2)
    rep = Report("amalgamate").add("input.theory", t.id)
    rep.block("input.m0", m0).block("input.m1", m1).block("input.m2", m2)
    rep.add("input.map1", ",".join(map(str, map1))).add("input.map2", ",".join(map(str, map2)))
    p = AmalgamProblem.build(s0, s1, s2, map1, map2)
    if t.name == "ord":
        out = ordered_amalgam(p, t)
        rep.add("construction", "ordered")
    else:
        out = closure_amalgam(p, t)
        rep.add("construction", "closure")
    return _amalgam_outcome(rep, out, t)


def _amalgam_outcome(rep: Report, out, t) -> Report:
    if isinstance(out, Obstruction):
        rep.add("verdict", "obstruction").add("reason", out.describe())
        if out.structure is not None:
            rep.block("structure", format_structure(out.structure))
        return _done(rep, 1)
    v = check_model(out, t)
    rep.add("verdict", "amalgam" if v is None else "invalid")
    if v is not None:
        rep.add("violation", v.describe())
    rep.block("structure", format_structure(out))
    return _done(rep, 0 if v is None else 1)


def cmd_cyclic_amalgam(chain: str, m: int, theory: str | None = None) -> Report:
    w, t0 = WitnessChain.from_json(chain)
    t = theory_spec(theory) if theory else t0
    if t is None:
        raise UsageError("the chain names no theory; pass --theory")
    rep = Report("cyclic-amalgam").add("input.theory", t.id).add("input.m", m)
    rep.block("input.chain", chain)
    return _amalgam_outcome(rep, cyclic_amalgam(w, m, t), t)


def cmd_witness(theory: str, length: int, n: int | None = None) -> Report:
    t = theory_spec(theory)
    w = build_witness(t, n, length)
    rep = Report("witness").add("input.theory", t.id).add("input.length", length)
    rep.add("input.n", "default" if n is None else n)
    v = check_model(w.model, t)
    ch = check_chain(w)
    rep.add("model", "ok" if v is None else v.describe())
    rep.add("chain_condition", "ok" if ch else f"fails at {ch.failure}")
    rep.add("verdict", "verified" if v is None and ch else "failed")
    rep.block("chain", w.to_json(t))
    return _done(rep, 0 if v is None and ch else 1)


def cmd_sop_check(chain: str, n: int, theory: str | None = None, extra=()) -> Report:
    w, t0 = WitnessChain.from_json(chain)
    t = theory_spec(theory) if theory else t0
    if t is None:
        raise UsageError("the chain names no theory; pass --theory")
    models = [parse_structure(x) for x in extra]
    cert = certify(w, n, t, models)
    rep = Report("sop-check").add("input.theory", t.id).add("input.n", n)
    rep.block("input.chain", chain)
    for i, x in enumerate(extra):
        rep.block(f"input.extra.{i}", x)
    rep.add("phi", cert.phi.text).add("split", cert.phi.split_text())
    for key, value in cert.cycle_report.items():
        if key == "gluing_model":
            rep.block("evidence.gluing_model", format_structure(value))
        elif key in ("chain_cycle", "gluing_cycle") and not isinstance(value, str):
            rep.add(f"evidence.{key}", _fmt_tuples(value))
        else:
            rep.add(f"evidence.{key}", value)
    rep.add("verdict", cert.verdict)
    return _done(rep, 0 if cert.verdict.endswith("witnessed-at-desk-scale") else 1)


def cmd_reduce(phi: str, split: str, n: int, structure: str | None = None,
               at: str | None = None) -> Report:
    vocab = parse_structure(structure).vocab if structure else None
    f = parse_formula(phi, vocab, split)
    g = reduce_sop(f, n)
    rep = Report("reduce").add("input.phi", f.text).add("input.split", f.split_text())
    rep.add("input.n", n).add("reduced", g.text)
    if structure is not None and at is not None:
        s = parse_structure(structure)
        rep.block("input.structure", structure).add("input.at", at)
        left, _, right = at.partition(";")
        a = [int(e) for e in left.split(",") if e.strip()]
        b = [int(e) for e in right.split(",") if e.strip()]
        xs, ys = f.split
        env = dict(zip(xs + ys, a + b))
        rep.add("phi_value", evaluate(s, f, env)).add("reduced_value", evaluate(s, g, env))
    return _done(rep.add("verdict", "ok"), 0)


def cmd_strict_order(structure: str, phi: str, split: str) -> Report:
    s = parse_structure(structure)
    f = parse_formula(phi, s.vocab, split)
    r = check_strict_order(s, f)
    rep = Report("strict-order").block("input.structure", structure)
    rep.add("input.phi", f.text).add("input.split", f.split_text())
    rep.add("irreflexive", r.irreflexive).add("antisymmetric", r.antisymmetric)
    rep.add("transitive", r.transitive)
    rep.add("longest_chain", "n/a" if r.longest_chain is None else r.longest_chain)
    if r.counterexample:
        rep.add("counterexample", " ".join(map(str, r.counterexample)))
    ok = r.strict_partial_order
    rep.add("verdict", "strict partial order" if ok else "not a strict partial order")
    return _done(rep, 0 if ok else 1)


def cmd_sop_sequence(theory: str, length: int, bound: int) -> Report:
    t = theory_spec(theory)
    phis, array, s = sequence_witness(t, length)
    r = check_sop_sequence(phis, array, s, bound, t)
    rep = Report("sop-sequence").add("input.theory", t.id).add("input.length", length)
    rep.add("input.bound", bound)
    for i, f in enumerate(phis):
        rep.add(f"phi.{i}", f"{f.text} [{f.split_text()}]")
    for name, c in r.clauses():
        rep.add(f"clause.{name}", ("pass: " if c.ok else "fail: ") + c.detail)
    rep.add("verdict", "exemplified at desk scale" if r.ok else "not exemplified")
    return _done(rep, 0 if r.ok else 1)


def cmd_generic(theory: str, size: int, closure: int, seed: int,
                start: str | None = None) -> Report:
    from .core import empty_structure
    t = theory_spec(theory)
    s0 = parse_structure(start) if start else empty_structure(t.vocab)
    res = ec_extend(s0, t, closure, size, seed)
    rep = Report("generic").add("input.theory", t.id).add("input.size", size)
    rep.add("input.closure", closure).add("input.seed", seed)
    if start:
        rep.block("input.start", start)
    rep.add("growth_steps", res.growth_steps).add("repair_steps", res.repair_steps)
    for note in res.notes:
        rep.add("note", note)
    rep.add("model", "ok" if check_model(res.structure, t) is None else "violated")
    rep.add("verdict", res.status)
    rep.block("structure", format_structure(res.structure))
    return _done(rep, 0 if res.complete else 1)


def _aggregate_lines(rep: Report, report, prefix: str):
    for x, vals in report.per_element:
        rep.add(f"{prefix}.inv.{x}", _fmt_set(vals))
    agg = sorted(sorted(v) for v in report.aggregate)
    rep.add(f"{prefix}.aggregate", " ".join("{" + ",".join(map(str, v)) + "}" for v in agg))


def cmd_invariant_model(structure: str, phi: str, split: str, cuts: str,
                        tail: bool = False) -> Report:
    s = parse_structure(structure)
    f = parse_formula(phi, s.vocab, split)
    cs = parse_cuts(cuts)
    rep = Report("invariant-model").block("input.structure", structure)
    rep.add("input.phi", f.text).add("input.split", f.split_text())
    rep.block("input.cuts", format_cuts(cs)).add("input.tail", tail)
    for i, c in enumerate(cs):
        elems = range(c.delta, s.size) if tail else None
        _aggregate_lines(rep, model_invariants(s, f, c, elems), f"cut.{i}")
    return _done(rep.add("verdict", "computed"), 0)


def cmd_invariant_order(structure: str, cuts: str, tail: bool = False) -> Report:
    s = parse_structure(structure)
    cs = parse_cuts(cuts)
    rep = Report("invariant-order").block("input.structure", structure)
    rep.block("input.cuts", format_cuts(cs)).add("input.tail", tail)
    for i, c in enumerate(cs):
        elems = range(c.delta, s.size) if tail else None
        _aggregate_lines(rep, order_invariants(s, c, elems), f"cut.{i}")
    return _done(rep.add("verdict", "computed"), 0)


def _done(rep: Report, code: int) -> Report:
    rep.exit_code = code
    return rep


# ---------------------------------------------------------------------------
# Recheck

def _opt_int(v):
    return None if v in (None, "default") else int(v)


def rebuild(rep: Report) -> Report:
    """Re-run the command recorded in ``rep`` from its embedded inputs."""
    g = rep.get
    c = rep.command
    if c == "check-model":
        return cmd_check_model(g("input.structure"), g("input.theory"))
    if c == "find-forbidden":
        return cmd_find_forbidden(g("input.structure"), g("input.theory"))
    if c == "amalgamate":
        ints = lambda v: tuple(int(x) for x in v.split(",") if x)   # noqa: E731
        return cmd_amalgamate(g("input.theory"), g("input.m0"), g("input.m1"), g("input.m2"),
                              ints(g("input.map1")), ints(g("input.map2")))
    if c == "cyclic-amalgam":
        return cmd_cyclic_amalgam(g("input.chain"), int(g("input.m")), g("input.theory"))
    if c == "witness":
        return cmd_witness(g("input.theory"), int(g("input.length")), _opt_int(g("input.n")))
    if c == "sop-check":
        extra, i = [], 0
        while g(f"input.extra.{i}") is not None:
            extra.append(g(f"input.extra.{i}"))
            i += 1
        return cmd_sop_check(g("input.chain"), int(g("input.n")), g("input.theory"), extra)
    if c == "reduce":
        return cmd_reduce(g("input.phi"), g("input.split"), int(g("input.n")),
                          g("input.structure"), g("input.at"))
    if c == "strict-order":
        return cmd_strict_order(g("input.structure"), g("input.phi"), g("input.split"))
    if c == "sop-sequence":
        return cmd_sop_sequence(g("input.theory"), int(g("input.length")), int(g("input.bound")))
    if c == "generic":
        return cmd_generic(g("input.theory"), int(g("input.size")), int(g("input.closure")),
                           int(g("input.seed")), g("input.start"))
    if c == "invariant-model":
        return cmd_invariant_model(g("input.structure"), g("input.phi"), g("input.split"),
                                   g("input.cuts"), g("input.tail") == "True")
    if c == "invariant-order":
        return cmd_invariant_order(g("input.structure"), g("input.cuts"),
                                   g("input.tail") == "True")
    raise ReportError(f"cannot recheck reports of command {c!r}")


def cmd_recheck(report: str) -> Report:
    old = parse_report(report)
    new = rebuild(old)
    rep = Report("recheck").add("command", old.command)
    rep.add("recorded_verdict", old.get("verdict")).add("recomputed_verdict", new.get("verdict"))
    same = new.render() == old.render()
    rep.add("identical", same)
    if old.command == "generic":
        s = parse_structure(old.get("structure"))
        t = theory_spec(old.get("input.theory"))
        left = len(outstanding_problems(s, t, int(old.get("input.closure"))))
        rep.add("independent_outstanding", left)
        claimed = old.get("verdict", "").endswith("extension-complete")
        same = same and (left == 0) == claimed and check_model(s, t) is None
    rep.add("verdict", "agrees" if same else "disagrees")
    return _done(rep, 0 if same else 1)


# ---------------------------------------------------------------------------
# Argument parsing

def _read(path) -> str:
    return Path(path).read_text()


def _ints(text: str) -> tuple[int, ...]:
    return tuple(int(x) for x in text.split(",") if x.strip())


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sopnlab", description=__doc__.split("\n")[0])
    p.add_argument("--report", dest="report_out", metavar="PATH",
                   help="write the report here instead of stdout")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("check-model", help="check a structure against a theory")
    s.add_argument("--structure", required=True)
    s.add_argument("--theory", required=True)

    s = sub.add_parser("find-forbidden", help="list forbidden-pattern embeddings")
    s.add_argument("--structure", required=True)
    s.add_argument("--theory", required=True)

    s = sub.add_parser("amalgamate", help="amalgamate two models over a common part")
    s.add_argument("--theory", required=True)
    for name in ("--m0", "--m1", "--m2"):
        s.add_argument(name)
    s.add_argument("--map1", type=_ints, help="images of m0 in m1 (default: prefix)")
    s.add_argument("--map2", type=_ints, help="images of m0 in m2 (default: prefix)")
    s.add_argument("--cyclic", type=int, metavar="M", help="glue M chain pieces instead")
    s.add_argument("--chain", help="witness chain file for --cyclic")

    s = sub.add_parser("cyclic-amalgam", help="glue chain pieces around a cycle")
    s.add_argument("--chain", required=True)
    s.add_argument("--m", type=int, required=True)
    s.add_argument("--theory")

    s = sub.add_parser("witness", help="build a standard witness chain")
    s.add_argument("--theory", required=True)
    s.add_argument("--length", type=int, default=6)
    s.add_argument("--n", type=int)
    s.add_argument("--out", help="write the chain file here")

    s = sub.add_parser("sop-check", help="certify a chain for SOP_n")
    s.add_argument("--chain", required=True)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--theory")
    s.add_argument("--extra", action="append", default=[], help="extra model to search")

    s = sub.add_parser("reduce", help="apply the SOP_n reducer to a formula")
    s.add_argument("--phi", required=True)
    s.add_argument("--split", required=True)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--structure")
    s.add_argument("--at", help="evaluate at 'a0,a1;b0,b1'")

    s = sub.add_parser("strict-order", help="check the partial-order axioms for a formula")
    s.add_argument("--structure", required=True)
    s.add_argument("--phi", required=True)
    s.add_argument("--split", required=True)

    s = sub.add_parser("sop-sequence", help="check a formula sequence of a levelled theory")
    s.add_argument("--theory", required=True)
    s.add_argument("--length", type=int, default=5)
    s.add_argument("--bound", type=int, default=4)

    s = sub.add_parser("generic", help="grow an extension-complete model")
    s.add_argument("--theory", required=True)
    s.add_argument("--size", type=int, required=True)
    s.add_argument("--closure", type=int, default=1)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--start")
    s.add_argument("--out", help="write the structure here")

    s = sub.add_parser("invariant-model", help="cut invariants of a model")
    s.add_argument("--structure", required=True)
    s.add_argument("--phi", required=True)
    s.add_argument("--split", default="x;y")
    s.add_argument("--cuts", required=True)
    s.add_argument("--tail", action="store_true", help="only elements at or above delta")

    s = sub.add_parser("invariant-order", help="cut invariants of a linear order")
    s.add_argument("--structure", required=True)
    s.add_argument("--cuts", required=True)
    s.add_argument("--tail", action="store_true")

    s = sub.add_parser("recheck", help="re-verify a report")
    s.add_argument("report")
    return p


def dispatch(a) -> Report:
    c = a.command
    if c == "check-model":
        return cmd_check_model(_read(a.structure), a.theory)
    if c == "find-forbidden":
        return cmd_find_forbidden(_read(a.structure), a.theory)
    if c == "amalgamate":
        if a.cyclic is not None:
            if not a.chain:
                raise UsageError("--cyclic needs --chain")
            return cmd_cyclic_amalgam(_read(a.chain), a.cyclic, a.theory)
        if not (a.m0 and a.m1 and a.m2):
            raise UsageError("amalgamate needs --m0, --m1 and --m2")
        return cmd_amalgamate(a.theory, _read(a.m0), _read(a.m1), _read(a.m2), a.map1, a.map2)
    if c == "cyclic-amalgam":
        return cmd_cyclic_amalgam(_read(a.chain), a.m, a.theory)
    if c == "witness":
        rep = cmd_witness(a.theory, a.length, a.n)
        if a.out:
            Path(a.out).write_text(rep.get("chain") + "\n")
        return rep
    if c == "sop-check":
        return cmd_sop_check(_read(a.chain), a.n, a.theory, [_read(x) for x in a.extra])
    if c == "reduce":
        return cmd_reduce(a.phi, a.split, a.n, _read(a.structure) if a.structure else None, a.at)
    if c == "strict-order":
        return cmd_strict_order(_read(a.structure), a.phi, a.split)
    if c == "sop-sequence":
        return cmd_sop_sequence(a.theory, a.length, a.bound)
    if c == "generic":
        rep = cmd_generic(a.theory, a.size, a.closure, a.seed,
                          _read(a.start) if a.start else None)
        if a.out:
            Path(a.out).write_text(rep.get("structure") + "\n")
        return rep
    if c == "invariant-model":
        return cmd_invariant_model(_read(a.structure), a.phi, a.split, _read(a.cuts), a.tail)
    if c == "invariant-order":
        return cmd_invariant_order(_read(a.structure), _read(a.cuts), a.tail)
    if c == "recheck":
        return cmd_recheck(_read(a.report))
    raise UsageError(f"unknown command {c!r}")


def main(argv=None) -> int:
    parser = build_parser()
    try:
        a = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    try:
        threads()
        rep = dispatch(a)
    except UsageError as exc:
        print(f"sopnlab: {exc}", file=sys.stderr)
        return 2
    except USAGE_ERRORS as exc:
        print(f"sopnlab: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    text = rep.render()
    if a.report_out:
        Path(a.report_out).write_text(text)
    else:
        sys.stdout.write(text)
    return rep.exit_code


if __name__ == "__main__":
    sys.exit(main())
