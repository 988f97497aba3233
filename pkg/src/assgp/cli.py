"""Command-line interface: ``assgp word|chain|verify ...``.

Exit codes: 0 everything verified, 1 a verification failed (or the request is
invalid, such as separating ``e``), 2 a definite answer was needed but the
result is Unknown or absent.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from .batteries import run_lemma_batteries
from .chain import (
    AssgpTask,
    ChainConfig,
    Schedule,
    SepTask,
    TopologyOracle,
    build_chain,
    default_schedule,
    run_suites,
)
from .report import Report
from .serialize import load_run, write_run
from .systems import SearchBudget, system_from_manifests, verify_system
from .trees import CertificateError, tree_to_json
from .words import AlphabetRegistry, Word, WordError, cyclic_member, inv, lett, mul, reduce_word

EXIT_OK, EXIT_FAIL, EXIT_UNKNOWN = 0, 1, 2


def _word(text: str, reg: AlphabetRegistry) -> Word:
    """Inline syntax (``x0 x1^-1``) or JSON (``{"letters": [1, -2]}`` / ``[1, -2]``)."""
    s = text.strip()
    if s.startswith("{") or s.startswith("["):
        try:
            obj = json.loads(s)
        except json.JSONDecodeError as exc:
            raise WordError(f"bad JSON word: {exc.msg}", exc.pos) from None
        letters = obj.get("letters") if isinstance(obj, dict) else obj
        if not isinstance(letters, list):
            raise WordError("JSON word needs a 'letters' list")
        for c in letters:
            if isinstance(c, int) and c != 0:
                reg.ensure_id(abs(c) - 1)
        return reduce_word(letters)
    return reg.parse(s)


def _emit(args, payload: dict, text: str) -> None:
    print(json.dumps(payload, sort_keys=True) if getattr(args, "json", False) else text)


# -- word ------------------------------------------------------------------------------

def cmd_word(args) -> int:
    reg = AlphabetRegistry()
    reg.seed(1)
    words = [_word(w, reg) for w in args.words]
    op = args.op
    need = {"reduce": 1, "inv": 1, "lett": 1, "mul": 2, "cyclic-member": 2}[op]
    if len(words) != need:
        raise WordError(f"'{op}' takes {need} word(s), got {len(words)}")
    if op == "reduce":
        w = words[0]
        _emit(args, {"letters": list(w)}, reg.format(w))
    elif op == "inv":
        w = inv(words[0])
        _emit(args, {"letters": list(w)}, reg.format(w))
    elif op == "mul":
        w = mul(words[0], words[1])
        _emit(args, {"letters": list(w)}, reg.format(w))
    elif op == "lett":
        ids = sorted(lett(words[0]))
        _emit(args, {"generators": ids}, " ".join(reg[i].name for i in ids) or "(none)")
    else:
        h, c = words
        if not c:
            raise WordError("cyclic-member needs a nontrivial generator")
        q = cyclic_member(h, c)
        _emit(args, {"exponent": q}, "absent" if q is None else str(q))
    return EXIT_OK


# -- chain -----------------------------------------------------------------------------

def _schedule_queries(schedule: Schedule) -> tuple[list[Word], list[Word], list[tuple]]:
    """Words for the conjugation suite, plus the separation and ASSGP tasks to re-check."""
    seps = [t.g for t in schedule.tasks if isinstance(t, SepTask)]
    pairs = [(t.g, t.n) for t in schedule.tasks if isinstance(t, AssgpTask)]
    words = list(dict.fromkeys(seps + [g for g, _ in pairs]))
    return words, seps, pairs


def cmd_chain_build(args) -> int:
    reg = AlphabetRegistry()
    if args.schedule:
        try:
            data = json.loads(Path(args.schedule).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            print(f"cannot read schedule: {exc}", file=sys.stderr)
            return EXIT_FAIL
        schedule = Schedule.from_json(data, reg)
    else:
        schedule = default_schedule(reg, args.max_word_len, args.generators, args.max_depth)
    budget = SearchBudget(max_exponent=args.max_exponent)
    config = ChainConfig(seed=args.seed, leq_samples=args.samples, verify_samples=args.samples,
                         max_exponent=min(args.max_exponent, 8), budget=budget)
    timings = {}
    t0 = time.perf_counter()
    state = build_chain(schedule, reg, config=config)
    timings["build_seconds"] = round(time.perf_counter() - t0, 3)
    words, seps, pairs = _schedule_queries(schedule)
    t0 = time.perf_counter()
    suites = run_suites(state, args.samples, args.seed, words, separations=seps, assgp_pairs=pairs)
    timings["suites_seconds"] = round(time.perf_counter() - t0, 3)
    manifest = write_run(Path(args.out), state, schedule, suites, timings)
    ok = state.ok and suites.ok
    if args.json:
        print(json.dumps({"ok": ok, "manifest": manifest}, sort_keys=True))
    else:
        print(f"{len(state.stages)} stages, {len(state.log)} tasks, {len(state.witnesses)} ASSGP extensions")
        for c in state.stages:
            print(f"  stage {c.index}: {c.label:<24} |X|={len(c.alphabet):<4} depth={c.depth}  {c.system.hash[:12]}")
        for r in state.reports:
            if not r.ok:
                print(r)
        print(suites)
        print(f"run written to {args.out}")
    return EXIT_OK if ok else EXIT_FAIL


def _load(args):
    try:
        return load_run(Path(args.run))
    except (OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
        raise SystemExit(_fail(f"cannot load run directory {args.run}: {exc}"))


def _fail(msg: str) -> int:
    print(msg, file=sys.stderr)
    return EXIT_FAIL


def cmd_chain_separate(args) -> int:
    state, _, _ = _load(args)
    g = _word(args.g, state.registry)
    if not g:
        return _fail("the identity e cannot be separated from itself")
    oracle = TopologyOracle(state)
    wit = oracle.separation_witness(g)
    if wit is None:
        print(f"no separation task was processed for {state.registry.format(g)}", file=sys.stderr)
        return EXIT_UNKNOWN
    try:
        oracle.replay_separation(wit)
    except CertificateError as exc:
        return _fail(f"separation witness does not replay: {exc}")
    payload = {"g": list(g), "stage": wit.stage, "level": wit.level, "proof": wit.proof.to_json()}
    _emit(args, payload, f"{state.registry.format(g)} is not in U_{wit.level} "
                         f"(stage {wit.stage}, {wit.proof.tag}); replayed")
    return EXIT_OK


def cmd_chain_certify(args) -> int:
    state, _, _ = _load(args)
    g = _word(args.g, state.registry)
    oracle = TopologyOracle(state)
    try:
        cert = oracle.assgp_certificate(g, args.n, args.spot)
    except CertificateError as exc:
        return _fail(f"certificate check failed: {exc}")
    if cert is None:
        print(f"no ASSGP task was processed for ({state.registry.format(g)}, {args.n})", file=sys.stderr)
        return EXIT_UNKNOWN
    if cert.product() != g:
        return _fail("factors do not fold to g")
    reg = state.registry
    payload = {"g": list(g), "n": args.n, "stage": cert.stage,
               "factors": [f.to_json() for f in cert.factors],
               "spot_checked_powers": len(cert.certificates)}
    if args.trees:
        payload["certificates"] = [{"factor": i, "q": q, "tree": tree_to_json(t)}
                                   for (i, q), t in sorted(cert.certificates.items())]
    lines = [f"{reg.format(g)} in <Cyc(U_{args.n})> via {len(cert.factors)} factors (stage {cert.stage}):"]
    lines += [f"  {reg.format(f.word)}" for f in cert.factors]
    lines.append(f"  {len(cert.certificates)} powers |q| <= {args.spot} certified")
    _emit(args, payload, "\n".join(lines))
    return EXIT_OK


def cmd_chain_report(args) -> int:
    state, schedule, manifest = _load(args)
    path = Path(args.run)
    suites = json.loads((path / "reports" / "suites.json").read_text()) if (path / "reports" / "suites.json").exists() else None
    build = json.loads((path / "reports" / "build.json").read_text())
    ok = all(r["ok"] for r in build) and (suites is None or suites["ok"])
    if args.json:
        print(json.dumps({"ok": ok, "manifest": manifest, "suites": suites}, sort_keys=True))
        return EXIT_OK if ok else EXIT_FAIL
    print(f"run {path}: {'verified' if ok else 'FAILED'}")
    print(f"  schedule hash {manifest['schedule_hash'][:16]}, seed {manifest['config']['seed']}")
    for c in state.stages:
        print(f"  stage {c.index}: {c.label:<24} |X|={len(c.alphabet):<4} depth={c.depth}")
    summary = manifest["summary"]
    print(f"  tasks: {summary['tasks']} {summary['task_actions']}")
    print(f"  build reports: {summary['build_reports_passed']} passed, {summary['build_reports_failed']} failed")
    for r in build:
        if not r["ok"]:
            print(f"  FAIL {r['name']}: " + ", ".join(e["tag"] for e in r["entries"] if not e["passed"]))
    if suites is not None:
        for e in suites["entries"]:
            print(f"  {'ok  ' if e['passed'] else 'FAIL'} {e['tag']} [{e['checked']} checked]")
    return EXIT_OK if ok else EXIT_FAIL


# -- verify -------------------------------------------------------------------------------

def cmd_verify_lemmas(args) -> int:
    rep = run_lemma_batteries(args.samples, args.seed)
    _emit(args, rep.to_json(), str(rep))
    return EXIT_OK if rep.ok else EXIT_FAIL


def cmd_verify_system(args) -> int:
    try:
        data = json.loads(Path(args.file).read_text())
        manifests = data["systems"] if isinstance(data, dict) and "systems" in data else [data]
        system = system_from_manifests(manifests)
    except (OSError, json.JSONDecodeError, ValueError, KeyError, TypeError) as exc:
        rep = Report("verify-system")
        rep.add("validation", False, 0, 1, f"{type(exc).__name__}: {exc}")
        _emit(args, rep.to_json(), str(rep))
        return EXIT_FAIL
    rep = verify_system(system, args.samples, args.seed)
    _emit(args, rep.to_json(), str(rep))
    return EXIT_OK if rep.ok else EXIT_FAIL


# -- parser ---------------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="assgp", description="Certified ASSGP topology construction on free groups")
    sub = p.add_subparsers(dest="cmd", required=True)

    w = sub.add_parser("word", help="free-group arithmetic")
    w.add_argument("op", choices=["reduce", "mul", "inv", "lett", "cyclic-member"])
    w.add_argument("words", nargs="+", help='inline words like "x0 x1^-1" or JSON {"letters": [...]}')
    w.add_argument("--json", action="store_true")
    w.set_defaults(func=cmd_word)

    c = sub.add_parser("chain", help="build and query a generic chain")
    csub = c.add_subparsers(dest="chain_cmd", required=True)
    b = csub.add_parser("build")
    b.add_argument("--schedule", help="schedule JSON (default: the built-in schedule)")
    b.add_argument("--out", required=True)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--samples", type=int, default=100)
    b.add_argument("--max-exponent", type=int, default=16)
    b.add_argument("--max-depth", type=int, default=3)
    b.add_argument("--max-word-len", type=int, default=4)
    b.add_argument("--generators", type=int, default=3)
    b.add_argument("--json", action="store_true")
    b.set_defaults(func=cmd_chain_build)

    ca = csub.add_parser("certify-assgp")
    ca.add_argument("g")
    ca.add_argument("n", type=int)
    ca.add_argument("--run", required=True)
    ca.add_argument("--spot", type=int, default=10)
    ca.add_argument("--trees", action="store_true", help="include every power certificate")
    ca.add_argument("--json", action="store_true")
    ca.set_defaults(func=cmd_chain_certify)

    cs = csub.add_parser("separate")
    cs.add_argument("g")
    cs.add_argument("--run", required=True)
    cs.add_argument("--json", action="store_true")
    cs.set_defaults(func=cmd_chain_separate)

    cr = csub.add_parser("report")
    cr.add_argument("--run", required=True)
    cr.add_argument("--json", action="store_true")
    cr.set_defaults(func=cmd_chain_report)

    v = sub.add_parser("verify", help="lemma batteries and system checks")
    vsub = v.add_subparsers(dest="verify_cmd", required=True)
    vl = vsub.add_parser("lemmas")
    vl.add_argument("--samples", type=int, default=1000)
    vl.add_argument("--seed", type=int, default=0)
    vl.add_argument("--json", action="store_true")
    vl.set_defaults(func=cmd_verify_lemmas)
    vs = vsub.add_parser("system")
    vs.add_argument("file")
    vs.add_argument("--samples", type=int, default=200)
    vs.add_argument("--seed", type=int, default=0)
    vs.add_argument("--json", action="store_true")
    vs.set_defaults(func=cmd_verify_system)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except WordError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
