"""Run directories: writing a finished chain to disk and loading it back.

Layout::

    manifest.json            schedule hash, seed, budgets, stage hashes, summary counts
    schedule.json            the schedule that was run
    stages/index.json        stage index -> system hash and label
    stages/<hash>.json       one manifest per system (companions included)
    certificates/log.json    every task with its meeting stage and exclusion proof
    certificates/witnesses.json   ASSGP witnesses
    reports/build.json       extension and condition reports from the build
    reports/suites.json      invariant suites
    reports/timings.json     wall-clock per phase (kept out of the manifest)

Everything except ``timings.json`` is a pure function of the schedule, seed
and budgets, so replays produce byte-identical files.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import asdict
from pathlib import Path

from .chain import (
    AssgpTask,
    ChainConfig,
    ChainState,
    Condition,
    Schedule,
    cover,
    task_from_json,
    task_to_json,
)
from .lemmas import AssgpWitness, CycFactor
from .report import Report
from .systems import (
    ExclusionProof,
    NbhdSystem,
    SearchBudget,
    system_bundle,
    systems_from_manifests,
    topological_manifests,
)
from .words import AlphabetRegistry, Word


def dump_json(obj) -> str:
    return json.dumps(obj, indent=1, sort_keys=True, ensure_ascii=False) + "\n"


def content_hash(obj) -> str:
    blob = json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)
    return hashlib.sha256(blob.encode()).hexdigest()


def config_to_json(cfg: ChainConfig) -> dict:
    return {"seed": cfg.seed, "leq_samples": cfg.leq_samples, "verify_samples": cfg.verify_samples,
            "max_exponent": cfg.max_exponent, "budget": asdict(cfg.budget)}


def config_from_json(d: dict) -> ChainConfig:
    return ChainConfig(seed=int(d["seed"]), leq_samples=int(d["leq_samples"]),
                       verify_samples=int(d["verify_samples"]), max_exponent=int(d["max_exponent"]),
                       budget=SearchBudget(**d["budget"]))


def _all_systems(state: ChainState) -> list[dict]:
    seen: dict[str, dict] = {}
    for cond in state.stages:
        for m in system_bundle(cond.system):
            seen.setdefault(m["hash"], m)
    return list(seen.values())


def witness_from_json(d: dict, systems: dict[str, NbhdSystem]) -> AssgpWitness:
    factors = [CycFactor(Word(f["word"]), Word(f["descriptor"]), int(f["sign"]), f["system"])
               for f in d["factors"]]
    return AssgpWitness(systems[d["base"]], systems[d["system"]], Word(d["g"]), Word(d["g0"]),
                        int(d["k"]), tuple(d["fresh"]), factors)


def write_run(out: Path, state: ChainState, schedule: Schedule, suites: Report | None = None,
              timings: dict | None = None) -> dict:
    out = Path(out)
    for sub in ("stages", "certificates", "reports"):
        (out / sub).mkdir(parents=True, exist_ok=True)
    reg = state.registry
    schedule_json = schedule.to_json(reg)
    (out / "schedule.json").write_text(dump_json(schedule_json))

    systems = _all_systems(state)
    for m in systems:
        (out / "stages" / f"{m['hash']}.json").write_text(dump_json(m))
    index = [{"index": c.index, "label": c.label, "hash": c.system.hash, "parent": c.parent}
             for c in state.stages]
    (out / "stages" / "index.json").write_text(dump_json(index))

    log = []
    for rec in state.log:
        entry = {"task": task_to_json(rec.task, reg), "stage": rec.stage, "action": rec.action}
        if rec.proof is not None:
            entry["proof"] = rec.proof.to_json()
        log.append(entry)
    (out / "certificates" / "log.json").write_text(dump_json(log))
    wits = [w.to_json() for _, w in sorted(state.witnesses.items(), key=lambda kv: (len(kv[0]), kv[0]))]
    (out / "certificates" / "witnesses.json").write_text(dump_json(wits))

    build = [r.to_json() for r in state.reports]
    (out / "reports" / "build.json").write_text(dump_json(build))
    if suites is not None:
        (out / "reports" / "suites.json").write_text(dump_json(suites.to_json()))
    if timings is not None:
        (out / "reports" / "timings.json").write_text(dump_json(timings))

    actions: dict[str, int] = {}
    for rec in state.log:
        actions[rec.action] = actions.get(rec.action, 0) + 1
    manifest = {
        "schedule_hash": content_hash(schedule_json),
        "config": config_to_json(state.config),
        "alphabet": reg.manifest(),
        "stages": [{"index": c.index, "label": c.label, "hash": c.system.hash} for c in state.stages],
        "summary": {
            "tasks": len(state.log),
            "task_actions": actions,
            "witnesses": len(state.witnesses),
            "build_reports_passed": sum(1 for r in state.reports if r.ok),
            "build_reports_failed": sum(1 for r in state.reports if not r.ok),
            "suites_ok": None if suites is None else suites.ok,
            "suite_failures": None if suites is None else [e.tag for e in suites.failures()],
        },
    }
    (out / "manifest.json").write_text(dump_json(manifest))
    return manifest


def load_run(path: Path) -> tuple[ChainState, Schedule, dict]:
    """Rebuild the chain state (stages, task log, witnesses) from a run directory."""
    path = Path(path)
    manifest = json.loads((path / "manifest.json").read_text())
    reg = AlphabetRegistry.from_manifest(manifest["alphabet"])
    schedule = Schedule.from_json(json.loads((path / "schedule.json").read_text()), reg)
    index = json.loads((path / "stages" / "index.json").read_text())

    raw = [json.loads(p.read_text()) for p in sorted((path / "stages").glob("*.json"))
           if p.stem != "index"]
    systems = systems_from_manifests(topological_manifests(raw))
    state = ChainState(reg, systems[index[0]["hash"]], config_from_json(manifest["config"]))
    state.stages = [Condition(systems[e["hash"]], e["index"], e["label"], e["parent"]) for e in index]
    for d in json.loads((path / "certificates" / "witnesses.json").read_text()):
        w = witness_from_json(d, systems)
        state.witnesses[w.g] = w
    for entry in json.loads((path / "certificates" / "log.json").read_text()):
        task = task_from_json(entry["task"], reg)
        proof = ExclusionProof.from_json(entry["proof"]) if "proof" in entry else None
        factors = ()
        if isinstance(task, AssgpTask):
            factors = cover(state, entry["stage"], task.g) or ()
        state.record(task, entry["stage"], entry["action"], factors=factors, proof=proof)
    return state, schedule, manifest
