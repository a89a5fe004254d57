"""Command-line front end.  Every command prints one JSON document.

Exit codes: 0 pass, 1 postulate failure, 2 input error, 3 budget exhausted.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from collections import Counter
from pathlib import Path

import numpy as np

from . import __version__
from .extensions import ExtensionError, canonical_extension
from .logic import CapabilityError, make_backend
from .models import MODEL_KINDS, CumulativeModel, ModelError
from .operations import (
    CHECKERS, FAMILIES, PREDICATES, FamilyError, InclusionError, OperationTable, check_dedchar,
    check_distributivity, check_ratchar, classify, enumerate_operations, random_table, search_witness,
)
from .poole import PooleSystem, audit_poole, bases, random_system
from .poole import infer as poole_infer
from .poole import operation_of as poole_operation
from .representations import CONSTRUCTORS, ConstructionError
from .syntax import ParseError, to_text

EXIT_PASS, EXIT_FAIL, EXIT_INPUT, EXIT_BUDGET = 0, 1, 2, 3

# family a model of each kind must define
KIND_FAMILY = {"plain": "cumulative", "ordered": "strongly_cumulative", "full": "deductive", "modular": "rational"}

POOLE_PREDICATES = {
    "poole-constrained-not-distributive": (True, lambda p: not p.distributive),
    "poole-constraint-free-not-rational": (False, lambda p: not p.rational),
}


class InputError(Exception):
    pass


# -- input loading ------------------------------------------------------------------

def _read_input(path: str | None) -> tuple[dict, str]:
    if path is None:
        raise InputError("--input is required for this command")
    try:
        raw = Path(path).read_bytes()
    except OSError as e:
        raise InputError(f"cannot read {path}: {e.strerror}") from None
    try:
        doc = json.loads(raw)
    except (json.JSONDecodeError, UnicodeDecodeError) as e:
        raise InputError(f"{path} is not valid JSON: {e}") from None
    if not isinstance(doc, dict):
        raise InputError("input must be a JSON object")
    return doc, hashlib.sha256(raw).hexdigest()


def _backend_for(doc: dict, override: str | None):
    if "vocabulary" not in doc:
        raise InputError("input has no vocabulary")
    return make_backend(override or doc.get("backend", "classical"), doc["vocabulary"])


def load_input(doc: dict, backend_override: str | None = None):
    """Return (kind, object) for a poole system, operation table or model document."""
    if "vocabulary" not in doc and isinstance(doc.get("model"), dict):
        doc = doc["model"]  # a represent report
    kind = doc.get("kind")
    if kind is None and "defaults" in doc:
        kind = "poole"
    b = _backend_for(doc, backend_override)
    if kind == "poole":
        return kind, PooleSystem.from_dict(doc, b)
    if kind == "operation-table":
        return kind, OperationTable.from_dict(doc, b)
    if kind == "model":
        return kind, CumulativeModel.from_dict(doc, b)
    raise InputError(f"unknown input kind {kind!r}")


def _as_table(kind: str, obj) -> OperationTable:
    if kind == "poole":
        return poole_operation(obj)
    if kind == "model":
        return obj.operation()
    return obj


def _atoms(text: str) -> list[str]:
    return [a.strip() for a in text.split(",") if a.strip()]


# -- reports ------------------------------------------------------------------------

def _header(command: str, digest: str | None = None, seed: int | None = None) -> dict:
    h = {"tool": {"name": "nonmono", "version": __version__}, "command": command}
    if digest is not None:
        h["input_digest"] = "sha256:" + digest
    if seed is not None:
        h["seed"] = seed
    return h


def _theory(backend, mask: int) -> dict:
    d = {"mask": int(mask), "worlds": [backend.vocab.world_str(w) for w in range(backend.n_worlds) if (mask >> w) & 1]}
    try:
        d["formula"] = to_text(backend.characteristic_formula(int(mask)))
    except CapabilityError as e:
        d["formula"] = None
        d["formula_note"] = str(e)
    return d


def _table_audit(op: OperationTable) -> tuple[dict, bool]:
    """Profile of a table plus the theorem-level cross checks that must hold."""
    prof = classify(op)
    theorems = []
    link = prof.chain_violation()
    theorems.append({"postulate": "family-implication-chain", "holds": link is None,
                     **({"note": link} if link else {})})
    if prof.cumulative:
        forms = [check_distributivity(op, f).holds for f in ("full", "weak-w1", "weak-w2")]
        theorems.append({"postulate": "distributivity-forms-agree", "holds": len(set(forms)) == 1,
                         "note": f"full={forms[0]} weak-w1={forms[1]} weak-w2={forms[2]}"})
        d1, d2 = check_dedchar(op)
        theorems.append({"postulate": "deductivity-characterizations-agree",
                         "holds": d1.holds == d2.holds == CHECKERS["deductivity"](op).holds})
    if prof.deductive:
        theorems.append({"postulate": "rationality-characterization-agrees",
                         "holds": check_ratchar(op).holds == prof.rational})
    ok = all(t["holds"] for t in theorems)
    return {"profile": prof.to_dict(), "theorems": theorems}, ok


# -- commands -----------------------------------------------------------------------

def cmd_infer(args) -> tuple[dict, int]:
    doc, digest = _read_input(args.input)
    kind, obj = load_input(doc, args.backend)
    b = obj.backend
    X = b.models_of(args.query or [])
    out = _header("infer", digest)
    out["query"] = list(args.query or [])
    out["premises"] = _theory(b, X)
    if kind == "poole":
        out["conclusion"] = _theory(b, poole_infer(obj, X))
        out["bases"] = [[_fmt_default(obj, i) for i in sorted(s)] for s in bases(obj, X)]
    elif kind == "model":
        out["conclusion"] = _theory(b, obj.infer(X))
        out["minimal_states"] = [obj.ids[i] for i in sorted(obj.minimal_states(obj.hat(X)))]
    else:
        out["conclusion"] = _theory(b, obj(X))
    return out, EXIT_PASS


def _fmt_default(sys: PooleSystem, i: int) -> str:
    return to_text(sys.defaults[i])


def cmd_audit(args) -> tuple[dict, int]:
    doc, digest = _read_input(args.input)
    kind, obj = load_input(doc, args.backend)
    out = _header("audit", digest)
    out["input_kind"] = kind
    if kind == "poole":
        rep = audit_poole(obj)
        out.update(rep.to_dict())
        return out, EXIT_PASS if rep.holds else EXIT_FAIL
    if kind == "model":
        mk = doc.get("model_kind", "plain")
        op = obj.operation()
        family = KIND_FAMILY[mk]
        body, ok = _table_audit(op)
        sound = body["profile"][family]
        body["theorems"].append({"postulate": f"{mk}-model-defines-{family}", "holds": sound})
        out.update(body)
        out["operation"] = op.to_dict()
        out["holds"] = ok and sound
        return out, EXIT_PASS if out["holds"] else EXIT_FAIL
    body, ok = _table_audit(obj)
    out.update(body)
    code = EXIT_PASS if ok else EXIT_FAIL
    if args.require:
        fam = body["profile"][args.require]
        out["required_family"] = {"family": args.require, "holds": fam}
        if not fam:
            code = EXIT_FAIL
    out["holds"] = code == EXIT_PASS
    return out, code


def cmd_classify(args) -> tuple[dict, int]:
    doc, digest = _read_input(args.input)
    kind, obj = load_input(doc, args.backend)
    op = _as_table(kind, obj)
    out = _header("classify", digest)
    prof = classify(op)
    out["profile"] = prof.to_dict()
    code = EXIT_PASS
    if args.require:
        out["required_family"] = {"family": args.require, "holds": getattr(prof, args.require)}
        if not getattr(prof, args.require):
            code = EXIT_FAIL
    return out, code


def cmd_represent(args) -> tuple[dict, int]:
    doc, digest = _read_input(args.input)
    kind, obj = load_input(doc, args.backend)
    if kind != "operation-table":
        raise InputError("represent expects an operation-table input")
    out = _header("represent", digest)
    out["target"] = args.target
    try:
        rep = CONSTRUCTORS[args.target](obj)
    except FamilyError as e:
        out["refused"] = {"reason": "family-check-failed", "verdict": e.verdict.to_dict()}
        return out, EXIT_FAIL
    except ConstructionError as e:
        out["refused"] = {"reason": "construction-assertion-failed", "verdict": e.verdict.to_dict()}
        return out, EXIT_FAIL
    out["model"] = rep.to_dict()
    return out, EXIT_PASS


def cmd_enumerate(args) -> tuple[dict, int]:
    atoms = _atoms(args.atoms)
    if len(atoms) != 1:
        raise InputError("enumerate supports exactly one atom (all 16 tables)")
    b = make_backend(args.backend or "classical", atoms)
    hist: Counter = Counter()
    tables = []
    chain = []
    for op in enumerate_operations(b):
        prof = classify(op)
        for f, v in prof.flags().items():
            hist[f] += int(v)
        link = prof.chain_violation()
        if link:
            chain.append({"table": op.to_dict(), "violation": link})
        if args.with_tables:
            tables.append({"table": op.to_dict(), "profile": prof.flags()})
    out = _header("enumerate")
    out["backend"] = b.kind
    out["vocabulary"] = atoms
    out["count"] = sum(1 for _ in enumerate_operations(b))
    out["histogram"] = {f: hist[f] for f in FAMILIES}
    out["chain_violations"] = chain
    if args.with_tables:
        out["tables"] = tables
    return out, EXIT_FAIL if chain else EXIT_PASS


def cmd_search(args) -> tuple[dict, int]:
    atoms = _atoms(args.atoms)
    b = make_backend(args.backend or "classical", atoms)
    out = _header("search", seed=args.seed)
    out["predicate"] = args.predicate
    out["budget"] = args.budget
    if args.predicate in POOLE_PREDICATES:
        constrained, pred = POOLE_PREDICATES[args.predicate]
        rng = np.random.default_rng(args.seed)
        for i in range(args.budget):
            sy = random_system(b, rng, max_defaults=args.max_defaults, with_constraints=constrained)
            prof = classify(poole_operation(sy))
            if pred(prof):
                out.update(tries=i + 1, exhausted=False, witness=sy.to_dict(), profile=prof.to_dict())
                return out, EXIT_PASS
        out.update(tries=args.budget, exhausted=True)
        return out, EXIT_BUDGET
    if args.predicate not in PREDICATES:
        raise InputError(f"unknown predicate {args.predicate!r}")
    repair = not args.no_repair
    res = search_witness(args.predicate, lambda rng: random_table(b, rng, repair=repair), args.budget, args.seed)
    out.update(tries=res.tries, exhausted=res.exhausted)
    if res.exhausted:
        return out, EXIT_BUDGET
    out["witness"] = res.witness.to_dict()
    out["profile"] = classify(res.witness).to_dict()
    return out, EXIT_PASS


def cmd_extend(args) -> tuple[dict, int]:
    doc, digest = _read_input(args.input)
    kind, obj = load_input(doc, args.backend)
    obj = _as_table(kind, obj)
    out = _header("extend", digest)
    try:
        result, trace = canonical_extension(obj)
    except FamilyError as e:
        out["refused"] = {"reason": "family-check-failed", "verdict": e.verdict.to_dict()}
        return out, EXIT_FAIL
    except ExtensionError as e:
        out["refused"] = {"reason": "extension-assertion-failed", "verdict": e.verdict.to_dict()}
        return out, EXIT_FAIL
    out["trace"] = trace.to_dict()
    out["result"] = result.to_dict()
    out["equals_input"] = result == obj
    return out, EXIT_PASS


COMMANDS = {
    "infer": cmd_infer, "audit": cmd_audit, "classify": cmd_classify, "represent": cmd_represent,
    "enumerate": cmd_enumerate, "search": cmd_search, "extend": cmd_extend,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", help="JSON input file")
    common.add_argument("--seed", type=int, default=0, help="seed for sampling commands (default 0)")
    common.add_argument("--budget", type=int, default=1000, help="sample budget for search")
    common.add_argument("--backend", choices=["classical", "identity"], default=None,
                        help="underlying logic (overrides the input's backend field)")
    common.add_argument("--json-out", help="also write the report to this file")

    p = argparse.ArgumentParser(prog="nonmono", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"nonmono {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    s = sub.add_parser("infer", parents=[common], help="conclusions from a premise list")
    s.add_argument("--query", action="append", help="premise formula (repeatable)")
    s = sub.add_parser("audit", parents=[common], help="check an input against the theorem suite")
    s.add_argument("--require", choices=FAMILIES, help="fail unless the operation is in this family")
    s = sub.add_parser("classify", parents=[common], help="family profile of an operation")
    s.add_argument("--require", choices=FAMILIES, help="fail unless the operation is in this family")
    s = sub.add_parser("represent", parents=[common], help="build a model defining a table")
    s.add_argument("--target", choices=sorted(CONSTRUCTORS), required=True)
    s = sub.add_parser("enumerate", parents=[common], help="all tables over one atom")
    s.add_argument("--atoms", default="p")
    s.add_argument("--with-tables", action="store_true")
    s = sub.add_parser("search", parents=[common], help="random search for a separating witness")
    s.add_argument("--predicate", required=True, choices=sorted(PREDICATES) + sorted(POOLE_PREDICATES))
    s.add_argument("--atoms", default="p,q")
    s.add_argument("--max-defaults", type=int, default=6)
    s.add_argument("--no-repair", action="store_true", help="sample tables without the cumulativity repair")
    sub.add_parser("extend", parents=[common], help="canonical extension trace")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        report, code = COMMANDS[args.command](args)
    except (InputError, ParseError, CapabilityError, ModelError, InclusionError, KeyError, ValueError) as e:
        report = _header(args.command)
        report["error"] = {"type": type(e).__name__, "message": str(e)}
        code = EXIT_INPUT
    report["exit_code"] = code
    text = json.dumps(report, sort_keys=True, indent=2) + "\n"
    sys.stdout.write(text)
    if args.json_out:
        Path(args.json_out).write_text(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
