"""Command-line front end: init, add, get, rm, list, search, instantiate, eval, config.

Exit status: 0 ok/found, 1 not found, 2 usage or validation error, 3 store error.
Diagnostics go to stderr; results go to stdout.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Any, Sequence

from .assets import AssetKind, AssetRecord, SemanticSignature
from .corpus import CorpusSpec
from .engines import (
    DENOTATIONAL,
    DESCRIPTIVE,
    INFORMATIONAL,
    METHODS,
    OPERATIONAL,
    STRUCTURAL,
    TOPOLOGICAL,
    DenotationalQ,
    DescriptiveQ,
    EngineConfig,
    InformationalQ,
    OperationalQ,
    RankedHit,
    Sample,
    StructuralQ,
    TopologicalQ,
    retrieve_and_instantiate,
    search,
)
from .errors import (
    Busy,
    Conflict,
    CorruptStore,
    IncompleteBindings,
    InvalidArgument,
    NotFound,
    ReuseError,
    ValidationFailed,
)
from .evaluation import format_report, run_benchmark, write_report
from .minilang import parse_any
from .pipeline import Found, make_stub, search_or_register
from .store import Repository

FORMAT_VERSION = 1
EXIT_OK, EXIT_NOT_FOUND, EXIT_USAGE, EXIT_STORE = 0, 1, 2, 3
CONFIG_FILE = ".reuserepo.json"

log = logging.getLogger("reuserepo")


class UsageError(Exception):
    pass


@dataclass
class CliConfig:
    repo: str = "."
    k: int = 10
    threshold: float = 0.5
    output: str = "human"
    fusion_constant: int = 60
    step_budget: int = 10000

    def validate(self) -> None:
        if self.k < 1:
            raise UsageError(f"argument --k: must be >= 1, got {self.k}")
        if not 0.0 <= self.threshold <= 1.0:
            raise UsageError(f"argument --threshold: must lie in [0, 1], got {self.threshold}")
        if self.output not in ("human", "machine"):
            raise UsageError(f"argument --output: must be human or machine, got {self.output!r}")
        if self.fusion_constant < 0:
            raise UsageError(f"argument --fusion-constant: must be >= 0, got {self.fusion_constant}")
        if self.step_budget < 1:
            raise UsageError(f"argument --step-budget: must be >= 1, got {self.step_budget}")


ENV_VARS = {
    "repo": "REUSE_REPO",
    "k": "REUSE_K",
    "threshold": "REUSE_THRESHOLD",
    "output": "REUSE_OUTPUT",
    "fusion_constant": "REUSE_FUSION_CONSTANT",
    "step_budget": "REUSE_STEP_BUDGET",
}


def _coerce(name: str, value: Any, source: str) -> Any:
    kind = {f.name: f.type for f in fields(CliConfig)}[name]
    try:
        if kind == "int":
            return int(value)
        if kind == "float":
            return float(value)
        return str(value)
    except (TypeError, ValueError):
        raise UsageError(f"{source}: invalid value {value!r} for {name}") from None


def resolve_config(args: argparse.Namespace, env: dict | None = None) -> tuple[CliConfig, dict[str, str]]:
    """Flags override env vars override the config file override defaults.

    Returns the effective config and, per field, where its value came from.
    """
    env = os.environ if env is None else env
    values = asdict(CliConfig())
    sources = {name: "default" for name in values}

    cfg_path = getattr(args, "config", None) or env.get("REUSE_CONFIG")
    if cfg_path is None and Path(CONFIG_FILE).is_file():
        cfg_path = CONFIG_FILE
    if cfg_path:
        try:
            data = json.loads(Path(cfg_path).read_text(encoding="utf-8"))
        except (OSError, ValueError) as exc:
            raise UsageError(f"argument --config: cannot read {cfg_path}: {exc}") from None
        if not isinstance(data, dict):
            raise UsageError(f"argument --config: {cfg_path} must hold an object")
        for name, value in data.items():
            if name not in values:
                raise UsageError(f"argument --config: unknown key {name!r} in {cfg_path}")
            values[name] = _coerce(name, value, f"config file {cfg_path}")
            sources[name] = f"file:{cfg_path}"
    for name, var in ENV_VARS.items():
        if var in env:
            values[name] = _coerce(name, env[var], f"environment {var}")
            sources[name] = f"env:{var}"
    for name in values:
        flag = getattr(args, name, None)
        if flag is not None:
            values[name] = flag
            sources[name] = "flag"
    cfg = CliConfig(**values)
    cfg.validate()
    return cfg, sources


# output helpers

def _emit(cfg: CliConfig, obj: dict, human: str, out) -> None:
    if cfg.output == "machine":
        out.write(machine_line(obj) + "\n")
    else:
        out.write(human + "\n")


def machine_line(obj: dict) -> str:
    """One JSON object with ``format_version``; score fields use six decimals."""
    obj = {"format_version": FORMAT_VERSION, **obj}
    fixed: dict[str, str] = {}

    def mark(o):
        if isinstance(o, dict):
            out = {}
            for key, v in o.items():
                if key in ("score", "method_score") and isinstance(v, (int, float)) and not isinstance(v, bool):
                    token = f"\x00{len(fixed)}\x00"
                    fixed[json.dumps(token)] = f"{v:.6f}"
                    out[key] = token
                else:
                    out[key] = mark(v)
            return out
        if isinstance(o, list):
            return [mark(v) for v in o]
        return o

    text = json.dumps(mark(obj), sort_keys=True, ensure_ascii=False)
    for token, value in fixed.items():
        text = text.replace(token, value)
    return text


def _hit_line(snapshot, rank: int, hit: RankedHit) -> str:
    rec = snapshot.records.get(hit.id)
    where = (rec.language or str(rec.kind)) if rec is not None else "-"
    line = f"{hit.name} / {hit.id} / {where}  score={hit.score:.6f} [{hit.method}]"
    if hit.explanation:
        line += f" {hit.explanation}"
    return line


def _emit_hits(cfg: CliConfig, snapshot, hits: Sequence[RankedHit], out) -> None:
    for rank, hit in enumerate(hits, start=1):
        _emit(cfg, {"type": "hit", "rank": rank, **hit.to_dict()}, _hit_line(snapshot, rank, hit), out)


def _emit_stub(cfg: CliConfig, methods: list[str], stub, out) -> None:
    body = {"type": "outcome", "status": "not_found", "methods": methods, "stub": stub.to_dict()}
    human = "not found; registration stub:\n" + json.dumps(stub.to_dict(), indent=2, sort_keys=True,
                                                         ensure_ascii=False)
    _emit(cfg, body, human, out)


# parsing of flag values

def _literal(text: str, flag: str):
    text = text.strip()
    if text in ("true", "false"):
        return text == "true"
    if text.startswith('"'):
        try:
            value = json.loads(text)
        except ValueError:
            raise UsageError(f"argument {flag}: bad string literal {text}") from None
        if not isinstance(value, str):
            raise UsageError(f"argument {flag}: bad string literal {text}")
        return value
    try:
        return int(text)
    except ValueError:
        raise UsageError(f"argument {flag}: cannot read literal {text!r} "
                         "(use integers, true/false, or double-quoted strings)") from None


def parse_sample(text: str) -> Sample:
    """``"2,3=>5"``: comma-separated argument literals, then the expected result."""
    if "=>" not in text:
        raise UsageError(f"argument --sample: expected 'args=>expected', got {text!r}")
    lhs, rhs = text.rsplit("=>", 1)
    args = _split_literals(lhs, "--sample") if lhs.strip() else []
    return Sample(tuple(args), _literal(rhs, "--sample"))


def _split_literals(text: str, flag: str) -> list:
    parts, buf, quoted, escaped = [], [], False, False
    for ch in text:
        if quoted:
            buf.append(ch)
            if escaped:
                escaped = False
            elif ch == "\\":
                escaped = True
            elif ch == '"':
                quoted = False
        elif ch == '"':
            quoted = True
            buf.append(ch)
        elif ch == ",":
            parts.append("".join(buf))
            buf = []
        else:
            buf.append(ch)
    if quoted:
        raise UsageError(f"argument {flag}: unterminated string in {text!r}")
    parts.append("".join(buf))
    return [_literal(p, flag) for p in parts]


def _parse_kind(text: str, flag: str = "--kind") -> AssetKind:
    if "/" not in text:
        raise UsageError(f"argument {flag}: expected Category/Subkind, got {text!r}")
    cat, sub = text.split("/", 1)
    return AssetKind(cat.strip(), sub.strip())


def _parse_signature(text: str, flag: str = "--signature", pre=(), post=()) -> SemanticSignature:
    try:
        return SemanticSignature.parse(text, pre, post)
    except (InvalidArgument, ValueError) as exc:
        raise UsageError(f"argument {flag}: {exc}") from None


def build_query(args: argparse.Namespace, k: int):
    """Typed query from ``search --method`` flags; flags foreign to the method are rejected."""
    method = args.method
    allowed = {
        INFORMATIONAL: {"text"},
        TOPOLOGICAL: {"text"},
        DESCRIPTIVE: {"keyword", "facet"},
        OPERATIONAL: {"name", "sample"},
        DENOTATIONAL: {"name", "signature", "spec_term"},
        STRUCTURAL: {"package", "class_name", "pattern_family", "shape_file"},
    }[method]
    for attr in ("text", "keyword", "facet", "name", "sample", "signature", "spec_term",
                 "package", "class_name", "pattern_family", "shape_file"):
        if getattr(args, attr) and attr not in allowed:
            flag = "--" + {"class_name": "class"}.get(attr, attr).replace("_", "-")
            raise UsageError(f"argument {flag}: not valid with --method {method}")
    if method in (INFORMATIONAL, TOPOLOGICAL):
        if not args.text:
            raise UsageError(f"argument --text: required for --method {method}")
        cls = InformationalQ if method == INFORMATIONAL else TopologicalQ
        return cls(args.text, k=k)
    if method == DESCRIPTIVE:
        return DescriptiveQ(frozenset(args.keyword or ()), frozenset(args.facet or ()), k=k)
    if method == OPERATIONAL:
        return OperationalQ(args.name, tuple(parse_sample(s) for s in args.sample or ()), k=k)
    if method == DENOTATIONAL:
        sig = _parse_signature(args.signature) if args.signature else None
        return DenotationalQ(args.name, sig, frozenset(args.spec_term or ()), k=k)
    shape = None
    if args.shape_file:
        try:
            shape = parse_any(Path(args.shape_file).read_text(encoding="utf-8"))
        except OSError as exc:
            raise UsageError(f"argument --shape-file: {exc}") from None
        except ReuseError as exc:
            raise UsageError(f"argument --shape-file: {exc}") from None
    return StructuralQ(args.package, args.class_name, args.pattern_family, shape, k=k)


# commands

def _open(cfg: CliConfig, create: bool = False, clock=None) -> Repository:
    return Repository.open(cfg.repo, create_if_missing=create, clock=clock)


def cmd_init(args, cfg, out) -> int:
    root = Path(cfg.repo)
    existed = (root / "manifest").exists()
    with _open(cfg, create=True):
        pass
    _emit(cfg, {"type": "init", "repo": str(root), "created": not existed},
          f"{'existing' if existed else 'initialized'} repository at {root}", out)
    return EXIT_OK


def _record_from_flags(args) -> AssetRecord:
    if not args.name:
        raise UsageError("argument --name: required unless --file is given")
    if not args.kind:
        raise UsageError("argument --kind: required unless --file is given")
    payload = None
    if args.payload_file:
        try:
            payload = Path(args.payload_file).read_text(encoding="utf-8")
        except OSError as exc:
            raise UsageError(f"argument --payload-file: {exc}") from None
    sig = None
    if args.signature:
        sig = _parse_signature(args.signature, pre=args.pre_term or (), post=args.post_term or ())
    elif args.pre_term or args.post_term:
        raise UsageError("argument --pre-term/--post-term: requires --signature")
    return AssetRecord(
        name=args.name, kind=_parse_kind(args.kind), language=args.language, label=args.label,
        keywords=frozenset(args.keyword or ()), executable_name=args.executable_name,
        non_executable_name=args.non_executable_name, identity=args.identity,
        package=args.package, class_name=args.class_name, pattern_family=args.pattern_family,
        payload=payload, signature=sig,
    )


def _records_from_file(path: str) -> list[AssetRecord]:
    try:
        fh = sys.stdin if path == "-" else open(path, encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"argument --file: {exc}") from None
    records = []
    with fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                d = json.loads(line)
            except ValueError as exc:
                raise UsageError(f"argument --file: {path}:{lineno}: {exc}") from None
            if isinstance(d, dict):
                d.pop("format_version", None)
                if "stub" in d and "status" in d:
                    d = d["stub"]
            try:
                records.append(AssetRecord.from_dict(d))
            except InvalidArgument as exc:
                raise UsageError(f"argument --file: {path}:{lineno}: {exc}") from None
    return records


def cmd_add(args, cfg, out) -> int:
    if args.file:
        records = _records_from_file(args.file)
        if args.id and len(records) != 1:
            raise UsageError("argument --id: only valid when adding a single record")
    else:
        records = [_record_from_flags(args)]
    clock = (lambda: args.now) if args.now is not None else None
    with _open(cfg, clock=clock) as repo:
        for r in records:
            rid = repo.add(r, args.id)
            _emit(cfg, {"type": "added", "id": str(rid)}, str(rid), out)
    return EXIT_OK


def _record_human(rec: AssetRecord) -> str:
    lines = []
    for key, value in rec.to_dict().items():
        if value is None or value == [] or value == {}:
            continue
        if key == "kind":
            value = f"{value['category']}/{value['subkind']}"
        elif key == "payload":
            value = "\n    " + value.rstrip("\n").replace("\n", "\n    ")
        elif not isinstance(value, str):
            value = json.dumps(value, sort_keys=True, ensure_ascii=False)
        lines.append(f"{key}: {value}")
    return "\n".join(lines)


def cmd_get(args, cfg, out) -> int:
    with _open(cfg) as repo:
        rec = repo.get(args.id)
    _emit(cfg, {"type": "record", "record": rec.to_dict()}, _record_human(rec), out)
    return EXIT_OK


def cmd_rm(args, cfg, out) -> int:
    with _open(cfg) as repo:
        rec = repo.remove(args.id)
    _emit(cfg, {"type": "removed", "id": str(rec.id)}, f"removed {rec.id}", out)
    return EXIT_OK


def cmd_list(args, cfg, out) -> int:
    category = subkind = None
    if args.kind:
        category, _, sub = args.kind.partition("/")
        subkind = sub or None
    with _open(cfg) as repo:
        recs = repo.list(category=category, subkind=subkind, language=args.language)
    for r in recs:
        _emit(cfg, {"type": "record", "record": r.to_dict()},
              f"{r.id}\t{r.name}\t{r.kind}\t{r.language or '-'}", out)
    return EXIT_OK


def cmd_search(args, cfg, out) -> int:
    engine_cfg = EngineConfig(step_budget=cfg.step_budget)
    with _open(cfg) as repo:
        snapshot = repo.snapshot()
    if args.auto is not None:
        if args.method:
            raise UsageError("argument --auto: not allowed with --method")
        if not args.auto.strip():
            raise UsageError("argument --auto: query text is empty")
        outcome = search_or_register(snapshot, args.auto, cfg.threshold, cfg.k, cfg.fusion_constant, engine_cfg)
        if isinstance(outcome, Found):
            _emit_hits(cfg, snapshot, outcome.hits, out)
            return EXIT_OK
        _emit_stub(cfg, outcome.methods_used, outcome.registration_stub, out)
        return EXIT_NOT_FOUND
    if not args.method:
        raise UsageError("argument --method: one of --method or --auto is required")
    query = build_query(args, cfg.k)
    hits = search(snapshot, query, engine_cfg)
    if hits:
        _emit_hits(cfg, snapshot, hits, out)
        return EXIT_OK
    _emit_stub(cfg, [query.method], make_stub(query), out)
    return EXIT_NOT_FOUND


def cmd_instantiate(args, cfg, out) -> int:
    bindings = {}
    for item in args.bind or ():
        name, sep, expr = item.partition("=")
        name = name.strip().lstrip("?")
        if not sep or not name:
            raise UsageError(f"argument --bind: expected hole=expr, got {item!r}")
        if name in bindings:
            raise UsageError(f"argument --bind: hole {name!r} bound twice")
        bindings[name] = expr
    with _open(cfg) as repo:
        snapshot = repo.snapshot()
    source = retrieve_and_instantiate(snapshot, args.id, bindings)
    _emit(cfg, {"type": "instance", "id": args.id, "source": source}, source, out)
    return EXIT_OK


def cmd_eval(args, cfg, out) -> int:
    spec = CorpusSpec()
    if args.spec:
        try:
            spec = CorpusSpec.from_dict(json.loads(Path(args.spec).read_text(encoding="utf-8")))
        except (OSError, ValueError) as exc:
            raise UsageError(f"argument --spec: {exc}") from None
    report = run_benchmark(spec, seed=args.seed, k=args.eval_k or cfg.k, runs=args.runs)
    if args.out:
        write_report(report, args.out)
    if cfg.output == "machine":
        out.write(machine_line({"type": "report", **report}) + "\n")
    else:
        out.write(format_report(report) + "\n")
    failed = not report["gated_pass"]
    if args.strict:
        failed = failed or any(not c["holds"] for c in report["checks"])
    if failed and not args.no_fail:
        print("ordering check failed", file=sys.stderr)
        return EXIT_NOT_FOUND
    return EXIT_OK


def cmd_config(args, cfg, out, sources=None) -> int:
    d = asdict(cfg)
    _emit(cfg, {"type": "config", "config": d, "sources": sources},
          "\n".join(f"{k} = {v}  ({sources[k]})" for k, v in d.items()), out)
    return EXIT_OK


# parser

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _global_flags() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    p.add_argument("--repo", help="repository directory (env REUSE_REPO)")
    p.add_argument("--k", type=int, help="maximum hits per query")
    p.add_argument("--threshold", type=float, help="acceptance threshold for --auto")
    p.add_argument("--output", choices=("human", "machine"))
    p.add_argument("--machine", dest="output", action="store_const", const="machine",
                   help="shorthand for --output machine")
    p.add_argument("--fusion-constant", dest="fusion_constant", type=int)
    p.add_argument("--step-budget", dest="step_budget", type=int)
    p.add_argument("--config", help="JSON config file (env REUSE_CONFIG)")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _global_flags()
    parser = _Parser(prog="reuserepo", description="Reusable asset repository", parents=[common])
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    def cmd(name, help_):
        return sub.add_parser(name, help=help_, parents=[common])

    cmd("init", "create an empty repository")

    p = cmd("add", "add records from a JSONL file or from flags")
    p.add_argument("--file", help="records.jsonl-format file, '-' for stdin")
    p.add_argument("--id", help="explicit asset id, e.g. Text_6562")
    p.add_argument("--now", type=int, help="creation timestamp to record (for reproducible runs)")
    p.add_argument("--name")
    p.add_argument("--kind", help="Category/Subkind")
    p.add_argument("--language")
    p.add_argument("--label")
    p.add_argument("--keyword", action="append")
    p.add_argument("--executable-name", dest="executable_name")
    p.add_argument("--non-executable-name", dest="non_executable_name")
    p.add_argument("--identity")
    p.add_argument("--package")
    p.add_argument("--class", dest="class_name")
    p.add_argument("--pattern-family", dest="pattern_family")
    p.add_argument("--payload-file", dest="payload_file")
    p.add_argument("--signature", help="e.g. 'Int,Int->Int'")
    p.add_argument("--pre-term", dest="pre_term", action="append")
    p.add_argument("--post-term", dest="post_term", action="append")

    p = cmd("get", "print one record")
    p.add_argument("id")
    p = cmd("rm", "remove one record")
    p.add_argument("id")

    p = cmd("list", "list records")
    p.add_argument("--kind", help="Category or Category/Subkind")
    p.add_argument("--language")

    p = cmd("search", "run one retrieval method, or the fused pipeline with --auto")
    p.add_argument("--method", choices=METHODS)
    p.add_argument("--auto", metavar="TEXT")
    p.add_argument("--text")
    p.add_argument("--keyword", action="append")
    p.add_argument("--facet", action="append")
    p.add_argument("--name")
    p.add_argument("--sample", action="append", help="'args=>expected', e.g. '2,3=>5'")
    p.add_argument("--signature")
    p.add_argument("--spec-term", dest="spec_term", action="append")
    p.add_argument("--package")
    p.add_argument("--class", dest="class_name")
    p.add_argument("--pattern-family", dest="pattern_family")
    p.add_argument("--shape-file", dest="shape_file")

    p = cmd("instantiate", "fill a pattern's holes")
    p.add_argument("id")
    p.add_argument("--bind", action="append", help="hole=expr")

    p = cmd("eval", "benchmark every method on generated corpora")
    p.add_argument("--spec", help="JSON corpus spec")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--eval-k", dest="eval_k", type=int, help="k for evaluation (defaults to --k)")
    p.add_argument("--runs", type=int, default=5)
    p.add_argument("--out", help="write the JSON report here")
    p.add_argument("--no-fail", dest="no_fail", action="store_true",
                   help="exit 0 even when an ordering check fails")
    p.add_argument("--strict", action="store_true",
                   help="also fail on diagnostic (ungated) ordering checks")

    cmd("config", "print the effective configuration")
    return parser


COMMANDS = {
    "init": cmd_init, "add": cmd_add, "get": cmd_get, "rm": cmd_rm, "list": cmd_list,
    "search": cmd_search, "instantiate": cmd_instantiate, "eval": cmd_eval,
}


def run(argv: Sequence[str] | None = None, out=None, err=None, env: dict | None = None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if not args.command:
            raise UsageError("a subcommand is required")
        cfg, sources = resolve_config(args, env)
        if args.command == "config":
            return cmd_config(args, cfg, out, sources)
        return COMMANDS[args.command](args, cfg, out)
    except UsageError as exc:
        print(f"reuserepo: error: {exc}", file=err)
        return EXIT_USAGE
    except IncompleteBindings as exc:
        print(f"reuserepo: error: argument --bind: {exc}", file=err)
        return EXIT_USAGE
    except NotFound as exc:
        print(f"reuserepo: {exc}", file=err)
        return EXIT_STORE if "no repository" in str(exc) else EXIT_NOT_FOUND
    except ValidationFailed as exc:
        print(f"reuserepo: error: validation failed: {exc}", file=err)
        return EXIT_USAGE
    except (CorruptStore, Busy) as exc:
        print(f"reuserepo: store error: {exc}", file=err)
        return EXIT_STORE
    except Conflict as exc:
        print(f"reuserepo: error: argument --id: {exc}", file=err)
        return EXIT_USAGE
    except ReuseError as exc:
        print(f"reuserepo: error: {exc.code}: {exc}", file=err)
        return EXIT_USAGE
    except OSError as exc:
        print(f"reuserepo: store error: {exc}", file=err)
        return EXIT_STORE


def main() -> None:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    sys.exit(run())


if __name__ == "__main__":
    main()
