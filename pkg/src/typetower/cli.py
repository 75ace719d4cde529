"""Command line entry point: ``typetower <command> ...``.

Exit codes: 0 accept/subtype/agree, 1 reject, 2 unknown (fuel ran out),
3 bad input, 4 internal invariant failure.
"""

from __future__ import annotations

import argparse
import enum
import hashlib
import itertools
import sys
from dataclasses import dataclass
from functools import cached_property, lru_cache
from pathlib import Path
from typing import Sequence

from . import fastsub
from .classtable import (
    ClassTableError, SubtypeQuery, parse_class_table, parse_query, serialize_class_table, validate,
)
from .grammar import (
    Grammar, GrammarError, cyk_simper_source, grammar_size, parse_grammar, preprocess, reference_cyk,
)
from .reduction import (
    Simulated, UnrecognizedConfig, emit_builder, emit_java, emit_java_interfaces, etm_to_classtable,
    expected_rule_count, initial_query, classify_config, java_method_name, java_tower,
)
from .simper import Outcome as SimperOutcome
from .simper import Program, SimperSyntaxError, SimperTypeError, interpret, parse_simper
from .simper2tm import CompileError, CompiledProgram, TRAP, compile_program
from .subtyper import MachineConfig, Outcome, Verdict as SubVerdict, decide_subtype, format_trace, run
from .turing import REJECT, TmFormatError, parse_tm, serialize_tm, tm_run

EXIT_ACCEPT, EXIT_REJECT, EXIT_UNKNOWN, EXIT_INPUT, EXIT_INTERNAL = range(5)

DEFAULT_FUEL = {"simper": 10**6, "tm": 10**7, "subtype": 10**8}
LAYERS = ("oracle", "simper", "tm", "subtype")
CHUNK = 2_000_000


class InputError(Exception):
    pass


class InternalError(Exception):
    pass


class Verdict(enum.Enum):
    ACCEPT = "ACCEPT"
    REJECT = "REJECT"
    UNKNOWN = "UNKNOWN"


@dataclass
class LayerResult:
    verdict: Verdict
    steps: int = 0
    note: str = ""


def parse_word(text: str, symbols: Sequence[str] | None = None) -> list[str]:
    """Comma-separated symbols; a comma-free string of known one-character symbols is split per character."""
    text = text.strip()
    if text in ("", "-", "ε"):
        return []
    parts = [p.strip() for p in text.split(",")]
    if any(not p for p in parts):
        raise InputError(f"empty symbol in {text!r}")
    if symbols is not None and len(parts) == 1 and parts[0] not in symbols and all(c in symbols for c in parts[0]):
        parts = list(parts[0])
    if symbols is not None:
        bad = [p for p in parts if p not in symbols]
        if bad:
            raise InputError(f"symbols {bad} are not in the alphabet {list(symbols)}")
    return parts


# ---------------------------------------------------------------- pipeline


@dataclass
class Pipeline:
    """Everything derived from a grammar (and optionally a hand-written Simper parser)."""

    grammar: Grammar
    simper_text: str | None = None

    @cached_property
    def preprocessed(self):
        return preprocess(self.grammar)

    @cached_property
    def source(self) -> str:
        return self.simper_text if self.simper_text is not None else cyk_simper_source(self.preprocessed)

    @cached_property
    def program(self) -> Program:
        return parse_simper(self.source)

    @cached_property
    def compiled(self) -> CompiledProgram:
        return compile_program(self.program, self.grammar.terminals)

    @cached_property
    def reduction(self):
        return etm_to_classtable(self.compiled.machine)


@lru_cache(maxsize=8)
def pipeline_for(grammar_text: str, simper_text: str | None) -> Pipeline:
    return Pipeline(parse_grammar(grammar_text), simper_text)


def layer_oracle(p: Pipeline, word: list[str]) -> LayerResult:
    return LayerResult(Verdict.ACCEPT if reference_cyk(p.grammar, word) else Verdict.REJECT)


def layer_simper(p: Pipeline, word: list[str], fuel: int) -> LayerResult:
    r = interpret(p.program, word, fuel)
    if r.outcome is SimperOutcome.HALTED:
        return LayerResult(Verdict.ACCEPT, r.steps)
    if r.outcome is SimperOutcome.OUT_OF_FUEL:
        return LayerResult(Verdict.UNKNOWN, r.steps, "fuel")
    return LayerResult(Verdict.REJECT, r.steps, r.outcome.value)


def layer_tm(p: Pipeline, word: list[str], fuel: int) -> LayerResult:
    cp = p.compiled
    r = tm_run(cp.machine, cp.encode_input(word), fuel, stop=(REJECT, TRAP))
    state = r.final.state
    if state == TRAP:
        raise InternalError("compiled machine reached its trap state")
    if r.halted:
        return LayerResult(Verdict.ACCEPT, r.steps)
    if state == REJECT:
        return LayerResult(Verdict.REJECT, r.steps, "reject spin")
    return LayerResult(Verdict.UNKNOWN, r.steps, "fuel")


def layer_subtype(p: Pipeline, word: list[str], fuel: int) -> LayerResult:
    """Run the subtyping machine on the reduction query in chunks.

    Between chunks the configuration is decoded back into a machine
    configuration; once the simulated machine is in its reject spin it can
    never halt, so the query is reported as rejected.
    """
    cp = p.compiled
    ct, nm = p.reduction
    q = initial_query(cp.machine, nm, cp.encode_input(word))
    cfg = MachineConfig(q.subtype, q.supertype)
    total = 0
    engine = fastsub.engine_for(ct) if fastsub.available() else None
    while True:
        budget = min(CHUNK, fuel - total)
        if engine is not None:
            r = engine.run(cfg, budget)
        else:
            r = run(ct, SubtypeQuery(cfg.lhs, cfg.rhs), budget, fast=False)
        total += r.steps_taken
        cfg = r.final
        if r.outcome is Outcome.ACCEPT:
            return LayerResult(Verdict.ACCEPT, total)
        if r.outcome is Outcome.STUCK:
            return LayerResult(Verdict.REJECT, total, "stuck")
        if r.outcome is Outcome.AMBIGUOUS:
            raise InternalError("generated class table is ambiguous")
        try:
            view = classify_config(nm, cfg)
        except UnrecognizedConfig as e:
            raise InternalError(f"unrecognized subtyping configuration: {e}") from None
        if isinstance(view, Simulated):
            if view.tm_config.state == REJECT:
                return LayerResult(Verdict.REJECT, total, "reject spin")
            if view.tm_config.state == TRAP:
                raise InternalError("simulated machine reached its trap state")
        if total >= fuel:
            return LayerResult(Verdict.UNKNOWN, total, "fuel")


def fluent_check(
    p: Pipeline, word: list[str], layers: Sequence[str], fuels: dict[str, int] | None = None
) -> dict[str, LayerResult]:
    fuels = {**DEFAULT_FUEL, **(fuels or {})}
    out = {}
    for layer in layers:
        if layer == "oracle":
            out[layer] = layer_oracle(p, word)
        elif layer == "simper":
            out[layer] = layer_simper(p, word, fuels["simper"])
        elif layer == "tm":
            out[layer] = layer_tm(p, word, fuels["tm"])
        elif layer == "subtype":
            out[layer] = layer_subtype(p, word, fuels["subtype"])
        else:
            raise InputError(f"unknown layer {layer}")
    return out


def agreement(results: dict[str, LayerResult]) -> Verdict | None:
    """The common verdict of the completed layers, or None if two of them disagree."""
    done = {r.verdict for r in results.values() if r.verdict is not Verdict.UNKNOWN}
    if len(done) > 1:
        return None
    return done.pop() if done else Verdict.UNKNOWN


# ---------------------------------------------------------------- artifacts


def _write(out: Path, name: str, text: str, manifest: dict) -> None:
    data = text.encode("utf-8")
    (out / name).write_bytes(data)
    manifest[f"file.{name}.bytes"] = len(data)
    manifest[f"file.{name}.sha256"] = hashlib.sha256(data).hexdigest()


def build_artifacts(p: Pipeline, grammar_text: str, out: Path) -> dict:
    out.mkdir(parents=True, exist_ok=True)
    cp = p.compiled
    m = cp.machine
    ct, nm = p.reduction
    manifest: dict = {}
    names = {cp.input_letters[t]: t for t in p.grammar.terminals}
    letters = [cp.input_letters[t] for t in p.grammar.terminals]
    java = emit_java_interfaces(ct, nm) + "\n" + emit_builder(nm, letters, names)
    _write(out, "grammar.txt", grammar_text, manifest)
    _write(out, "parser.simper", p.source, manifest)
    _write(out, "parser.tm", serialize_tm(m), manifest)
    _write(out, "classes.ct", serialize_class_table(ct), manifest)
    _write(out, "Fluent.java", java, manifest)
    _write(out, "README.md", _usage_snippet(p, nm), manifest)
    manifest.update(
        {
            "grammar.size": grammar_size(p.grammar),
            "tm.states": len(m.states),
            "tm.letters": len(m.alphabet),
            "tm.transitions": len(m.delta),
            "tm.zones": len(cp.layout),
            "ct.rules": len(ct.rules),
            "ct.rules_expected": expected_rule_count(m),
            "ct.classes": len(ct.classes),
            "java.interfaces": java.count("\ninterface ") + java.startswith("interface "),
        }
    )
    text = "".join(f"{k}={manifest[k]}\n" for k in sorted(manifest))
    (out / "manifest.txt").write_text(text, encoding="utf-8")
    return manifest


def _sample_word(g: Grammar, max_len: int = 4) -> list[str] | None:
    for n in range(max_len + 1):
        for w in itertools.product(g.terminals, repeat=n):
            if reference_cyk(g, w):
                return list(w)
    return None


def _usage_snippet(p: Pipeline, nm) -> str:
    word = _sample_word(p.grammar)
    note = "a word of the language"
    if word is None:
        word, note = p.grammar.terminals[:1], "not in the language: expect a type error"
    calls = "".join(f".{java_method_name(t)}()" for t in word)
    return (
        "# Generated fluent API\n\n"
        "`Fluent.java` declares the interfaces of the generated class table and a\n"
        "builder `B`. A chain type checks exactly when its word is in the language:\n\n"
        "```java\n"
        f"{java_tower(['E', 'E'])} t = B.start{calls}.stop();  // {note}\n"
        "```\n\n"
        "Compile with any Java compiler, e.g. `javac -J-Xss64m Fluent.java Use.java`.\n"
    )


# ---------------------------------------------------------------- commands


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise InputError(f"{path}: {e.strerror}") from None


def cmd_check_subtype(args) -> int:
    ct = parse_class_table(_read(args.table))
    rep = validate(ct)
    if not rep.ok:
        for _, msg in rep.diagnostics:
            print(f"invalid table: {msg}", file=sys.stderr)
        return EXIT_INPUT
    qtext = args.query if args.query_file is None else _read(args.query_file)
    if qtext is None:
        raise InputError("give a query or --query-file")
    q = parse_query(qtext)
    if args.trace:
        r = run(ct, q, args.fuel, want_trace=True)
        sys.stdout.write(format_trace(r.trace))
    verdict = decide_subtype(ct, q.subtype, q.supertype, args.fuel)
    print(verdict.value)
    return {SubVerdict.SUBTYPE: EXIT_ACCEPT, SubVerdict.NOT_SUBTYPE: EXIT_REJECT}.get(verdict, EXIT_UNKNOWN)


def cmd_run_tm(args) -> int:
    m = parse_tm(_read(args.tm))
    word = parse_word(args.input, m.alphabet)
    r = tm_run(m, word, args.fuel, stop=(REJECT,))
    print(f"steps={r.steps}")
    print(r.final)
    if r.halted:
        return EXIT_ACCEPT
    return EXIT_REJECT if r.final.state == REJECT else EXIT_UNKNOWN


def cmd_simper_run(args) -> int:
    p = parse_simper(_read(args.source))
    from .simper import check

    check(p)
    r = interpret(p, parse_word(args.input), args.fuel)
    print(f"{r.outcome.value} steps={r.steps}")
    if r.message:
        print(r.message)
    if r.outcome is SimperOutcome.HALTED:
        return EXIT_ACCEPT
    return EXIT_UNKNOWN if r.outcome is SimperOutcome.OUT_OF_FUEL else EXIT_REJECT


def cmd_simper_to_tm(args) -> int:
    p = parse_simper(_read(args.source))
    symbols = parse_word(args.symbols) if args.symbols else ()
    cp = compile_program(p, symbols)
    Path(args.out).write_text(serialize_tm(cp.machine), encoding="utf-8")
    m = cp.machine
    print(f"states={len(m.states)} letters={len(m.alphabet)} zones={' '.join(cp.layout)}")
    return EXIT_ACCEPT


def cmd_tm_to_java(args) -> int:
    m = parse_tm(_read(args.tm))
    ct, nm = etm_to_classtable(m)
    word = parse_word(args.input, m.alphabet) if args.input is not None else []
    q = initial_query(m, nm, word)
    Path(args.out).write_text(emit_java(ct, nm, q, list(m.alphabet)), encoding="utf-8")
    print(f"rules={len(ct.rules)}")
    return EXIT_ACCEPT


def cmd_grammar_to_simper(args) -> int:
    g = parse_grammar(_read(args.grammar))
    text = cyk_simper_source(preprocess(g))
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_ACCEPT


def cmd_grammar_to_java(args) -> int:
    gtext = _read(args.grammar)
    simper = _read(args.simper) if args.simper else None
    p = Pipeline(parse_grammar(gtext), simper)
    manifest = build_artifacts(p, gtext, Path(args.out))
    if manifest["ct.rules"] != manifest["ct.rules_expected"]:
        raise InternalError("rule count differs from the closed form")
    print(f"wrote {args.out}: {manifest['ct.rules']} rules, {manifest['tm.states']} states")
    return EXIT_ACCEPT


def cmd_fluent_check(args) -> int:
    gtext = _read(args.grammar)
    simper = _read(args.simper) if args.simper else None
    p = pipeline_for(gtext, simper)
    word = parse_word(args.word, p.grammar.terminals)
    layers = LAYERS if args.layer == "all" else tuple(x.strip() for x in args.layer.split(","))
    bad = [x for x in layers if x not in LAYERS]
    if bad:
        raise InputError(f"unknown layers {bad}; choose from {', '.join(LAYERS)} or all")
    fuels = {k: v for k, v in (("simper", args.fuel_simper), ("tm", args.fuel_tm), ("subtype", args.fuel_subtype)) if v}
    results = fluent_check(p, word, layers, fuels)
    for layer, r in results.items():
        note = f" ({r.note})" if r.note else ""
        print(f"{layer:8} {r.verdict.value:8} steps={r.steps}{note}")
    verdict = agreement(results)
    if verdict is None:
        print("DISAGREEMENT")
        return EXIT_INTERNAL
    return {Verdict.ACCEPT: EXIT_ACCEPT, Verdict.REJECT: EXIT_REJECT}.get(verdict, EXIT_UNKNOWN)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="typetower", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    c = sub.add_parser("check-subtype", help="decide a subtype query against a class table")
    c.add_argument("table")
    c.add_argument("query", nargs="?", help="'SUB <: SUPER', towers ending in Z")
    c.add_argument("--query-file")
    c.add_argument("--fuel", type=int, default=DEFAULT_FUEL["subtype"])
    c.add_argument("--trace", action="store_true")
    c.set_defaults(func=cmd_check_subtype)

    c = sub.add_parser("run-tm", help="run a Turing machine file")
    c.add_argument("tm")
    c.add_argument("input", help="comma-separated letters")
    c.add_argument("--fuel", type=int, default=DEFAULT_FUEL["tm"])
    c.set_defaults(func=cmd_run_tm)

    c = sub.add_parser("simper-run", help="interpret a Simper program")
    c.add_argument("source")
    c.add_argument("input", help="comma-separated symbols")
    c.add_argument("--fuel", type=int, default=DEFAULT_FUEL["simper"])
    c.set_defaults(func=cmd_simper_run)

    c = sub.add_parser("simper-to-tm", help="compile a Simper program into a Turing machine")
    c.add_argument("source")
    c.add_argument("-o", "--out", required=True)
    c.add_argument("--symbols", help="input symbols, comma-separated (default: the program's literals)")
    c.set_defaults(func=cmd_simper_to_tm)

    c = sub.add_parser("tm-to-java", help="reduce a Turing machine to Java interfaces")
    c.add_argument("tm")
    c.add_argument("-o", "--out", required=True)
    c.add_argument("--input", help="word for the query harness")
    c.set_defaults(func=cmd_tm_to_java)

    c = sub.add_parser("grammar-to-simper", help="generate the CYK parser for a grammar")
    c.add_argument("grammar")
    c.add_argument("-o", "--out")
    c.set_defaults(func=cmd_grammar_to_simper)

    c = sub.add_parser("grammar-to-java", help="generate the whole fluent API for a grammar")
    c.add_argument("grammar")
    c.add_argument("-o", "--out", required=True, help="output directory")
    c.add_argument("--simper", help="use this Simper parser instead of the generated CYK parser")
    c.set_defaults(func=cmd_grammar_to_java)

    c = sub.add_parser("fluent-check", help="decide membership of a word at one or all layers")
    c.add_argument("grammar")
    c.add_argument("word", help="comma-separated terminals ('' or - for the empty word)")
    c.add_argument("--layer", default="all", help="all, or a comma-separated subset of " + ",".join(LAYERS))
    c.add_argument("--simper", help="Simper parser for the simper/tm/subtype layers")
    c.add_argument("--fuel-simper", type=int)
    c.add_argument("--fuel-tm", type=int)
    c.add_argument("--fuel-subtype", type=int)
    c.set_defaults(func=cmd_fluent_check)
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (InputError, ClassTableError, TmFormatError, GrammarError, SimperSyntaxError, SimperTypeError,
            CompileError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except (InternalError, AssertionError) as e:
        print(f"internal error: {e}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
