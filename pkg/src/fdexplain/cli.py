"""Command line entry points: solve, explain, diagnose, serve."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Sequence, TextIO

from . import diagnosis as dx
from . import lang
from .engine import Closure, chaotic_iteration, compile_program, explanation_for
from .indexicals import render_operator
from .model import Csp, ValuePair

EXIT_OK = 0
EXIT_NO_SYMPTOM = 1
EXIT_ERROR = 2


def _err(message: str) -> None:
    print(message, file=sys.stderr)


def _load_model(path: str) -> tuple[str, Csp]:
    text = Path(path).read_text(encoding="utf-8")
    try:
        return text, lang.parse_model(text)
    except lang.ParseError as exc:
        raise ValueError(f"{path}:{exc}") from None


def _fail(message: str) -> int:
    _err(message)
    return EXIT_ERROR


def _parse_pair(text: str, csp: Csp) -> ValuePair:
    name, sep, value = text.partition("=")
    if not sep:
        raise ValueError(f"expected VAR=value, got {text!r}")
    return csp.space.pair(name.strip(), int(value.strip()))


def _closure(csp: Csp, seed: int | None) -> Closure:
    return chaotic_iteration(compile_program(csp), seed=seed)


def cmd_solve(args: argparse.Namespace) -> int:
    try:
        _, csp = _load_model(args.model)
    except (OSError, ValueError) as exc:
        return _fail(str(exc))
    cl = _closure(csp, args.seed)
    if args.trace:
        for i, step in enumerate(cl.steps, start=1):
            op = cl.program.operators[step.op_id]
            removed = ", ".join(csp.space.render_pair(p) for p in step.removed)
            print(f"step {i}: {render_operator(op, csp.space)} removed {removed}")
    print(lang.render_closure(cl.final_env), end="")
    return EXIT_OK


def cmd_explain(args: argparse.Namespace) -> int:
    try:
        text, csp = _load_model(args.model)
        pair = _parse_pair(args.value, csp)
    except (OSError, ValueError) as exc:
        return _fail(str(exc))
    cl = _closure(csp, args.seed)
    tree = explanation_for(cl, pair)
    if tree is None:
        print(f"kept: {csp.space.render_pair(pair)} is in the closure")
        return EXIT_OK
    doc = lang.export_explanation(
        tree, csp.space, model_hash_value=lang.model_hash(text), schedule_seed=args.seed
    )
    print(doc.to_json(), end="")
    return EXIT_OK


def _read_script(path: str) -> list[dx.Answer]:
    raw = sys.stdin.read() if path == "-" else Path(path).read_text(encoding="utf-8")
    answers = []
    for lineno, line in enumerate(raw.splitlines(), start=1):
        word = line.split("#", 1)[0].strip()
        if not word:
            continue
        try:
            answers.append(dx.Answer.parse(word))
        except ValueError as exc:
            raise ValueError(f"script line {lineno}: {exc}") from None
    return answers


_PROMPT_ANSWERS = {
    "y": dx.Answer.YES,
    "yes": dx.Answer.YES,
    "n": dx.Answer.NO,
    "no": dx.Answer.NO,
    "u": dx.Answer.UNKNOWN,
    "unknown": dx.Answer.UNKNOWN,
}


def _ask_interactively(sentence: str, out: TextIO) -> dx.Answer:
    while True:
        out.write(f"{sentence} [yes/no/unknown] ")
        out.flush()
        line = input()
        answer = _PROMPT_ANSWERS.get(line.strip().lower())
        if answer is not None:
            return answer
        out.write("please answer yes, no, or unknown\n")


def cmd_diagnose(args: argparse.Namespace) -> int:
    try:
        _, csp = _load_model(args.model)
        expected = lang.parse_expected(
            Path(args.expected).read_text(encoding="utf-8"), csp.space
        )
    except (OSError, ValueError) as exc:
        return _fail(str(exc))

    cl = _closure(csp, args.seed)
    symptoms = dx.find_symptoms(cl, expected)
    if not symptoms:
        print("no symptom: every expected pair is in the closure")
        return EXIT_NO_SYMPTOM

    try:
        if args.symptom:
            symptom = _parse_pair(args.symptom, csp)
            if symptom not in symptoms:
                return _fail(f"{args.symptom} is not a symptom of this model")
        else:
            symptom = symptoms[0]
        script = _read_script(args.script) if args.script else None
    except (OSError, ValueError) as exc:
        return _fail(str(exc))

    tree = explanation_for(cl, symptom)
    assert tree is not None
    strategy = dx.Strategy(args.strategy)
    session = dx.new_session(tree, strategy, expected=expected)
    print(f"symptom: {csp.space.render_pair(symptom)}")

    number = 0
    while not session.done:
        pair = session.next_question()
        assert isinstance(pair, ValuePair)
        sentence = lang.render_question(pair, csp.space)
        number += 1
        if script is not None:
            if number > len(script):
                return _fail(f"script exhausted after {len(script)} answers")
            answer = script[number - 1]
            print(f"question {number}: {sentence} -> {answer.value}")
        else:
            answer = _ask_interactively(sentence, sys.stdout)
            print(f"question {number}: {sentence} -> {answer.value}")
        session.answer(pair, answer)

    payload = lang.diagnosis_payload(
        session.result(),
        csp.space,
        lang.operator_text_index(cl.program.operators, csp.space),
    )
    if payload["definite"]:
        print(f"minimal symptom: ({payload['minimal_symptom']['var']},{payload['minimal_symptom']['value']})")
        print(f"erroneous rule: {payload['rule']['text']}")
        print(f"operator: {payload['operator']}")
        print(f"constraint: {payload['constraint']}")
    else:
        print("no definite culprit; candidates:")
        for cand in payload["candidates"]:
            print(f"  {cand['rule']['text']} via {cand['constraint']}")
    return EXIT_OK


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .server import create_app

    uvicorn.run(create_app(), host=args.host, port=args.port, log_level="warning")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fdexplain",
        description="Finite-domain propagation with proof trees for every removal",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="propagate a model and print its closure")
    solve.add_argument("model")
    solve.add_argument("--trace", action="store_true", help="print the removal log")
    solve.add_argument("--seed", type=int, default=None, help="shuffle the schedule")
    solve.set_defaults(func=cmd_solve)

    explain = sub.add_parser("explain", help="print the proof tree for a removed value")
    explain.add_argument("model")
    explain.add_argument("--value", required=True, metavar="VAR=V")
    explain.add_argument("--seed", type=int, default=None)
    explain.set_defaults(func=cmd_explain)

    diagnose = sub.add_parser("diagnose", help="locate a faulty constraint interactively")
    diagnose.add_argument("model")
    diagnose.add_argument("expected", help="expected-values file")
    diagnose.add_argument("script", nargs="?", default=None,
                          help="answers file (yes/no/unknown per line, '-' for stdin)")
    diagnose.add_argument("--strategy", choices=[s.value for s in dx.Strategy],
                          default=dx.Strategy.DIVIDE_AND_CONQUER.value)
    diagnose.add_argument("--symptom", metavar="VAR=V", default=None,
                          help="which symptom to explain (default: first)")
    diagnose.add_argument("--seed", type=int, default=None)
    diagnose.set_defaults(func=cmd_diagnose)

    serve = sub.add_parser("serve", help="run the local HTTP API")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8755)
    serve.set_defaults(func=cmd_serve)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SystemExit as exc:
        code = exc.code
        return code if isinstance(code, int) else EXIT_ERROR


if __name__ == "__main__":
    raise SystemExit(main())
