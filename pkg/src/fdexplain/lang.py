"""Textual model format, expected-value lists, and JSON document schemas.

The model grammar is deliberately small: range declarations, comparison and
disequality statements (optionally with a constant offset), an equality that
desugars into the two bounding comparisons, and binary tables.  `#` starts a
comment; statements end with `;`.

One JSON schema serves files on disk, the CLI, and the HTTP API.
"""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass
from typing import Any, Iterable, Mapping

from .diagnosis import Diagnosis, DiagnosisSession, Finding
from .engine import ExplanationTree
from .indexicals import DeductionRule, render_operator
from .model import Constraint, Csp, Environment, Relation, Space, ValuePair

MODEL_SUFFIX = ".fd"
EXPECTED_SUFFIX = ".expect"
EXPLANATION_SUFFIX = ".expl"

_KEYWORDS = {"var", "in", "table"}

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<comment>\#[^\n]*)
  | (?P<nl>\n)
  | (?P<int>\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>\.\.|>=|<=|!=|[><=;,(){}:+-])
    """,
    re.VERBOSE,
)


class ParseError(ValueError):
    def __init__(self, message: str, line: int, col: int) -> None:
        super().__init__(f"{line}:{col}: {message}")
        self.message = message
        self.line = line
        self.col = col


@dataclass(frozen=True)
class _Token:
    kind: str
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    line, col, pos = 1, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        assert kind is not None
        value = m.group()
        if kind == "nl":
            line += 1
            col = 1
        else:
            if kind == "ident" and value in _KEYWORDS:
                kind = value
            if kind not in ("ws", "comment"):
                tokens.append(_Token(kind, value, line, col))
            col += len(value)
        pos = m.end()
    tokens.append(_Token("eof", "", line, col))
    return tokens


class _Parser:
    def __init__(self, text: str) -> None:
        self.tokens = _tokenize(text)
        self.pos = 0
        self.decls: list[tuple[str, tuple[int, ...]]] = []
        self.var_ids: dict[str, int] = {}
        self.constraints: list[Constraint] = []

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def next(self) -> _Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def fail(self, message: str, tok: _Token | None = None) -> ParseError:
        tok = tok or self.peek()
        return ParseError(message, tok.line, tok.col)

    def expect(self, kind: str, what: str) -> _Token:
        tok = self.next()
        if tok.kind != kind:
            raise ParseError(
                f"expected {what}, got {tok.text or 'end of input'!r}", tok.line, tok.col
            )
        return tok

    def expect_op(self, text: str) -> _Token:
        tok = self.next()
        if tok.kind != "op" or tok.text != text:
            raise ParseError(
                f"expected {text!r}, got {tok.text or 'end of input'!r}", tok.line, tok.col
            )
        return tok

    def parse_int(self) -> int:
        sign = 1
        tok = self.peek()
        if tok.kind == "op" and tok.text == "-":
            self.next()
            sign = -1
            tok = self.peek()
        if tok.kind != "int":
            raise self.fail(f"expected an integer, got {tok.text or 'end of input'!r}")
        self.next()
        return sign * int(tok.text)

    def var_ref(self) -> tuple[int, _Token]:
        tok = self.expect("ident", "a variable name")
        if tok.text not in self.var_ids:
            raise ParseError(f"undeclared variable {tok.text!r}", tok.line, tok.col)
        return self.var_ids[tok.text], tok

    def parse(self) -> Csp:
        while self.peek().kind != "eof":
            tok = self.peek()
            if tok.kind == "var":
                self.declaration()
            elif tok.kind == "table":
                self.table_constraint()
            elif tok.kind == "ident":
                self.relation_constraint()
            else:
                raise self.fail(f"expected a statement, got {tok.text!r}")
        try:
            space = Space(self.decls)
        except ValueError as exc:
            raise ParseError(str(exc), self.peek().line, self.peek().col) from exc
        return Csp(space=space, constraints=tuple(self.constraints))

    def declaration(self) -> None:
        self.expect("var", "'var'")
        name_tok = self.expect("ident", "a variable name")
        name = name_tok.text
        if name in self.var_ids:
            raise ParseError(f"variable {name!r} declared twice", name_tok.line, name_tok.col)
        self.expect("in", "'in'")
        tok = self.peek()
        if tok.kind == "op" and tok.text == "{":
            self.next()
            values: list[int] = []
            if not (self.peek().kind == "op" and self.peek().text == "}"):
                values.append(self.parse_int())
                while self.peek().kind == "op" and self.peek().text == ",":
                    self.next()
                    values.append(self.parse_int())
            self.expect_op("}")
            if not values:
                raise ParseError(f"variable {name!r} has an empty domain", tok.line, tok.col)
            domain = tuple(sorted(set(values)))
        else:
            lo = self.parse_int()
            self.expect_op("..")
            hi = self.parse_int()
            if lo > hi:
                raise ParseError(
                    f"variable {name!r} has an empty domain ({lo}..{hi})", tok.line, tok.col
                )
            domain = tuple(range(lo, hi + 1))
        self.expect_op(";")
        self.var_ids[name] = len(self.decls)
        self.decls.append((name, domain))

    def relation_constraint(self) -> None:
        x, x_tok = self.var_ref()
        op_tok = self.next()
        if op_tok.kind != "op" or op_tok.text not in (">", "<", ">=", "<=", "=", "!="):
            raise ParseError(
                f"expected a relation, got {op_tok.text or 'end of input'!r}",
                op_tok.line,
                op_tok.col,
            )
        rel_text = op_tok.text
        rhs = self.peek()
        if rhs.kind in ("int",) or (rhs.kind == "op" and rhs.text == "-"):
            if rel_text != "!=":
                raise ParseError(
                    f"only != compares a variable with a constant", rhs.line, rhs.col
                )
            k = self.parse_int()
            self.expect_op(";")
            label = f"{x_tok.text}!={k}"
            self.constraints.append(
                Constraint(label=label, relation=Relation.NEQ_CONST, scope=(x,), k=k)
            )
            return
        y, y_tok = self.var_ref()
        if y == x:
            raise ParseError(
                f"constraint relates {x_tok.text!r} to itself", y_tok.line, y_tok.col
            )
        k = 0
        tok = self.peek()
        if tok.kind == "op" and tok.text in ("+", "-"):
            self.next()
            k = self.parse_int()
            if tok.text == "-":
                k = -k
        self.expect_op(";")
        label = f"{x_tok.text}{rel_text}{y_tok.text}" + _offset_suffix(k)
        if rel_text == "=":
            self.constraints.append(
                Constraint(label=label, relation=Relation.GE, scope=(x, y), k=k)
            )
            self.constraints.append(
                Constraint(label=label, relation=Relation.LE, scope=(x, y), k=k)
            )
            return
        relation = {
            ">": Relation.GT,
            "<": Relation.LT,
            ">=": Relation.GE,
            "<=": Relation.LE,
            "!=": Relation.NEQ,
        }[rel_text]
        self.constraints.append(
            Constraint(label=label, relation=relation, scope=(x, y), k=k)
        )

    def table_constraint(self) -> None:
        self.expect("table", "'table'")
        self.expect_op("(")
        x, x_tok = self.var_ref()
        self.expect_op(",")
        y, y_tok = self.var_ref()
        if y == x:
            raise ParseError(
                f"table relates {x_tok.text!r} to itself", y_tok.line, y_tok.col
            )
        self.expect_op(")")
        self.expect_op("{")
        rows: list[tuple[int, int]] = []
        while not (self.peek().kind == "op" and self.peek().text == "}"):
            if rows:
                self.expect_op(",")
            self.expect_op("(")
            a = self.parse_int()
            self.expect_op(",")
            b = self.parse_int()
            self.expect_op(")")
            rows.append((a, b))
        self.expect_op("}")
        self.expect_op(";")
        label = f"table({x_tok.text},{y_tok.text})"
        self.constraints.append(
            Constraint(
                label=label,
                relation=Relation.TABLE,
                scope=(x, y),
                table=frozenset(rows),
            )
        )


def _offset_suffix(k: int) -> str:
    if k > 0:
        return f"+{k}"
    if k < 0:
        return str(k)
    return ""


def parse_model(text: str) -> Csp:
    """Parse model text into a CSP; raises ParseError with line and column."""
    return _Parser(text).parse()


def constraint_text(c: Constraint, space: Space) -> str:
    """Canonical statement text for a constraint; tables list their rows."""
    if c.relation is Relation.NEQ_CONST:
        return f"{space.name(c.scope[0])}!={c.k}"
    if c.relation is Relation.TABLE:
        assert c.table is not None
        rows = ",".join(f"({a},{b})" for a, b in sorted(c.table))
        names = ",".join(space.name(v) for v in c.scope)
        return f"table({names}){{{rows}}}"
    x, y = (space.name(v) for v in c.scope)
    return f"{x}{c.relation.value}{y}" + _offset_suffix(c.k)


def constraint_label(c: Constraint, space: Space) -> str:
    """The short label the parser assigns; rows are left off table labels."""
    if c.relation is Relation.TABLE:
        names = ",".join(space.name(v) for v in c.scope)
        return f"table({names})"
    return constraint_text(c, space)


def render_model(csp: Csp) -> str:
    """Model text that reparses to an equal CSP."""
    lines = []
    for var in csp.space.variables:
        vals = var.values
        if vals == tuple(range(vals[0], vals[-1] + 1)):
            lines.append(f"var {var.name} in {vals[0]}..{vals[-1]};")
        else:
            lines.append(f"var {var.name} in {{{', '.join(map(str, vals))}}};")
    for c in csp.constraints:
        lines.append(constraint_text(c, csp.space) + ";")
    return "\n".join(lines) + "\n"


def parse_expected(text: str, space: Space) -> Environment:
    """Expected values, one `NAME: v v` line per variable.

    Variables without a line keep their whole initial domain; a line with no
    values expects nothing for that variable.
    """
    masks = [None] * space.nvars  # type: list[int | None]
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if ":" not in line:
            raise ParseError("expected 'NAME: value value ...'", lineno, 1)
        name, _, rest = line.partition(":")
        name = name.strip()
        try:
            var = space.var(name)
        except ValueError as exc:
            raise ParseError(str(exc), lineno, 1) from exc
        mask = masks[var.id] or 0
        for word in rest.split():
            try:
                value = int(word)
            except ValueError:
                raise ParseError(f"not an integer: {word!r}", lineno, 1) from None
            try:
                mask |= space.bit(var.id, value)
            except ValueError as exc:
                raise ParseError(str(exc), lineno, 1) from exc
        masks[var.id] = mask
    final = [
        space.full_mask(v) if masks[v] is None else masks[v] or 0
        for v in range(space.nvars)
    ]
    return Environment(space, final)


def render_closure(env: Environment) -> str:
    """One `NAME: v v` line per variable, values ascending."""
    lines = []
    for var in env.space.variables:
        vals = env.values(var.id)
        suffix = " " + " ".join(map(str, vals)) if vals else ""
        lines.append(f"{var.name}:{suffix}")
    return "\n".join(lines) + "\n"


def model_hash(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()[:16]


def render_question(pair: ValuePair, space: Space) -> str:
    return f"Is {space.render_pair(pair)} expected to be kept?"


def rule_text(rule: DeductionRule, space: Space) -> str:
    body = rule.sorted_body()
    rhs = ", ".join(space.render_pair(p) for p in body) if body else "{}"
    return f"{space.render_pair(rule.head)} <- {rhs}"


# -- explanation documents ---------------------------------------------------

DOCUMENT_FORMAT = "explanation.v1"


@dataclass(frozen=True)
class DocNode:
    node_id: int
    var: str
    value: int
    operator_id: int | None
    constraint_label: str
    children: tuple[int, ...]
    truncated: bool = False


@dataclass(frozen=True)
class ExplanationDocument:
    root_id: int
    nodes: tuple[DocNode, ...]
    model_hash: str | None = None
    schedule_seed: int | None = None

    def node(self, node_id: int) -> DocNode:
        return self.nodes[node_id]

    def to_dict(self) -> dict[str, Any]:
        return {
            "format": DOCUMENT_FORMAT,
            "root_id": self.root_id,
            "metadata": {
                "model_hash": self.model_hash,
                "schedule_seed": self.schedule_seed,
            },
            "nodes": [
                {
                    "node_id": n.node_id,
                    "var": n.var,
                    "value": n.value,
                    "operator_id": n.operator_id,
                    "constraint_label": n.constraint_label,
                    "children": list(n.children),
                    "truncated": n.truncated,
                }
                for n in self.nodes
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "ExplanationDocument":
        if data.get("format") != DOCUMENT_FORMAT:
            raise ValueError(f"unsupported document format {data.get('format')!r}")
        meta = data.get("metadata") or {}
        nodes = []
        for raw in data["nodes"]:
            nodes.append(
                DocNode(
                    node_id=int(raw["node_id"]),
                    var=str(raw["var"]),
                    value=int(raw["value"]),
                    operator_id=raw.get("operator_id"),
                    constraint_label=str(raw["constraint_label"]),
                    children=tuple(int(c) for c in raw["children"]),
                    truncated=bool(raw.get("truncated", False)),
                )
            )
        if sorted(n.node_id for n in nodes) != list(range(len(nodes))):
            raise ValueError("node ids must be dense and unique")
        by_id = {n.node_id: n for n in nodes}
        doc = cls(
            root_id=int(data["root_id"]),
            nodes=tuple(by_id[i] for i in range(len(nodes))),
            model_hash=meta.get("model_hash"),
            schedule_seed=meta.get("schedule_seed"),
        )
        doc._validate()
        return doc

    @classmethod
    def from_json(cls, text: str) -> "ExplanationDocument":
        return cls.from_dict(json.loads(text))

    def _validate(self) -> None:
        if not 0 <= self.root_id < len(self.nodes):
            raise ValueError("root id does not resolve")
        state: dict[int, int] = {}  # 1 = on stack, 2 = finished

        def visit(start: int) -> None:
            stack = [(start, 0)]
            state[start] = 1
            while stack:
                nid, child_pos = stack.pop()
                children = self.nodes[nid].children
                if child_pos == len(children):
                    state[nid] = 2
                    continue
                stack.append((nid, child_pos + 1))
                child = children[child_pos]
                if not 0 <= child < len(self.nodes):
                    raise ValueError(f"child id {child} does not resolve")
                mark = state.get(child)
                if mark == 1:
                    raise ValueError("document contains a cycle")
                if mark is None:
                    state[child] = 1
                    stack.append((child, 0))

        for n in self.nodes:
            if state.get(n.node_id) is None:
                visit(n.node_id)


def export_explanation(
    tree: ExplanationTree,
    space: Space,
    model_hash_value: str | None = None,
    schedule_seed: int | None = None,
) -> ExplanationDocument:
    """Flatten a proof tree into a document, node ids in preorder."""
    nodes: list[DocNode] = []
    stack: list[tuple[ExplanationTree, int | None]] = [(tree, None)]
    children_of: list[list[int]] = []
    flat: list[ExplanationTree] = []
    while stack:
        subtree, parent = stack.pop()
        nid = len(flat)
        flat.append(subtree)
        children_of.append([])
        if parent is not None:
            children_of[parent].append(nid)
        for child in reversed(subtree.children):
            stack.append((child, nid))
    for nid, subtree in enumerate(flat):
        nodes.append(
            DocNode(
                node_id=nid,
                var=space.name(subtree.root.var),
                value=subtree.root.value,
                operator_id=subtree.rule.operator_id,
                constraint_label=subtree.rule.constraint_label,
                children=tuple(children_of[nid]),
                truncated=subtree.truncated,
            )
        )
    return ExplanationDocument(
        root_id=0,
        nodes=tuple(nodes),
        model_hash=model_hash_value,
        schedule_seed=schedule_seed,
    )


# -- shared wire payloads -------------------------------------------------------

def pair_payload(pair: ValuePair, space: Space) -> dict[str, Any]:
    return {"var": space.name(pair.var), "value": pair.value}


def finding_payload(f: Finding, space: Space, operator_text: str | None) -> dict[str, Any]:
    return {
        "pair": pair_payload(f.pair, space),
        "rule": {
            "head": pair_payload(f.rule.head, space),
            "body": [pair_payload(p, space) for p in f.rule.sorted_body()],
            "text": rule_text(f.rule, space),
        },
        "operator_id": f.operator_id,
        "operator": operator_text,
        "constraint": f.constraint_label,
    }


def diagnosis_payload(
    diag: Diagnosis, space: Space, operator_text: Mapping[int, str]
) -> dict[str, Any]:
    """The one diagnosis schema used by both the CLI and the HTTP API."""
    findings = [
        finding_payload(
            f,
            space,
            operator_text.get(f.operator_id) if f.operator_id is not None else None,
        )
        for f in diag.findings
    ]
    out: dict[str, Any] = {"definite": diag.definite, "candidates": findings}
    if diag.definite:
        out["minimal_symptom"] = findings[0]["pair"]
        out["rule"] = findings[0]["rule"]
        out["operator_id"] = findings[0]["operator_id"]
        out["operator"] = findings[0]["operator"]
        out["constraint"] = findings[0]["constraint"]
    return out


def operator_text_index(operators: Iterable[Any], space: Space) -> dict[int, str]:
    return {op.id: render_operator(op, space) for op in operators}


def question_payload(session: DiagnosisSession, space: Space) -> dict[str, Any] | None:
    node = session.pending_node
    if node is None:
        return None
    return {
        "node_id": node.id,
        "var": space.name(node.pair.var),
        "value": node.pair.value,
        "sentence": render_question(node.pair, space),
    }


def session_tree_payload(session: DiagnosisSession, space: Space) -> dict[str, Any]:
    """The session's tree with per-node statuses, same node shape as documents."""
    nodes = []
    for node in session.nodes:
        status, pruned, in_candidate = session.node_view(node.id)
        nodes.append(
            {
                "node_id": node.id,
                "var": space.name(node.pair.var),
                "value": node.pair.value,
                "operator_id": node.rule.operator_id,
                "constraint_label": node.rule.constraint_label,
                "children": list(node.children),
                "status": status,
                "pruned": pruned,
                "in_candidate": in_candidate,
            }
        )
    return {"root_id": 0, "candidate_root_id": session.candidate_id, "nodes": nodes}
