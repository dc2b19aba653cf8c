"""Locating a faulty constraint from one wrongly removed value.

Given a proof tree whose root the user says should have been kept, the
session asks the user about other removed pairs until it finds a node that
should be kept while everything justifying its removal is rightly gone.  The
rule at that node removes a wanted value using only unwanted ones, so the
operator owning it, and the constraint that operator implements, is where the
model went wrong.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Callable, Iterator, Union

from .engine import Closure, ExplanationTree, Program
from .indexicals import DeductionRule, kept_mask
from .model import Environment, Space, ValuePair


class Answer(Enum):
    YES = "yes"
    NO = "no"
    UNKNOWN = "unknown"

    @classmethod
    def parse(cls, text: str) -> "Answer":
        try:
            return cls(text.strip().lower())
        except ValueError:
            raise ValueError(f"not an answer: {text!r} (want yes/no/unknown)") from None


class Strategy(Enum):
    DIVIDE_AND_CONQUER = "dac"
    TOP_DOWN = "topdown"


class Status(Enum):
    EXPECTED = "expected"
    NOT_EXPECTED = "not_expected"
    UNKNOWN = "unknown"


class ExpectedEnv:
    """Three-valued membership over the pair universe.

    Pairs start unknown unless materialized from a full environment; a pair's
    status can move from unknown to a definite value but never flip between
    definite values.
    """

    def __init__(self, space: Space) -> None:
        self.space = space
        self._known = [0] * space.nvars
        self._expected = [0] * space.nvars

    @classmethod
    def from_environment(cls, env: Environment) -> "ExpectedEnv":
        out = cls(env.space)
        out._known = [env.space.full_mask(v) for v in range(env.space.nvars)]
        out._expected = list(env.masks)
        return out

    def status(self, pair: ValuePair) -> Status:
        bit = self.space.bit(pair.var, pair.value)
        if not self._known[pair.var] & bit:
            return Status.UNKNOWN
        if self._expected[pair.var] & bit:
            return Status.EXPECTED
        return Status.NOT_EXPECTED

    def mark(self, pair: ValuePair, expected: bool) -> None:
        bit = self.space.bit(pair.var, pair.value)
        if self._known[pair.var] & bit:
            currently = bool(self._expected[pair.var] & bit)
            if currently != expected:
                raise ValueError(
                    f"pair {self.space.render_pair(pair)} already has a definite status"
                )
            return
        self._known[pair.var] |= bit
        if expected:
            self._expected[pair.var] |= bit

    def is_fully_known(self) -> bool:
        return all(
            self._known[v] == self.space.full_mask(v) for v in range(self.space.nvars)
        )

    def expected_environment(self) -> Environment:
        return Environment(self.space, self._expected)


def find_symptoms(
    cl: Closure, expected: Environment | ExpectedEnv
) -> list[ValuePair]:
    """Expected pairs the closure lost, sorted by (variable, value)."""
    if isinstance(expected, ExpectedEnv):
        env = expected.expected_environment()
    else:
        env = expected
    missing = env.difference(cl.final_env)
    return list(missing.pairs())


def erroneous_operators(prog: Program, d: Environment) -> list[int]:
    """Ids of operators that remove something from `d`; empty iff `d` is stable."""
    out = []
    for op in prog.operators:
        kept = kept_mask(op, d.masks, prog.space)
        if d.masks[op.output] & ~kept:
            out.append(op.id)
    return out


def verify_erroneous(rule: DeductionRule, d: Environment) -> bool:
    """True iff the rule removes a wanted head using only unwanted pairs."""
    if rule.head not in d:
        return False
    return all(p not in d for p in rule.body)


Oracle = Callable[[ValuePair], Answer]


def scripted_oracle(d: Environment) -> Oracle:
    """An oracle that answers from a fixed environment: yes iff the pair is in it."""

    def ask(pair: ValuePair) -> Answer:
        return Answer.YES if pair in d else Answer.NO

    return ask


class SessionFinishedError(RuntimeError):
    """Raised when an answer arrives after the session reached its verdict."""


class StaleQuestionError(RuntimeError):
    """Raised when an answer names a pair that is not the pending question."""


class _Done:
    __slots__ = ()

    def __repr__(self) -> str:
        return "DONE"


DONE = _Done()


@dataclass(frozen=True)
class Finding:
    """One suspect: a removed pair, its rule, and the owning operator/constraint."""

    pair: ValuePair
    rule: DeductionRule
    operator_id: int | None
    constraint_label: str


@dataclass(frozen=True)
class Diagnosis:
    """Session outcome: a definite culprit, or suspects left by unknown answers."""

    definite: bool
    findings: tuple[Finding, ...]

    @property
    def minimal_symptom(self) -> ValuePair:
        if not self.definite:
            raise ValueError("diagnosis is not definite")
        return self.findings[0].pair

    @property
    def rule(self) -> DeductionRule:
        if not self.definite:
            raise ValueError("diagnosis is not definite")
        return self.findings[0].rule

    @property
    def constraint_label(self) -> str:
        if not self.definite:
            raise ValueError("diagnosis is not definite")
        return self.findings[0].constraint_label

    @property
    def operator_id(self) -> int | None:
        if not self.definite:
            raise ValueError("diagnosis is not definite")
        return self.findings[0].operator_id


@dataclass
class _Node:
    id: int
    pair: ValuePair
    rule: DeductionRule
    seq: int
    parent: int | None
    children: tuple[int, ...] = ()
    depth: int = 0


# Per-pair answer state inside a session.  Distinct from region pruning: a
# "no" answer is a fact about its pair everywhere, while the subtree below it
# is merely excluded from questioning.
_SYMPTOM = "symptom"
_NOT_SYMPTOM = "not_symptom"
_UNKNOWN = "unknown"


class DiagnosisSession:
    """One interactive walk over a proof tree rooted at a confirmed symptom.

    Answer semantics: yes means "this value was expected, its removal is
    wrong" (the node is a symptom) and narrows the search to that node's
    subtree; no means the removal was justified and closes the whole subtree;
    unknown keeps the subtree open but never asks about that pair again.
    Duplicate occurrences of the same pair share one answer.
    """

    def __init__(self, tree: ExplanationTree, strategy: Strategy) -> None:
        if any(node.truncated for node in tree.iter_nodes()):
            raise ValueError("cannot run a session on a truncated tree")
        self.strategy = strategy
        self.transcript: list[tuple[ValuePair, Answer]] = []
        self._nodes: list[_Node] = []
        self._status: dict[ValuePair, str] = {tree.root: _SYMPTOM}
        self._build(tree)
        self._candidate = 0
        self._pending: int | None = None
        self._refresh()

    # -- construction -----------------------------------------------------

    def _build(self, tree: ExplanationTree) -> None:
        stack: list[tuple[ExplanationTree, int | None]] = [(tree, None)]
        while stack:
            subtree, parent = stack.pop()
            node = _Node(
                id=len(self._nodes),
                pair=subtree.root,
                rule=subtree.rule,
                seq=subtree.seq,
                parent=parent,
                depth=0 if parent is None else self._nodes[parent].depth + 1,
            )
            self._nodes.append(node)
            if parent is not None:
                self._nodes[parent].children += (node.id,)
            for child in reversed(subtree.children):
                stack.append((child, node.id))

    # -- views --------------------------------------------------------------

    @property
    def nodes(self) -> tuple[_Node, ...]:
        return tuple(self._nodes)

    @property
    def candidate_id(self) -> int:
        return self._candidate

    @property
    def done(self) -> bool:
        return self._pending is None

    @property
    def state(self) -> str:
        return "done" if self.done else "question_pending"

    @property
    def pending_node(self) -> _Node | None:
        return None if self._pending is None else self._nodes[self._pending]

    def pair_status(self, pair: ValuePair) -> str | None:
        return self._status.get(pair)

    def node_view(self, node_id: int) -> tuple[str, bool, bool]:
        """(status, pruned, in candidate region) for one node occurrence."""
        node = self._nodes[node_id]
        status = self._status.get(node.pair, "untested")
        in_candidate = self._in_candidate(node_id)
        pruned = in_candidate and node_id != self._candidate and not self._live(node_id)
        return status, pruned, in_candidate

    # -- geometry -------------------------------------------------------------

    def _in_candidate(self, node_id: int) -> bool:
        cur: int | None = node_id
        while cur is not None:
            if cur == self._candidate:
                return True
            cur = self._nodes[cur].parent
        return False

    def _live(self, node_id: int) -> bool:
        """Inside the candidate region with no closed ancestor on the way up."""
        cur = self._nodes[node_id].parent
        while cur is not None:
            if cur == self._candidate:
                return True
            if self._status.get(self._nodes[cur].pair) == _NOT_SYMPTOM:
                return False
            cur = self._nodes[cur].parent
        return False

    def _subtree_ids(self, node_id: int) -> Iterator[int]:
        stack = [node_id]
        while stack:
            nid = stack.pop()
            yield nid
            stack.extend(reversed(self._nodes[nid].children))

    def _eligible(self) -> list[int]:
        out = []
        for nid in self._subtree_ids(self._candidate):
            if nid == self._candidate:
                continue
            node = self._nodes[nid]
            if node.pair in self._status:
                continue
            if not self._live(nid):
                continue
            if self.strategy is Strategy.TOP_DOWN and node.parent != self._candidate:
                continue
            out.append(nid)
        return out

    # -- question selection ------------------------------------------------------

    def _normalize(self) -> None:
        # If an answered-yes pair occurs inside the region, the search can
        # restart from that occurrence: it is a known symptom deeper down.
        moved = True
        while moved:
            moved = False
            for nid in self._subtree_ids(self._candidate):
                if nid == self._candidate:
                    continue
                if not self._live(nid):
                    continue
                if self._status.get(self._nodes[nid].pair) == _SYMPTOM:
                    self._candidate = nid
                    moved = True
                    break

    def _refresh(self) -> None:
        self._normalize()
        eligible = self._eligible()
        if not eligible:
            self._pending = None
            return
        if self.strategy is Strategy.TOP_DOWN:
            self._pending = eligible[0]
            return
        # Halve the open region: aim for the node whose open subtree holds
        # about half of the open nodes, counting the region root as one.
        open_count = {nid: 0 for nid in eligible}
        eligible_set = set(eligible)
        for nid in eligible:
            for sub in self._subtree_ids(nid):
                if sub in eligible_set:
                    open_count[nid] += 1
        target = (len(eligible) + 1) / 2

        def key(nid: int) -> tuple[float, int, int, ValuePair]:
            size = open_count[nid]
            node = self._nodes[nid]
            return (abs(size - target), size, node.seq, node.pair)

        self._pending = min(eligible, key=key)

    # -- public protocol -----------------------------------------------------------

    def next_question(self) -> Union[ValuePair, _Done]:
        if self._pending is None:
            return DONE
        return self._nodes[self._pending].pair

    def answer(self, pair: ValuePair, answer: Answer) -> "DiagnosisSession":
        if self._pending is None:
            raise SessionFinishedError("session already reached its verdict")
        pending = self._nodes[self._pending]
        if pair != pending.pair:
            raise StaleQuestionError(
                f"pending question is about {pending.pair}, not {pair}"
            )
        self.transcript.append((pair, answer))
        if answer is Answer.YES:
            self._status[pair] = _SYMPTOM
            self._candidate = pending.id
        elif answer is Answer.NO:
            self._status[pair] = _NOT_SYMPTOM
        else:
            self._status[pair] = _UNKNOWN
        self._refresh()
        return self

    def result(self) -> Diagnosis:
        if not self.done:
            raise ValueError("session still has questions pending")
        root = self._nodes[self._candidate]
        child_status = [
            self._status.get(self._nodes[c].pair) for c in root.children
        ]
        if all(s == _NOT_SYMPTOM for s in child_status):
            finding = Finding(
                pair=root.pair,
                rule=root.rule,
                operator_id=root.rule.operator_id,
                constraint_label=root.rule.constraint_label,
            )
            return Diagnosis(definite=True, findings=(finding,))
        findings: list[Finding] = []
        seen: set[tuple[ValuePair, int | None]] = set()

        def add(node: _Node) -> None:
            key = (node.pair, node.rule.operator_id)
            if key not in seen:
                seen.add(key)
                findings.append(
                    Finding(
                        pair=node.pair,
                        rule=node.rule,
                        operator_id=node.rule.operator_id,
                        constraint_label=node.rule.constraint_label,
                    )
                )

        add(root)
        for nid in self._subtree_ids(self._candidate):
            node = self._nodes[nid]
            if nid == self._candidate or not self._live(nid):
                continue
            if self._status.get(node.pair) == _UNKNOWN:
                add(node)
        return Diagnosis(definite=False, findings=tuple(findings))


def new_session(
    tree: ExplanationTree,
    strategy: Strategy = Strategy.DIVIDE_AND_CONQUER,
    expected: ExpectedEnv | Environment | None = None,
) -> DiagnosisSession:
    """Start a session on a proof tree whose root is a confirmed symptom.

    When an expected environment is supplied, the root is checked against it;
    otherwise confirming the root is the caller's responsibility.
    """
    if expected is not None:
        if isinstance(expected, Environment):
            in_expected = tree.root in expected
        else:
            in_expected = expected.status(tree.root) is Status.EXPECTED
        if not in_expected:
            raise ValueError("tree root is not a symptom: the pair is not expected")
    return DiagnosisSession(tree, strategy)


def run_session(
    session: DiagnosisSession, oracle: Oracle
) -> tuple[Diagnosis, list[tuple[ValuePair, Answer]]]:
    """Drive a session with an oracle until it finishes."""
    while not session.done:
        pair = session.next_question()
        assert isinstance(pair, ValuePair)
        session.answer(pair, oracle(pair))
    return session.result(), list(session.transcript)
