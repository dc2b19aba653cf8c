"""Propagation to the greatest fixpoint, recording a proof for every removal.

The engine applies operators from a FIFO queue until none can remove another
value.  Whichever fair order is used, the final environment is the same (the
greatest subset of the start that every operator keeps); the recorded proofs
do depend on the order, which is why the queue order is deterministic and
optionally seeded.
"""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, NamedTuple

from .indexicals import DeductionRule, Operator, compile_constraint, kept_mask, rules_for
from .model import Csp, Environment, Space, ValuePair

DEFAULT_TREE_CAP = 1_000_000
INITIAL_LABEL = "initial"


@dataclass(frozen=True)
class Program:
    """A compiled operator set plus the wake index used for scheduling."""

    space: Space
    operators: tuple[Operator, ...]
    wake_index: Mapping[int, tuple[int, ...]]
    rule_index: tuple[Mapping[ValuePair, DeductionRule], ...]

    def rule_for(self, op_id: int, head: ValuePair) -> DeductionRule | None:
        return self.rule_index[op_id].get(head)

    def all_rules(self) -> Iterator[DeductionRule]:
        for per_op in self.rule_index:
            yield from per_op.values()


def build_program(space: Space, operators: Iterable[Operator]) -> Program:
    ops = tuple(operators)
    for i, op in enumerate(ops):
        if op.id != i:
            raise ValueError(f"operator ids must be dense, got {op.id} at position {i}")
    wake: dict[int, list[int]] = {}
    for op in ops:
        for dep in op.deps:
            wake.setdefault(dep, []).append(op.id)
    rule_index = []
    for op in ops:
        per_op = {r.head: r for r in rules_for(op, space)}
        rule_index.append(per_op)
    return Program(
        space=space,
        operators=ops,
        wake_index={v: tuple(ids) for v, ids in wake.items()},
        rule_index=tuple(rule_index),
    )


def compile_program(csp: Csp) -> Program:
    """Compile every constraint of the CSP, in order, into one program."""
    ops: list[Operator] = []
    for c in csp.constraints:
        ops.extend(compile_constraint(c, csp.space, first_id=len(ops)))
    return build_program(csp.space, ops)


class Step(NamedTuple):
    op_id: int
    removed: tuple[ValuePair, ...]


@dataclass(frozen=True)
class StoreEntry:
    rule: DeductionRule
    seq: int


@dataclass(frozen=True)
class Closure:
    """The result of one propagation run.

    `store` maps every pair removed during the run to the rule that removed
    it and its removal sequence number; rule bodies always point at pairs
    removed strictly earlier (or absent from the start), so the recorded
    justifications form a well-founded forest.
    """

    program: Program
    start: Environment
    final_env: Environment
    store: Mapping[ValuePair, StoreEntry]
    steps: tuple[Step, ...]
    seed: int | None = None


def chaotic_iteration(
    prog: Program, d0: Environment | None = None, *, seed: int | None = None
) -> Closure:
    """Run the operators to their common fixpoint, justifying each removal.

    Every operator is applied at least once; an operator re-enters the queue
    whenever one of its dependencies loses a value, with duplicates
    suppressed while it is already pending.  When `seed` is given the initial
    order and each wake batch are shuffled, which changes the recorded proofs
    but never the final environment.
    """
    space = prog.space
    if d0 is None:
        d0 = space.full()
    if d0.space != space:
        raise ValueError("starting environment does not match the program's space")

    rng = random.Random(seed) if seed is not None else None
    order = list(range(len(prog.operators)))
    if rng is not None:
        rng.shuffle(order)

    masks = list(d0.masks)
    queue: deque[int] = deque(order)
    pending = set(order)
    store: dict[ValuePair, StoreEntry] = {}
    steps: list[Step] = []
    seq = 0

    while queue:
        op_id = queue.popleft()
        pending.discard(op_id)
        op = prog.operators[op_id]
        x = op.output
        kept = kept_mask(op, masks, space)
        removed_bits = masks[x] & ~kept
        if not removed_bits:
            continue
        removed = tuple(
            ValuePair(x, v) for v in space.mask_values(x, removed_bits)
        )
        for pair in removed:
            rule = prog.rule_for(op_id, pair)
            assert rule is not None, "operator removed a pair it has no rule for"
            store[pair] = StoreEntry(rule=rule, seq=seq)
            seq += 1
        masks[x] = masks[x] & kept
        steps.append(Step(op_id, removed))
        woken = [w for w in prog.wake_index.get(x, ()) if w not in pending]
        if rng is not None:
            rng.shuffle(woken)
        for w in woken:
            pending.add(w)
            queue.append(w)

    return Closure(
        program=prog,
        start=d0,
        final_env=Environment(space, masks),
        store=store,
        steps=tuple(steps),
        seed=seed,
    )


def removed_roots(cl: Closure) -> frozenset[ValuePair]:
    """The pairs the run removed: start minus final environment."""
    return frozenset(cl.store)


@dataclass(frozen=True)
class ExplanationTree:
    """A materialized proof of one removal.

    Each node's rule belongs to its operator's rule set and the children are
    proofs of the body pairs; `seq` is the removal sequence number (-1 for
    pairs that were never present), which strictly decreases toward leaves.
    A node is `truncated` when the materialization cap cut its children off.
    """

    root: ValuePair
    rule: DeductionRule
    children: tuple["ExplanationTree", ...]
    seq: int
    truncated: bool = False

    def size(self) -> int:
        return sum(1 for _ in self.iter_nodes())

    def iter_nodes(self) -> Iterator["ExplanationTree"]:
        stack = [self]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(node.children))


def explanation_for(
    cl: Closure, pair: ValuePair, cap: int = DEFAULT_TREE_CAP
) -> ExplanationTree | None:
    """The recorded proof tree for `pair`, or None if the pair was kept.

    Shared sub-proofs are expanded into duplicate nodes, so the tree can be
    larger than the store; expansion stops at `cap` nodes and marks the cut
    nodes truncated.
    """
    space = cl.program.space
    space.bit(pair.var, pair.value)
    pair = ValuePair(pair.var, pair.value)
    if pair in cl.final_env:
        return None

    @dataclass
    class Draft:
        pair: ValuePair
        rule: DeductionRule
        seq: int
        children: list[int] = field(default_factory=list)
        truncated: bool = False

    def draft_for(p: ValuePair) -> Draft:
        entry = cl.store.get(p)
        if entry is not None:
            return Draft(p, entry.rule, entry.seq)
        assert p not in cl.start, "pair missing from final env has no justification"
        synthetic = DeductionRule(
            head=p, body=frozenset(), operator_id=None, constraint_label=INITIAL_LABEL
        )
        return Draft(p, synthetic, -1)

    drafts = [draft_for(pair)]
    stack = [0]
    while stack:
        idx = stack.pop()
        draft = drafts[idx]
        for child_pair in draft.rule.sorted_body():
            if len(drafts) >= cap:
                draft.truncated = True
                draft.children.clear()
                break
            drafts.append(draft_for(child_pair))
            child_idx = len(drafts) - 1
            draft.children.append(child_idx)
            stack.append(child_idx)

    built: list[ExplanationTree | None] = [None] * len(drafts)
    for idx in range(len(drafts) - 1, -1, -1):
        draft = drafts[idx]
        children = tuple(built[c] for c in draft.children)
        assert all(c is not None for c in children)
        built[idx] = ExplanationTree(
            root=draft.pair,
            rule=draft.rule,
            children=children,  # type: ignore[arg-type]
            seq=draft.seq,
            truncated=draft.truncated,
        )
    root = built[0]
    assert root is not None
    return root


def upward_closure(
    rules: Iterable[DeductionRule], seed: Iterable[ValuePair]
) -> frozenset[ValuePair]:
    """Least superset of `seed` closed under the rules.

    Deliberately independent of the queue engine: plain passes over the rule
    list until nothing fires, usable as an oracle for the iteration above.
    """
    rules = tuple(rules)
    removed = set(seed)
    changed = True
    while changed:
        changed = False
        for rule in rules:
            if rule.head not in removed and rule.body <= removed:
                removed.add(rule.head)
                changed = True
    return frozenset(removed)
