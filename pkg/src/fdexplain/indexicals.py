"""Local-consistency operators in the "X in r" style and their deduction rules.

An operator watches some dependency variables and computes the set of values
its output variable may keep.  Every operator here is monotone: shrinking the
environment can only shrink the kept set.  Each operator also carries a dual
reading as deduction rules "remove h once everything in B is removed", with
exactly one rule per removable head; the rule view is what lets the engine
attach a proof to every removal.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Union

from .model import (
    BINARY_RELATIONS,
    DEFAULT_ENUM_CAP,
    Constraint,
    Environment,
    Relation,
    Space,
    ValuePair,
)


@dataclass(frozen=True)
class RangeConst:
    """Keep only values in lo..hi, unconditionally."""

    lo: int
    hi: int


@dataclass(frozen=True)
class MinPlus:
    """Keep values >= min(dep) + k; keeps nothing once dep is empty."""

    y: int
    k: int


@dataclass(frozen=True)
class MaxMinus:
    """Keep values <= max(dep) - k; keeps nothing once dep is empty."""

    y: int
    k: int


@dataclass(frozen=True)
class NotConst:
    """Remove the constant k, unconditionally."""

    k: int


@dataclass(frozen=True)
class NotVal:
    """Remove v + k once dep is bound to v; keeps nothing once dep is empty.

    The empty-dependency case is forced by monotonicity: the kept set may
    only shrink as the dependency's domain shrinks to a singleton and then
    to nothing.
    """

    y: int
    k: int = 0


@dataclass(frozen=True)
class Supports:
    """Keep values that still have a supporting pair in the dependency.

    `pairs` holds the accepted (output value, dependency value) combinations;
    this is the classic arc-consistency reading of a binary table.
    """

    y: int
    pairs: frozenset[tuple[int, int]]


IndexicalExpr = Union[RangeConst, MinPlus, MaxMinus, NotConst, NotVal, Supports]


@dataclass(frozen=True)
class Operator:
    """A compiled operator: output variable, expression, owning constraint."""

    id: int
    output: int
    expr: IndexicalExpr
    constraint_label: str

    @property
    def deps(self) -> frozenset[int]:
        if isinstance(self.expr, (MinPlus, MaxMinus, NotVal, Supports)):
            return frozenset((self.expr.y,))
        return frozenset()


@dataclass(frozen=True)
class DeductionRule:
    """h <- B: once every pair of the body is removed, the head may go.

    `operator_id` is None only for the synthetic rules that justify pairs
    already absent from the starting environment.
    """

    head: ValuePair
    body: frozenset[ValuePair]
    operator_id: int | None
    constraint_label: str

    def sorted_body(self) -> tuple[ValuePair, ...]:
        return tuple(sorted(self.body))


def kept_mask(op: Operator, masks: Iterable[int], space: Space) -> int:
    """Bitmask of the values `op` lets its output variable keep."""
    masks = tuple(masks)
    x = op.output
    expr = op.expr
    full = space.full_mask(x)
    if isinstance(expr, RangeConst):
        return space.mask_where(x, lambda e: expr.lo <= e <= expr.hi)
    if isinstance(expr, NotConst):
        if space.has_value(x, expr.k):
            return full & ~space.bit(x, expr.k)
        return full
    if isinstance(expr, MinPlus):
        ymask = masks[expr.y]
        if not ymask:
            return 0
        lo = space.values(expr.y)[(ymask & -ymask).bit_length() - 1] + expr.k
        return space.mask_where(x, lambda e: e >= lo)
    if isinstance(expr, MaxMinus):
        ymask = masks[expr.y]
        if not ymask:
            return 0
        hi = space.values(expr.y)[ymask.bit_length() - 1] - expr.k
        return space.mask_where(x, lambda e: e <= hi)
    if isinstance(expr, NotVal):
        ymask = masks[expr.y]
        if not ymask:
            return 0
        if ymask & (ymask - 1):
            return full
        bound = space.values(expr.y)[ymask.bit_length() - 1] + expr.k
        if space.has_value(x, bound):
            return full & ~space.bit(x, bound)
        return full
    if isinstance(expr, Supports):
        ymask = masks[expr.y]
        kept = 0
        for i, e in enumerate(space.values(x)):
            support = space.mask_where(expr.y, lambda f: (e, f) in expr.pairs)
            if ymask & support:
                kept |= 1 << i
        return kept
    raise TypeError(f"unknown indexical expression {expr!r}")


def eval_operator(op: Operator, d: Environment) -> Environment:
    """Apply the operator: kept set on its output, everything elsewhere.

    The result is not contracting by itself; reduction is `d & eval(op, d)`.
    """
    kept = kept_mask(op, d.masks, d.space)
    return d.space.full().replace_mask(op.output, kept)


def rules_for(op: Operator, space: Space) -> tuple[DeductionRule, ...]:
    """The canonical deduction rules of `op`, one per removable head.

    A head appears with an empty body exactly when the operator removes it
    from every environment.  For every environment, the heads whose body is
    fully removed are exactly the pairs the operator removes; that dual
    equivalence is what the tests pin down.
    """
    x = op.output
    expr = op.expr
    rules: list[DeductionRule] = []

    def rule(value: int, body: Iterable[ValuePair]) -> None:
        rules.append(
            DeductionRule(
                head=ValuePair(x, value),
                body=frozenset(body),
                operator_id=op.id,
                constraint_label=op.constraint_label,
            )
        )

    if isinstance(expr, RangeConst):
        for e in space.values(x):
            if not (expr.lo <= e <= expr.hi):
                rule(e, ())
    elif isinstance(expr, NotConst):
        if space.has_value(x, expr.k):
            rule(expr.k, ())
    elif isinstance(expr, MinPlus):
        for e in space.values(x):
            rule(e, (ValuePair(expr.y, f) for f in space.values(expr.y) if f <= e - expr.k))
    elif isinstance(expr, MaxMinus):
        for e in space.values(x):
            rule(e, (ValuePair(expr.y, f) for f in space.values(expr.y) if f >= e + expr.k))
    elif isinstance(expr, NotVal):
        for e in space.values(x):
            rule(e, (ValuePair(expr.y, f) for f in space.values(expr.y) if f != e - expr.k))
    elif isinstance(expr, Supports):
        for e in space.values(x):
            rule(e, (ValuePair(expr.y, f) for f in space.values(expr.y) if (e, f) in expr.pairs))
    else:
        raise TypeError(f"unknown indexical expression {expr!r}")
    return tuple(rules)


def dual_apply(op: Operator, removed: Iterable[ValuePair], space: Space) -> frozenset[ValuePair]:
    """Pairs of the output variable that `op` removes once `removed` is gone.

    Computed through the operator itself (evaluate on the complement and
    complement the result); the rule-set route must agree and is checked
    independently in the tests.
    """
    if isinstance(removed, Environment):
        removed_env = removed
    else:
        removed_env = space.env_from_pairs(removed)
    kept = kept_mask(op, removed_env.complement().masks, space)
    gone = space.full_mask(op.output) & ~kept
    return frozenset(
        ValuePair(op.output, v) for v in space.mask_values(op.output, gone)
    )


def compile_constraint(
    c: Constraint, space: Space, first_id: int = 0
) -> list[Operator]:
    """Arc-consistency operators implementing one constraint.

    Every returned operator keeps all tuples accepted by the constraint
    (solution preservation); ids are assigned densely from `first_id`.
    """
    ops: list[Operator] = []

    def add(output: int, expr: IndexicalExpr) -> None:
        ops.append(Operator(first_id + len(ops), output, expr, c.label))

    if c.relation in BINARY_RELATIONS:
        x, y = c.scope
        k = c.k
        if c.relation is Relation.GT:
            add(x, MinPlus(y, k + 1))
            add(y, MaxMinus(x, k + 1))
        elif c.relation is Relation.GE:
            add(x, MinPlus(y, k))
            add(y, MaxMinus(x, k))
        elif c.relation is Relation.LT:
            add(x, MaxMinus(y, 1 - k))
            add(y, MinPlus(x, 1 - k))
        elif c.relation is Relation.LE:
            add(x, MaxMinus(y, -k))
            add(y, MinPlus(x, -k))
        else:
            add(x, NotVal(y, k))
            add(y, NotVal(x, -k))
    elif c.relation is Relation.NEQ_CONST:
        add(c.scope[0], NotConst(c.k))
    elif c.relation is Relation.TABLE:
        if len(c.scope) != 2:
            raise ValueError(
                f"constraint {c.label!r}: only binary tables compile to operators"
            )
        x, y = c.scope
        assert c.table is not None
        valid = {
            (a, b)
            for a, b in c.table
            if space.has_value(x, a) and space.has_value(y, b)
        }
        add(x, Supports(y, frozenset(valid)))
        add(y, Supports(x, frozenset((b, a) for a, b in valid)))
    else:
        raise ValueError(f"constraint {c.label!r}: unsupported relation {c.relation}")
    return ops


def verify_preservation(
    op: Operator,
    constraints: Iterable[Constraint],
    space: Space,
    cap: int = DEFAULT_ENUM_CAP,
) -> bool:
    """True iff every tuple accepted by all `constraints` survives `op`.

    Only the variables the check can see matter (the operator's output and
    dependencies plus the constraint scopes), so enumeration runs over that
    subset of the table.
    """
    constraints = tuple(constraints)
    relevant = {op.output, *op.deps}
    for c in constraints:
        relevant.update(c.scope)
    relevant_vars = sorted(relevant)
    total = 1
    for var in relevant_vars:
        total *= len(space.values(var))
        if total > cap:
            raise ValueError(
                f"domain product exceeds verification cap ({cap}); "
                "restrict the initial domains first"
            )

    assignment = [space.values(v)[0] for v in range(space.nvars)]
    masks = [space.full_mask(v) for v in range(space.nvars)]

    def walk(idx: int) -> bool:
        if idx == len(relevant_vars):
            if not all(c.accepts(assignment) for c in constraints):
                return True
            for v in relevant_vars:
                masks[v] = space.bit(v, assignment[v])
            kept = kept_mask(op, masks, space)
            for v in relevant_vars:
                masks[v] = space.full_mask(v)
            return bool(kept & space.bit(op.output, assignment[op.output]))
        var = relevant_vars[idx]
        for v in space.values(var):
            assignment[var] = v
            if not walk(idx + 1):
                return False
        return True

    return walk(0)


def render_operator(op: Operator, space: Space) -> str:
    """Indexical-style text for an operator, e.g. ``AM in 0..max(MA)-1``."""
    x = space.name(op.output)
    expr = op.expr

    def signed(base: str, k: int) -> str:
        if k > 0:
            return f"{base}+{k}"
        if k < 0:
            return f"{base}-{-k}"
        return base

    if isinstance(expr, RangeConst):
        return f"{x} in {expr.lo}..{expr.hi}"
    if isinstance(expr, MinPlus):
        return f"{x} in {signed(f'min({space.name(expr.y)})', expr.k)}..infinity"
    if isinstance(expr, MaxMinus):
        return f"{x} in 0..{signed(f'max({space.name(expr.y)})', -expr.k)}"
    if isinstance(expr, NotConst):
        return f"{x} in -{{{expr.k}}}"
    if isinstance(expr, NotVal):
        return f"{x} in -{{{signed(f'val({space.name(expr.y)})', expr.k)}}}"
    if isinstance(expr, Supports):
        return f"{x} in supports({space.name(expr.y)})"
    raise TypeError(f"unknown indexical expression {expr!r}")
