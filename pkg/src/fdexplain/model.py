"""Variables, environments, constraints, and brute-force solution semantics.

The pair universe is the set of all (variable, value) pairs.  An environment
is any subset of that universe, stored as one bitmask per variable so that
union, intersection, complement and subset tests are single integer
operations.  A tuple is an environment that picks exactly one value per
variable; solutions are tuples accepted by every constraint.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Iterable, Iterator, Mapping, NamedTuple, Sequence

DEFAULT_VALUE_RANGE = (0, 1023)
DEFAULT_ENUM_CAP = 10_000_000


class ValuePair(NamedTuple):
    """One element of the pair universe: a variable id and one of its values."""

    var: int
    value: int


@dataclass(frozen=True)
class Variable:
    """A declared variable: dense id, unique name, sorted initial domain."""

    id: int
    name: str
    values: tuple[int, ...]


class Space:
    """The variable table; fixes the pair universe all environments live in."""

    def __init__(
        self,
        variables: Iterable[tuple[str, Iterable[int]]],
        value_range: tuple[int, int] = DEFAULT_VALUE_RANGE,
    ) -> None:
        lo, hi = value_range
        vars_: list[Variable] = []
        by_name: dict[str, Variable] = {}
        for vid, (name, values) in enumerate(variables):
            vals = tuple(sorted({int(v) for v in values}))
            if not vals:
                raise ValueError(f"variable {name!r} has an empty initial domain")
            if vals[0] < lo or vals[-1] > hi:
                raise ValueError(
                    f"variable {name!r}: values must lie in {lo}..{hi}, got {vals[0]}..{vals[-1]}"
                )
            if name in by_name:
                raise ValueError(f"duplicate variable name {name!r}")
            var = Variable(vid, name, vals)
            by_name[name] = var
            vars_.append(var)
        self.value_range = (lo, hi)
        self.variables: tuple[Variable, ...] = tuple(vars_)
        self._by_name = by_name
        self._bit_of: tuple[dict[int, int], ...] = tuple(
            {v: i for i, v in enumerate(var.values)} for var in self.variables
        )
        self._full: tuple[int, ...] = tuple(
            (1 << len(var.values)) - 1 for var in self.variables
        )

    # -- identity ---------------------------------------------------------

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Space) and self.variables == other.variables

    def __hash__(self) -> int:
        return hash(self.variables)

    def __repr__(self) -> str:
        names = ", ".join(v.name for v in self.variables)
        return f"Space({names})"

    # -- lookups ----------------------------------------------------------

    @property
    def nvars(self) -> int:
        return len(self.variables)

    @property
    def pair_count(self) -> int:
        return sum(len(v.values) for v in self.variables)

    def var(self, name: str) -> Variable:
        try:
            return self._by_name[name]
        except KeyError:
            raise ValueError(f"unknown variable {name!r}") from None

    def check_var(self, var: int) -> None:
        if not 0 <= var < len(self.variables):
            raise ValueError(f"unknown variable id {var}")

    def values(self, var: int) -> tuple[int, ...]:
        self.check_var(var)
        return self.variables[var].values

    def name(self, var: int) -> str:
        self.check_var(var)
        return self.variables[var].name

    def bit(self, var: int, value: int) -> int:
        """Mask with only `value`'s bit set; raises if the value is foreign."""
        self.check_var(var)
        try:
            return 1 << self._bit_of[var][value]
        except KeyError:
            raise ValueError(
                f"value {value} is not in the initial domain of {self.name(var)}"
            ) from None

    def has_value(self, var: int, value: int) -> bool:
        self.check_var(var)
        return value in self._bit_of[var]

    def full_mask(self, var: int) -> int:
        self.check_var(var)
        return self._full[var]

    def mask_where(self, var: int, keep: Callable[[int], bool]) -> int:
        mask = 0
        for i, v in enumerate(self.values(var)):
            if keep(v):
                mask |= 1 << i
        return mask

    def mask_values(self, var: int, mask: int) -> tuple[int, ...]:
        vals = self.values(var)
        return tuple(vals[i] for i in range(len(vals)) if mask >> i & 1)

    def pair(self, name: str, value: int) -> ValuePair:
        var = self.var(name)
        self.bit(var.id, value)
        return ValuePair(var.id, value)

    def render_pair(self, p: ValuePair) -> str:
        return f"({self.name(p.var)},{p.value})"

    def all_pairs(self) -> Iterator[ValuePair]:
        for var in self.variables:
            for v in var.values:
                yield ValuePair(var.id, v)

    # -- environment constructors ------------------------------------------

    def full(self) -> "Environment":
        return Environment(self, self._full)

    def empty(self) -> "Environment":
        return Environment(self, (0,) * self.nvars)

    def env_from_pairs(self, pairs: Iterable[ValuePair]) -> "Environment":
        masks = [0] * self.nvars
        for var, value in pairs:
            masks[var] |= self.bit(var, value)
        return Environment(self, tuple(masks))

    def env_from_values(self, per_var: Mapping[str, Iterable[int]]) -> "Environment":
        masks = [0] * self.nvars
        for name, values in per_var.items():
            var = self.var(name)
            for v in values:
                masks[var.id] |= self.bit(var.id, v)
        return Environment(self, tuple(masks))

    def tuple_env(self, assignment: Mapping[str, int]) -> "Environment":
        """Environment picking exactly one value for each mapped variable."""
        return self.env_from_values({n: (v,) for n, v in assignment.items()})


class Environment:
    """An immutable subset of the pair universe, one bitmask per variable."""

    __slots__ = ("space", "masks")

    def __init__(self, space: Space, masks: Sequence[int]) -> None:
        self.space = space
        self.masks: tuple[int, ...] = tuple(masks)
        if len(self.masks) != space.nvars:
            raise ValueError("mask count does not match variable count")

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, Environment)
            and self.space == other.space
            and self.masks == other.masks
        )

    def __hash__(self) -> int:
        return hash((self.space, self.masks))

    def __repr__(self) -> str:
        parts = []
        for var in self.space.variables:
            vals = self.values(var.id)
            parts.append(f"{var.name}:{{{','.join(map(str, vals))}}}")
        return "Environment(" + " ".join(parts) + ")"

    def __contains__(self, pair: ValuePair) -> bool:
        var, value = pair
        self.space.check_var(var)
        if not self.space.has_value(var, value):
            return False
        return bool(self.masks[var] & self.space.bit(var, value))

    # -- per-variable views -------------------------------------------------

    def mask(self, var: int) -> int:
        self.space.check_var(var)
        return self.masks[var]

    def values(self, var: int) -> tuple[int, ...]:
        return self.space.mask_values(var, self.mask(var))

    def min_value(self, var: int) -> int | None:
        m = self.mask(var)
        if not m:
            return None
        return self.space.values(var)[(m & -m).bit_length() - 1]

    def max_value(self, var: int) -> int | None:
        m = self.mask(var)
        if not m:
            return None
        return self.space.values(var)[m.bit_length() - 1]

    def singleton_value(self, var: int) -> int | None:
        m = self.mask(var)
        if m and not (m & (m - 1)):
            return self.space.values(var)[m.bit_length() - 1]
        return None

    def value_of(self, var: int) -> int:
        v = self.singleton_value(var)
        if v is None:
            raise ValueError(
                f"variable {self.space.name(var)} is not assigned exactly one value"
            )
        return v

    # -- set algebra ---------------------------------------------------------

    def _check_same_space(self, other: "Environment") -> None:
        if self.space != other.space:
            raise ValueError("environments live in different spaces")

    def union(self, other: "Environment") -> "Environment":
        self._check_same_space(other)
        return Environment(self.space, [a | b for a, b in zip(self.masks, other.masks)])

    def intersect(self, other: "Environment") -> "Environment":
        self._check_same_space(other)
        return Environment(self.space, [a & b for a, b in zip(self.masks, other.masks)])

    def difference(self, other: "Environment") -> "Environment":
        self._check_same_space(other)
        return Environment(self.space, [a & ~b for a, b in zip(self.masks, other.masks)])

    def complement(self) -> "Environment":
        return Environment(
            self.space,
            [self.space.full_mask(v) & ~m for v, m in enumerate(self.masks)],
        )

    def restrict(self, keep_vars: Iterable[int]) -> "Environment":
        keep = set(keep_vars)
        for var in keep:
            self.space.check_var(var)
        return Environment(
            self.space,
            [m if v in keep else 0 for v, m in enumerate(self.masks)],
        )

    def replace_mask(self, var: int, mask: int) -> "Environment":
        self.space.check_var(var)
        masks = list(self.masks)
        masks[var] = mask & self.space.full_mask(var)
        return Environment(self.space, masks)

    def issubset(self, other: "Environment") -> bool:
        self._check_same_space(other)
        return all(a & ~b == 0 for a, b in zip(self.masks, other.masks))

    def __le__(self, other: "Environment") -> bool:
        return self.issubset(other)

    def __or__(self, other: "Environment") -> "Environment":
        return self.union(other)

    def __and__(self, other: "Environment") -> "Environment":
        return self.intersect(other)

    # -- whole-set views -------------------------------------------------------

    def count(self) -> int:
        return sum(m.bit_count() for m in self.masks)

    def is_empty(self) -> bool:
        return all(m == 0 for m in self.masks)

    def pairs(self) -> Iterator[ValuePair]:
        for var in range(self.space.nvars):
            for v in self.values(var):
                yield ValuePair(var, v)

    def pair_set(self) -> frozenset[ValuePair]:
        return frozenset(self.pairs())

    def is_tuple_on(self, scope: Iterable[int]) -> bool:
        return all(self.masks[v].bit_count() == 1 for v in scope)

    def is_full_tuple(self) -> bool:
        return self.is_tuple_on(range(self.space.nvars))


def restrict(d: Environment, keep_vars: Iterable[int]) -> Environment:
    """Keep only the pairs whose variable is in `keep_vars`."""
    return d.restrict(keep_vars)


def complement(d: Environment) -> Environment:
    """All pairs of the universe that are not in `d`; an involution."""
    return d.complement()


def union_solutions(space: Space, tuples: Iterable[Environment]) -> Environment:
    """Pointwise union of a set of tuples: the pairs some tuple uses."""
    out = space.empty()
    for t in tuples:
        out = out.union(t)
    return out


class Relation(Enum):
    GT = ">"
    LT = "<"
    GE = ">="
    LE = "<="
    NEQ = "!="
    NEQ_CONST = "!=const"
    TABLE = "table"


BINARY_RELATIONS = frozenset(
    {Relation.GT, Relation.LT, Relation.GE, Relation.LE, Relation.NEQ}
)


@dataclass(frozen=True)
class Constraint:
    """One constraint: a relation over an ordered scope of variables.

    For binary relations the constraint reads ``scope[0] REL scope[1] + k``;
    for NEQ_CONST it reads ``scope[0] != k``; TABLE lists the accepted value
    combinations explicitly, one entry per scope position.
    """

    label: str
    relation: Relation
    scope: tuple[int, ...]
    k: int = 0
    table: frozenset[tuple[int, ...]] | None = None

    def __post_init__(self) -> None:
        if len(set(self.scope)) != len(self.scope):
            raise ValueError(f"constraint {self.label!r}: scope repeats a variable")
        if self.relation in BINARY_RELATIONS and len(self.scope) != 2:
            raise ValueError(f"constraint {self.label!r}: binary relation needs 2 variables")
        if self.relation is Relation.NEQ_CONST and len(self.scope) != 1:
            raise ValueError(f"constraint {self.label!r}: unary relation needs 1 variable")
        if self.relation is Relation.TABLE:
            if self.table is None:
                raise ValueError(f"constraint {self.label!r}: table relation needs entries")
            if not self.scope:
                raise ValueError(f"constraint {self.label!r}: table needs a scope")
            for row in self.table:
                if len(row) != len(self.scope):
                    raise ValueError(
                        f"constraint {self.label!r}: table row {row} does not match scope"
                    )
        elif self.table is not None:
            raise ValueError(f"constraint {self.label!r}: only table relations carry entries")

    def accepts(self, assignment: Sequence[int]) -> bool:
        """Check the relation against one value per space variable."""
        if self.relation is Relation.TABLE:
            assert self.table is not None
            return tuple(assignment[v] for v in self.scope) in self.table
        if self.relation is Relation.NEQ_CONST:
            return assignment[self.scope[0]] != self.k
        a = assignment[self.scope[0]]
        b = assignment[self.scope[1]] + self.k
        if self.relation is Relation.GT:
            return a > b
        if self.relation is Relation.LT:
            return a < b
        if self.relation is Relation.GE:
            return a >= b
        if self.relation is Relation.LE:
            return a <= b
        return a != b


@dataclass(frozen=True)
class Csp:
    """A variable table plus the constraints over it."""

    space: Space
    constraints: tuple[Constraint, ...]

    def __post_init__(self) -> None:
        for c in self.constraints:
            for var in c.scope:
                self.space.check_var(var)


def is_solution(t: Environment, csp: Csp) -> bool:
    """True iff the full tuple `t` satisfies every constraint of the CSP."""
    if t.space != csp.space:
        raise ValueError("tuple does not belong to this CSP's space")
    if not t.is_full_tuple():
        raise ValueError("is_solution needs a tuple assigning every variable")
    assignment = [t.value_of(v) for v in range(t.space.nvars)]
    return all(c.accepts(assignment) for c in csp.constraints)


def enumerate_solutions(csp: Csp, cap: int = DEFAULT_ENUM_CAP) -> list[Environment]:
    """All solutions by exhaustive enumeration, in lexicographic value order.

    Intentionally naive: this is the reference semantics the propagation
    machinery is tested against, so it must not share code with it.
    """
    space = csp.space
    total = 1
    for var in space.variables:
        total *= len(var.values)
        if total > cap:
            raise ValueError(
                f"domain product exceeds enumeration cap ({cap}); "
                "restrict the initial domains before enumerating"
            )
    out: list[Environment] = []
    domains = [var.values for var in space.variables]
    for combo in itertools.product(*domains):
        if all(c.accepts(combo) for c in csp.constraints):
            out.append(
                space.env_from_pairs(
                    ValuePair(v, combo[v]) for v in range(space.nvars)
                )
            )
    return out
