"""Shared test machinery: generators, independent oracles, fault injection."""

from __future__ import annotations

import dataclasses
import random
from pathlib import Path

from fdexplain.engine import Program
from fdexplain.indexicals import compile_constraint, eval_operator, kept_mask
from fdexplain.lang import constraint_label, parse_model
from fdexplain.model import (
    Constraint,
    Csp,
    Environment,
    Relation,
    Space,
    enumerate_solutions,
)

MODELS_DIR = Path(__file__).resolve().parent.parent / "models"


def load_model(name: str) -> Csp:
    return parse_model((MODELS_DIR / name).read_text(encoding="utf-8"))


def model_text(name: str) -> str:
    return (MODELS_DIR / name).read_text(encoding="utf-8")


def labeled(c: Constraint, space: Space) -> Constraint:
    return dataclasses.replace(c, label=constraint_label(c, space))


def random_environment(rng: random.Random, space: Space) -> Environment:
    masks = [
        rng.getrandbits(len(space.values(v))) for v in range(space.nvars)
    ]
    return Environment(space, masks)


def random_subset(rng: random.Random, env: Environment) -> Environment:
    masks = [m & rng.getrandbits(max(m.bit_length(), 1)) for m in env.masks]
    return Environment(env.space, masks)


def random_space(rng: random.Random, max_vars: int = 5, max_values: int = 8) -> Space:
    nvars = rng.randint(2, max_vars)
    decls = []
    for i in range(nvars):
        lo = rng.randint(0, 3)
        size = rng.randint(2, max_values)
        decls.append((f"v{i}", range(lo, lo + size)))
    return Space(decls)


_BINARY = (Relation.GT, Relation.LT, Relation.GE, Relation.LE, Relation.NEQ)


def random_csp(
    rng: random.Random,
    max_vars: int = 5,
    max_values: int = 8,
    max_constraints: int = 10,
    table_only: bool = False,
) -> Csp:
    space = random_space(rng, max_vars, max_values)
    constraints = []
    for _ in range(rng.randint(1, max_constraints)):
        if table_only or rng.random() < 0.25:
            x, y = rng.sample(range(space.nvars), 2)
            rows = [
                (a, b)
                for a in space.values(x)
                for b in space.values(y)
                if rng.random() < 0.6
            ]
            if not rows:
                rows = [(space.values(x)[0], space.values(y)[0])]
            c = Constraint(
                label="", relation=Relation.TABLE, scope=(x, y),
                table=frozenset(rows),
            )
        elif rng.random() < 0.2:
            x = rng.randrange(space.nvars)
            c = Constraint(
                label="", relation=Relation.NEQ_CONST, scope=(x,),
                k=rng.choice(space.values(x)),
            )
        else:
            x, y = rng.sample(range(space.nvars), 2)
            c = Constraint(
                label="", relation=rng.choice(_BINARY), scope=(x, y),
                k=rng.randint(-2, 2),
            )
        constraints.append(labeled(c, space))
    return Csp(space=space, constraints=tuple(constraints))


def naive_reduction(prog: Program, d0: Environment | None = None) -> Environment:
    """Queue-free fixpoint: sweep every operator until nothing changes."""
    space = prog.space
    masks = list((d0 if d0 is not None else space.full()).masks)
    changed = True
    while changed:
        changed = False
        for op in prog.operators:
            new = masks[op.output] & kept_mask(op, masks, space)
            if new != masks[op.output]:
                masks[op.output] = new
                changed = True
    return Environment(space, masks)


def brute_ac_fixpoint(csp: Csp) -> Environment:
    """Arc consistency for binary tables by repeated support deletion.

    Plain sets and loops on purpose: shares nothing with the engine.
    """
    doms = {v: set(csp.space.values(v)) for v in range(csp.space.nvars)}
    changed = True
    while changed:
        changed = False
        for c in csp.constraints:
            assert c.relation is Relation.TABLE and len(c.scope) == 2
            x, y = c.scope
            assert c.table is not None
            for e in sorted(doms[x]):
                if not any((e, f) in c.table for f in doms[y]):
                    doms[x].discard(e)
                    changed = True
            for f in sorted(doms[y]):
                if not any((e, f) in c.table for e in doms[x]):
                    doms[y].discard(f)
                    changed = True
    return csp.space.env_from_values(
        {csp.space.name(v): doms[v] for v in range(csp.space.nvars)}
    )


def queens_csp(n: int, pin: int | None = None) -> Csp:
    decls = []
    for i in range(1, n + 1):
        if pin is not None and i == 1:
            decls.append((f"q{i}", (pin,)))
        else:
            decls.append((f"q{i}", range(1, n + 1)))
    space = Space(decls)
    constraints = []
    for i in range(n):
        for j in range(i + 1, n):
            d = j - i
            for k in (0, d, -d):
                c = Constraint(label="", relation=Relation.NEQ, scope=(i, j), k=k)
                constraints.append(labeled(c, space))
    return Csp(space=space, constraints=tuple(constraints))


# -- fault injection -------------------------------------------------------------

_FLIPPED = {
    Relation.GT: Relation.LT,
    Relation.LT: Relation.GT,
    Relation.GE: Relation.LE,
    Relation.LE: Relation.GE,
}


def constraint_mutants(c: Constraint, space: Space) -> list[Constraint]:
    """Plausible one-constraint slips: flipped relation, off-by-one, swapped
    arguments, or a lost table row."""
    out = []
    if c.relation in _FLIPPED:
        out.append(dataclasses.replace(c, relation=_FLIPPED[c.relation]))
        out.append(dataclasses.replace(c, scope=(c.scope[1], c.scope[0])))
        out.append(dataclasses.replace(c, k=c.k + 1))
        out.append(dataclasses.replace(c, k=c.k - 1))
    elif c.relation is Relation.NEQ:
        out.append(dataclasses.replace(c, k=c.k + 1))
        out.append(dataclasses.replace(c, k=c.k - 1))
        out.append(dataclasses.replace(c, scope=(c.scope[1], c.scope[0])))
    elif c.relation is Relation.NEQ_CONST:
        values = space.values(c.scope[0])
        for v in values[:2]:
            if v != c.k:
                out.append(dataclasses.replace(c, k=v))
    elif c.relation is Relation.TABLE:
        assert c.table is not None
        out.append(dataclasses.replace(c, scope=(c.scope[1], c.scope[0])))
        for row in sorted(c.table)[:3]:
            if len(c.table) > 1:
                out.append(dataclasses.replace(c, table=frozenset(c.table - {row})))
    return [labeled(m, space) for m in out]


def csp_mutants(csp: Csp) -> list[tuple[Csp, str]]:
    """Every single-constraint mutation of the CSP, with the new label."""
    out = []
    for idx, c in enumerate(csp.constraints):
        for mutant in constraint_mutants(c, csp.space):
            constraints = list(csp.constraints)
            constraints[idx] = mutant
            out.append((Csp(csp.space, tuple(constraints)), mutant.label))
    return out


def constraints_rejecting_solutions(
    csp: Csp, solutions: list[Environment]
) -> set[str]:
    """Labels of constraints whose operators drop a value of some solution."""
    labels = set()
    for c in csp.constraints:
        ops = compile_constraint(c, csp.space)
        for op in ops:
            for t in solutions:
                if not t.issubset(eval_operator(op, t)):
                    labels.add(c.label)
    return labels


def fault_corpus() -> list[Csp]:
    """Small intended models, each solvable and actually pruned by
    propagation, used as mutation targets."""
    corpus = [load_model("conference.fd")]
    corpus.append(
        parse_model(
            """
            var a in 1..5;
            var b in 1..5;
            var c in 1..5;
            a<b; b<c; c!=5; a!=2;
            """
        )
    )
    corpus.append(
        parse_model(
            """
            var x in 0..3;
            var y in 0..3;
            var z in 0..3;
            table (x,y) { (0,1), (1,2), (2,3), (1,0) };
            y<=z; z!=0;
            """
        )
    )
    corpus.append(
        parse_model(
            """
            # a tight ladder of bounds with one slack link
            var p in 0..6;
            var q in 0..6;
            var r in 0..6;
            var s in 0..6;
            p<=q; q<r; r<=s-1; s<=p+5; p!=0; s!=6;
            """
        )
    )
    corpus.append(
        parse_model(
            """
            # two chained successor tables
            var m in 0..4;
            var n in 0..4;
            var o in 0..4;
            table (m,n) { (0,1), (1,2), (2,3), (3,4), (4,0) };
            table (n,o) { (1,0), (2,1), (3,2), (4,3) };
            m!=4;
            """
        )
    )
    corpus.append(
        parse_model(
            """
            var d1 in 1..6;
            var d2 in 1..6;
            var d3 in 1..6;
            var d4 in 1..6;
            d1<d2; d2<=d3; d3<d4; d4!=6; d1!=d3; d2>=d1+1;
            """
        )
    )
    corpus.append(queens_csp(4, pin=2))
    for csp in corpus:
        assert enumerate_solutions(csp), "fault corpus models must be solvable"
    return corpus
