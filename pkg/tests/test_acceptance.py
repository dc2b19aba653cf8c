"""One test per acceptance criterion, each printing a pass line.

Run with `pytest tests/test_acceptance.py -v -s` to see the lines; every
tolerance is asserted, so a red test is a failed criterion.
"""

from __future__ import annotations

import random
import time

import helpers

from fdexplain.diagnosis import (
    Answer,
    Strategy,
    find_symptoms,
    new_session,
    run_session,
    scripted_oracle,
    verify_erroneous,
)
from fdexplain.engine import (
    chaotic_iteration,
    compile_program,
    explanation_for,
    removed_roots,
    upward_closure,
)
from fdexplain.model import ValuePair, enumerate_solutions, union_solutions


def _ok(name: str) -> None:
    print(f"ACCEPTANCE {name}: PASS")


def test_closure_reproduction():
    csp = helpers.load_model("conference.fd")
    started = time.perf_counter()
    cl = chaotic_iteration(compile_program(csp))
    elapsed = time.perf_counter() - started
    expected = {
        ("AM", 1), ("AM", 2), ("MA", 2), ("MA", 3),
        ("MP", 2), ("MP", 3), ("PM", 1), ("PM", 2),
    }
    got = {
        (csp.space.name(p.var), p.value) for p in cl.final_env.pairs()
    }
    assert got == expected
    assert elapsed < 0.1, f"closure took {elapsed:.3f}s"
    _ok("closure-reproduction")


def test_solution_reproduction():
    csp = helpers.load_model("conference.fd")
    cl = chaotic_iteration(compile_program(csp))
    sols = enumerate_solutions(csp)
    expected = {
        csp.space.tuple_env({"AM": 2, "MA": 3, "MP": 3, "PM": 1}),
        csp.space.tuple_env({"AM": 1, "MA": 3, "MP": 3, "PM": 2}),
    }
    assert set(sols) == expected
    for t in sols:
        assert t.issubset(cl.final_env)
    _ok("solution-reproduction")


def test_symptom_reproduction():
    intended = helpers.load_model("conference.fd")
    buggy = helpers.load_model("conference_buggy.fd")
    union = union_solutions(intended.space, enumerate_solutions(intended))
    cl = chaotic_iteration(compile_program(buggy))
    assert cl.final_env.is_empty()
    assert buggy.space.pair("AM", 1) in find_symptoms(cl, union)
    _ok("symptom-reproduction")


def test_diagnosis_reproduction():
    buggy = helpers.load_model("conference_buggy.fd")
    space = buggy.space
    cl = chaotic_iteration(compile_program(buggy))
    tree = explanation_for(cl, space.pair("AM", 1))
    assert tree is not None and tree.size() == 8

    session = new_session(tree, Strategy.DIVIDE_AND_CONQUER)
    asked = []
    for answer in (Answer.YES, Answer.YES, Answer.NO):
        pair = session.next_question()
        assert isinstance(pair, ValuePair)
        asked.append(space.render_pair(pair))
        session.answer(pair, answer)
    assert asked == ["(MA,3)", "(PM,2)", "(MP,1)"]
    assert session.done, "exactly three questions settle this tree"

    result = session.result()
    assert result.definite
    assert result.minimal_symptom == space.pair("PM", 2)
    assert result.rule.head == space.pair("PM", 2)
    assert result.rule.body == frozenset({space.pair("MP", 1)})
    assert result.constraint_label == "PM>MP"
    _ok("diagnosis-reproduction")


def _corpus(count: int = 20) -> list:
    rng = random.Random(2024)
    return [
        helpers.random_csp(rng, max_vars=5, max_values=8, max_constraints=10)
        for _ in range(count)
    ]


def test_confluence_property():
    for csp in _corpus(20):
        prog = compile_program(csp)
        baseline = chaotic_iteration(prog).final_env
        for seed in range(10):
            shuffled = chaotic_iteration(prog, seed=seed).final_env
            assert shuffled.masks == baseline.masks
    _ok("confluence")


def test_dual_and_root_theorems():
    for csp in _corpus(20):
        prog = compile_program(csp)
        cl = chaotic_iteration(prog)
        gone = cl.final_env.complement().pair_set()
        assert upward_closure(prog.all_rules(), ()) == gone
        assert removed_roots(cl) == gone
        for pair in gone:
            tree = explanation_for(cl, pair)
            assert tree is not None
            for node in tree.iter_nodes():
                assert node.rule.operator_id is not None
                canonical = prog.rule_for(node.rule.operator_id, node.root)
                assert node.rule == canonical
                assert tuple(c.root for c in node.children) == node.rule.sorted_body()
    _ok("dual-and-root-theorems")


def test_arc_consistency_oracle():
    rng = random.Random(4242)
    for _ in range(20):
        csp = helpers.random_csp(rng, table_only=True)
        engine_env = chaotic_iteration(compile_program(csp)).final_env
        assert engine_env == helpers.brute_ac_fixpoint(csp)
    _ok("arc-consistency-oracle")


def test_fault_injection_soundness():
    cases = 0
    unique_cases = 0
    for intended in helpers.fault_corpus():
        solutions = enumerate_solutions(intended)
        union = union_solutions(intended.space, solutions)
        for mutant, mutated_label in helpers.csp_mutants(intended):
            cl = chaotic_iteration(compile_program(mutant))
            symptoms = find_symptoms(cl, union)
            if not symptoms:
                continue
            cases += 1
            tree = explanation_for(cl, symptoms[0])
            assert tree is not None
            session = new_session(tree, Strategy.DIVIDE_AND_CONQUER)
            result, _ = run_session(session, scripted_oracle(union))
            assert result.definite
            assert verify_erroneous(result.rule, union)
            failing = helpers.constraints_rejecting_solutions(mutant, solutions)
            if len(failing) == 1:
                unique_cases += 1
                assert result.constraint_label == mutated_label
                assert failing == {mutated_label}
    assert cases >= 50, f"only {cases} mutants produced a symptom"
    assert unique_cases >= 25
    _ok(f"fault-injection ({cases} symptomatic mutants, {unique_cases} unique)")


def test_desk_scale_performance():
    queens = helpers.queens_csp(8)
    started = time.perf_counter()
    prog = compile_program(queens)
    cl = chaotic_iteration(prog)
    elapsed = time.perf_counter() - started
    assert elapsed < 1.0, f"8-queens propagation took {elapsed:.3f}s"

    pinned = helpers.queens_csp(8, pin=1)
    cl = chaotic_iteration(compile_program(pinned))
    gone = removed_roots(cl)
    assert gone, "pinning a queen must remove some values"
    worst = 0.0
    for pair in gone:
        started = time.perf_counter()
        tree = explanation_for(cl, pair)
        worst = max(worst, time.perf_counter() - started)
        assert tree is not None
    assert worst < 0.01, f"slowest retrieval took {worst * 1000:.2f}ms"
    _ok(f"desk-scale-performance ({len(gone)} removals, worst {worst * 1000:.2f}ms)")
