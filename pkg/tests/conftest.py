from __future__ import annotations

import pytest

import helpers
from fdexplain.engine import chaotic_iteration, compile_program
from fdexplain.lang import parse_expected
from fdexplain.model import enumerate_solutions, union_solutions


@pytest.fixture(scope="session")
def conference():
    return helpers.load_model("conference.fd")


@pytest.fixture(scope="session")
def buggy():
    return helpers.load_model("conference_buggy.fd")


@pytest.fixture(scope="session")
def conference_closure(conference):
    return chaotic_iteration(compile_program(conference))


@pytest.fixture(scope="session")
def buggy_closure(buggy):
    return chaotic_iteration(compile_program(buggy))


@pytest.fixture(scope="session")
def intended_solutions(conference):
    return enumerate_solutions(conference)


@pytest.fixture(scope="session")
def intended_union(conference, intended_solutions):
    return union_solutions(conference.space, intended_solutions)


@pytest.fixture(scope="session")
def expected_env(conference):
    return parse_expected(helpers.model_text("conference.expect"), conference.space)
