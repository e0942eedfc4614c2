import random

from aever.frontend import parse_input, print_problem
from aever.imp import IntRange
from aever.generate import (
    LIBRARY_ASPECS,
    LIBRARY_ESPECS,
    LIBRARY_IMPLS,
    generate_problem,
)
from aever.specs import SpecContext, check_context_compatible


def test_library_implementations_meet_their_contracts():
    specs = SpecContext(LIBRARY_ASPECS, LIBRARY_ESPECS)
    assert check_context_compatible(LIBRARY_IMPLS, specs, IntRange(-2, 2), 32) == {}


def test_generator_is_reproducible():
    a = [generate_problem(random.Random(5)).problem for _ in range(1)][0]
    b = generate_problem(random.Random(5)).problem
    assert a == b


def test_generated_problems_are_printable_and_reparseable():
    rng = random.Random(99)
    kinds = set()
    for _ in range(25):
        gen = generate_problem(rng)
        kinds.add(gen.kind)
        text = print_problem(gen.problem)
        assert parse_input(text) == gen.problem
    assert kinds == {"mirror", "random", "loop"}
