"""Shared formula corpora for tests and benchmarks.

The micro corpus enumerates every 3-CNF over two variables with at most two
clauses, counting clauses and the literals inside a clause as unordered
(multisets), which gives 1 + 20 + 210 = 231 formulas. The random corpus is a
seeded stream of small instances. Both are deterministic.
"""
from __future__ import annotations

import itertools
import random

from sat2track.cnf import Clause, Formula, Literal

MICRO_VARIABLES = 2
MICRO_MAX_CLAUSES = 2
RANDOM_SEED = 2008
RANDOM_COUNT = 500
RANDOM_MAX_VARIABLES = 8
RANDOM_MAX_CLAUSES = 12


def micro_corpus() -> list[Formula]:
    """All 231 formulas over 2 variables with 0, 1, or 2 clauses."""
    literals = [
        Literal(variable, positive)
        for variable in range(1, MICRO_VARIABLES + 1)
        for positive in (True, False)
    ]
    clause_pool = [
        Clause(triple)
        for triple in itertools.combinations_with_replacement(literals, 3)
    ]
    assert len(clause_pool) == 20
    formulas = []
    for count in range(MICRO_MAX_CLAUSES + 1):
        for clauses in itertools.combinations_with_replacement(clause_pool, count):
            formulas.append(Formula(MICRO_VARIABLES, clauses))
    assert len(formulas) == 231
    return formulas


def random_formula(
    rng: random.Random,
    max_variables: int = RANDOM_MAX_VARIABLES,
    max_clauses: int = RANDOM_MAX_CLAUSES,
) -> Formula:
    num_variables = rng.randint(1, max_variables)
    num_clauses = rng.randint(1, max_clauses)
    clauses = []
    for _ in range(num_clauses):
        clauses.append(
            Clause(
                tuple(
                    Literal(rng.randint(1, num_variables), rng.random() < 0.5)
                    for _ in range(3)
                )
            )
        )
    return Formula(num_variables, tuple(clauses))


def random_corpus(
    seed: int = RANDOM_SEED,
    count: int = RANDOM_COUNT,
    max_variables: int = RANDOM_MAX_VARIABLES,
    max_clauses: int = RANDOM_MAX_CLAUSES,
) -> list[Formula]:
    rng = random.Random(seed)
    return [random_formula(rng, max_variables, max_clauses) for _ in range(count)]


def full_corpus() -> list[Formula]:
    """Micro corpus followed by the default random corpus."""
    return micro_corpus() + random_corpus()


def _clause(a: int, b: int, c: int) -> Clause:
    return Clause(tuple(Literal(abs(v), v > 0) for v in (a, b, c)))


def regression_formulas() -> list[Formula]:
    """Fixed formulas that exercised past failure modes: the unit
    contradiction, a forced chain, a tautological clause, and a mixed
    satisfiable instance."""
    return [
        # x1 and not-x1, padded to width 3: unsatisfiable
        Formula(1, (_clause(1, 1, 1), _clause(-1, -1, -1))),
        # implication chain forcing x1=x2=x3=true
        Formula(
            3,
            (
                _clause(1, 1, 1),
                _clause(-1, 2, 2),
                _clause(-2, 3, 3),
            ),
        ),
        # tautological clause: satisfied either way
        Formula(2, (_clause(1, -1, 2),)),
        # mixed: satisfiable with x2 true regardless of x1
        Formula(
            4,
            (
                _clause(1, -3, 4),
                _clause(-1, 2, 3),
                _clause(2, -2, -4),
            ),
        ),
    ]
