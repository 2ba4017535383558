"""Tests for the shared formula corpora."""
from __future__ import annotations

from sat2track.corpus import (
    MICRO_MAX_CLAUSES,
    MICRO_VARIABLES,
    RANDOM_COUNT,
    RANDOM_MAX_CLAUSES,
    RANDOM_MAX_VARIABLES,
    full_corpus,
    micro_corpus,
    random_corpus,
    regression_formulas,
)


class TestMicroCorpus:
    def test_has_231_formulas(self):
        assert len(micro_corpus()) == 231

    def test_no_duplicates(self):
        assert len(set(micro_corpus())) == 231

    def test_bounds_hold(self):
        for f in micro_corpus():
            assert f.num_variables == MICRO_VARIABLES
            assert len(f.clauses) <= MICRO_MAX_CLAUSES
            for clause in f.clauses:
                assert len(clause.literals) == 3
                assert all(1 <= l.variable <= 2 for l in clause.literals)

    def test_deterministic(self):
        assert micro_corpus() == micro_corpus()


class TestRandomCorpus:
    def test_default_count(self):
        assert len(random_corpus()) == RANDOM_COUNT

    def test_bounds_hold(self):
        for f in random_corpus():
            assert 1 <= f.num_variables <= RANDOM_MAX_VARIABLES
            assert 1 <= len(f.clauses) <= RANDOM_MAX_CLAUSES
            for clause in f.clauses:
                assert all(1 <= l.variable <= f.num_variables for l in clause.literals)

    def test_seed_reproducibility(self):
        assert random_corpus(seed=1, count=20) == random_corpus(seed=1, count=20)
        assert random_corpus(seed=1, count=20) != random_corpus(seed=2, count=20)


class TestFullCorpus:
    def test_composition(self):
        full = full_corpus()
        assert full[:231] == micro_corpus()
        assert full[231:] == random_corpus()

    def test_regression_formulas_are_fixed(self):
        fixed = regression_formulas()
        assert len(fixed) == 4
        assert fixed == regression_formulas()
