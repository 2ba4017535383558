"""Tests for the solver/verifier engine and its two interchangeable cores."""
from __future__ import annotations

import random
from collections import deque

import pytest

from sat2track import engine, reduction
from sat2track.cnf import Assignment, Clause, Formula, Literal, evaluate, sat_oracle
from sat2track.track import (
    Certificate,
    Link,
    LinkCause,
    Pad,
    PadKind,
    Respawn,
    RespawnPolicy,
    Track,
    Traverse,
    is_complete,
    legal_actions,
    step,
)


def lit(v: int) -> Literal:
    return Literal(abs(v), v > 0)


def formula(n: int, clauses: list[tuple[int, int, int]]) -> Formula:
    return Formula(n, tuple(Clause((lit(a), lit(b), lit(c))) for a, b, c in clauses))


def random_formula(rng: random.Random, max_n: int = 4, max_m: int = 5) -> Formula:
    n = rng.randint(1, max_n)
    return formula(
        n,
        [
            tuple(rng.randint(1, n) * rng.choice((1, -1)) for _ in range(3))
            for _ in range(rng.randint(0, max_m))
        ],
    )


SAMPLE = formula(4, [(1, -3, 4), (-1, 2, 3), (2, -2, -4)])


def reference_solve(track: Track, policy: RespawnPolicy) -> Certificate | None:
    """From-scratch shortest-certificate search over the semantic layer
    (legal_actions/step), used as the oracle for both cores. Matches the
    engine's canonical tie-break: successors in legal_actions order,
    first-wins state keys."""

    def key(state):
        if policy is RespawnPolicy.DISABLED:
            return (state.pad, state.collected)
        return (state.pad, state.collected, state.last_touch)

    init = track.initial_state()
    parent: dict[object, object] = {key(init): None}
    queue = deque([init])
    while queue:
        state = queue.popleft()
        for action in legal_actions(track, state, policy):
            nxt = step(track, state, action, policy)
            if is_complete(track, nxt):
                actions = [action]
                cursor = key(state)
                while parent[cursor] is not None:
                    prev, act = parent[cursor]
                    actions.append(act)
                    cursor = prev
                return Certificate(tuple(reversed(actions)))
            k = key(nxt)
            if k not in parent:
                parent[k] = (key(state), action)
                queue.append(nxt)
    return None


def divergence_track() -> Track:
    """Completable under any_touch only: the first touch pad strands the car
    in a pit, and only a targeted respawn to the twin touch pad (never driven
    through) leads onward to the finish."""
    pads = (
        Pad(0, 0, 0, 3, PadKind.START),
        Pad(1, 2, 0, 2, PadKind.CHECKPOINT_TOUCH, 0),
        Pad(2, 4, 0, 0, PadKind.LANDING),
        Pad(3, 2, 4, 2, PadKind.CHECKPOINT_TOUCH, 0),
        Pad(4, 4, 4, 1, PadKind.ROAD),
        Pad(5, 6, 4, 1, PadKind.FINISH),
    )
    links = (
        Link(0, 0, 1, False, LinkCause.JUMP),
        Link(1, 1, 2, False, LinkCause.DROP),
        Link(2, 3, 4, False, LinkCause.DROP),
        Link(3, 4, 2, False, LinkCause.DROP),
        Link(4, 4, 5, True, LinkCause.ROAD),
    )
    return Track(pads, links)


class TestCores:
    def test_compiled_core_is_active(self):
        # the build must produce the extension; the pure core is a fallback,
        # not the default
        assert engine.CORE_NAME == "compiled"
        assert engine._compiled is not None

    @pytest.mark.parametrize("policy", list(RespawnPolicy))
    def test_cores_agree_with_reference_on_random_formulas(self, policy):
        rng = random.Random(51)
        for _ in range(25):
            track = reduction.compile_formula(random_formula(rng))
            expected = reference_solve(track, policy)
            for core in (engine._pycore, engine._compiled):
                got = _solve_with(core, track, policy)
                assert got == expected

    def test_cores_agree_on_divergence_track(self):
        track = divergence_track()
        for policy in RespawnPolicy:
            expected = reference_solve(track, policy)
            for core in (engine._pycore, engine._compiled):
                assert _solve_with(core, track, policy) == expected

    def test_replay_parity_on_random_action_sequences(self):
        # both cores must agree action by action, also on garbage input
        rng = random.Random(52)
        track = reduction.compile_formula(SAMPLE)
        arrays = engine.build_arrays(track)
        link_ids = [l.id for l in track.links]
        for policy in RespawnPolicy:
            for _ in range(40):
                actions = []
                for _ in range(rng.randrange(25)):
                    roll = rng.random()
                    if roll < 0.75:
                        actions.append(
                            Traverse(rng.choice(link_ids + [999]), rng.random() < 0.3)
                        )
                    elif roll < 0.9:
                        actions.append(Respawn())
                    else:
                        actions.append(Respawn(rng.choice([p.id for p in track.pads])))
                certificate = Certificate(tuple(actions))
                reports = []
                for core in (engine._pycore, engine._compiled):
                    reports.append(_verify_with(core, track, certificate, policy))
                assert reports[0] == reports[1]

    def test_replay_matches_semantic_layer(self):
        # the array replay must equal stepping the track object directly
        rng = random.Random(53)
        track = reduction.compile_formula(SAMPLE)
        for policy in RespawnPolicy:
            for _ in range(30):
                state = track.initial_state()
                actions = []
                for _ in range(rng.randrange(1, 30)):
                    options = legal_actions(track, state, policy)
                    if not options:
                        break
                    action = options[rng.randrange(len(options))]
                    state = step(track, state, action, policy)
                    actions.append(action)
                report = engine.verify(track, Certificate(tuple(actions)), policy)
                assert report.valid
                assert report.collected_at_end == state.collected
                assert report.actions_consumed == len(actions)
                assert report.complete == is_complete(track, state)


def _solve_with(core, track, policy) -> Certificate | None:
    previous = engine.active_core
    engine.active_core = core
    try:
        return engine.solve(track, policy=policy)
    finally:
        engine.active_core = previous


def _verify_with(core, track, certificate, policy):
    previous = engine.active_core
    engine.active_core = core
    try:
        return engine.verify(track, certificate, policy)
    finally:
        engine.active_core = previous


class TestSolve:
    def test_certificate_is_shortest_and_canonical(self):
        track = reduction.compile_formula(SAMPLE)
        assert engine.solve(track) == reference_solve(track, RespawnPolicy.FIXED)

    def test_unsat_formula_has_no_certificate(self):
        track = reduction.compile_formula(formula(1, [(1, 1, 1), (-1, -1, -1)]))
        assert engine.solve(track) is None

    def test_solved_certificate_verifies_complete(self):
        track = reduction.compile_formula(SAMPLE)
        certificate = engine.solve(track)
        report = engine.verify(track, certificate)
        assert report.valid and report.complete
        assert report.actions_consumed == len(certificate)

    def test_deterministic_across_runs(self):
        track = reduction.compile_formula(SAMPLE)
        assert engine.solve(track) == engine.solve(track)

    def test_state_budget_enforced(self):
        track = reduction.compile_formula(SAMPLE)
        with pytest.raises(engine.SolveLimitError):
            engine.solve(track, max_states=3)

    def test_checkpoint_cap_enforced(self):
        track = reduction.compile_formula(SAMPLE)
        with pytest.raises(engine.SolveLimitError):
            engine.solve(track, max_checkpoints=2)

    def test_core_packing_limit_enforced(self):
        track = _chain_of_touch_pads(21)
        with pytest.raises(engine.SolveLimitError):
            engine.solve(track, max_checkpoints=30)

    def test_empty_track_solves_trivially(self):
        track = reduction.compile_formula(formula(0, []))
        certificate = engine.solve(track)
        assert len(certificate) == 1


def _chain_of_touch_pads(count: int) -> Track:
    pads = [Pad(0, 0, 0, 0, PadKind.START)]
    links = []
    for i in range(count):
        pads.append(Pad(i + 1, i + 1, 0, 0, PadKind.CHECKPOINT_TOUCH, i))
        links.append(Link(i, i, i + 1, True, LinkCause.ROAD))
    pads.append(Pad(count + 1, count + 1, 0, 0, PadKind.FINISH))
    links.append(Link(count, count, count + 1, True, LinkCause.ROAD))
    return Track(tuple(pads), tuple(links))


class TestVerify:
    def test_empty_certificate_valid_incomplete(self):
        track = reduction.compile_formula(SAMPLE)
        report = engine.verify(track, Certificate(()))
        assert report.valid and not report.complete
        assert report.actions_consumed == 0
        assert report.collected_at_end == frozenset()

    def test_first_illegal_index_reported(self):
        track = reduction.compile_formula(SAMPLE)
        actions = list(engine.solve(track).actions)
        actions[7] = Traverse(actions[7].link + 1000)
        report = engine.verify(track, Certificate(tuple(actions)))
        assert not report.valid
        assert report.first_illegal_index == 7
        assert report.actions_consumed == 7

    def test_truncated_certificate_valid_incomplete(self):
        track = reduction.compile_formula(SAMPLE)
        actions = engine.solve(track).actions
        report = engine.verify(track, Certificate(actions[:-1]))
        assert report.valid and not report.complete

    def test_checkpoint_width_guard(self):
        track = _chain_of_touch_pads(63)
        with pytest.raises(ValueError):
            engine.verify(track, Certificate(()))

    def test_verify_does_not_mutate_certificate(self):
        track = reduction.compile_formula(SAMPLE)
        certificate = engine.solve(track)
        engine.verify(track, certificate)
        assert engine.verify(track, certificate).complete


class TestPolicies:
    def test_disabled_and_fixed_agree_on_compiled_tracks(self):
        rng = random.Random(54)
        for _ in range(20):
            track = reduction.compile_formula(random_formula(rng))
            fixed = engine.solve(track, RespawnPolicy.FIXED)
            disabled = engine.solve(track, RespawnPolicy.DISABLED)
            assert (fixed is None) == (disabled is None)

    def test_any_touch_can_diverge_on_crafted_track(self):
        track = divergence_track()
        assert engine.solve(track, RespawnPolicy.FIXED) is None
        assert engine.solve(track, RespawnPolicy.DISABLED) is None
        certificate = engine.solve(track, RespawnPolicy.ANY_TOUCH)
        assert certificate is not None
        assert engine.verify(track, certificate, RespawnPolicy.ANY_TOUCH).complete

    def test_targeted_respawn_illegal_under_fixed(self):
        track = divergence_track()
        certificate = engine.solve(track, RespawnPolicy.ANY_TOUCH)
        report = engine.verify(track, certificate, RespawnPolicy.FIXED)
        assert not report.valid
        respawn_index = next(
            i for i, a in enumerate(certificate) if isinstance(a, Respawn)
        )
        assert report.first_illegal_index == respawn_index

    def test_plain_respawn_returns_to_last_touch(self):
        track = reduction.compile_formula(formula(1, [(1, 1, 1)]))
        solved = engine.solve(track).actions
        touch_prefix = None
        state = track.initial_state()
        for i, action in enumerate(solved):
            state = step(track, state, action)
            if state.last_touch is not None:
                touch_prefix = solved[: i + 1]
                break
        certificate = Certificate(touch_prefix + (Respawn(), Respawn()))
        report = engine.verify(track, certificate)
        assert report.valid
        assert report.collected_at_end == state.collected


class TestEquivalence:
    def test_sample_agrees(self):
        report = engine.equivalence_check(SAMPLE)
        assert report.ok
        assert report.satisfiable and report.completable
        assert evaluate(SAMPLE.to_ints(), report.assignment)

    def test_unsat_agrees(self):
        report = engine.equivalence_check(formula(1, [(1, 1, 1), (-1, -1, -1)]))
        assert report.ok
        assert not report.satisfiable and not report.completable
        assert report.assignment is None and report.certificate is None

    @pytest.mark.parametrize(
        "policy", [RespawnPolicy.DISABLED, RespawnPolicy.FIXED]
    )
    def test_policies_agree_on_random_formulas(self, policy):
        rng = random.Random(55)
        for _ in range(15):
            report = engine.equivalence_check(random_formula(rng), policy=policy)
            assert report.ok
            assert report.satisfiable == report.completable

    def test_any_touch_shortcut_is_flagged(self):
        # Free teleports between touch pads of one checkpoint let a run hop
        # onto another variable's arm mid-flow and recommit it later, so this
        # unsatisfiable formula becomes completable. The report must flag the
        # divergence instead of crashing.
        f = formula(2, [(1, 1, 1), (-1, 2, 2), (-2, -2, -2)])
        report = engine.equivalence_check(f, policy=RespawnPolicy.ANY_TOUCH)
        assert not report.satisfiable
        assert report.completable
        assert not report.agree
        assert not report.witness_cross_checked
        assert not report.ok
        fixed = engine.equivalence_check(f, policy=RespawnPolicy.FIXED)
        assert fixed.ok and not fixed.satisfiable and not fixed.completable

    def test_any_touch_unextractable_witness_is_flagged(self):
        # Satisfiable formula where the shortest any_touch certificate skips a
        # variable commitment: completability still agrees, but the witness
        # cannot be extracted, so ok must be False.
        f = formula(2, [(1, 2, 2), (1, 2, 2)])
        report = engine.equivalence_check(f, policy=RespawnPolicy.ANY_TOUCH)
        assert report.agree
        assert not report.witness_cross_checked
        assert report.assignment is None
        assert not report.ok
        assert engine.equivalence_check(f, policy=RespawnPolicy.FIXED).ok

    def test_matches_oracle_flag(self):
        rng = random.Random(56)
        for _ in range(15):
            f = random_formula(rng)
            report = engine.equivalence_check(f)
            assert report.satisfiable == (sat_oracle(f) is not None)


class TestCodes:
    def test_actions_roundtrip_through_codes(self):
        track = reduction.compile_formula(SAMPLE)
        arrays = engine.build_arrays(track)
        certificate = engine.solve(track)
        codes = engine.actions_to_codes(arrays, certificate.actions)
        assert engine.codes_to_actions(arrays, codes) == certificate.actions

    def test_moves_sorted_by_code_per_pad(self):
        arrays = engine.build_arrays(reduction.compile_formula(SAMPLE))
        for i in range(arrays.n_pads):
            lo, hi = int(arrays.move_start[i]), int(arrays.move_start[i + 1])
            chunk = list(arrays.move_code[lo:hi])
            assert chunk == sorted(chunk)

    def test_unknown_ids_become_illegal_not_crash(self):
        track = reduction.compile_formula(SAMPLE)
        certificate = Certificate((Traverse(987654), Respawn(987654)))
        report = engine.verify(track, certificate, RespawnPolicy.ANY_TOUCH)
        assert not report.valid
        assert report.first_illegal_index == 0
