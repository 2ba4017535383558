"""Certificate verification, shortest-certificate solving, and formula-level
equivalence checking.

The heavy loops live in a compiled extension (sat2track._core) with a pure
Python twin (sat2track._pycore) selected at import time; both speak the same
flat-array protocol, so swapping cores cannot change results. Pad and link ids
are remapped to dense indexes before a core runs and certificates are
translated back afterwards.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from sat2track import _pycore
from sat2track.cnf import Assignment, Formula, evaluate, sat_oracle
from sat2track.cnf import DEFAULT_ORACLE_LIMIT
from sat2track.reduction import CertificateError, compile_formula, extract_assignment
from sat2track.track import (
    Action,
    Certificate,
    PadKind,
    Respawn,
    RespawnPolicy,
    Track,
    Traverse,
)

try:
    from sat2track import _core as _compiled
except ImportError:  # pragma: no cover - depends on the build environment
    _compiled = None

active_core = _compiled if _compiled is not None else _pycore
CORE_NAME = "compiled" if _compiled is not None else "pure"

DEFAULT_MAX_CHECKPOINTS = 20
DEFAULT_MAX_STATES = 5_000_000

_POLICY_CODES = {
    RespawnPolicy.DISABLED: 0,
    RespawnPolicy.FIXED: 1,
    RespawnPolicy.ANY_TOUCH: 2,
}


class SolveLimitError(RuntimeError):
    """Raised when a solve would exceed a configured resource bound."""


@dataclass(frozen=True)
class CompletionReport:
    valid: bool
    complete: bool
    first_illegal_index: int | None
    collected_at_end: frozenset[int]
    actions_consumed: int


@dataclass(frozen=True)
class EquivalenceReport:
    satisfiable: bool
    completable: bool
    agree: bool
    witness_cross_checked: bool
    assignment: Assignment | None
    certificate: Certificate | None

    @property
    def ok(self) -> bool:
        return self.agree and self.witness_cross_checked


@dataclass
class TrackArrays:
    """Dense flat-array view of a track, the input format of both cores."""

    n_pads: int
    n_links: int
    start: int
    finish: int
    full_mask: int
    pad_ids: list[int]
    link_ids: list[int]
    pad_index: dict[int, int]
    link_index: dict[int, int]
    move_start: np.ndarray
    move_to: np.ndarray
    move_code: np.ndarray
    pad_cp: np.ndarray
    link_src: np.ndarray
    link_dst: np.ndarray
    link_two_way: np.ndarray
    cp_start: np.ndarray
    cp_pads: np.ndarray


def build_arrays(track: Track) -> TrackArrays:
    pad_ids = [pad.id for pad in track.pads]
    link_ids = [link.id for link in track.links]
    pad_index = {pid: i for i, pid in enumerate(pad_ids)}
    link_index = {lid: i for i, lid in enumerate(link_ids)}
    n_pads = len(pad_ids)
    n_links = len(link_ids)
    link_src = np.fromiter(
        (pad_index[l.src] for l in track.links), dtype=np.int32, count=n_links
    )
    link_dst = np.fromiter(
        (pad_index[l.dst] for l in track.links), dtype=np.int32, count=n_links
    )
    link_two_way = np.fromiter(
        (1 if l.two_way else 0 for l in track.links), dtype=np.int8, count=n_links
    )
    pad_cp = np.full(n_pads, -1, dtype=np.int32)
    for pad in track.pads:
        if pad.kind is PadKind.CHECKPOINT_TOUCH:
            pad_cp[pad_index[pad.id]] = pad.checkpoint_id
    moves: list[list[tuple[int, int]]] = [[] for _ in range(n_pads)]
    for link in track.links:
        li = link_index[link.id]
        moves[pad_index[link.src]].append((2 * li, pad_index[link.dst]))
        if link.two_way:
            moves[pad_index[link.dst]].append((2 * li + 1, pad_index[link.src]))
    move_start = np.zeros(n_pads + 1, dtype=np.int32)
    move_to = np.zeros(sum(len(m) for m in moves), dtype=np.int32)
    move_code = np.zeros(len(move_to), dtype=np.int64)
    cursor = 0
    for i, pad_moves in enumerate(moves):
        pad_moves.sort()
        move_start[i] = cursor
        for code, to in pad_moves:
            move_code[cursor] = code
            move_to[cursor] = to
            cursor += 1
    move_start[n_pads] = cursor
    n_cps = track.checkpoint_count
    cp_lists = [
        [pad_index[p] for p in track.touch_pads(cp)] for cp in range(n_cps)
    ]
    cp_start = np.zeros(n_cps + 1, dtype=np.int32)
    cp_pads = np.zeros(sum(len(c) for c in cp_lists), dtype=np.int32)
    cursor = 0
    for cp, pads in enumerate(cp_lists):
        cp_start[cp] = cursor
        for dense in sorted(pads):
            cp_pads[cursor] = dense
            cursor += 1
    cp_start[n_cps] = cursor
    return TrackArrays(
        n_pads=n_pads,
        n_links=n_links,
        start=pad_index[track.start_pad],
        finish=pad_index[track.finish_pad],
        full_mask=(1 << n_cps) - 1,
        pad_ids=pad_ids,
        link_ids=link_ids,
        pad_index=pad_index,
        link_index=link_index,
        move_start=move_start,
        move_to=move_to,
        move_code=move_code,
        pad_cp=pad_cp,
        link_src=link_src,
        link_dst=link_dst,
        link_two_way=link_two_way,
        cp_start=cp_start,
        cp_pads=cp_pads,
    )


def actions_to_codes(arrays: TrackArrays, actions: tuple[Action, ...]) -> np.ndarray:
    """Translate actions into core codes; unknown ids become out-of-range
    codes that the replay rejects as illegal."""
    codes = np.zeros(len(actions), dtype=np.int64)
    for i, action in enumerate(actions):
        if isinstance(action, Traverse):
            dense = arrays.link_index.get(action.link, arrays.n_links)
            codes[i] = 2 * dense + (1 if action.reverse else 0)
        elif isinstance(action, Respawn):
            if action.target is None:
                codes[i] = -1
            else:
                codes[i] = -2 - arrays.pad_index.get(action.target, arrays.n_pads)
        else:
            raise ValueError(f"unknown action {action!r}")
    return codes


def codes_to_actions(arrays: TrackArrays, codes) -> tuple[Action, ...]:
    actions: list[Action] = []
    for code in codes:
        code = int(code)
        if code >= 0:
            actions.append(Traverse(arrays.link_ids[code >> 1], bool(code & 1)))
        elif code == -1:
            actions.append(Respawn())
        else:
            actions.append(Respawn(arrays.pad_ids[-code - 2]))
    return tuple(actions)


def verify(
    track: Track,
    certificate: Certificate,
    policy: RespawnPolicy = RespawnPolicy.FIXED,
) -> CompletionReport:
    """Replay a certificate and report validity and completion. Linear in the
    certificate length; an illegal action is a verdict, not an error."""
    arrays = build_arrays(track)
    if track.checkpoint_count > 62:
        raise ValueError("verification supports at most 62 checkpoints")
    codes = actions_to_codes(arrays, certificate.actions)
    valid, first_illegal, end_pad, end_mask, consumed = active_core.run_actions(
        arrays.n_pads,
        arrays.n_links,
        arrays.link_src,
        arrays.link_dst,
        arrays.link_two_way,
        arrays.pad_cp,
        arrays.start,
        _POLICY_CODES[policy],
        codes,
    )
    end_mask = int(end_mask)
    collected = frozenset(cp for cp in range(track.checkpoint_count) if end_mask >> cp & 1)
    complete = bool(valid) and end_pad == arrays.finish and end_mask == arrays.full_mask
    return CompletionReport(
        valid=bool(valid),
        complete=complete,
        first_illegal_index=None if valid else int(first_illegal),
        collected_at_end=collected,
        actions_consumed=int(consumed),
    )


def solve(
    track: Track,
    policy: RespawnPolicy = RespawnPolicy.FIXED,
    max_checkpoints: int = DEFAULT_MAX_CHECKPOINTS,
    max_states: int = DEFAULT_MAX_STATES,
) -> Certificate | None:
    """Shortest completing certificate, or None when the track cannot be
    completed. Breadth-first over (pad, collected, last touch) states; ties
    break toward the smallest (link id, direction), so the result is unique
    and deterministic. Raises SolveLimitError when the track exceeds the
    checkpoint cap or the search exceeds the state bound."""
    if track.checkpoint_count > max_checkpoints:
        raise SolveLimitError(
            f"track has {track.checkpoint_count} checkpoints, solve cap is {max_checkpoints}"
        )
    if track.checkpoint_count > 20:
        raise SolveLimitError("the search core packs at most 20 checkpoints into its state")
    if len(track.pads) >= 1 << 21:
        raise SolveLimitError("the search core packs at most 2**21 pads into its state")
    arrays = build_arrays(track)
    status, codes = active_core.solve(
        arrays.n_pads,
        arrays.start,
        arrays.finish,
        arrays.full_mask,
        arrays.move_start,
        arrays.move_to,
        arrays.move_code,
        arrays.pad_cp,
        _POLICY_CODES[policy],
        arrays.cp_start,
        arrays.cp_pads,
        max_states,
    )
    if status == _pycore.OVER_LIMIT:
        raise SolveLimitError(f"state bound of {max_states} states exceeded")
    if status == _pycore.EXHAUSTED:
        return None
    return Certificate(codes_to_actions(arrays, codes))


def equivalence_check(
    formula: Formula,
    policy: RespawnPolicy = RespawnPolicy.FIXED,
    oracle_limit: int = DEFAULT_ORACLE_LIMIT,
    max_checkpoints: int = DEFAULT_MAX_CHECKPOINTS,
    max_states: int = DEFAULT_MAX_STATES,
) -> EquivalenceReport:
    """Run the oracle and the track pipeline on one formula and compare:
    satisfiable must equal completable, and a completing certificate must
    extract into an assignment that satisfies the formula."""
    witness = sat_oracle(formula, oracle_limit)
    track = compile_formula(formula)
    certificate = solve(
        track, policy=policy, max_checkpoints=max_checkpoints, max_states=max_states
    )
    completable = certificate is not None
    assignment = None
    cross_checked = True
    if certificate is not None:
        # Under lenient respawn rules a completing certificate may skip
        # variable commitments entirely; report that as a failed cross-check
        # instead of crashing, so policy divergence is visible in the report.
        try:
            assignment = extract_assignment(track, certificate, policy)
        except CertificateError:
            cross_checked = False
        else:
            cross_checked = evaluate(formula.to_ints(), assignment)
    return EquivalenceReport(
        satisfiable=witness is not None,
        completable=completable,
        agree=(witness is not None) == completable,
        witness_cross_checked=cross_checked,
        assignment=assignment,
        certificate=certificate,
    )
