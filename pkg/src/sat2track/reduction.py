"""Compile exactly-3-CNF formulas into tracks whose checkpoints are clauses.

Construction: variable gadgets are chained along a bus from start to finish.
Each variable's entry forces one of two jumps (true/false). The chosen arm
drives through the clause gadgets of the literals it asserts, collecting each
clause's checkpoint, then both arms drop onto a shared merge pad that climbs
back up to the next variable's entry. A run can therefore reach the finish
only by committing every variable once, and can have collected checkpoint j
only if some committed literal satisfies clause j, so complete runs and
satisfying assignments translate into each other.
"""
from __future__ import annotations

from dataclasses import dataclass

from sat2track.cnf import Assignment, Formula
from sat2track.gadgets import DEFAULT_PAIRING, clause_gadget, variable_gadget
from sat2track.track import (
    Certificate,
    IllegalActionError,
    Link,
    LinkCause,
    Pad,
    PadKind,
    RespawnPolicy,
    Track,
    Traverse,
)

# Altitudes of the compiled construction. Gadget bases sit at road level, so
# entry platforms land at MERGE + 4 and aerial touch pads at MERGE + 3.
Z_MERGE = 0
Z_ROAD = 1
Z_TOP = Z_ROAD + 3

# Exact size accounting of the construction, asserted by the test suite.
PADS_PER_VARIABLE = 9
PADS_PER_CLAUSE = 15
PADS_CONSTANT = 2
LINKS_PER_VARIABLE = 10
LINKS_PER_CLAUSE = 15
LINKS_CONSTANT = 1


class ReductionError(ValueError):
    """Raised when a track is not a usable compiler output."""


class CertificateError(ValueError):
    """Raised when a certificate cannot be translated into an assignment."""


@dataclass(frozen=True)
class VariableMeta:
    variable: int
    entry: int
    true_landing: int
    false_landing: int
    merge: int


@dataclass(frozen=True)
class SlotMeta:
    clause: int
    slot: int
    literal: int
    entry: int
    touch: int
    exit: int  # the exit pad the slot's branch continues from


@dataclass(frozen=True)
class ClauseMeta:
    index: int
    checkpoint: int
    slots: tuple[SlotMeta, SlotMeta, SlotMeta]


@dataclass(frozen=True)
class OccurrenceMeta:
    literal: int
    slots: tuple[tuple[int, int], ...]  # (clause index, slot index) in clause order


@dataclass(frozen=True)
class ReductionMeta:
    num_variables: int
    num_clauses: int
    variables: tuple[VariableMeta, ...]
    clauses: tuple[ClauseMeta, ...]
    occurrences: tuple[OccurrenceMeta, ...]


@dataclass(frozen=True)
class BranchWire:
    """One road chain of a variable arm: from a landing or a clause exit,
    through optional climb pads, to the next clause entry or the arm's
    pre-merge pad (slot is None for that final chain)."""

    variable: int
    positive: bool
    src: int
    interior: tuple[int, ...]
    dst: int
    slot: tuple[int, int] | None


def require_meta(track: Track) -> ReductionMeta:
    if not isinstance(track.meta, ReductionMeta):
        raise ReductionError("track carries no reduction metadata")
    return track.meta


def compile_formula(formula: Formula) -> Track:
    """Build the track for an exactly-3-CNF formula."""
    n = formula.num_variables
    m = len(formula.clauses)
    pads: list[Pad] = []
    links: list[Link] = []

    def add_pad(x: int, y: int, z: int, kind: PadKind, checkpoint: int | None = None) -> int:
        pads.append(Pad(len(pads), x, y, z, kind, checkpoint))
        return len(pads) - 1

    def add_link(src: int, dst: int, two_way: bool, cause: LinkCause) -> int:
        links.append(Link(len(links), src, dst, two_way, cause))
        return len(links) - 1

    start = add_pad(-8, 0, Z_TOP, PadKind.START)
    variables: list[VariableMeta] = []
    for i in range(1, n + 1):
        base = (32 * (i - 1), 0, Z_ROAD)
        gadget = variable_gadget(base, pad_base=len(pads), link_base=len(links))
        pads.extend(gadget.pads)
        links.extend(gadget.links)
        merge = add_pad(base[0] + 20, 0, Z_MERGE, PadKind.ROAD)
        variables.append(
            VariableMeta(
                i,
                gadget.port("entry"),
                gadget.port("true_exit"),
                gadget.port("false_exit"),
                merge,
            )
        )

    clauses: list[ClauseMeta] = []
    for j, clause in enumerate(formula.clauses):
        base = (32 * n + 32 * j, 100, Z_ROAD)
        gadget = clause_gadget(
            base, DEFAULT_PAIRING, checkpoint_id=j, pad_base=len(pads), link_base=len(links)
        )
        pads.extend(gadget.pads)
        links.extend(gadget.links)
        slots = tuple(
            SlotMeta(
                j,
                s,
                clause.literals[s].to_int(),
                gadget.port(f"entry_{s}"),
                gadget.port(f"touch_{s}"),
                gadget.port(f"exit_{DEFAULT_PAIRING[s]}"),
            )
            for s in range(3)
        )
        clauses.append(ClauseMeta(j, j, slots))  # type: ignore[arg-type]

    finish = add_pad(32 * n, 0, Z_TOP, PadKind.FINISH)

    occurrences: list[OccurrenceMeta] = []
    occ_slots: dict[int, list[tuple[int, int]]] = {}
    for j, clause in enumerate(formula.clauses):
        for s, literal in enumerate(clause.literals):
            occ_slots.setdefault(literal.to_int(), []).append((j, s))
    for i in range(1, n + 1):
        for literal in (i, -i):
            occurrences.append(OccurrenceMeta(literal, tuple(occ_slots.get(literal, []))))

    add_link(start, variables[0].entry if n else finish, True, LinkCause.ROAD)
    pad_xy = {pad.id: (pad.x, pad.y) for pad in pads}
    for i, var in enumerate(variables):
        for positive in (True, False):
            cursor = var.true_landing if positive else var.false_landing
            for j, s in occ_slots.get(var.variable if positive else -var.variable, []):
                slot = clauses[j].slots[s]
                ex, ey = pad_xy[slot.entry]
                climb2 = add_pad(ex, ey - 2, Z_ROAD + 1, PadKind.ROAD)
                climb3 = add_pad(ex, ey - 1, Z_ROAD + 2, PadKind.ROAD)
                add_link(cursor, climb2, True, LinkCause.ROAD)
                add_link(climb2, climb3, True, LinkCause.ROAD)
                add_link(climb3, slot.entry, True, LinkCause.ROAD)
                cursor = slot.exit
            pre = add_pad(
                32 * i + (12 if positive else 16), 2, Z_ROAD, PadKind.ROAD
            )
            add_link(cursor, pre, True, LinkCause.ROAD)
            add_link(pre, var.merge, False, LinkCause.DROP)
        mx = pad_xy[var.merge][0]
        rungs = [add_pad(mx + 2 + k, 0, Z_MERGE + 1 + k, PadKind.ROAD) for k in range(3)]
        after = variables[i + 1].entry if i + 1 < n else finish
        add_link(var.merge, rungs[0], True, LinkCause.ROAD)
        add_link(rungs[0], rungs[1], True, LinkCause.ROAD)
        add_link(rungs[1], rungs[2], True, LinkCause.ROAD)
        add_link(rungs[2], after, True, LinkCause.ROAD)

    meta = ReductionMeta(n, m, tuple(variables), tuple(clauses), tuple(occurrences))
    track = Track(tuple(pads), tuple(links), meta=meta)
    assert len(track.pads) == PADS_PER_VARIABLE * n + PADS_PER_CLAUSE * m + PADS_CONSTANT
    assert len(track.links) == LINKS_PER_VARIABLE * n + LINKS_PER_CLAUSE * m + LINKS_CONSTANT
    return track


class MetaIndex:
    """Lookup tables over reduction metadata."""

    def __init__(self, track: Track):
        meta = require_meta(track)
        self.meta = meta
        self.entry_variable = {var.entry: var for var in meta.variables}
        self.slot_by_entry: dict[int, SlotMeta] = {}
        for clause in meta.clauses:
            for slot in clause.slots:
                self.slot_by_entry[slot.entry] = slot
        self.jump_choice: dict[int, tuple[int, bool]] = {}
        for var in meta.variables:
            jumps = [l for l in track.out_links(var.entry) if l.cause is LinkCause.JUMP]
            if sorted(l.dst for l in jumps) != sorted((var.true_landing, var.false_landing)):
                raise ReductionError(f"variable {var.variable} entry jumps are malformed")
            for link in jumps:
                self.jump_choice[link.id] = (var.variable, link.dst == var.true_landing)


def branch_wires(track: Track) -> list[BranchWire]:
    """Wire chains of every variable arm, walked from the track graph in
    canonical order (variables ascending, true arm first, clause order)."""
    meta = require_meta(track)
    index = MetaIndex(track)
    wires: list[BranchWire] = []
    for var in meta.variables:
        for positive in (True, False):
            src = var.true_landing if positive else var.false_landing
            cursor = src
            interior: list[int] = []
            for _ in range(len(track.links) + 1):
                outs = track.out_links(cursor)
                if len(outs) != 1 or not outs[0].two_way:
                    raise ReductionError(f"pad {cursor} is not on a simple arm chain")
                nxt = outs[0].dst
                slot = index.slot_by_entry.get(nxt)
                if slot is not None:
                    wires.append(
                        BranchWire(
                            var.variable, positive, src, tuple(interior), nxt,
                            (slot.clause, slot.slot),
                        )
                    )
                    src = cursor = slot.exit
                    interior = []
                    continue
                nxt_outs = track.out_links(nxt)
                if len(nxt_outs) == 1 and not nxt_outs[0].two_way:
                    drop = nxt_outs[0]
                    if drop.dst != var.merge or drop.cause is not LinkCause.DROP:
                        raise ReductionError(f"arm of variable {var.variable} ends badly")
                    wires.append(
                        BranchWire(var.variable, positive, src, tuple(interior), nxt, None)
                    )
                    break
                interior.append(nxt)
                cursor = nxt
            else:
                raise ReductionError("arm walk did not terminate")
    return wires


def chain_interior(track: Track, src: int, dst: int) -> tuple[int, ...]:
    """Interior pads of the unique forward road chain from src to dst."""
    cursor = src
    interior: list[int] = []
    for _ in range(len(track.links) + 1):
        outs = track.out_links(cursor)
        if len(outs) != 1 or not outs[0].two_way:
            raise ReductionError(f"pad {cursor} is not on a simple chain")
        cursor = outs[0].dst
        if cursor == dst:
            return tuple(interior)
        interior.append(cursor)
    raise ReductionError(f"no simple chain from {src} to {dst}")


def bus_chains(track: Track) -> list[tuple[int, tuple[int, ...], int]]:
    """The spine chains: start to first entry, then each merge pad up to the
    next entry (or the finish), as (src, interior pads, dst) triples."""
    meta = require_meta(track)
    stops = [var.entry for var in meta.variables] + [track.finish_pad]
    sources = [track.start_pad] + [var.merge for var in meta.variables]
    return [
        (src, chain_interior(track, src, dst), dst)
        for src, dst in zip(sources, stops)
    ]


def assignment_to_certificate(track: Track, assignment: Assignment) -> Certificate:
    """Certificate that drives the run prescribed by a (total) assignment:
    at each variable entry take the jump matching the assigned value, then
    follow the forced chain. Collects every checkpoint whose clause the
    assignment satisfies; it completes the track iff the assignment does."""
    meta = require_meta(track)
    index = MetaIndex(track)
    if len(assignment.values) != meta.num_variables:
        raise ReductionError(
            f"assignment covers {len(assignment.values)} variables, "
            f"track encodes {meta.num_variables}"
        )
    actions: list[Traverse] = []
    pad = track.start_pad
    for _ in range(len(track.links) + 1):
        if pad == track.finish_pad:
            return Certificate(tuple(actions))
        var = index.entry_variable.get(pad)
        if var is not None:
            wanted = var.true_landing if assignment.value(var.variable) else var.false_landing
            link = next(l for l in track.out_links(pad) if l.dst == wanted)
        else:
            outs = track.out_links(pad)
            if len(outs) != 1:
                raise ReductionError(f"pad {pad} is not on a forced chain")
            link = outs[0]
        actions.append(Traverse(link.id))
        pad = link.dst
    raise ReductionError("walk did not reach the finish")


def extract_assignment(
    track: Track,
    certificate: Certificate,
    policy: RespawnPolicy = RespawnPolicy.FIXED,
) -> Assignment:
    """Read the assignment off a completing certificate: each variable's value
    is the arm of its first entry jump. Raises CertificateError when the
    certificate is illegal or does not complete the track."""
    from sat2track.track import is_complete, step

    meta = require_meta(track)
    index = MetaIndex(track)
    state = track.initial_state()
    choices: dict[int, bool] = {}
    for position, action in enumerate(certificate):
        try:
            state = step(track, state, action, policy)
        except IllegalActionError as exc:
            raise CertificateError(f"action {position}: {exc}") from exc
        if isinstance(action, Traverse) and not action.reverse:
            choice = index.jump_choice.get(action.link)
            if choice is not None and choice[0] not in choices:
                choices[choice[0]] = choice[1]
    if not is_complete(track, state):
        raise CertificateError("certificate does not complete the track")
    missing = [v for v in range(1, meta.num_variables + 1) if v not in choices]
    if missing:
        raise CertificateError(f"certificate never commits variable(s) {missing}")
    return Assignment(tuple(choices[v] for v in range(1, meta.num_variables + 1)))


# ==== metadata serialization ====

def meta_to_lines(meta: ReductionMeta) -> list[str]:
    lines = [f"meta formula vars {meta.num_variables} clauses {meta.num_clauses}"]
    for var in meta.variables:
        lines.append(
            f"meta var {var.variable} entry {var.entry} true {var.true_landing} "
            f"false {var.false_landing} merge {var.merge}"
        )
    for clause in meta.clauses:
        for slot in clause.slots:
            lines.append(
                f"meta clause {clause.index} checkpoint {clause.checkpoint} "
                f"slot {slot.slot} literal {slot.literal} entry {slot.entry} "
                f"touch {slot.touch} exit {slot.exit}"
            )
    for occ in meta.occurrences:
        slots = " ".join(f"{j}.{s}" for j, s in occ.slots)
        lines.append(f"meta occurrence literal {occ.literal} slots{' ' + slots if slots else ''}")
    return lines


def meta_from_lines(lines: list[str]) -> ReductionMeta:
    from sat2track.track import TrackFormatError

    header: tuple[int, int] | None = None
    variables: list[VariableMeta] = []
    clause_rows: dict[int, dict[int, SlotMeta]] = {}
    clause_checkpoints: dict[int, int] = {}
    occurrences: list[OccurrenceMeta] = []
    for line in lines:
        fields = line.split()
        try:
            if fields[:2] == ["meta", "formula"]:
                if header is not None or fields[2] != "vars" or fields[4] != "clauses":
                    raise TrackFormatError(f"malformed meta line {line!r}")
                header = (int(fields[3]), int(fields[5]))
            elif fields[:2] == ["meta", "var"]:
                if len(fields) != 11 or fields[3] != "entry" or fields[5] != "true" \
                        or fields[7] != "false" or fields[9] != "merge":
                    raise TrackFormatError(f"malformed meta line {line!r}")
                variables.append(
                    VariableMeta(
                        int(fields[2]), int(fields[4]), int(fields[6]),
                        int(fields[8]), int(fields[10]),
                    )
                )
            elif fields[:2] == ["meta", "clause"]:
                if len(fields) != 15 or fields[3] != "checkpoint" or fields[5] != "slot" \
                        or fields[7] != "literal" or fields[9] != "entry" \
                        or fields[11] != "touch" or fields[13] != "exit":
                    raise TrackFormatError(f"malformed meta line {line!r}")
                index = int(fields[2])
                slot = SlotMeta(
                    index, int(fields[6]), int(fields[8]), int(fields[10]),
                    int(fields[12]), int(fields[14]),
                )
                previous = clause_checkpoints.setdefault(index, int(fields[4]))
                if previous != int(fields[4]):
                    raise TrackFormatError(f"clause {index} has conflicting checkpoints")
                if slot.slot in clause_rows.setdefault(index, {}):
                    raise TrackFormatError(f"duplicate slot {slot.slot} of clause {index}")
                clause_rows[index][slot.slot] = slot
            elif fields[:2] == ["meta", "occurrence"]:
                if fields[2] != "literal" or fields[4] != "slots":
                    raise TrackFormatError(f"malformed meta line {line!r}")
                slots = []
                for token in fields[5:]:
                    j, _, s = token.partition(".")
                    slots.append((int(j), int(s)))
                occurrences.append(OccurrenceMeta(int(fields[3]), tuple(slots)))
            else:
                raise TrackFormatError(f"unknown meta line {line!r}")
        except (ValueError, IndexError) as exc:
            if isinstance(exc, TrackFormatError):
                raise
            raise TrackFormatError(f"malformed meta line {line!r}") from exc
    if header is None:
        raise TrackFormatError("missing 'meta formula' line")
    n, m = header
    if [v.variable for v in variables] != list(range(1, n + 1)):
        raise TrackFormatError("meta var lines do not cover variables 1..n")
    if sorted(clause_rows) != list(range(m)):
        raise TrackFormatError("meta clause lines do not cover clauses 0..m-1")
    clauses = []
    for j in range(m):
        if sorted(clause_rows[j]) != [0, 1, 2]:
            raise TrackFormatError(f"clause {j} does not define slots 0..2")
        clauses.append(
            ClauseMeta(j, clause_checkpoints[j], tuple(clause_rows[j][s] for s in range(3)))
        )
    expected = [lit for v in range(1, n + 1) for lit in (v, -v)]
    if [occ.literal for occ in occurrences] != expected:
        raise TrackFormatError("meta occurrence lines do not cover every literal once")
    return ReductionMeta(n, m, tuple(variables), tuple(clauses), tuple(occurrences))
