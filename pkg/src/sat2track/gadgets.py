"""Reusable track fragments with named ports.

Each constructor returns a self-contained bundle of pads and links at caller
supplied id offsets. The variable gadget realizes an exclusive two-way choice,
the clause gadget an aerial checkpoint reachable from three entries, the
crossover two independent paths sharing one grid cell at different altitudes.
The broken accelerator gadget is kept as a regression exhibit: its two arms
are meant to be one-way but accelerator links are drivable both ways, so the
choice it encodes leaks.
"""
from __future__ import annotations

from dataclasses import dataclass

from sat2track.track import Link, LinkCause, Pad, PadKind

# Altitude raises relative to a gadget's base (landing) level.
ENTRY_RISE = 3   # entry platforms sit 3 above their landings
TOUCH_RISE = 2   # aerial checkpoints sit 2 above their exits
CROSS_RISE = 2   # the upper crossover path clears the lower by 2

# Grid offsets from the gadget base, shared with the layout pass.
VARIABLE_OFFSETS = {
    "entry": (0, 0, ENTRY_RISE),
    "true_exit": (4, 4, 0),
    "false_exit": (8, 4, 0),
}

DEFAULT_PAIRING = (2, 1, 0)


class GadgetError(ValueError):
    """Raised for invalid gadget parameters."""


@dataclass(frozen=True)
class Port:
    name: str
    pad: int


@dataclass(frozen=True)
class GadgetInstance:
    kind: str
    pads: tuple[Pad, ...]
    links: tuple[Link, ...]
    ports: tuple[Port, ...]

    def port(self, name: str) -> int:
        for port in self.ports:
            if port.name == name:
                return port.pad
        raise KeyError(f"{self.kind} gadget has no port {name!r}")


def clause_offsets(slot: int) -> dict[str, tuple[int, int, int]]:
    """Grid offsets of one clause slot's pads from the clause base."""
    return {
        "entry": (16 + 4 * slot, 4 * slot, ENTRY_RISE),
        "touch": (12, 4 * slot, TOUCH_RISE),
        "exit": (4 * slot, 4 * slot, 0),
    }


def _pad_at(pad_id: int, base: tuple[int, int, int], offset: tuple[int, int, int],
            kind: PadKind, checkpoint_id: int | None = None) -> Pad:
    return Pad(
        pad_id,
        base[0] + offset[0],
        base[1] + offset[1],
        base[2] + offset[2],
        kind,
        checkpoint_id,
    )


def variable_gadget(
    base: tuple[int, int, int], *, pad_base: int = 0, link_base: int = 0
) -> GadgetInstance:
    """Exclusive choice: jumps from one entry platform to two landings.

    Landings cannot be left upward again (jumps are one_way), so committing to
    one arm forecloses the other.
    """
    entry = _pad_at(pad_base, base, VARIABLE_OFFSETS["entry"], PadKind.PLATFORM)
    true_exit = _pad_at(pad_base + 1, base, VARIABLE_OFFSETS["true_exit"], PadKind.LANDING)
    false_exit = _pad_at(pad_base + 2, base, VARIABLE_OFFSETS["false_exit"], PadKind.LANDING)
    links = (
        Link(link_base, entry.id, true_exit.id, False, LinkCause.JUMP),
        Link(link_base + 1, entry.id, false_exit.id, False, LinkCause.JUMP),
    )
    ports = (
        Port("entry", entry.id),
        Port("true_exit", true_exit.id),
        Port("false_exit", false_exit.id),
    )
    return GadgetInstance("variable", (entry, true_exit, false_exit), links, ports)


def clause_gadget(
    base: tuple[int, int, int],
    pairing: tuple[int, int, int] = DEFAULT_PAIRING,
    *,
    checkpoint_id: int = 0,
    pad_base: int = 0,
    link_base: int = 0,
) -> GadgetInstance:
    """One aerial checkpoint per literal slot: entry platforms jump through a
    touch pad and drop onto the exit given by `pairing` (slot -> exit index).

    All three touch pads share the clause's checkpoint id, so collecting any
    one of them satisfies the clause.
    """
    if sorted(pairing) != [0, 1, 2]:
        raise GadgetError(f"pairing must permute (0, 1, 2), got {pairing}")
    entries = []
    touches = []
    exits = []
    for slot in range(3):
        offsets = clause_offsets(slot)
        entries.append(_pad_at(pad_base + slot, base, offsets["entry"], PadKind.PLATFORM))
        touches.append(
            _pad_at(
                pad_base + 3 + slot, base, offsets["touch"],
                PadKind.CHECKPOINT_TOUCH, checkpoint_id,
            )
        )
        exits.append(_pad_at(pad_base + 6 + slot, base, offsets["exit"], PadKind.LANDING))
    links = []
    for slot in range(3):
        links.append(
            Link(link_base + 2 * slot, entries[slot].id, touches[slot].id, False, LinkCause.JUMP)
        )
        links.append(
            Link(
                link_base + 2 * slot + 1,
                touches[slot].id,
                exits[pairing[slot]].id,
                False,
                LinkCause.DROP,
            )
        )
    ports = tuple(
        [Port(f"entry_{s}", entries[s].id) for s in range(3)]
        + [Port(f"touch_{s}", touches[s].id) for s in range(3)]
        + [Port(f"exit_{s}", exits[s].id) for s in range(3)]
    )
    return GadgetInstance(
        "clause", tuple(entries + touches + exits), tuple(links), ports
    )


def crossover_gadget(
    base: tuple[int, int, int], *, pad_base: int = 0, link_base: int = 0
) -> GadgetInstance:
    """Two independent two-way paths sharing exactly one plan-view cell: the
    over path runs along x at base z + 2, the under path along y at base z."""
    x, y, z = base
    over = (
        Pad(pad_base, x - 1, y, z + CROSS_RISE, PadKind.ROAD),
        Pad(pad_base + 1, x, y, z + CROSS_RISE, PadKind.ROAD),
        Pad(pad_base + 2, x + 1, y, z + CROSS_RISE, PadKind.ROAD),
    )
    under = (
        Pad(pad_base + 3, x, y - 1, z, PadKind.ROAD),
        Pad(pad_base + 4, x, y, z, PadKind.ROAD),
        Pad(pad_base + 5, x, y + 1, z, PadKind.ROAD),
    )
    links = (
        Link(link_base, over[0].id, over[1].id, True, LinkCause.ROAD),
        Link(link_base + 1, over[1].id, over[2].id, True, LinkCause.ROAD),
        Link(link_base + 2, under[0].id, under[1].id, True, LinkCause.ROAD),
        Link(link_base + 3, under[1].id, under[2].id, True, LinkCause.ROAD),
    )
    ports = (
        Port("over_in", over[0].id),
        Port("over_out", over[2].id),
        Port("under_in", under[0].id),
        Port("under_out", under[2].id),
    )
    return GadgetInstance("crossover", over + under, links, ports)


def broken_accelerator_gadget(
    base: tuple[int, int, int], *, runs: int = 3, pad_base: int = 0, link_base: int = 0
) -> GadgetInstance:
    """A would-be choice built from accelerator runs. Accelerator links are
    two_way, so both arms can be driven back to the fork and into the other
    arm: the exclusivity a variable needs does not hold."""
    if runs < 2:
        raise GadgetError(f"each arm needs at least 2 accelerator links, got {runs}")
    x, y, z = base
    fork = Pad(pad_base, x, y, z, PadKind.ROAD)
    pads = [fork]
    links = []
    next_pad = pad_base + 1
    next_link = link_base
    arm_ends = []
    for direction in (1, -1):
        prev = fork.id
        for i in range(1, runs + 1):
            pad = Pad(next_pad, x + direction * i, y, z, PadKind.ROAD)
            pads.append(pad)
            links.append(Link(next_link, prev, pad.id, True, LinkCause.ACCELERATOR))
            prev = pad.id
            next_pad += 1
            next_link += 1
        arm_ends.append(prev)
    ports = (
        Port("entry", fork.id),
        Port("true_exit", arm_ends[0]),
        Port("false_exit", arm_ends[1]),
    )
    return GadgetInstance("broken_accelerator", tuple(pads), tuple(links), ports)


def wire(
    src: Pad,
    dst: Pad,
    waypoints: tuple[tuple[int, int, int], ...] = (),
    *,
    pad_base: int = 0,
    link_base: int = 0,
    cause: LinkCause = LinkCause.ROAD,
) -> GadgetInstance:
    """Two-way road chain joining two existing pads through fresh waypoint
    pads: L waypoints become L fresh pads and L+1 links; no waypoints means a
    single direct link. Consecutive waypoints must be one grid step apart and
    every link may climb at most one level."""
    for a, b in zip(waypoints, waypoints[1:]):
        if abs(a[0] - b[0]) + abs(a[1] - b[1]) != 1 or abs(a[2] - b[2]) > 1:
            raise GadgetError(f"waypoints {a} and {b} are not one grid step apart")
    pads = tuple(
        Pad(pad_base + i, wx, wy, wz, PadKind.ROAD)
        for i, (wx, wy, wz) in enumerate(waypoints)
    )
    stops = [src, *pads, dst]
    links = []
    for i, (a, b) in enumerate(zip(stops, stops[1:])):
        if abs(a.z - b.z) > 1:
            raise GadgetError(f"wire link {a.id} -> {b.id} climbs more than one level")
        links.append(Link(link_base + i, a.id, b.id, True, cause))
    ports = (Port("a", src.id), Port("b", dst.id))
    return GadgetInstance("wire", pads, tuple(links), ports)
