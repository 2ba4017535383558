"""Abstract track model: pads joined by links, movement semantics with
checkpoint collection and respawns, and the on-disk track/certificate formats.

A track is a directed multigraph. Pads are oriented waypoints on an integer
grid; links record how a car can move between them (two_way links are
drivable both ways, one_way links are jumps or drops that cannot be climbed
back). A run is complete when every checkpoint has been collected and the car
stands on the finish pad.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator, Sequence

FORMAT_HEADER = "sat2track-format 1"


class PadKind(Enum):
    START = "start"
    FINISH = "finish"
    ROAD = "road"
    PLATFORM = "platform"
    LANDING = "landing"
    CHECKPOINT_TOUCH = "checkpoint_touch"


class LinkCause(Enum):
    ROAD = "road"
    JUMP = "jump"
    DROP = "drop"
    ACCELERATOR = "accelerator"


class RespawnPolicy(Enum):
    DISABLED = "disabled"
    FIXED = "fixed"
    ANY_TOUCH = "any_touch"


class TrackInvariantError(ValueError):
    """Raised when a track violates a structural invariant."""


class TrackFormatError(ValueError):
    """Raised for malformed track or certificate files."""


class IllegalActionError(ValueError):
    """Raised when an action is not legal in the given state."""


@dataclass(frozen=True)
class Pad:
    id: int
    x: int
    y: int
    z: int
    kind: PadKind
    checkpoint_id: int | None = None

    @property
    def position(self) -> tuple[int, int, int]:
        return (self.x, self.y, self.z)


@dataclass(frozen=True)
class Link:
    id: int
    src: int
    dst: int
    two_way: bool
    cause: LinkCause


@dataclass(frozen=True)
class Traverse:
    link: int
    reverse: bool = False


@dataclass(frozen=True)
class Respawn:
    # None means "at the last touched checkpoint" (the only form under the
    # fixed policy); a pad id picks a sibling touch pad under any_touch.
    target: int | None = None


Action = Traverse | Respawn


@dataclass(frozen=True)
class Certificate:
    actions: tuple[Action, ...]

    def __len__(self) -> int:
        return len(self.actions)

    def __iter__(self) -> Iterator[Action]:
        return iter(self.actions)


@dataclass(frozen=True)
class State:
    pad: int
    collected: frozenset[int]
    last_touch: int | None = None


@dataclass
class Track:
    pads: tuple[Pad, ...]
    links: tuple[Link, ...]
    meta: object | None = None    # reduction.ReductionMeta when compiled
    blocks: tuple | None = None   # tuple[layout.Block, ...] when laid out

    start_pad: int = field(init=False, repr=False, compare=False)
    finish_pad: int = field(init=False, repr=False, compare=False)
    checkpoint_count: int = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        self.pads = tuple(sorted(self.pads, key=lambda p: p.id))
        self.links = tuple(sorted(self.links, key=lambda l: l.id))
        self._pad_by_id = {pad.id: pad for pad in self.pads}
        if len(self._pad_by_id) != len(self.pads):
            raise TrackInvariantError("duplicate pad ids")
        self._link_by_id = {link.id: link for link in self.links}
        if len(self._link_by_id) != len(self.links):
            raise TrackInvariantError("duplicate link ids")
        for link in self.links:
            if link.src not in self._pad_by_id or link.dst not in self._pad_by_id:
                raise TrackInvariantError(f"link {link.id} references a missing pad")
        starts = [p.id for p in self.pads if p.kind is PadKind.START]
        finishes = [p.id for p in self.pads if p.kind is PadKind.FINISH]
        if len(starts) != 1 or len(finishes) != 1:
            raise TrackInvariantError(
                f"need exactly one start and one finish pad, got {len(starts)} and {len(finishes)}"
            )
        self.start_pad = starts[0]
        self.finish_pad = finishes[0]
        self._out: dict[int, list[Link]] = {pad.id: [] for pad in self.pads}
        self._in_two_way: dict[int, list[Link]] = {pad.id: [] for pad in self.pads}
        for link in self.links:
            self._out[link.src].append(link)
            if link.two_way:
                self._in_two_way[link.dst].append(link)
        self._touch_by_cp: dict[int, list[int]] = {}
        for pad in self.pads:
            if pad.kind is PadKind.CHECKPOINT_TOUCH:
                if pad.checkpoint_id is None:
                    raise TrackInvariantError(f"touch pad {pad.id} has no checkpoint id")
                self._touch_by_cp.setdefault(pad.checkpoint_id, []).append(pad.id)
            elif pad.checkpoint_id is not None:
                raise TrackInvariantError(f"non-touch pad {pad.id} carries a checkpoint id")
        self.checkpoint_count = len(self._touch_by_cp)
        self.all_checkpoints = frozenset(self._touch_by_cp)

    def pad(self, pad_id: int) -> Pad:
        try:
            return self._pad_by_id[pad_id]
        except KeyError:
            raise TrackInvariantError(f"no pad {pad_id}") from None

    def link(self, link_id: int) -> Link:
        try:
            return self._link_by_id[link_id]
        except KeyError:
            raise TrackInvariantError(f"no link {link_id}") from None

    def out_links(self, pad_id: int) -> list[Link]:
        return self._out[pad_id]

    def in_two_way_links(self, pad_id: int) -> list[Link]:
        return self._in_two_way[pad_id]

    def touch_pads(self, checkpoint_id: int) -> list[int]:
        return sorted(self._touch_by_cp.get(checkpoint_id, []))

    def initial_state(self) -> State:
        return State(self.start_pad, frozenset(), None)


def validate_track(track: Track) -> None:
    """Full structural validation beyond what Track construction enforces:
    checkpoint numbering, altitude rules per link kind, and connectivity."""
    cps = sorted(track.all_checkpoints)
    if cps != list(range(len(cps))):
        raise TrackInvariantError(f"checkpoint ids must be contiguous from 0, got {cps}")
    for link in track.links:
        src = track.pad(link.src)
        dst = track.pad(link.dst)
        if link.two_way:
            if abs(src.z - dst.z) > 1:
                raise TrackInvariantError(
                    f"two_way link {link.id} climbs {abs(src.z - dst.z)} levels"
                )
        else:
            if src.z > dst.z:
                continue
            # Aerial checkpoint exception: a jump may pass through a touch pad
            # whose altitude lies strictly between jump source and landing.
            allowed = False
            if link.cause is LinkCause.JUMP and dst.kind is PadKind.CHECKPOINT_TOUCH:
                for onward in track.out_links(dst.id):
                    if onward.two_way:
                        continue
                    landing = track.pad(onward.dst)
                    if min(src.z, landing.z) < dst.z < max(src.z, landing.z):
                        allowed = True
                        break
            if not allowed:
                raise TrackInvariantError(
                    f"one_way link {link.id} does not descend ({src.z} -> {dst.z})"
                )
    # The finish must be reachable from the start ignoring link direction;
    # directed completability is the solver's question, not a track invariant.
    seen = {track.start_pad}
    frontier = [track.start_pad]
    neighbors: dict[int, list[int]] = {pad.id: [] for pad in track.pads}
    for link in track.links:
        neighbors[link.src].append(link.dst)
        neighbors[link.dst].append(link.src)
    while frontier:
        here = frontier.pop()
        for there in neighbors[here]:
            if there not in seen:
                seen.add(there)
                frontier.append(there)
    if track.finish_pad not in seen:
        raise TrackInvariantError("finish pad is not connected to the start pad")
    if track.blocks is not None:
        from sat2track import layout

        layout.validate_blocks(track)


def _validate_state(track: Track, state: State) -> None:
    if state.pad not in track._pad_by_id:
        raise ValueError(f"state references missing pad {state.pad}")
    if not state.collected <= track.all_checkpoints:
        raise ValueError("state collected set holds unknown checkpoint ids")
    if (state.last_touch is None) != (not state.collected):
        raise ValueError("last_touch must be set exactly when collected is nonempty")
    if state.last_touch is not None:
        pad = track.pad(state.last_touch)
        if pad.kind is not PadKind.CHECKPOINT_TOUCH:
            raise ValueError(f"last_touch {state.last_touch} is not a touch pad")


def legal_actions(
    track: Track, state: State, policy: RespawnPolicy = RespawnPolicy.FIXED
) -> list[Action]:
    """All actions legal in `state`, in canonical order: traversals sorted by
    (link id, direction with forward first), then respawns by target."""
    _validate_state(track, state)
    moves: list[Action] = []
    for link in track.out_links(state.pad):
        moves.append(Traverse(link.id))
    for link in track.in_two_way_links(state.pad):
        moves.append(Traverse(link.id, reverse=True))
    moves.sort(key=lambda a: (a.link, a.reverse))
    if state.last_touch is not None and policy is not RespawnPolicy.DISABLED:
        if policy is RespawnPolicy.FIXED:
            moves.append(Respawn())
        else:
            cp = track.pad(state.last_touch).checkpoint_id
            assert cp is not None
            for target in track.touch_pads(cp):
                moves.append(Respawn(target))
    return moves


def _destination(track: Track, state: State, action: Action, policy: RespawnPolicy) -> int:
    """Destination pad of `action` from `state`, raising IllegalActionError
    when the action is not legal."""
    if isinstance(action, Traverse):
        if action.link not in track._link_by_id:
            raise IllegalActionError(f"no link {action.link}")
        link = track.link(action.link)
        if action.reverse:
            if not link.two_way:
                raise IllegalActionError(f"link {link.id} cannot be traversed in reverse")
            if link.dst != state.pad:
                raise IllegalActionError(f"link {link.id} does not end at pad {state.pad}")
            return link.src
        if link.src != state.pad:
            raise IllegalActionError(f"link {link.id} does not start at pad {state.pad}")
        return link.dst
    if isinstance(action, Respawn):
        if policy is RespawnPolicy.DISABLED:
            raise IllegalActionError("respawns are disabled")
        if state.last_touch is None:
            raise IllegalActionError("cannot respawn before touching a checkpoint")
        if action.target is None:
            return state.last_touch
        if action.target not in track._pad_by_id:
            raise IllegalActionError(f"no pad {action.target}")
        target = track.pad(action.target)
        if policy is RespawnPolicy.FIXED:
            if action.target != state.last_touch:
                raise IllegalActionError("fixed policy only respawns at the last touch pad")
            return action.target
        last_cp = track.pad(state.last_touch).checkpoint_id
        if target.kind is not PadKind.CHECKPOINT_TOUCH or target.checkpoint_id != last_cp:
            raise IllegalActionError(
                f"pad {action.target} does not share a checkpoint with the last touch"
            )
        return action.target
    raise IllegalActionError(f"unknown action {action!r}")


def step(
    track: Track, state: State, action: Action, policy: RespawnPolicy = RespawnPolicy.FIXED
) -> State:
    """Apply one action. Traversing into a touch pad collects its checkpoint
    and updates last_touch; a respawn only moves the car."""
    _validate_state(track, state)
    dest = _destination(track, state, action, policy)
    if isinstance(action, Traverse):
        pad = track.pad(dest)
        if pad.kind is PadKind.CHECKPOINT_TOUCH:
            assert pad.checkpoint_id is not None
            return State(dest, state.collected | {pad.checkpoint_id}, dest)
    return State(dest, state.collected, state.last_touch)


def is_complete(track: Track, state: State) -> bool:
    return state.pad == track.finish_pad and state.collected == track.all_checkpoints


# ==== on-disk formats ====

def to_text(track: Track) -> str:
    """Canonical track serialization: fixed line order and single spaces, so
    equal tracks serialize to identical bytes."""
    lines = [
        FORMAT_HEADER,
        f"track pads {len(track.pads)} links {len(track.links)} "
        f"checkpoints {track.checkpoint_count}",
    ]
    for pad in track.pads:
        suffix = f" cp {pad.checkpoint_id}" if pad.checkpoint_id is not None else ""
        lines.append(f"pad {pad.id} {pad.kind.value} {pad.x} {pad.y} {pad.z}{suffix}")
    for link in track.links:
        way = "two_way" if link.two_way else "one_way"
        lines.append(f"link {link.id} {link.src} {link.dst} {way} {link.cause.value}")
    if track.meta is not None:
        from sat2track import reduction

        lines.extend(reduction.meta_to_lines(track.meta))
    if track.blocks is not None:
        for block in track.blocks:
            lines.append(
                f"block {block.x} {block.y} {block.z} {block.block_type} {block.orientation}"
            )
    return "\n".join(lines) + "\n"


def from_text(text: str) -> Track:
    """Parse and validate a track file."""
    lines = text.splitlines()
    if not lines or lines[0] != FORMAT_HEADER:
        raise TrackFormatError(f"first line must be {FORMAT_HEADER!r}")
    counts: tuple[int, int, int] | None = None
    pads: list[Pad] = []
    links: list[Link] = []
    meta_lines: list[str] = []
    block_lines: list[str] = []
    for line_no, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        fields = line.split()
        tag = fields[0]
        try:
            if tag == "track":
                if counts is not None:
                    raise TrackFormatError(f"line {line_no}: duplicate track line")
                if len(fields) != 7 or fields[1] != "pads" or fields[3] != "links" \
                        or fields[5] != "checkpoints":
                    raise TrackFormatError(f"line {line_no}: malformed track line")
                counts = (int(fields[2]), int(fields[4]), int(fields[6]))
            elif tag == "pad":
                if len(fields) not in (6, 8):
                    raise TrackFormatError(f"line {line_no}: malformed pad line")
                checkpoint = None
                if len(fields) == 8:
                    if fields[6] != "cp":
                        raise TrackFormatError(f"line {line_no}: malformed pad line")
                    checkpoint = int(fields[7])
                pads.append(
                    Pad(
                        int(fields[1]),
                        int(fields[3]),
                        int(fields[4]),
                        int(fields[5]),
                        PadKind(fields[2]),
                        checkpoint,
                    )
                )
            elif tag == "link":
                if len(fields) != 6 or fields[4] not in ("one_way", "two_way"):
                    raise TrackFormatError(f"line {line_no}: malformed link line")
                links.append(
                    Link(
                        int(fields[1]),
                        int(fields[2]),
                        int(fields[3]),
                        fields[4] == "two_way",
                        LinkCause(fields[5]),
                    )
                )
            elif tag == "meta":
                meta_lines.append(line)
            elif tag == "block":
                block_lines.append(line)
            else:
                raise TrackFormatError(f"line {line_no}: unknown record {tag!r}")
        except (ValueError, IndexError) as exc:
            if isinstance(exc, TrackFormatError):
                raise
            raise TrackFormatError(f"line {line_no}: {exc}") from exc
    meta = None
    if meta_lines:
        from sat2track import reduction

        meta = reduction.meta_from_lines(meta_lines)
    blocks = None
    if block_lines:
        from sat2track import layout

        blocks = layout.blocks_from_lines(block_lines)
    try:
        result = Track(tuple(pads), tuple(links), meta=meta, blocks=blocks)
    except TrackInvariantError as exc:
        raise TrackFormatError(str(exc)) from exc
    if counts is None:
        raise TrackFormatError("missing track counts line")
    if counts != (len(result.pads), len(result.links), result.checkpoint_count):
        raise TrackFormatError(
            f"track line declares {counts}, file holds "
            f"({len(result.pads)}, {len(result.links)}, {result.checkpoint_count})"
        )
    try:
        validate_track(result)
    except TrackInvariantError as exc:
        raise TrackFormatError(str(exc)) from exc
    return result


def certificate_to_text(certificate: Certificate) -> str:
    lines = [FORMAT_HEADER]
    for action in certificate:
        if isinstance(action, Traverse):
            lines.append(f"t {action.link} {'rev' if action.reverse else 'fwd'}")
        elif isinstance(action, Respawn):
            lines.append("r" if action.target is None else f"r {action.target}")
        else:
            raise TrackFormatError(f"cannot serialize action {action!r}")
    return "\n".join(lines) + "\n"


def certificate_from_text(text: str) -> Certificate:
    lines = text.splitlines()
    if not lines or lines[0] != FORMAT_HEADER:
        raise TrackFormatError(f"first line must be {FORMAT_HEADER!r}")
    actions: list[Action] = []
    for line_no, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        fields = line.split()
        if fields[0] == "t" and len(fields) == 3 and fields[2] in ("fwd", "rev"):
            try:
                actions.append(Traverse(int(fields[1]), fields[2] == "rev"))
            except ValueError as exc:
                raise TrackFormatError(f"line {line_no}: {exc}") from exc
        elif fields[0] == "r" and len(fields) in (1, 2):
            try:
                actions.append(Respawn(int(fields[1]) if len(fields) == 2 else None))
            except ValueError as exc:
                raise TrackFormatError(f"line {line_no}: {exc}") from exc
        else:
            raise TrackFormatError(f"line {line_no}: malformed action line {line!r}")
    return Certificate(tuple(actions))
