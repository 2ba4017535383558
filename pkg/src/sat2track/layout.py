"""Geometric realization of compiled tracks on the unit-block grid.

The comb layout puts all variable gadgets on one west-east spine row, all
clause gadgets on a north row, and routes every variable-arm wire through its
own horizontal lane in the band between them: south to its lane, east or west
along the lane, then north into a clause entry (or back south into the arm's
pre-merge pad). Wires cross only where a vertical of one meets the lane of
another; there the later wire climbs over the earlier on a two-level hump
flanked by barriers, so the paths stay disjoint. Every pad keeps its id and
altitude but moves to its comb position; the result carries the full block
list of the drivable surface.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, NamedTuple

from sat2track import reduction
from sat2track.gadgets import CROSS_RISE, VARIABLE_OFFSETS, clause_offsets
from sat2track.track import (
    Pad,
    Track,
    TrackFormatError,
    TrackInvariantError,
    validate_track,
)

# ==== grid constants ====

X0 = 8              # x of the first variable entry; the start pad sits 4 west
VAR_PITCH = 28      # western edge spacing of consecutive variable columns
CLAUSE_PITCH = 32   # spacing of consecutive clause boxes
CLAUSE_MARGIN = 16  # gap between the spine's east end and the first clause box
LANE_Y0 = 12        # y of the first wire lane
LANE_PITCH = 6      # spacing between wire lanes
BAND_CLEARANCE = 8  # gap between the last lane and the clause row

BLOCK_TYPES = frozenset(
    {
        "road_straight",
        "road_curve",
        "platform",
        "ramp",
        "checkpoint_aerial",
        "start",
        "finish",
        "barrier",
        "accelerator",
    }
)
ORIENTATIONS = ("N", "E", "S", "W")
_DIR_TO_ORIENT = {(0, 1): "N", (1, 0): "E", (0, -1): "S", (-1, 0): "W"}
_OPPOSITE = {"N": "S", "E": "W", "S": "N", "W": "E"}


class LayoutError(ValueError):
    """Raised when a track cannot be laid out or its blocks are inconsistent."""


class Block(NamedTuple):
    x: int
    y: int
    z: int          # base altitude; a ramp rises from z to z + 1
    block_type: str
    orientation: str  # for ramps: the ascending direction


@dataclass(frozen=True)
class WireRoute:
    """Plan-view route of one arm wire: down/up the source column to the
    lane, along the lane, then up/down the destination column."""

    index: int
    src_col: int
    src_y: int   # y of the source pad cell (route starts one step toward the lane)
    dst_col: int
    dst_y: int   # y of the destination pad cell
    lane: int

    def segments(self) -> list[tuple[str, int, int, int]]:
        """('v', x, y_lo, y_hi) and ('h', y, x_lo, x_hi) spans of the route,
        endpoints inclusive, corners included in the verticals."""
        return [
            ("v", self.src_col, *sorted((self.src_y, self.lane))),
            ("h", self.lane, *sorted((self.src_col, self.dst_col))),
            ("v", self.dst_col, *sorted((self.lane, self.dst_y))),
        ]


def proper_crossings(a: WireRoute, b: WireRoute) -> list[tuple[int, int]]:
    """Cells where the two routes properly cross (interior of a vertical of
    one against the interior of the horizontal of the other)."""
    cells = []
    for first, second in ((a, b), (b, a)):
        _, lane, x_lo, x_hi = first.segments()[1]
        for kind, x, y_lo, y_hi in second.segments():
            if kind == "v" and x_lo < x < x_hi and y_lo < lane < y_hi:
                cells.append((x, lane))
    return cells


def layout_comb(track: Track) -> Track:
    """Lay out a compiled track; returns a new track with repositioned pads
    and the block list. The abstract graph (ids, links, meta) is unchanged."""
    meta = reduction.require_meta(track)
    n = meta.num_variables
    wires = reduction.branch_wires(track)
    spine = reduction.bus_chains(track)

    # -- pad positions --
    position: dict[int, tuple[int, int, int]] = {}
    var_x = {var.variable: X0 + VAR_PITCH * (var.variable - 1) for var in meta.variables}
    position[track.start_pad] = (X0 - 4, 0, reduction.Z_TOP)
    position[track.finish_pad] = (X0 + VAR_PITCH * n, 0, reduction.Z_TOP)
    for var in meta.variables:
        bx = var_x[var.variable]
        for port, pad in (
            ("entry", var.entry),
            ("true_exit", var.true_landing),
            ("false_exit", var.false_landing),
        ):
            ox, oy, oz = VARIABLE_OFFSETS[port]
            position[pad] = (bx + ox, oy, reduction.Z_ROAD + oz)
        position[var.merge] = (bx + 20, 0, reduction.Z_MERGE)
    for src, interior, dst in spine:
        if len(interior) not in (0, 3):
            raise LayoutError("spine chains must hold exactly the three merge rungs")
        mx = position[src][0]
        for k, pad in enumerate(interior):
            position[pad] = (mx + 2 + k, 0, reduction.Z_MERGE + 1 + k)

    lane_count = len(wires)
    clause_y = LANE_Y0 + LANE_PITCH * lane_count + BAND_CLEARANCE
    clause_x0 = X0 + VAR_PITCH * n + CLAUSE_MARGIN
    for clause in meta.clauses:
        base = (clause_x0 + CLAUSE_PITCH * clause.index, clause_y, reduction.Z_ROAD)
        for slot in clause.slots:
            offsets = clause_offsets(slot.slot)
            for name, pad in (("entry", slot.entry), ("touch", slot.touch), ("exit", slot.exit)):
                ox, oy, oz = offsets[name]
                position[pad] = (base[0] + ox, base[1] + oy, base[2] + oz)

    for wire in wires:
        if wire.slot is not None:
            ex, ey, _ = position[wire.dst]  # the entry it climbs into, placed above
            if len(wire.interior) != 2:
                raise LayoutError("clause approach wires must hold exactly two climb pads")
            position[wire.interior[0]] = (ex, ey - 2, reduction.Z_ROAD + 1)
            position[wire.interior[1]] = (ex, ey - 1, reduction.Z_ROAD + 2)
        else:
            if wire.interior:
                raise LayoutError("pre-merge wires must be direct")
            bx = var_x[wire.variable]
            position[wire.dst] = (bx + (12 if wire.positive else 16), 2, reduction.Z_ROAD)

    missing = {pad.id for pad in track.pads} - set(position)
    if missing:
        raise LayoutError(f"pads {sorted(missing)} not covered by the comb plan")

    # -- wire routes --
    routes: list[WireRoute] = []
    for index, wire in enumerate(wires):
        sx, sy, _ = position[wire.src]
        dx, dy, _ = position[wire.dst]
        routes.append(
            WireRoute(index, sx, sy, dx, dy, LANE_Y0 + LANE_PITCH * index)
        )

    # -- crossings: the later wire goes over --
    over_cells: dict[int, set[tuple[int, int]]] = {r.index: set() for r in routes}
    under_cells: dict[int, set[tuple[int, int]]] = {r.index: set() for r in routes}
    crossing_cells: set[tuple[int, int]] = set()
    for i, a in enumerate(routes):
        for b in routes[i + 1 :]:
            for cell in proper_crossings(a, b):
                if cell in crossing_cells:
                    raise LayoutError(f"three wires meet at {cell}")
                crossing_cells.add(cell)
                over_cells[b.index].add(cell)
                under_cells[a.index].add(cell)

    # -- block emission --
    grid: dict[tuple[int, int, int], Block] = {}

    def put(x: int, y: int, z: int, block_type: str, orientation: str) -> None:
        key = (x, y, z)
        if key in grid:
            raise LayoutError(f"two blocks at cell {key}: {grid[key]} and {block_type}")
        grid[key] = Block(x, y, z, block_type, orientation)

    def put_run(x0: int, x1: int, y: int, z: int) -> None:
        for x in range(x0, x1 + 1):
            put(x, y, z, "road_straight", "E")

    # spine row
    sxp, syp, szp = position[track.start_pad]
    put(sxp, syp, szp, "start", "E")
    put_run(sxp + 1, X0 - 1, 0, reduction.Z_TOP)
    fxp, fyp, fzp = position[track.finish_pad]
    put(fxp, fyp, fzp, "finish", "E")
    for var in meta.variables:
        bx = var_x[var.variable]
        put(bx, 0, reduction.Z_TOP, "platform", "N")
        put(bx + 4, 4, reduction.Z_ROAD, "platform", "N")
        put(bx + 8, 4, reduction.Z_ROAD, "platform", "N")
        put(bx + 20, 0, reduction.Z_MERGE, "road_straight", "E")
        for k in range(4):
            put(bx + 21 + k, 0, reduction.Z_MERGE + k, "ramp", "E")
        put_run(bx + 25, bx + 27, 0, reduction.Z_TOP)
    for wire in wires:
        if wire.slot is None:
            px, py, pz = position[wire.dst]
            put(px, py, pz, "road_straight", "N")

    # clause row
    for clause in meta.clauses:
        for slot in clause.slots:
            ex, ey, ez = position[slot.entry]
            put(ex, ey, ez, "platform", "N")
            tx, ty, tz = position[slot.touch]
            put(tx, ty, tz, "checkpoint_aerial", "N")
            xx, xy, xz = position[slot.exit]
            put(xx, xy, xz, "platform", "N")

    # wires
    for wire, route in zip(wires, routes):
        _emit_wire(
            grid, put, route,
            dst_is_entry=wire.slot is not None,
            over=over_cells[route.index],
            under=under_cells[route.index],
        )

    blocks = tuple(sorted(grid.values()))
    laid = Track(
        tuple(
            Pad(pad.id, *position[pad.id], pad.kind, pad.checkpoint_id)
            for pad in track.pads
        ),
        track.links,
        meta=meta,
        blocks=blocks,
    )
    validate_track(laid)
    if crossing_count(laid) != len(crossing_cells):
        raise LayoutError("emitted blocks disagree with the planned crossings")
    return laid


def _emit_wire(grid, put, route: WireRoute, dst_is_entry: bool, over, under) -> None:
    """Emit the block path of one wire: roads at base level, curves at the
    two corners, humps over the cells in `over`, and the three-ramp climb
    into a clause entry."""
    cells: list[tuple[int, int]] = []
    src_step = 1 if route.src_y < route.lane else -1
    for y in range(route.src_y + src_step, route.lane + src_step, src_step):
        cells.append((route.src_col, y))
    h_step = 1 if route.src_col < route.dst_col else -1
    for x in range(route.src_col + h_step, route.dst_col, h_step):
        cells.append((x, route.lane))
    dst_step = 1 if route.lane < route.dst_y else -1
    for y in range(route.lane, route.dst_y, dst_step):
        cells.append((route.dst_col, y))
    corners = {(route.src_col, route.lane), (route.dst_col, route.lane)}

    index_of = {cell: i for i, cell in enumerate(cells)}
    entry_ramps = set(range(len(cells) - 3, len(cells))) if dst_is_entry else set()

    # merge overlapping hump intervals around the cells this wire crosses over
    intervals: list[list[int]] = []
    for cell in sorted(over, key=lambda c: index_of[c]):
        i = index_of[cell]
        if intervals and i - 2 <= intervals[-1][1]:
            intervals[-1][1] = i + 2
        else:
            intervals.append([i - 2, i + 2])
    in_run: dict[int, tuple[int, int]] = {}
    for a, b in intervals:
        if a < 1 or b > len(cells) - 2:
            raise LayoutError("hump runs off the end of a wire")
        for i in range(a, b + 1):
            if cells[i] in corners or i in entry_ramps:
                raise LayoutError("hump overlaps a corner or an entry climb")
            if cells[i] in under:
                raise LayoutError("wire is over and under at nearby cells")
            in_run[i] = (a, b)

    z_road = reduction.Z_ROAD
    for i, (x, y) in enumerate(cells):
        axis_dir = _direction(cells, i)
        if (x, y) in corners:
            put(x, y, z_road, "road_curve", axis_dir)
            continue
        if i in entry_ramps:
            put(x, y, z_road + (i - (len(cells) - 3)), "ramp", "N")
            continue
        run = in_run.get(i)
        if run is None:
            put(x, y, z_road, "road_straight", axis_dir)
            continue
        a, b = run
        if i == a:
            put(x, y, z_road, "ramp", axis_dir)
        elif i == a + 1:
            put(x, y, z_road + 1, "ramp", axis_dir)
        elif i == b - 1:
            put(x, y, z_road + 1, "ramp", _OPPOSITE[axis_dir])
        elif i == b:
            put(x, y, z_road, "ramp", _OPPOSITE[axis_dir])
        else:
            put(x, y, z_road + CROSS_RISE, "road_straight", axis_dir)
            if (x, y) in over:
                if axis_dir in ("E", "W"):
                    flanks = ((x, y - 1), (x, y + 1))
                else:
                    flanks = ((x - 1, y), (x + 1, y))
                for fx, fy in flanks:
                    put(fx, fy, z_road + CROSS_RISE, "barrier", axis_dir)


def _direction(cells: list[tuple[int, int]], i: int) -> str:
    if i + 1 < len(cells):
        dx = cells[i + 1][0] - cells[i][0]
        dy = cells[i + 1][1] - cells[i][1]
    else:
        dx = cells[i][0] - cells[i - 1][0]
        dy = cells[i][1] - cells[i - 1][1]
    return _DIR_TO_ORIENT[(dx, dy)]


def wire_routes(track: Track) -> list[WireRoute]:
    """The comb routes of a laid-out track, recomputed from its pad
    positions; exposed so crossing counts can be cross-checked externally."""
    meta = reduction.require_meta(track)
    wires = reduction.branch_wires(track)
    routes = []
    for index, wire in enumerate(wires):
        src = track.pad(wire.src)
        dst = track.pad(wire.dst)
        routes.append(
            WireRoute(index, src.x, src.y, dst.x, dst.y, LANE_Y0 + LANE_PITCH * index)
        )
    return routes


def crossing_count(track: Track) -> int:
    """Number of plan cells where one drivable surface passes over another
    (altitude difference of at least the crossover rise)."""
    if track.blocks is None:
        raise LayoutError("track has no blocks; run the layout first")
    by_cell: dict[tuple[int, int], list[int]] = {}
    for block in track.blocks:
        if block.block_type != "barrier":
            by_cell.setdefault((block.x, block.y), []).append(block.z)
    return sum(1 for zs in by_cell.values() if max(zs) - min(zs) >= CROSS_RISE)


# ==== block-level validation and faithfulness ====

def blocks_from_lines(lines: Iterable[str]) -> tuple[Block, ...]:
    blocks = []
    for line in lines:
        fields = line.split()
        if len(fields) != 6 or fields[0] != "block":
            raise TrackFormatError(f"malformed block line {line!r}")
        if fields[4] not in BLOCK_TYPES:
            raise TrackFormatError(f"unknown block type {fields[4]!r}")
        if fields[5] not in ORIENTATIONS:
            raise TrackFormatError(f"unknown orientation {fields[5]!r}")
        try:
            blocks.append(
                Block(int(fields[1]), int(fields[2]), int(fields[3]), fields[4], fields[5])
            )
        except ValueError as exc:
            raise TrackFormatError(f"malformed block line {line!r}") from exc
    return tuple(blocks)


def validate_blocks(track: Track) -> None:
    """Block invariants: one block per cell, known types and orientations,
    every pad standing on a block of its own altitude."""
    assert track.blocks is not None
    seen: set[tuple[int, int, int]] = set()
    for block in track.blocks:
        if block.block_type not in BLOCK_TYPES or block.orientation not in ORIENTATIONS:
            raise TrackInvariantError(f"invalid block {block}")
        key = (block.x, block.y, block.z)
        if key in seen:
            raise TrackInvariantError(f"two blocks share cell {key}")
        seen.add(key)
    for pad in track.pads:
        if pad.position not in seen:
            raise TrackInvariantError(f"pad {pad.id} at {pad.position} stands on no block")


def _side_level(block: Block, direction: str) -> int | None:
    """Altitude at which a block's side connects, or None when that side is
    closed (ramp flanks) or the block is not drivable."""
    if block.block_type == "barrier":
        return None
    if block.block_type == "ramp":
        if direction == block.orientation:
            return block.z + 1
        if direction == _OPPOSITE[block.orientation]:
            return block.z
        return None
    return block.z


def surface_edges(track: Track) -> set[tuple[int, int]]:
    """Undirected pad-to-pad edges of the drivable block surface: two pads
    are joined when a chain of level-matched blocks links their cells without
    passing over a third pad."""
    if track.blocks is None:
        raise LayoutError("track has no blocks; run the layout first")
    by_cell: dict[tuple[int, int], list[Block]] = {}
    for block in track.blocks:
        by_cell.setdefault((block.x, block.y), []).append(block)
    pad_at: dict[tuple[int, int, int], int] = {pad.position: pad.id for pad in track.pads}

    def neighbors(block: Block) -> list[Block]:
        found = []
        for (dx, dy), direction in _DIR_TO_ORIENT.items():
            level = _side_level(block, direction)
            if level is None:
                continue
            for other in by_cell.get((block.x + dx, block.y + dy), ()):
                if _side_level(other, _OPPOSITE[direction]) == level:
                    found.append(other)
        return found

    block_at = {(b.x, b.y, b.z): b for b in track.blocks}
    edges: set[tuple[int, int]] = set()
    for pad in track.pads:
        origin = block_at[pad.position]
        seen = {origin}
        frontier = [origin]
        while frontier:
            here = frontier.pop()
            for there in neighbors(here):
                if there in seen:
                    continue
                seen.add(there)
                target = pad_at.get((there.x, there.y, there.z))
                if target is not None and target != pad.id:
                    edges.add((min(pad.id, target), max(pad.id, target)))
                    continue
                frontier.append(there)
    return edges


def reachability_matches(track: Track) -> bool:
    """Whether pad-level reachability over the blocks (surface chains for
    drivable moves plus the abstract one_way gap links) equals reachability
    over the abstract link graph."""
    pad_ids = [pad.id for pad in track.pads]
    index = {pid: i for i, pid in enumerate(pad_ids)}

    abstract: list[set[int]] = [set() for _ in pad_ids]
    blockwise: list[set[int]] = [set() for _ in pad_ids]
    for link in track.links:
        abstract[index[link.src]].add(index[link.dst])
        if link.two_way:
            abstract[index[link.dst]].add(index[link.src])
        if not link.two_way:
            blockwise[index[link.src]].add(index[link.dst])
    for a, b in surface_edges(track):
        blockwise[index[a]].add(index[b])
        blockwise[index[b]].add(index[a])
    return _closure(abstract) == _closure(blockwise)


def _closure(adjacency: list[set[int]]) -> list[int]:
    """Reachable-set bitmasks per node (node included)."""
    masks = []
    for source in range(len(adjacency)):
        seen = 1 << source
        frontier = [source]
        while frontier:
            here = frontier.pop()
            for there in adjacency[here]:
                bit = 1 << there
                if not seen & bit:
                    seen |= bit
                    frontier.append(there)
        masks.append(seen)
    return masks
