"""Tests for the comb layout: pad placement, wire crossings, block
emission, and block-level faithfulness to the abstract graph."""
from __future__ import annotations

import random

import pytest

from sat2track import engine, layout, reduction
from sat2track.cnf import Clause, Formula, Literal
from sat2track.gadgets import CROSS_RISE
from sat2track.layout import (
    BAND_CLEARANCE,
    BLOCK_TYPES,
    CLAUSE_MARGIN,
    CLAUSE_PITCH,
    LANE_PITCH,
    LANE_Y0,
    VAR_PITCH,
    X0,
    Block,
    LayoutError,
    WireRoute,
    blocks_from_lines,
    crossing_count,
    layout_comb,
    proper_crossings,
    reachability_matches,
    surface_edges,
    validate_blocks,
    wire_routes,
)
from sat2track.track import Track, TrackFormatError, TrackInvariantError, from_text, to_text


def lit(v: int) -> Literal:
    return Literal(abs(v), v > 0)


def formula(n: int, clauses: list[tuple[int, int, int]]) -> Formula:
    return Formula(n, tuple(Clause((lit(a), lit(b), lit(c))) for a, b, c in clauses))


def random_formula(rng: random.Random, max_n: int = 5, max_m: int = 6) -> Formula:
    n = rng.randint(1, max_n)
    m = rng.randint(0, max_m)
    return formula(
        n,
        [
            tuple(rng.randint(1, n) * rng.choice((1, -1)) for _ in range(3))
            for _ in range(m)
        ],
    )


SAMPLE = formula(4, [(1, -3, 4), (-1, 2, 3), (2, -2, -4)])

# Ceiling on blocks per squared instance size; measured worst case is ~78.
BLOCK_BOUND = 90


def laid_out(f: Formula) -> Track:
    return layout_comb(reduction.compile_formula(f))


def crossing_oracle(track: Track) -> set[tuple[int, int]]:
    """Crossing cells recomputed by pairwise segment intersection of the
    recovered wire routes, independent of the emitted blocks."""
    routes = wire_routes(track)
    cells: set[tuple[int, int]] = set()
    for i, a in enumerate(routes):
        for b in routes[i + 1 :]:
            cells.update(proper_crossings(a, b))
    return cells


class TestPlacement:
    def test_start_and_finish_anchor_the_spine(self):
        laid = laid_out(SAMPLE)
        start = laid.pad(laid.start_pad)
        finish = laid.pad(laid.finish_pad)
        assert (start.x, start.y, start.z) == (X0 - 4, 0, reduction.Z_TOP)
        assert (finish.x, finish.y, finish.z) == (X0 + VAR_PITCH * 4, 0, reduction.Z_TOP)

    def test_entries_follow_the_variable_pitch(self):
        laid = laid_out(SAMPLE)
        for var in laid.meta.variables:
            entry = laid.pad(var.entry)
            assert entry.x == X0 + VAR_PITCH * (var.variable - 1)
            assert entry.y == 0
            assert entry.z == reduction.Z_TOP

    def test_landings_sit_below_their_entry(self):
        laid = laid_out(SAMPLE)
        for var in laid.meta.variables:
            entry = laid.pad(var.entry)
            for landing in (var.true_landing, var.false_landing):
                pad = laid.pad(landing)
                assert pad.z == reduction.Z_ROAD
                assert pad.y == 4
                assert entry.x < pad.x <= entry.x + 8

    def test_merge_pads_on_the_valley_floor(self):
        laid = laid_out(SAMPLE)
        for var in laid.meta.variables:
            merge = laid.pad(var.merge)
            assert merge.z == reduction.Z_MERGE
            assert merge.y == 0

    def test_clause_row_clears_every_lane(self):
        laid = laid_out(SAMPLE)
        wires = reduction.branch_wires(laid)
        top_lane = LANE_Y0 + LANE_PITCH * (len(wires) - 1)
        clause_y = LANE_Y0 + LANE_PITCH * len(wires) + BAND_CLEARANCE
        for clause in laid.meta.clauses:
            for slot in clause.slots:
                for pad_id in (slot.entry, slot.touch, slot.exit):
                    assert laid.pad(pad_id).y >= clause_y > top_lane

    def test_clause_boxes_follow_the_clause_pitch(self):
        laid = laid_out(SAMPLE)
        clause_x0 = X0 + VAR_PITCH * 4 + CLAUSE_MARGIN
        first_xs = [
            min(laid.pad(slot.entry).x for slot in clause.slots)
            for clause in laid.meta.clauses
        ]
        assert first_xs[0] >= clause_x0
        assert [b - a for a, b in zip(first_xs, first_xs[1:])] == [
            CLAUSE_PITCH for _ in first_xs[1:]
        ]

    def test_touch_pads_are_aerial(self):
        laid = laid_out(SAMPLE)
        for clause in laid.meta.clauses:
            for slot in clause.slots:
                touch = laid.pad(slot.touch)
                assert touch.z > laid.pad(slot.exit).z

    def test_lanes_are_assigned_in_wire_order(self):
        laid = laid_out(SAMPLE)
        routes = wire_routes(laid)
        assert [r.lane for r in routes] == [
            LANE_Y0 + LANE_PITCH * i for i in range(len(routes))
        ]

    def test_abstract_graph_is_untouched(self):
        track = reduction.compile_formula(SAMPLE)
        laid = layout_comb(track)
        assert laid.links == track.links
        assert laid.meta is track.meta
        assert [p.id for p in laid.pads] == [p.id for p in track.pads]
        assert [p.kind for p in laid.pads] == [p.kind for p in track.pads]
        assert [p.checkpoint_id for p in laid.pads] == [
            p.checkpoint_id for p in track.pads
        ]

    def test_input_track_is_not_mutated(self):
        track = reduction.compile_formula(SAMPLE)
        before = to_text(track)
        layout_comb(track)
        assert to_text(track) == before

    def test_solving_is_unchanged_by_layout(self):
        track = reduction.compile_formula(SAMPLE)
        laid = layout_comb(track)
        assert engine.solve(laid) == engine.solve(track)

    def test_empty_formula_lays_out(self):
        laid = laid_out(formula(0, []))
        assert laid.blocks
        assert crossing_count(laid) == 0
        assert reachability_matches(laid)

    def test_layout_is_stable_under_relayout(self):
        laid = laid_out(SAMPLE)
        assert to_text(layout_comb(laid)) == to_text(laid)

    def test_layout_is_deterministic(self):
        a = to_text(laid_out(SAMPLE))
        b = to_text(laid_out(formula(4, [(1, -3, 4), (-1, 2, 3), (2, -2, -4)])))
        assert a == b

    def test_block_count_is_quadratically_bounded(self):
        rng = random.Random(4021)
        for _ in range(12):
            f = random_formula(rng)
            laid = laid_out(f)
            size = f.num_variables + len(f.clauses) + 1
            assert len(laid.blocks) <= BLOCK_BOUND * size * size


class TestCrossings:
    def test_proper_crossings_is_symmetric(self):
        a = WireRoute(0, 5, 0, 40, 60, 12)
        b = WireRoute(1, 20, 0, 2, 60, 18)
        assert sorted(proper_crossings(a, b)) == sorted(proper_crossings(b, a))

    def test_shared_endpoints_do_not_cross(self):
        # touching at a corner is not a proper crossing
        a = WireRoute(0, 5, 0, 20, 60, 12)
        b = WireRoute(1, 20, 0, 30, 60, 18)
        assert (20, 12) not in proper_crossings(a, b)

    def test_disjoint_routes_do_not_cross(self):
        a = WireRoute(0, 5, 0, 10, 60, 12)
        b = WireRoute(1, 40, 0, 50, 60, 18)
        assert proper_crossings(a, b) == []

    def test_vertical_through_lane_crosses_once(self):
        a = WireRoute(0, 5, 0, 40, 60, 12)   # lane y=12 spans x 5..40
        b = WireRoute(1, 20, 0, 25, 60, 18)  # vertical at x=20 spans y 0..18
        assert proper_crossings(a, b) == [(20, 12)]

    @pytest.mark.parametrize(
        "f",
        [
            formula(1, [(1, 1, 1)]),
            formula(2, [(1, -2, 2), (-1, -1, 2)]),
            SAMPLE,
        ],
        ids=["unit", "two-var", "sample"],
    )
    def test_block_crossings_match_the_segment_oracle(self, f):
        laid = laid_out(f)
        assert crossing_count(laid) == len(crossing_oracle(laid))

    def test_block_crossings_match_oracle_on_random_instances(self):
        rng = random.Random(4022)
        for _ in range(10):
            laid = laid_out(random_formula(rng))
            assert crossing_count(laid) == len(crossing_oracle(laid))

    def test_each_crossing_rises_by_the_crossover_clearance(self):
        laid = laid_out(SAMPLE)
        by_cell: dict[tuple[int, int], list[Block]] = {}
        for block in laid.blocks:
            by_cell.setdefault((block.x, block.y), []).append(block)
        for cell in crossing_oracle(laid):
            levels = [b.z for b in by_cell[cell] if b.block_type != "barrier"]
            assert max(levels) - min(levels) == CROSS_RISE

    def test_crossings_are_flanked_by_barriers(self):
        laid = laid_out(SAMPLE)
        cells = crossing_oracle(laid)
        assert cells
        barrier_cells = {
            (b.x, b.y) for b in laid.blocks if b.block_type == "barrier"
        }
        for x, y in cells:
            flanked = {(x, y - 1), (x, y + 1)} <= barrier_cells or {
                (x - 1, y),
                (x + 1, y),
            } <= barrier_cells
            assert flanked

    def test_crossing_count_needs_blocks(self):
        track = reduction.compile_formula(SAMPLE)
        with pytest.raises(LayoutError):
            crossing_count(track)


class TestFaithfulness:
    @pytest.mark.parametrize(
        "f",
        [
            formula(0, []),
            formula(1, [(1, 1, 1)]),
            formula(2, [(-1, -2, -2)]),
            SAMPLE,
        ],
        ids=["empty", "unit", "neg-only", "sample"],
    )
    def test_reachability_matches_on_instances(self, f):
        assert reachability_matches(laid_out(f))

    def test_reachability_matches_on_random_instances(self):
        rng = random.Random(4023)
        for _ in range(8):
            assert reachability_matches(laid_out(random_formula(rng)))

    def test_every_two_way_link_is_driveable(self):
        laid = laid_out(SAMPLE)
        edges = surface_edges(laid)
        for link in laid.links:
            if link.two_way:
                assert (min(link.src, link.dst), max(link.src, link.dst)) in edges

    def test_cut_road_breaks_the_match(self):
        laid = laid_out(SAMPLE)
        # cut the lane of a pre-merge wire: that link is two_way, so the
        # surface must carry it
        wires = reduction.branch_wires(laid)
        routes = wire_routes(laid)
        route = next(r for w, r in zip(wires, routes) if w.slot is None)
        _, lane, x_lo, x_hi = route.segments()[1]
        victim = next(
            b
            for b in laid.blocks
            if b.y == lane
            and b.z == reduction.Z_ROAD
            and b.block_type == "road_straight"
            and x_lo < b.x < x_hi
        )
        cut = Track(
            laid.pads,
            laid.links,
            meta=laid.meta,
            blocks=tuple(b for b in laid.blocks if b != victim),
        )
        assert not reachability_matches(cut)

    def test_stray_bridge_breaks_the_match(self):
        laid = laid_out(SAMPLE)
        # pave a road between the two landings of one variable: the arms
        # must stay exclusive, so the extra reachability must be flagged
        var = laid.meta.variables[0]
        t_pad = laid.pad(var.true_landing)
        f_pad = laid.pad(var.false_landing)
        extra = tuple(
            Block(x, t_pad.y, t_pad.z, "road_straight", "E")
            for x in range(t_pad.x + 1, f_pad.x)
        )
        occupied = {(b.x, b.y, b.z) for b in laid.blocks}
        assert not any((b.x, b.y, b.z) in occupied for b in extra)
        bridged = Track(
            laid.pads, laid.links, meta=laid.meta, blocks=laid.blocks + extra
        )
        assert not reachability_matches(bridged)

    def test_surface_edges_needs_blocks(self):
        track = reduction.compile_formula(SAMPLE)
        with pytest.raises(LayoutError):
            surface_edges(track)


class TestBlockText:
    def test_blocks_survive_the_text_roundtrip(self):
        laid = laid_out(SAMPLE)
        back = from_text(to_text(laid))
        assert back.blocks == laid.blocks
        assert crossing_count(back) == crossing_count(laid)
        assert reachability_matches(back)

    def test_blocks_from_lines_parses(self):
        blocks = blocks_from_lines(["block 3 4 1 ramp N", "block -2 0 0 start E"])
        assert blocks == (
            Block(3, 4, 1, "ramp", "N"),
            Block(-2, 0, 0, "start", "E"),
        )

    @pytest.mark.parametrize(
        "line",
        [
            "block 1 2 3 ramp",
            "block 1 2 3 ramp N extra",
            "brick 1 2 3 ramp N",
            "block 1 2 3 escalator N",
            "block 1 2 3 ramp Q",
            "block one 2 3 ramp N",
            "block 1 2 3.5 ramp N",
        ],
    )
    def test_blocks_from_lines_rejects_malformed(self, line):
        with pytest.raises(TrackFormatError):
            blocks_from_lines([line])

    def test_validate_blocks_rejects_shared_cell(self):
        laid = laid_out(formula(1, [(1, 1, 1)]))
        doubled = Track(
            laid.pads, laid.links, meta=laid.meta, blocks=laid.blocks + (laid.blocks[0],)
        )
        with pytest.raises(TrackInvariantError):
            validate_blocks(doubled)

    def test_validate_blocks_rejects_unknown_type(self):
        laid = laid_out(formula(1, [(1, 1, 1)]))
        bogus = Track(
            laid.pads,
            laid.links,
            meta=laid.meta,
            blocks=laid.blocks + (Block(999, 999, 0, "escalator", "N"),),
        )
        with pytest.raises(TrackInvariantError):
            validate_blocks(bogus)

    def test_validate_blocks_rejects_floating_pad(self):
        laid = laid_out(formula(1, [(1, 1, 1)]))
        start_block = next(b for b in laid.blocks if b.block_type == "start")
        floated = Track(
            laid.pads,
            laid.links,
            meta=laid.meta,
            blocks=tuple(b for b in laid.blocks if b != start_block),
        )
        with pytest.raises(TrackInvariantError):
            validate_blocks(floated)

    def test_block_types_are_closed(self):
        laid = laid_out(SAMPLE)
        assert {b.block_type for b in laid.blocks} <= BLOCK_TYPES
