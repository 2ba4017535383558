"""Benchmark the compiled search core against the pure-Python fallback.

Both cores speak the same flat-array protocol, so each workload is prepared
once and handed to each core directly: completability searches over compiled
tracks of growing size, and certificate replays of growing length.

Run from the repository root:

    python3 benchmarks/bench_cores.py
    python3 benchmarks/bench_cores.py --seed 7 --solve-instances 30
"""
from __future__ import annotations

import argparse
import random
import time

from sat2track import engine, reduction
from sat2track.corpus import random_formula
from sat2track.track import Certificate, RespawnPolicy, Traverse


def best_of(runs: int, fn) -> float:
    best = float("inf")
    for _ in range(runs):
        started = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - started)
    return best


def core_solve(core, arrays, policy: int = 1, max_states: int = 50_000_000):
    return core.solve(
        arrays.n_pads,
        arrays.start,
        arrays.finish,
        arrays.full_mask,
        arrays.move_start,
        arrays.move_to,
        arrays.move_code,
        arrays.pad_cp,
        policy,
        arrays.cp_start,
        arrays.cp_pads,
        max_states,
    )


def core_replay(core, arrays, codes, policy: int = 1):
    return core.run_actions(
        arrays.n_pads,
        arrays.n_links,
        arrays.link_src,
        arrays.link_dst,
        arrays.link_two_way,
        arrays.pad_cp,
        arrays.start,
        policy,
        codes,
    )


def bench_solve(cores, seed: int, instances: int, runs: int) -> None:
    rng = random.Random(seed)
    workloads = []
    for _ in range(instances):
        track = reduction.compile_formula(random_formula(rng))
        workloads.append(engine.build_arrays(track))
    print(f"solve: {instances} compiled tracks, best of {runs}")
    row(cores, runs, lambda core: [core_solve(core, a) for a in workloads])


def bench_replay(cores, lengths: list[int], runs: int) -> None:
    track = reduction.compile_formula(random_formula(random.Random(0), 2, 2))
    arrays = engine.build_arrays(track)
    two_way = next(l for l in track.links if l.two_way)
    for length in lengths:
        bounce = (Traverse(two_way.id), Traverse(two_way.id, reverse=True))
        actions = bounce * (length // 2)
        codes = engine.actions_to_codes(arrays, Certificate(actions).actions)
        print(f"replay: certificate of {length} actions, best of {runs}")
        row(cores, runs, lambda core, c=codes: core_replay(core, arrays, c))


def row(cores, runs: int, workload) -> None:
    timings = {}
    for name, core in cores:
        timings[name] = best_of(runs, lambda: workload(core))
        print(f"  {name:>8}: {timings[name] * 1e3:9.2f} ms")
    if len(timings) == 2:
        pure, compiled = timings["pure"], timings["compiled"]
        print(f"  speedup: {pure / compiled:9.1f}x")


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--seed", type=int, default=2008)
    parser.add_argument("--solve-instances", type=int, default=40)
    parser.add_argument("--runs", type=int, default=3)
    parser.add_argument(
        "--replay-lengths", type=int, nargs="+", default=[10_000, 100_000, 1_000_000]
    )
    args = parser.parse_args()

    cores = [("pure", engine._pycore)]
    if engine._compiled is not None:
        cores.append(("compiled", engine._compiled))
    else:
        print("note: compiled core not built; benchmarking the pure core only")
    print(f"active core in this installation: {engine.CORE_NAME}")

    bench_solve(cores, args.seed, args.solve_instances, args.runs)
    bench_replay(cores, args.replay_lengths, args.runs)


if __name__ == "__main__":
    main()
