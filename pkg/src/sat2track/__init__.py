"""sat2track: compile 3-SAT formulas into stunt-track puzzles.

A formula becomes a track whose checkpoints are its clauses: the track is
completable exactly when the formula is satisfiable. The package bundles the
compiler, a certificate verifier, a desk-scale breadth-first solver, a grid
layout pass with crossing bridges, and SVG rendering.
"""
from __future__ import annotations

__version__ = "0.1.0"
