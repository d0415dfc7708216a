"""Deterministic diagonal walks on the randomly oriented Manhattan lattice.

Simulation, graph analysis, pattern reduction, mid-edge combinatorics,
Monte Carlo verification and exact random-walk oracles for the model in
which every axis-parallel line of Z^d carries a fixed random +-1
orientation and the walk moves diagonally along all of them at once.
"""

from .env import (
    CoordinateOverflowError,
    Environment,
    EnvironmentError_,
    MissingLineError,
    load_window,
    make_env,
    orientation,
    persist_window,
)
from .graph import (
    CellClass,
    Component,
    ComponentCaps,
    VertexFlags,
    classify_cell,
    classify_vertex,
    component,
    enumerate_cycles,
    in_neighbors,
    reaches,
    window_census,
)
from .midedge import (
    BlockLattice,
    MidEdgeCycle,
    MidEdgeGraph,
    block_lattice,
    cycle_to_midedge,
    interior_counts,
    midedge_graph,
)
from .reduce import (
    ReductionMap,
    alternance_sites,
    index_maps,
    project_and_check,
    reduce_env,
    removal_set,
)
from .walk import WalkOutcome, run, step

__version__ = "0.1.0"

__all__ = [
    "BlockLattice",
    "CellClass",
    "Component",
    "ComponentCaps",
    "CoordinateOverflowError",
    "Environment",
    "EnvironmentError_",
    "MidEdgeCycle",
    "MidEdgeGraph",
    "MissingLineError",
    "ReductionMap",
    "VertexFlags",
    "WalkOutcome",
    "alternance_sites",
    "block_lattice",
    "classify_cell",
    "classify_vertex",
    "component",
    "cycle_to_midedge",
    "enumerate_cycles",
    "in_neighbors",
    "index_maps",
    "interior_counts",
    "load_window",
    "make_env",
    "midedge_graph",
    "orientation",
    "persist_window",
    "project_and_check",
    "reaches",
    "reduce_env",
    "removal_set",
    "run",
    "step",
    "window_census",
]
