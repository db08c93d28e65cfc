"""Incremental and divide-and-conquer maintenance of the Laplacian pseudo-inverse."""

from .dac import Partition, SolveConfig, reassemble, rich_club_split, solve, solve_matrix
from .dense import (
    clique_pinv,
    commute_time,
    kirchhoff_index,
    laplacian,
    pinv_baseline,
    pinv_from_resistances,
    resistance_matrix,
    star_pinv,
    submatrix_inverse,
    topological_centrality,
)
from .errors import (
    BridgeSuspectedError,
    DisconnectedError,
    DomainError,
    HeuristicFailed,
    LapincError,
    NotFoundError,
    NumericalError,
    ParseError,
    PreconditionError,
)
from .generators import GenSpec, er_graph, evolve, pa_graph
from .graph import (
    Graph,
    connected_components,
    degree_ordering,
    is_bridge,
    parse_edge_list,
    serialize_edge_list,
)
from .incremental import (
    DynamicState,
    Event,
    JoinSpec,
    apply_event,
    delete_bridge,
    delete_edge_resistances,
    delete_non_bridge,
    fire_edge,
    fire_edge_resistances,
    first_join,
)

__version__ = "0.1.0"
