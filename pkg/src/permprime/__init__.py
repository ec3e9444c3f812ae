"""Finite digraph calculus and Maltsev-condition checks for congruence permutability."""
from .algebra import (
    CpVerdict,
    FiniteAlgebra,
    Term,
    find_maltsev_term,
    free_algebra_on_two,
    generate_subpower,
    is_compatible,
    is_congruence_permutable,
    maltsev_digraph,
)
from .chain import (
    ObstructionWitness,
    construct_g1,
    construct_g2,
    construct_g3,
    find_obstruction,
    verify_chain,
)
from .config import Config
from .digraph import (
    ComponentPartition,
    Digraph,
    PropertyFlags,
    build_digraph,
    classify,
    complement,
    complete_digraph,
    components,
    delete_vertex,
    equality_digraph,
    exponential,
    induced,
    product,
    star_reduct,
    universal_vertices,
)
from .errors import ConsistencyError, InputError, ParseError, PreconditionError, ResourceError
from .formats import parse_algebra, parse_digraph, serialize_algebra, serialize_digraph
from .iso import IsoWitness, are_isomorphic
from .power import (
    PowerContext,
    nonedge_by_claim1,
    quotient_power,
    realizable_traces,
    trace_blocks,
    trace_set,
    verify_power_swap,
)

__version__ = "0.1.0"
