"""Mapping-torus Conley indices from rigorous cubical enclosures.

Pipeline: interval enclosure of a map -> combinatorial index pair ->
mapping-torus homology (two chain models) -> fundamental-group
fingerprints and shift-equivalence comparisons.
"""
from .cubical import BASEPOINT, ChainComplex, ChainMap, CubicalSet, Grid
from .dynamics import (
    IndexPair, IsolationError, MultivaluedMap, build_index_pair, carrier_chain_map,
    enclose_graph, inv_n, invariant_part, verify_index_pair,
)
from .fpgroup import (
    CosetTable, Presentation, SubgroupRecord, Word, abelianization, fingerprint, low_index_subgroups,
    pi1_reduced_torus, pi1_unreduced_torus, subgroup_presentation, todd_coxeter,
)
from .homalg import HomologyGroup, homology, induced_map_on_homology, rational_canonical_form, smith_normal_form
from .interval import Box, Interval, MapExpr, evaluate_interval, parse_map
from .shifteq import compare_homological_indices, invertible_part, shift_equivalent
from .torus import (
    TorusComplex, algebraic_mapping_torus, check_fiber_acyclicity, graph_complex, graph_torus,
    index_map_torus, mapping_cone, torus_pq,
)

__version__ = "0.1.0"
