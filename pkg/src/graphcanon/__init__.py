"""Certified graph canonical labelling.

Compute canonical forms of colored graphs by individualization-refinement
search, emit binary proofs of the result (during-search or reconstructed
afterwards), and verify them with an independent checker that recomputes
every step.
"""

from .checker import (
    CheckFailure,
    FlatSetDatabase,
    TrieDatabase,
    Verdict,
    apply_rule,
    db_contains,
    db_insert,
    verify_proof,
)
from .core import (
    Coloring,
    DimacsError,
    Graph,
    act_coloring,
    compose,
    format_dimacs,
    graph_compare,
    identity_perm,
    invert,
    is_automorphism,
    is_finer,
    parse_dimacs,
    relabel_graph,
    unit_coloring,
)
from .emitter import EmitError, EmittedProof, emit_during, emit_post, emit_proof
from .invariant import hash_colored, invariant_compare, quotient_graph
from .proof import (
    ProofDecodeError,
    ProofEncodeError,
    ProofError,
    decode_proof,
    encode_proof,
)
from .refine import individualize, is_equitable, make_equitable, refine, split, target_cell
from .search import CanonicalResult, SearchError, canonical_form

__version__ = "1.0.0"

__all__ = [
    "CanonicalResult",
    "CheckFailure",
    "Coloring",
    "DimacsError",
    "EmitError",
    "EmittedProof",
    "FlatSetDatabase",
    "Graph",
    "ProofDecodeError",
    "ProofEncodeError",
    "ProofError",
    "SearchError",
    "TrieDatabase",
    "Verdict",
    "act_coloring",
    "apply_rule",
    "canonical_form",
    "compose",
    "db_contains",
    "db_insert",
    "decode_proof",
    "emit_during",
    "emit_post",
    "emit_proof",
    "encode_proof",
    "format_dimacs",
    "graph_compare",
    "hash_colored",
    "identity_perm",
    "individualize",
    "invariant_compare",
    "invert",
    "is_automorphism",
    "is_equitable",
    "is_finer",
    "make_equitable",
    "parse_dimacs",
    "quotient_graph",
    "refine",
    "relabel_graph",
    "split",
    "target_cell",
    "unit_coloring",
    "verify_proof",
]
