"""Independent verification of canonical-form proofs.

The checker consumes a binary proof stream for a colored graph ``(G, pi0)``
and replays it rule by rule: every premise must already sit in the fact
database, every side condition is recomputed from scratch (refinement splits,
invariant hashes, graph comparisons, automorphism checks), and the derived
fact is inserted. A stream is accepted iff it decodes completely, every rule
applies, and some rule derived a Canonical fact — whose content is the
checker's own, independently computed answer.

Nothing here trusts the solver: the checker never sees search state, only
the rule parameters, and recomputes every conclusion (e.g. a split rule's
resulting coloring, or the relabelled graph of a canonical leaf) itself.

Two interchangeable fact stores are provided: a flat hash set of integer
tuples and a radix trie over integer sequences (compressed paths, useful
when millions of keys share long prefixes).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol, Sequence

from .core import (
    Coloring,
    Graph,
    act_coloring,
    graph_compare,
    is_automorphism,
    relabel_graph,
)
from .invariant import hash_colored
from .proof import (
    Canonical,
    CanonicalLeaf,
    ColoringAxiom,
    Equitable,
    ExtendPath,
    Fact,
    Individualize,
    InvariantAxiom,
    InvariantsEqual,
    InvariantsEqualSym,
    MergeOrbits,
    OnPath,
    OrbitsAxiom,
    OrbitSubset,
    PathAxiom,
    PhiEqual,
    ProofDecodeError,
    PruneAutomorphism,
    PruneInvariant,
    PruneLeaf,
    PruneOrbits,
    PruneParent,
    Pruned,
    REqual,
    RFiner,
    Rule,
    SplitColoring,
    TargetCell,
    TargetIs,
    decode_int,
    decode_rule,
    fact_key,
)
from .refine import individualize, is_equitable, split, target_cell

# Error kinds reported in verdicts.
DECODE = "decode"
N_MISMATCH = "n-mismatch"
MISSING_PREMISE = "missing-premise"
SIDE_CONDITION = "side-condition"
NO_CANONICAL = "no-canonical"


class CheckFailure(Exception):
    def __init__(self, kind: str, message: str):
        super().__init__(message)
        self.kind = kind


# --------------------------------------------------------------------------
# Fact databases
# --------------------------------------------------------------------------


class FactDatabase(Protocol):
    def insert(self, key: Sequence[int]) -> bool: ...

    def contains(self, key: Sequence[int]) -> bool: ...

    def __len__(self) -> int: ...


class FlatSetDatabase:
    """Fact store backed by a plain set of integer tuples."""

    def __init__(self) -> None:
        self._keys: set[tuple[int, ...]] = set()

    def insert(self, key: Sequence[int]) -> bool:
        key = tuple(key)
        if key in self._keys:
            return False
        self._keys.add(key)
        return True

    def contains(self, key: Sequence[int]) -> bool:
        return tuple(key) in self._keys

    def __len__(self) -> int:
        return len(self._keys)


class _TrieNode:
    __slots__ = ("edges", "terminal")

    def __init__(self) -> None:
        # first symbol of the edge label -> (full label, child)
        self.edges: dict[int, tuple[tuple[int, ...], _TrieNode]] = {}
        self.terminal = False


class TrieDatabase:
    """Fact store backed by a radix trie over integer sequences.

    Edges carry whole integer runs (path compression); an edge splits the
    first time two keys diverge inside it. Insert and lookup are linear in
    the key length regardless of how many facts are stored.
    """

    def __init__(self) -> None:
        self._root = _TrieNode()
        self._size = 0

    def insert(self, key: Sequence[int]) -> bool:
        key = tuple(key)
        node = self._root
        i = 0
        while i < len(key):
            head = key[i]
            entry = node.edges.get(head)
            if entry is None:
                leaf = _TrieNode()
                leaf.terminal = True
                node.edges[head] = (key[i:], leaf)
                self._size += 1
                return True
            label, child = entry
            rest = key[i:]
            j = 0
            limit = min(len(label), len(rest))
            while j < limit and label[j] == rest[j]:
                j += 1
            if j == len(label):
                node = child
                i += j
                continue
            # Diverged (or key ends) inside the edge: split it at j.
            mid = _TrieNode()
            mid.edges[label[j]] = (label[j:], child)
            node.edges[head] = (label[:j], mid)
            if j == len(rest):
                mid.terminal = True
                self._size += 1
                return True
            node = mid
            i += j
        if node.terminal:
            return False
        node.terminal = True
        self._size += 1
        return True

    def contains(self, key: Sequence[int]) -> bool:
        key = tuple(key)
        node = self._root
        i = 0
        while i < len(key):
            entry = node.edges.get(key[i])
            if entry is None:
                return False
            label, child = entry
            if key[i : i + len(label)] != label:
                return False
            i += len(label)
            node = child
        return node.terminal

    def __len__(self) -> int:
        return self._size


def db_insert(db: FactDatabase, key: Sequence[int]) -> bool:
    """Insert a fact key; returns False when it was already present."""
    return db.insert(key)


def db_contains(db: FactDatabase, key: Sequence[int]) -> bool:
    return db.contains(key)


# --------------------------------------------------------------------------
# Rule application
# --------------------------------------------------------------------------


def _need(db: FactDatabase, fact: Fact, what: str) -> None:
    if not db.contains(fact_key(fact)):
        raise CheckFailure(MISSING_PREMISE, f"missing premise: {what}")


def _fail(message: str) -> CheckFailure:
    return CheckFailure(SIDE_CONDITION, message)


def apply_rule(g: Graph, pi0: Coloring, rule: Rule, db: FactDatabase) -> Fact:
    """Validate one rule against the database and return its conclusion.

    Raises :class:`CheckFailure` when a premise is absent or a recomputed
    side condition does not hold. The caller inserts the conclusion.
    """
    if isinstance(rule, ColoringAxiom):
        return RFiner((), pi0)

    if isinstance(rule, Individualize):
        _need(db, REqual(rule.nu, rule.pi), "REqual(nu, pi)")
        return RFiner(rule.nu + (rule.v,), individualize(rule.pi, rule.v))

    if isinstance(rule, SplitColoring):
        _need(db, RFiner(rule.nu, rule.pi), "RFiner(nu, pi)")
        for i in range(rule.pi.m):
            result = split(g, rule.pi, i)
            if result != rule.pi:
                return RFiner(rule.nu, result)
        raise _fail("coloring is already equitable; nothing splits")

    if isinstance(rule, Equitable):
        _need(db, RFiner(rule.nu, rule.pi), "RFiner(nu, pi)")
        if not is_equitable(g, rule.pi):
            raise _fail("coloring is not equitable")
        return REqual(rule.nu, rule.pi)

    if isinstance(rule, TargetCell):
        _need(db, REqual(rule.nu, rule.pi), "REqual(nu, pi)")
        cell = target_cell(rule.pi)
        if cell is None:
            raise _fail("discrete coloring has no target cell")
        return TargetIs(rule.nu, cell)

    if isinstance(rule, InvariantAxiom):
        return PhiEqual(rule.nu, rule.nu)

    if isinstance(rule, InvariantsEqual):
        _need(db, PhiEqual(rule.nu1[:-1], rule.nu2[:-1]), "PhiEqual(parents)")
        _need(db, REqual(rule.nu1, rule.pi1), "REqual(nu1, pi1)")
        _need(db, REqual(rule.nu2, rule.pi2), "REqual(nu2, pi2)")
        if hash_colored(g, rule.pi1) != hash_colored(g, rule.pi2):
            raise _fail("invariant hashes differ")
        return PhiEqual(rule.nu1, rule.nu2)

    if isinstance(rule, InvariantsEqualSym):
        _need(db, PhiEqual(rule.nu1, rule.nu2), "PhiEqual(nu1, nu2)")
        return PhiEqual(rule.nu2, rule.nu1)

    if isinstance(rule, OrbitsAxiom):
        return OrbitSubset(rule.nu, (rule.v,))

    if isinstance(rule, MergeOrbits):
        _need(db, OrbitSubset(rule.nu, rule.omega1), "OrbitSubset(nu, omega1)")
        _need(db, OrbitSubset(rule.nu, rule.omega2), "OrbitSubset(nu, omega2)")
        if rule.w1 not in rule.omega1 or rule.w2 not in rule.omega2:
            raise _fail("witnesses outside their classes")
        if rule.sigma[rule.w1] != rule.w2:
            raise _fail("sigma does not map w1 to w2")
        if any(rule.sigma[x] != x for x in rule.nu):
            raise _fail("sigma does not fix the node sequence")
        if not is_automorphism(g, pi0, rule.sigma):
            raise _fail("sigma is not an automorphism of (G, pi0)")
        merged = tuple(sorted(set(rule.omega1) | set(rule.omega2)))
        return OrbitSubset(rule.nu, merged)

    if isinstance(rule, PruneInvariant):
        _need(db, PhiEqual(rule.nu1[:-1], rule.nu2[:-1]), "PhiEqual(parents)")
        _need(db, REqual(rule.nu1, rule.pi1), "REqual(nu1, pi1)")
        _need(db, REqual(rule.nu2, rule.pi2), "REqual(nu2, pi2)")
        if hash_colored(g, rule.pi1) <= hash_colored(g, rule.pi2):
            raise _fail("first invariant hash does not dominate")
        return Pruned(rule.nu2)

    if isinstance(rule, PruneLeaf):
        _need(db, REqual(rule.nu1, rule.pi1), "REqual(nu1, pi1)")
        _need(db, REqual(rule.nu2, rule.pi2), "REqual(nu2, pi2)")
        _need(db, PhiEqual(rule.nu1, rule.nu2), "PhiEqual(nu1, nu2)")
        if not rule.pi2.discrete:
            raise _fail("pruned node is not a leaf")
        if rule.pi1.discrete:
            g1 = relabel_graph(g, rule.pi1.perm())
            g2 = relabel_graph(g, rule.pi2.perm())
            if graph_compare(g1, g2) <= 0:
                raise _fail("first leaf graph does not dominate")
        return Pruned(rule.nu2)

    if isinstance(rule, PruneAutomorphism):
        if len(rule.nu1) != len(rule.nu2):
            raise _fail("sequences differ in length")
        if not rule.nu1 < rule.nu2:
            raise _fail("first sequence is not lexicographically smaller")
        if any(rule.sigma[a] != b for a, b in zip(rule.nu1, rule.nu2)):
            raise _fail("sigma does not map nu1 onto nu2")
        if not is_automorphism(g, pi0, rule.sigma):
            raise _fail("sigma is not an automorphism of (G, pi0)")
        return Pruned(rule.nu2)

    if isinstance(rule, PruneParent):
        _need(db, TargetIs(rule.nu, rule.cell), "TargetIs(nu, cell)")
        for w in rule.cell:
            _need(db, Pruned(rule.nu + (w,)), f"Pruned(nu + [{w}])")
        return Pruned(rule.nu)

    if isinstance(rule, PruneOrbits):
        _need(db, OrbitSubset(rule.nu, rule.omega), "OrbitSubset(nu, omega)")
        if rule.w1 not in rule.omega or rule.w2 not in rule.omega:
            raise _fail("witnesses outside the class")
        if not rule.w1 < rule.w2:
            raise _fail("w1 must be smaller than w2")
        return Pruned(rule.nu + (rule.w2,))

    if isinstance(rule, PathAxiom):
        return OnPath(())

    if isinstance(rule, ExtendPath):
        _need(db, OnPath(rule.nu), "OnPath(nu)")
        _need(db, TargetIs(rule.nu, rule.cell), "TargetIs(nu, cell)")
        if rule.w not in rule.cell:
            raise _fail("extension vertex outside the target cell")
        for w in rule.cell:
            if w != rule.w:
                _need(db, Pruned(rule.nu + (w,)), f"Pruned(nu + [{w}])")
        return OnPath(rule.nu + (rule.w,))

    if isinstance(rule, CanonicalLeaf):
        _need(db, OnPath(rule.nu), "OnPath(nu)")
        _need(db, REqual(rule.nu, rule.pi), "REqual(nu, pi)")
        if not rule.pi.discrete:
            raise _fail("canonical leaf coloring is not discrete")
        sigma = rule.pi.perm()
        return Canonical(relabel_graph(g, sigma), act_coloring(pi0, sigma))

    raise AssertionError(f"unhandled rule {type(rule).__name__}")


# --------------------------------------------------------------------------
# Stream verification
# --------------------------------------------------------------------------


@dataclass
class Verdict:
    """Outcome of checking one proof stream."""

    accepted: bool
    canonical_graph: Graph | None = None
    canonical_coloring: Coloring | None = None
    error_kind: str | None = None
    error_index: int | None = None
    error_message: str | None = None
    rules_applied: int = 0
    facts: int = 0

    @property
    def reason(self) -> str | None:
        if self.accepted:
            return None
        where = "" if self.error_index is None else f" at rule {self.error_index}"
        return f"{self.error_kind}{where}: {self.error_message}"


def verify_proof(
    g: Graph,
    pi0: Coloring,
    data: bytes,
    db: FactDatabase | None = None,
) -> Verdict:
    """Check a proof stream against ``(G, pi0)``.

    Accepts iff the stream decodes end to end, every rule applies, and a
    Canonical fact was derived. The first Canonical fact provides the
    verdict's canonical graph and coloring.
    """
    if db is None:
        db = FlatSetDatabase()
    canonical: Canonical | None = None
    applied = 0
    try:
        n, pos = decode_int(data, 0)
    except ProofDecodeError as exc:
        return Verdict(False, error_kind=DECODE, error_message=str(exc))
    if n != g.n:
        return Verdict(
            False,
            error_kind=N_MISMATCH,
            error_message=f"proof is for n={n}, graph has n={g.n}",
        )
    while pos < len(data):
        try:
            rule, pos = decode_rule(data, pos, n)
        except ProofDecodeError as exc:
            return Verdict(
                False,
                error_kind=DECODE,
                error_index=applied,
                error_message=str(exc),
                rules_applied=applied,
                facts=len(db),
            )
        try:
            fact = apply_rule(g, pi0, rule, db)
        except CheckFailure as exc:
            return Verdict(
                False,
                error_kind=exc.kind,
                error_index=applied,
                error_message=f"{type(rule).__name__}: {exc}",
                rules_applied=applied,
                facts=len(db),
            )
        db.insert(fact_key(fact))
        if canonical is None and isinstance(fact, Canonical):
            canonical = fact
        applied += 1
    if canonical is None:
        return Verdict(
            False,
            error_kind=NO_CANONICAL,
            error_message="stream ended without deriving a canonical form",
            rules_applied=applied,
            facts=len(db),
        )
    return Verdict(
        True,
        canonical_graph=canonical.graph,
        canonical_coloring=canonical.coloring,
        rules_applied=applied,
        facts=len(db),
    )
