"""Proof emission: turning a canonical-labelling run into a checkable stream.

Two strategies produce a rule stream that the independent checker replays:

* ``emit_during`` translates the search's decision trace one event at a time.
  Every pruning decision the engine made (orbit cuts, invariant cuts, leaf
  comparisons, dethronings of a superseded best path) becomes the rule(s)
  justifying it, in the order the search made them.

* ``emit_post`` reconstructs a certificate after the fact from the search's
  outputs alone (canonical path, invariant vector, automorphism generators).
  It walks only the final reduced tree and picks the cheapest justification
  for each discarded branch - a single automorphism rule when one generator
  maps the branch below an earlier sibling, an orbit argument replayed just
  far enough to cover the cut, an invariant comparison, or (last resort) a
  recursive descent. Its streams are never larger than the during-search
  ones for the same input.

Both emitters track every fact they have derived and refuse to emit a rule
whose premises are not yet on the stream (:class:`EmitError`); side
conditions the checker will recompute are asserted here first, so a hash
collision or an internal inconsistency surfaces at emission time rather
than as a checker rejection.
"""

from __future__ import annotations

from dataclasses import dataclass

from .core import (
    Coloring,
    Graph,
    act_coloring,
    compose,
    graph_compare,
    identity_perm,
    invert,
    is_automorphism,
    relabel_graph,
    unit_coloring,
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
    encode_proof,
    fact_key,
)
from .refine import individualize, make_equitable, split, target_cell
from .search import (
    CanonicalResult,
    ChildInvariantPrunedEv,
    ChildOrbitPrunedEv,
    DethroneInvariantEv,
    DethroneLeafEv,
    LeafWorseEv,
    OrbitMergeEv,
    ParentDoneEv,
    SearchError,
    TraceEvent,
    canonical_form,
)

Node = tuple[int, ...]


class EmitError(RuntimeError):
    """An emitter tried to write a rule it cannot justify."""


@dataclass
class EmittedProof:
    """A binary proof stream together with the solver result it certifies."""

    data: bytes
    result: CanonicalResult
    rule_count: int


# An orbit-merge record: the two classes as they were just before the merge,
# the automorphism responsible, and the witness pair it mapped.
_MergeOp = tuple[frozenset[int], frozenset[int], tuple[int, ...], int, int]

# vertex -> [(image, generator moving it there), ...]
_EdgeMap = dict[int, list[tuple[int, tuple[int, ...]]]]


class _Emitter:
    """Shared emission machinery: fact bookkeeping and derivation chains."""

    def __init__(self, g: Graph, pi0: Coloring):
        self.g = g
        self.pi0 = pi0
        self.rules: list[Rule] = []
        self._have: set[tuple[int, ...]] = set()
        self._refined: dict[Node, Coloring] = {}
        self._chained: set[Node] = set()
        self._targets: dict[Node, tuple[int, ...]] = {}
        self._hashes: dict[Node, int] = {}

    # -- fact bookkeeping --------------------------------------------------

    def have(self, fact: Fact) -> bool:
        return fact_key(fact) in self._have

    def emit(self, rule: Rule, premises: tuple[Fact, ...], conclusion: Fact) -> None:
        """Append a rule after verifying its premises are already derived.

        A rule whose conclusion is already on the stream is dropped: the
        checker's fact database makes re-derivations pointless.
        """
        key = fact_key(conclusion)
        if key in self._have:
            return
        for fact in premises:
            if fact_key(fact) not in self._have:
                raise EmitError(
                    f"{type(rule).__name__} needs underived premise "
                    f"{type(fact).__name__}"
                )
        self.rules.append(rule)
        self._have.add(key)

    # -- refinement chains ---------------------------------------------------

    def ensure_node(self, nu: Node) -> Coloring:
        """Derive ``REqual(nu, pi)`` for the node's refined coloring.

        Emits the whole chain on first use - the root's axiom or the parent's
        chain plus an individualization, the splitting rounds, and the
        equitability step - and memoizes the result.
        """
        if nu in self._chained:
            return self._refined[nu]
        if not nu:
            self.emit(ColoringAxiom(), (), RFiner((), self.pi0))
            pi = self._equitable_chain((), self.pi0, self.pi0.cells)
        else:
            parent = nu[:-1]
            parent_pi = self.ensure_node(parent)
            v = nu[-1]
            ind = individualize(parent_pi, v)
            self.emit(
                Individualize(parent, v, parent_pi),
                (REqual(parent, parent_pi),),
                RFiner(nu, ind),
            )
            pi = self._equitable_chain(nu, ind, [(v,)])
        self._refined[nu] = pi
        self._chained.add(nu)
        return pi

    def _equitable_chain(self, nu: Node, start: Coloring, alpha) -> Coloring:
        def on_split(before: Coloring, w: tuple[int, ...], after: Coloring) -> None:
            # The checker re-derives this round as a split against the first
            # effective cell; that must be exactly the round the refiner ran.
            if split(self.g, before, before.cells.index(w)) != after:
                raise EmitError("refinement round disagrees with its replay")
            self.emit(
                SplitColoring(nu, before), (RFiner(nu, before),), RFiner(nu, after)
            )

        final = make_equitable(self.g, start, alpha, on_split)
        self.emit(Equitable(nu, final), (RFiner(nu, final),), REqual(nu, final))
        return final

    def node_hash(self, nu: Node) -> int:
        h = self._hashes.get(nu)
        if h is None:
            h = hash_colored(self.g, self.ensure_node(nu))
            self._hashes[nu] = h
        return h

    def ensure_target(self, nu: Node) -> tuple[int, ...]:
        """Derive ``TargetIs(nu, cell)`` for the first non-singleton cell."""
        cell = self._targets.get(nu)
        if cell is None:
            pi = self.ensure_node(nu)
            cell = target_cell(pi)
            if cell is None:
                raise EmitError("target cell requested at a leaf")
            self.emit(TargetCell(nu, pi), (REqual(nu, pi),), TargetIs(nu, cell))
            self._targets[nu] = cell
        return cell

    # -- invariant ladders ---------------------------------------------------

    def ensure_phi(self, nu1: Node, nu2: Node) -> None:
        """Derive ``PhiEqual(nu1, nu2)`` level by level along both prefixes."""
        if len(nu1) != len(nu2):
            raise EmitError("invariant ladder needs equal-length nodes")
        if self.have(PhiEqual(nu1, nu2)):
            return
        if nu1 == nu2:
            self.emit(InvariantAxiom(nu1), (), PhiEqual(nu1, nu1))
            return
        self.ensure_phi(nu1[:-1], nu2[:-1])
        pi1 = self.ensure_node(nu1)
        pi2 = self.ensure_node(nu2)
        if self.node_hash(nu1) != self.node_hash(nu2):
            raise EmitError("invariant ladder over unequal hashes")
        self.emit(
            InvariantsEqual(nu1, pi1, nu2, pi2),
            (PhiEqual(nu1[:-1], nu2[:-1]), REqual(nu1, pi1), REqual(nu2, pi2)),
            PhiEqual(nu1, nu2),
        )

    def ensure_phi_sym(self, nu1: Node, nu2: Node) -> None:
        """Derive ``PhiEqual(nu2, nu1)``, mirroring the forward fact.

        Prunes along a path typically record invariant equalities with the
        best node first; when the roles flip (the old best gets pruned), one
        symmetry rule reuses the whole existing ladder.
        """
        if self.have(PhiEqual(nu2, nu1)):
            return
        self.ensure_phi(nu1, nu2)
        self.emit(
            InvariantsEqualSym(nu1, nu2), (PhiEqual(nu1, nu2),), PhiEqual(nu2, nu1)
        )

    # -- orbit facts -----------------------------------------------------------

    def ensure_singleton_orbit(self, nu: Node, v: int) -> None:
        fact = OrbitSubset(nu, (v,))
        if not self.have(fact):
            self.emit(OrbitsAxiom(v, nu), (), fact)

    def emit_merge(self, nu: Node, op: _MergeOp) -> None:
        """Emit one orbit-class merge; both class facts must already exist
        (singletons are derived on the spot)."""
        class1, class2, sigma, w1, w2 = op
        o1 = tuple(sorted(class1))
        o2 = tuple(sorted(class2))
        if len(o1) == 1:
            self.ensure_singleton_orbit(nu, o1[0])
        if len(o2) == 1:
            self.ensure_singleton_orbit(nu, o2[0])
        if any(sigma[x] != x for x in nu) or sigma[w1] != w2:
            raise EmitError("orbit merge with an unusable automorphism")
        self.emit(
            MergeOrbits(o1, o2, nu, sigma, w1, w2),
            (OrbitSubset(nu, o1), OrbitSubset(nu, o2)),
            OrbitSubset(nu, tuple(sorted(class1 | class2))),
        )

    # -- the shared finale -----------------------------------------------------

    def finale(self, leaf: Node) -> None:
        """Derive the path facts down to the leaf and the canonical form."""
        self.emit(PathAxiom(), (), OnPath(()))
        for j, v in enumerate(leaf):
            prefix = leaf[:j]
            cell = self.ensure_target(prefix)
            premises: list[Fact] = [OnPath(prefix), TargetIs(prefix, cell)]
            premises += [Pruned(prefix + (w,)) for w in cell if w != v]
            self.emit(ExtendPath(prefix, cell, v), tuple(premises), OnPath(leaf[: j + 1]))
        pi = self.ensure_node(leaf)
        if not pi.discrete:
            raise EmitError("canonical path does not end at a leaf")
        sigma = pi.perm()
        self.emit(
            CanonicalLeaf(leaf, pi),
            (OnPath(leaf), REqual(leaf, pi)),
            Canonical(relabel_graph(self.g, sigma), act_coloring(self.pi0, sigma)),
        )


# ---------------------------------------------------------------------------
# During-search emission: translate the trace event by event
# ---------------------------------------------------------------------------


class _DuringTranslator(_Emitter):
    def handle(self, ev: TraceEvent) -> None:
        if isinstance(ev, OrbitMergeEv):
            self.emit_merge(ev.node, (ev.class1, ev.class2, ev.sigma, ev.w1, ev.w2))
        elif isinstance(ev, ChildOrbitPrunedEv):
            omega = tuple(sorted(ev.omega))
            self.emit(
                PruneOrbits(omega, ev.parent, ev.w1, ev.w),
                (OrbitSubset(ev.parent, omega),),
                Pruned(ev.parent + (ev.w,)),
            )
        elif isinstance(ev, ChildInvariantPrunedEv):
            self._prune_invariant(ev.best_child, ev.parent + (ev.w,))
        elif isinstance(ev, DethroneInvariantEv):
            k = len(ev.parent)
            self.ensure_phi_sym(ev.old_best[:k], ev.parent)
            self._prune_invariant(ev.parent + (ev.w,), ev.old_best[: k + 1])
            self._prune_parent_chain(ev.old_best, k, ev.diverge)
        elif isinstance(ev, DethroneLeafEv):
            self.ensure_phi_sym(ev.old_best, ev.node)
            self._prune_leaf(ev.node, ev.old_best)
            self._prune_parent_chain(ev.old_best, len(ev.old_best) - 1, ev.diverge)
        elif isinstance(ev, LeafWorseEv):
            self.ensure_phi(ev.best_node, ev.node)
            self._prune_leaf(ev.best_node, ev.node)
        elif isinstance(ev, ParentDoneEv):
            self._prune_parent(ev.node)
        else:  # pragma: no cover - the trace event union is closed
            raise EmitError(f"unknown trace event {type(ev).__name__}")

    def _prune_invariant(self, winner: Node, loser: Node) -> None:
        """``winner`` out-hashes ``loser`` at the same depth: prune the loser."""
        self.ensure_phi(winner[:-1], loser[:-1])
        pi1 = self.ensure_node(winner)
        pi2 = self.ensure_node(loser)
        if not self.node_hash(winner) > self.node_hash(loser):
            raise EmitError("invariant prune without a dominating hash")
        self.emit(
            PruneInvariant(winner, pi1, loser, pi2),
            (PhiEqual(winner[:-1], loser[:-1]), REqual(winner, pi1), REqual(loser, pi2)),
            Pruned(loser),
        )

    def _prune_leaf(self, winner: Node, loser: Node) -> None:
        """Equal invariant vectors, but ``winner``'s side wins outright."""
        pi1 = self.ensure_node(winner)
        pi2 = self.ensure_node(loser)
        if not pi2.discrete:
            raise EmitError("leaf prune of a non-leaf")
        if pi1.discrete:
            g1 = relabel_graph(self.g, pi1.perm())
            g2 = relabel_graph(self.g, pi2.perm())
            if graph_compare(g1, g2) <= 0:
                raise EmitError("leaf prune without a dominating graph")
        self.emit(
            PruneLeaf(winner, pi1, loser, pi2),
            (REqual(winner, pi1), REqual(loser, pi2), PhiEqual(winner, loser)),
            Pruned(loser),
        )

    def _prune_parent(self, node: Node) -> None:
        cell = self.ensure_target(node)
        premises: list[Fact] = [TargetIs(node, cell)]
        premises += [Pruned(node + (w,)) for w in cell]
        self.emit(PruneParent(node, cell), tuple(premises), Pruned(node))

    def _prune_parent_chain(self, old_best: Node, start: int, stop: int) -> None:
        """After a dethroning, fold the superseded path upward: each ancestor
        of the old best below the divergence point is now fully pruned."""
        for j in range(start, stop, -1):
            self._prune_parent(old_best[:j])


def emit_during(g: Graph, pi0: Coloring | None = None) -> EmittedProof:
    """Solve ``(G, pi0)`` and emit the proof in search order."""
    if pi0 is None:
        pi0 = unit_coloring(g.n)
    result = canonical_form(g, pi0, trace=True)
    em = _DuringTranslator(g, pi0)
    assert result.trace is not None
    for ev in result.trace:
        em.handle(ev)
    em.finale(result.leaf)
    _check_consistent(em, result)
    return EmittedProof(encode_proof(g.n, em.rules), result, len(em.rules))


# ---------------------------------------------------------------------------
# Post-search emission: rebuild a minimal certificate from the result
# ---------------------------------------------------------------------------


class _PostEmitter(_Emitter):
    def __init__(self, g: Graph, pi0: Coloring, result: CanonicalResult):
        super().__init__(g, pi0)
        self.result = result
        self.path = result.leaf
        self.phi = result.phi
        ident = identity_perm(g.n)
        pairs: list[tuple[tuple[int, ...], tuple[int, ...]]] = []
        seen: set[tuple[int, ...]] = set()
        for gen in result.generators:
            inv = invert(gen)
            for sigma, sigma_inv in ((gen, inv), (inv, gen)):
                if sigma != ident and sigma not in seen:
                    seen.add(sigma)
                    pairs.append((sigma, sigma_inv))
        self._pairs = pairs

    def run(self) -> None:
        path = self.path
        for d in range(len(path) + 1):
            self.ensure_node(path[:d])
        for d in range(len(path)):
            node = path[:d]
            cell = self.ensure_target(node)
            if path[d] not in cell:
                raise EmitError("canonical path leaves its target cell")
            edges = self._node_edges(node)
            for w in cell:
                if w != path[d]:
                    self._prune_child(node, w, edges)
        self.finale(path)

    # -- branch disposal, cheapest justification first ----------------------

    def _prune_child(self, x: Node, w: int, edges: _EdgeMap) -> None:
        """Derive ``Pruned(x + (w,))`` for an off-path child."""
        child = x + (w,)
        if self._try_automorphism(child):
            return
        if self._orbit_prune(x, w, edges):
            return
        depth = len(x)
        pi_child = self.ensure_node(child)
        h = self.node_hash(child)
        if h > self.phi[depth]:
            raise SearchError(
                "off-path branch dominates the canonical invariant "
                "(64-bit hash collision)"
            )
        on_child = self.path[: depth + 1]
        if x == self.path[:depth]:
            self.ensure_phi(x, x)
        pi_on = self.ensure_node(on_child)
        if h < self.phi[depth]:
            self.emit(
                PruneInvariant(on_child, pi_on, child, pi_child),
                (
                    PhiEqual(self.path[:depth], x),
                    REqual(on_child, pi_on),
                    REqual(child, pi_child),
                ),
                Pruned(child),
            )
            return
        self.emit(
            InvariantsEqual(on_child, pi_on, child, pi_child),
            (
                PhiEqual(self.path[:depth], x),
                REqual(on_child, pi_on),
                REqual(child, pi_child),
            ),
            PhiEqual(on_child, child),
        )
        self._descend(child, pi_child)

    def _descend(self, y: Node, pi_y: Coloring) -> None:
        """Dispose of an off-path node that ties the canonical invariant so
        far; ``PhiEqual(path[:len(y)], y)`` is already derived."""
        depth = len(y)
        length = len(self.path)
        if pi_y.discrete:
            if depth == length:
                self._kill_full_leaf(y, pi_y)
            else:
                # A leaf strictly above the canonical depth: its invariant
                # vector is a proper prefix, so the on-path node beats it.
                on = self.path[:depth]
                pi_on = self.ensure_node(on)
                if pi_on.discrete:
                    raise SearchError(
                        "canonical path is discrete above its leaf "
                        "(64-bit hash collision)"
                    )
                self.emit(
                    PruneLeaf(on, pi_on, y, pi_y),
                    (REqual(on, pi_on), REqual(y, pi_y), PhiEqual(on, y)),
                    Pruned(y),
                )
            return
        if depth == length:
            raise SearchError(
                "off-path branch outlives the canonical leaf (64-bit hash collision)"
            )
        cell = self.ensure_target(y)
        edges = self._node_edges(y)
        for w in cell:
            self._prune_child(y, w, edges)
        premises: list[Fact] = [TargetIs(y, cell)]
        premises += [Pruned(y + (w,)) for w in cell]
        self.emit(PruneParent(y, cell), tuple(premises), Pruned(y))

    def _kill_full_leaf(self, y: Node, pi_y: Coloring) -> None:
        path = self.path
        pi_star = self.ensure_node(path)
        g_y = relabel_graph(self.g, pi_y.perm())
        cmp = graph_compare(g_y, self.result.graph)
        if cmp > 0:
            raise SearchError(
                "off-path leaf beats the canonical graph (64-bit hash collision)"
            )
        if cmp < 0:
            self.emit(
                PruneLeaf(path, pi_star, y, pi_y),
                (REqual(path, pi_star), REqual(y, pi_y), PhiEqual(path, y)),
                Pruned(y),
            )
            return
        # Equal graphs: the relabelling that carries one leaf onto the other
        # is an automorphism mapping the canonical path below this one.
        sigma = compose(pi_star.perm(), invert(pi_y.perm()))
        if (
            any(sigma[a] != b for a, b in zip(path, y))
            or not path < y
            or not is_automorphism(self.g, self.pi0, sigma)
        ):
            raise SearchError(
                "equal leaves with incompatible structure (64-bit hash collision)"
            )
        self.emit(PruneAutomorphism(path, y, sigma), (), Pruned(y))

    # -- automorphism and orbit machinery ------------------------------------

    def _try_automorphism(self, child: Node) -> bool:
        """One stored generator mapping an earlier sequence onto this child
        prunes it with a single premise-free rule."""
        for sigma, sigma_inv in self._pairs:
            nu1 = tuple(sigma_inv[v] for v in child)
            if nu1 < child:
                self.emit(PruneAutomorphism(nu1, child, sigma), (), Pruned(child))
                return True
        return False

    def _node_edges(self, node: Node) -> _EdgeMap:
        """Automorphism moves available at a node: for every generator that
        fixes the node pointwise, an edge ``v -> sigma[v]`` with its witness."""
        edges: _EdgeMap = {}
        for sigma, _ in self._pairs:
            if all(sigma[v] == v for v in node):
                for v, image in enumerate(sigma):
                    if image != v:
                        edges.setdefault(v, []).append((image, sigma))
        return edges

    def _orbit_prune(self, x: Node, w: int, edges: _EdgeMap) -> bool:
        """Prune a child by an orbit argument built from the shortest chain
        of generator moves carrying ``w`` to a smaller vertex.

        The chain becomes one singleton merge per hop, so the emitted class
        is as small as the generators allow.
        """
        prev: dict[int, tuple[int, tuple[int, ...]]] = {w: (w, ())}
        frontier = [w]
        goal = -1
        while frontier and goal < 0:
            next_frontier = []
            for a in frontier:
                for b, sigma in edges.get(a, ()):
                    if b in prev:
                        continue
                    prev[b] = (a, sigma)
                    if b < w:
                        goal = b
                        break
                    next_frontier.append(b)
                if goal >= 0:
                    break
            frontier = next_frontier
        if goal < 0:
            return False
        chain: list[tuple[int, int, tuple[int, ...]]] = []
        v = goal
        while v != w:
            a, sigma = prev[v]
            chain.append((a, v, sigma))
            v = a
        chain.reverse()
        members = [w]
        self.ensure_singleton_orbit(x, w)
        for a, b, sigma in chain:
            self.ensure_singleton_orbit(x, b)
            omega1 = tuple(sorted(members))
            members.append(b)
            self.emit(
                MergeOrbits(omega1, (b,), x, sigma, a, b),
                (OrbitSubset(x, omega1), OrbitSubset(x, (b,))),
                OrbitSubset(x, tuple(sorted(members))),
            )
        omega = tuple(sorted(members))
        self.emit(
            PruneOrbits(omega, x, goal, w), (OrbitSubset(x, omega),), Pruned(x + (w,))
        )
        return True


def emit_post(g: Graph, pi0: Coloring | None = None) -> EmittedProof:
    """Solve ``(G, pi0)`` and emit a compact proof reconstructed afterwards."""
    if pi0 is None:
        pi0 = unit_coloring(g.n)
    result = canonical_form(g, pi0)
    em = _PostEmitter(g, pi0, result)
    em.run()
    _check_consistent(em, result)
    return EmittedProof(encode_proof(g.n, em.rules), result, len(em.rules))


def emit_proof(
    g: Graph, pi0: Coloring | None = None, strategy: str = "post"
) -> EmittedProof:
    """Emit a proof with the named strategy (``"during"`` or ``"post"``)."""
    if strategy == "during":
        return emit_during(g, pi0)
    if strategy == "post":
        return emit_post(g, pi0)
    raise ValueError(f"unknown emission strategy {strategy!r}")


def _check_consistent(em: _Emitter, result: CanonicalResult) -> None:
    """The emitted canonical leaf must reproduce the solver's answer."""
    pi = em._refined.get(result.leaf)
    if pi is None or relabel_graph(em.g, pi.perm()) != result.graph:
        raise EmitError("emitted proof does not reproduce the solver result")
