"""Finite-level difference-hierarchy conditions over plays.

Two interchangeable presentations are supported:

* ``DiffChain`` -- an increasing sequence of vertex target sets
  ``T_0 <= T_1 <= ... <= T_{a-1}``.  A play belongs to the condition iff
  ``par(m) != par(a)`` where ``m`` is the least index whose target the
  play visits (``m = a`` when it visits none) and ``par`` is parity.
  Level 1 is plain reachability, level 2 is "visit T_1 but avoid T_0".

* ``PrefixExpr`` -- a union ``U v_i . (complement of child_i)`` over a
  prefix-free family of label words, children one level down; the level-0
  expression is the empty set.

``prefix_to_chain`` converts the second form into the first by unfolding
the word regions of an arena into fresh vertices, so that matching a word
becomes visiting a vertex.  ``compile`` builds the memory product whose
counter tracks the minimal target index visited so far.

Conditions here are *weak*: membership depends only on the set of states
a play visits, never on infinitary repetition.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from .core import Arena, ArenaError, Play, validate_arena


def par(alpha: int) -> int:
    """Parity of a finite level index (the limit-ordinal clause is moot)."""
    if alpha < 0:
        raise ValueError("level must be non-negative")
    return alpha % 2


@dataclass(frozen=True)
class DiffChain:
    """Increasing chain of vertex target sets; level = number of targets.

    The constructor helper ``diff_chain`` normalizes arbitrary families by
    cumulative union, which leaves the minimal-index semantics unchanged
    and makes the compiled counter monotone.
    """

    targets: tuple[frozenset[int], ...]

    @property
    def level(self) -> int:
        return len(self.targets)

    def __post_init__(self):
        for i in range(len(self.targets) - 1):
            if not self.targets[i] <= self.targets[i + 1]:
                raise ValueError(f"targets not increasing at index {i}")

    def min_index(self, visited: frozenset[int]) -> int:
        for beta, t in enumerate(self.targets):
            if visited & t:
                return beta
        return self.level

    def vertex_index(self, v: int) -> int:
        for beta, t in enumerate(self.targets):
            if v in t:
                return beta
        return self.level


def diff_chain(targets, level: int | None = None) -> DiffChain:
    """Build a DiffChain, normalizing the family to an increasing one."""
    cum: list[frozenset[int]] = []
    acc: frozenset[int] = frozenset()
    for t in targets:
        acc = acc | frozenset(t)
        cum.append(acc)
    if level is not None and level != len(cum):
        raise ValueError(f"declared level {level} but {len(cum)} targets given")
    return DiffChain(tuple(cum))


def eval_membership(cond: DiffChain, play: Play) -> int:
    """1 iff par(min visited target index) differs from par(level)."""
    m = cond.min_index(play.visited())
    return 1 if par(m) != par(cond.level) else 0


@dataclass(frozen=True)
class PrefixExpr:
    """Prefix-form expression: branches (word, child) one level down.

    Branch words are pairwise prefix-incomparable, so at most one of them
    can prefix a given play.  Matching word ``v`` contributes the plays
    ``v . x`` with ``x`` outside the child's set.
    """

    level: int
    branches: tuple[tuple[tuple[int, ...], "PrefixExpr"], ...]

    def __post_init__(self):
        if self.level < 0:
            raise ValueError("negative level")
        if self.level == 0 and self.branches:
            raise ValueError("level-0 expression is the constant empty set")
        words = [w for w, _ in self.branches]
        for i, wi in enumerate(words):
            for j, wj in enumerate(words):
                if i != j and wj[: len(wi)] == wi:
                    raise ValueError(f"branch words {wi} and {wj} are prefix-comparable")
        for w, child in self.branches:
            if child.level != self.level - 1:
                raise ValueError(f"child under {w} has level {child.level}, expected {self.level - 1}")


@dataclass(frozen=True)
class LeveledValuation:
    """A difference chain with one outcome label per index 0..level.

    ``labels[m]`` is the outcome of plays whose minimal visited target
    index is ``m``; ``labels[level]`` covers plays visiting no target.
    """

    chain: DiffChain
    labels: tuple[str, ...]

    def __post_init__(self):
        if len(self.labels) != self.chain.level + 1:
            raise ValueError(
                f"need {self.chain.level + 1} labels for level {self.chain.level}, got {len(self.labels)}"
            )


EMPTY_EXPR = PrefixExpr(0, ())


def prefix_expr(level: int, branches=()) -> PrefixExpr:
    return PrefixExpr(level, tuple((tuple(w), c) for w, c in sorted(branches, key=lambda b: tuple(b[0]))))


def _eval_prefix_at(expr: PrefixExpr, play: Play, offset: int) -> int:
    if expr.level == 0:
        return 0
    for word, child in expr.branches:
        if all(play.label(offset + i) == word[i] for i in range(len(word))):
            return 1 - _eval_prefix_at(child, play, offset + len(word))
    return 0


def eval_prefix(expr: PrefixExpr, play: Play) -> int:
    """Membership of the play's label sequence in the prefix expression."""
    return _eval_prefix_at(expr, play, 0)


def complement_expr(expr: PrefixExpr) -> PrefixExpr:
    """Complement, one level up: a single empty-word branch."""
    return PrefixExpr(expr.level + 1, (((), expr),))


def shift_union(exprs, with_point: bool = False, point_depth: int = 8) -> PrefixExpr:
    """Union of the inputs shifted under pairwise incomparable words 0^n 1.

    Plain variant: members are exactly ``U_n 0^n 1 . members(expr_n)``;
    the result keeps the common level.  With ``with_point`` the all-zeros
    play is adjoined; since a bare point is not a finite union of cones,
    it is represented by its depth-``point_depth`` cone ``0^K . anything``
    (exact on every play with fewer than K leading zeros), and the result
    sits two levels up via double complementation.
    """
    exprs = list(exprs)
    if exprs:
        lvl = exprs[0].level
        if any(e.level != lvl for e in exprs):
            raise ValueError("inputs must share a level")
    elif not with_point:
        raise ValueError("empty list without the adjoined point")
    else:
        lvl = 0
    shifted = [(tuple([0] * n + [1]) + w, c) for n, e in enumerate(exprs) for (w, c) in e.branches]
    if not with_point:
        return prefix_expr(lvl, shifted)
    depth = max(point_depth, len(exprs))
    lifted = [(tuple([0] * n + [1]), complement_expr(e)) for n, e in enumerate(exprs)]
    lifted.append((tuple([0] * depth), PrefixExpr(lvl + 1, ())))
    return prefix_expr(lvl + 2, lifted)


# --------------------------------------------------------------------------
# Unfolding prefix expressions into arenas with fresh word regions


class _Builder:
    """Mutable arena under construction for the unfolding."""

    def __init__(self, base: Arena):
        self.base = base
        self.owner: list[int] = []
        self.edges: list[dict[int, int]] = []
        self.region: list[str] = []

    def fresh(self, owner: int, region: str) -> int:
        self.owner.append(owner)
        self.edges.append({})
        self.region.append(region)
        return len(self.owner) - 1

    def copy_from(self, v: int, region: str, mapping: dict[int, int]) -> int:
        """Lazily copy the base subgraph reachable from base vertex v."""
        if v in mapping:
            return mapping[v]
        nv = self.fresh(self.base.owner[v], region)
        mapping[v] = nv
        for label, t in self.base.edges[v]:
            self.edges[nv][label] = self.copy_from(t, region, mapping)
        return nv


def _realize(expr: PrefixExpr, b: _Builder, base_v: int, targets: list[set[int]], tag: str) -> int:
    """Build the fresh region for ``expr`` evaluated from base vertex
    ``base_v`` and return its entry state.

    ``targets[d]`` collects, across the whole recursion, the atoms of the
    chain level ``d`` (0 = innermost).  For an expression of level n the
    cone entries land in ``targets[n-1]``; child material lands below
    because the list is shared by the recursion and indexed by absolute
    level.
    """
    if expr.level == 0:
        return b.copy_from(base_v, tag + "/rest", {})
    by_word = {w: c for w, c in expr.branches}
    words = sorted(by_word)
    for w in words:
        v = base_v
        for lab in w:
            if not b.base.has_label(v, lab):
                raise ArenaError(f"branch word {w} not realizable from vertex {base_v}")
            v = b.base.step(v, lab)
    if () in by_word:
        # sole branch at the empty word: the cone starts right here
        entry = _realize(by_word[()], b, base_v, targets, tag + "/e")
        targets[expr.level - 1].add(entry)
        return entry
    limbo: dict[int, int] = {}

    def trie_node(w: tuple[int, ...], bv: int) -> int:
        node = b.fresh(b.base.owner[bv], tag + "/trie")
        for label, t in b.base.edges[bv]:
            w2 = w + (label,)
            if w2 in by_word:
                entry = _realize(by_word[w2], b, t, targets, tag + "/" + "".join(map(str, w2)))
                targets[expr.level - 1].add(entry)
                b.edges[node][label] = entry
            elif any(v[: len(w2)] == w2 for v in words):
                b.edges[node][label] = trie_node(w2, t)
            else:
                b.edges[node][label] = b.copy_from(t, tag + "/limbo", limbo)
        return node

    return trie_node((), base_v)


def prefix_to_chain(expr: PrefixExpr, arena: Arena) -> tuple[DiffChain, Arena]:
    """Convert to chain form over an unfolded arena.

    Word regions become disjoint fresh vertices (a trie per expression
    node, nested cones fully fresh), so that "the label sequence starts
    with v_i" coincides with "the play visits the cone entry".  The
    resulting chain agrees with ``eval_prefix`` on every play of the
    returned arena.
    """
    b = _Builder(arena)
    targets: list[set[int]] = [set() for _ in range(expr.level)]
    root = _realize(expr, b, arena.root, targets, "r")
    edges = [sorted(d.items()) for d in b.edges]
    unfolded = validate_arena(b.owner, edges, root, arena.n_players)
    return diff_chain(targets[: expr.level]), unfolded


# --------------------------------------------------------------------------
# Memory product and compiled conditions


@dataclass(frozen=True)
class Product:
    """Reachable (vertex, counter) product of an arena with a chain.

    The counter starts at the root's own minimal target index and is
    updated to ``min(counter, index(vertex))`` on every move, so it is
    monotone non-increasing and stabilizes on every lasso.  States are
    indexed in BFS order; public APIs address them as (vertex, counter)
    pairs.
    """

    arena: Arena            # the product graph itself
    base: Arena
    chain: DiffChain
    vertex_of: tuple[int, ...]
    counter_of: tuple[int, ...]

    def state_index(self, state: tuple[int, int]) -> int:
        try:
            return self._index[state]  # type: ignore[attr-defined]
        except AttributeError:
            idx = {(self.vertex_of[s], self.counter_of[s]): s for s in range(len(self.vertex_of))}
            object.__setattr__(self, "_index", idx)
            return idx[state]

    def state_tuple(self, s: int) -> tuple[int, int]:
        return (self.vertex_of[s], self.counter_of[s])

    def states(self):
        return range(len(self.vertex_of))

    @property
    def initial(self) -> int:
        return self.arena.root


@dataclass(frozen=True)
class CompiledCondition:
    """Monotone-counter automaton plus its accepting counter values."""

    alpha: int
    accepting: frozenset[int]
    product: Product

    def accepts_settled(self, counter: int) -> bool:
        return counter in self.accepting


@lru_cache(maxsize=None)
def compile_chain(cond: DiffChain, arena: Arena) -> CompiledCondition:
    """Build the (vertex, counter) product for a chain over an arena."""
    for t in cond.targets:
        for v in t:
            if not 0 <= v < len(arena):
                raise ValueError(f"target vertex {v} outside the arena")
    idx = [cond.vertex_index(v) for v in range(len(arena))]
    init = (arena.root, idx[arena.root])
    order: dict[tuple[int, int], int] = {init: 0}
    queue = [init]
    edges: list[list[tuple[int, int]]] = [[]]
    while queue:
        v, c = state = queue.pop(0)
        s = order[state]
        out = []
        for label, t in arena.edges[v]:
            nxt = (t, min(c, idx[t]))
            if nxt not in order:
                order[nxt] = len(order)
                queue.append(nxt)
                edges.append([])
            out.append((label, order[nxt]))
        edges[s] = out
    states = sorted(order, key=order.get)
    owner = [arena.owner[v] for v, _ in states]
    product_arena = validate_arena(owner, edges, 0, arena.n_players)
    product = Product(
        product_arena,
        arena,
        cond,
        tuple(v for v, _ in states),
        tuple(c for _, c in states),
    )
    accepting = frozenset(c for c in range(cond.level + 1) if par(c) != par(cond.level))
    return CompiledCondition(cond.level, accepting, product)


def accepts_lasso(compiled: CompiledCondition, product_play: Play) -> int:
    """Acceptance of a product lasso: the cycle's counter has stabilized."""
    cyc = set(product_play.cycle)
    settled = min(compiled.product.counter_of[s] for s in cyc)
    return 1 if settled in compiled.accepting else 0


def project_play(product: Product, product_play: Play) -> Play:
    """Map a product lasso to the underlying base-arena lasso."""
    return Play(
        tuple(product.vertex_of[s] for s in product_play.stem),
        product_play.stem_labels,
        tuple(product.vertex_of[s] for s in product_play.cycle),
        product_play.cycle_labels,
    )


# --------------------------------------------------------------------------
# Reshaping chains: arbitrary accepting level sets back into parity form


def _runs(bits: list) -> list[tuple[int, int]]:
    """Maximal runs of equal values: list of (end_index_inclusive, value)."""
    out = []
    for i, v in enumerate(bits):
        if out and out[-1][1] == v:
            out[-1] = (i, v)
        else:
            out.append((i, v))
    return out


def chain_for_level_set(chain: DiffChain, accept: set[int], n_vertices: int) -> tuple[DiffChain, tuple[int, ...]]:
    """A parity-form chain accepting exactly the plays whose minimal
    visited index of ``chain`` lies in ``accept``.

    Returns the new chain plus the counter map sending old counter values
    to new ones.  Runs of equally-labelled indices share a level; a full
    target (all vertices) realizes acceptance of the "visited nothing"
    class.  The result has level at most ``chain.level + 1``.
    """
    alpha = chain.level
    bits = [1 if m in accept else 0 for m in range(alpha + 1)]
    runs = _runs(bits)
    if runs[-1][1] == 0:
        runs = runs[:-1]          # outer rejecting run maps to inf-empty
    k = len(runs)
    if k == 0:
        new = DiffChain(())       # level 0: reject everything
        return new, tuple(0 for _ in range(alpha + 1))
    # anchor parity: par(0) != par(level) must hold iff the innermost run accepts
    level = k if (par(k) != par(0)) == bool(runs[0][1]) else k + 1
    full = frozenset(range(n_vertices))
    targets = []
    for end, _ in runs:
        targets.append(full if end >= alpha else chain.targets[end])
    if level == k + 1:
        targets.append(targets[-1])   # dummy duplicate, never the minimum
    new = DiffChain(tuple(targets))
    cmap = []
    for m in range(alpha + 1):
        j = next((j for j, (end, _) in enumerate(runs) if m <= end), level)
        cmap.append(j)
    return new, tuple(cmap)


def chain_from_classes(classes, n_vertices: int, residual_label=None):
    """Chain + labels from an ordered class decomposition.

    ``classes`` lists (vertex set, label) pairs from the innermost class
    outward; a play's outcome is the label of the deepest class whose
    atom set it visits.  Adjacent classes with equal labels share a
    level.  ``residual_label`` labels plays that visit no atom at all
    (only legal when the caller knows such plays exist or wants a
    default).
    """
    runs: list[tuple[set[int], object]] = []
    for atoms, label in classes:
        if runs and runs[-1][1] == label:
            runs[-1][0].update(atoms)
        else:
            runs.append((set(atoms), label))
    if residual_label is None and runs:
        residual_label = runs[-1][1]
    chain = diff_chain([atoms for atoms, _ in runs])
    labels = tuple([label for _, label in runs] + [residual_label])
    return chain, labels


def bit_chain_from_classes(classes, n_vertices: int) -> DiffChain:
    """Parity-form chain for win/lose class decompositions.

    Labels must be 0/1 bits and every play must visit some atom.  Tries
    both orders of any leading equal-depth pair is the caller's business;
    this routine just anchors the parity, inserting a dummy duplicate
    level when the run count has the wrong parity.
    """
    merged: list[tuple[set[int], int]] = []
    for atoms, bit in classes:
        if merged and merged[-1][1] == bit:
            merged[-1][0].update(atoms)
        else:
            merged.append((set(atoms), int(bit)))
    k = len(merged)
    if k == 0:
        return DiffChain(())
    level = k if (par(0) != par(k)) == bool(merged[0][1]) else k + 1
    targets = [atoms for atoms, _ in merged]
    if level == k + 1:
        targets.append(set(targets[-1]))
    return diff_chain(targets)
