"""Multi-outcome sequential games on finite arenas.

A game couples an arena with a leveled valuation (a difference chain
whose indices carry outcome labels) and one linear preference order per
player, written worst-to-best (most-preferred last).  The outcome of a
play is the label of the minimal chain index it visits, with the final
index standing for "visited nothing".
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from .core import Arena, Play, antagonistic, validate_arena
from .pointclass import DiffChain, LeveledValuation, Product, compile_chain


class UnreachableStateError(ValueError):
    """Raised for residual queries at product states that cannot occur."""


@dataclass(frozen=True)
class MultiOutcomeGame:
    """Arena + leveled valuation + per-player preferences.

    ``prefs[p]`` is a permutation of the outcome set with the
    most-preferred outcome last.
    """

    arena: Arena
    valuation: LeveledValuation
    prefs: tuple[tuple[str, ...], ...]

    def __post_init__(self):
        outs = set(self.valuation.labels)
        if len(self.prefs) != self.arena.n_players:
            raise ValueError("one preference list per player required")
        for p, order in enumerate(self.prefs):
            if set(order) != outs or len(order) != len(set(order)):
                raise ValueError(f"preferences of player {p} are not a permutation of the outcomes")

    @property
    def outcomes(self) -> tuple[str, ...]:
        return self.prefs[0]

    def rank(self, player: int, outcome: str) -> int:
        return self.prefs[player].index(outcome)

    def prefers(self, player: int, a: str, b: str) -> bool:
        """Strictly prefers a over b."""
        return self.rank(player, a) > self.rank(player, b)

    def upper_set(self, player: int, outcome: str) -> frozenset[str]:
        r = self.rank(player, outcome)
        return frozenset(o for o in self.prefs[player] if self.rank(player, o) >= r)

    def is_antagonistic(self) -> bool:
        return self.arena.n_players == 2 and antagonistic(self.prefs[0], self.prefs[1])


def game_product(game: MultiOutcomeGame) -> Product:
    return compile_chain(game.valuation.chain, game.arena).product


def outcome_of(game: MultiOutcomeGame, play: Play) -> str:
    """Label of the minimal valuation level the play visits.

    Weak-condition semantics: only the set of visited vertices matters,
    never the order or the position of the cycle.
    """
    m = game.valuation.chain.min_index(play.visited())
    return game.valuation.labels[m]


def settled_outcome(game: MultiOutcomeGame, product: Product, product_play: Play) -> str:
    """Outcome read off the settled counter of a product lasso."""
    settled = min(product.counter_of[s] for s in product_play.cycle)
    return game.valuation.labels[settled]


@lru_cache(maxsize=None)
def residual_game(game: MultiOutcomeGame, at: int, memory: int) -> MultiOutcomeGame:
    """The game restarted at vertex ``at`` with counter value ``memory``.

    The valuation keeps its first ``memory`` targets and labels (deeper
    levels can no longer fire once the counter has dropped), and the
    arena is re-rooted and restricted to the reachable part.  Vertex ids
    are renumbered in ascending order of the original ids; the root query
    with ``memory`` equal to the full level returns a game identical to
    the original up to that renumbering.
    """
    arena = game.arena
    chain = game.valuation.chain
    if not 0 <= memory <= chain.level:
        raise UnreachableStateError(f"memory {memory} outside 0..{chain.level}")
    entry = min(memory, chain.vertex_index(at))
    product = game_product(game)
    reachable_states = {product.state_tuple(s) for s in product.states()}
    if (at, entry) not in reachable_states:
        raise UnreachableStateError(f"state ({at}, {memory}) is not reachable in the product")
    keep = {at}
    todo = [at]
    while todo:
        v = todo.pop()
        for _, t in arena.edges[v]:
            if t not in keep:
                keep.add(t)
                todo.append(t)
    order = sorted(keep)
    remap = {v: i for i, v in enumerate(order)}
    owner = [arena.owner[v] for v in order]
    edges = [[(l, remap[t]) for l, t in arena.edges[v]] for v in order]
    new_arena = validate_arena(owner, edges, remap[at], arena.n_players)
    new_targets = [frozenset(remap[v] for v in tset if v in keep) for tset in chain.targets[:memory]]
    new_chain = DiffChain(tuple(new_targets))
    new_val = LeveledValuation(new_chain, game.valuation.labels[: memory + 1])
    return MultiOutcomeGame(new_arena, new_val, game.prefs)


def residual_vertex_map(game: MultiOutcomeGame, at: int) -> dict[int, int]:
    """Original-vertex -> residual-vertex renumbering used by residual_game."""
    arena = game.arena
    keep = {at}
    todo = [at]
    while todo:
        v = todo.pop()
        for _, t in arena.edges[v]:
            if t not in keep:
                keep.add(t)
                todo.append(t)
    return {v: i for i, v in enumerate(sorted(keep))}
