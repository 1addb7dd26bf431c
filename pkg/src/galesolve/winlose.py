"""Solving two-player win/lose games with weak winning conditions.

Player 0 (the protagonist) wins a play iff it satisfies the game's
condition; player 1 wins otherwise.  Solving happens on the monotone
counter product: counter strata are processed from the innermost value
upward, each stratum resolved by one attractor computation for the player
who must escape it (the one for whom settling at that counter value is
losing).  This yields the winner and a positional winning strategy at
every product state.

Spoiler moves for the losing side are taken from the complement solve
(same product, complemented acceptance) so that the full move maps are
deterministic; they serve as threat material for the equilibrium
constructions.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from .core import Arena, StrategyProfile, induced_play, Play
from .pointclass import (
    CompiledCondition,
    DiffChain,
    PrefixExpr,
    Product,
    compile_chain,
    prefix_to_chain,
)

PROTAGONIST = 0
ANTAGONIST = 1

DEFAULT_ALPHA_MAX = 64


class LevelBoundError(ValueError):
    """Condition level exceeds the configured bound."""


class PromiseError(ValueError):
    """A promise-restricted operation was fed an input outside the promise."""


@dataclass(frozen=True)
class WinLoseGame:
    """Arena plus player 0's winning condition (chain or prefix form)."""

    arena: Arena
    condition: DiffChain | PrefixExpr

    def level(self) -> int:
        return self.condition.level


@dataclass
class Solution:
    """Winner and both players' move maps over the product states.

    ``winner[(v, c)]`` is 0 or 1.  ``moves[p][(v, c)]`` is defined at
    every state owned by ``p``: the winning move where ``p`` wins, the
    complement-solve move (or lowest label) where ``p`` loses.
    """

    product: Product
    accepting: frozenset[int]
    winner: dict
    moves: dict

    def winner_at_root(self) -> int:
        return self.winner[self.product.state_tuple(self.product.initial)]

    def profile(self) -> StrategyProfile:
        idx_moves = {p: dict(m) for p, m in self.moves.items()}
        return StrategyProfile(idx_moves)


def attractor(arena: Arena, player: int, targets, domain=None):
    """States from which ``player`` forces a visit to ``targets``.

    Least fixed point computed in synchronous layers, so the result and
    the forcing map are independent of any worklist order.  ``domain``
    restricts which states may be added (targets themselves need not lie
    in it); states outside both act as absorbing non-targets.  The
    forcing map picks the lowest label into the previous layer.
    """
    n = len(arena)
    dom = set(range(n)) if domain is None else set(domain)
    attr = set(targets)
    moves: dict[int, int] = {}
    rank = {s: 0 for s in attr}
    layer = 1
    while True:
        added = []
        for s in range(n):
            if s in attr or s not in dom:
                continue
            outs = arena.edges[s]
            if arena.owner[s] == player:
                pick = next((l for l, t in outs if t in attr), None)
                if pick is not None:
                    added.append((s, pick))
            else:
                if all(t in attr for _, t in outs):
                    added.append((s, None))
        if not added:
            break
        for s, pick in added:
            attr.add(s)
            rank[s] = layer
            if pick is not None:
                moves[s] = pick
        layer += 1
    return frozenset(attr), moves


def _weak_solve(product: Product, accepting: frozenset[int]):
    """Winner and winner-side moves for acceptance of settled counters."""
    arena = product.arena
    n = len(arena)
    winner: list[int | None] = [None] * n
    moves: dict[int, dict[int, int]] = {0: {}, 1: {}}
    by_counter: dict[int, list[int]] = {}
    for s in range(n):
        by_counter.setdefault(product.counter_of[s], []).append(s)
    for c in sorted(by_counter):
        stratum = by_counter[c]
        settle = PROTAGONIST if c in accepting else ANTAGONIST
        esc = 1 - settle
        lower_won = {s for s in range(n) if winner[s] == esc and product.counter_of[s] < c}
        attr, forcing = attractor(arena, esc, lower_won, domain=stratum)
        for s in stratum:
            if s in attr:
                winner[s] = esc
                if arena.owner[s] == esc:
                    moves[esc][s] = forcing[s]
            else:
                winner[s] = settle
        safe = {s for s in stratum if winner[s] == settle}
        good_lower = {s for s in range(n) if winner[s] == settle and product.counter_of[s] < c}
        for s in safe:
            if arena.owner[s] == settle:
                pick = next(
                    (l for l, t in arena.edges[s] if t in safe or t in good_lower), None
                )
                assert pick is not None, "settling player trapped outside its region"
                moves[settle][s] = pick
    assert all(w is not None for w in winner)
    return winner, moves


@lru_cache(maxsize=None)
def _compiled(game: WinLoseGame) -> CompiledCondition:
    if isinstance(game.condition, PrefixExpr):
        chain, arena = prefix_to_chain(game.condition, game.arena)
        return compile_chain(chain, arena)
    return compile_chain(game.condition, game.arena)


def game_product(game: WinLoseGame) -> Product:
    return _compiled(game).product


def solve(game: WinLoseGame, alpha_max: int = DEFAULT_ALPHA_MAX) -> Solution:
    """Winner and positional strategies for every product state.

    Level 1 degenerates to reachability solving, its complement to
    safety; higher levels run one attractor per counter stratum.
    """
    if game.level() > alpha_max:
        raise LevelBoundError(f"condition level {game.level()} exceeds bound {alpha_max}")
    compiled = _compiled(game)
    return solve_compiled(compiled.product, compiled.accepting)


def solve_compiled(product: Product, accepting: frozenset[int]) -> Solution:
    """Solve for an explicit accepting counter set (not necessarily parity form)."""
    winner, win_moves = _weak_solve(product, accepting)
    complement = frozenset(range(product.chain.level + 1)) - accepting
    _, spoil_moves = _weak_solve(product, complement)
    arena = product.arena
    moves: dict[int, dict] = {0: {}, 1: {}}
    for s in range(len(arena)):
        p = arena.owner[s]
        if p not in (0, 1):
            continue
        st = product.state_tuple(s)
        if s in win_moves[p] and winner[s] == p:
            moves[p][st] = win_moves[p][s]
        elif s in spoil_moves[p] and winner[s] != p:
            moves[p][st] = spoil_moves[p][s]
        elif s in win_moves[p]:
            moves[p][st] = win_moves[p][s]
        else:
            moves[p][st] = arena.lowest_edge(s)[0]
    wmap = {product.state_tuple(s): winner[s] for s in range(len(arena))}
    return Solution(product, accepting, wmap, moves)


def find_ws(game: WinLoseGame, alpha_max: int = DEFAULT_ALPHA_MAX) -> Solution:
    """``solve`` under the promise that player 0 wins from the root."""
    sol = solve(game, alpha_max)
    if sol.winner_at_root() != PROTAGONIST:
        raise PromiseError("player 0 has no winning strategy from the root")
    return sol


def induced_solution_play(sol: Solution, start: tuple[int, int] | None = None) -> Play:
    """Product lasso induced by the solution's own move maps."""
    product = sol.product
    s0 = product.initial if start is None else product.state_index(start)
    prof = StrategyProfile(
        {p: {product.state_index(st): l for st, l in m.items()} for p, m in sol.moves.items()}
    )
    return induced_play(product.arena, prof, s0)


def solve_prefix_recursive(game: WinLoseGame, alpha_max: int = DEFAULT_ALPHA_MAX):
    """Recursive solver for prefix-form conditions.

    Each branch cone is solved as its own (complemented) subgame; the
    remaining question is the derived open game "reach a cone the cone
    winner likes", solved by one attractor over the word trie.  Strategies
    are stitched cone-locally: inside a cone both players follow the
    subgame solution, above it the protagonist steers toward winning
    cones and the antagonist away.

    Returns ``(solution, subgame_winners)`` where the solution lives on
    the same unfolded product as ``solve`` would use, and
    ``subgame_winners[i]`` is the winner of the i-th top-level cone.
    """
    if not isinstance(game.condition, PrefixExpr):
        raise TypeError("condition must be in prefix form")
    if game.level() > alpha_max:
        raise LevelBoundError(f"condition level {game.level()} exceeds bound {alpha_max}")
    compiled = _compiled(game)
    product = compiled.product
    arena = product.arena

    # With the fully fresh unfolding, each vertex of the unfolded arena is
    # reachable at exactly one counter value, so region-wise winners are
    # well-defined per state.
    vertex_state: dict[int, int] = {}
    for s in range(len(arena)):
        v = product.vertex_of[s]
        assert v not in vertex_state, "unfolding is not history-deterministic"
        vertex_state[v] = s

    winner: dict[int, int] = {}
    moves: dict[int, dict[int, int]] = {0: {}, 1: {}}

    def reach_solve(region: set[int], want: int, targets: set[int]):
        """Derived open game on a trie region: ``want`` reaches targets."""
        attr, forcing = attractor(arena, want, targets, domain=region)
        for s in region:
            if s in attr:
                winner[s] = want
                if arena.owner[s] == want:
                    moves[want][s] = forcing[s]
                else:
                    moves[1 - want][s] = arena.lowest_edge(s)[0]
            else:
                winner[s] = 1 - want
                if arena.owner[s] == 1 - want:
                    pick = next(l for l, t in arena.edges[s] if t not in attr)
                    moves[1 - want][s] = pick
                else:
                    moves[want][s] = arena.lowest_edge(s)[0]

    def region_states(entry: int, stop: set[int]) -> set[int]:
        seen = {entry}
        todo = [entry]
        while todo:
            s = todo.pop()
            for _, t in arena.edges[s]:
                if t not in seen and t not in stop:
                    seen.add(t)
                    todo.append(t)
        return seen

    def solve_node(expr: PrefixExpr, entry: int, want: int) -> list[int]:
        """Assign winners/moves to the region of ``expr`` rooted at
        ``entry``; ``want`` is the player who wins on membership."""
        if expr.level == 0:
            # constant empty set: membership never holds
            for s in region_states(entry, set()):
                winner[s] = 1 - want
                moves[arena.owner[s]].setdefault(s, arena.lowest_edge(s)[0])
            return []
        cone_entries = _cone_entries(expr, entry)
        sub_winners = []
        cone_regions = set()
        for centry, child in cone_entries:
            solve_node(child, centry, 1 - want)
            sub_winners.append(winner[centry])
            cone_regions |= region_states(centry, set())
        good = {ce for (ce, _), w in zip(cone_entries, sub_winners) if w == want}
        top = region_states(entry, {ce for ce, _ in cone_entries})
        top -= cone_regions
        reach_solve(top, want, good)
        return sub_winners

    def _cone_entries(expr: PrefixExpr, entry: int) -> list[tuple[int, PrefixExpr]]:
        """Locate cone entry states by walking the branch words in the trie."""
        out = []
        for word, child in expr.branches:
            s = entry
            for lab in word:
                s = arena.step(s, lab)
            out.append((s, child))
        return out

    sub = solve_node(game.condition, product.initial, PROTAGONIST)

    wmap = {product.state_tuple(s): winner[s] for s in range(len(arena))}
    mmap = {p: {product.state_tuple(s): l for s, l in m.items()} for p, m in moves.items()}
    for s in range(len(arena)):
        p = arena.owner[s]
        mmap[p].setdefault(product.state_tuple(s), arena.lowest_edge(s)[0])
    return Solution(product, compiled.accepting, wmap, mmap), sub
