"""Threshold games, best guarantees, Nash and subgame-perfect equilibria.

The basic device is the threshold game: can a player force the outcome
into a given preference-upper set, with everyone else pooled into one
adversary?  Guarantees are computed by scanning a player's preference
from the top and asking which threshold game they win; equilibrium
profiles are assembled from the winning strategies of those games, with
coalition punishments (grim trigger) attached as threats where several
players are involved.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from .core import Play, StrategyProfile, induced_play, validate_arena
from .games import MultiOutcomeGame, game_product, settled_outcome
from .pointclass import chain_for_level_set, project_play
from .winlose import WinLoseGame, Solution, solve


@dataclass(frozen=True)
class ThresholdGame:
    """Win/lose game: ``player`` (as protagonist) forces the outcome into
    ``upper``.  ``counter_map`` sends valuation counters to counters of
    the reshaped condition chain, so solutions can be queried at
    valuation product states."""

    player: int
    upper: frozenset[str]
    game: WinLoseGame
    counter_map: tuple[int, ...]


def threshold_game(game: MultiOutcomeGame, player: int, upper) -> ThresholdGame:
    """Derived win/lose game for a preference-upper outcome set."""
    upper = frozenset(upper)
    ranks = sorted(game.rank(player, o) for o in upper)
    if ranks and ranks != list(range(ranks[0], len(game.outcomes))):
        raise ValueError(f"{sorted(upper)} is not upward-closed for player {player}")
    levels = {m for m, lab in enumerate(game.valuation.labels) if lab in upper}
    chain, cmap = chain_for_level_set(game.valuation.chain, levels, len(game.arena))
    owner = [0 if game.arena.owner[v] == player else 1 for v in range(len(game.arena))]
    arena = validate_arena(owner, [list(e) for e in game.arena.edges], game.arena.root, 2)
    return ThresholdGame(player, upper, WinLoseGame(arena, chain), cmap)


@lru_cache(maxsize=None)
def _threshold_solution(game: MultiOutcomeGame, player: int, outcome: str):
    tg = threshold_game(game, player, game.upper_set(player, outcome))
    return tg, solve(tg.game)


def _wins_threshold(game: MultiOutcomeGame, player: int, outcome: str, state) -> bool:
    tg, sol = _threshold_solution(game, player, outcome)
    v, c = state
    return sol.winner[(v, tg.counter_map[c])] == 0


def _threshold_move(game: MultiOutcomeGame, player: int, outcome: str, state) -> int:
    tg, sol = _threshold_solution(game, player, outcome)
    v, c = state
    return sol.moves[0][(v, tg.counter_map[c])]


def _coalition_moves(game: MultiOutcomeGame, player: int, outcome: str) -> dict:
    """Coalition (everyone but ``player``) move map from the threshold solve."""
    tg, sol = _threshold_solution(game, player, outcome)
    product = game_product(game)
    out = {}
    for s in product.states():
        v, c = product.state_tuple(s)
        if game.arena.owner[v] != player:
            out[(v, c)] = sol.moves[1][(v, tg.counter_map[c])]
    return out


def best_guarantee(game: MultiOutcomeGame, player: int, state) -> str:
    """Most-preferred outcome whose upper set the player can enforce.

    Scans the preference top-down; the bottom outcome's upper set is the
    whole outcome set and is enforced vacuously, so the scan terminates.
    """
    for o in reversed(game.prefs[player]):
        if _wins_threshold(game, player, o, state):
            return o
    raise AssertionError("full upper set must be enforceable")


@dataclass
class EquilibriumCertificate:
    """Equilibrium profile with its induced play, outcome and guarantees."""

    profile: StrategyProfile
    play: Play                 # lasso over the base arena
    product_play: Play         # the same lasso over product states
    outcome: str
    guarantees: dict


def _induce(game: MultiOutcomeGame, profile: StrategyProfile, start=None):
    product = game_product(game)
    s0 = product.initial if start is None else product.state_index(start)
    idx_prof = StrategyProfile(
        {p: {product.state_index(st): l for st, l in mv.items()} for p, mv in profile.moves.items()}
    )
    pplay = induced_play(product.arena, idx_prof, s0)
    return product, pplay


def root_state(game: MultiOutcomeGame):
    product = game_product(game)
    return product.state_tuple(product.initial)


def ne_ap(game: MultiOutcomeGame) -> EquilibriumCertificate:
    """Nash equilibrium for two players with antagonistic preferences.

    Both root guarantees name the same outcome; each player follows the
    winning strategy of their guarantee's threshold game (its spoiler
    moves already pad the map outside the winning region), which makes
    the positional profile self-enforcing without any threat table.
    """
    if not game.is_antagonistic():
        raise ValueError("ne_ap requires a 2-player game with antagonistic preferences")
    root = root_state(game)
    ga = best_guarantee(game, 0, root)
    gb = best_guarantee(game, 1, root)
    product = game_product(game)
    moves: dict[int, dict] = {0: {}, 1: {}}
    for p, g in ((0, ga), (1, gb)):
        tg, sol = _threshold_solution(game, p, g)
        for s in product.states():
            v, c = product.state_tuple(s)
            if game.arena.owner[v] == p:
                moves[p][(v, c)] = sol.moves[0][(v, tg.counter_map[c])]
    profile = StrategyProfile(moves)
    product, pplay = _induce(game, profile)
    outcome = settled_outcome(game, product, pplay)
    return EquilibriumCertificate(
        profile, project_play(product, pplay), pplay, outcome, {0: ga, 1: gb}
    )


def _guarantee_moves(game: MultiOutcomeGame) -> dict[int, dict]:
    """Owner's current-guarantee threshold move at every product state.

    A guarantee-preserving move always exists; picking the threshold
    game's winning move (which also makes attractor progress) rules out
    profiles that preserve the guarantee forever without realizing it.
    """
    product = game_product(game)
    moves: dict[int, dict] = {p: {} for p in range(game.arena.n_players)}
    for s in product.states():
        st = product.state_tuple(s)
        p = game.arena.owner[st[0]]
        g = best_guarantee(game, p, st)
        moves[p][st] = _threshold_move(game, p, g, st)
    return moves


def ne_multi(game: MultiOutcomeGame) -> EquilibriumCertificate:
    """Nash equilibrium for finitely many players and outcomes.

    Along the induced play every owner's move preserves (or improves)
    their best guarantee at the current state; off the play the same rule
    pads the maps.  For each state of the play owned by some player d,
    the threat table carries the coalition strategy that wins the
    threshold game d loses (the upper set of d's next-better outcome),
    applied from d's first deviation onward.
    """
    moves = _guarantee_moves(game)
    profile = StrategyProfile(moves)
    product, pplay = _induce(game, profile)
    outcome = settled_outcome(game, product, pplay)
    threats = {}
    for s in list(dict.fromkeys(pplay.stem + pplay.cycle)):
        st = product.state_tuple(s)
        d = game.arena.owner[st[0]]
        g = best_guarantee(game, d, st)
        r = game.rank(d, g)
        if r + 1 >= len(game.outcomes):
            continue  # guarantee already at the top: nothing to deter
        g_plus = game.prefs[d][r + 1]
        threats[(d, st)] = _coalition_moves(game, d, g_plus)
    profile = StrategyProfile(moves, threats)
    guarantees = {p: best_guarantee(game, p, root_state(game)) for p in range(game.arena.n_players)}
    return EquilibriumCertificate(
        profile, project_play(product, pplay), pplay, outcome, guarantees
    )


def spe(game: MultiOutcomeGame) -> StrategyProfile:
    """Subgame-perfect profile for antagonistic two-player games.

    Every owner plays the winning move of their guarantee's threshold
    game at every reachable product state, so the profile is a residual
    equilibrium everywhere; ties inside the attractor extraction break by
    lowest edge label.
    """
    if not game.is_antagonistic():
        raise ValueError("spe requires a 2-player game with antagonistic preferences")
    return StrategyProfile(_guarantee_moves(game))


def state_value(game: MultiOutcomeGame, state) -> str:
    """Value of an antagonistic game at a product state (both guarantees agree)."""
    return best_guarantee(game, game.arena.owner[state[0]], state)
