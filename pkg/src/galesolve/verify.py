"""Independent brute-force oracles.

Everything here works by plain enumeration of positional maps over the
product states, with the induced functional graphs evaluated by numpy
pointer doubling; nothing is shared with the solvers, so agreement is a
meaningful check.  Enumeration caps are hard limits with explicit errors,
never silent truncation.

Deviation enumeration for the Nash/subgame checks is positional, with a
separate guard (``nonpositional_best_rank``) that computes the exact best
outcome any history-dependent deviation could reach against the fixed
profile-with-threats, by reachability over a (state, mode) graph.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import StrategyProfile, induced_play
from .games import MultiOutcomeGame, game_product, settled_outcome
from .pointclass import Product
from .winlose import WinLoseGame, _compiled

DEFAULT_CAP = 10**7
_CHUNK = 1 << 15


class CapExceededError(ValueError):
    """Enumeration size exceeds the configured cap."""


@dataclass
class ProfileSpace:
    """Mixed-radix enumeration of positional choices at given states.

    ``states[i]`` has ``degrees[i]`` choices; profile ``j`` assigns state
    ``i`` the choice ``(j // strides[i]) % degrees[i]``.  Iteration order
    is plain ascending ``j``, which fixes witness selection.
    """

    states: list[int]
    degrees: list[int]

    def __post_init__(self):
        self.strides = []
        acc = 1
        for d in reversed(self.degrees):
            self.strides.append(acc)
            acc *= d
        self.strides.reverse()
        self.total = acc

    def digit(self, j: int, i: int) -> int:
        return (j // self.strides[i]) % self.degrees[i]

    def assignment(self, j: int) -> dict[int, int]:
        return {s: self.digit(j, i) for i, s in enumerate(self.states)}


def _succ_matrix(arena, space: ProfileSpace, fixed: dict[int, int], lo: int, hi: int) -> np.ndarray:
    """Successor matrix (n_states x (hi-lo)) for profile indices lo..hi-1.

    ``fixed`` pins the successor of states not enumerated by ``space``.
    """
    n = len(arena)
    width = hi - lo
    t = np.empty((n, width), dtype=np.int32)
    js = np.arange(lo, hi, dtype=np.int64)
    for s in range(n):
        if s in fixed:
            t[s, :] = fixed[s]
    for i, s in enumerate(space.states):
        targets = np.array([tt for _, tt in arena.edges[s]], dtype=np.int32)
        digits = (js // space.strides[i]) % space.degrees[i]
        t[s, :] = targets[digits]
    return t


def _settle_states(t: np.ndarray) -> np.ndarray:
    """Pointer-double the successor matrix: a state inside the final cycle."""
    n = t.shape[0]
    cols = np.arange(t.shape[1])
    rounds = max(1, math.ceil(math.log2(max(n, 2))))
    cur = t
    for _ in range(rounds):
        cur = cur[cur, cols]
    return cur


def _exists_forall(product: Product, good: np.ndarray, exist_player: int, cap: int) -> np.ndarray:
    """Per-state truth of "exists a positional map for ``exist_player``
    such that for all opponent maps the settled state is good"."""
    arena = product.arena
    mine = [s for s in range(len(arena)) if arena.owner[s] == exist_player]
    theirs = [s for s in range(len(arena)) if arena.owner[s] != exist_player]
    sp_mine = ProfileSpace(mine, [len(arena.edges[s]) for s in mine])
    sp_theirs = ProfileSpace(theirs, [len(arena.edges[s]) for s in theirs])
    if sp_mine.total * sp_theirs.total > cap:
        raise CapExceededError(
            f"profile count {sp_mine.total * sp_theirs.total} exceeds cap {cap}"
        )
    n = len(arena)
    result = np.zeros(n, dtype=bool)
    for j0 in range(sp_mine.total):
        fixed = {s: arena.edges[s][sp_mine.digit(j0, i)][1] for i, s in enumerate(sp_mine.states)}
        ok = np.ones(n, dtype=bool)
        for lo in range(0, sp_theirs.total, _CHUNK):
            hi = min(lo + _CHUNK, sp_theirs.total)
            t = _succ_matrix(arena, sp_theirs, fixed, lo, hi)
            settled = _settle_states(t)
            ok &= good[settled].all(axis=1)
            if not ok.any():
                break
        result |= ok
        if result.all():
            break
    return result


def brute_force_solve(game: WinLoseGame, cap: int = DEFAULT_CAP) -> dict:
    """Winner at every product state by exhaustive profile enumeration.

    Player 0 wins at a state iff some positional map of player 0 beats
    every positional map of player 1 from there.  Both quantifier orders
    are evaluated and must partition the states (finite determinacy); a
    violation would mean the enumeration itself is broken.
    """
    compiled = _compiled(game)
    product = compiled.product
    acc = np.array(
        [product.counter_of[s] in compiled.accepting for s in product.states()], dtype=bool
    )
    win0 = _exists_forall(product, acc, 0, cap)
    win1 = _exists_forall(product, ~acc, 1, cap)
    if (win0 == win1).any():
        bad = int(np.argmax(win0 == win1))
        raise AssertionError(f"determinacy violated at product state {product.state_tuple(bad)}")
    return {product.state_tuple(s): (0 if win0[s] else 1) for s in product.states()}


def strategy_defeats_all(game: WinLoseGame, player: int, moves: dict, start, cap: int = DEFAULT_CAP) -> bool:
    """Does the positional map win for ``player`` against every
    positional counter-strategy from ``start``?"""
    compiled = _compiled(game)
    product = compiled.product
    arena = product.arena
    acc = np.array(
        [product.counter_of[s] in compiled.accepting for s in product.states()], dtype=bool
    )
    good = acc if player == 0 else ~acc
    s0 = product.state_index(start)
    theirs = [s for s in range(len(arena)) if arena.owner[s] != player]
    sp = ProfileSpace(theirs, [len(arena.edges[s]) for s in theirs])
    if sp.total > cap:
        raise CapExceededError(f"counter-strategy count {sp.total} exceeds cap {cap}")
    fixed = {}
    for s in range(len(arena)):
        if arena.owner[s] == player:
            st = product.state_tuple(s)
            if st not in moves:
                return False
            fixed[s] = arena.step(s, moves[st])
    for lo in range(0, sp.total, _CHUNK):
        hi = min(lo + _CHUNK, sp.total)
        t = _succ_matrix(arena, sp, fixed, lo, hi)
        settled = _settle_states(t)
        if not good[settled[s0]].all():
            return False
    return True


def brute_force_maximin(game: MultiOutcomeGame, player: int, cap: int = DEFAULT_CAP) -> str:
    """Best outcome ``player`` can guarantee at the root against the
    coalition of everyone else, by exhaustive enumeration."""
    product = game_product(game)
    arena = product.arena
    labels = game.valuation.labels
    rank = np.array(
        [game.rank(player, labels[product.counter_of[s]]) for s in product.states()],
        dtype=np.int32,
    )
    mine = [s for s in range(len(arena)) if arena.owner[s] == player]
    theirs = [s for s in range(len(arena)) if arena.owner[s] != player]
    sp_mine = ProfileSpace(mine, [len(arena.edges[s]) for s in mine])
    sp_theirs = ProfileSpace(theirs, [len(arena.edges[s]) for s in theirs])
    if sp_mine.total * sp_theirs.total > cap:
        raise CapExceededError("profile count exceeds cap")
    best = -1
    s0 = product.initial
    for j0 in range(sp_mine.total):
        fixed = {s: arena.edges[s][sp_mine.digit(j0, i)][1] for i, s in enumerate(sp_mine.states)}
        worst = None
        for lo in range(0, sp_theirs.total, _CHUNK):
            hi = min(lo + _CHUNK, sp_theirs.total)
            t = _succ_matrix(arena, sp_theirs, fixed, lo, hi)
            settled = _settle_states(t)
            w = int(rank[settled[s0]].min())
            worst = w if worst is None else min(worst, w)
            if worst <= best:
                break
        if worst is not None and worst > best:
            best = worst
    return game.prefs[player][best]


# --------------------------------------------------------------------------
# Deviation checking with grim-trigger threat semantics


class _ModeGraph:
    """Deterministic environment a single deviator faces.

    Nodes are (product state, mode).  Mode 0 follows the main play and
    watches for the deviator's first off-profile move at a state it owns;
    punishment modes replay the threat table entry for that trigger
    state; mode 0 with no matching threat entry falls back to the
    profile's positional moves (then nothing ever switches).
    """

    def __init__(self, game: MultiOutcomeGame, product: Product, profile: StrategyProfile, deviator: int):
        self.product = product
        self.game = game
        self.deviator = deviator
        arena = product.arena
        main_moves_idx: dict[int, int] = {}
        for p, mv in profile.moves.items():
            for st, lab in mv.items():
                main_moves_idx[product.state_index(st)] = lab
        self.main_moves = main_moves_idx
        triggers: list[tuple] = []
        trigger_maps: list[dict[int, int]] = []
        for (d, st), cmap in profile.threats.items():
            if d == deviator:
                triggers.append(st)
                trigger_maps.append({product.state_index(k): v for k, v in cmap.items()})
        self.trigger_of_state = {product.state_index(st): 1 + i for i, st in enumerate(triggers)}
        self.trigger_maps = trigger_maps
        self.n_modes = 1 + len(triggers)
        self.n_nodes = len(arena) * self.n_modes

    def node(self, state: int, mode: int) -> int:
        return state * self.n_modes + mode

    def _main_move(self, state: int) -> int:
        try:
            return self.main_moves[state]
        except KeyError:
            return self.product.arena.lowest_edge(state)[0]

    def env_successor(self, state: int, mode: int) -> tuple[int, int]:
        """Successor for states the deviator does not own."""
        arena = self.product.arena
        if mode == 0:
            return arena.step(state, self._main_move(state)), 0
        cmap = self.trigger_maps[mode - 1]
        lab = cmap.get(state, self._main_move(state))
        return arena.step(state, lab), mode

    def dev_successor(self, state: int, mode: int, label: int) -> tuple[int, int]:
        arena = self.product.arena
        nxt = arena.step(state, label)
        if mode == 0 and label != self._main_move(state):
            mode = self.trigger_of_state.get(state, 0)
        return nxt, mode


def _deviation_best_rank(
    game: MultiOutcomeGame,
    profile: StrategyProfile,
    deviator: int,
    start: int,
    cap: int,
    improve_over: int | None = None,
):
    """(best rank, first deviation index beating ``improve_over``, space).

    Best outcome rank the deviator can reach with a positional deviation
    against the profile-with-threats, starting at product state index
    ``start``; evaluated by enumeration over the mode graph.  The witness
    index is the least profile index whose rank exceeds ``improve_over``.
    """
    product = game_product(game)
    arena = product.arena
    mg = _ModeGraph(game, product, profile, deviator)
    labels = game.valuation.labels
    nm = mg.n_modes
    node_rank = np.empty(mg.n_nodes, dtype=np.int32)
    for s in range(len(arena)):
        r = game.rank(deviator, labels[product.counter_of[s]])
        node_rank[s * nm : (s + 1) * nm] = r
    dev_states = [s for s in range(len(arena)) if arena.owner[s] == deviator]
    space = ProfileSpace(dev_states, [len(arena.edges[s]) for s in dev_states])
    if space.total > cap:
        raise CapExceededError(f"deviation count {space.total} exceeds cap {cap}")
    env_succ = np.empty(mg.n_nodes, dtype=np.int32)
    for s in range(len(arena)):
        for mode in range(nm):
            if arena.owner[s] == deviator:
                continue
            ns, nmode = mg.env_successor(s, mode)
            env_succ[mg.node(s, mode)] = mg.node(ns, nmode)
    start_node = mg.node(start, 0)
    best = -1
    best_j = None
    for lo in range(0, space.total, _CHUNK):
        hi = min(lo + _CHUNK, space.total)
        width = hi - lo
        t = np.empty((mg.n_nodes, width), dtype=np.int32)
        for s in range(len(arena)):
            if arena.owner[s] != deviator:
                for mode in range(nm):
                    t[mg.node(s, mode), :] = env_succ[mg.node(s, mode)]
        js = np.arange(lo, hi, dtype=np.int64)
        for i, s in enumerate(space.states):
            digits = (js // space.strides[i]) % space.degrees[i]
            for mode in range(nm):
                row = np.empty(width, dtype=np.int32)
                for k, (lab, _) in enumerate(arena.edges[s]):
                    ns, nmode = mg.dev_successor(s, mode, lab)
                    row_val = mg.node(ns, nmode)
                    row[digits == k] = row_val
                t[mg.node(s, mode), :] = row
        settled = _settle_states(t)
        ranks = node_rank[settled[start_node]]
        m = int(ranks.max())
        best = max(best, m)
        if improve_over is not None and best_j is None and m > improve_over:
            best_j = lo + int(np.argmax(ranks > improve_over))
    return best, best_j, space


def check_nash(game: MultiOutcomeGame, profile: StrategyProfile, cap: int = DEFAULT_CAP):
    """Verdict plus witness for the Nash property of a profile.

    Enumerates every positional deviation of every player with the others
    fixed (threat table honoured).  Returns ``(True, None)`` or
    ``(False, (player, deviation_moves, better_outcome))`` with the
    lexicographically least witness.
    """
    return _check_nash_at(game, profile, None, cap)


def _check_nash_at(game: MultiOutcomeGame, profile: StrategyProfile, start_state, cap: int):
    product = game_product(game)
    s0 = product.initial if start_state is None else product.state_index(start_state)
    prof_idx = StrategyProfile(
        {p: {product.state_index(st): l for st, l in mv.items()} for p, mv in profile.moves.items()}
    )
    base_play = induced_play(product.arena, prof_idx, s0)
    base_outcome = settled_outcome(game, product, base_play)
    for player in range(game.arena.n_players):
        base_rank = game.rank(player, base_outcome)
        best, best_j, space = _deviation_best_rank(
            game, profile, player, s0, cap, improve_over=base_rank
        )
        if best > base_rank:
            dev = {
                product.state_tuple(s): product.arena.edges[s][space.digit(best_j, i)][0]
                for i, s in enumerate(space.states)
            }
            return False, (player, dev, game.prefs[player][best])
    return True, None


def check_spe(game: MultiOutcomeGame, profile: StrategyProfile, cap: int = DEFAULT_CAP):
    """Nash at every reachable product state.

    Equivalent to running ``check_nash`` on ``residual_game`` at each
    state: the product counter already encodes the valuation truncation,
    so the residual check is the same deviation analysis started there.
    Returns ``(True, None)`` or ``(False, (state, inner_witness))`` with
    the first failing state in product BFS order.
    """
    product = game_product(game)
    for s in product.states():
        verdict, witness = _check_nash_at(game, profile, product.state_tuple(s), cap)
        if not verdict:
            return False, (product.state_tuple(s), witness)
    return True, None


def nonpositional_best_rank(game: MultiOutcomeGame, profile: StrategyProfile, deviator: int) -> int:
    """Exact best outcome rank over arbitrary history-dependent deviations.

    The environment (everyone but the deviator, with threat switching) is
    deterministic per (state, mode), so the deviator faces a one-player
    graph; the best reachable cycle value is the optimum, dominating any
    depth-bounded search.
    """
    product = game_product(game)
    arena = product.arena
    mg = _ModeGraph(game, product, profile, deviator)
    nm = mg.n_modes
    succs: list[list[int]] = [[] for _ in range(mg.n_nodes)]
    for s in range(len(arena)):
        for mode in range(nm):
            node = mg.node(s, mode)
            if arena.owner[s] == deviator:
                for lab, _ in arena.edges[s]:
                    ns, nmode = mg.dev_successor(s, mode, lab)
                    succs[node].append(mg.node(ns, nmode))
            else:
                ns, nmode = mg.env_successor(s, mode)
                succs[node].append(mg.node(ns, nmode))
    start = mg.node(product.initial, 0)
    reach = {start}
    todo = [start]
    while todo:
        u = todo.pop()
        for v in succs[u]:
            if v not in reach:
                reach.add(v)
                todo.append(v)
    # nodes on a cycle within the reachable subgraph (Tarjan-free: iterate)
    labels = game.valuation.labels
    best = -1
    on_cycle = _cyclic_nodes(succs, reach)
    for node in on_cycle:
        s = node // nm
        r = game.rank(deviator, labels[product.counter_of[s]])
        best = max(best, r)
    return best


def _cyclic_nodes(succs, reach) -> set[int]:
    """Reachable nodes lying on some cycle of the reachable subgraph."""
    index: dict[int, int] = {}
    low: dict[int, int] = {}
    onstack: set[int] = set()
    stack: list[int] = []
    result: set[int] = set()
    counter = [0]

    def strongconnect(root):
        work = [(root, 0)]
        while work:
            v, pi = work[-1]
            if pi == 0:
                index[v] = low[v] = counter[0]
                counter[0] += 1
                stack.append(v)
                onstack.add(v)
            advanced = False
            children = [w for w in succs[v] if w in reach]
            while pi < len(children):
                w = children[pi]
                pi += 1
                work[-1] = (v, pi)
                if w not in index:
                    work.append((w, 0))
                    advanced = True
                    break
                elif w in onstack:
                    low[v] = min(low[v], index[w])
            if advanced:
                continue
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    onstack.discard(w)
                    comp.append(w)
                    if w == v:
                        break
                if len(comp) > 1:
                    result.update(comp)
                else:
                    u = comp[0]
                    if u in (w for w in succs[u] if w in reach):
                        result.add(u)
            work.pop()
            if work:
                pv = work[-1][0]
                low[pv] = min(low[pv], low[v])

    for v in reach:
        if v not in index:
            strongconnect(v)
    return result
