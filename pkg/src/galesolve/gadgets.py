"""Generators for certified families of test games.

Each generator builds a finite game together with enough bookkeeping to
decode solver output back into an independently checkable answer:

* alternating quantifier-pick games whose winner equals the value of a
  bounded quantifier block over a finite bit assignment;
* index-pick wrappers extracting promise-problem answers from winning
  strategies;
* announce / adjoin / decision-chain / conjunction combinators whose
  equilibria decode to per-component winners.

Natural-number picks use the unary encoding "k zeros then a one", with
refusal realized as a 0-self-loop at the exhausted run vertex, so that
refusing is a closed (safety-style) event rather than the visit of a
dedicated sink.  Quantifier truncation is explicit: picks run up to the
input's bound, with one extra "overflow" move whose value is the
declared tail bit (beyond the support every deeper quantifier collapses
to the tail, so a single move represents all large picks exactly).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .core import Play, StrategyProfile, validate_arena
from .games import MultiOutcomeGame, game_product
from .pointclass import (
    DiffChain,
    LeveledValuation,
    bit_chain_from_classes,
    chain_from_classes,
    diff_chain,
    prefix_to_chain,
    PrefixExpr,
)
from .winlose import PromiseError, Solution, WinLoseGame, solve


class MalformedInputError(ValueError):
    """A finite bit input violates its own declared bounds."""


def pair_code(a: int, b: int) -> int:
    return (a + b) * (a + b + 1) // 2 + b


def unpair_code(z: int) -> tuple[int, int]:
    w = (math.isqrt(8 * z + 1) - 1) // 2
    b = z - w * (w + 1) // 2
    return w - b, b


def tuple_code(ks) -> int:
    ks = list(ks)
    code = ks[0]
    for k in ks[1:]:
        code = pair_code(code, k)
    return code


def decode_tuple(code: int, n: int) -> tuple[int, ...]:
    out = []
    for _ in range(n - 1):
        code, k = unpair_code(code)
        out.append(k)
    out.append(code)
    return tuple(reversed(out))


@dataclass(frozen=True)
class FinBitInput:
    """Finitely supported bit assignment with a constant tail.

    ``bits`` maps tuple codes to bit values; every code outside the
    support reads as ``tail``.  ``bound`` is the evaluation horizon for
    quantifiers and must dominate every component of every support code.
    """

    bits: tuple[tuple[int, int], ...]
    tail: int
    bound: int

    def lookup(self, code: int) -> int:
        for c, b in self.bits:
            if c == code:
                return b
        return self.tail

    def validate(self, n: int) -> None:
        for code, bit in self.bits:
            if bit not in (0, 1):
                raise MalformedInputError(f"bit at code {code} is {bit}")
            comps = decode_tuple(code, n)
            if any(k > self.bound for k in comps):
                raise MalformedInputError(
                    f"support code {code} decodes to {comps}, beyond bound {self.bound}"
                )


def fin_bit_input(assignments: dict[int, int], tail: int, bound: int) -> FinBitInput:
    return FinBitInput(tuple(sorted(assignments.items())), tail, bound)


def _block_value(p: FinBitInput, n: int, prefix: tuple[int, ...]) -> int:
    """Exact value over the naturals of the quantifier block from stage
    ``len(prefix)+1`` on: odd stages are universal, even existential, and
    one synthetic branch per quantifier carries the tail (the common
    value of all picks beyond the bound)."""
    i = len(prefix) + 1
    if i > n:
        return p.lookup(tuple_code(prefix))
    vals = [_block_value(p, n, prefix + (k,)) for k in range(p.bound + 1)]
    vals.append(p.tail)
    return min(vals) if i % 2 == 1 else max(vals)


def eval_sigma_lem(n: int, p: FinBitInput) -> int:
    """Truth of the alternating block (universal first) over ``p``."""
    if n < 1:
        raise ValueError("n must be at least 1")
    p.validate(n)
    return _block_value(p, n, ())


def eval_sigma_llpo(n: int, pair: tuple[FinBitInput, FinBitInput]) -> frozenset[int]:
    """Every index whose block holds; the promise demands at least one."""
    answers = frozenset(i for i in (0, 1) if eval_sigma_lem(n, pair[i]) == 1)
    if not answers:
        raise PromiseError("neither side of the pair satisfies its block")
    return answers


# --------------------------------------------------------------------------
# Arena builder shared by the generators


class _GB:
    def __init__(self, n_players: int = 2):
        self.n_players = n_players
        self.owner: list[int] = []
        self.edges: list[dict[int, int]] = []

    def fresh(self, owner: int) -> int:
        self.owner.append(owner)
        self.edges.append({})
        return len(self.owner) - 1

    def edge(self, u: int, label: int, v: int) -> None:
        self.edges[u][label] = v

    def terminal(self, owner: int = 0) -> int:
        t = self.fresh(owner)
        self.edge(t, 0, t)
        return t

    def copy_arena(self, arena) -> dict[int, int]:
        amap = {v: self.fresh(arena.owner[v]) for v in range(len(arena))}
        for v in range(len(arena)):
            for l, t in arena.edges[v]:
                self.edge(amap[v], l, amap[t])
        return amap

    def build(self, root: int):
        return validate_arena(self.owner, [sorted(d.items()) for d in self.edges], root, self.n_players)


def _best_bit_chain(inner_pair, rest, n_vertices: int) -> DiffChain:
    """Try both orders of the two innermost (same-depth) classes."""
    a = bit_chain_from_classes(list(inner_pair) + rest, n_vertices)
    b = bit_chain_from_classes(list(reversed(inner_pair)) + rest, n_vertices)
    return a if a.level <= b.level else b


def _chain_classes(wl: WinLoseGame):
    """Component game in chain form: (arena, ring classes, entry label bit).

    Ring m of the chain (targets m minus m-1) carries bit 1 iff settling
    there is a win for the component's protagonist; the entry atom covers
    plays that hit no ring.
    """
    if isinstance(wl.condition, PrefixExpr):
        chain, arena = prefix_to_chain(wl.condition, wl.arena)
    else:
        chain, arena = wl.condition, wl.arena
    rings = []
    prev: frozenset[int] = frozenset()
    for m, t in enumerate(chain.targets):
        bit = 1 if (m % 2) != (chain.level % 2) else 0
        rings.append((t - prev, bit))
        prev = t
    entry_bit = 0   # minimal index = level: parity equal, protagonist loses
    return arena, rings, entry_bit


# --------------------------------------------------------------------------
# Quantifier-block pick games


@dataclass
class LemGadget:
    game: WinLoseGame
    n: int
    input: FinBitInput


@dataclass
class LlpoGadget:
    game: WinLoseGame
    n: int
    pairs: tuple
    choice_vertices: tuple[int, ...]
    pick_labels: tuple[tuple[int, ...], ...]


class _PickRegion:
    """Stage gadgets for one quantifier block inside a builder."""

    def __init__(self, b: _GB, n: int, stage_tails: list[set[int]], terminals: dict[int, int]):
        self.b = b
        self.n = n
        self.stage_tails = stage_tails
        self.terminals = terminals

    def terminal_for(self, bit: int) -> int:
        if bit not in self.terminals:
            self.terminals[bit] = self.b.terminal()
        return self.terminals[bit]

    def build(self, p: FinBitInput, stage: int, prefix: tuple[int, ...]) -> int:
        if stage > self.n - 1:
            return self.terminal_for(_block_value(p, self.n, prefix))
        owner = 1 if stage % 2 == 1 else 0
        run = [self.b.fresh(owner) for _ in range(p.bound + 1)]
        for j in range(p.bound):
            self.b.edge(run[j], 0, run[j + 1])
        self.b.edge(run[p.bound], 0, run[p.bound])        # refusal: loop on zeros
        self.stage_tails[stage].add(run[p.bound])
        for j in range(p.bound + 1):
            self.b.edge(run[j], 1, self.build(p, stage + 1, prefix + (j,)))
        self.b.edge(run[p.bound], 2, self.terminal_for(p.tail))  # overflow pick
        return run[0]


def gen_lem_game(n: int, p: FinBitInput) -> LemGadget:
    """Alternating pick game whose winner is the block value.

    The player due to pick at an odd stage is the antagonist; refusing to
    pick (playing zeros forever) loses for the refuser.  After the last
    pick the innermost quantifier is folded into the winning condition.
    The condition level never exceeds ``n``.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    p.validate(n)
    b = _GB(2)
    tails: list[set[int]] = [set() for _ in range(n)]
    terminals: dict[int, int] = {}
    region = _PickRegion(b, n, tails, terminals)
    root = region.build(p, 1, ())
    arena = b.build(root)
    good = {terminals[1]} if 1 in terminals else set()
    bad = {terminals[0]} if 0 in terminals else set()
    rest = [(tails[i], i % 2) for i in range(n - 1, 0, -1)]
    chain = _best_bit_chain([(good, 1), (bad, 0)], rest, len(arena))
    return LemGadget(WinLoseGame(arena, chain), n, p)


def gen_llpo_game(n: int, pairs) -> LlpoGadget:
    """Index pick (refusal loses), binary side pick, then the block game.

    A winning strategy of the protagonist, restricted to the side picks,
    yields a valid answer for every index.
    """
    pairs = tuple(pairs)
    if not pairs:
        raise ValueError("need at least one input pair")
    for pr in pairs:
        eval_sigma_llpo(n, pr)       # promise check, raises otherwise
    b = _GB(2)
    m = len(pairs)
    u = [b.fresh(1) for _ in range(m)]
    for j in range(m - 1):
        b.edge(u[j], 0, u[j + 1])
    b.edge(u[m - 1], 0, u[m - 1])
    tails: list[set[int]] = [set() for _ in range(n)]
    terminals: dict[int, int] = {}
    region = _PickRegion(b, n, tails, terminals)
    choice = []
    pick_labels = []
    for j in range(m):
        c = b.fresh(0)
        choice.append(c)
        b.edge(u[j], 1, c)
        for i in (0, 1):
            b.edge(c, i, region.build(pairs[j][i], 1, ()))
        pick_labels.append((0, 1))
    arena = b.build(u[0])
    good = {terminals[1]} if 1 in terminals else set()
    bad = {terminals[0]} if 0 in terminals else set()
    rest = [(tails[i], i % 2) for i in range(n - 1, 0, -1)]
    rest.append(({u[m - 1]}, 1))     # index refusal loses for the picker
    chain = _best_bit_chain([(good, 1), (bad, 0)], rest, len(arena))
    return LlpoGadget(WinLoseGame(arena, chain), n, pairs, tuple(choice), tuple(pick_labels))


def walk_product_state(product, labels) -> tuple[int, int]:
    """Product state reached from the initial state along edge labels."""
    s = product.initial
    for lab in labels:
        s = product.arena.step(s, lab)
    return product.state_tuple(s)


def decode_llpo(gadget: LlpoGadget, sol: Solution) -> dict[int, int]:
    """Map j -> i extracted from the protagonist's strategy."""
    product = sol.product
    out = {}
    for j, c in enumerate(gadget.choice_vertices):
        st = walk_product_state(product, [0] * j + [1])
        assert st[0] == c
        out[j] = sol.moves[0][st]
    return out


# --------------------------------------------------------------------------
# Announce / adjoin / chain / conjunction combinators


@dataclass
class AnnounceGadget:
    game: MultiOutcomeGame
    components: tuple[WinLoseGame, ...]
    announce_path: tuple[int, ...]      # announcement vertices in bit order


@dataclass
class AdjoinGadget:
    game: MultiOutcomeGame
    g0: MultiOutcomeGame
    g1: WinLoseGame
    root: int
    g0_map: dict[int, int]
    g1_map: dict[int, int]
    lo: str
    hi: str


@dataclass
class SpeChainGadget:
    game: MultiOutcomeGame
    components: tuple[WinLoseGame, ...]
    decision_vertices: tuple[int, ...]
    enter_label: int
    chain_vertices: tuple[int, ...]


@dataclass
class HatGadget:
    game: WinLoseGame
    components: tuple[WinLoseGame, ...]


def _embed_component(b: _GB, wl: WinLoseGame, win_label, lose_label):
    """Copy a component in chain form; return (entry, class list)."""
    arena, rings, _ = _chain_classes(wl)
    amap = b.copy_arena(arena)
    classes = []
    for atoms, bit in rings:
        classes.append(({amap[v] for v in atoms}, win_label if bit else lose_label))
    entry = amap[arena.root]
    classes.append(({entry}, lose_label))
    return entry, classes


def gen_announce(components, max_components: int = 8) -> AnnounceGadget:
    """Announce-then-choose game with stakes scaled by the claim size.

    The protagonist publicly claims a subset of winnable components via a
    binary word; the opponent then picks a claimed component, played for
    stakes +-|claim|.  An empty claim ends the game at outcome 0.  Every
    equilibrium claims exactly the winnable set, so the certificate
    outcome decodes its size.
    """
    components = tuple(components)
    if not 1 <= len(components) <= max_components:
        raise ValueError(f"component count must be within 1..{max_components}")
    n = len(components)
    b = _GB(2)
    announce = [b.fresh(0) for _ in range(n)]
    zero_sink = b.terminal()
    classes = []

    def leaf(chosen: tuple[int, ...]) -> int:
        if not chosen:
            return zero_sink
        c = b.fresh(1)
        stake = len(chosen)
        for k in chosen:
            entry, cls = _embed_component(b, components[k], str(stake), str(-stake))
            b.edge(c, k, entry)
            classes.extend(cls)
        return c

    subtree: dict[tuple[int, tuple[int, ...]], int] = {}

    def node(i: int, chosen: tuple[int, ...]) -> int:
        if i == n:
            return leaf(chosen)
        if i == 0:
            v = announce[0]
        else:
            v = b.fresh(0)
        b.edge(v, 0, node(i + 1, chosen))
        b.edge(v, 1, node(i + 1, chosen + (i,)))
        return v

    # announce[0] is the root; deeper announcement vertices are created on
    # the fly (one per reachable claim prefix)
    for i in range(1, n):
        pass
    root = node(0, ())
    classes.append(({zero_sink}, "0"))
    arena = b.build(root)
    chain, labels = chain_from_classes(classes, len(arena))
    order = tuple(str(k) for k in range(-n, n + 1))
    prefs = (order, tuple(reversed(order)))
    game = MultiOutcomeGame(arena, LeveledValuation(chain, labels), prefs)
    return AnnounceGadget(game, components, (root,))


def decode_announcement(gadget: AnnounceGadget, play: Play) -> frozenset[int]:
    """Claim set read off the first announcement bits of a play."""
    n = len(gadget.components)
    return frozenset(k for k in range(n) if play.label(k) == 1)


def gen_adjoin(g0: MultiOutcomeGame, g1: WinLoseGame) -> AdjoinGadget:
    """Opponent chooses between the multi-outcome game and a side game.

    The side game's outcomes sit strictly below and above every outcome
    of ``g0`` (losing it is the protagonist's worst case, winning it the
    best), so every equilibrium enters ``g0``; the protagonist's profile
    restricted to the side branch embeds a winning strategy whenever the
    promise (protagonist wins ``g1``) holds.
    """
    if not g0.is_antagonistic():
        raise ValueError("g0 must be a 2-player antagonistic game")
    taken = set(g0.outcomes)
    lo, hi = "lo", "hi"
    while lo in taken or hi in taken:
        lo, hi = lo + "_", hi + "_"
    b = _GB(2)
    root = b.fresh(1)
    # copy g0 with its valuation rings
    g0map = b.copy_arena(g0.arena)
    classes = []
    chain0 = g0.valuation.chain
    prev: frozenset[int] = frozenset()
    for m, t in enumerate(chain0.targets):
        classes.append(({g0map[v] for v in t - prev}, g0.valuation.labels[m]))
        prev = t
    classes.append(({g0map[g0.arena.root]}, g0.valuation.labels[chain0.level]))
    arena1, rings1, _ = _chain_classes(g1)
    g1map = b.copy_arena(arena1)
    for atoms, bit in rings1:
        classes.append(({g1map[v] for v in atoms}, hi if bit else lo))
    classes.append(({g1map[arena1.root]}, lo))
    b.edge(root, 0, g0map[g0.arena.root])
    b.edge(root, 1, g1map[arena1.root])
    arena = b.build(root)
    chain, labels = chain_from_classes(classes, len(arena))
    prefs = (
        (lo,) + g0.prefs[0] + (hi,),
        (hi,) + g0.prefs[1] + (lo,),
    )
    game = MultiOutcomeGame(arena, LeveledValuation(chain, labels), prefs)
    return AdjoinGadget(game, g0, g1, root, g0map, g1map, lo, hi)


def gen_spe_chain(components) -> SpeChainGadget:
    """Rightward chain of decisions between a component game and a safe half.

    Moving right forever earns the top outcome (realized as a terminal
    after the truncated chain); at each left exit the protagonist decides
    between playing component ``i`` for outcomes 1/0 and a guaranteed
    half.  In every subgame-perfect profile the decision at slot ``i`` is
    to play iff the component is winnable.
    """
    components = tuple(components)
    if not components:
        raise ValueError("need at least one component")
    m = len(components)
    b = _GB(2)
    rs = [b.fresh(0) for _ in range(m)]
    ds = [b.fresh(0) for _ in range(m)]
    halves = []
    classes = []
    tail = b.terminal()
    for i in range(m):
        h = b.terminal()
        halves.append(h)
        b.edge(rs[i], 0, ds[i])
        b.edge(rs[i], 1, rs[i + 1] if i + 1 < m else tail)
        entry, cls = _embed_component(b, components[i], "1", "0")
        classes.extend(cls)
        b.edge(ds[i], 0, entry)
        b.edge(ds[i], 1, h)
    classes.append((set(halves), "half"))
    classes.append(({tail}, "1"))
    arena = b.build(rs[0])
    chain, labels = chain_from_classes(classes, len(arena))
    prefs = (("0", "half", "1"), ("1", "half", "0"))
    game = MultiOutcomeGame(arena, LeveledValuation(chain, labels), prefs)
    return SpeChainGadget(game, components, tuple(ds), 0, tuple(rs))


def decode_spe_chain(gadget: SpeChainGadget, profile: StrategyProfile) -> tuple[int, ...]:
    """Per-component claimed winner (0 = protagonist) from the decisions."""
    product = game_product(gadget.game)
    out = []
    for i, d in enumerate(gadget.decision_vertices):
        st = walk_product_state(product, [1] * i + [0])
        assert st[0] == d
        out.append(0 if profile.moves[0][st] == gadget.enter_label else 1)
    return tuple(out)


def gen_hat(components) -> HatGadget:
    """Conjunction: the opponent picks which component to play (unary,
    refusal loses); the protagonist wins iff it wins every component."""
    components = tuple(components)
    if not components:
        raise ValueError("need at least one component")
    m = len(components)
    b = _GB(2)
    u = [b.fresh(1) for _ in range(m)]
    for j in range(m - 1):
        b.edge(u[j], 0, u[j + 1])
    b.edge(u[m - 1], 0, u[m - 1])
    class_lists = []
    for k in range(m):
        entry, cls = _embed_component(b, components[k], 1, 0)
        b.edge(u[k], 1, entry)
        class_lists.append(cls)
    patterns = {tuple(bit for _, bit in cls) for cls in class_lists}
    if len(patterns) == 1:
        merged = []
        for idx in range(len(class_lists[0])):
            atoms = set()
            for cls in class_lists:
                atoms |= cls[idx][0]
            merged.append((atoms, class_lists[0][idx][1]))
        classes = merged
    else:
        classes = [c for cls in class_lists for c in cls]
    classes.append(({u[m - 1]}, 1))
    arena = b.build(u[0])
    chain = bit_chain_from_classes(classes, len(arena))
    return HatGadget(WinLoseGame(arena, chain), components)
