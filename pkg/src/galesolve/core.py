"""Finite game arenas, lasso plays, and positional strategy profiles.

An arena is a finite directed graph with integer-labelled edges, a
per-vertex owner, and a distinguished root.  Every vertex has at least one
outgoing edge, so plays never get stuck; a positional profile on a finite
arena therefore induces an eventually periodic play, which we store in
stem + cycle (lasso) form.

Players are numbered 0..n_players-1 everywhere in the library and in the
file format.  Human-facing CLI output prints them 1-based.
"""

from __future__ import annotations

from dataclasses import dataclass, field


class ArenaError(ValueError):
    """Raised when an arena description violates a structural invariant."""


class MissingMoveError(KeyError):
    """Raised when a profile has no move at a reachable state it owns."""


@dataclass(frozen=True)
class Arena:
    """Finite edge-labelled game graph with vertex owners and a root.

    ``edges[v]`` is a tuple of ``(label, target)`` pairs sorted by label;
    labels on edges leaving one vertex are pairwise distinct.  The lowest
    label is the canonical tie-break everywhere in the library.
    """

    n_players: int
    owner: tuple[int, ...]
    edges: tuple[tuple[tuple[int, int], ...], ...]
    root: int

    def __len__(self) -> int:
        return len(self.owner)

    def out_labels(self, v: int) -> tuple[int, ...]:
        return tuple(l for l, _ in self.edges[v])

    def step(self, v: int, label: int) -> int:
        for l, t in self.edges[v]:
            if l == label:
                return t
        raise ArenaError(f"no edge with label {label} at vertex {v}")

    def has_label(self, v: int, label: int) -> bool:
        return any(l == label for l, _ in self.edges[v])

    def lowest_edge(self, v: int) -> tuple[int, int]:
        return self.edges[v][0]


def validate_arena(
    owner: list[int] | tuple[int, ...],
    edges: list[list[tuple[int, int]]] | tuple,
    root: int,
    n_players: int | None = None,
) -> Arena:
    """Validate a raw arena description and return an immutable Arena.

    Diagnostics name the offending vertex: dead ends, duplicate edge
    labels, and vertices unreachable from the root are all rejected.
    """
    n = len(owner)
    if len(edges) != n:
        raise ArenaError(f"owner list has {n} entries but edge table has {len(edges)}")
    if not 0 <= root < n:
        raise ArenaError(f"root {root} out of range")
    if n_players is None:
        n_players = max(owner) + 1 if n else 1
    norm_edges = []
    for v in range(n):
        out = sorted(edges[v], key=lambda e: e[0])
        if not out:
            raise ArenaError(f"dead-end at vertex {v}")
        seen = set()
        for label, target in out:
            if label in seen:
                raise ArenaError(f"duplicate edge label {label} at vertex {v}")
            seen.add(label)
            if not 0 <= target < n:
                raise ArenaError(f"edge target {target} out of range at vertex {v}")
        if not 0 <= owner[v] < n_players:
            raise ArenaError(f"owner {owner[v]} out of range at vertex {v}")
        norm_edges.append(tuple(out))
    reached = {root}
    frontier = [root]
    while frontier:
        v = frontier.pop()
        for _, t in norm_edges[v]:
            if t not in reached:
                reached.add(t)
                frontier.append(t)
    for v in range(n):
        if v not in reached:
            raise ArenaError(f"unreachable vertex {v}")
    return Arena(n_players, tuple(owner), tuple(norm_edges), root)


@dataclass(frozen=True)
class Play:
    """Eventually periodic play in lasso form.

    The walk is ``stem[0] -stem_labels[0]-> stem[1] -> ... -> cycle[0]``
    and the cycle closes on its first vertex: the edge out of
    ``cycle[-1]`` with label ``cycle_labels[-1]`` returns to ``cycle[0]``.
    """

    stem: tuple[int, ...]
    stem_labels: tuple[int, ...]
    cycle: tuple[int, ...]
    cycle_labels: tuple[int, ...]

    def __post_init__(self):
        if len(self.stem) != len(self.stem_labels):
            raise ValueError("stem and stem_labels lengths differ")
        if len(self.cycle) != len(self.cycle_labels):
            raise ValueError("cycle and cycle_labels lengths differ")
        if not self.cycle:
            raise ValueError("cycle must be non-empty")

    def visited(self) -> frozenset[int]:
        return frozenset(self.stem) | frozenset(self.cycle)

    def vertex(self, i: int) -> int:
        if i < len(self.stem):
            return self.stem[i]
        return self.cycle[(i - len(self.stem)) % len(self.cycle)]

    def label(self, i: int) -> int:
        if i < len(self.stem):
            return self.stem_labels[i]
        return self.cycle_labels[(i - len(self.stem)) % len(self.cycle)]

    def start(self) -> int:
        return self.stem[0] if self.stem else self.cycle[0]

    def suffix(self, k: int) -> "Play":
        """The play with its first k steps dropped (still a valid lasso)."""
        if k <= len(self.stem):
            return Play(self.stem[k:], self.stem_labels[k:], self.cycle, self.cycle_labels)
        r = (k - len(self.stem)) % len(self.cycle)
        return Play(
            (),
            (),
            self.cycle[r:] + self.cycle[:r],
            self.cycle_labels[r:] + self.cycle_labels[:r],
        )


def check_play(arena: Arena, play: Play, start: int | None = None) -> None:
    """Assert that a lasso is a valid walk of the arena."""
    seq = list(play.stem) + list(play.cycle)
    labels = list(play.stem_labels) + list(play.cycle_labels)
    if start is not None and play.start() != start:
        raise ValueError(f"play starts at {play.start()}, expected {start}")
    for i in range(len(seq)):
        nxt = seq[i + 1] if i + 1 < len(seq) else play.cycle[0]
        if arena.step(seq[i], labels[i]) != nxt:
            raise ValueError(f"invalid step {seq[i]} -{labels[i]}-> {nxt}")


@dataclass
class StrategyProfile:
    """Positional moves per player plus an optional threat table.

    ``moves[p]`` maps states owned by player ``p`` to the chosen edge
    label.  ``threats[(d, s)]`` is the coalition move map the players
    other than ``d`` switch to once ``d`` first deviates at state ``s``;
    states are whatever state space the profile was built on (plain
    vertices or ``(vertex, counter)`` pairs of a memory product).
    Treated as immutable after construction.
    """

    moves: dict[int, dict]
    threats: dict = field(default_factory=dict)

    def move_at(self, owner: int, state) -> int:
        try:
            return self.moves[owner][state]
        except KeyError:
            raise MissingMoveError(f"player {owner} has no move at state {state}")


def induced_play(arena: Arena, profile: StrategyProfile, start: int) -> Play:
    """Trace the unique lasso the profile induces from ``start``.

    The cycle is detected at the first repeated state of ``arena`` (for a
    memory product, pass the product graph: repetition is then detected on
    product states, as required for the walk to actually be periodic).
    """
    seen: dict[int, int] = {}
    seq: list[int] = []
    labels: list[int] = []
    v = start
    while v not in seen:
        seen[v] = len(seq)
        seq.append(v)
        lab = profile.move_at(arena.owner[v], v)
        labels.append(lab)
        v = arena.step(v, lab)
    k = seen[v]
    return Play(tuple(seq[:k]), tuple(labels[:k]), tuple(seq[k:]), tuple(labels[k:]))


def antagonistic(pref_a: tuple, pref_b: tuple) -> bool:
    """Two linear preference lists are mutually inverse."""
    return tuple(reversed(pref_a)) == tuple(pref_b)
