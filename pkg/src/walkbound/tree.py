"""The coset tree for the conjugation extension, and its geometry.

Vertices are cosets w<x1> of the cyclic subgroup generated by the first free
generator, with the unique reduced representative that does not end in a
power of x1. Each vertex has one neighbor per choice of (m, i, sign) with
i >= 2: the coset of rep * x1^m * xi^sign. The tree is locally infinite, so
every enumeration takes explicit bounds; purely combinatorial operations
(canonical forms, parents, geodesics) are exact and need none.

The group acts on the left; the cyclic extension acts through conjugation by
x1, which fixes the base vertex. Exit elements label directions: the element
rep * x1^m * xi^sign lies in the neighboring coset and records the door used
to leave the vertex, which is what strips collect along a geodesic.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import ConfigError
from .morphisms import Automorphism, inner_automorphism
from .words import Word

__all__ = [
    "CosetTree",
    "CosetVertex",
    "Direction",
    "LiminfResult",
    "StripProfile",
    "TreeGeodesic",
    "build_tree",
    "liminf_observers",
    "strip_exit_points",
    "strip_growth_profile",
    "twisted_power",
]


@dataclass(frozen=True, slots=True)
class CosetVertex:
    """A coset of <x1>, named by its representative without trailing x1's."""

    rep: Word

    def __post_init__(self) -> None:
        if self.rep.letters and abs(self.rep.letters[-1]) == 1:
            raise ConfigError(
                f"vertex representative {self.rep} ends in the stripped generator"
            )

    @property
    def rank(self) -> int:
        return self.rep.rank

    @property
    def depth(self) -> int:
        """Distance to the base vertex: the number of non-x1 letters."""
        return sum(1 for s in self.rep.letters if abs(s) != 1)

    def __str__(self) -> str:
        return f"V({self.rep})"


@dataclass(frozen=True, slots=True)
class Direction:
    """One component of the tree minus ``base``, labeled by its exit element."""

    base: CosetVertex
    exit: Word


@dataclass(frozen=True, slots=True)
class TreeGeodesic:
    """The unique reduced edge path between two vertices.

    ``labels[i]`` is the exit element at ``vertices[i]`` toward
    ``vertices[i+1]``.
    """

    vertices: tuple[CosetVertex, ...]
    labels: tuple[Word, ...]

    def __len__(self) -> int:
        return len(self.labels)

    @property
    def source(self) -> CosetVertex:
        return self.vertices[0]

    @property
    def target(self) -> CosetVertex:
        return self.vertices[-1]


class CosetTree:
    """Tree context for one free rank; see the module docstring."""

    __slots__ = ("rank", "alpha")

    def __init__(self, rank: int):
        if rank < 2:
            raise ConfigError("the coset tree needs free rank >= 2")
        self.rank = rank
        self.alpha = inner_automorphism(rank, Word(rank, (1,)))

    # -- vertices ------------------------------------------------------------

    def vertex(self, w: Word) -> CosetVertex:
        """The vertex of the coset w<x1>."""
        if w.rank != self.rank:
            raise ConfigError(f"rank mismatch: {self.rank} vs {w.rank}")
        letters = w.letters
        end = len(letters)
        while end > 0 and abs(letters[end - 1]) == 1:
            end -= 1
        return CosetVertex(Word(self.rank, letters[:end]))

    @property
    def base_vertex(self) -> CosetVertex:
        return CosetVertex(Word.identity(self.rank))

    def parent(self, v: CosetVertex) -> CosetVertex:
        """The neighbor one step closer to the base vertex."""
        if not v.rep:
            raise ConfigError("the base vertex has no parent")
        return self.vertex(Word(self.rank, v.rep.letters[:-1]))

    def exits(self, v: CosetVertex, m_bound: int) -> list[Direction]:
        """The directions at ``v`` with |x1-offset| <= m_bound."""
        out = []
        rep = v.rep.letters
        for m in range(-m_bound, m_bound + 1):
            stem = rep + ((1,) * m if m >= 0 else (-1,) * (-m))
            for i in range(2, self.rank + 1):
                for s in (i, -i):
                    if m == 0 and rep and rep[-1] == -s:
                        # the exit back toward the parent: reduced form drops
                        # the last letter instead of appending one
                        word = Word(self.rank, rep[:-1])
                    else:
                        word = Word(self.rank, stem + (s,))
                    out.append(Direction(v, word))
        return out

    def exit_toward(self, v: CosetVertex, neighbor: CosetVertex) -> Word:
        """The exit element at ``v`` for the direction containing ``neighbor``."""
        if self.parent_or_none(neighbor) == v:
            # child's representative extends v's by x1^m * xi^s
            return neighbor.rep
        if self.parent_or_none(v) == neighbor:
            return Word(self.rank, v.rep.letters[:-1])
        raise ConfigError(f"{v} and {neighbor} are not adjacent")

    def parent_or_none(self, v: CosetVertex) -> CosetVertex | None:
        return self.parent(v) if v.rep else None

    # -- group actions ---------------------------------------------------------

    def act_word(self, w: Word, v: CosetVertex) -> CosetVertex:
        """Left translation by a base-group element."""
        return self.vertex(w * v.rep)

    def act_ext(self, w: Word, power: int, v: CosetVertex) -> CosetVertex:
        """Left translation by (w, t^power) in the cyclic extension.

        t itself fixes the base vertex and intertwines the base action
        through conjugation: act_ext(1, 1, act_word(u, P)) equals
        act_word(alpha(u), act_ext(1, 1, P)).
        """
        return self.vertex(w * self.alpha.power(power).apply(v.rep))

    # -- geodesics -------------------------------------------------------------

    def chain_to_base(self, v: CosetVertex) -> list[CosetVertex]:
        """Vertices from ``v`` down to the base vertex, inclusive."""
        chain = [v]
        while chain[-1].rep:
            chain.append(self.parent(chain[-1]))
        return chain

    def geodesic(self, u: CosetVertex, v: CosetVertex) -> TreeGeodesic:
        up = self.chain_to_base(u)
        down = self.chain_to_base(v)
        # peel the shared tail ending at the base vertex, keeping the meet
        while len(up) > 1 and len(down) > 1 and up[-2] == down[-2]:
            up.pop()
            down.pop()
        if up[-1] != down[-1]:
            raise ConfigError("parent chains never met; tree invariant broken")
        vertices = tuple(up) + tuple(reversed(down[:-1]))
        labels = tuple(
            self.exit_toward(vertices[i], vertices[i + 1])
            for i in range(len(vertices) - 1)
        )
        return TreeGeodesic(vertices, labels)

    def distance(self, u: CosetVertex, v: CosetVertex) -> int:
        return len(self.geodesic(u, v))

    # -- bounded enumeration ----------------------------------------------------

    def ball(self, radius: int, m_bound: int) -> list[CosetVertex]:
        """Vertices within ``radius`` edges of the base, exits |m| <= m_bound."""
        seen = {self.base_vertex}
        frontier = [self.base_vertex]
        for _ in range(radius):
            next_frontier = []
            for v in frontier:
                for direction in self.exits(v, m_bound):
                    w = self.vertex(direction.exit)
                    if w not in seen:
                        seen.add(w)
                        next_frontier.append(w)
            frontier = next_frontier
        return sorted(seen, key=lambda v: (v.depth, v.rep.letters))

    def to_dot(self, radius: int, m_bound: int) -> str:
        """A DOT rendering of the ball, for eyeballing small cases."""
        vertices = self.ball(radius, m_bound)
        index = {v: i for i, v in enumerate(vertices)}
        lines = ["graph coset_tree {"]
        for v, i in index.items():
            lines.append(f'  n{i} [label="{v.rep or "1"}"];')
        for v in vertices:
            for direction in self.exits(v, m_bound):
                w = self.vertex(direction.exit)
                j = index.get(w)
                if j is not None and index[v] < j:
                    lines.append(f"  n{index[v]} -- n{j};")
        lines.append("}")
        return "\n".join(lines)


def build_tree(rank: int) -> CosetTree:
    """The invariant tree of the conjugation extension on ``rank`` generators."""
    return CosetTree(rank)


# -- liminf in the observers topology -----------------------------------------


@dataclass(frozen=True)
class LiminfResult:
    """Verdict on where a vertex sequence accumulates, seen from a base.

    ``kind`` is "vertex" when the eventually-common part of the geodesics
    stabilizes, "ray" when it keeps growing to the horizon, and
    "inconclusive" when the sequence is too short to tell. ``path`` is the
    stable vertex path from the base; ``vertex`` is its endpoint.
    """

    kind: str
    vertex: CosetVertex | None
    path: tuple[CosetVertex, ...]
    prefix_lengths: tuple[int, ...]


def _common_prefix(paths: Sequence[Sequence[CosetVertex]]) -> list[CosetVertex]:
    first = paths[0]
    n = min(len(p) for p in paths)
    out = []
    for i in range(n):
        v = first[i]
        if all(p[i] == v for p in paths[1:]):
            out.append(v)
        else:
            break
    return out


def liminf_observers(
    tree: CosetTree,
    base: CosetVertex,
    sequence: Sequence[CosetVertex],
    horizon: int,
) -> LiminfResult:
    """Locate the liminf of a vertex sequence as seen from ``base``.

    For each m the geodesics [base, P_n], n >= m, share a vertex path from
    the base; the liminf is the limit of those shared paths. The verdict is
    read off the tail of the finite sequence: a shared path of constant
    length over the last window is a vertex, strict growth (or hitting the
    horizon) is a ray, anything else is inconclusive.
    """
    if not sequence:
        raise ConfigError("need a nonempty vertex sequence")
    if horizon < 1:
        raise ConfigError("need horizon >= 1")
    paths = [tree.geodesic(base, p).vertices for p in sequence]
    n = len(paths)
    if n == 1:
        path = tuple(paths[0])
        if len(path) - 1 >= horizon:
            return LiminfResult("ray", None, path[: horizon + 1], (len(path),))
        return LiminfResult("vertex", path[-1], path, (len(path),))

    # each intersection must range over at least two geodesics; the common
    # prefix of a lone path is the whole path and says nothing about a tail
    tails = [_common_prefix(paths[m:]) for m in range(n - 1)]
    lengths = tuple(len(t) for t in tails)
    window = min(len(tails), max(2, (n - 1) // 4))
    tail_lengths = lengths[len(tails) - window:]
    stable_path = tuple(tails[len(tails) - window])

    if len(stable_path) - 1 >= horizon:
        return LiminfResult("ray", None, stable_path[: horizon + 1], lengths)
    if n == 2 and sequence[0] != sequence[1]:
        # one pairwise intersection cannot witness stabilization
        return LiminfResult("inconclusive", None, stable_path, lengths)
    if all(x == tail_lengths[0] for x in tail_lengths):
        return LiminfResult("vertex", stable_path[-1], stable_path, lengths)
    if all(b > a for a, b in zip(tail_lengths, tail_lengths[1:])):
        return LiminfResult("ray", None, stable_path, lengths)
    return LiminfResult("inconclusive", None, stable_path, lengths)


# -- twisted powers ------------------------------------------------------------


def twisted_power(v: Word, k: int, phi: Automorphism) -> Word:
    """The product v * phi^-1(v) * ... * phi^(1-k)(v), freely reduced.

    Satisfies s(k+1) = v * phi^-1(s(k)), the form in which edge-fixing
    elements of the cyclic extension present themselves.
    """
    if k < 1:
        raise ConfigError("twisted powers need k >= 1")
    if v.rank != phi.rank:
        raise ConfigError(f"rank mismatch: {v.rank} vs {phi.rank}")
    out = v
    for _ in range(k - 1):
        out = v * phi.apply_inverse(out)
    return out


# -- strips ---------------------------------------------------------------------


def strip_exit_points(
    tree: CosetTree,
    b1: CosetVertex,
    b2: CosetVertex,
) -> list[Word]:
    """Exit elements collected along the geodesic from ``b1`` to ``b2``.

    Every vertex on the geodesic contributes its exit toward each endpoint
    (one at the endpoints themselves, two in the interior); duplicates are
    dropped. Equal endpoints give the empty strip.
    """
    if b1 == b2:
        return []
    path = tree.geodesic(b1, b2).vertices
    out: list[Word] = []
    seen: set[tuple[int, ...]] = set()
    for i, v in enumerate(path):
        toward = []
        if i > 0:
            toward.append(path[i - 1])
        if i < len(path) - 1:
            toward.append(path[i + 1])
        for w in toward:
            door = tree.exit_toward(v, w)
            if door.letters not in seen:
                seen.add(door.letters)
                out.append(door)
    return out


@dataclass(frozen=True)
class StripProfile:
    """Ball counts of a strip and their least-squares linear fit."""

    counts: tuple[int, ...]
    a_fit: float
    b_fit: float
    max_residual: float

    def bound_holds(self, tol: float = 1e-9) -> bool:
        """Whether count_k <= a + b*k + tol for every tabulated k."""
        return all(
            c <= self.a_fit + self.b_fit * k + tol
            for k, c in enumerate(self.counts, start=1)
        )


def strip_growth_profile(strip: Iterable[Word], k_max: int) -> StripProfile:
    """Count strip elements in word-length balls and fit a linear bound."""
    if k_max < 1:
        raise ConfigError("need k_max >= 1")
    lengths = sorted(len(w) for w in strip)
    counts = tuple(
        int(np.searchsorted(lengths, k, side="right")) for k in range(1, k_max + 1)
    )
    ks = np.arange(1, k_max + 1, dtype=np.float64)
    ys = np.array(counts, dtype=np.float64)
    if k_max == 1:
        a, b = ys[0], 0.0
    else:
        b, a = np.polyfit(ks, ys, 1)
    residual = float(np.max(np.abs(ys - (a + b * ks)))) if counts else 0.0
    return StripProfile(counts, float(a), float(b), residual)
