"""Free-group automorphisms as generator-image tables.

An automorphism is stored as the images of the basis generators together with
a user-supplied table for its inverse. Inverting a free-group automorphism
algorithmically is out of scope, but verifying a claimed inverse is cheap:
both compositions must fix every generator, and the constructor checks this
exactly. Everything downstream (composition, powers, the boundary action)
relies only on the verified pair of tables.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .errors import BudgetError, InconclusiveGrowthError, TruncationError
from .words import Ray, Word, free_reduce

__all__ = [
    "Automorphism",
    "GrowthReport",
    "CancellationBound",
    "identity_automorphism",
    "inner_automorphism",
    "classify_growth",
    "cancellation_bound",
    "boundary_apply",
    "default_margin",
    "DEFAULT_FIT_GAP",
]

# Minimum R² separation between the two growth fits before a verdict is
# issued. At 30 iterations a one-letter-per-iterate automorphism separates the
# fits by about 0.10, so the threshold sits below that with room to spare.
DEFAULT_FIT_GAP = 0.08


def _apply_table(table: dict[int, tuple[int, ...]], letters: tuple[int, ...]) -> list[int]:
    out: list[int] = []
    push = out.append
    pop = out.pop
    for s in letters:
        for t in table[s]:
            if out and out[-1] == -t:
                pop()
            else:
                push(t)
    return out


class Automorphism:
    """An automorphism of the rank-``d`` free group, with verified inverse.

    ``images[i-1]`` is the image of generator ``i``; ``inverse_images[i-1]``
    the image of generator ``i`` under the declared inverse.
    """

    __slots__ = ("rank", "images", "inverse_images", "_table", "_inv_table")

    def __init__(
        self,
        rank: int,
        images: tuple[Word, ...],
        inverse_images: tuple[Word, ...],
        *,
        _verified: bool = False,
    ):
        images = tuple(images)
        inverse_images = tuple(inverse_images)
        if len(images) != rank or len(inverse_images) != rank:
            raise ValueError(f"need exactly {rank} images and inverse images")
        for w in images + inverse_images:
            if not isinstance(w, Word) or w.rank != rank:
                raise ValueError("image words must all have the declared rank")
        self.rank = rank
        self.images = images
        self.inverse_images = inverse_images
        self._table = _letter_table(images)
        self._inv_table = _letter_table(inverse_images)
        if not _verified:
            self._verify_inverse()

    def _verify_inverse(self) -> None:
        for i in range(1, self.rank + 1):
            target = (i,)
            fwd = _apply_table(self._table, self.inverse_images[i - 1].letters)
            if tuple(fwd) != target:
                raise ValueError(
                    f"inverse table rejected: images∘inverse moves generator {i}"
                )
            bwd = _apply_table(self._inv_table, self.images[i - 1].letters)
            if tuple(bwd) != target:
                raise ValueError(
                    f"inverse table rejected: inverse∘images moves generator {i}"
                )

    @classmethod
    def parse(
        cls,
        rank: int,
        images: Sequence[str],
        inverse_images: Sequence[str],
    ) -> "Automorphism":
        return cls(
            rank,
            tuple(Word.parse(rank, s) for s in images),
            tuple(Word.parse(rank, s) for s in inverse_images),
        )

    # -- application ---------------------------------------------------------

    def apply(self, w: Word) -> Word:
        if w.rank != self.rank:
            raise ValueError(f"rank mismatch: {self.rank} vs {w.rank}")
        return Word(self.rank, tuple(_apply_table(self._table, w.letters)))

    __call__ = apply

    def apply_inverse(self, w: Word) -> Word:
        if w.rank != self.rank:
            raise ValueError(f"rank mismatch: {self.rank} vs {w.rank}")
        return Word(self.rank, tuple(_apply_table(self._inv_table, w.letters)))

    def apply_letters(self, letters: tuple[int, ...]) -> list[int]:
        """Reduced image of a raw letter sequence; internal fast path."""
        return _apply_table(self._table, letters)

    # -- algebra -------------------------------------------------------------

    def inverse(self) -> "Automorphism":
        return Automorphism(self.rank, self.inverse_images, self.images, _verified=True)

    def compose(self, other: "Automorphism") -> "Automorphism":
        """``self ∘ other``: apply ``other`` first."""
        if other.rank != self.rank:
            raise ValueError(f"rank mismatch: {self.rank} vs {other.rank}")
        images = tuple(self.apply(w) for w in other.images)
        # (f∘g)^-1 = g^-1 ∘ f^-1
        inverse_images = tuple(other.apply_inverse(w) for w in self.inverse_images)
        return Automorphism(self.rank, images, inverse_images, _verified=True)

    def power(self, k: int) -> "Automorphism":
        base = self if k >= 0 else self.inverse()
        result = identity_automorphism(self.rank)
        for _ in range(abs(k)):
            result = base.compose(result)
        return result

    def is_identity(self) -> bool:
        return all(w.letters == (i + 1,) for i, w in enumerate(self.images))

    @property
    def max_image_length(self) -> int:
        return max(len(w) for w in self.images + self.inverse_images)

    # -- equality ------------------------------------------------------------

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Automorphism):
            return NotImplemented
        # automorphisms agree iff they agree on generators
        return self.rank == other.rank and self.images == other.images

    def __hash__(self) -> int:
        return hash((self.rank, self.images))

    def __repr__(self) -> str:
        imgs = ", ".join(f"{i+1}->{w}" for i, w in enumerate(self.images))
        return f"Automorphism({self.rank}: {imgs})"


def _letter_table(images: tuple[Word, ...]) -> dict[int, tuple[int, ...]]:
    table: dict[int, tuple[int, ...]] = {}
    for i, w in enumerate(images, start=1):
        table[i] = w.letters
        table[-i] = w.inverse().letters
    return table


def identity_automorphism(rank: int) -> Automorphism:
    gens = tuple(Word(rank, (i,)) for i in range(1, rank + 1))
    return Automorphism(rank, gens, gens, _verified=True)


def inner_automorphism(rank: int, g: Word) -> Automorphism:
    """Conjugation x ↦ g·x·g^-1."""
    images = tuple(Word(rank, (i,)).conjugate(g) for i in range(1, rank + 1))
    g_inv = g.inverse()
    inverse_images = tuple(Word(rank, (i,)).conjugate(g_inv) for i in range(1, rank + 1))
    return Automorphism(rank, images, inverse_images, _verified=True)


# -- growth classification ----------------------------------------------------


@dataclass(frozen=True)
class GrowthReport:
    """Verdict on how generator images grow under iteration.

    ``per_generator_lengths[i][m]`` is the cyclically reduced length of the
    m-th iterate of generator i+1, for m = 0..iterations_used. Cyclically
    reduced lengths are used because growth is a property of the outer class:
    conjugation noise must not change the verdict.
    """

    kind: str  # "Polynomial" | "Exponential"
    degree_estimate: int | None
    rate_estimate: float | None  # nats per iteration
    iterations_used: int
    per_generator_lengths: tuple[tuple[int, ...], ...]
    r2_polynomial: float | None = None
    r2_exponential: float | None = None


def _least_squares(xs: list[float], ys: list[float]) -> tuple[float, float, float]:
    """Fit y = a + b·x; return (slope, intercept, r²)."""
    n = len(xs)
    mx = sum(xs) / n
    my = sum(ys) / n
    sxx = sum((x - mx) ** 2 for x in xs)
    sxy = sum((x - mx) * (y - my) for x, y in zip(xs, ys))
    syy = sum((y - my) ** 2 for y in ys)
    if sxx == 0.0:
        return 0.0, my, 0.0
    slope = sxy / sxx
    intercept = my - slope * mx
    if syy == 0.0:
        # constant data: a flat line fits perfectly
        return slope, intercept, 1.0
    ss_res = sum((y - (intercept + slope * x)) ** 2 for x, y in zip(xs, ys))
    return slope, intercept, 1.0 - ss_res / syy


def classify_growth(
    phi: Automorphism, max_iter: int, fit_gap: float = DEFAULT_FIT_GAP
) -> GrowthReport:
    """Decide between polynomial and exponential growth of iterated images.

    Records cyclically reduced lengths of φ^m(xᵢ) for m = 0..max_iter, then
    fits log-length against log m (polynomial model) and against m
    (exponential model) by least squares over the whole range. The better R²
    wins; parameter estimates (rounded degree, rate in nats) come from the
    tail half of the range where the asymptotic behaviour dominates. If the
    two R² values are within ``fit_gap`` the classifier refuses to guess and
    raises :class:`InconclusiveGrowthError`.
    """
    if max_iter < 8:
        raise ValueError("max_iter must be >= 8")
    rank = phi.rank
    lengths: list[list[int]] = []
    for i in range(1, rank + 1):
        current = (i,)
        row = [1]
        for _ in range(max_iter):
            current = tuple(phi.apply_letters(current))
            row.append(_cyclic_core_length(current))
        lengths.append(row)
    per_gen = tuple(tuple(row) for row in lengths)

    envelope = [max(row[m] for row in lengths) for m in range(max_iter + 1)]
    tail_start = max(1, max_iter // 2)

    # bounded growth: the envelope stops moving entirely
    tail_vals = envelope[tail_start:]
    if max(tail_vals) == min(tail_vals):
        return GrowthReport(
            kind="Polynomial",
            degree_estimate=0,
            rate_estimate=None,
            iterations_used=max_iter,
            per_generator_lengths=per_gen,
        )

    ms = list(range(1, max_iter + 1))
    ys = [math.log(envelope[m]) for m in ms]
    log_ms = [math.log(m) for m in ms]
    _, _, r2_poly = _least_squares(log_ms, ys)
    _, _, r2_exp = _least_squares(ms, ys)

    tail = [(m, y) for m, y in zip(ms, ys) if m >= tail_start]
    poly_slope, _, _ = _least_squares([math.log(m) for m, _ in tail], [y for _, y in tail])
    exp_slope, _, _ = _least_squares([float(m) for m, _ in tail], [y for _, y in tail])

    poly_fit = {"r2": r2_poly, "degree": round(poly_slope), "tail_slope": poly_slope}
    exp_fit = {"r2": r2_exp, "rate": exp_slope}

    if abs(r2_poly - r2_exp) < fit_gap:
        raise InconclusiveGrowthError(
            f"growth fits are inseparable (R² {r2_poly:.4f} vs {r2_exp:.4f}, "
            f"gap < {fit_gap}); increase max_iter",
            polynomial_fit=poly_fit,
            exponential_fit=exp_fit,
        )

    if r2_exp > r2_poly and exp_slope > 0:
        return GrowthReport(
            kind="Exponential",
            degree_estimate=None,
            rate_estimate=exp_slope,
            iterations_used=max_iter,
            per_generator_lengths=per_gen,
            r2_polynomial=r2_poly,
            r2_exponential=r2_exp,
        )
    return GrowthReport(
        kind="Polynomial",
        degree_estimate=max(0, round(poly_slope)),
        rate_estimate=None,
        iterations_used=max_iter,
        per_generator_lengths=per_gen,
        r2_polynomial=r2_poly,
        r2_exponential=r2_exp,
    )


def _cyclic_core_length(letters: tuple[int, ...]) -> int:
    lo, hi = 0, len(letters)
    while hi - lo >= 2 and letters[lo] == -letters[hi - 1]:
        lo += 1
        hi -= 1
    return hi - lo


# -- bounded cancellation ------------------------------------------------------


@dataclass(frozen=True)
class CancellationBound:
    """Largest junction cancellation seen between images of reduced products.

    Certified by exhaustive search over all reduced products u·v with
    |u|, |v| <= search_length; beyond that horizon the bound is a heuristic.
    """

    value: int
    search_length: int


def cancellation_bound(
    phi: Automorphism, L: int, max_pairs: int = 2_000_000
) -> CancellationBound:
    """Exhaustively maximize cancellation between φ(u) and φ(v) over u·v reduced."""
    if L < 1:
        raise ValueError("search length must be >= 1")
    rank = phi.rank
    words: list[tuple[int, ...]] = []
    frontier: list[tuple[int, ...]] = [()]
    for _ in range(L):
        nxt = []
        for w in frontier:
            for s in range(-rank, rank + 1):
                if s == 0 or (w and w[-1] == -s):
                    continue
                nxt.append(w + (s,))
        words.extend(nxt)
        frontier = nxt
    if len(words) ** 2 > max_pairs:
        raise BudgetError(
            f"cancellation search needs {len(words) ** 2} pairs, over the "
            f"budget of {max_pairs}; lower L or raise the budget"
        )
    images = {w: tuple(phi.apply_letters(w)) for w in words}
    best = 0
    for u in words:
        iu = images[u]
        for v in words:
            if u[-1] == -v[0]:
                continue  # u·v not reduced
            iv = images[v]
            c = 0
            limit = min(len(iu), len(iv))
            while c < limit and iu[len(iu) - 1 - c] == -iv[c]:
                c += 1
            if c > best:
                best = c
    return CancellationBound(value=best, search_length=L)


# -- boundary action -----------------------------------------------------------


def default_margin(phi: Automorphism, power: int = 1) -> int:
    """Crude safe guard zone for the boundary action of φ^power."""
    return abs(power) * phi.max_image_length * 2


def boundary_apply(phi: Automorphism, r: Ray, depth: int, margin: int) -> Word:
    """First ``depth`` letters of φ applied to the boundary point of ``r``.

    Applies φ to the (depth+margin)-prefix and truncates. The result is the
    true prefix of φ(r) provided the margin dominates the cancellation φ can
    produce; for margins at least ``default_margin`` the returned prefix does
    not change when the margin grows further. If fewer than ``depth`` letters
    survive reduction the guard zone was consumed and the call fails.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    if margin < 0:
        raise ValueError("margin must be >= 0")
    if phi.rank != r.rank:
        raise ValueError(f"rank mismatch: {phi.rank} vs {r.rank}")
    image = phi.apply_letters(r.prefix(depth + margin).letters)
    if len(image) < depth:
        raise TruncationError(
            f"cancellation consumed the guard zone: {len(image)} of {depth} "
            f"letters survive at margin {margin}; retry with a larger margin"
        )
    return Word(phi.rank, tuple(image[:depth]))
