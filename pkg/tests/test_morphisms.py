"""Automorphisms: application, composition, growth, boundary action."""

import time

import pytest
from hypothesis import given, strategies as st

from walkbound import (
    Automorphism,
    InconclusiveGrowthError,
    Ray,
    Word,
    TruncationError,
    boundary_apply,
    cancellation_bound,
    classify_growth,
    default_margin,
    identity_automorphism,
    inner_automorphism,
)
from oracles import fibonacci_rate


def shift_rank3() -> Automorphism:
    # a fixed, b fixed, c picks up one a per application
    return Automorphism.parse(3, ["a", "b", "ca"], ["a", "b", "cA"])


def fibonacci() -> Automorphism:
    return Automorphism.parse(2, ["ab", "a"], ["b", "Ba"])


def linear_rank2() -> Automorphism:
    return Automorphism.parse(2, ["a", "ab"], ["a", "Ab"])


letters_st = st.lists(
    st.integers(min_value=-2, max_value=2).filter(bool), max_size=10
)


def test_identity_fixes_everything():
    ident = identity_automorphism(3)
    for text in ["1", "a", "cab", "ACb"]:
        u = Word.parse(3, text)
        assert ident.apply(u) == u
    assert ident.is_identity()


def test_constructor_verifies_inverse():
    with pytest.raises(ValueError):
        Automorphism.parse(2, ["ab", "a"], ["a", "b"])  # not the inverse


def test_compose_and_power():
    alpha = shift_rank3()
    c = Word.parse(3, "c")
    assert alpha.compose(alpha).apply(c) == Word.parse(3, "caa")
    assert alpha.power(2).apply(c) == Word.parse(3, "caa")
    assert alpha.power(0).is_identity()
    assert alpha.compose(alpha.inverse()).is_identity()
    minus = alpha.power(-1)
    assert minus.apply(c) == alpha.inverse().apply(c) == Word.parse(3, "cA")


@given(letters_st, letters_st)
def test_apply_is_homomorphism(xs, ys):
    phi = fibonacci()
    u, v = Word.from_letters(2, xs), Word.from_letters(2, ys)
    assert phi.apply(u * v) == phi.apply(u) * phi.apply(v)


@given(letters_st)
def test_inverse_round_trip(xs):
    phi = fibonacci()
    u = Word.from_letters(2, xs)
    assert phi.apply_inverse(phi.apply(u)) == u


def test_inner_automorphism_conjugates():
    inner = inner_automorphism(2, Word.parse(2, "a"))
    b = Word.parse(2, "b")
    assert inner.apply(b) == Word.parse(2, "abA")
    assert inner.apply(Word.parse(2, "a")) == Word.parse(2, "a")


# -- growth classification --------------------------------------------------------

def test_identity_is_polynomial_degree_zero():
    report = classify_growth(identity_automorphism(2), 30)
    assert report.kind == "Polynomial"
    assert report.degree_estimate == 0


def test_linear_twists_are_polynomial_degree_one():
    for phi in (shift_rank3(), linear_rank2()):
        report = classify_growth(phi, 30)
        assert report.kind == "Polynomial"
        assert report.degree_estimate == 1
        assert report.rate_estimate is None


def test_fibonacci_is_exponential_with_golden_rate():
    report = classify_growth(fibonacci(), 30)
    assert report.kind == "Exponential"
    assert report.rate_estimate == pytest.approx(fibonacci_rate(), abs=0.05)
    assert report.degree_estimate is None


def test_growth_verdict_is_outer_invariant():
    phi = linear_rank2()
    conjugated = inner_automorphism(2, Word.parse(2, "ba")).compose(phi)
    plain = classify_growth(phi, 30)
    twisted = classify_growth(conjugated, 30)
    assert (plain.kind, plain.degree_estimate) == (twisted.kind, twisted.degree_estimate)


def test_huge_fit_gap_refuses_to_classify():
    with pytest.raises(InconclusiveGrowthError):
        classify_growth(fibonacci(), 30, fit_gap=1.0)


def test_classification_speed_budget():
    start = time.monotonic()
    for phi in (shift_rank3(), fibonacci(), identity_automorphism(2)):
        classify_growth(phi, 30)
    assert time.monotonic() - start < 5.0


# -- cancellation bounds ----------------------------------------------------------

def test_cancellation_bound_golden_values():
    # recorded from the exhaustive search itself; the search is its own oracle
    assert cancellation_bound(shift_rank3(), 3).value == 1
    assert cancellation_bound(fibonacci(), 4).value == 1
    assert cancellation_bound(identity_automorphism(2), 4).value == 0


@given(letters_st, letters_st)
def test_cancellation_bound_bounds_observed_cancellation(xs, ys):
    phi = fibonacci()
    u, v = Word.from_letters(2, xs), Word.from_letters(2, ys)
    if u and v and u.letters[-1] != -v.letters[0]:
        observed = len(phi.apply(u)) + len(phi.apply(v)) - len(phi.apply(u * v))
        assert observed <= 2 * cancellation_bound(phi, 4).value


# -- boundary action --------------------------------------------------------------

def test_boundary_apply_examples():
    inner = inner_automorphism(2, Word.parse(2, "a"))
    assert boundary_apply(inner, Ray.parse(2, "1|b"), 3, 4) == Word.parse(2, "abb")

    alpha = shift_rank3()
    got = boundary_apply(alpha, Ray.constant(3, 3), 4, default_margin(alpha))
    assert got == Word.parse(3, "caca")

    ident = identity_automorphism(2)
    r = Ray.parse(2, "ab|a")
    assert boundary_apply(ident, r, 5, 0) == r.prefix(5)


def test_boundary_apply_margin_stability():
    phi = fibonacci()
    base = default_margin(phi)
    first = boundary_apply(phi, Ray.parse(2, "1|ab"), 6, base)
    for extra in (1, 3, 7):
        assert boundary_apply(phi, Ray.parse(2, "1|ab"), 6, base + extra) == first


def test_boundary_apply_guard_zone_failure():
    # the inverse substitution halves (ab)^k, so a zero margin starves depth 4
    shrinking = fibonacci().inverse()
    with pytest.raises(TruncationError):
        boundary_apply(shrinking, Ray.parse(2, "1|ab"), 4, 0)
