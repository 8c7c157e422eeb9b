"""Extension-group arithmetic across all three acting kinds."""

import pytest
from hypothesis import given, settings, strategies as st

from walkbound import (
    ConfigError,
    ExtElement,
    ModuliSpec,
    Word,
    ball,
    build_acting_group,
    element_key,
    ext_identity,
    ext_inverse,
    ext_multiply,
    gauge_length,
    in_sublattice,
    load_fixture,
    standard_generators,
)


def acting_for(name: str):
    return build_acting_group(load_fixture(name))


ACTING_NAMES = ["srw-f2", "semidirect-linear", "lattice-rank2", "free-acting"]


def elements_strategy(acting):
    gens = standard_generators(acting)

    def fold(indices):
        g = ext_identity(acting)
        for i in indices:
            g = ext_multiply(acting, g, gens[i])
        return g

    return st.lists(
        st.integers(min_value=0, max_value=len(gens) - 1), max_size=8
    ).map(fold)


# -- pinned small products ---------------------------------------------------------

def test_semidirect_twist_product():
    acting = acting_for("semidirect-linear")
    a1 = ExtElement(Word.parse(2, "a"), (1,))
    b0 = ExtElement(Word.parse(2, "b"), (0,))
    got = ext_multiply(acting, a1, b0)
    assert got == ExtElement(Word.parse(2, "aab"), (1,))


def test_shift_moves_cancel():
    acting = acting_for("semidirect-linear")
    up = ExtElement(Word.identity(2), (1,))
    down = ExtElement(Word.identity(2), (-1,))
    assert ext_multiply(acting, up, down) == ext_identity(acting)


def test_zero_shift_embeds_free_group():
    acting = acting_for("semidirect-linear")
    w = ExtElement(Word.parse(2, "ab"), (0,))
    v = ExtElement(Word.parse(2, "Ba"), (0,))
    assert ext_multiply(acting, w, v) == ExtElement(Word.parse(2, "aa"), (0,))


def test_inverse_examples():
    acting = acting_for("semidirect-linear")
    b1 = ExtElement(Word.parse(2, "b"), (1,))
    assert ext_inverse(acting, b1) == ExtElement(Word.parse(2, "Ba"), (-1,))
    w0 = ExtElement(Word.parse(2, "ab"), (0,))
    assert ext_inverse(acting, w0) == ExtElement(Word.parse(2, "BA"), (0,))
    assert ext_inverse(acting, ext_identity(acting)) == ext_identity(acting)


def test_gauge_length_examples():
    z_acting = acting_for("semidirect-linear")
    assert gauge_length(ExtElement(Word.parse(2, "ab"), (2,))) == 4
    assert gauge_length(ext_identity(z_acting)) == 0
    z2 = acting_for("lattice-rank2")
    assert gauge_length(ExtElement(Word.identity(4), (1, -2))) == 3
    free = acting_for("free-acting")
    assert gauge_length(ExtElement(Word.identity(2), Word.parse(2, "ab"))) == 2


def test_sublattice_membership():
    z_acting = acting_for("semidirect-linear")
    even = ModuliSpec((2,))
    assert in_sublattice(z_acting, ExtElement(Word.parse(2, "a"), (2,)), even)
    assert not in_sublattice(z_acting, ExtElement(Word.parse(2, "a"), (1,)), even)
    assert in_sublattice(z_acting, ext_identity(z_acting), even)
    z2 = acting_for("lattice-rank2")
    spec = ModuliSpec((2, 3))
    assert in_sublattice(z2, ExtElement(Word.identity(4), (2, 3)), spec)
    assert not in_sublattice(z2, ExtElement(Word.identity(4), (1, 3)), spec)


def test_moduli_spec_validation():
    with pytest.raises(ConfigError):
        ModuliSpec((0,))
    z_acting = acting_for("semidirect-linear")
    with pytest.raises(ConfigError):
        in_sublattice(z_acting, ext_identity(z_acting), ModuliSpec((2, 2)))


# -- algebraic laws, all acting kinds ----------------------------------------------

@pytest.mark.parametrize("name", ACTING_NAMES)
@settings(max_examples=40, deadline=None)
@given(data=st.data())
def test_multiplication_associative(name, data):
    acting = acting_for(name)
    elems = elements_strategy(acting)
    g, h, k = data.draw(elems), data.draw(elems), data.draw(elems)
    left = ext_multiply(acting, ext_multiply(acting, g, h), k)
    right = ext_multiply(acting, g, ext_multiply(acting, h, k))
    assert left == right


@pytest.mark.parametrize("name", ACTING_NAMES)
@settings(max_examples=40, deadline=None)
@given(data=st.data())
def test_inverse_law(name, data):
    acting = acting_for(name)
    g = data.draw(elements_strategy(acting))
    assert ext_multiply(acting, g, ext_inverse(acting, g)) == ext_identity(acting)
    assert ext_multiply(acting, ext_inverse(acting, g), g) == ext_identity(acting)


@pytest.mark.parametrize("name", ["semidirect-linear", "lattice-rank2", "free-acting"])
@settings(max_examples=40, deadline=None)
@given(data=st.data())
def test_acting_projection_is_homomorphism(name, data):
    acting = acting_for(name)
    elems = elements_strategy(acting)
    g, h = data.draw(elems), data.draw(elems)
    product = ext_multiply(acting, g, h)
    assert product.p == acting.part_multiply(g.p, h.p)


@pytest.mark.parametrize("name", ACTING_NAMES)
@settings(max_examples=40, deadline=None)
@given(data=st.data())
def test_element_key_separates(name, data):
    acting = acting_for(name)
    elems = elements_strategy(acting)
    g, h = data.draw(elems), data.draw(elems)
    assert (element_key(acting, g) == element_key(acting, h)) == (g == h)


# -- generator enumeration ---------------------------------------------------------

def test_standard_generator_counts():
    assert len(standard_generators(acting_for("srw-f2"))) == 4
    assert len(standard_generators(acting_for("semidirect-linear"))) == 6
    assert len(standard_generators(acting_for("lattice-rank2"))) == 12
    assert len(standard_generators(acting_for("free-acting"))) == 10


def test_ball_radius_one_is_generators_plus_identity():
    for name in ACTING_NAMES:
        acting = acting_for(name)
        b1 = ball(acting, 1)
        assert len(b1) == len(standard_generators(acting)) + 1
        assert ext_identity(acting) in b1


def test_ball_radius_two_srw():
    acting = acting_for("srw-f2")
    # 1 + 4 + 4*3 reduced two-letter words
    assert len(ball(acting, 2)) == 17


def test_part_text_round_trip():
    for name, text in [
        ("semidirect-linear", "3"),
        ("lattice-rank2", "1,-2"),
        ("free-acting", "ab"),
    ]:
        acting = acting_for(name)
        assert acting.format_part(acting.parse_part(text)) == text
