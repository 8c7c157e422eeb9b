"""Boundary action, hitting measures, convergence traces, first returns."""

import pytest
from hypothesis import given, settings, strategies as st

from walkbound import (
    ActingGroup,
    BudgetError,
    ConfigError,
    ConvergenceError,
    CylinderDistribution,
    ExtElement,
    ModuliSpec,
    Ray,
    StepMeasure,
    Word,
    act_on_ray,
    build_acting_group,
    empirical_hitting_measure,
    extend_to_ray,
    first_return_sampler,
    in_sublattice,
    load_fixture,
    sample_boundary_rays,
    stationarity_residual,
    track_convergence,
)
from oracles import markov_cylinder_table, tv_distance


def trivial_point_mass(word_text: str, rank: int = 2) -> StepMeasure:
    acting = ActingGroup.trivial(rank)
    atom = ExtElement(Word.parse(rank, word_text), acting.identity_part())
    return StepMeasure(acting, [atom], [1.0], check_generation=False)


# -- boundary action ---------------------------------------------------------------

def test_act_on_ray_examples(srw_measure, semidirect_measure):
    acting = srw_measure.acting
    a0 = ExtElement(Word.parse(2, "a"), acting.identity_part())
    assert act_on_ray(acting, a0, Ray.parse(2, "1|b"), 3) == Word.parse(2, "abb")
    ident = ExtElement(Word.identity(2), acting.identity_part())
    ray = Ray.parse(2, "ab|a")
    assert act_on_ray(acting, ident, ray, 4) == ray.prefix(4)

    z_acting = semidirect_measure.acting
    shift = ExtElement(Word.identity(2), (1,))
    assert act_on_ray(z_acting, shift, Ray.parse(2, "1|b"), 4) == Word.parse(2, "abab")


def test_extend_to_ray_stays_in_cylinder():
    prefix = Word.parse(2, "abb")
    ray = extend_to_ray(prefix)
    assert ray.prefix(3) == prefix
    assert ray.prefix(6) == Word.parse(2, "abbbbb")
    assert extend_to_ray(Word.identity(2)).prefix(2) == Word.parse(2, "aa")


# -- cylinder distributions --------------------------------------------------------

def test_distribution_from_counts_and_frequency():
    counts = {(1,): 3, (2,): 1}
    dist = CylinderDistribution.from_counts(2, 1, counts)
    assert dist.frequency(Word.parse(2, "a")) == pytest.approx(0.75)
    assert dist.frequency(Word.parse(2, "B")) == 0.0
    assert dist.max_frequency() == pytest.approx(0.75)


@settings(max_examples=30, deadline=None)
@given(
    st.dictionaries(
        st.sampled_from([w for w in markov_cylinder_table(2, 2)]),
        st.integers(min_value=1, max_value=50),
        min_size=1,
    )
)
def test_marginalize_aggregates_children(counts):
    dist = CylinderDistribution.from_counts(2, 2, counts)
    coarse = dist.marginalize(1)
    for letters, freq in coarse.table.items():
        children = sum(f for k, f in dist.table.items() if k[:1] == letters)
        assert freq == pytest.approx(children)


def test_tv_distance_properties():
    table = markov_cylinder_table(2, 1)
    uniform = CylinderDistribution(2, 1, {k: float(v) for k, v in table.items()}, 1)
    assert uniform.tv_distance(uniform) == 0.0
    point = CylinderDistribution(2, 1, {(1,): 1.0}, 1)
    assert uniform.tv_distance(point) == pytest.approx(0.75)
    with pytest.raises(ConfigError):
        uniform.tv_distance(CylinderDistribution(2, 2, {(1, 2): 1.0}, 1))


# -- empirical hitting measures ------------------------------------------------------

def test_srw_depth_one_is_nearly_uniform(srw_measure):
    est = empirical_hitting_measure(srw_measure, 21, 2000, 300, 1)
    assert est.unresolved_fraction == 0.0
    for freq in est.distribution.table.values():
        assert freq == pytest.approx(0.25, abs=0.05)


def test_srw_depth_two_matches_markov_oracle(srw_measure):
    est = empirical_hitting_measure(srw_measure, 22, 3000, 400, 2)
    exact = {k: float(v) for k, v in markov_cylinder_table(2, 2).items()}
    assert tv_distance(est.distribution.table, exact) < 0.05


def test_point_mass_hits_single_cylinder():
    est = empirical_hitting_measure(trivial_point_mass("a"), 0, 10, 50, 3)
    assert est.distribution.table == {(1, 1, 1): 1.0}


def test_nonatomicity_proxy_masses_decay(srw_measure):
    # Markov oracle: max depth-k mass is (1/4)(1/3)^(k-1)
    for depth in (1, 2, 3):
        est = empirical_hitting_measure(srw_measure, 23, 4000, 400, depth)
        bound = 0.25 * (1 / 3) ** (depth - 1)
        assert est.distribution.max_frequency() <= bound + 0.05


def test_unresolved_walk_hits_ceiling():
    cfg = load_fixture("semidirect-linear")
    acting = build_acting_group(cfg)
    stuck = StepMeasure(
        acting,
        [ExtElement(Word.identity(2), (1,)), ExtElement(Word.identity(2), (-1,))],
        [0.5, 0.5],
        check_generation=False,
    )
    with pytest.raises(ConvergenceError):
        empirical_hitting_measure(stuck, 1, 50, 30, 1)


def test_sample_boundary_rays_resolved_prefixes(srw_measure):
    rays = sample_boundary_rays(srw_measure, 3, 40, 2, 200)
    assert len(rays) == 40
    assert all(len(r.prefix(2)) == 2 for r in rays)


# -- stationarity ------------------------------------------------------------------

def test_point_mass_on_point_law_residual_is_zero():
    pm = trivial_point_mass("a")
    law = CylinderDistribution(2, 3, {(1, 1, 1): 1.0}, 1)
    assert stationarity_residual(pm, law, 7, 500) == 0.0


def test_point_mass_push_detects_nonstationarity():
    pm = trivial_point_mass("b")
    table = {k: float(v) for k, v in markov_cylinder_table(2, 1).items()}
    uniform = CylinderDistribution(2, 1, table, 1)
    assert stationarity_residual(pm, uniform, 7, 4000) >= 0.5


def test_compare_depth_validation(srw_measure):
    law = CylinderDistribution(2, 2, {(1, 2): 1.0}, 1)
    with pytest.raises(ConfigError):
        stationarity_residual(srw_measure, law, 0, 100, compare_depth=3)
    with pytest.raises(ConfigError):
        stationarity_residual(srw_measure, law, 0, 0)


def test_srw_stationarity_residual_small(srw_measure):
    est = empirical_hitting_measure(srw_measure, 29, 4000, 400, 4)
    residual = stationarity_residual(srw_measure, est.distribution, 29, 4000, compare_depth=2)
    assert residual < 0.06


# -- convergence tracking ------------------------------------------------------------

def test_deterministic_path_tracks_its_own_prefix():
    pm = trivial_point_mass("a")
    probes = (Ray.parse(2, "1|b"), Ray.parse(2, "B|a"))
    trace = track_convergence(pm, 0, 1, 10, 12, probes=probes)
    for j in range(10):
        assert trace.lengths[0, j] == j + 1


def test_identity_point_mass_never_converges():
    acting = ActingGroup.trivial(2)
    idle = StepMeasure(
        acting,
        [ExtElement(Word.identity(2), acting.identity_part())],
        [1.0],
        check_generation=False,
    )
    trace = track_convergence(idle, 0, 3, 15, 5)
    assert trace.lengths.max() == 0
    assert trace.median_final_length() == 0.0


def test_srw_median_final_length_scales_with_drift(srw_measure):
    trace = track_convergence(srw_measure, 19, 100, 1000, 600)
    assert trace.median_final_length() >= 0.4 * 1000
    assert trace.truncation_events == 0
    assert trace.resolved_fraction(1) == 1.0


# -- first returns -----------------------------------------------------------------

def test_returns_satisfy_parity_exactly(mixed_measure):
    even = ModuliSpec((2,))
    sample = first_return_sampler(mixed_measure, even, 13, 300)
    acting = mixed_measure.acting
    assert all(in_sublattice(acting, g, even) for g in sample.samples)
    assert all(t >= 1 for t in sample.return_times)


def test_pure_word_walk_returns_immediately(srw_measure):
    cfg = load_fixture("semidirect-linear")
    acting = build_acting_group(cfg)
    words_only = StepMeasure(
        acting,
        [ExtElement(a.w, (0,)) for a in srw_measure.atoms],
        list(srw_measure.weights),
        check_generation=False,
    )
    sample = first_return_sampler(words_only, ModuliSpec((2,)), 5, 200)
    assert set(sample.return_times) == {1}
    assert sample.failure_fraction == 0.0


def test_shift_dominated_walk_exhausts_budget(mixed_measure):
    with pytest.raises(BudgetError):
        first_return_sampler(mixed_measure, ModuliSpec((2,)), 5, 300, step_budget=1)
