from collections import Counter
from fractions import Fraction
from math import comb

import pytest

from cross_sdp.errors import CapExceededError
from cross_sdp.hamming import BiasedCube
from cross_sdp.johnson import UniformGround
from cross_sdp.oracle import (
    KNESER,
    OTHER,
    STAR,
    Classification,
    ConflictGraph,
    classify,
    closure,
    count_up_sets,
    is_cross_intersecting,
    matches_single_family_theorem,
    matches_theorem,
    max_product_measure,
    max_product_uniform,
    max_single_family,
    max_single_family_measure,
    up_closure,
)


def random_family(rng, graph, density=0.3):
    family = 0
    for i in range(graph.size):
        if rng.random() < density:
            family |= 1 << i
    return family


def test_closure_galois_properties(rng):
    graph = ConflictGraph.uniform(7, 3, 2)
    for _ in range(50):
        family = random_family(rng, graph, 0.1)
        once = closure(family, graph)
        assert closure(closure(once, graph), graph) == once
        bigger = family | random_family(rng, graph, 0.1)
        assert closure(bigger, graph) & ~once == 0


def test_closure_of_empty_family_is_everything():
    graph = ConflictGraph.cube(3, 2)
    assert closure(0, graph) == graph.full


def test_family_conversion_round_trip():
    graph = ConflictGraph.uniform(6, 3, 2)
    family = frozenset(UniformGround(6, 3).masks[:5])
    assert graph.to_family(graph.from_family(family)) == family


@pytest.mark.parametrize('n, expected', [(0, 2), (1, 3), (2, 6), (3, 20), (4, 168)])
def test_up_set_counts(n, expected):
    assert count_up_sets(n) == expected


@pytest.mark.slow
def test_up_set_count_five():
    assert count_up_sets(5) == 7581


def test_up_closure_and_cross_intersection(rng):
    n, t = 5, 2
    cube = BiasedCube(n, Fraction(1, 4))
    graph = ConflictGraph.cube(n, t)
    for _ in range(30):
        seed = random_family(rng, graph, 0.1) or 1 << 0b11111
        partner = graph.closure(seed)
        family_f = {mask for mask in graph.to_family(seed) if rng.random() < 0.7}
        family_g = {mask for mask in graph.to_family(partner) if rng.random() < 0.5}
        assert is_cross_intersecting(family_f, family_g, t)
        upper_f, upper_g = up_closure(family_f, n), up_closure(family_g, n)
        assert is_cross_intersecting(upper_f, upper_g, t)
        assert cube.measure(upper_f) >= cube.measure(family_f)
        assert cube.measure(upper_g) >= cube.measure(family_g)


def test_up_closure_of_single_set():
    assert up_closure([0b011], 3) == frozenset({0b011, 0b111})


def test_classify_templates():
    masks = UniformGround(7, 3).masks
    star_family = frozenset(m for m in masks if m & 0b11 == 0b11)
    assert classify((star_family, star_family), 7, 2, k=3) == Classification(STAR, (1, 2))
    kneser_family = frozenset(m for m in UniformGround(6, 3).masks if bin(m & 0b1111).count('1') >= 3)
    assert classify((kneser_family, kneser_family), 6, 2, k=3) == Classification(KNESER, (1, 2, 3, 4))
    assert classify((star_family, kneser_family), 7, 2, k=3).kind == OTHER
    assert classify((frozenset(masks[:3]), frozenset(masks[:3])), 7, 2, k=3).kind == OTHER


def test_classify_on_the_cube():
    family = frozenset(m for m in range(16) if m & 0b0101 == 0b0101)
    assert classify((family, family), 4, 2) == Classification(STAR, (1, 3))


def test_uniform_oracle_at_threshold():
    report = max_product_uniform(6, 3, 2)
    assert report.optimum == 16
    assert report.pair_count == 30
    assert report.kind_counts() == {STAR: 15, KNESER: 15}
    assert all(f == g for f, g in report.optimal_pairs)
    assert matches_theorem(report) is True


def test_uniform_oracle_above_threshold():
    report = max_product_uniform(7, 3, 2)
    assert report.optimum == 25
    assert report.kind_counts() == {STAR: comb(7, 2)}
    assert matches_theorem(report) is True


@pytest.mark.slow
@pytest.mark.parametrize('n', [8, 9])
def test_uniform_oracle_larger(n):
    report = max_product_uniform(n, 3, 2)
    assert report.optimum == (n - 2) ** 2
    assert report.kind_counts() == {STAR: comb(n, 2)}
    assert matches_theorem(report) is True


@pytest.mark.slow
def test_uniform_oracle_intersecting():
    report = max_product_uniform(6, 3, 1)
    assert report.optimum == comb(5, 2) ** 2
    assert matches_theorem(report) is True



def test_uniform_oracle_below_threshold_has_no_theorem():
    report = max_product_uniform(5, 3, 2)
    assert report.optimum >= comb(3, 1) ** 2
    assert matches_theorem(report) is None


def test_uniform_oracle_cap():
    with pytest.raises(CapExceededError):
        max_product_uniform(10, 4, 2)
    with pytest.raises(CapExceededError):
        max_product_uniform(7, 3, 2, cap=20)


def test_cross_intersection_of_optima():
    report = max_product_uniform(6, 3, 2)
    for family_f, family_g in report.optimal_pairs:
        assert is_cross_intersecting(family_f, family_g, 2)


@pytest.mark.parametrize('p', [Fraction(1, 5), Fraction(1, 4), Fraction(3, 10)])
def test_measure_oracle_below_one_third(p):
    report = max_product_measure(4, p, 2)
    assert report.optimum == p ** 4
    assert report.kind_counts() == {STAR: 6}
    assert all(f == g for f, g in report.optimal_pairs)
    assert matches_theorem(report) is True


def test_measure_oracle_at_one_third_records_ties():
    p = Fraction(1, 3)
    report = max_product_measure(4, p, 2)
    assert report.optimum == p ** 4
    assert report.kind_counts()[STAR] == 6
    assert report.kind_counts().get(KNESER, 0) == 1
    assert matches_theorem(report) is True


@pytest.mark.slow
@pytest.mark.parametrize('p', [Fraction(1, 5), Fraction(1, 4), Fraction(3, 10), Fraction(1, 3)])
def test_measure_oracle_five(p):
    report = max_product_measure(5, p, 2)
    assert report.optimum == p ** 4
    assert matches_theorem(report) is True


def test_measure_oracle_intersecting():
    p = Fraction(1, 4)
    report = max_product_measure(3, p, 1)
    assert report.optimum == p ** 2
    assert matches_theorem(report) is True


def test_measure_oracle_cap():
    with pytest.raises(CapExceededError):
        max_product_measure(6, Fraction(1, 4), 2)


def test_single_family_at_threshold():
    size, families = max_single_family(6, 3, 2)
    assert size == 4
    kinds = {classify((family, family), 6, 2, k=3).kind for family in families}
    assert kinds == {STAR, KNESER}


def test_single_family_above_threshold():
    size, families = max_single_family(7, 3, 2)
    assert size == 5
    assert len(families) == comb(7, 2)
    assert all(classify((family, family), 7, 2, k=3).kind == STAR for family in families)


def test_single_family_intersecting():
    size, _ = max_single_family(6, 3, 1)
    assert size == comb(5, 2)


def test_single_family_theorem_in_the_uniform_setting():
    for n in (6, 7):
        size, families = max_single_family(n, 3, 2)
        assert matches_single_family_theorem(n, 2, size, families, k=3) is True
    size, families = max_single_family(7, 3, 1)
    assert matches_single_family_theorem(7, 1, size, families, k=3) is True
    assert matches_single_family_theorem(7, 3, size, families, k=3) is None
    assert matches_single_family_theorem(7, 2, 4, families, k=3) is False


@pytest.mark.parametrize('p', [Fraction(1, 5), Fraction(1, 4), Fraction(1, 3)])
@pytest.mark.parametrize('n', [4, pytest.param(5, marks=pytest.mark.slow)])
def test_single_family_on_the_cube(n, p):
    maximum, families = max_single_family_measure(n, p, 2)
    assert maximum == p ** 2
    kinds = Counter(classify((family, family), n, 2).kind for family in families)
    assert kinds[STAR] == comb(n, 2)
    if p < Fraction(1, 3):
        assert len(families) == comb(n, 2)
    else:
        # {A : |A∩T′| ≥ 3} with |T′| = 4 has measure 4p³q + p⁴ = p² at p = 1/3
        assert kinds[KNESER] == comb(n, 4)
        assert len(families) == comb(n, 2) + comb(n, 4)
    assert matches_single_family_theorem(n, 2, maximum, families, p=p) is True


def test_single_family_on_the_cube_is_intersecting():
    p = Fraction(1, 4)
    maximum, families = max_single_family_measure(4, p, 2)
    for family in families:
        assert is_cross_intersecting(family, family, 2)
        assert BiasedCube(4, p).measure(family) == maximum


def test_single_family_on_the_cube_above_one_third():
    p = Fraction(2, 5)
    maximum, families = max_single_family_measure(4, p, 2)
    assert maximum > p ** 2
    assert matches_single_family_theorem(4, 2, maximum, families, p=p) is None


def test_single_family_on_the_cube_cap():
    with pytest.raises(CapExceededError):
        max_single_family_measure(6, Fraction(1, 4), 2)
    with pytest.raises(CapExceededError):
        max_single_family_measure(4, Fraction(1, 4), 2, max_n=3)
