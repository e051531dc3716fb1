from fractions import Fraction

import numpy as np
import pytest

from cross_sdp.cert_measure import (
    assemble_S_measure,
    block_similar_form,
    build_certificate_measure,
    build_params_measure,
    eps1_window_measure,
    measure_multiplicities,
    measure_parity_quantities,
    odd_gap_reference,
    one_third_margins,
    rewritten_blocks_measure,
    slackness_check_measure,
    z_support_matches_measure,
)
from cross_sdp.certificate import block_trace_identity
from cross_sdp.errors import CapExceededError, PreconditionError
from cross_sdp.exactlin import psd_check_exact
from cross_sdp.oracle import max_product_measure

THIRD = Fraction(1, 3)
SCAN_P = [Fraction(1, 10), Fraction(1, 5), Fraction(1, 4), Fraction(3, 10), Fraction(32, 100), THIRD]


def star(n, pair=0b11):
    return [mask for mask in range(1 << n) if mask & pair == pair]


@pytest.mark.parametrize('p', [Fraction(0), Fraction(1, 2), Fraction(2, 5)])
def test_bias_range(p):
    with pytest.raises(PreconditionError):
        build_certificate_measure(p, 4)


def test_eps1_range():
    with pytest.raises(PreconditionError):
        build_params_measure(Fraction(1, 4), 3, Fraction(1, 32))
    with pytest.raises(PreconditionError):
        build_params_measure(Fraction(1, 4), 3, Fraction(-1, 100))


def test_scan_of_certificates():
    for p in SCAN_P:
        for n in range(1, 41):
            cert = build_certificate_measure(p, n)
            assert cert.feasible, (p, n)
            assert cert.alpha == p * p
            assert all(block.u >= abs(block.v) for block in cert.blocks)


@pytest.mark.slow
def test_wide_scan_of_certificates():
    for p in SCAN_P:
        for n in range(1, 201):
            assert build_certificate_measure(p, n).feasible, (p, n)


@pytest.mark.parametrize('n', [3, 4, 10, 50])
def test_window_collapses_at_one_third(n):
    window = eps1_window_measure(THIRD, n)
    assert window.is_point
    assert window.lower == window.upper == 0


@pytest.mark.parametrize('p', SCAN_P[:-1])
def test_window_open_below_one_third(p):
    window = eps1_window_measure(p, 6)
    assert window.lower == 0 and window.lower_inclusive
    assert window.upper > 0
    cert = build_certificate_measure(p, 6)
    assert cert.eps1 > 0 and cert.strict
    assert not cert.notes


def test_one_third_certificate_is_not_strict():
    cert = build_certificate_measure(THIRD, 5)
    assert cert.eps1 == 0
    assert cert.feasible and not cert.strict
    assert cert.notes == ['slackness positivity not strict (eps1=0)']


def test_one_third_rejects_positive_eps1():
    assert not build_certificate_measure(THIRD, 5, eps1=Fraction(1, 1000)).feasible


@pytest.mark.parametrize('p', [Fraction(1, 5), Fraction(1, 4), Fraction(3, 10), THIRD])
def test_rewritten_blocks_agree(p):
    for n in range(1, 12):
        cert = build_certificate_measure(p, n)
        assert rewritten_blocks_measure(p, n, cert.eps1) == cert.blocks[1:]


@pytest.mark.parametrize('p', [Fraction(1, 5), Fraction(1, 4), THIRD])
def test_parity_quantities(p):
    n = 9
    cert = build_certificate_measure(p, n)
    for block in cert.blocks[2:]:
        quantities = measure_parity_quantities(p, n, block.j, cert.eps1)
        if block.j % 2 == 0:
            assert quantities.margin == block.margin_plus
        else:
            assert quantities.margin == block.margin_minus


@pytest.mark.parametrize('p', [Fraction(1, 10), Fraction(1, 4), THIRD])
def test_odd_gap_reference(p):
    assert odd_gap_reference(p) == p * p - measure_parity_quantities(p, 3, 3).f


def test_one_third_closed_forms():
    n = 8
    cert = build_certificate_measure(THIRD, n)
    for block in cert.blocks[2:]:
        assert one_third_margins(n, block.j) == (block.margin_plus, block.margin_minus)
    eps1 = Fraction(1, 1000)
    blocks = rewritten_blocks_measure(THIRD, n, eps1)
    assert one_third_margins(n, 3, eps1)[1] == blocks[2].margin_minus < 0


@pytest.mark.parametrize('p', [Fraction(1, 4), THIRD])
@pytest.mark.parametrize('n', [2, 3, 4])
def test_assembled_matrix_confirms_blocks(p, n):
    cert = build_certificate_measure(p, n)
    s, z = assemble_S_measure(p, n, cert)
    assert psd_check_exact(s).is_psd
    assert block_trace_identity(block_similar_form(cert, s), cert.blocks, measure_multiplicities(n))
    assert z_support_matches_measure(cert, z)
    assert np.linalg.eigvalsh(s.to_float_array()).min() > -1e-9


@pytest.mark.slow
@pytest.mark.parametrize('p', [Fraction(1, 5), Fraction(1, 4), THIRD])
@pytest.mark.parametrize('n', [5, 6])
def test_assembled_matrix_confirms_blocks_larger_cubes(p, n):
    cert = build_certificate_measure(p, n)
    s, z = assemble_S_measure(p, n, cert)
    assert psd_check_exact(s).is_psd
    assert block_trace_identity(block_similar_form(cert, s), cert.blocks, measure_multiplicities(n))
    assert z_support_matches_measure(cert, z)


@pytest.mark.parametrize('n', [3, 5])
def test_positive_eps1_at_one_third_breaks_psd(n):
    cert = build_certificate_measure(THIRD, n, eps1=Fraction(1, 1000))
    s, _ = assemble_S_measure(THIRD, n, cert)
    verdict = psd_check_exact(s)
    assert not verdict.is_psd
    assert s.quadratic_form(verdict.witness) == verdict.witness_value < 0


def test_assembly_rejects_other_parameters():
    cert = build_certificate_measure(Fraction(1, 4), 3)
    with pytest.raises(PreconditionError):
        assemble_S_measure(Fraction(1, 5), 3, cert)


def test_assembly_cap_reaches_cube_matrices(fresh_config):
    fresh_config(CROSS_SDP_CUBE_CAP=4, CROSS_SDP_ASSEMBLY_CAP=4)
    cert = build_certificate_measure(Fraction(1, 4), 3)
    with pytest.raises(CapExceededError):
        assemble_S_measure(Fraction(1, 4), 3, cert)
    s, _ = assemble_S_measure(Fraction(1, 4), 3, cert, cap=16)
    assert s.shape == (16, 16)


@pytest.mark.parametrize('p', [Fraction(1, 5), Fraction(1, 4), THIRD])
def test_star_pair_is_complementary(p):
    n = 3
    cert = build_certificate_measure(p, n)
    family = star(n)
    report = slackness_check_measure(cert, family, family)
    assert report.size_f == p * p
    assert report.attains_bound
    assert report.complementary
    assert report.chain_holds


def test_unequal_measures_keep_normalisation():
    p, n = Fraction(1, 4), 4
    cert = build_certificate_measure(p, n)
    family_f = [mask for mask in star(n) if mask != 0b0011]
    report = slackness_check_measure(cert, family_f, star(n))
    assert report.size_f < report.size_g
    assert report.weak_duality_holds and not report.attains_bound
    assert report.chain_holds
    assert (report.s_dot_x + report.z_dot_x).sign() > 0


@pytest.mark.parametrize('p', [Fraction(1, 5), Fraction(3, 10)])
@pytest.mark.parametrize('n', [4, pytest.param(5, marks=pytest.mark.slow)])
def test_every_oracle_optimum_is_complementary(p, n):
    cert = build_certificate_measure(p, n)
    optima = max_product_measure(n, p, 2)
    assert optima.optimum == cert.alpha ** 2
    assert optima.pair_count == n * (n - 1) // 2
    for family_f, family_g in optima.optimal_pairs:
        report = slackness_check_measure(cert, family_f, family_g)
        assert report.attains_bound
        assert report.s_dot_x.is_zero() and report.z_dot_x.is_zero()
        assert report.chain_holds
