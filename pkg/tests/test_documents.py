import json
from fractions import Fraction

from cross_sdp.cert_measure import build_certificate_measure
from cross_sdp.cert_uniform import build_certificate_uniform, eps1_window_uniform
from cross_sdp.documents import certificate_document, emit, scan_row, single_family_document
from cross_sdp.oracle import max_single_family

CERTIFICATE_KEYS = {
    'setting', 'n', 'alpha', 'bound', 'eps0', 'eps1', 'gamma0', 'gamma1',
    'feasible', 'strict', 'min_margin', 'eps1_window', 'blocks', 'notes',
}
WINDOW_KEYS = {'upper', 'attained_at_upper', 'binding', 'lower', 'lower_inclusive'}
BLOCK_KEYS = {'j', 'u', 'v', 'margin_plus', 'margin_minus', 'ok'}


def emitted(document):
    return json.loads(emit(document))


def test_uniform_certificate_keys():
    document = emitted(certificate_document(build_certificate_uniform(7, 3)))
    assert set(document) == CERTIFICATE_KEYS | {'k'}
    assert set(document['eps1_window']) == WINDOW_KEYS
    assert all(set(block) == BLOCK_KEYS for block in document['blocks'])
    assert [block['j'] for block in document['blocks']] == [0, 1, 2, 3]


def test_uniform_window_carries_binding_labels():
    window = eps1_window_uniform(7, 3)
    document = emitted(certificate_document(build_certificate_uniform(7, 3)))
    assert document['eps1_window']['upper'] == f"{window.upper.numerator}/{window.upper.denominator}"
    assert document['eps1_window']['binding']
    assert all(label.endswith(('+', '-')) or label == 'eps0' for label in document['eps1_window']['binding'])


def test_measure_certificate_keys():
    document = emitted(certificate_document(build_certificate_measure(Fraction(1, 4), 4)))
    assert set(document) == CERTIFICATE_KEYS | {'p'}
    assert document['p'] == '1/4'
    assert set(document['eps1_window']) == WINDOW_KEYS
    assert len(document['blocks']) == 5


def test_one_third_certificate_keeps_notes():
    document = emitted(certificate_document(build_certificate_measure(Fraction(1, 3), 5)))
    assert document['eps1_window']['upper'] == '0/1'
    assert 'slackness positivity not strict (eps1=0)' in document['notes']


def test_scan_row_drops_unset_fields():
    row = emitted(scan_row(build_certificate_uniform(6, 3)))
    assert 'error' not in row and 'error_kind' not in row and 'p' not in row
    assert row['feasible']


def test_single_family_document():
    maximum, families = max_single_family(6, 3, 2)
    document = emitted(single_family_document(6, 2, maximum, families, k=3, matches=True))
    assert set(document) == {'setting', 'n', 'k', 't', 'maximum', 'family_count', 'classes', 'matches_theorem'}
    assert document['maximum'] == '4/1'
    assert sum(entry['count'] for entry in document['classes']) == document['family_count']
