import json
from fractions import Fraction

import pytest

from cross_sdp.cli import EXIT_FAILURE, EXIT_OK, EXIT_USAGE, main, parse_range, parse_rationals
from cross_sdp.errors import PreconditionError


def json_lines(capsys):
    out = capsys.readouterr().out
    return [json.loads(line) for line in out.splitlines() if line.strip()]


@pytest.mark.parametrize('text, expected', [
    ('3..6', [3, 4, 5, 6]),
    ('5', [5]),
    ('1..2,7', [1, 2, 7]),
    ('6..3', []),
    ('', []),
])
def test_parse_range(text, expected):
    assert parse_range(text) == expected


def test_parse_range_rejects_garbage():
    with pytest.raises(PreconditionError):
        parse_range('a..b')


def test_parse_rationals():
    assert parse_rationals('1/5, 1/3') == [Fraction(1, 5), Fraction(1, 3)]


def test_verify_uniform(capsys):
    assert main(['verify-uniform', '--n', '6', '--k', '3']) == EXIT_OK
    [document] = json_lines(capsys)
    assert document['setting'] == 'uniform'
    assert document['bound'] == '16/1'
    assert document['feasible'] and document['strict']
    assert len(document['blocks']) == 4


def test_verify_uniform_below_range_is_usage_error(capsys):
    assert main(['verify-uniform', '--n', '5', '--k', '3']) == EXIT_USAGE
    assert json_lines(capsys) == []


def test_verify_uniform_bad_eps1_is_failure(capsys):
    assert main(['verify-uniform', '--n', '7', '--k', '3', '--eps1', '10/1']) == EXIT_FAILURE
    [document] = json_lines(capsys)
    assert not document['feasible']


def test_verify_measure_at_one_third(capsys):
    assert main(['verify-measure', '--n', '5', '--p', '1/3']) == EXIT_OK
    [document] = json_lines(capsys)
    assert document['eps1'] == '0/1'
    assert document['bound'] == '1/81'
    assert document['feasible'] and not document['strict']
    assert 'slackness positivity not strict (eps1=0)' in document['notes']


def test_verify_measure_with_cube_identities(capsys):
    assert main(['verify-measure', '--n', '3', '--p', '1/4', '--fact31']) == EXIT_OK
    certificate, identities = json_lines(capsys)
    assert certificate['feasible']
    assert identities['passed']


@pytest.mark.parametrize('p', ['0.5', '1/2', '0/1'])
def test_verify_measure_rejects_bad_p(p, capsys):
    assert main(['verify-measure', '--n', '3', '--p', p]) == EXIT_USAGE


def test_missing_subcommand_is_usage_error():
    assert main([]) == EXIT_USAGE


def test_emit_cert_needs_k(capsys):
    assert main(['emit-cert', '--uniform', '--n', '6']) == EXIT_USAGE


def test_emit_cert_writes_file(tmp_path, capsys):
    target = tmp_path / 'cert.jsonl'
    assert main(['emit-cert', '--measure', '--n', '4', '--p', '1/5', '--out', str(target)]) == EXIT_OK
    assert capsys.readouterr().out == ''
    document = json.loads(target.read_text(encoding='utf-8'))
    assert document['p'] == '1/5'
    assert document['alpha'] == '1/25'


def test_scan_uniform(capsys):
    assert main(['scan', '--uniform', '--k', '3..4', '--n-extra', '0..3']) == EXIT_OK
    rows = json_lines(capsys)
    assert [(row['k'], row['n']) for row in rows] == [
        (3, 6), (3, 7), (3, 8), (3, 9), (4, 9), (4, 10), (4, 11), (4, 12),
    ]
    assert all(row['feasible'] for row in rows)


def test_scan_uniform_reports_out_of_range_rows(capsys):
    assert main(['scan', '--uniform', '--k', '3', '--n', '5..6']) == EXIT_USAGE
    low, high = json_lines(capsys)
    assert not low['feasible'] and 'error' in low
    assert low['error_kind'] == 'range'
    assert 'error_kind' not in high
    assert high['feasible']


def test_scan_measure_out_of_range_bias_is_usage_error(capsys):
    assert main(['scan', '--measure', '--p', '1/4,1/2', '--n', '3']) == EXIT_USAGE
    inside, outside = json_lines(capsys)
    assert inside['feasible']
    assert outside['error_kind'] == 'range'


def test_scan_measure(capsys):
    assert main(['scan', '--measure', '--p', '1/5,1/3', '--n', '1..5']) == EXIT_OK
    rows = json_lines(capsys)
    assert len(rows) == 10
    assert all(row['feasible'] for row in rows)
    assert {row['eps1'] for row in rows if row['p'] == '1/3'} == {'0/1'}


def test_empty_scan_prints_nothing(capsys):
    assert main(['scan', '--uniform', '--k', '3', '--n', '9..8']) == EXIT_OK
    assert json_lines(capsys) == []


def test_scan_with_worker_pool(capsys):
    assert main(['scan', '--measure', '--p', '1/4', '--n', '1..6', '--jobs', '2']) == EXIT_OK
    rows = json_lines(capsys)
    assert [row['n'] for row in rows] == [1, 2, 3, 4, 5, 6]


def test_scan_rejects_zero_jobs(capsys):
    assert main(['scan', '--measure', '--p', '1/4', '--n', '1..2', '--jobs', '0']) == EXIT_USAGE


def test_oracle_uniform(capsys):
    assert main(['oracle', '--uniform', '--n', '6', '--k', '3']) == EXIT_OK
    [document] = json_lines(capsys)
    assert document['optimum'] == '16/1'
    assert document['pair_count'] == 30
    assert document['matches_theorem'] is True
    kinds = {entry['type']: 0 for entry in document['classes']}
    for entry in document['classes']:
        kinds[entry['type']] += entry['count']
    assert kinds == {'star_pair': 15, 'kneser_type': 15}
    assert all(min(entry['witness_set']) >= 1 for entry in document['classes'])


def test_oracle_single_family(capsys):
    assert main(['oracle', '--uniform', '--n', '6', '--k', '3', '--single']) == EXIT_OK
    [document] = json_lines(capsys)
    assert document['maximum'] == '4/1'
    assert document['matches_theorem'] is True
    kinds = {entry['type'] for entry in document['classes']}
    assert kinds == {'star_pair', 'kneser_type'}


@pytest.mark.parametrize('p, families', [('1/5', 6), ('1/3', 7)])
def test_oracle_measure_single_family(p, families, capsys):
    assert main(['oracle', '--measure', '--n', '4', '--p', p, '--single']) == EXIT_OK
    [document] = json_lines(capsys)
    assert document['setting'] == 'measure'
    assert document['p'] == p
    assert document['family_count'] == families
    assert document['matches_theorem'] is True


def test_oracle_measure(capsys):
    assert main(['oracle', '--measure', '--n', '4', '--p', '1/5']) == EXIT_OK
    [document] = json_lines(capsys)
    assert document['optimum'] == '1/625'
    assert document['pair_count'] == 6
    assert document['matches_theorem'] is True


def test_oracle_cap_is_usage_error(capsys):
    assert main(['oracle', '--uniform', '--n', '10', '--k', '4']) == EXIT_USAGE
    assert main(['oracle', '--uniform', '--n', '6', '--k', '3', '--oracle-cap', '10']) == EXIT_USAGE
    assert main(['oracle', '--measure', '--n', '4', '--p', '1/4', '--oracle-max-n', '3']) == EXIT_USAGE


def test_materialization_cap_does_not_limit_the_oracle(capsys):
    assert main(['oracle', '--uniform', '--n', '6', '--k', '3', '--cap', '10']) == EXIT_OK


def test_crosscheck_uniform(capsys):
    assert main(['crosscheck', '--uniform', '--n', '6', '--k', '3']) == EXIT_OK
    [document] = json_lines(capsys)
    assert document['passed'] and document['psd']
    assert document['trace_identity'] and document['z_support']
    assert document['optimum'] == '16/1'
    assert len(document['slackness']) == 30
    assert all(entry['complementary'] for entry in document['slackness'])


def test_crosscheck_measure(capsys):
    assert main(['crosscheck', '--measure', '--n', '4', '--p', '1/4']) == EXIT_OK
    [document] = json_lines(capsys)
    assert document['passed']
    assert document['optimum'] == '1/256'
    assert len(document['slackness']) == 6


def test_crosscheck_skips_oracle_above_limit(fresh_config, capsys):
    fresh_config(CROSS_SDP_ORACLE_CAP=10)
    assert main(['crosscheck', '--uniform', '--n', '6', '--k', '3']) == EXIT_OK
    [document] = json_lines(capsys)
    assert 'optimum' not in document
    assert 'oracle skipped: instance exceeds the exhaustive search limit' in document['notes']


def test_crosscheck_oracle_limit_from_flag(capsys):
    assert main(['crosscheck', '--measure', '--n', '4', '--p', '1/4', '--oracle-max-n', '3']) == EXIT_OK
    [document] = json_lines(capsys)
    assert 'optimum' not in document
    assert document['passed']


def test_crosscheck_with_bad_eps1_fails(capsys):
    assert main(['crosscheck', '--uniform', '--n', '6', '--k', '3', '--eps1', '10']) == EXIT_FAILURE
    [document] = json_lines(capsys)
    assert not document['passed'] and not document['psd']
    assert 'witness_value' in document


@pytest.mark.slow
def test_crosscheck_measure_at_one_third(capsys):
    assert main(['crosscheck', '--measure', '--n', '5', '--p', '1/3']) == EXIT_OK
    [document] = json_lines(capsys)
    assert document['passed']
    assert 'slackness positivity not strict (eps1=0)' in document['notes']
