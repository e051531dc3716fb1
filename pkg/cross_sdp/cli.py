"""
Batch command line: certificate construction and verification, scans, oracle runs, crosschecks

Exit codes: 0 success, 1 mathematical failure, 2 usage or range error. JSON lines go to
stdout (or --out); logging goes to stderr.
"""

import argparse
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from contextlib import contextmanager
from fractions import Fraction
from math import comb
from typing import Iterator, List, Optional, Tuple

from pydantic import BaseModel, ValidationError, field_validator

from .cert_measure import (
    assemble_S_measure,
    block_similar_form,
    build_certificate_measure,
    measure_multiplicities,
    slackness_check_measure,
    z_support_matches_measure,
)
from .cert_uniform import (
    assemble_S_uniform,
    build_certificate_uniform,
    slackness_check_uniform,
    uniform_multiplicities,
    z_support_matches_uniform,
)
from .certificate import DualCertificate, block_trace_identity
from .config import get_config
from .documents import (
    CrosscheckDocument,
    ScanRow,
    certificate_document,
    emit,
    fact31_document,
    oracle_document,
    scan_row,
    single_family_document,
    slackness_document,
)
from .errors import CrossSdpError, PreconditionError, RationalFormatError
from .exactlin import psd_check_exact
from .exactnum import format_rational, parse_rational
from .hamming import verify_fact31
from .oracle import (
    ExtremalReport,
    matches_theorem,
    max_product_measure,
    max_product_uniform,
    matches_single_family_theorem,
    max_single_family,
    max_single_family_measure,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2


def parse_range(text: Optional[str]) -> List[int]:
    """
    "3..10", "5" or a comma list of either; "a..b" is inclusive and empty when b < a
    """
    if text is None or not text.strip():
        return []
    values = []
    for part in text.split(','):
        part = part.strip()
        try:
            if '..' in part:
                low, high = part.split('..', 1)
                values.extend(range(int(low), int(high) + 1))
            else:
                values.append(int(part))
        except ValueError:
            raise PreconditionError(f"Not an integer range: {part!r}")
    return values


def parse_rationals(text: Optional[str]) -> List[Fraction]:
    if text is None or not text.strip():
        return []
    return [parse_rational(part.strip()) for part in text.split(',')]


class RunConfig(BaseModel):
    """Parsed command line, validated before dispatch."""
    command: str
    setting: Optional[str] = None
    n: Optional[int] = None
    k: Optional[int] = None
    t: int = 2
    p: Optional[str] = None
    eps1: Optional[str] = None
    k_range: Optional[str] = None
    n_range: Optional[str] = None
    n_extra: Optional[str] = None
    p_list: Optional[str] = None
    single: bool = False
    fact31: bool = False
    cap: Optional[int] = None
    oracle_cap: Optional[int] = None
    oracle_max_n: Optional[int] = None
    out: Optional[str] = None
    jobs: int = 1

    @field_validator('p', 'eps1')
    @classmethod
    def _rational_string(cls, value):
        if value is not None:
            parse_rational(value)
        return value

    @field_validator('jobs')
    @classmethod
    def _positive_jobs(cls, value):
        if value < 1:
            raise ValueError('jobs must be ≥ 1')
        return value

    @property
    def p_value(self) -> Optional[Fraction]:
        return None if self.p is None else parse_rational(self.p)

    @property
    def eps1_value(self) -> Optional[Fraction]:
        return None if self.eps1 is None else parse_rational(self.eps1)

    def require(self, *names: str):
        missing = [name for name in names if getattr(self, name) is None]
        if missing:
            raise PreconditionError(f"{self.command} needs --{', --'.join(name.replace('_', '-') for name in missing)}")


@contextmanager
def _sink(path: Optional[str]) -> Iterator:
    if path is None:
        yield sys.stdout
        return
    with open(path, 'w', encoding='utf-8') as handle:
        yield handle


def _write(handle, document: BaseModel):
    handle.write(emit(document) + '\n')
    handle.flush()


def _certificate(run: RunConfig) -> DualCertificate:
    if run.setting == 'uniform':
        run.require('n', 'k')
        return build_certificate_uniform(run.n, run.k, run.eps1_value)
    run.require('n', 'p')
    return build_certificate_measure(run.p_value, run.n, run.eps1_value)


def _verdict(cert: DualCertificate) -> int:
    if not cert.feasible:
        logger.error(f"Certificate infeasible: {[block.j for block in cert.violated_blocks]}")
        return EXIT_FAILURE
    return EXIT_OK


def cmd_verify_uniform(run: RunConfig) -> int:
    cert = _certificate(run)
    with _sink(run.out) as handle:
        _write(handle, certificate_document(cert))
    return _verdict(cert)


def cmd_verify_measure(run: RunConfig) -> int:
    """Certificate, then optionally the cube matrix identities it relies on."""
    cert = _certificate(run)
    with _sink(run.out) as handle:
        _write(handle, certificate_document(cert))
        if run.fact31:
            report = verify_fact31(cert.p, cert.n, cap=run.cap)
            _write(handle, fact31_document(report))
            if not report.passed:
                return EXIT_FAILURE
    return _verdict(cert)


def cmd_emit_cert(run: RunConfig) -> int:
    cert = _certificate(run)
    with _sink(run.out) as handle:
        _write(handle, certificate_document(cert))
    return EXIT_OK


def _error_kind(error: CrossSdpError) -> str:
    return 'range' if isinstance(error, PreconditionError) else 'failure'


def _scan_uniform_row(params: Tuple[int, int]) -> ScanRow:
    k, n = params
    try:
        return scan_row(build_certificate_uniform(n, k))
    except CrossSdpError as e:
        return ScanRow(setting='uniform', n=n, k=k, feasible=False, error=str(e), error_kind=_error_kind(e))


def _scan_measure_row(params: Tuple[Fraction, int]) -> ScanRow:
    p, n = params
    try:
        return scan_row(build_certificate_measure(p, n))
    except CrossSdpError as e:
        return ScanRow(
            setting='measure', n=n, p=format_rational(p), feasible=False, error=str(e), error_kind=_error_kind(e)
        )


def _scan_tasks(run: RunConfig):
    if run.setting == 'uniform':
        extras = parse_range(run.n_extra) if run.n_extra is not None else None
        tasks = []
        for k in parse_range(run.k_range):
            ns = [3 * (k - 1) + extra for extra in extras] if extras is not None else parse_range(run.n_range)
            tasks.extend((k, n) for n in ns)
        return _scan_uniform_row, tasks
    return _scan_measure_row, [(p, n) for p in parse_rationals(run.p_list) for n in parse_range(run.n_range)]


def cmd_scan(run: RunConfig) -> int:
    worker, tasks = _scan_tasks(run)
    logger.info(f"Scanning {len(tasks)} {run.setting} instances with {run.jobs} job(s)")
    failed = out_of_range = False

    def record(handle, row: ScanRow):
        nonlocal failed, out_of_range
        out_of_range |= row.error_kind == 'range'
        failed |= not row.feasible and row.error_kind != 'range'
        _write(handle, row)

    with _sink(run.out) as handle:
        if run.jobs > 1 and len(tasks) > 1:
            with ProcessPoolExecutor(max_workers=run.jobs) as pool:
                for row in pool.map(worker, tasks, chunksize=max(1, len(tasks) // (4 * run.jobs))):
                    record(handle, row)
        else:
            for row in map(worker, tasks):
                record(handle, row)
    # a mathematical failure outranks a range error
    if failed:
        return EXIT_FAILURE
    return EXIT_USAGE if out_of_range else EXIT_OK


def _oracle_report(run: RunConfig, t: int) -> ExtremalReport:
    if run.setting == 'uniform':
        run.require('n', 'k')
        return max_product_uniform(run.n, run.k, t, cap=run.oracle_cap)
    run.require('n', 'p')
    return max_product_measure(run.n, run.p_value, t, max_n=run.oracle_max_n)


def _single_family(run: RunConfig) -> int:
    if run.setting == 'uniform':
        run.require('n', 'k')
        maximum, families = max_single_family(run.n, run.k, run.t, cap=run.oracle_cap)
        k, p = run.k, None
    else:
        run.require('n', 'p')
        maximum, families = max_single_family_measure(run.n, run.p_value, run.t, max_n=run.oracle_max_n)
        k, p = None, run.p_value
    matches = matches_single_family_theorem(run.n, run.t, maximum, families, k=k, p=p)
    with _sink(run.out) as handle:
        _write(handle, single_family_document(run.n, run.t, maximum, families, k=k, p=p, matches=matches))
    if matches is False:
        logger.warning(f"Single-family maximum {maximum} disagrees with the extremal theorem")
        return EXIT_FAILURE
    return EXIT_OK


def cmd_oracle(run: RunConfig) -> int:
    if run.single:
        return _single_family(run)
    report = _oracle_report(run, run.t)
    matches = matches_theorem(report)
    with _sink(run.out) as handle:
        _write(handle, oracle_document(report, matches))
    if matches is False:
        logger.warning(f"Oracle optimum {report.optimum} disagrees with the extremal theorem")
        return EXIT_FAILURE
    return EXIT_OK


def _crosscheck(run: RunConfig) -> CrosscheckDocument:
    cfg = get_config()
    cert = _certificate(run)
    notes = list(cert.notes)
    if run.setting == 'uniform':
        s_matrix, z_matrix = assemble_S_uniform(cert.n, cert.k, cert, cap=run.cap)
        trace_ok = block_trace_identity(s_matrix, cert.blocks, uniform_multiplicities(cert.n, cert.k))
        z_ok = z_support_matches_uniform(cert.n, cert.k, z_matrix)
        limit = run.oracle_cap if run.oracle_cap is not None else cfg.ORACLE_CAP
        searchable = comb(cert.n, cert.k) <= limit
        slackness = slackness_check_uniform
    else:
        s_matrix, z_matrix = assemble_S_measure(cert.p, cert.n, cert, cap=run.cap)
        trace_ok = block_trace_identity(block_similar_form(cert, s_matrix), cert.blocks, measure_multiplicities(cert.n))
        z_ok = z_support_matches_measure(cert, z_matrix)
        limit = run.oracle_max_n if run.oracle_max_n is not None else cfg.ORACLE_CUBE_N
        searchable = cert.n <= limit
        slackness = slackness_check_measure

    verdict = psd_check_exact(s_matrix)
    passed = cert.feasible and verdict.is_psd and trace_ok and z_ok

    optimum = None
    reports = []
    if searchable:
        oracle = _oracle_report(run, t=2)
        optimum = oracle.optimum
        if optimum != cert.alpha ** 2:
            logger.error(f"Oracle optimum {optimum} differs from the certified bound {cert.alpha ** 2}")
            passed = False
        for family_f, family_g in oracle.optimal_pairs:
            report = slackness(cert, family_f, family_g, cap=run.cap)
            reports.append(report)
            passed &= report.complementary and report.chain_holds
    else:
        notes.append('oracle skipped: instance exceeds the exhaustive search limit')

    return CrosscheckDocument(
        setting=cert.setting,
        n=cert.n,
        k=cert.k,
        p=None if cert.p is None else format_rational(cert.p),
        psd=verdict.is_psd,
        witness_value=None if verdict.witness_value is None else format_rational(verdict.witness_value),
        trace_identity=trace_ok,
        z_support=z_ok,
        optimum=None if optimum is None else format_rational(optimum),
        slackness=[slackness_document(report) for report in reports],
        passed=passed,
        notes=notes,
    )


def cmd_crosscheck(run: RunConfig) -> int:
    document = _crosscheck(run)
    with _sink(run.out) as handle:
        _write(handle, document)
    return EXIT_OK if document.passed else EXIT_FAILURE


HANDLERS = {
    'verify-uniform': cmd_verify_uniform,
    'verify-measure': cmd_verify_measure,
    'emit-cert': cmd_emit_cert,
    'scan': cmd_scan,
    'oracle': cmd_oracle,
    'crosscheck': cmd_crosscheck,
}


def _add_setting(parser: argparse.ArgumentParser):
    group = parser.add_mutually_exclusive_group(required=True)
    group.add_argument('--uniform', dest='setting', action='store_const', const='uniform')
    group.add_argument('--measure', dest='setting', action='store_const', const='measure')


def _add_oracle_limits(parser: argparse.ArgumentParser):
    parser.add_argument('--oracle-cap', dest='oracle_cap', type=int, default=None, help='Max C(n,k) for the uniform oracle')
    parser.add_argument('--oracle-max-n', dest='oracle_max_n', type=int, default=None, help='Max n for the measure oracle')


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='cross_sdp', description='Exact SDP certificates for cross 2-intersecting families')
    parser.add_argument('--log-level', default=None, help='Overrides CROSS_SDP_LOG_LEVEL')
    sub = parser.add_subparsers(dest='command', required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--out', default=None, help='Write JSON lines here instead of stdout')
    common.add_argument('--cap', type=int, default=None, help='Materialization cap for this run')

    verify_uniform = sub.add_parser('verify-uniform', parents=[common])
    verify_uniform.add_argument('--n', type=int, required=True)
    verify_uniform.add_argument('--k', type=int, required=True)
    verify_uniform.add_argument('--eps1', default=None, help='ε₁ as num/den')
    verify_uniform.set_defaults(setting='uniform')

    verify_measure = sub.add_parser('verify-measure', parents=[common])
    verify_measure.add_argument('--n', type=int, required=True)
    verify_measure.add_argument('--p', required=True, help='p as num/den')
    verify_measure.add_argument('--eps1', default=None)
    verify_measure.add_argument('--fact31', action='store_true', help='Also check the cube matrix identities')
    verify_measure.set_defaults(setting='measure')

    emit_cert = sub.add_parser('emit-cert', parents=[common])
    _add_setting(emit_cert)
    emit_cert.add_argument('--n', type=int, required=True)
    emit_cert.add_argument('--k', type=int, default=None)
    emit_cert.add_argument('--p', default=None)
    emit_cert.add_argument('--eps1', default=None)

    scan = sub.add_parser('scan', parents=[common])
    _add_setting(scan)
    scan.add_argument('--k', dest='k_range', default=None, help='k range, e.g. 3..10')
    scan.add_argument('--n', dest='n_range', default=None, help='n range, e.g. 1..100')
    scan.add_argument('--n-extra', dest='n_extra', default=None, help='n − 3(k−1) range for uniform scans')
    scan.add_argument('--p', dest='p_list', default=None, help='Comma list of p values')
    scan.add_argument('--jobs', type=int, default=None)

    oracle = sub.add_parser('oracle', parents=[common])
    _add_setting(oracle)
    oracle.add_argument('--n', type=int, required=True)
    oracle.add_argument('--k', type=int, default=None)
    oracle.add_argument('--p', default=None)
    oracle.add_argument('--t', type=int, default=2)
    oracle.add_argument('--single', action='store_true', help='Largest single t-intersecting family instead')
    _add_oracle_limits(oracle)

    crosscheck = sub.add_parser('crosscheck', parents=[common])
    _add_setting(crosscheck)
    crosscheck.add_argument('--n', type=int, required=True)
    crosscheck.add_argument('--k', type=int, default=None)
    crosscheck.add_argument('--p', default=None)
    crosscheck.add_argument('--eps1', default=None)
    _add_oracle_limits(crosscheck)

    return parser


def run_config_from_args(args: argparse.Namespace) -> RunConfig:
    values = {key: value for key, value in vars(args).items() if value is not None and key != 'log_level'}
    values.setdefault('jobs', get_config().JOBS)
    return RunConfig(**values)


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_USAGE

    logging.basicConfig(
        stream=sys.stderr,
        level=(args.log_level or get_config().LOG_LEVEL).upper(),
        format='%(asctime)s %(levelname)s %(name)s: %(message)s',
    )

    try:
        run = run_config_from_args(args)
        return HANDLERS[run.command](run)
    except (PreconditionError, RationalFormatError, ValidationError) as e:
        logger.error(f"{args.command}: {e}")
        return EXIT_USAGE
    except CrossSdpError as e:
        logger.error(f"{args.command} failed: {e}")
        return EXIT_FAILURE


if __name__ == '__main__':
    sys.exit(main())
