"""
Dual certificate for cross 2-intersecting families under the p-biased measure:
μ_p(F)μ_p(G) ≤ p⁴ for rational 0 < p ≤ 1/3

At p = 1/3 the level-3 block forces ε₁ = 0, so the certificate is feasible but not strict.
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Iterable, List, Optional, Tuple

from .certificate import (
    Block,
    DualCertificate,
    Eps1Window,
    SlacknessReport,
    assemble_dual_matrices,
    block_constraints,
    rank_one_slackness,
    solve_window,
)
from .config import get_config
from .errors import CapExceededError, InfeasibleWindowError, PreconditionError
from .exactlin import RectMatrix, SymMatrix
from .exactnum import RationalLike, as_rational
from .hamming import MeasureMatrix, lambda_measure, materialize_measure, popcount

logger = logging.getLogger(__name__)

SETTING = 'measure'
ONE_THIRD = Fraction(1, 3)
HALF = Fraction(1, 2)


def check_p_measure(p: RationalLike) -> Fraction:
    p = as_rational(p)
    if not 0 < p <= ONE_THIRD:
        raise PreconditionError(f"Measure certificates need 0 < p ≤ 1/3, got p={p}")
    return p


def _params(p: Fraction, n: int, eps1: Fraction) -> Tuple[Fraction, Fraction, Fraction]:
    q = 1 - p
    eps0 = p * p / 2 - eps1
    gamma0 = -HALF + HALF * p * q * n + eps1
    gamma1 = -HALF * p * q * n - eps1
    return eps0, gamma0, gamma1


def build_params_measure(p: RationalLike, n: int, eps1: RationalLike) -> Tuple[Fraction, Fraction, Fraction]:
    """
    ε₀ = p²/2 − ε₁, γ₀ = −½ + ½pqn + ε₁, γ₁ = −½pqn − ε₁

    Raises:
        PreconditionError: p outside (0, 1/3], n < 1, or ε₁ outside [0, p²/2)
    """
    p = check_p_measure(p)
    eps1 = as_rational(eps1)
    if n < 1:
        raise PreconditionError(f"n must be ≥ 1, got {n}")
    if not 0 <= eps1 < p * p / 2:
        raise PreconditionError(f"ε₁ must lie in [0, {p * p / 2}), got {eps1}")
    return _params(p, n, eps1)


def _blocks(p: Fraction, n: int, eps0: Fraction, eps1: Fraction, gamma0: Fraction, gamma1: Fraction) -> List[Block]:
    half_alpha = p * p / 2
    blocks = []
    for j in range(n + 1):
        lam0, lam1 = lambda_measure(p, n, j, 0), lambda_measure(p, n, j, 1)
        delta = -HALF if j == 0 else Fraction(0)
        blocks.append(Block(j, half_alpha - eps0 * lam0 - eps1 * lam1, delta - gamma0 * lam0 - gamma1 * lam1))
    return blocks


def blocks_measure(
    p: RationalLike,
    n: int,
    eps0: RationalLike,
    eps1: RationalLike,
    gamma0: RationalLike,
    gamma1: RationalLike,
) -> List[Block]:
    """u_j = p²/2 − ε₀λ₀(j) − ε₁λ₁(j), v_j = δ_j − γ₀λ₀(j) − γ₁λ₁(j) for j = 0..n, δ₀ = −½."""
    p = check_p_measure(p)
    if n < 1:
        raise PreconditionError(f"n must be ≥ 1, got {n}")
    return _blocks(p, n, *map(as_rational, (eps0, eps1, gamma0, gamma1)))


def eps1_window_measure(p: RationalLike, n: int) -> Eps1Window:
    """
    Exact admissible ε₁ ≥ 0; collapses to {0} at p = 1/3 once n ≥ 3

    Raises:
        InfeasibleWindowError: The window is empty
    """
    p = check_p_measure(p)
    if n < 1:
        raise PreconditionError(f"n must be ≥ 1, got {n}")

    def evaluate(eps1: Fraction):
        eps0, gamma0, gamma1 = _params(p, n, eps1)
        return eps0, _blocks(p, n, eps0, eps1, gamma0, gamma1)

    try:
        window = solve_window(block_constraints(evaluate), lower=0, lower_inclusive=True)
    except InfeasibleWindowError as e:
        logger.error(f"No ε₁ window at (p={p}, n={n}): {e}")
        raise
    logger.info(f"ε₁ window for (p={p}, n={n}): [{window.lower}, {window.upper}], binding {window.binding_constraints}")
    return window


def build_certificate_measure(p: RationalLike, n: int, eps1: Optional[RationalLike] = None) -> DualCertificate:
    """
    Construct the certificate; ε₁ defaults to the window midpoint for p < 1/3 and to 0 at p = 1/3
    """
    p = check_p_measure(p)
    window = eps1_window_measure(p, n)
    if eps1 is None:
        eps1 = Fraction(0) if p == ONE_THIRD else window.default_eps1()
    eps0, gamma0, gamma1 = build_params_measure(p, n, eps1)
    eps1 = as_rational(eps1)
    blocks = _blocks(p, n, eps0, eps1, gamma0, gamma1)
    feasible = eps0 > 0 and eps1 >= 0 and all(block.ok for block in blocks)
    if p == ONE_THIRD and eps1 != 0:
        feasible = False
    certificate = DualCertificate(
        setting=SETTING,
        n=n,
        p=p,
        alpha=p * p,
        eps0=eps0,
        eps1=eps1,
        gamma0=gamma0,
        gamma1=gamma1,
        blocks=blocks,
        feasible=feasible,
        strict=feasible and eps1 > 0,
        window=window,
    )
    if feasible and not certificate.strict:
        certificate.notes.append('slackness positivity not strict (eps1=0)')
        logger.warning(f"Measure certificate at p={p}, n={n} uses ε₁ = 0")
    if not feasible:
        logger.warning(f"Measure certificate (p={p}, n={n}, ε₁={eps1}) is infeasible")
    return certificate


@dataclass(frozen=True)
class ParityQuantities:
    """
    f(j) and the block margin it predicts

    Even j: f(j) = (p/q)^j (j−1−p) and u_j + v_j = ½(p² − q·f(j)).
    Odd j: f(j) = (p/q)^j (jq−1−p²) and u_j − v_j = ½(p² − f(j) − (p/q)^j·4jε₁/(np)).
    """
    j: int
    f: Fraction
    margin: Fraction


def measure_parity_quantities(p: RationalLike, n: int, j: int, eps1: RationalLike = 0) -> ParityQuantities:
    p = check_p_measure(p)
    eps1 = as_rational(eps1)
    if not 2 <= j <= n:
        raise PreconditionError(f"Parity quantities are defined for 2 ≤ j ≤ n, got j={j}")
    q = 1 - p
    ratio = (p / q) ** j
    if j % 2 == 0:
        f = ratio * (j - 1 - p)
        return ParityQuantities(j, f, (p * p - q * f) / 2)
    f = ratio * (j * q - 1 - p * p)
    return ParityQuantities(j, f, (p * p - f - ratio * 4 * j * eps1 / (n * p)) / 2)


def odd_gap_reference(p: RationalLike) -> Fraction:
    """p² − f(3) in closed form: p²(1−2p)(1−3p)/q³."""
    p = as_rational(p)
    return p * p * (1 - 2 * p) * (1 - 3 * p) / (1 - p) ** 3


def one_third_margins(n: int, j: int, eps1: RationalLike = 0) -> Tuple[Fraction, Fraction]:
    """
    Closed forms of (u_j + v_j, u_j − v_j) at p = 1/3, j ≥ 2

    u_j − v_j is given for ε₁ = 0, except at j = 3 where it is −9ε₁/(4n) for any ε₁.
    """
    eps1 = as_rational(eps1)
    sign = (-1) ** j
    plus = Fraction(-6 * sign * j + 8 * sign + 2 ** j, 9 * 2 ** (j + 1))
    if j == 3:
        minus = -9 * eps1 / (4 * n)
    else:
        minus = Fraction(1, 18) + Fraction(sign * (3 * j - 5), 9 * 2 ** j)
    return plus, minus


def rewritten_blocks_measure(p: RationalLike, n: int, eps1: RationalLike) -> List[Block]:
    """
    Blocks j = 1..n in closed form

    u₁ = −v₁ = (p²n − 2ε₁)/(2qn); for j ≥ 2 with r = −p/q,
    u_j = (p³ − r^j(p³ − 2ε₁j/n))/(2p) and v_j = −r^j(p(qj−1) + 2ε₁j/n)/(2p).
    """
    p = check_p_measure(p)
    eps1 = as_rational(eps1)
    q = 1 - p
    u1 = (p * p * n - 2 * eps1) / (2 * q * n)
    blocks = [Block(1, u1, -u1)]
    for j in range(2, n + 1):
        r = (-p / q) ** j
        u = (p ** 3 - r * (p ** 3 - 2 * eps1 * j / n)) / (2 * p)
        v = -r * (p * (q * j - 1) + 2 * eps1 * j / n) / (2 * p)
        blocks.append(Block(j, u, v))
    return blocks


def _check_assembly_cap(n: int, cap: Optional[int]):
    limit = cap if cap is not None else get_config().ASSEMBLY_CAP
    dim = 2 << n
    if dim > limit:
        raise CapExceededError(f"S on 2^[{n}] has dimension {dim}, cap is {limit}")


def _ingredients(cert: DualCertificate, cap: Optional[int]):
    p, n = cert.p, cert.n
    _check_assembly_cap(n, cap)
    delta = materialize_measure(p, n, MeasureMatrix.DELTA, cap=cap)
    objective = materialize_measure(p, n, MeasureMatrix.DELTA_J_DELTA, cap=cap)
    db0 = materialize_measure(p, n, MeasureMatrix.DELTA_B0, cap=cap).as_symmetric()
    db1 = materialize_measure(p, n, MeasureMatrix.DELTA_B1, cap=cap).as_symmetric()
    p_matrix = db0.scale(cert.eps0) + db1.scale(cert.eps1)
    q_matrix = db0.scale(cert.gamma0) + db1.scale(cert.gamma1)
    return delta, objective, p_matrix, q_matrix


def assemble_S_measure(
    p: RationalLike,
    n: int,
    cert: DualCertificate,
    cap: Optional[int] = None,
) -> Tuple[SymMatrix, SymMatrix]:
    """
    Materialize S and Z with P = ε₀ΔB₀ + ε₁ΔB₁ and Q = γ₀ΔB₀ + γ₁ΔB₁

    Raises:
        CapExceededError: 2·2ⁿ exceeds the assembly cap
        PreconditionError: (p, n) differs from the certificate
    """
    if as_rational(p) != cert.p or n != cert.n:
        raise PreconditionError(f"Certificate is for (p={cert.p}, n={cert.n}), not (p={p}, n={n})")
    delta, objective, p_matrix, q_matrix = _ingredients(cert, cap)
    logger.info(f"Assembling S on 2^[{cert.n}] at p={cert.p}")
    return assemble_dual_matrices(cert.alpha, delta, objective, p_matrix, q_matrix)


def block_similar_form(cert: DualCertificate, s_matrix: SymMatrix) -> RectMatrix:
    """diag(Δ, Δ)⁻¹·S, which is similar to the block-diagonal form (S itself is only congruent)."""
    weights = materialize_measure(cert.p, cert.n, MeasureMatrix.DELTA).diagonal_entries()
    inverse = SymMatrix.diagonal([1 / w for w in weights + weights])
    return inverse @ s_matrix


def measure_multiplicities(n: int) -> List[int]:
    return [comb(n, j) for j in range(n + 1)]


def z_support_matches_measure(cert: DualCertificate, z_matrix: SymMatrix) -> bool:
    """
    Z ≥ 0 entrywise, and on each diagonal block Z > 0 exactly where |x∩y| ≤ 1

    With ε₁ = 0 only B₀ contributes, so the positive support shrinks to disjoint pairs.
    """
    size = 1 << cert.n
    threshold = 1 if cert.eps1 > 0 else 0
    for row in range(2 * size):
        for col in range(2 * size):
            value = z_matrix.entry(row, col)
            if value < 0:
                return False
            same_block = (row < size) == (col < size)
            should_be_positive = same_block and popcount((row % size) & (col % size)) <= threshold
            if should_be_positive != (value > 0):
                return False
    return True


def slackness_check_measure(
    cert: DualCertificate,
    family_f: Iterable[int],
    family_g: Iterable[int],
    cap: Optional[int] = None,
) -> SlacknessReport:
    """
    Evaluate X_{F,G} (with its 1/√μ_p normalisation, in ℚ[√(μ_p(F)μ_p(G))]) against the certificate
    """
    size = 1 << cert.n
    x1, x2 = [0] * size, [0] * size
    for mask in family_f:
        x1[mask] = 1
    for mask in family_g:
        x2[mask] = 1
    if not any(x1) or not any(x2):
        raise PreconditionError("F and G must be nonempty")
    delta, objective, p_matrix, q_matrix = _ingredients(cert, cap)
    s_matrix, z_matrix = assemble_dual_matrices(cert.alpha, delta, objective, p_matrix, q_matrix)
    report = rank_one_slackness(s_matrix, z_matrix, cert.alpha, delta, objective, q_matrix, x1, x2)
    if report.attains_bound and not report.complementary:
        logger.warning(f"Optimal pair at (p={cert.p}, n={cert.n}) violates complementary slackness")
    return report
