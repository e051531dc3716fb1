"""
Dual certificate for cross 2-intersecting k-uniform families: |F||G| ≤ C(n−2,k−2)²

All parameters are exact rationals. Feasibility is decided on the 2×2 level blocks; the
materialized S is only built for small C(n,k) as an independent confirmation.
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
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
from .exactlin import SymMatrix
from .exactnum import RationalLike, as_rational, binom
from .johnson import UniformGround, lambda0_uniform, lambda1_uniform, level_multiplicity, materialize_B

logger = logging.getLogger(__name__)

SETTING = 'uniform'


def check_range_uniform(n: int, k: int):
    if k < 3:
        raise PreconditionError(f"Certificates need k ≥ 3, got k={k}")
    if n < 3 * (k - 1):
        raise PreconditionError(f"Certificates need n ≥ 3(k−1) = {3 * (k - 1)}, got n={n}")


def d_ratio(n: int, k: int) -> Fraction:
    """D = C(n,k)/C(n−k,k)."""
    return Fraction(binom(n, k), binom(n - k, k))


def alpha_uniform(n: int, k: int) -> Fraction:
    return Fraction(binom(n - 2, k - 2))


def build_params_uniform(n: int, k: int, eps1: RationalLike) -> Tuple[Fraction, Fraction, Fraction]:
    """
    (ε₀, γ₀, γ₁) as affine functions of ε₁

    Args:
        n: Ground-set size, n ≥ 3(k−1)
        k: Uniformity, k ≥ 3
        eps1: ε₁

    Returns:
        Tuple of (eps0, gamma0, gamma1)
    """
    check_range_uniform(n, k)
    eps1 = as_rational(eps1)
    d = d_ratio(n, k)
    slope = Fraction(k * k, n - 2 * k + 1)
    eps0 = -slope * eps1 + Fraction(k * (k - 1), 2 * n * (n - 1)) * d
    gamma0 = slope * eps1 + Fraction(1, 2) * (Fraction(k * k * (n - k), n * (n - 1)) - 1) * d
    gamma1 = -eps1 - Fraction((n - k) * (n - 2 * k + 1), 2 * n * (n - 1)) * d
    return eps0, gamma0, gamma1


def blocks_uniform(
    n: int,
    k: int,
    eps0: RationalLike,
    eps1: RationalLike,
    gamma0: RationalLike,
    gamma1: RationalLike,
) -> List[Block]:
    """u_j = ½C(n−2,k−2) − ε₀λ₀(j) − ε₁λ₁(j), v_j = δ_j − γ₀λ₀(j) − γ₁λ₁(j) for j = 0..k."""
    check_range_uniform(n, k)
    eps0, eps1, gamma0, gamma1 = map(as_rational, (eps0, eps1, gamma0, gamma1))
    half_alpha = alpha_uniform(n, k) / 2
    blocks = []
    for j in range(k + 1):
        lam0, lam1 = lambda0_uniform(n, k, j), lambda1_uniform(n, k, j)
        delta = -Fraction(binom(n, k), 2) if j == 0 else Fraction(0)
        blocks.append(Block(j, half_alpha - eps0 * lam0 - eps1 * lam1, delta - gamma0 * lam0 - gamma1 * lam1))
    return blocks


def _evaluate(n: int, k: int):
    def evaluate(eps1: Fraction):
        eps0, gamma0, gamma1 = build_params_uniform(n, k, eps1)
        return eps0, blocks_uniform(n, k, eps0, eps1, gamma0, gamma1)
    return evaluate


def eps1_window_uniform(n: int, k: int) -> Eps1Window:
    """
    Exact set of ε₁ > 0 for which ε₀ > 0 and every block satisfies u_j ≥ |v_j|

    Raises:
        InfeasibleWindowError: The window is empty
    """
    check_range_uniform(n, k)
    try:
        window = solve_window(block_constraints(_evaluate(n, k)), lower=0, lower_inclusive=False)
    except InfeasibleWindowError as e:
        logger.error(f"No ε₁ window at (n={n}, k={k}): {e}")
        raise
    logger.info(f"ε₁ window for (n={n}, k={k}): ({window.lower}, {window.upper}], binding {window.binding_constraints}")
    return window


def build_certificate_uniform(n: int, k: int, eps1: Optional[RationalLike] = None) -> DualCertificate:
    """
    Construct the certificate; ε₁ defaults to the midpoint of the exact window

    An explicit ε₁ outside the window yields a certificate with feasible = False.
    """
    window = eps1_window_uniform(n, k)
    eps1 = window.default_eps1() if eps1 is None else as_rational(eps1)
    eps0, gamma0, gamma1 = build_params_uniform(n, k, eps1)
    blocks = blocks_uniform(n, k, eps0, eps1, gamma0, gamma1)
    feasible = eps0 > 0 and eps1 > 0 and all(block.ok for block in blocks)
    certificate = DualCertificate(
        setting=SETTING,
        n=n,
        k=k,
        alpha=alpha_uniform(n, k),
        eps0=eps0,
        eps1=eps1,
        gamma0=gamma0,
        gamma1=gamma1,
        blocks=blocks,
        feasible=feasible,
        strict=feasible,
        window=window,
    )
    if not feasible:
        logger.warning(f"Uniform certificate (n={n}, k={k}, ε₁={eps1}) is infeasible")
    else:
        logger.info(f"Uniform certificate (n={n}, k={k}) feasible, min margin {certificate.min_margin}")
    return certificate


def certified_bound_uniform(n: int, k: int) -> Fraction:
    """
    Certified maximum of |F||G|

    k = 2 needs no SDP: cross 2-intersecting families of 2-sets are a single common set, so
    the bound is C(n−2,0)² = 1.
    """
    if k == 2 and n >= 2:
        return Fraction(1)
    certificate = build_certificate_uniform(n, k)
    if not certificate.feasible:
        logger.error(f"Default certificate infeasible at (n={n}, k={k})")
        raise PreconditionError(f"No feasible certificate at (n={n}, k={k})")
    return certificate.alpha ** 2


@dataclass(frozen=True)
class ProofQuantities:
    f: Fraction
    g: Fraction
    h: Fraction
    F: Fraction
    E: Fraction


def proof_quantities(n: int, k: int, j: int) -> ProofQuantities:
    """
    The auxiliary quantities behind the block inequalities

    f(j) = −(n−k)j² + (n+1)(n−k)j − n(n−1)
    g(j) = C(n−k−j,k−j)/C(n−k,k)·(1 + f(j)/(k(k−1)))
    h(j) = j²(2k−n−2) + jn(n−2k+2) + 2k² − 2k − n² + n
    F(n) = n³ − (5k−1)n² + (6k²+5k−8)n − 12k² + 12k + 2/k − 1
    E_j = 4n(n−1)j(n−j+1)/(k(k−1)(n−2k+1)D)
    """
    if k < 2 or n - 2 * k + 1 <= 0 or not 0 <= j <= k:
        raise PreconditionError(f"Proof quantities need k ≥ 2, n ≥ 2k and 0 ≤ j ≤ k, got ({n},{k},{j})")
    f = Fraction(-(n - k) * j * j + (n + 1) * (n - k) * j - n * (n - 1))
    g = Fraction(binom(n - k - j, k - j), binom(n - k, k)) * (1 + f / (k * (k - 1)))
    h = Fraction(j * j * (2 * k - n - 2) + j * n * (n - 2 * k + 2) + 2 * k * k - 2 * k - n * n + n)
    big_f = Fraction(n ** 3 - (5 * k - 1) * n ** 2 + (6 * k * k + 5 * k - 8) * n - 12 * k * k + 12 * k - 1) + Fraction(2, k)
    e = Fraction(4 * n * (n - 1) * j * (n - j + 1), k * (k - 1) * (n - 2 * k + 1)) / d_ratio(n, k)
    return ProofQuantities(f=f, g=g, h=h, F=big_f, E=e)


def g4_closed_form(n: int, k: int) -> Fraction:
    """g(4) = (3n−k−11)(k−2)(k−3) / ((n−k−3)(n−k−2)(n−k−1))."""
    return Fraction((3 * n - k - 11) * (k - 2) * (k - 3), (n - k - 3) * (n - k - 2) * (n - k - 1))


def g4_gap(n: int, k: int) -> int:
    """Denominator minus numerator of g(4); factors as (n−3k+3)(n−4)(n−5)."""
    return (n - k - 3) * (n - k - 2) * (n - k - 1) - (3 * n - k - 11) * (k - 2) * (k - 3)


def rewritten_blocks_uniform(n: int, k: int, eps1: RationalLike) -> List[Block]:
    """
    Blocks j = 1..k from the closed forms in C_j = C(n−k−j,k−j), D and f(j)

    j = 1 uses u₁ = −v₁ = n/(2(n−k))·C(n−2,k−2) − ε₁·n/(n−2k+1)·C(n−k−1,k−1).
    """
    check_range_uniform(n, k)
    eps1 = as_rational(eps1)
    d = d_ratio(n, k)
    half_alpha = alpha_uniform(n, k) / 2
    u1 = Fraction(n, 2 * (n - k)) * alpha_uniform(n, k) - eps1 * Fraction(n, n - 2 * k + 1) * binom(n - k - 1, k - 1)
    blocks = [Block(1, u1, -u1)]
    for j in range(2, k + 1):
        sign = (-1) ** j
        c_j = binom(n - k - j, k - j)
        slope = Fraction(j * (n - j + 1), n - 2 * k + 1)
        f = proof_quantities(n, k, j).f
        u = half_alpha - sign * c_j * (-slope * eps1 + Fraction(k * (k - 1), 2 * n * (n - 1)) * d)
        v = -sign * c_j * (slope * eps1 + f / (2 * n * (n - 1)) * d)
        blocks.append(Block(j, u, v))
    return blocks


def _check_assembly_cap(n: int, k: int, cap: Optional[int]):
    limit = cap if cap is not None else get_config().ASSEMBLY_CAP
    dim = 2 * binom(n, k)
    if dim > limit:
        raise CapExceededError(f"S for (n={n}, k={k}) has dimension {dim}, cap is {limit}")


def _ingredients(n: int, k: int, cert: DualCertificate, cap: Optional[int]):
    _check_assembly_cap(n, k, cap)
    b0 = materialize_B(n, k, 0, cap=cap)
    b1 = materialize_B(n, k, 1, cap=cap)
    p_matrix = b0.scale(cert.eps0) + b1.scale(cert.eps1)
    q_matrix = b0.scale(cert.gamma0) + b1.scale(cert.gamma1)
    size = b0.dim
    return SymMatrix.identity(size), SymMatrix.ones(size), p_matrix, q_matrix


def assemble_S_uniform(n: int, k: int, cert: DualCertificate, cap: Optional[int] = None) -> Tuple[SymMatrix, SymMatrix]:
    """
    Materialize S and Z = diag(P, P) with P = ε₀B₀ + ε₁B₁ and Q = γ₀B₀ + γ₁B₁

    Raises:
        CapExceededError: 2·C(n,k) exceeds the assembly cap
    """
    weight, objective, p_matrix, q_matrix = _ingredients(n, k, cert, cap)
    logger.info(f"Assembling S for (n={n}, k={k}) at dimension {2 * weight.dim}")
    return assemble_dual_matrices(cert.alpha, weight, objective, p_matrix, q_matrix)


def uniform_multiplicities(n: int, k: int) -> List[int]:
    return [level_multiplicity(n, j) for j in range(k + 1)]


def z_support_matches_uniform(n: int, k: int, z_matrix: SymMatrix) -> bool:
    """Z ≥ 0 entrywise, and on each diagonal block Z > 0 exactly where |x∩y| ≤ 1."""
    masks = UniformGround(n, k).masks
    size = len(masks)
    for row in range(2 * size):
        for col in range(2 * size):
            value = z_matrix.entry(row, col)
            if value < 0:
                return False
            same_block = (row < size) == (col < size)
            x, y = masks[row % size], masks[col % size]
            should_be_positive = same_block and bin(x & y).count('1') <= 1
            if should_be_positive != (value > 0):
                return False
    return True


def characteristic_vector(n: int, k: int, family: Iterable[int]) -> List[int]:
    ground = UniformGround(n, k)
    vector = [0] * ground.subset_count
    for mask in family:
        vector[ground.rank(mask)] = 1
    return vector


def slackness_check_uniform(
    cert: DualCertificate,
    family_f: Iterable[int],
    family_g: Iterable[int],
    cap: Optional[int] = None,
) -> SlacknessReport:
    """
    Evaluate X_{F,G} against the certificate

    At an optimal pair (|F||G| = α²) both S•X and Z•X vanish.
    """
    n, k = cert.n, cert.k
    x1 = characteristic_vector(n, k, family_f)
    x2 = characteristic_vector(n, k, family_g)
    if not any(x1) or not any(x2):
        raise PreconditionError("F and G must be nonempty")
    weight, objective, p_matrix, q_matrix = _ingredients(n, k, cert, cap)
    s_matrix, z_matrix = assemble_dual_matrices(cert.alpha, weight, objective, p_matrix, q_matrix)
    report = rank_one_slackness(s_matrix, z_matrix, cert.alpha, weight, objective, q_matrix, x1, x2)
    if report.attains_bound and not report.complementary:
        logger.warning(f"Optimal pair at (n={n}, k={k}) violates complementary slackness")
    return report
