"""
Shared data model for the dual certificates of both settings

A certificate fixes (α, ε₀, ε₁, γ₀, γ₁). The dual matrix

    S = ½[αW, −M; −M, αW] − [0, Q; Qᵀ, 0] − [P, 0; 0, P],   Z = [P, 0; 0, P]

is block-diagonalized into 2×2 blocks [[u_j, v_j], [v_j, u_j]], so S ⪰ 0 exactly when
u_j ≥ |v_j| for every level j. W is I (uniform) or Δ (measure), M is J or ΔJΔ.
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, List, Optional, Sequence, Tuple

from .errors import DimensionMismatchError, InfeasibleWindowError
from .exactlin import RectMatrix, SymMatrix, trace_power
from .exactnum import QuadScalar, RationalLike, as_rational

logger = logging.getLogger(__name__)

EPS0 = 'eps0'
PLUS = '+'
MINUS = '-'


@dataclass(frozen=True)
class Block:
    j: int
    u: Fraction
    v: Fraction

    @property
    def margin_plus(self) -> Fraction:
        return self.u + self.v

    @property
    def margin_minus(self) -> Fraction:
        return self.u - self.v

    @property
    def ok(self) -> bool:
        return self.margin_plus >= 0 and self.margin_minus >= 0


@dataclass(frozen=True)
class AffineConstraint:
    """a + b·ε₁ ≥ 0, or > 0 when strict; label is (j, sign) or (None, 'eps0')."""
    label: Tuple[Optional[int], str]
    a: Fraction
    b: Fraction
    strict: bool = False

    def holds(self, eps1: Fraction) -> bool:
        value = self.a + self.b * eps1
        return value > 0 if self.strict else value >= 0


@dataclass(frozen=True)
class Eps1Window:
    lower: Fraction
    lower_inclusive: bool
    upper: Fraction
    attained_at_upper: bool
    binding_constraints: Tuple[Tuple[Optional[int], str], ...] = ()

    def contains(self, eps1: RationalLike) -> bool:
        eps1 = as_rational(eps1)
        above = eps1 >= self.lower if self.lower_inclusive else eps1 > self.lower
        below = eps1 <= self.upper if self.attained_at_upper else eps1 < self.upper
        return above and below

    @property
    def is_point(self) -> bool:
        return self.lower == self.upper

    def default_eps1(self) -> Fraction:
        if self.is_point:
            return self.lower
        return (self.lower + self.upper) / 2


def solve_window(
    constraints: Sequence[AffineConstraint],
    lower: RationalLike = 0,
    lower_inclusive: bool = False,
) -> Eps1Window:
    """
    Intersect affine half-lines in ε₁ with the lower bound ε₁ > lower (or ≥)

    Raises:
        InfeasibleWindowError: The intersection is empty or unbounded above
    """
    lower = as_rational(lower)
    upper_bounds = []

    for constraint in constraints:
        if constraint.b == 0:
            if not constraint.holds(Fraction(0)):
                raise InfeasibleWindowError(f"Constraint {constraint.label} fails for every ε₁")
            continue
        root = -constraint.a / constraint.b
        if constraint.b < 0:
            upper_bounds.append((root, constraint))
        elif root > lower or (root == lower and constraint.strict and lower_inclusive):
            lower, lower_inclusive = root, not constraint.strict

    if not upper_bounds:
        raise InfeasibleWindowError("No constraint bounds ε₁ from above")

    upper = min(root for root, _ in upper_bounds)
    binding = [constraint for root, constraint in upper_bounds if root == upper]
    attained = not any(constraint.strict for constraint in binding)

    empty = upper < lower or (upper == lower and not (attained and lower_inclusive))
    if empty:
        logger.error(f"Empty ε₁ window: lower={lower}, upper={upper}")
        raise InfeasibleWindowError(f"Empty ε₁ window (lower={lower}, upper={upper})")

    return Eps1Window(
        lower=lower,
        lower_inclusive=lower_inclusive,
        upper=upper,
        attained_at_upper=attained,
        binding_constraints=tuple(constraint.label for constraint in binding),
    )


def block_constraints(
    evaluate: Callable[[Fraction], Tuple[Fraction, List[Block]]],
) -> List[AffineConstraint]:
    """
    Affine constraints u_j ± v_j ≥ 0 and ε₀ > 0, read off from evaluations at ε₁ = 0 and 1

    `evaluate(eps1)` returns (ε₀, blocks); every quantity is affine in ε₁.
    """
    eps0_at0, blocks_at0 = evaluate(Fraction(0))
    eps0_at1, blocks_at1 = evaluate(Fraction(1))
    constraints = [AffineConstraint((None, EPS0), eps0_at0, eps0_at1 - eps0_at0, strict=True)]
    for b0, b1 in zip(blocks_at0, blocks_at1):
        constraints.append(AffineConstraint((b0.j, PLUS), b0.margin_plus, b1.margin_plus - b0.margin_plus))
        constraints.append(AffineConstraint((b0.j, MINUS), b0.margin_minus, b1.margin_minus - b0.margin_minus))
    return constraints


@dataclass
class DualCertificate:
    """
    One dual solution together with its block margins

    `k` is set in the uniform setting and `p` in the measure setting.
    """
    setting: str
    n: int
    alpha: Fraction
    eps0: Fraction
    eps1: Fraction
    gamma0: Fraction
    gamma1: Fraction
    blocks: List[Block]
    feasible: bool
    k: Optional[int] = None
    p: Optional[Fraction] = None
    strict: bool = False
    window: Optional[Eps1Window] = None
    notes: List[str] = field(default_factory=list)

    @property
    def min_margin(self) -> Fraction:
        return min(min(block.margin_plus, block.margin_minus) for block in self.blocks)

    @property
    def violated_blocks(self) -> List[Block]:
        return [block for block in self.blocks if not block.ok]


def assemble_dual_matrices(
    alpha: Fraction,
    weight: SymMatrix,
    objective: SymMatrix,
    p_matrix: SymMatrix,
    q_matrix: RectMatrix,
) -> Tuple[SymMatrix, SymMatrix]:
    """
    Build S and Z from their four N×N ingredients

    Returns:
        (S, Z), both of dimension 2N
    """
    half = Fraction(1, 2)
    size = weight.dim
    zero = RectMatrix.zeros(size, size)
    diagonal = weight.scale(alpha * half) - p_matrix
    off_diagonal = objective.scale(-half) - q_matrix
    s_matrix = SymMatrix.block([[diagonal, off_diagonal], [off_diagonal.transpose(), diagonal]])
    z_matrix = SymMatrix.block([[p_matrix, zero], [zero, p_matrix]])
    return s_matrix, z_matrix


def block_trace_identity(matrix: RectMatrix, blocks: Sequence[Block], multiplicities: Sequence[int]) -> bool:
    """
    trace(M^m) = Σ_j mult(j)·((u_j+v_j)^m + (u_j−v_j)^m) for m = 1, 2, 3

    M must be similar to the block-diagonal form: S itself in the uniform setting,
    diag(Δ,Δ)⁻¹·S in the measure setting.
    """
    if len(blocks) != len(multiplicities):
        raise DimensionMismatchError("One multiplicity per block is required")
    for m in (1, 2, 3):
        expected = sum(
            (mult * (block.margin_plus ** m + block.margin_minus ** m) for block, mult in zip(blocks, multiplicities)),
            Fraction(0),
        )
        actual = trace_power(matrix, m)
        if actual != expected:
            logger.warning(f"trace(S^{m}) = {actual}, blocks predict {expected}")
            return False
    return True


@dataclass(frozen=True)
class SlacknessReport:
    """
    Exact evaluation of the rank-one primal solution against a dual certificate

    Values carrying 1/√(ab) live in ℚ[√(ab)] with a, b the sizes (or measures) of F and G.
    """
    size_f: Fraction
    size_g: Fraction
    alpha: Fraction
    s_dot_x: QuadScalar
    z_dot_x: QuadScalar
    edge_dot_x: QuadScalar
    objective: QuadScalar

    @property
    def product(self) -> Fraction:
        return self.size_f * self.size_g

    @property
    def weak_duality_holds(self) -> bool:
        return self.product <= self.alpha ** 2

    @property
    def attains_bound(self) -> bool:
        return self.product == self.alpha ** 2

    @property
    def chain_holds(self) -> bool:
        """α − objective = S•X + Z•X + edge term, for a unit-normalized X."""
        lhs = QuadScalar.rational(self.alpha, self.product) - self.objective
        rhs = self.s_dot_x + self.z_dot_x + self.edge_dot_x
        return (lhs - rhs).is_zero()

    @property
    def complementary(self) -> bool:
        return self.s_dot_x.is_zero() and self.z_dot_x.is_zero()


def _split_form(matrix: SymMatrix, x1: Sequence[int], x2: Sequence[int]) -> Tuple[Fraction, Fraction, Fraction]:
    """(x₁ᵀM₁₁x₁, x₁ᵀM₁₂x₂, x₂ᵀM₂₂x₂) for a 2N×2N symmetric M."""
    zeros = [0] * len(x1)
    first = matrix.quadratic_form(list(x1) + zeros)
    second = matrix.quadratic_form(zeros + list(x2))
    both = matrix.quadratic_form(list(x1) + list(x2))
    return first, (both - first - second) / 2, second


def rank_one_slackness(
    s_matrix: SymMatrix,
    z_matrix: SymMatrix,
    alpha: Fraction,
    weight: SymMatrix,
    objective: SymMatrix,
    q_matrix: RectMatrix,
    x1: Sequence[int],
    x2: Sequence[int],
) -> SlacknessReport:
    """
    Evaluate S•X, Z•X and the primal objective for X = y yᵀ, y = (x₁/√a, x₂/√b)

    a = x₁ᵀWx₁ and b = x₂ᵀWx₂ are |F|, |G| when W = I and μ_p(F), μ_p(G) when W = Δ.

    Args:
        s_matrix: Assembled S
        z_matrix: Assembled Z
        alpha: Certified bound on √(ab)
        weight: W (I or Δ)
        objective: M (J or ΔJΔ)
        q_matrix: Q, the edge multiplier block
        x1: 0/1 characteristic vector of F
        x2: 0/1 characteristic vector of G
    """
    size = weight.dim
    if len(x1) != size or len(x2) != size or s_matrix.dim != 2 * size:
        raise DimensionMismatchError("Characteristic vectors do not match the certificate dimension")
    a = weight.quadratic_form(x1)
    b = weight.quadratic_form(x2)
    if a == 0 or b == 0:
        raise DimensionMismatchError("F and G must be nonempty")
    d = a * b

    def evaluate(matrix: SymMatrix) -> QuadScalar:
        first, cross, second = _split_form(matrix, x1, x2)
        # 2·cross/√(ab) = 2·cross·√(ab)/(ab)
        return QuadScalar(first / a + second / b, 2 * cross / d, d)

    q_cross = Fraction(sum(
        q_matrix.entry(i, j) for i in range(size) if x1[i] for j in range(size) if x2[j]
    ))
    m_cross = Fraction(sum(
        objective.entry(i, j) for i in range(size) if x1[i] for j in range(size) if x2[j]
    ))

    return SlacknessReport(
        size_f=a,
        size_g=b,
        alpha=as_rational(alpha),
        s_dot_x=evaluate(s_matrix),
        z_dot_x=evaluate(z_matrix),
        edge_dot_x=QuadScalar(Fraction(0), 2 * q_cross / d, d),
        objective=QuadScalar(Fraction(0), m_cross / d, d),
    )
