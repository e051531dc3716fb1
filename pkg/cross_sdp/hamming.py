"""
The p-biased cube 2^[n]: product-measure weights, the tensor-product matrices
Δ, J, B₀, B₁, D₀, D₁ built from 2×2 generators, their closed-form entries and eigenvalues
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from math import comb
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .config import get_config
from .errors import CapExceededError, PreconditionError
from .exactlin import RectMatrix, SymMatrix, kron_by_bits, matches_spectrum
from .exactnum import QuadScalar, RationalLike, as_rational
from .johnson import SpectralLevel, SpectralTable

logger = logging.getLogger(__name__)

QuadMatrix2 = Tuple[Tuple[QuadScalar, QuadScalar], Tuple[QuadScalar, QuadScalar]]


def _check_p(p: RationalLike) -> Fraction:
    p = as_rational(p)
    if not 0 < p < 1:
        raise PreconditionError(f"p must lie strictly between 0 and 1, got {p}")
    return p


def popcount(mask: int) -> int:
    return bin(mask).count('1')


@dataclass(frozen=True)
class BiasedCube:
    """
    2^[n] with μ_p({x}) = p^|x| q^(n−|x|); bit i of a mask is element i
    """
    n: int
    p: Fraction

    def __post_init__(self):
        if self.n < 1:
            raise PreconditionError(f"n must be ≥ 1, got {self.n}")
        object.__setattr__(self, 'p', _check_p(self.p))

    @property
    def q(self) -> Fraction:
        return 1 - self.p

    @property
    def size(self) -> int:
        return 1 << self.n

    def weight(self, mask: int) -> Fraction:
        ones = popcount(mask)
        return self.p ** ones * self.q ** (self.n - ones)

    def weights(self) -> List[Fraction]:
        return [self.weight(mask) for mask in range(self.size)]

    def measure(self, family: Iterable[int]) -> Fraction:
        """Exact μ_p of a family given as an iterable of masks."""
        return sum((self.weight(mask) for mask in set(family)), Fraction(0))


def lambda_measure(p: RationalLike, n: int, j: int, i: int) -> Fraction:
    """
    λ₀(j) = (−p/q)^j and λ₁(j) = (−p/q)^j (1 − j/(np))
    """
    p = _check_p(p)
    if not 0 <= j <= n:
        raise PreconditionError(f"Level j={j} outside 0..{n}")
    if i not in (0, 1):
        raise PreconditionError(f"Only λ₀ and λ₁ are defined, got i={i}")
    base = (-p / (1 - p)) ** j
    if i == 0:
        return base
    return base * (1 - Fraction(j) / (n * p))


def measure_spectral_table(p: RationalLike, n: int) -> SpectralTable:
    """Levels j = 0..n with multiplicity C(n, j)."""
    levels = tuple(
        SpectralLevel(j, lambda_measure(p, n, j, 0), lambda_measure(p, n, j, 1), comb(n, j))
        for j in range(n + 1)
    )
    return SpectralTable(levels)


@dataclass(frozen=True)
class Generators:
    """The 2×2 factors; rows and columns are indexed in the order 0, 1."""
    A: RectMatrix
    D: SymMatrix
    V: QuadMatrix2
    Delta: SymMatrix
    I: SymMatrix
    J: SymMatrix


def generators(p: RationalLike) -> Generators:
    p = _check_p(p)
    q = 1 - p
    ratio = p / q
    root = QuadScalar.sqrt_of(ratio)
    one = QuadScalar.rational(1, ratio)
    # √(q/p) = (q/p)·√(p/q)
    v = ((one, root), (one, -(root * (1 / ratio))))
    return Generators(
        A=RectMatrix([[1 - ratio, ratio], [1, 0]]),
        D=SymMatrix.diagonal([1, -ratio]),
        V=v,
        Delta=SymMatrix.diagonal([q, p]),
        I=SymMatrix.identity(2),
        J=SymMatrix.ones(2),
    )


def quad_matmul2(x: QuadMatrix2, y: QuadMatrix2) -> QuadMatrix2:
    return tuple(
        tuple(x[i][0] * y[0][j] + x[i][1] * y[1][j] for j in range(2))
        for i in range(2)
    )


def quad_transpose2(x: QuadMatrix2) -> QuadMatrix2:
    return ((x[0][0], x[1][0]), (x[0][1], x[1][1]))


def lift2(matrix: RectMatrix, d: Fraction) -> QuadMatrix2:
    return tuple(tuple(QuadScalar.rational(matrix.entry(i, j), d) for j in range(2)) for i in range(2))


def rational_part2(x: QuadMatrix2) -> Optional[RectMatrix]:
    """The matrix of rational parts when every entry is rational, otherwise None."""
    if not all(entry.is_rational() for row in x for entry in row):
        return None
    return RectMatrix([[entry.a for entry in row] for row in x])


def conjugated_factor(gens: Generators, middle: RectMatrix) -> RectMatrix:
    """
    V′·M·V′ᵀ computed in ℚ[√(p/q)]; the result must be rational

    Raises:
        PreconditionError: the product has an irrational entry
    """
    d = gens.V[0][0].d
    product = quad_matmul2(quad_matmul2(gens.V, lift2(middle, d)), quad_transpose2(gens.V))
    rational = rational_part2(product)
    if rational is None:
        logger.error(f"V′·M·V′ᵀ is irrational for radicand {d}")
        raise PreconditionError("Conjugated 2×2 factor is not rational")
    return rational


def generator_identities(p: RationalLike, gens: Optional[Generators] = None) -> Dict[str, bool]:
    """
    Factor-level identities behind the tensor constructions

    - V′ᵀΔ′V′ = I′
    - V′V′ᵀ = Δ′⁻¹
    - V′D′V′ᵀ = [[1 − p²/q², 1 + p/q], [1 + p/q, 0]]
    """
    gens = gens if gens is not None else generators(p)
    p = as_rational(p)
    q = 1 - p
    d = gens.V[0][0].d
    gram = rational_part2(quad_matmul2(quad_matmul2(quad_transpose2(gens.V), lift2(gens.Delta, d)), gens.V))
    inverse = rational_part2(quad_matmul2(gens.V, quad_transpose2(gens.V)))
    ratio = p / q
    expected_k0 = RectMatrix([[1 - ratio ** 2, 1 + ratio], [1 + ratio, 0]])
    return {
        'orthonormal': gram == RectMatrix(gens.I.array()),
        'inverse_weight': inverse == RectMatrix([[1 / q, 0], [0, 1 / p]]),
        'conjugated_d': conjugated_factor(gens, gens.D) == expected_k0,
    }


def all_ones_projector(gens: Generators, n: int) -> RectMatrix:
    """V·E_∅∅·Vᵀ, the tensor power of V′·E₀₀·V′ᵀ; equals J when column 0 of V′ is all ones."""
    corner = RectMatrix([[1, 0], [0, 0]])
    return kron_by_bits([conjugated_factor(gens, corner)] * n)


class MeasureMatrix(str, Enum):
    DELTA = 'Delta'
    J = 'J'
    B0 = 'B0'
    B1 = 'B1'
    D0 = 'D0'
    D1 = 'D1'
    DELTA_J_DELTA = 'DeltaJDelta'
    DELTA_B0 = 'DeltaB0'
    DELTA_B1 = 'DeltaB1'
    K0 = 'K0'
    K1 = 'K1'


def _check_cap(n: int, cap: Optional[int]):
    limit = cap if cap is not None else get_config().CUBE_CAP
    if (1 << n) > limit:
        raise CapExceededError(f"2^{n} = {1 << n} exceeds cube cap {limit}")


def _level_one_sum(n: int, base: RectMatrix, at_level: RectMatrix) -> RectMatrix:
    """(1/n) Σ_j ⊗_i F_{i,j} with F_{i,j} = at_level if i = j else base."""
    total = None
    for j in range(n):
        term = kron_by_bits([at_level if i == j else base for i in range(n)])
        total = term if total is None else total + term
    return total.scale(Fraction(1, n))


def materialize_measure(p: RationalLike, n: int, which: MeasureMatrix, cap: Optional[int] = None) -> RectMatrix:
    """
    Exact 2ⁿ×2ⁿ tensor construction of one of the cube matrices

    K₀ = V D₀ Vᵀ and K₁ = V D₁ Vᵀ are the rational stand-ins for the irrational V; they
    satisfy ΔB_i = Δ K_i Δ.

    Args:
        p: Bias in (0, 1)
        n: Ground-set size
        which: Matrix to build
        cap: Maximum 2ⁿ; None uses the configured cube cap

    Returns:
        A SymMatrix for the symmetric members, RectMatrix for B₀ and B₁
    """
    cube = BiasedCube(n, as_rational(p))
    _check_cap(n, cap)
    which = MeasureMatrix(which)
    gens = generators(cube.p)
    logger.info(f"Materializing {which.value} on 2^[{n}] at p={cube.p}")

    if which is MeasureMatrix.DELTA:
        return kron_by_bits([gens.Delta] * n)
    if which is MeasureMatrix.J:
        return SymMatrix.ones(cube.size)
    if which is MeasureMatrix.B0:
        return kron_by_bits([gens.A] * n)
    if which is MeasureMatrix.B1:
        return _level_one_sum(n, gens.A, gens.I)
    if which is MeasureMatrix.D0:
        return kron_by_bits([gens.D] * n)
    if which is MeasureMatrix.D1:
        return _level_one_sum(n, gens.D, gens.I)
    if which is MeasureMatrix.K0:
        return kron_by_bits([conjugated_factor(gens, gens.D).as_symmetric()] * n)
    if which is MeasureMatrix.K1:
        return _level_one_sum(
            n, conjugated_factor(gens, gens.D).as_symmetric(), conjugated_factor(gens, gens.I).as_symmetric()
        )

    delta = materialize_measure(cube.p, n, MeasureMatrix.DELTA, cap)
    if which is MeasureMatrix.DELTA_J_DELTA:
        weights = delta.diagonal_entries()
        return SymMatrix.from_function(cube.size, lambda x, y: weights[x] * weights[y])
    inner = MeasureMatrix.B0 if which is MeasureMatrix.DELTA_B0 else MeasureMatrix.B1
    return delta @ materialize_measure(cube.p, n, inner, cap)


def b0_entry(p: RationalLike, n: int, x: int, y: int) -> Fraction:
    """Closed form of (B₀)_{x,y}."""
    p = _check_p(p)
    ratio = p / (1 - p)
    if x & y:
        return Fraction(0)
    return (1 - ratio) ** (n - popcount(x) - popcount(y)) * ratio ** popcount(y)


def b1_entry(p: RationalLike, n: int, x: int, y: int) -> Fraction:
    """Closed form of (B₁)_{x,y}."""
    p = _check_p(p)
    ratio = p / (1 - p)
    sx, sy, common = popcount(x), popcount(y), popcount(x & y)
    if common == 0 and sx + sy < n:
        return Fraction(n - sx - sy, n) * (1 - ratio) ** (n - 1 - sx - sy) * ratio ** sy
    if common == 1:
        return Fraction(1, n) * (1 - ratio) ** (n + 1 - sx - sy) * ratio ** (sy - 1)
    return Fraction(0)


@dataclass
class Fact31Report:
    """
    Outcome of the seven cube-matrix checks, keyed 1..7

    `failures[item]` lists offending (x, y) mask pairs, or (−1, −1) for a failure that is
    not tied to an entry.
    """
    p: Fraction
    n: int
    items: Dict[int, bool] = field(default_factory=dict)
    failures: Dict[int, List[Tuple[int, int]]] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(self.items.values())

    def record(self, item: int, offending: Sequence[Tuple[int, int]]):
        self.items[item] = not offending
        self.failures[item] = list(offending)


def _mismatches(left: RectMatrix, right: RectMatrix) -> List[Tuple[int, int]]:
    return [
        (x, y)
        for x in range(left.rows)
        for y in range(left.cols)
        if left.entry(x, y) != right.entry(x, y)
    ]


def verify_fact31(
    p: RationalLike,
    n: int,
    eps0: RationalLike = 1,
    eps1: RationalLike = 1,
    cap: Optional[int] = None,
    gens: Optional[Generators] = None,
) -> Fact31Report:
    """
    Check the seven properties of the cube matrices exactly

    1. Δ, ΔJΔ, ΔB₀, ΔB₁ are symmetric
    2. V′ᵀΔ′V′ = I′ per factor, and ΔJΔ = Δ·(V E_∅∅ Vᵀ)·Δ with V E_∅∅ Vᵀ = J
    3. ΔB_i = Δ·K_i·Δ where K_i = V D_i Vᵀ
    4. diag(D_i) matches lambda_measure
    5. B₀ matches its closed form
    6. B₁ matches its closed form
    7. ε₀ΔB₀ + ε₁ΔB₁ is strictly positive wherever |x∩y| ≤ 1

    Args:
        p: Bias in (0, 1)
        n: Ground-set size
        eps0: ε₀ used by item 7
        eps1: ε₁ used by item 7
        cap: Maximum 2ⁿ
        gens: 2×2 factors to check item 2 against; None builds them from p

    Returns:
        Fact31Report with per-item verdicts and offending pairs
    """
    p = _check_p(p)
    eps0, eps1 = as_rational(eps0), as_rational(eps1)
    build = lambda which: materialize_measure(p, n, which, cap)  # noqa: E731
    report = Fact31Report(p=p, n=n)
    size = 1 << n

    delta = build(MeasureMatrix.DELTA)
    djd = build(MeasureMatrix.DELTA_J_DELTA)
    db0 = build(MeasureMatrix.DELTA_B0)
    db1 = build(MeasureMatrix.DELTA_B1)

    asymmetric = []
    for matrix in (delta, djd, db0, db1):
        asymmetric.extend(_mismatches(matrix, matrix.transpose()))
    report.record(1, asymmetric)

    gens = gens if gens is not None else generators(p)
    identities = generator_identities(p, gens)
    item2 = [] if identities['orthonormal'] and identities['inverse_weight'] else [(-1, -1)]
    projector = all_ones_projector(gens, n)
    item2.extend(_mismatches(projector, SymMatrix.ones(size)))
    item2.extend(_mismatches(djd, delta @ projector @ delta))
    report.record(2, item2)

    item3 = [] if identities['conjugated_d'] else [(-1, -1)]
    item3.extend(_mismatches(db0, delta @ build(MeasureMatrix.K0) @ delta))
    item3.extend(_mismatches(db1, delta @ build(MeasureMatrix.K1) @ delta))
    report.record(3, item3)

    item4 = []
    for i, which in ((0, MeasureMatrix.D0), (1, MeasureMatrix.D1)):
        d_matrix = build(which)
        for x in range(size):
            for y in range(size):
                expected = lambda_measure(p, n, popcount(x), i) if x == y else 0
                if d_matrix.entry(x, y) != expected:
                    item4.append((x, y))
    report.record(4, item4)

    b0, b1 = build(MeasureMatrix.B0), build(MeasureMatrix.B1)
    report.record(5, [(x, y) for x in range(size) for y in range(size) if b0.entry(x, y) != b0_entry(p, n, x, y)])
    report.record(6, [(x, y) for x in range(size) for y in range(size) if b1.entry(x, y) != b1_entry(p, n, x, y)])

    combined = db0.scale(eps0) + db1.scale(eps1)
    report.record(7, [
        (x, y)
        for x in range(size)
        for y in range(size)
        if popcount(x & y) <= 1 and combined.entry(x, y) <= 0
    ])

    if not report.passed:
        failed = [item for item, ok in report.items.items() if not ok]
        logger.warning(f"Cube checks failed at p={p}, n={n}: items {failed}")
    return report


def verify_measure_spectrum_by_traces(p: RationalLike, n: int, i: int, cap: Optional[int] = None) -> bool:
    """
    trace(B_i^m) = Σ_j C(n,j)·λ_i(j)^m for m = 0..3 and the λ_i annihilate B_i

    B_i = V D_i V⁻¹ is similar to the diagonal D_i, so the identities hold for B_i itself.
    """
    table = measure_spectral_table(p, n)
    spectrum = [(level.lambda0 if i == 0 else level.lambda1, level.mult) for level in table.levels]
    matrix = materialize_measure(p, n, MeasureMatrix.B0 if i == 0 else MeasureMatrix.B1, cap)
    return matches_spectrum(matrix, spectrum, f"B_{i} of 2^[{n}] at p={as_rational(p)}")
