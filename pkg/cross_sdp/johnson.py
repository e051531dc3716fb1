"""
Johnson scheme J(n,k): k-subset ranking, the matrices B₀, B₁, D_f, W_{f,k}, W̄_{f,k}
and their eigenvalue tables
"""

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from typing import Optional, Tuple

from .config import get_config
from .errors import CapExceededError, DegenerateDenominatorError, PreconditionError
from .exactlin import RectMatrix, SymMatrix, matches_spectrum
from .exactnum import binom

logger = logging.getLogger(__name__)


@lru_cache(maxsize=None)
def _colex_masks(n: int, k: int) -> Tuple[int, ...]:
    masks = [sum(1 << e for e in combo) for combo in combinations(range(n), k)]
    # colex: compare the largest element first
    masks.sort(key=lambda m: tuple(reversed([i for i in range(n) if m >> i & 1])))
    return tuple(masks)


@dataclass(frozen=True)
class UniformGround:
    """
    The k-subsets of [n] as n-bit masks, ranked colexicographically
    """
    n: int
    k: int

    def __post_init__(self):
        if self.n < 1 or not 1 <= self.k <= self.n:
            raise PreconditionError(f"Need n ≥ 1 and 1 ≤ k ≤ n, got n={self.n}, k={self.k}")

    @property
    def subset_count(self) -> int:
        return math.comb(self.n, self.k)

    @property
    def masks(self) -> Tuple[int, ...]:
        return _colex_masks(self.n, self.k)

    def rank(self, mask: int) -> int:
        if bin(mask).count('1') != self.k or mask >> self.n:
            raise PreconditionError(f"Mask {mask:#b} is not a {self.k}-subset of [{self.n}]")
        elements = [i for i in range(self.n) if mask >> i & 1]
        return sum(math.comb(e, i + 1) for i, e in enumerate(elements))

    def unrank(self, index: int) -> int:
        if not 0 <= index < self.subset_count:
            raise PreconditionError(f"Rank {index} out of range for C({self.n},{self.k})")
        mask = 0
        remaining = index
        for i in range(self.k, 0, -1):
            # largest c with C(c, i) ≤ remaining
            c = i - 1
            while math.comb(c + 1, i) <= remaining:
                c += 1
            mask |= 1 << c
            remaining -= math.comb(c, i)
        return mask


@dataclass(frozen=True)
class SpectralLevel:
    j: int
    lambda0: Fraction
    lambda1: Fraction
    mult: int


@dataclass(frozen=True)
class SpectralTable:
    levels: Tuple[SpectralLevel, ...]

    def total_multiplicity(self) -> int:
        return sum(level.mult for level in self.levels)


def _check_level(k: int, j: int):
    if not 0 <= j <= k:
        raise PreconditionError(f"Level j={j} outside 0..{k}")


def lambda0_uniform(n: int, k: int, j: int) -> Fraction:
    _check_level(k, j)
    return Fraction((-1) ** j * binom(n - k - j, k - j))


def lambda1_uniform(n: int, k: int, j: int) -> Fraction:
    _check_level(k, j)
    denominator = n - 2 * k + 1
    if denominator <= 0:
        raise DegenerateDenominatorError(f"n − 2k + 1 = {denominator} ≤ 0 for n={n}, k={k}")
    return lambda0_uniform(n, k, j) * (Fraction((n - k - j + 1) * (k - j), denominator) - k)


def lambda_d_uniform(n: int, k: int, f: int, j: int) -> Fraction:
    """Eigenvalue of D_f on V_j: (−1)^j C(k−j, f−j) C(n−f−j, k−j)."""
    _check_level(k, j)
    if not 0 <= f <= k:
        raise PreconditionError(f"f={f} outside 0..{k}")
    return Fraction((-1) ** j * binom(k - j, f - j) * binom(n - f - j, k - j))


def level_multiplicity(n: int, j: int) -> int:
    return binom(n, j) - binom(n, j - 1)


def spectral_table_uniform(n: int, k: int) -> SpectralTable:
    if n < 2 * k:
        raise PreconditionError(f"Spectral table needs n ≥ 2k, got n={n}, k={k}")
    levels = tuple(
        SpectralLevel(j, lambda0_uniform(n, k, j), lambda1_uniform(n, k, j), level_multiplicity(n, j))
        for j in range(k + 1)
    )
    return SpectralTable(levels)


def _check_cap(size: int, cap: Optional[int], what: str):
    limit = cap if cap is not None else get_config().JOHNSON_CAP
    if size > limit:
        raise CapExceededError(f"{what} needs {size} rows, cap is {limit}")


def materialize_B(n: int, k: int, i: int, cap: Optional[int] = None) -> SymMatrix:
    """
    (B_i)_{x,y} = 1 if |x∩y| = i, else 0, for i ∈ {0, 1}
    """
    if i not in (0, 1):
        raise PreconditionError(f"Only B₀ and B₁ are supported, got i={i}")
    ground = UniformGround(n, k)
    _check_cap(ground.subset_count, cap, f"B_{i} for J({n},{k})")
    masks = ground.masks
    logger.info(f"Materializing B_{i} for J({n},{k}) with {len(masks)} rows")
    return SymMatrix.from_function(len(masks), lambda a, b: int(bin(masks[a] & masks[b]).count('1') == i))


def materialize_D(n: int, k: int, f: int, cap: Optional[int] = None) -> SymMatrix:
    """(D_f)_{x,y} = C(k − |x∩y|, f)."""
    if not 0 <= f <= k:
        raise PreconditionError(f"f={f} outside 0..{k}")
    ground = UniformGround(n, k)
    _check_cap(ground.subset_count, cap, f"D_{f} for J({n},{k})")
    masks = ground.masks
    return SymMatrix.from_function(len(masks), lambda a, b: binom(k - bin(masks[a] & masks[b]).count('1'), f))


def materialize_W(n: int, f: int, k: int, cap: Optional[int] = None) -> RectMatrix:
    """(W_{f,k})_{x,y} = 1 if x ⊂ y, rows f-subsets, columns k-subsets."""
    rows, cols = UniformGround(n, f).masks if f > 0 else (0,), UniformGround(n, k).masks
    _check_cap(max(len(rows), len(cols)), cap, f"W_{{{f},{k}}}")
    return RectMatrix.from_function(len(rows), len(cols), lambda a, b: int(rows[a] & cols[b] == rows[a]))


def materialize_W_bar(n: int, f: int, k: int, cap: Optional[int] = None) -> RectMatrix:
    """(W̄_{f,k})_{x,y} = 1 if x ∩ y = ∅."""
    rows, cols = UniformGround(n, f).masks if f > 0 else (0,), UniformGround(n, k).masks
    _check_cap(max(len(rows), len(cols)), cap, f"W̄_{{{f},{k}}}")
    return RectMatrix.from_function(len(rows), len(cols), lambda a, b: int(rows[a] & cols[b] == 0))


def d_from_inclusion_matrices(n: int, k: int, f: int, cap: Optional[int] = None) -> RectMatrix:
    """D_f computed as W_{f,k}ᵀ · W̄_{f,k}."""
    return materialize_W(n, f, k, cap).transpose() @ materialize_W_bar(n, f, k, cap)


def verify_d_identities(n: int, k: int, cap: Optional[int] = None) -> bool:
    """
    Check B₀ = D_k, B₁ = D_{k−1} − k·D_k and D₀ = J entrywise, plus D_f = Wᵀ W̄ for every f
    """
    d = [materialize_D(n, k, f, cap) for f in range(k + 1)]
    b0, b1 = materialize_B(n, k, 0, cap), materialize_B(n, k, 1, cap)
    ok = b0 == d[k] and b1 == d[k - 1] - d[k].scale(k) and d[0] == SymMatrix.ones(d[0].dim)
    for f in range(k + 1):
        ok = ok and d_from_inclusion_matrices(n, k, f, cap) == d[f]
    if not ok:
        logger.warning(f"D_f identities failed for J({n},{k})")
    return ok


def verify_spectrum_by_traces(n: int, k: int, i: int, cap: Optional[int] = None) -> bool:
    """
    Confirm the eigenvalue table of B_i without eigenvectors

    Checks trace(B_i^m) = Σ_j mult(j)·λ_i(j)^m for m = 0..3 and that Π_j (B_i − λ_i(j) I) = 0.
    """
    table = spectral_table_uniform(n, k)
    spectrum = [(level.lambda0 if i == 0 else level.lambda1, level.mult) for level in table.levels]
    return matches_spectrum(materialize_B(n, k, i, cap), spectrum, f"B_{i} of J({n},{k})")


def verify_d_spectrum_by_traces(n: int, k: int, f: int, cap: Optional[int] = None) -> bool:
    if n < 2 * k:
        raise PreconditionError(f"Need n ≥ 2k, got n={n}, k={k}")
    spectrum = [(lambda_d_uniform(n, k, f, j), level_multiplicity(n, j)) for j in range(k + 1)]
    return matches_spectrum(materialize_D(n, k, f, cap), spectrum, f"D_{f} of J({n},{k})")
