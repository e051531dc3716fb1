"""
Dense exact-rational linear algebra

Matrices are numpy object arrays holding Python ints and `Fraction`s. Integral entries are
kept as ints so that 0/1 combinatorial matrices multiply at integer speed; every accessor
hands out `Fraction`s.
"""

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .errors import DimensionMismatchError, PreconditionError
from .exactnum import as_rational, format_rational

logger = logging.getLogger(__name__)


def _exact(value):
    if isinstance(value, bool):
        return int(value)
    if isinstance(value, int):
        return value
    if isinstance(value, Fraction):
        return value.numerator if value.denominator == 1 else value
    raise TypeError(f"Matrix entries must be int or Fraction, got {type(value).__name__}")


_normalize = np.vectorize(_exact, otypes=[object])


def _to_array(entries, rows: Optional[int] = None, cols: Optional[int] = None) -> np.ndarray:
    if isinstance(entries, np.ndarray) and entries.ndim == 2:
        array = entries
    else:
        entries = list(entries)
        if not entries:
            return np.empty((rows or 0, cols or 0), dtype=object)
        array = np.empty((len(entries), len(entries[0])), dtype=object)
        for i, row in enumerate(entries):
            if len(row) != array.shape[1]:
                raise DimensionMismatchError("Ragged rows")
            for j, value in enumerate(row):
                array[i, j] = value
    if array.size == 0:
        return np.empty(array.shape, dtype=object)
    return _normalize(array)


class RectMatrix:
    """
    Immutable dense matrix over ℚ
    """

    def __init__(self, entries, *, _trusted: bool = False):
        array = entries if _trusted else _to_array(entries)
        if array.ndim != 2:
            raise DimensionMismatchError(f"Expected a 2-D array, got {array.ndim}-D")
        array.flags.writeable = False
        self._entries = array

    # -- construction ---------------------------------------------------------------

    @classmethod
    def from_function(cls, rows: int, cols: int, fn: Callable[[int, int], object]) -> 'RectMatrix':
        array = np.empty((rows, cols), dtype=object)
        for i in range(rows):
            for j in range(cols):
                array[i, j] = _exact(fn(i, j))
        return cls(array, _trusted=True)

    @classmethod
    def zeros(cls, rows: int, cols: int) -> 'RectMatrix':
        array = np.empty((rows, cols), dtype=object)
        array.fill(0)
        return cls(array, _trusted=True)

    # -- accessors ------------------------------------------------------------------

    @property
    def rows(self) -> int:
        return self._entries.shape[0]

    @property
    def cols(self) -> int:
        return self._entries.shape[1]

    @property
    def shape(self) -> Tuple[int, int]:
        return self._entries.shape

    def entry(self, i: int, j: int) -> Fraction:
        return Fraction(self._entries[i, j])

    def array(self) -> np.ndarray:
        """A writable copy of the underlying object array."""
        return self._entries.copy()

    def to_float_array(self) -> np.ndarray:
        return np.array([[float(v) for v in row] for row in self._entries], dtype=float).reshape(self.shape)

    def to_json(self) -> List[List[str]]:
        return [[format_rational(v) for v in row] for row in self._entries]

    # -- algebra --------------------------------------------------------------------

    def _wrap(self, array: np.ndarray, symmetric: bool = False) -> 'RectMatrix':
        array = _normalize(array) if array.size else np.empty(array.shape, dtype=object)
        if symmetric:
            return SymMatrix(array, _trusted=True)
        return RectMatrix(array, _trusted=True)

    def _check_same_shape(self, other: 'RectMatrix'):
        if self.shape != other.shape:
            raise DimensionMismatchError(f"Shape mismatch: {self.shape} vs {other.shape}")

    def __add__(self, other: 'RectMatrix') -> 'RectMatrix':
        self._check_same_shape(other)
        both = isinstance(self, SymMatrix) and isinstance(other, SymMatrix)
        return self._wrap(self._entries + other._entries, symmetric=both)

    def __sub__(self, other: 'RectMatrix') -> 'RectMatrix':
        self._check_same_shape(other)
        both = isinstance(self, SymMatrix) and isinstance(other, SymMatrix)
        return self._wrap(self._entries - other._entries, symmetric=both)

    def __neg__(self) -> 'RectMatrix':
        return self._wrap(-self._entries, symmetric=isinstance(self, SymMatrix))

    def scale(self, factor) -> 'RectMatrix':
        factor = _exact(factor)
        return self._wrap(self._entries * factor, symmetric=isinstance(self, SymMatrix))

    def __mul__(self, factor) -> 'RectMatrix':
        if isinstance(factor, (int, Fraction)):
            return self.scale(factor)
        return NotImplemented

    __rmul__ = __mul__

    def __matmul__(self, other: 'RectMatrix') -> 'RectMatrix':
        if self.cols != other.rows:
            raise DimensionMismatchError(f"Cannot multiply {self.shape} by {other.shape}")
        if self.rows == 0 or other.cols == 0 or self.cols == 0:
            return RectMatrix.zeros(self.rows, other.cols)
        return self._wrap(self._entries.dot(other._entries))

    def transpose(self) -> 'RectMatrix':
        return self._wrap(self._entries.T.copy(), symmetric=isinstance(self, SymMatrix))

    def trace(self) -> Fraction:
        if self.rows != self.cols:
            raise DimensionMismatchError("Trace of a non-square matrix")
        return Fraction(sum(self._entries[i, i] for i in range(self.rows)))

    def is_symmetric(self) -> bool:
        return self.rows == self.cols and bool(np.all(self._entries == self._entries.T))

    def as_symmetric(self) -> 'SymMatrix':
        return SymMatrix(self._entries, _trusted=False)

    def __eq__(self, other) -> bool:
        if not isinstance(other, RectMatrix):
            return NotImplemented
        return self.shape == other.shape and bool(np.all(self._entries == other._entries))

    def __hash__(self):
        return hash((self.shape, tuple(self._entries.flat)))

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.rows}x{self.cols})"


class SymMatrix(RectMatrix):
    """
    Immutable dense symmetric matrix over ℚ

    Symmetry is checked on construction unless the matrix was produced by an operation
    that preserves it.
    """

    def __init__(self, entries, *, _trusted: bool = False):
        array = entries if _trusted else _to_array(entries)
        if not _trusted:
            if array.ndim != 2 or array.shape[0] != array.shape[1]:
                raise DimensionMismatchError(f"Symmetric matrix must be square, got {array.shape}")
            if not np.all(array == array.T):
                raise PreconditionError("Matrix is not symmetric")
        super().__init__(array, _trusted=True)

    @classmethod
    def from_function(cls, dim: int, fn: Callable[[int, int], object]) -> 'SymMatrix':
        """Evaluate fn only on i ≤ j and mirror."""
        array = np.empty((dim, dim), dtype=object)
        for i in range(dim):
            for j in range(i, dim):
                value = _exact(fn(i, j))
                array[i, j] = value
                array[j, i] = value
        return cls(array, _trusted=True)

    @classmethod
    def identity(cls, dim: int) -> 'SymMatrix':
        return cls.from_function(dim, lambda i, j: 1 if i == j else 0)

    @classmethod
    def ones(cls, dim: int) -> 'SymMatrix':
        return cls.from_function(dim, lambda i, j: 1)

    @classmethod
    def zeros(cls, dim: int) -> 'SymMatrix':
        return cls.from_function(dim, lambda i, j: 0)

    @classmethod
    def diagonal(cls, values: Sequence) -> 'SymMatrix':
        values = list(values)
        return cls.from_function(len(values), lambda i, j: values[i] if i == j else 0)

    @classmethod
    def block(cls, blocks: Sequence[Sequence[RectMatrix]]) -> 'SymMatrix':
        """Assemble a symmetric matrix from a square grid of blocks."""
        array = np.block([[b.array() for b in row] for row in blocks])
        return cls(array)

    @property
    def dim(self) -> int:
        return self.rows

    def quadratic_form(self, vector: Sequence) -> Fraction:
        if len(vector) != self.dim:
            raise DimensionMismatchError(f"Vector of length {len(vector)} for dim {self.dim}")
        x = np.array([_exact(v) for v in vector], dtype=object)
        if self.dim == 0:
            return Fraction(0)
        return Fraction(x.dot(self._entries.dot(x)))

    def diagonal_entries(self) -> List[Fraction]:
        return [Fraction(self._entries[i, i]) for i in range(self.dim)]


@dataclass(frozen=True)
class PsdVerdict:
    is_psd: bool
    pivots: Tuple[Fraction, ...]
    witness: Optional[Tuple[Fraction, ...]] = None
    witness_value: Optional[Fraction] = None


def psd_check_exact(matrix: SymMatrix) -> PsdVerdict:
    """
    Decide positive semidefiniteness exactly by diagonal-pivoted symmetric elimination

    At each step the largest remaining diagonal entry is the pivot. A negative maximum,
    or a zero maximum with a nonzero off-diagonal entry left in the block, refutes PSD;
    the refuting vector is pulled back through the recorded elimination steps so that
    witnessᵀ·M·witness < 0 holds for the original matrix.

    Args:
        matrix: Symmetric matrix to decide

    Returns:
        PsdVerdict with the pivots (PSD) or a witness and its negative quadratic form value
    """
    n = matrix.dim
    work = np.empty((n, n), dtype=object)
    for i in range(n):
        for j in range(n):
            work[i, j] = matrix.entry(i, j)

    active = list(range(n))
    steps = []
    pivots: List[Fraction] = []

    while active:
        diagonal = [work[i, i] for i in active]
        position = max(range(len(active)), key=lambda t: diagonal[t])
        pivot_index, pivot_value = active[position], diagonal[position]

        if pivot_value < 0:
            return _refute(matrix, steps, {pivot_index: Fraction(1)})

        if pivot_value == 0:
            local = _zero_pivot_witness(work, active)
            if local is not None:
                return _refute(matrix, steps, local)
            # remaining block is identically zero
            pivots.extend(Fraction(0) for _ in active)
            break

        rest = [i for i in active if i != pivot_index]
        coefficients = [(r, work[pivot_index, r]) for r in rest]
        steps.append((pivot_index, pivot_value, coefficients))
        pivots.append(pivot_value)
        if rest:
            index = np.array(rest)
            row = work[pivot_index, index]
            update = np.multiply.outer(row / pivot_value, row)
            work[np.ix_(index, index)] = work[np.ix_(index, index)] - update
        active = rest

    return PsdVerdict(is_psd=True, pivots=tuple(pivots))


def _zero_pivot_witness(work: np.ndarray, active: List[int]):
    for i in active:
        if work[i, i] < 0:
            return {i: Fraction(1)}
    for pos, i in enumerate(active):
        for j in active[pos + 1:]:
            if work[i, j] != 0:
                # both diagonals are zero here: e_i − sign(w_ij)·e_j gives −2|w_ij|
                sign = 1 if work[i, j] > 0 else -1
                return {i: Fraction(1), j: Fraction(-sign)}
    return None


def _refute(matrix: SymMatrix, steps, local) -> PsdVerdict:
    vector = dict(local)
    for pivot_index, pivot_value, coefficients in reversed(steps):
        total = sum((coeff * vector.get(r, 0) for r, coeff in coefficients), Fraction(0))
        vector[pivot_index] = -total / pivot_value
    witness = tuple(vector.get(i, Fraction(0)) for i in range(matrix.dim))
    value = matrix.quadratic_form(witness)
    if value >= 0:
        logger.error(f"Witness reconstruction failed: quadratic form {value} is not negative")
        raise RuntimeError("PSD witness does not certify a negative direction")
    return PsdVerdict(is_psd=False, pivots=tuple(p for _, p, _ in steps), witness=witness, witness_value=value)


def trace_inner(a: RectMatrix, b: RectMatrix) -> Fraction:
    """A•B = trace(AᵀB) = Σ A(i,j)·B(i,j)."""
    if a.shape != b.shape:
        raise DimensionMismatchError(f"Shape mismatch: {a.shape} vs {b.shape}")
    if a.rows == 0 or a.cols == 0:
        return Fraction(0)
    return Fraction((a._entries * b._entries).sum())


def trace_power(matrix: RectMatrix, m: int) -> Fraction:
    """trace(M^m), with trace(M⁰) defined as the dimension."""
    if matrix.rows != matrix.cols:
        raise DimensionMismatchError("trace_power needs a square matrix")
    if m < 0:
        raise PreconditionError(f"Exponent must be nonnegative, got {m}")
    if m == 0:
        return Fraction(matrix.rows)
    if m == 1:
        return matrix.trace()
    power = matrix
    for _ in range(m - 2):
        power = power @ matrix
    # trace(P·M) = Σ P(i,j)·M(j,i)
    return trace_inner(power, matrix.transpose())


def kron(a: RectMatrix, b: RectMatrix) -> RectMatrix:
    """
    Kronecker product; row index of the result is (row_a, row_b) in lexicographic order
    """
    if a.rows * a.cols == 0 or b.rows * b.cols == 0:
        return RectMatrix.zeros(a.rows * b.rows, a.cols * b.cols)
    outer = np.multiply.outer(a._entries, b._entries)
    array = outer.transpose(0, 2, 1, 3).reshape(a.rows * b.rows, a.cols * b.cols)
    symmetric = isinstance(a, SymMatrix) and isinstance(b, SymMatrix)
    return a._wrap(np.ascontiguousarray(array), symmetric=symmetric)


def kron_by_bits(factors: Sequence[RectMatrix]) -> RectMatrix:
    """
    Tensor product in which factors[i] acts on bit i of the index

    Bit 0 is the least significant bit, so the factors are multiplied last-to-first.
    """
    factors = list(factors)
    if not factors:
        return SymMatrix.identity(1)
    result = factors[-1]
    for factor in reversed(factors[:-1]):
        result = kron(result, factor)
    return result


def annihilates(matrix: RectMatrix, eigenvalues: Iterable[Fraction]) -> bool:
    """
    Π (M − λ I) = 0 over the distinct λ

    Every factor is rescaled by the lcm of the eigenvalue denominators so the products stay integral
    for 0/1 matrices.
    """
    if matrix.rows != matrix.cols:
        raise DimensionMismatchError("annihilates needs a square matrix")
    distinct = sorted(set(as_rational(v) for v in eigenvalues))
    scale = 1
    for value in distinct:
        scale = scale * value.denominator // math.gcd(scale, value.denominator)
    identity = SymMatrix.identity(matrix.rows)
    scaled = matrix.scale(scale)
    product = None
    for value in distinct:
        factor = scaled - identity.scale(value * scale)
        product = factor if product is None else product @ factor
    return product is None or product == RectMatrix.zeros(matrix.rows, matrix.cols)


def matches_spectrum(matrix: RectMatrix, spectrum: Sequence[Tuple[Fraction, int]], label: str = 'matrix') -> bool:
    """
    Check a claimed (eigenvalue, multiplicity) list against a diagonalizable matrix

    trace(M^m) must equal Σ mult·λ^m for m = 0..3 and the distinct eigenvalues must annihilate M.
    """
    for m in range(4):
        expected = sum((mult * as_rational(value) ** m for value, mult in spectrum), Fraction(0))
        actual = trace_power(matrix, m)
        if actual != expected:
            logger.warning(f"{label}: trace(M^{m}) = {actual}, spectrum predicts {expected}")
            return False
    if not annihilates(matrix, [value for value, mult in spectrum if mult > 0]):
        logger.warning(f"{label}: eigenvalue polynomial does not annihilate the matrix")
        return False
    return True
