"""
Exhaustive ground truth for cross t-intersecting families at small n

Families are sets of n-bit masks. Inside a search, a family is a bitmask over vertex
indices of a ConflictGraph, so closures are plain integer ANDs.
"""

import logging
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from math import comb
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

from .config import get_config
from .errors import CapExceededError, PreconditionError
from .exactnum import RationalLike, as_rational
from .hamming import BiasedCube, popcount
from .johnson import UniformGround

logger = logging.getLogger(__name__)

Family = FrozenSet[int]
FamilyPair = Tuple[Family, Family]

STAR = 'star_pair'
KNESER = 'kneser_type'
OTHER = 'other'


def _bits(mask: int) -> Iterable[int]:
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


class ConflictGraph:
    """
    Compatibility relation on one vertex set: x and y are compatible when |x∩y| ≥ t

    Both sides of the bipartite graph carry the same vertices, so a single compat table
    serves both directions.
    """

    def __init__(self, vertices: Sequence[int], t: int):
        if t < 0:
            raise PreconditionError(f"t must be nonnegative, got {t}")
        self.vertices = tuple(vertices)
        self.t = t
        self.index = {mask: i for i, mask in enumerate(self.vertices)}
        self.full = (1 << len(self.vertices)) - 1
        self.compat = []
        for x in self.vertices:
            row = 0
            for j, y in enumerate(self.vertices):
                if popcount(x & y) >= t:
                    row |= 1 << j
            self.compat.append(row)

    @classmethod
    def uniform(cls, n: int, k: int, t: int) -> 'ConflictGraph':
        return cls(UniformGround(n, k).masks, t)

    @classmethod
    def cube(cls, n: int, t: int) -> 'ConflictGraph':
        return cls(range(1 << n), t)

    @property
    def size(self) -> int:
        return len(self.vertices)

    def closure(self, family: int) -> int:
        """Vertices compatible with every member of `family`; the full set for the empty family."""
        result = self.full
        for i in _bits(family):
            result &= self.compat[i]
        return result

    def to_family(self, family: int) -> Family:
        return frozenset(self.vertices[i] for i in _bits(family))

    def from_family(self, family: Iterable[int]) -> int:
        result = 0
        for mask in family:
            result |= 1 << self.index[mask]
        return result


def closure(family: int, graph: ConflictGraph) -> int:
    return graph.closure(family)


def is_cross_intersecting(family_f: Iterable[int], family_g: Iterable[int], t: int) -> bool:
    family_g = list(family_g)
    return all(popcount(x & y) >= t for x in family_f for y in family_g)


def up_closure(family: Iterable[int], n: int) -> Family:
    """All supersets in 2^[n] of members of `family`."""
    result = set()
    stack = list(family)
    while stack:
        mask = stack.pop()
        if mask in result:
            continue
        result.add(mask)
        for i in range(n):
            if not mask >> i & 1:
                stack.append(mask | 1 << i)
    return frozenset(result)


@dataclass(frozen=True)
class Classification:
    kind: str
    witness: Optional[Tuple[int, ...]] = None


@dataclass
class ExtremalReport:
    """
    Exact optimum with every optimal pair and its template match

    Elements of witness sets are 1-based, as in the usual [n] = {1, ..., n}.
    """
    setting: str
    n: int
    t: int
    optimum: Fraction
    optimal_pairs: List[FamilyPair]
    classifications: List[Classification] = field(default_factory=list)
    k: Optional[int] = None
    p: Optional[Fraction] = None

    @property
    def pair_count(self) -> int:
        return len(self.optimal_pairs)

    def class_counts(self) -> Dict[Classification, int]:
        return dict(Counter(self.classifications))

    def kind_counts(self) -> Dict[str, int]:
        return dict(Counter(c.kind for c in self.classifications))


def _check_uniform_cap(n: int, k: int, cap: Optional[int]):
    limit = cap if cap is not None else get_config().ORACLE_CAP
    if comb(n, k) > limit:
        raise CapExceededError(f"C({n},{k}) = {comb(n, k)} exceeds oracle cap {limit}")


def _closed_pairs_search(graph: ConflictGraph) -> Tuple[int, List[Tuple[int, int]]]:
    """
    Close-by-One enumeration of closed pairs (A, B = closure(A), A = closure(B)) maximizing |A||B|

    Only nodes with |A| ≤ |B| are expanded; each recorded pair is stored together with its
    mirror. A subtree is cut when its bound falls strictly below the incumbent, so all ties
    survive.
    """
    memo: Dict[int, int] = {}

    def close(b: int) -> int:
        if b not in memo:
            memo[b] = graph.closure(b)
        return memo[b]

    best = 0
    optimal: set = set()

    def consider(a: int, b: int):
        nonlocal best, optimal
        if not a or not b:
            return
        value = popcount(a) * popcount(b)
        if value > best:
            best, optimal = value, set()
        if value == best:
            optimal.add((a, b))
            optimal.add((b, a))

    for v in range(graph.size):
        b = graph.compat[v]
        consider(close(b), b)

    def expand(a: int, b: int, start: int):
        size_a = popcount(a)
        if size_a > popcount(b):
            return
        consider(a, b)
        candidates = [v for v in range(start, graph.size) if not a >> v & 1]
        if not candidates:
            return
        # a descendant adds some candidate v, so B'' ⊆ B ∩ compat[v] and |A''| ≤ |B''|
        largest_b = max(popcount(b & graph.compat[v]) for v in candidates)
        if largest_b * min(largest_b, size_a + len(candidates)) < best:
            return
        for v in candidates:
            b2 = b & graph.compat[v]
            a2 = close(b2)
            # canonicity: no new vertex below v
            if (a2 ^ a) & ((1 << v) - 1):
                continue
            expand(a2, b2, v + 1)

    b0 = graph.full
    expand(close(b0), b0, 0)
    return best, sorted(optimal)


def max_product_uniform(n: int, k: int, t: int, cap: Optional[int] = None) -> ExtremalReport:
    """
    Exact maximum of |F||G| over cross t-intersecting F, G ⊆ C([n], k), with all optima

    Raises:
        CapExceededError: C(n,k) exceeds the oracle cap
    """
    _check_uniform_cap(n, k, cap)
    graph = ConflictGraph.uniform(n, k, t)
    best, pairs = _closed_pairs_search(graph)
    families = [(graph.to_family(a), graph.to_family(b)) for a, b in pairs]
    report = ExtremalReport(
        setting='uniform',
        n=n,
        k=k,
        t=t,
        optimum=Fraction(best),
        optimal_pairs=families,
        classifications=[classify(pair, n, t, k=k) for pair in families],
    )
    logger.info(f"Uniform oracle (n={n}, k={k}, t={t}): optimum {best} with {report.pair_count} pairs")
    return report


def _up_sets(n: int) -> Iterable[int]:
    """
    Every up-set of 2^[n] as a bitmask over masks, deciding masks by decreasing popcount

    A mask may join only if all of its immediate supersets already have.
    """
    order = sorted(range(1 << n), key=lambda m: (-popcount(m), m))

    def extend(position: int, family: int):
        if position == len(order):
            yield family
            return
        mask = order[position]
        yield from extend(position + 1, family)
        parents = [mask | 1 << i for i in range(n) if not mask >> i & 1]
        if all(family >> parent & 1 for parent in parents):
            yield from extend(position + 1, family | 1 << mask)

    yield from extend(0, 0)


def count_up_sets(n: int) -> int:
    return sum(1 for _ in _up_sets(n))


def _check_cube_limit(n: int, max_n: Optional[int]):
    limit = max_n if max_n is not None else get_config().ORACLE_CUBE_N
    if n > limit:
        raise CapExceededError(f"n = {n} exceeds the up-set enumeration limit {limit}")


def _bitmask_measure(cube: BiasedCube):
    weights = cube.weights()

    def measure(family: int) -> Fraction:
        return sum((weights[i] for i in _bits(family)), Fraction(0))

    return measure


def max_product_measure(n: int, p: RationalLike, t: int, max_n: Optional[int] = None) -> ExtremalReport:
    """
    Exact maximum of μ_p(F)μ_p(G) over cross t-intersecting F, G ⊆ 2^[n], with all optima

    Optimal families are up-sets, so F ranges over all up-sets and G = closure(F).

    Raises:
        CapExceededError: n exceeds the up-set enumeration limit
    """
    _check_cube_limit(n, max_n)
    cube = BiasedCube(n, as_rational(p))
    graph = ConflictGraph.cube(n, t)
    measure = _bitmask_measure(cube)

    best = Fraction(0)
    optimal: List[Tuple[int, int]] = []
    visited = 0
    for family in _up_sets(n):
        visited += 1
        if not family:
            continue
        other = graph.closure(family)
        if not other:
            continue
        value = measure(family) * measure(other)
        if value > best:
            best, optimal = value, []
        if value == best:
            optimal.append((family, other))

    families = [(graph.to_family(a), graph.to_family(b)) for a, b in optimal]
    report = ExtremalReport(
        setting='measure',
        n=n,
        p=cube.p,
        t=t,
        optimum=best,
        optimal_pairs=families,
        classifications=[classify(pair, n, t) for pair in families],
    )
    logger.info(f"Measure oracle (n={n}, p={cube.p}, t={t}): {visited} up-sets, optimum {best}")
    return report


def max_single_family(n: int, k: int, t: int, cap: Optional[int] = None) -> Tuple[int, List[Family]]:
    """
    Largest t-intersecting family of k-sets, with every family of that size

    Maximum cliques of the compatibility graph via Bron–Kerbosch with pivoting.
    """
    _check_uniform_cap(n, k, cap)
    graph = ConflictGraph.uniform(n, k, t)
    # no self-loops in the clique graph
    adjacency = [row & ~(1 << i) for i, row in enumerate(graph.compat)]
    best = 0
    cliques: List[int] = []

    def search(clique: int, candidates: int, excluded: int):
        nonlocal best, cliques
        size = popcount(clique)
        if size + popcount(candidates) < best:
            return
        if not candidates and not excluded:
            if size > best:
                best, cliques = size, []
            if size == best:
                cliques.append(clique)
            return
        pivot = max(_bits(candidates | excluded), key=lambda u: popcount(candidates & adjacency[u]))
        for v in list(_bits(candidates & ~adjacency[pivot])):
            search(clique | 1 << v, candidates & adjacency[v], excluded & adjacency[v])
            candidates &= ~(1 << v)
            excluded |= 1 << v

    search(0, graph.full, 0)
    families = [graph.to_family(c) for c in cliques]
    logger.info(f"Single-family oracle (n={n}, k={k}, t={t}): maximum {best}, {len(families)} families")
    return best, families


def max_single_family_measure(
    n: int, p: RationalLike, t: int, max_n: Optional[int] = None
) -> Tuple[Fraction, List[Family]]:
    """
    Largest μ_p(F) over t-intersecting F ⊆ 2^[n], with every family attaining it

    For 0 < p < 1 the up-closure of a t-intersecting family is t-intersecting and strictly
    heavier unless equal, so every maximum family is an up-set.

    Raises:
        CapExceededError: n exceeds the up-set enumeration limit
    """
    _check_cube_limit(n, max_n)
    cube = BiasedCube(n, as_rational(p))
    graph = ConflictGraph.cube(n, t)
    measure = _bitmask_measure(cube)

    best = Fraction(0)
    maxima: List[int] = []
    for family in _up_sets(n):
        if not family or family & ~graph.closure(family):
            continue
        value = measure(family)
        if value > best:
            best, maxima = value, []
        if value == best:
            maxima.append(family)

    families = [graph.to_family(family) for family in maxima]
    logger.info(f"Single-family oracle (n={n}, p={cube.p}, t={t}): maximum {best}, {len(families)} families")
    return best, families


def _template_families(n: int, t: int, k: Optional[int]):
    universe = UniformGround(n, k).masks if k is not None else range(1 << n)
    for subset in combinations(range(n), t):
        mask = sum(1 << e for e in subset)
        yield Classification(STAR, tuple(e + 1 for e in subset)), frozenset(x for x in universe if x & mask == mask)
    for subset in combinations(range(n), t + 2):
        mask = sum(1 << e for e in subset)
        family = frozenset(x for x in universe if popcount(x & mask) >= t + 1)
        if family:
            yield Classification(KNESER, tuple(e + 1 for e in subset)), family


def classify(pair: FamilyPair, n: int, t: int, k: Optional[int] = None) -> Classification:
    """
    Match F = G against the star on a t-set and the family {A : |A∩T′| ≥ t+1}, |T′| = t+2

    k selects the uniform universe C([n], k); None means 2^[n].
    """
    family_f, family_g = pair
    if family_f != family_g:
        return Classification(OTHER)
    for label, template in _template_families(n, t, k):
        if template == family_f:
            return label
    return Classification(OTHER)


def matches_theorem(report: ExtremalReport) -> Optional[bool]:
    """
    Compare an oracle optimum and its optimal pairs with the known extremal results

    Returns None when no result applies to the parameters.
    """
    n, t = report.n, report.t
    kinds = report.kind_counts()
    all_symmetric = all(f == g for f, g in report.optimal_pairs)

    if report.setting == 'uniform':
        k = report.k
        if t == 2 and k >= 2 and n >= 3 * (k - 1) and n >= 3:
            if report.optimum != comb(n - 2, k - 2) ** 2:
                return False
            kneser = comb(n, 4) if n == 3 * (k - 1) else 0
            return (
                all_symmetric
                and kinds.get(STAR, 0) == comb(n, 2)
                and kinds.get(KNESER, 0) == kneser
                and report.pair_count == comb(n, 2) + kneser
            )
        if t == 1 and k >= 1 and n >= 2 * k:
            return report.optimum == comb(n - 1, k - 1) ** 2
        return None

    p = report.p
    if t == 2 and n >= 2 and p <= Fraction(1, 3):
        if report.optimum != p ** 4:
            return False
        if p < Fraction(1, 3):
            return all_symmetric and kinds.get(STAR, 0) == comb(n, 2) and report.pair_count == comb(n, 2)
        return kinds.get(STAR, 0) == comb(n, 2)
    if t == 1 and n >= 1 and p < Fraction(1, 2):
        return report.optimum == p ** 2
    return None


def matches_single_family_theorem(
    n: int,
    t: int,
    maximum: RationalLike,
    families: Sequence[Family],
    k: Optional[int] = None,
    p: Optional[RationalLike] = None,
) -> Optional[bool]:
    """
    Compare a single-family maximum with the complete intersection results for t ≤ 2

    k selects the uniform setting, otherwise p the measure setting. Returns None when no
    result applies to the parameters.
    """
    maximum = as_rational(maximum)
    kinds = Counter(classify((family, family), n, t, k=k).kind for family in families)
    stars = kinds.get(STAR, 0) == comb(n, t)

    if k is not None:
        threshold = (t + 1) * (k - t + 1)
        if t not in (1, 2) or k < t or n < threshold:
            return None
        if maximum != comb(n - t, k - t):
            return False
        if n > threshold:
            return stars and len(families) == comb(n, t)
        if t == 1:
            # n = 2k: any choice of one set from each complementary pair is maximum
            return stars
        return stars and kinds.get(KNESER, 0) == comb(n, 4) and len(families) == comb(n, 2) + comb(n, 4)

    p = as_rational(p)
    if t not in (1, 2) or n < t or not 0 < p <= Fraction(1, t + 1):
        return None
    if t == 1 and p == Fraction(1, 2):
        return None
    if maximum != p ** t:
        return False
    if p < Fraction(1, t + 1):
        return stars and len(families) == comb(n, t)
    return stars and kinds.get(KNESER, 0) == comb(n, t + 2) and len(families) == comb(n, t) + comb(n, t + 2)
