from typing import Dict, Iterable, List, Optional, Sequence, Tuple
from fractions import Fraction
import logging

import numpy as np
from sympy.polys.domains import QQ
from sympy.polys.matrices import DomainMatrix

from qfield import DOMAIN, QRING, PoleError, RatFunc, format_field_element

logger = logging.getLogger(__name__)

# Sparse vectors over Q(q): {coordinate index: field element}, zeros never stored.
Vector = Dict[int, "DOMAIN.dtype"]


def vec_add(target: Vector, source: Vector, coeff=None) -> Vector:
    """In place: target += coeff * source"""
    for idx, val in source.items():
        value = target.get(idx, DOMAIN.zero) + (val if coeff is None else coeff * val)
        if value:
            target[idx] = value
        else:
            target.pop(idx, None)
    return target


def vec_scale(vector: Vector, coeff) -> Vector:
    if not coeff:
        return {}
    return {idx: coeff * val for idx, val in vector.items()}


def vec_dot(a: Vector, b: Vector):
    if len(a) > len(b):
        a, b = b, a
    total = DOMAIN.zero
    for idx, val in a.items():
        other = b.get(idx)
        if other is not None:
            total += val * other
    return total


def vec_key(vector: Vector) -> Tuple:
    return tuple((idx, format_field_element(vector[idx])) for idx in sorted(vector))


class RowSpace:
    """Subspace of a coordinate space kept in reduced row echelon form.

    Rows are sparse vectors normalized to 1 at their pivot (smallest index)
    and reduced against every other pivot, so membership is one pass.
    """

    def __init__(self, vectors: Iterable[Vector] = ()):
        self.rows: Dict[int, Vector] = {}
        for vector in vectors:
            self.add(vector)

    def copy(self) -> "RowSpace":
        clone = RowSpace()
        clone.rows = {p: dict(row) for p, row in self.rows.items()}
        return clone

    def residual(self, vector: Vector) -> Vector:
        result = dict(vector)
        for pivot in [p for p in vector if p in self.rows]:
            coeff = result.get(pivot)
            if coeff:
                vec_add(result, self.rows[pivot], -coeff)
        # pivots introduced by earlier subtractions are impossible: rows are fully reduced
        return result

    def contains(self, vector: Vector) -> bool:
        return not self.residual(vector)

    def add(self, vector: Vector) -> bool:
        """Insert a vector; returns False when it was already in the span"""
        res = self.residual(vector)
        if not res:
            return False
        pivot = min(res)
        res = vec_scale(res, 1 / res[pivot])
        for row in self.rows.values():
            coeff = row.get(pivot)
            if coeff:
                vec_add(row, res, -coeff)
        self.rows[pivot] = res
        return True

    def extend(self, vectors: Iterable[Vector]) -> int:
        return sum(1 for vector in vectors if self.add(vector))

    @property
    def dim(self) -> int:
        return len(self.rows)

    def basis(self) -> List[Vector]:
        return [self.rows[p] for p in sorted(self.rows)]

    def key(self) -> Tuple:
        return tuple(vec_key(row) for row in self.basis())

    def issubset(self, other: "RowSpace") -> bool:
        return all(other.contains(row) for row in self.rows.values())

    def __eq__(self, other) -> bool:
        return isinstance(other, RowSpace) and self.key() == other.key()

    def coordinates(self, vector: Vector) -> Optional[Dict[int, "DOMAIN.dtype"]]:
        """Coefficients of vector in the rref basis (keyed by pivot), None if outside the span"""
        if not self.contains(vector):
            return None
        return {p: vector[p] for p in self.rows if vector.get(p)}


# Dense helpers on DomainMatrix

def dense_matrix(rows: Sequence[Vector], columns: Sequence[int]) -> DomainMatrix:
    position = {c: k for k, c in enumerate(columns)}
    data = [[DOMAIN.zero] * len(columns) for _ in rows]
    for i, row in enumerate(rows):
        for idx, val in row.items():
            k = position.get(idx)
            if k is not None:
                data[i][k] = val
    return DomainMatrix(data, (len(rows), len(columns)), DOMAIN)


def nullspace(rows: Sequence[Vector], columns: Sequence[int]) -> List[Vector]:
    """Basis of {x supported on columns : row . x = 0 for every row}"""
    columns = list(columns)
    if not columns:
        return []
    live = [row for row in rows if any(idx in row for idx in columns)]
    if not live:
        return [{c: DOMAIN.one} for c in columns]
    kernel = dense_matrix(live, columns).nullspace()
    result = []
    for vec in kernel.to_list():
        entry = {columns[k]: v for k, v in enumerate(vec) if v}
        if entry:
            result.append(entry)
    return result


def intersect_span(candidates: Sequence[Vector], target: RowSpace) -> List[Vector]:
    """Basis of the combinations sum c_j candidates[j] that lie in the target span"""
    rows: Dict[int, Vector] = {}
    for j, vector in enumerate(candidates):
        for idx, value in target.residual(vector).items():
            rows.setdefault(idx, {})[j] = value
    result = []
    for coeffs in nullspace(list(rows.values()), range(len(candidates))):
        combined: Vector = {}
        for j, c in coeffs.items():
            vec_add(combined, candidates[j], c)
        if combined:
            result.append(combined)
    return result


def inverse(matrix: List[List["DOMAIN.dtype"]]) -> List[List["DOMAIN.dtype"]]:
    n = len(matrix)
    if n == 0:
        return []
    return DomainMatrix(matrix, (n, n), DOMAIN).inv().to_list()


def probe_values(rows: Sequence[Sequence[RatFunc]], q0: Fraction) -> DomainMatrix:
    data = [[to_qq(entry.evaluate_at(q0)) if not entry.is_zero() else QQ.zero
             for entry in row] for row in rows]
    ncols = len(rows[0]) if rows else 0
    return DomainMatrix(data, (len(rows), ncols), QQ)


def to_qq(value: Fraction):
    return QQ(value.numerator, value.denominator)


def probe_point(rng: np.random.Generator) -> Fraction:
    """A random rational probe point away from 0 and +-1"""
    while True:
        num = int(rng.integers(2, 97))
        den = int(rng.integers(1, 13))
        q0 = Fraction(num, den)
        if q0 not in (0, 1, -1):
            return q0


def probe_rank(rows: Sequence[Sequence[RatFunc]], q0: Fraction) -> int:
    """Rank of the matrix evaluated at q0; a lower bound for the generic rank"""
    if not rows or not rows[0]:
        return 0
    return probe_values(rows, q0).rank()


def exact_rank(rows: Sequence[Sequence[RatFunc]]) -> int:
    """Generic rank by fraction-free elimination over Z[q]"""
    if not rows or not rows[0]:
        return 0
    poly_rows = []
    for row in rows:
        scale = QRING.one
        for entry in row:
            if not entry.is_zero():
                scale = scale.lcm(entry.denominator)
        poly_rows.append([(entry.value * scale).numer if not entry.is_zero() else QRING.zero
                          for entry in row])
    ring = QRING.to_domain()
    matrix = DomainMatrix(poly_rows, (len(rows), len(rows[0])), ring)
    _, _, pivots = matrix.rref_den()
    return len(pivots)


def first_independent_rows(values: DomainMatrix) -> List[int]:
    """Indices of the lexicographically first maximal independent set of rows"""
    if values.shape[0] == 0 or values.shape[1] == 0:
        return []
    _, pivots = values.transpose().to_field().rref()
    return list(pivots)


def safe_probe(evaluate, rng: np.random.Generator, attempts: int = 8):
    """Call evaluate(q0) at fresh probe points until no pole is hit"""
    for _ in range(attempts):
        q0 = probe_point(rng)
        try:
            return q0, evaluate(q0)
        except PoleError as exc:
            logger.warning(f"Probe point hit a pole, re-sampling: {exc}")
    raise PoleError("no pole-free probe point found")
