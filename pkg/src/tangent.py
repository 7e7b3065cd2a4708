from typing import Any, Dict, List, Optional, Sequence, Tuple
from collections import Counter
from dataclasses import dataclass, field
from itertools import combinations
from math import comb
import logging

from sympy.polys.matrices import DomainMatrix
from sympy.utilities.iterables import partitions

from qfield import DOMAIN, RatFunc, format_field_element
from linalg import RowSpace, Vector, intersect_span, nullspace, vec_add, vec_scale
from uq import E, F, K, Kinv, GeneratorSymbol, pbw_monomials
from grassmann import ZGen, all_generators, epsilon_gen, relation_table, word_text
from pairing import Functional, TruncatedDual, apply_rows

logger = logging.getLogger(__name__)

Weight = Tuple[int, ...]


class AuditRefusal(RuntimeError):
    """The truncation audit could not certify the requested search"""

    def __init__(self, report: "AuditReport"):
        super().__init__("; ".join(report.reasons) or "truncation audit failed")
        self.report = report


class UnsupportedMultiplicity(RuntimeError):
    """An isotypic component needs a parametric family the search does not enumerate"""

    def __init__(self, message: str, weight: Weight, multiplicity: int):
        super().__init__(message)
        self.weight = weight
        self.multiplicity = multiplicity


class IncoherentSearch(RuntimeError):
    """A lifted constituent failed its dimension or closure check"""


# Truncation audit

def schur_dimension(shape: Sequence[int], n: int) -> int:
    """dim S_shape(C^n) by the hook-content formula"""
    num, den = 1, 1
    columns = [sum(1 for part in shape if part > j) for j in range(shape[0])] if shape else []
    for i, part in enumerate(shape):
        for j in range(part):
            num *= n + j - i
            den *= (part - j - 1) + (columns[j] - i - 1) + 1
    return num // den


def cauchy_decomposition(r: int, s: int, degree: int) -> List[Dict[str, Any]]:
    """Degree-l part of Sym(C^r (x) C^s) as sum of S_lambda(C^r) (x) S_lambda(C^s)"""
    pieces = []
    for p in partitions(degree):
        shape = sorted((part for part, mult in p.items() for _ in range(mult)), reverse=True)
        if len(shape) > min(r, s):
            continue
        pieces.append({"shape": shape, "dim": schur_dimension(shape, r) * schur_dimension(shape, s)})
    pieces.sort(key=lambda piece: piece["shape"], reverse=True)
    return pieces


@dataclass
class AuditReport:
    N: int
    r: int
    truncation: int
    max_dim: int
    rdim: int
    v1: int
    v2: int
    boundary: bool
    cauchy: Dict[int, List[Dict[str, Any]]]
    min_irr: Dict[int, int]
    lower_bounds: Dict[int, int]
    certified: bool
    reasons: List[str] = field(default_factory=list)
    degree3: Optional[Dict[str, int]] = None
    n2_branch: Optional[Dict[str, int]] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "N": self.N, "r": self.r, "truncation": self.truncation, "max_dim": self.max_dim,
            "r(N-r)": self.rdim, "dim V1": self.v1, "dim V2": self.v2, "boundary": self.boundary,
            "cauchy": {str(k): v for k, v in self.cauchy.items()},
            "min_irr": {str(k): v for k, v in self.min_irr.items()},
            "lower_bounds": {str(k): v for k, v in self.lower_bounds.items()},
            "degree3": self.degree3, "n2_branch": self.n2_branch,
            "certified": self.certified, "reasons": self.reasons,
        }


def step4_audit(N: int, r: int, truncation: int = 3, max_dim: Optional[int] = None) -> AuditReport:
    """Dimension bounds that rule out constituents above the truncation degree.

    A tangent space with a constituent in degree d carries one in every degree
    2..d-1 as well, so its Gamma-dimension is at least
    r(N-r) + sum_{l=2}^{d} min_irr(l). The search at truncation m is complete
    when that bound for d = m+1 exceeds max_dim.
    """
    if not 1 <= r <= N - 1:
        raise ValueError(f"r={r} must lie in 1..{N - 1}")
    if truncation < 1:
        raise ValueError("truncation must be at least 1")
    s = N - r
    rdim = r * s
    max_dim = 2 * rdim if max_dim is None else max_dim
    v1 = r * (r + 1) * s * (s + 1) // 4
    v2 = r * (r - 1) * s * (s - 1) // 4
    cauchy = {l: cauchy_decomposition(r, s, l) for l in range(1, truncation + 2)}
    min_irr = {l: min(piece["dim"] for piece in pieces) for l, pieces in cauchy.items()}
    lower_bounds = {}
    for d in range(1, truncation + 2):
        lower_bounds[d] = rdim + sum(min_irr[l] for l in range(2, d + 1))
    reasons = []
    if max_dim > 2 * rdim:
        reasons.append(f"max_dim {max_dim} exceeds the classified range 2r(N-r) = {2 * rdim}")
    if lower_bounds[truncation + 1] <= max_dim:
        reasons.append(f"lower bound {lower_bounds[truncation + 1]} for degree {truncation + 1} "
                       f"does not exceed max_dim {max_dim}; raise the truncation")
    degree3 = None
    if r in (2, N - 2) and N >= 4:
        degree3 = {"dim V1'": 2 * N * (N - 1) * (N - 2) // 3, "dim V2'": 2 * (N - 2) * (N - 1) * (N - 3) // 3}
    n2_branch = {"degree2_E_dim": 1, "bound": 2 * (N - 1)} if N == 2 else None
    report = AuditReport(N, r, truncation, max_dim, rdim, v1, v2, v2 == rdim, cauchy, min_irr,
                         lower_bounds, not reasons, reasons, degree3, n2_branch)
    if report.boundary:
        logger.warning(f"Boundary case (N,r)=({N},{r}): dim V2 = r(N-r) = {rdim}")
    logger.info(f"Audit for (N,r)=({N},{r}), m={truncation}: certified={report.certified}")
    return report


# Spaces of functionals

@dataclass
class TangentSpace:
    """Subspace of the truncated dual given by value coordinates on basis words"""
    space: RowSpace
    name: str = ""
    weights: Dict[Weight, int] = field(default_factory=dict)
    certificates: Dict[str, Any] = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return self.space.dim

    @property
    def gamma_dim(self) -> int:
        return self.space.dim - 1

    def basis(self) -> List[Vector]:
        return self.space.basis()

    def key(self) -> Tuple:
        return self.space.key()

    def to_dict(self, dual: TruncatedDual) -> Dict[str, Any]:
        return {
            "name": self.name,
            "dim": self.dim,
            "gamma_dim": self.gamma_dim,
            "weights": {",".join(map(str, w)): n for w, n in sorted(self.weights.items())},
            "basis": [{dual.word_label(i): format_field_element(v[i]) for i in sorted(v)} for v in self.basis()],
            "certificates": {k: v for k, v in self.certificates.items() if k != "witnesses"},
        }


@dataclass
class IdealTruncation:
    """Left ideal of B^+ modulo (B^+)^{m+1}, as coefficient vectors on basis words"""
    space: RowSpace
    truncation: int
    ambient: int

    @property
    def dim(self) -> int:
        return self.space.dim

    @property
    def codim(self) -> int:
        return self.ambient - self.space.dim


@dataclass
class InducedRep:
    basis: List[Vector]
    matrices: Dict[ZGen, DomainMatrix]
    epsilon: Dict[ZGen, Any]

    @property
    def dim(self) -> int:
        return len(self.basis)

    def matrix_text(self, g: ZGen) -> List[List[str]]:
        return [[format_field_element(x) for x in row] for row in self.matrices[g].to_list()]


def _identity(n: int, value=None) -> DomainMatrix:
    value = DOMAIN.one if value is None else value
    return DomainMatrix([[value if i == j else DOMAIN.zero for j in range(n)] for i in range(n)], (n, n), DOMAIN)


def _is_zero(matrix: DomainMatrix) -> bool:
    return all(not x for row in matrix.to_list() for x in row)


def _nilpotency_index(matrix: DomainMatrix) -> Optional[int]:
    n = matrix.shape[0]
    power = _identity(n)
    for p in range(1, n + 2):
        power = power * matrix
        if _is_zero(power):
            return p
    return None


class TangentAnalyzer:
    """Quantum tangent spaces of the Grassmannian inside a truncated dual"""

    def __init__(self, N: int, r: int, truncation: int = 3, convention: str = "standard",
                 jobs: int = 1, probe_seed: int = 20240607, cache_dir: Optional[str] = None,
                 dual: Optional[TruncatedDual] = None):
        self.N = N
        self.r = r
        self.m = truncation
        self.dual = dual or TruncatedDual(N, r, truncation, convention, probe_seed, jobs, cache_dir)
        self.generators = all_generators(N)
        self.raising = [E(i) for i in range(1, N) if i != r]
        self.lowering = [F(i) for i in range(1, N) if i != r]
        self.k_generators = self.raising + self.lowering + [h(j) for j in range(1, N) for h in (K, Kinv)]
        self.coord_weights: List[Weight] = [tuple(-w for w in ww) for ww in self.dual.word_weights]
        self._left: Dict[ZGen, Dict[int, Vector]] = {}
        self._left_columns: Dict[ZGen, Dict[int, Vector]] = {}
        self._right: Dict[GeneratorSymbol, Dict[int, Vector]] = {}
        self.audit: Optional[AuditReport] = None
        self.pencils: List[Dict[str, Any]] = []
        logger.info(f"Tangent analyzer initialized for N={N}, r={r}, truncation {truncation}")

    # Operators

    def left(self, g: ZGen) -> Dict[int, Vector]:
        if g not in self._left:
            self._left[g] = self.dual.left_translation(g)
        return self._left[g]

    def left_columns(self, g: ZGen) -> Dict[int, Vector]:
        if g not in self._left_columns:
            columns: Dict[int, Vector] = {}
            for rho, row in self.left(g).items():
                for sigma, value in row.items():
                    columns.setdefault(sigma, {})[rho] = value
            self._left_columns[g] = columns
        return self._left_columns[g]

    def right(self, g: GeneratorSymbol) -> Dict[int, Vector]:
        if g not in self._right:
            self._right[g] = self.dual.right_action(g)
        return self._right[g]

    def graded(self, g: GeneratorSymbol, k: int) -> Dict[int, Vector]:
        """Right action of g on symbols of degree k"""
        rows = {}
        for rho, row in self.right(g).items():
            if self.dual.length(rho) != k:
                continue
            kept = {sigma: v for sigma, v in row.items() if self.dual.length(sigma) == k}
            if kept:
                rows[rho] = kept
        return rows

    def vector_weight(self, vector: Vector) -> Weight:
        return self.coord_weights[min(vector)]

    def charge(self, weight: Weight) -> int:
        return weight[self.r - 1]

    @property
    def counit_vector(self) -> Vector:
        return {self.dual.index_of(()): DOMAIN.one}

    # Right K-action and left translates

    def k_action(self, f: Functional, g: GeneratorSymbol) -> Functional:
        if g not in self.k_generators:
            raise ValueError(f"{g} is not in the subalgebra K for r={self.r}")
        return Functional(apply_rows(self.right(g), f.values), f.degree)

    def k_orbit(self, f: Functional) -> RowSpace:
        return self._closure([f.values], self.raising + self.lowering)

    def right_translates(self, f: Functional) -> RowSpace:
        """span{b -> f(a b) : a in B}"""
        space = RowSpace([f.values])
        queue = [f.values]
        while queue:
            vector = queue.pop()
            for g in self.generators:
                image = apply_rows(self.left(g), vector)
                if image and space.add(image):
                    queue.append(image)
        return space

    def _closure(self, vectors: Sequence[Vector], ops: Sequence[GeneratorSymbol],
                 degree: Optional[int] = None) -> RowSpace:
        space = RowSpace()
        queue = [v for v in vectors if space.add(v)]
        while queue:
            vector = queue.pop()
            for g in ops:
                rows = self.right(g) if degree is None else self.graded(g, degree)
                image = apply_rows(rows, vector)
                if image and space.add(image):
                    queue.append(image)
        return space

    # Primitive elements and isotypic structure

    def _blockwise_nullspace(self, rows: Sequence[Vector], columns: Sequence[int]) -> List[Vector]:
        groups: Dict[Weight, List[int]] = {}
        for c in columns:
            groups.setdefault(self.coord_weights[c], []).append(c)
        result = []
        for weight in sorted(groups):
            cols = set(groups[weight])
            live = [row for row in rows if any(idx in cols for idx in row)]
            result.extend(nullspace(live, groups[weight]))
        return result

    def primitives(self, k: Optional[int] = None, side: Optional[str] = None) -> List[Functional]:
        """Functionals with f(1) = 0 vanishing on z^+ w for 1 <= |w| <= k-1"""
        k = self.m if k is None else k
        if not 1 <= k <= self.m:
            raise ValueError(f"k={k} must lie in 1..{self.m}")
        constraints = [self.counit_vector]
        for g in self.generators:
            for index, word in enumerate(self.dual.words):
                if 1 <= len(word) <= k - 1:
                    row = self.dual.reduce_shifted((g,) + word)
                    if row:
                        constraints.append(row)
        found = self._blockwise_nullspace(constraints, self.dual.coords_up_to(k))
        if side is not None:
            sign = 1 if side == "+" else -1
            found = [v for v in found if self.charge(self.vector_weight(v)) * sign > 0]
        logger.debug(f"{len(found)} primitive functionals within degree {k}")
        return [Functional(v, 1) for v in found]

    def highest_weight_vectors(self, vectors: Sequence[Vector], degree: Optional[int] = None) -> List[Vector]:
        """Combinations of homogeneous vectors of one weight killed by every raising generator"""
        if not vectors:
            return []
        if not self.raising:
            return list(vectors)
        rows: Dict[Tuple[int, int], Vector] = {}
        for j, vector in enumerate(vectors):
            for t, g in enumerate(self.raising):
                ops = self.right(g) if degree is None else self.graded(g, degree)
                for rho, value in apply_rows(ops, vector).items():
                    rows.setdefault((t, rho), {})[j] = value
        result = []
        for coeffs in nullspace(list(rows.values()), range(len(vectors))):
            combined: Vector = {}
            for j, c in coeffs.items():
                vec_add(combined, vectors[j], c)
            if combined:
                result.append(combined)
        return result

    def _by_weight(self, space: RowSpace) -> Dict[Weight, List[Vector]]:
        groups: Dict[Weight, List[Vector]] = {}
        for row in space.basis():
            groups.setdefault(self.vector_weight(row), []).append(row)
        return groups

    def isotypic_decompose(self, k: int, side: str = "+") -> List[Dict[str, Any]]:
        """K-constituents of the degree-k symbols of the E-side (+) or F-side (-) quotient"""
        if side not in ("+", "-"):
            raise ValueError(f"side must be '+' or '-', got {side}")
        if not 1 <= k <= self.m:
            raise ValueError(f"k={k} must lie in 1..{self.m}")
        kind = "E" if side == "+" else "F"
        symbols = RowSpace()
        for u in pbw_monomials(self.N, self.r, k):
            if u.degree == k and all(x.kind == kind for x in u.letters):
                values = self.dual.functional_of_monomial(u).values
                symbols.add({i: v for i, v in values.items() if self.dual.length(i) == k})
        found: Counter = Counter()
        total = RowSpace()
        for weight, vectors in sorted(self._by_weight(symbols).items()):
            for hw in self.highest_weight_vectors(vectors, degree=k):
                piece = self._closure([hw], self.raising + self.lowering, degree=k)
                if not piece.issubset(symbols):
                    raise IncoherentSearch(f"constituent of weight {weight} leaves the degree-{k} symbols")
                if total.extend(piece.basis()) != piece.dim:
                    raise IncoherentSearch(f"constituent of weight {weight} meets the constituents found before it")
                found[(weight, piece.dim)] += 1
        if total.dim != symbols.dim:
            raise IncoherentSearch(f"constituents span {total.dim} of {symbols.dim} symbol dimensions")
        result = [{"weight": ",".join(map(str, w)), "dim": d, "multiplicity": n}
                  for (w, d), n in sorted(found.items(), key=lambda t: (-t[0][1], t[0][0]))]
        logger.info(f"Isotypic decomposition ({self.N},{self.r},{k},{side}): {[(c['dim'], c['multiplicity']) for c in result]}")
        return result

    # Certificates

    def is_tangent_space(self, T: TangentSpace) -> Dict[str, Any]:
        witnesses: Dict[str, str] = {}
        contains = T.space.contains(self.counit_vector)
        if not contains:
            witnesses["contains_counit"] = "counit not in span"
        k_stable = True
        for g in self.k_generators:
            for row in T.basis():
                if not T.space.contains(apply_rows(self.right(g), row)):
                    k_stable = False
                    witnesses["k_stable"] = f"basis vector with pivot {self.dual.word_label(min(row))} moved by {g}"
                    break
            if not k_stable:
                break
        coideal = True
        for g in self.generators:
            for row in T.basis():
                if not T.space.contains(apply_rows(self.left(g), row)):
                    coideal = False
                    witnesses["coideal"] = (f"left translate by {word_text((g,), shifted=True)} of the vector "
                                            f"with pivot {self.dual.word_label(min(row))} leaves the span")
                    break
            if not coideal:
                break
        return {"contains_counit": contains, "k_stable": k_stable, "coideal": coideal, "witnesses": witnesses}

    # Classification

    def _closed_functionals(self, T: RowSpace, k: int) -> Dict[Weight, List[Vector]]:
        """A_k: functionals within degree k all of whose left translates lie in T"""
        groups: Dict[Weight, List[int]] = {}
        for c in self.dual.coords_up_to(k):
            groups.setdefault(self.coord_weights[c], []).append(c)
        result: Dict[Weight, List[Vector]] = {}
        for weight, cols in groups.items():
            rows: Dict[Tuple[ZGen, int], Vector] = {}
            for g in self.generators:
                columns = self.left_columns(g)
                for sigma in cols:
                    column = columns.get(sigma)
                    if not column:
                        continue
                    for rho, value in T.residual(column).items():
                        rows.setdefault((g, rho), {})[sigma] = value
            basis = nullspace(list(rows.values()), cols)
            if basis:
                result[weight] = basis
        return result

    def _symbols(self, vectors: Sequence[Vector], k: int) -> RowSpace:
        return RowSpace({i: v for i, v in vec.items() if self.dual.length(i) == k} for vec in vectors)

    def _lift(self, closed: Sequence[Vector], k: int, hw: Vector, weight: Weight) -> Vector:
        """A highest-weight functional in span(closed) whose degree-k symbol is hw"""
        p = len(closed)
        rows: Dict[Any, Vector] = {}
        for j, vector in enumerate(closed):
            for t, g in enumerate(self.raising):
                for rho, value in apply_rows(self.right(g), vector).items():
                    rows.setdefault(("E", t, rho), {})[j] = value
            for rho, value in vector.items():
                if self.dual.length(rho) == k:
                    rows.setdefault(("S", rho), {})[j] = value
        for rho, value in hw.items():
            rows.setdefault(("S", rho), {})[p] = -value
        for solution in nullspace(list(rows.values()), range(p + 1)):
            s = solution.get(p)
            if s:
                lifted: Vector = {}
                for j, c in solution.items():
                    if j < p:
                        vec_add(lifted, closed[j], c / s)
                return lifted
        raise IncoherentSearch(f"no highest-weight lift of weight {weight} in degree {k}")

    def symbol_highest_weights(self, weight: Weight, k: int) -> List[Vector]:
        """Highest weight vectors among all degree-k symbols of one weight"""
        cols = [c for c in self.dual.coords_of_length(k) if self.coord_weights[c] == weight]
        return self.highest_weight_vectors([{c: DOMAIN.one} for c in cols], degree=k)

    def symbol_multiplicities(self, k: int) -> Dict[Weight, int]:
        """Multiplicity of every highest weight among the degree-k symbols"""
        result = {}
        for weight in sorted({self.coord_weights[c] for c in self.dual.coords_of_length(k)}):
            count = len(self.symbol_highest_weights(weight, k))
            if count:
                result[weight] = count
        return result

    def solve_multiplicity(self, weight: Weight, k: int, admissible: RowSpace) -> Tuple[int, List[Vector]]:
        """Multiplicity d of a highest weight and the combinations of its d copies lying in the admissible span.

        The admissible span is the degree-k symbols of the closed functionals, so
        the solutions are the highest weight vectors whose constituent passes the
        coideal closure conditions.
        """
        candidates = self.symbol_highest_weights(weight, k)
        return len(candidates), intersect_span(candidates, admissible)

    def _extend(self, T: RowSpace, k: int, max_dim: int) -> List[RowSpace]:
        remaining = max_dim - (T.dim - 1)
        if remaining <= 0:
            return [T]
        closed = self._closed_functionals(T, k)
        previous = None
        constituents: List[Tuple[Weight, Vector, int]] = []
        for weight in sorted(closed):
            symbols = self._symbols(closed[weight], k)
            if not symbols.dim:
                continue
            multiplicity, hws = self.solve_multiplicity(weight, k, symbols)
            if not hws:
                continue
            size = self._closure([hws[0]], self.raising + self.lowering, degree=k).dim
            if size > remaining:
                continue
            if multiplicity > 2:
                raise UnsupportedMultiplicity(
                    f"weight {weight} in degree {k} has multiplicity {multiplicity} with constituent dimension {size}; "
                    f"only multiplicities 1 and 2 are solved", weight, multiplicity)
            if multiplicity == 2:
                self.pencils.append({"weight": weight, "degree": k, "solutions": len(hws)})
                logger.debug(f"Weight {weight} in degree {k}: multiplicity 2, closure conditions leave {len(hws)} solution(s)")
            if len(hws) == 2:
                raise UnsupportedMultiplicity(
                    f"weight {weight} in degree {k}: both copies satisfy the closure conditions, "
                    f"so the constituents form a one-parameter family", weight, multiplicity)
            if previous is None:
                previous = self._closed_functionals(T, k - 1)
            lower = len(self.highest_weight_vectors(previous.get(weight, [])))
            inside = len(self.highest_weight_vectors([row for row in T.basis() if self.vector_weight(row) == weight]))
            if lower > inside:
                raise UnsupportedMultiplicity(
                    f"weight {weight}: {lower - inside} closed lower-degree vectors outside the space "
                    f"make the lift of the degree-{k} constituent non-unique", weight, len(hws) + lower - inside)
            constituents.append((weight, hws[0], size))
        logger.debug(f"Degree {k}: {len(constituents)} admissible constituents over a space of dim {T.dim}")
        extensions = []
        for count in range(len(constituents) + 1):
            for chosen in combinations(constituents, count):
                total = sum(size for _, _, size in chosen)
                if total > remaining:
                    continue
                extended = T.copy()
                for weight, hw, size in chosen:
                    lifted = self._lift(closed[weight], k, hw, weight)
                    extended.extend(self._closure([lifted], self.raising + self.lowering).basis())
                if extended.dim != T.dim + total:
                    raise IncoherentSearch(f"extension has dim {extended.dim}, expected {T.dim + total}")
                for row in extended.basis():
                    for g in self.generators:
                        if not extended.contains(apply_rows(self.left(g), row)):
                            raise IncoherentSearch(f"extension of dim {extended.dim} is not closed under {g}")
                extensions.append(extended)
        return extensions

    def label(self, space: RowSpace) -> str:
        gamma = space.dim - 1
        rdim = self.r * (self.N - self.r)
        v2 = self.r * (self.r - 1) * (self.N - self.r) * (self.N - self.r - 1) // 4
        charges = {self.charge(self.vector_weight(row)) for row in space.basis()[1:]}
        if gamma == 0:
            return "T0"
        if charges == {1} and gamma == rdim:
            return "T+"
        if charges == {-1} and gamma == rdim:
            return "T-"
        if charges == {1, -1} and gamma == 2 * rdim:
            return "T"
        if self.N == 2 and gamma == 2 and charges in ({1, 2}, {-1, -2}):
            return "T1,+" if 1 in charges else "T1,-"
        if v2 and gamma == rdim + v2 and charges in ({1, 2}, {-1, -2}):
            return "T2,+" if 1 in charges else "T2,-"
        return f"U{gamma}"

    def tangent_space(self, space: RowSpace, name: str = "") -> TangentSpace:
        weights = Counter(self.vector_weight(row) for row in space.basis())
        T = TangentSpace(space, name or self.label(space), dict(weights))
        T.certificates = self.certify(T)
        return T

    def certify(self, T: TangentSpace) -> Dict[str, Any]:
        certificates = self.is_tangent_space(T)
        ideal = self.ideal_of(T)
        certificates["round_trip"] = self.tangent_of(ideal).key() == T.key()
        certificates["dimension_law"] = ideal.codim + 1 == T.dim
        return certificates

    def classify(self, max_dim: Optional[int] = None) -> List[TangentSpace]:
        rdim = self.r * (self.N - self.r)
        max_dim = 2 * rdim if max_dim is None else max_dim
        if max_dim > 2 * rdim:
            logger.warning(f"max_dim {max_dim} is beyond the classified range {2 * rdim}")
        self.audit = step4_audit(self.N, self.r, self.m, max_dim)
        if not self.audit.certified:
            logger.error(f"Classification refused: {'; '.join(self.audit.reasons)}")
            raise AuditRefusal(self.audit)
        states = [RowSpace([self.counit_vector])]
        for k in range(1, self.m + 1):
            merged: Dict[Tuple, RowSpace] = {}
            for T in states:
                for space in self._extend(T, k, max_dim):
                    merged.setdefault(space.key(), space)
            states = [merged[key] for key in sorted(merged, key=lambda t: (len(t), t))]
            logger.info(f"Degree {k} searched: {len(states)} candidate spaces")
        spaces = [self.tangent_space(space) for space in states]
        spaces.sort(key=lambda T: (T.gamma_dim, T.name))
        logger.info(f"Classification ({self.N},{self.r}): {[T.name for T in spaces]}")
        return spaces

    # Correspondence with left ideals

    def ideal_of(self, T: TangentSpace) -> IdealTruncation:
        columns = [i for i in range(self.dual.dim) if self.dual.length(i) >= 1]
        space = RowSpace(self._blockwise_nullspace(T.basis(), columns))
        return IdealTruncation(space, self.m, len(columns))

    def is_left_ideal(self, ideal: IdealTruncation) -> bool:
        for b in ideal.space.basis():
            for g in self.generators:
                image: Vector = {}
                for sigma, c in b.items():
                    vec_add(image, self.dual.reduce_shifted((g,) + self.dual.words[sigma]), c)
                if not ideal.space.contains(image):
                    return False
        return True

    def tangent_of(self, ideal: IdealTruncation) -> TangentSpace:
        space = RowSpace(self._blockwise_nullspace(ideal.space.basis(), range(self.dual.dim)))
        return TangentSpace(space, weights=dict(Counter(self.vector_weight(row) for row in space.basis())))

    # Induced representations

    def induced_rep(self, T: TangentSpace) -> InducedRep:
        """rho(z)[i][j] = coefficient of basis_j in f_i(z .) for the rref basis f_i of T"""
        basis = T.basis()
        pivots = sorted(T.space.rows)
        n = len(basis)
        matrices: Dict[ZGen, DomainMatrix] = {}
        eps: Dict[ZGen, Any] = {}
        for g in self.generators:
            value = epsilon_gen(g, self.N, self.r).value
            eps[g] = value
            data = []
            for i, row in enumerate(basis):
                coords = T.space.coordinates(apply_rows(self.left(g), row))
                if coords is None:
                    raise IncoherentSearch(f"left translate by {g} leaves the space; not a tangent space")
                data.append([coords.get(p, DOMAIN.zero) + (value if i == j else DOMAIN.zero)
                             for j, p in enumerate(pivots)])
            matrices[g] = DomainMatrix(data, (n, n), DOMAIN)
        return InducedRep(basis, matrices, eps)

    def word_matrix(self, R: InducedRep, word: Sequence[ZGen]) -> DomainMatrix:
        result = _identity(R.dim)
        for g in word:
            result = result * R.matrices[g]
        return result

    def leibniz_holds(self, R: InducedRep) -> bool:
        """f_i(z^+ w) = sum_j rho(z^+)[i][j] f_j(w) on every basis word w"""
        for g in self.generators:
            shifted = R.matrices[g].to_list()
            for index, word in enumerate(self.dual.words):
                if len(word) >= self.m:
                    continue
                reduced = self.dual.reduce_shifted((g,) + word)
                for i, row in enumerate(R.basis):
                    lhs = DOMAIN.zero
                    for sigma, v in reduced.items():
                        if sigma in row:
                            lhs += row[sigma] * v
                    rhs = DOMAIN.zero
                    for j, other in enumerate(R.basis):
                        coeff = shifted[i][j] - (R.epsilon[g] if i == j else DOMAIN.zero)
                        if coeff and index in other:
                            rhs += coeff * other[index]
                    if lhs != rhs:
                        return False
        return True

    def relations_hold(self, R: InducedRep) -> List[str]:
        """Tags of relation instances that rho fails to respect"""
        failures = []
        for rule in relation_table(self.N, self.r):
            lhs = self.word_matrix(R, rule.lhs)
            rhs = DomainMatrix([[DOMAIN.zero] * R.dim for _ in range(R.dim)], (R.dim, R.dim), DOMAIN)
            for word, coeff in rule.rhs.terms.items():
                term = self.word_matrix(R, word)
                rhs = rhs + term * _identity(R.dim, coeff.value)
            if lhs != rhs:
                failures.append(f"{rule.case_tag}: {word_text(rule.lhs)}")
        return failures

    def nilpotency_report(self, R: InducedRep) -> Dict[str, Any]:
        n = R.dim
        report: Dict[str, Any] = {"dim": n, "offdiagonal": {}, "diagonal": {}, "spectrum": [],
                                  "transitions": [], "violations": []}
        for g, matrix in sorted(R.matrices.items()):
            label = word_text((g,))
            if g.i != g.j:
                index = _nilpotency_index(matrix)
                report["offdiagonal"][label] = index
                if index is None:
                    report["violations"].append(f"{label} is not nilpotent")
                continue
            shifted = matrix - _identity(n, R.epsilon[g])
            index = _nilpotency_index(shifted)
            report["diagonal"][word_text((g,), shifted=True)] = index
            if index is None:
                report["violations"].append(f"{word_text((g,), shifted=True)} is not nilpotent")
            eps = R.epsilon[g]
            target = [DOMAIN.one if t == 0 else (comb(n, t) * (-eps) ** t if eps else DOMAIN.zero)
                      for t in range(n + 1)]
            if list(matrix.charpoly()) != target:
                report["violations"].append(f"characteristic polynomial of {label} is not (x - eps)^{n}")
        if not any("characteristic" in v for v in report["violations"]):
            report["spectrum"].append([format_field_element(R.epsilon[ZGen(i, i)]) for i in range(1, self.N + 1)])
        report["transitions"] = self._transitions(R)
        for entry in report["transitions"]:
            if not entry["eigenvector"]:
                report["violations"].append(f"{entry['generator']} maps a common eigenvector off the eigenvectors")
            elif not entry["matches"]:
                report["violations"].append(f"{entry['generator']}: eigenvalues {entry['mu']} differ from {entry['expected']}")
        return report

    @staticmethod
    def _precedes(h: ZGen, g: ZGen) -> bool:
        """Order on V+ (row, then column ascending) and on V- (row, then column descending)"""
        if g.i < g.j:
            return h.i < h.j and (h.i, h.j) < (g.i, g.j)
        return h.i > h.j and (h.i, h.j) > (g.i, g.j)

    def expected_eigenvalues(self, g: ZGen, eigenvalues: Sequence[Any]) -> List[Any]:
        """Eigenvalues of z_nn on z_kl v when v is a common eigenvector killed by all smaller z_ij"""
        k, l = g.i, g.j
        lam = list(eigenvalues)
        mu = list(lam)
        if k < l:
            q_2 = RatFunc.q_power(-2).value
            mu[k - 1] = q_2 * lam[k - 1]
            mu[l - 1] = lam[l - 1] + (1 - q_2) * lam[k - 1]
        else:
            q2 = RatFunc.q_power(2).value
            shift = RatFunc.q_power(2 * k - 2 * self.N - 1).value
            mu[k - 1] = q2 * lam[k - 1] + (1 - q2) * shift
            mu[l - 1] = lam[l - 1] + (1 - q2) * lam[k - 1] + (q2 - 1) * shift
        return mu

    def _transitions(self, R: InducedRep) -> List[Dict[str, Any]]:
        """Eigenvalue changes of common eigenvectors under off-diagonal generators"""
        n = R.dim
        entries = {g: matrix.to_list() for g, matrix in R.matrices.items()}

        def act_on(g: ZGen, v: Vector) -> Vector:
            image: Vector = {}
            for i in range(n):
                total = DOMAIN.zero
                for j, x in v.items():
                    if entries[g][i][j]:
                        total += entries[g][i][j] * x
                if total:
                    image[i] = total
            return image

        diagonal = [ZGen(i, i) for i in range(1, self.N + 1)]
        stacked = []
        for g in diagonal:
            shifted = (R.matrices[g] - _identity(n, R.epsilon[g])).to_list()
            stacked.extend({j: x for j, x in enumerate(row) if x} for row in shifted)
        lam = [R.epsilon[g] for g in diagonal]
        found = []
        for v in nullspace(stacked, range(n)):
            for g in self.generators:
                if g.i == g.j or any(act_on(h, v) for h in self.generators if self._precedes(h, g)):
                    continue
                w = act_on(g, v)
                if not w:
                    continue
                expected = self.expected_eigenvalues(g, lam)
                values: Optional[List[Any]] = []
                pivot = min(w)
                for h in diagonal:
                    image = act_on(h, w)
                    ratio = image.get(pivot, DOMAIN.zero) / w[pivot]
                    if vec_scale(w, ratio) != image:
                        values = None
                        break
                    values.append(ratio)
                found.append({"generator": word_text((g,)), "block": "V+" if g.i < g.j else "V-",
                              "eigenvector": values is not None,
                              "matches": values == expected,
                              "mu": None if values is None else [format_field_element(x) for x in values],
                              "expected": [format_field_element(x) for x in expected]})
        return found


# Convenience entry points

def primitives(N: int, r: int, k: int = 2, side: Optional[str] = None,
               analyzer: Optional[TangentAnalyzer] = None) -> List[Functional]:
    analyzer = analyzer or TangentAnalyzer(N, r, max(k, 1))
    return analyzer.primitives(k, side)


def isotypic_decompose(N: int, r: int, k: int, side: str = "+",
                       analyzer: Optional[TangentAnalyzer] = None) -> List[Dict[str, Any]]:
    if k > 3:
        raise ValueError("isotypic decomposition is limited to degree 3")
    analyzer = analyzer or TangentAnalyzer(N, r, k)
    return analyzer.isotypic_decompose(k, side)


def classify(N: int, r: int, max_dim: Optional[int] = None, truncation: int = 3, **options) -> List[TangentSpace]:
    return TangentAnalyzer(N, r, truncation, **options).classify(max_dim)
