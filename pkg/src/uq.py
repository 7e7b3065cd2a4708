from typing import Dict, List, Optional, Tuple, Union
from dataclasses import dataclass, field
from collections import Counter
from itertools import combinations_with_replacement
import logging
import re

from qfield import ONE, ZERO, Q, RatFunc, Scalar

logger = logging.getLogger(__name__)

KINDS = ("E", "F", "K", "Kinv")
CONVENTIONS = ("standard", "alternate")
INHOMOGENEOUS = "inhomogeneous"

Weight = Tuple[int, ...]


@dataclass(frozen=True, order=True)
class GeneratorSymbol:
    """Generator E_i, F_i, K_i or K_i^{-1} of U_q(sl_N)"""
    kind: str
    index: int

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"Unknown generator kind: {self.kind}")
        if self.index < 1:
            raise ValueError(f"Generator index must be positive, got {self.index}")

    def validate(self, N: int) -> "GeneratorSymbol":
        if not 1 <= self.index <= N - 1:
            raise ValueError(f"{self} is out of range for N={N}")
        return self

    @property
    def is_grouplike(self) -> bool:
        return self.kind in ("K", "Kinv")

    def inverse_kind(self) -> Optional["GeneratorSymbol"]:
        if self.kind == "K":
            return GeneratorSymbol("Kinv", self.index)
        if self.kind == "Kinv":
            return GeneratorSymbol("K", self.index)
        return None

    def weight(self, N: int) -> Weight:
        vec = [0] * (N - 1)
        if self.kind == "E":
            vec[self.index - 1] = 1
        elif self.kind == "F":
            vec[self.index - 1] = -1
        return tuple(vec)

    def __str__(self) -> str:
        return f"{self.kind}{self.index}"


def E(i: int) -> GeneratorSymbol:
    return GeneratorSymbol("E", i)


def F(i: int) -> GeneratorSymbol:
    return GeneratorSymbol("F", i)


def K(i: int) -> GeneratorSymbol:
    return GeneratorSymbol("K", i)


def Kinv(i: int) -> GeneratorSymbol:
    return GeneratorSymbol("Kinv", i)


Word = Tuple[GeneratorSymbol, ...]


def cancel_k(word: Word) -> Word:
    """Remove adjacent K_i K_i^{-1} pairs eagerly"""
    stack: List[GeneratorSymbol] = []
    for g in word:
        if stack and g.is_grouplike and stack[-1] == g.inverse_kind():
            stack.pop()
        else:
            stack.append(g)
    return tuple(stack)


@dataclass
class UElement:
    """Linear combination of generator words; the empty word is 1"""
    terms: Dict[Word, RatFunc] = field(default_factory=dict)

    def __post_init__(self):
        cleaned: Dict[Word, RatFunc] = {}
        for word, coeff in self.terms.items():
            coeff = RatFunc.coerce(coeff)
            word = cancel_k(tuple(word))
            total = cleaned.get(word, ZERO) + coeff
            if total.is_zero():
                cleaned.pop(word, None)
            else:
                cleaned[word] = total
        self.terms = cleaned

    @classmethod
    def one(cls) -> "UElement":
        return cls({(): ONE})

    @classmethod
    def zero(cls) -> "UElement":
        return cls({})

    @classmethod
    def generator(cls, g: GeneratorSymbol) -> "UElement":
        return cls({(g,): ONE})

    @classmethod
    def word(cls, *letters: GeneratorSymbol, coeff: Scalar = ONE) -> "UElement":
        return cls({tuple(letters): RatFunc.coerce(coeff)})

    def is_zero(self) -> bool:
        return not self.terms

    def __add__(self, other: "UElement") -> "UElement":
        merged = dict(self.terms)
        for word, coeff in other.terms.items():
            merged[word] = merged.get(word, ZERO) + coeff
        return UElement(merged)

    def __neg__(self) -> "UElement":
        return UElement({w: -c for w, c in self.terms.items()})

    def __sub__(self, other: "UElement") -> "UElement":
        return self + (-other)

    def __mul__(self, other: Union["UElement", Scalar]) -> "UElement":
        if isinstance(other, UElement):
            product: Dict[Word, RatFunc] = {}
            for w1, c1 in self.terms.items():
                for w2, c2 in other.terms.items():
                    word = cancel_k(w1 + w2)
                    product[word] = product.get(word, ZERO) + c1 * c2
            return UElement(product)
        scalar = RatFunc.coerce(other)
        return UElement({w: c * scalar for w, c in self.terms.items()})

    def __rmul__(self, other: Scalar) -> "UElement":
        return self * other

    def __eq__(self, other) -> bool:
        return isinstance(other, UElement) and self.terms == other.terms

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        pieces = []
        for word in sorted(self.terms, key=lambda w: (len(w), w)):
            body = "*".join(str(g) for g in word) or "1"
            pieces.append(f"({self.terms[word]})*{body}")
        return " + ".join(pieces)


def counit(x: UElement) -> RatFunc:
    total = ZERO
    for word, coeff in x.terms.items():
        if all(g.is_grouplike for g in word):
            total = total + coeff
    return total


# Matrices of the vector representation

def fundamental_matrix(g: GeneratorSymbol, N: int) -> List[List[RatFunc]]:
    """N x N matrix of g; rows and columns are 0-based lists for indices 1..N"""
    g.validate(N)
    i = g.index - 1
    matrix = [[ZERO] * N for _ in range(N)]
    if g.kind == "E":
        matrix[i][i + 1] = ONE
    elif g.kind == "F":
        matrix[i + 1][i] = ONE
    else:
        for k in range(N):
            matrix[k][k] = ONE
        up, down = (Q, Q.inv()) if g.kind == "K" else (Q.inv(), Q)
        matrix[i][i] = up
        matrix[i + 1][i + 1] = down
    return matrix


def matmul(a: List[List[RatFunc]], b: List[List[RatFunc]]) -> List[List[RatFunc]]:
    n = len(a)
    return [[sum((a[i][k] * b[k][j] for k in range(n)), ZERO) for j in range(n)] for i in range(n)]


def word_matrix(word: Word, N: int) -> List[List[RatFunc]]:
    result = [[ONE if i == j else ZERO for j in range(N)] for i in range(N)]
    for g in word:
        result = matmul(result, fundamental_matrix(g, N))
    return result


def element_matrix(x: UElement, N: int) -> List[List[RatFunc]]:
    result = [[ZERO] * N for _ in range(N)]
    for word, coeff in x.terms.items():
        m = word_matrix(word, N)
        result = [[result[i][j] + coeff * m[i][j] for j in range(N)] for i in range(N)]
    return result


# Hopf structure

Tensor = Dict[Tuple[Word, ...], RatFunc]

# (coefficient, left factor, right factor) of the coproduct of each generator kind
_COPRODUCT_SHAPE = {
    "E": lambda i: [((E(i),), (K(i),)), ((), (E(i),))],
    "F": lambda i: [((F(i),), ()), ((Kinv(i),), (F(i),))],
    "K": lambda i: [((K(i),), (K(i),))],
    "Kinv": lambda i: [((Kinv(i),), (Kinv(i),))],
}


def coproduct_generator(g: GeneratorSymbol) -> List[Tuple[Word, Word]]:
    return _COPRODUCT_SHAPE[g.kind](g.index)


def skew_primitive_partners(g: GeneratorSymbol) -> Tuple[Optional[GeneratorSymbol], Optional[GeneratorSymbol]]:
    """For Delta(g) = g (x) b + a (x) g return (a, b) as grouplike symbols or None for 1"""
    left, right = None, None
    for lhs, rhs in coproduct_generator(g):
        if lhs == (g,) and rhs:
            right = rhs[0]
        if rhs == (g,) and lhs:
            left = lhs[0]
    return left, right


def _coproduct_word(word: Word) -> List[Tuple[Word, Word]]:
    pieces: List[Tuple[Word, Word]] = [((), ())]
    for g in word:
        pieces = [(cancel_k(l1 + l2), cancel_k(r1 + r2))
                  for l1, r1 in pieces for l2, r2 in coproduct_generator(g)]
    return pieces


def coproduct_tensor(x: UElement, k: int) -> Tensor:
    """Iterated coproduct into the k-fold tensor power"""
    if k < 1:
        raise ValueError("coproduct_tensor needs k >= 1")
    result: Tensor = {}
    for word, coeff in x.terms.items():
        layer: List[Tuple[Word, ...]] = [(word,)]
        for _ in range(k - 1):
            layer = [slots[:-1] + (left, right)
                     for slots in layer for left, right in _coproduct_word(slots[-1])]
        for slots in layer:
            result[slots] = result.get(slots, ZERO) + coeff
    return {slots: c for slots, c in result.items() if not c.is_zero()}


def tensor_product(a: Tensor, b: Tensor) -> Tensor:
    """Slotwise product of two tensors of equal rank"""
    result: Tensor = {}
    for sa, ca in a.items():
        for sb, cb in b.items():
            slots = tuple(cancel_k(x + y) for x, y in zip(sa, sb))
            result[slots] = result.get(slots, ZERO) + ca * cb
    return {slots: c for slots, c in result.items() if not c.is_zero()}


_ANTIPODE = {
    "E": lambda i: UElement({(E(i), Kinv(i)): -ONE}),
    "F": lambda i: UElement({(K(i), F(i)): -ONE}),
    "K": lambda i: UElement.generator(Kinv(i)),
    "Kinv": lambda i: UElement.generator(K(i)),
}


def antipode(x: UElement) -> UElement:
    result = UElement.zero()
    for word, coeff in x.terms.items():
        image = UElement.one() * coeff
        for g in reversed(word):
            image = image * _ANTIPODE[g.kind](g.index)
        result = result + image
    return result


# Root vectors and the PBW basis of U/K^+U

@dataclass(frozen=True, order=True)
class Root:
    """Root vector letter: kind E or F with alpha_{i,j} = alpha_i + ... + alpha_j"""
    kind: str
    i: int
    j: int

    def weight(self, N: int) -> Weight:
        sign = 1 if self.kind == "E" else -1
        return tuple(sign if self.i <= k + 1 <= self.j else 0 for k in range(N - 1))

    def __str__(self) -> str:
        if self.i == self.j:
            return f"{self.kind}{self.i}"
        return f"{self.kind}[{self.i},{self.j}]"


def q_commutator_factors(kind: str, i: int, j: int, convention: str = "standard") -> Tuple[Root, Root, int]:
    """Root vector X_{i,j} = A*B - q^c * B*A; returns (A, B, c)"""
    if convention not in CONVENTIONS:
        raise ValueError(f"Unknown root vector convention: {convention}")
    flip = 1 if convention == "standard" else -1
    if kind == "E":
        return Root("E", i, j - 1), Root("E", j, j), -flip
    return Root("F", j, j), Root("F", i, j - 1), flip


def _root_element(root: Root, convention: str) -> UElement:
    if root.i == root.j:
        return UElement.generator(GeneratorSymbol(root.kind, root.i))
    left, right, c = q_commutator_factors(root.kind, root.i, root.j, convention)
    a, b = _root_element(left, convention), _root_element(right, convention)
    return a * b - b * a * RatFunc.q_power(c)


def root_vector(kind: str, i: int, j: int, r: int, N: int, convention: str = "standard") -> UElement:
    if kind not in ("E", "F"):
        raise ValueError(f"Root vectors exist for E and F only, got {kind}")
    if not (1 <= i <= r <= j <= N - 1):
        raise ValueError(f"({i},{j}) does not bracket r={r} for N={N}")
    return _root_element(Root(kind, i, j), convention)


def positive_roots(N: int, r: int) -> List[Tuple[int, int]]:
    """Phi^+_r in lexicographic order"""
    return [(i, j) for i in range(1, r + 1) for j in range(r, N)]


@dataclass(frozen=True)
class PbwMonomial:
    """Ordered product of root vectors: all F letters, then all E letters"""
    letters: Tuple[Root, ...]

    @property
    def f_exponents(self) -> Dict[Tuple[int, int], int]:
        return dict(Counter((x.i, x.j) for x in self.letters if x.kind == "F"))

    @property
    def e_exponents(self) -> Dict[Tuple[int, int], int]:
        return dict(Counter((x.i, x.j) for x in self.letters if x.kind == "E"))

    @property
    def degree(self) -> int:
        return len(self.letters)

    @property
    def charge_sign(self) -> int:
        kinds = {x.kind for x in self.letters}
        return 0 if len(kinds) != 1 else (1 if "E" in kinds else -1)

    def weight(self, N: int) -> Weight:
        total = [0] * (N - 1)
        for letter in self.letters:
            for k, w in enumerate(letter.weight(N)):
                total[k] += w
        return tuple(total)

    def to_uelement(self, convention: str = "standard") -> UElement:
        result = UElement.one()
        for letter in self.letters:
            result = result * _root_element(letter, convention)
        return result

    def __str__(self) -> str:
        if not self.letters:
            return "1"
        pieces = []
        for letter, count in Counter(self.letters).items():
            pieces.append(str(letter) if count == 1 else f"{letter}^{count}")
        return "*".join(pieces)


def pbw_monomials(N: int, r: int, max_deg: int) -> List[PbwMonomial]:
    if not 1 <= r <= N - 1:
        raise ValueError(f"r={r} must lie in 1..{N - 1}")
    roots = positive_roots(N, r)
    letters = [Root("F", i, j) for i, j in roots] + [Root("E", i, j) for i, j in roots]
    monomials = []
    for degree in range(max_deg + 1):
        for combo in combinations_with_replacement(letters, degree):
            monomials.append(PbwMonomial(tuple(combo)))
    logger.debug(f"{len(monomials)} PBW monomials for N={N}, r={r}, degree <= {max_deg}")
    return monomials


def weight(x: UElement, N: int) -> Union[Weight, str]:
    found = None
    for word in x.terms:
        total = [0] * (N - 1)
        for g in word:
            for k, w in enumerate(g.weight(N)):
                total[k] += w
        total = tuple(total)
        if found is None:
            found = total
        elif found != total:
            return INHOMOGENEOUS
    return found if found is not None else tuple([0] * (N - 1))


# Textual word syntax: "E1*E2*Kinv1", "F[1,3]"

_TOKEN = re.compile(r"^(E|F|Kinv|K)(?:(\d+)|\[(\d+),(\d+)\])$")


def parse_word(text: str, N: int, r: Optional[int] = None, convention: str = "standard") -> UElement:
    result = UElement.one()
    text = text.strip()
    if text in ("", "1"):
        return result
    for token in text.split("*"):
        match = _TOKEN.match(token.strip())
        if not match:
            raise ValueError(f"Cannot parse generator token '{token}'")
        kind, single, i, j = match.groups()
        if single is not None:
            result = result * UElement.generator(GeneratorSymbol(kind, int(single)).validate(N))
            continue
        if kind not in ("E", "F"):
            raise ValueError(f"Root vector syntax is only valid for E and F: '{token}'")
        i, j = int(i), int(j)
        if r is not None:
            factor = root_vector(kind, i, j, r, N, convention)
        else:
            if not 1 <= i <= j <= N - 1:
                raise ValueError(f"Root ({i},{j}) out of range for N={N}")
            factor = _root_element(Root(kind, i, j), convention)
        result = result * factor
    return result
