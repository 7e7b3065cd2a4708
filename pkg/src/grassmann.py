from typing import Callable, Dict, Iterable, List, Optional, Tuple, Union
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import product
import logging
import re

from qfield import ONE, ZERO, Q, QHAT, RatFunc, Scalar
from uq import GeneratorSymbol, UElement, coproduct_tensor, counit

logger = logging.getLogger(__name__)

DEFAULT_REWRITE_BUDGET = 10_000


class RewriteBudgetExceeded(RuntimeError):
    """Raised when reordering a word does not terminate within the step budget"""

    def __init__(self, message: str, trace: List[str]):
        super().__init__(message)
        self.trace = trace


@dataclass(frozen=True, order=True)
class ZGen:
    """Generator z_{ij} of the quantum Grassmannian"""
    i: int
    j: int

    def __post_init__(self):
        if self.i < 1 or self.j < 1:
            raise ValueError(f"z-indices must be positive, got ({self.i},{self.j})")

    def validate(self, N: int) -> "ZGen":
        if self.i > N or self.j > N:
            raise ValueError(f"z[{self.i},{self.j}] is out of range for N={N}")
        return self

    @property
    def block(self) -> str:
        """'-' for V_-, '0' for V_0, '+' for V_+"""
        if self.i > self.j:
            return "-"
        return "0" if self.i == self.j else "+"

    @property
    def order_key(self) -> Tuple[int, int, int]:
        # V_- by (i, j), then V_0 by i, then V_+ by decreasing (i, j)
        if self.i > self.j:
            return (0, self.i, self.j)
        if self.i == self.j:
            return (1, self.i, 0)
        return (2, -self.i, -self.j)

    def weight(self, N: int) -> Tuple[int, ...]:
        return tuple(int(k < self.i) - int(k < self.j) for k in range(1, N))

    def __str__(self) -> str:
        return f"z[{self.i},{self.j}]"


def z(i: int, j: int) -> ZGen:
    return ZGen(i, j)


ZWord = Tuple[ZGen, ...]


def word_text(word: ZWord, shifted: bool = False) -> str:
    if not word:
        return "1"
    prefix = "z+" if shifted else "z"
    return "*".join(f"{prefix}[{g.i},{g.j}]" for g in word)


_ZTOKEN = re.compile(r"^z(\+?)\[(\d+),(\d+)\]$")


def parse_zword(text: str) -> Tuple[ZWord, bool]:
    """Read "z[1,2]*z[2,1]" or "z+[1,2]"; returns the word and whether it is shifted"""
    text = text.strip()
    if text in ("", "1"):
        return (), False
    letters, flags = [], set()
    for token in text.split("*"):
        match = _ZTOKEN.match(token.strip())
        if not match:
            raise ValueError(f"Cannot parse z-generator token '{token}'")
        flags.add(bool(match.group(1)))
        letters.append(ZGen(int(match.group(2)), int(match.group(3))))
    if len(flags) > 1:
        raise ValueError(f"Word mixes shifted and plain generators: '{text}'")
    return tuple(letters), flags.pop()


def word_weight(word: ZWord, N: int) -> Tuple[int, ...]:
    total = [0] * (N - 1)
    for g in word:
        for k, w in enumerate(g.weight(N)):
            total[k] += w
    return tuple(total)


@dataclass
class BElement:
    """Element of B as a combination of z-words; the empty word is 1"""
    terms: Dict[ZWord, RatFunc] = field(default_factory=dict)

    def __post_init__(self):
        cleaned: Dict[ZWord, RatFunc] = {}
        for word, coeff in self.terms.items():
            coeff = RatFunc.coerce(coeff)
            total = cleaned.get(tuple(word), ZERO) + coeff
            if total.is_zero():
                cleaned.pop(tuple(word), None)
            else:
                cleaned[tuple(word)] = total
        self.terms = cleaned

    @classmethod
    def one(cls) -> "BElement":
        return cls({(): ONE})

    @classmethod
    def zero(cls) -> "BElement":
        return cls({})

    @classmethod
    def word(cls, *letters: ZGen, coeff: Scalar = ONE) -> "BElement":
        return cls({tuple(letters): RatFunc.coerce(coeff)})

    @classmethod
    def constant(cls, value: Scalar) -> "BElement":
        return cls({(): RatFunc.coerce(value)})

    def is_zero(self) -> bool:
        return not self.terms

    def __add__(self, other: "BElement") -> "BElement":
        merged = dict(self.terms)
        for word, coeff in other.terms.items():
            merged[word] = merged.get(word, ZERO) + coeff
        return BElement(merged)

    def __neg__(self) -> "BElement":
        return BElement({w: -c for w, c in self.terms.items()})

    def __sub__(self, other: "BElement") -> "BElement":
        return self + (-other)

    def __mul__(self, other: Union["BElement", Scalar]) -> "BElement":
        if isinstance(other, BElement):
            result: Dict[ZWord, RatFunc] = {}
            for w1, c1 in self.terms.items():
                for w2, c2 in other.terms.items():
                    result[w1 + w2] = result.get(w1 + w2, ZERO) + c1 * c2
            return BElement(result)
        scalar = RatFunc.coerce(other)
        return BElement({w: c * scalar for w, c in self.terms.items()})

    def __rmul__(self, other: Scalar) -> "BElement":
        return self * other

    def __eq__(self, other) -> bool:
        return isinstance(other, BElement) and self.terms == other.terms

    @property
    def max_length(self) -> int:
        return max((len(w) for w in self.terms), default=0)

    def to_dict(self) -> Dict[str, str]:
        return {word_text(w): str(c) for w, c in sorted(self.terms.items(), key=lambda t: (len(t[0]), t[0]))}

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        return " + ".join(f"({c})*{w}" for w, c in self.to_dict().items())


# Counit, shifted generators

def epsilon_gen(g: ZGen, N: int, r: int) -> RatFunc:
    if g.i == g.j and g.i > r:
        return RatFunc.q_power(-2 * N - 1 + 2 * g.i)
    return ZERO


def epsilon(x: BElement, N: int, r: int) -> RatFunc:
    total = ZERO
    for word, coeff in x.terms.items():
        value = coeff
        for g in word:
            value = value * epsilon_gen(g, N, r)
            if value.is_zero():
                break
        total = total + value
    return total


def shifted(g: ZGen, N: int, r: int) -> BElement:
    """z^+ = z - eps(z)"""
    return BElement({(g,): ONE, (): -epsilon_gen(g, N, r)})


def shifted_expansion(word: ZWord, N: int, r: int) -> BElement:
    result = BElement.one()
    for g in word:
        result = result * shifted(g, N, r)
    return result


def trace_constant(N: int, r: int) -> RatFunc:
    """Value of z_11 + ... + z_NN, namely (1 - q^{-2s}) / (q - q^{-1}) with s = N - r"""
    s = N - r
    return (ONE - RatFunc.q_power(-2 * s)) / QHAT


# Left U-action

def _act_generator(g: GeneratorSymbol, x: ZGen, N: int) -> Dict[ZGen, RatFunc]:
    k, i, j = g.index, x.i, x.j
    d = lambda a, b: int(a == b)
    out: Dict[ZGen, RatFunc] = {}
    if g.kind == "E":
        if i == k:
            out[ZGen(i + 1, j)] = RatFunc.q_power(d(k, j) - d(k, j - 1))
        if j == k + 1:
            key = ZGen(i, j - 1)
            out[key] = out.get(key, ZERO) - Q
    elif g.kind == "F":
        if i == k + 1:
            out[ZGen(i - 1, j)] = ONE
        if j == k:
            key = ZGen(i, j + 1)
            out[key] = out.get(key, ZERO) - RatFunc.q_power(d(i, k) - d(i, k + 1) - 1)
    else:
        exponent = d(j, k) - d(j, k + 1) - d(i, k) + d(i, k + 1)
        if g.kind == "Kinv":
            exponent = -exponent
        out[x] = RatFunc.q_power(exponent)
    return {key: c for key, c in out.items() if not c.is_zero()}


def _act_word(word: Tuple[GeneratorSymbol, ...], x: ZGen, N: int) -> Dict[ZGen, RatFunc]:
    current = {x: ONE}
    for g in reversed(word):
        nxt: Dict[ZGen, RatFunc] = {}
        for gen, coeff in current.items():
            for image, c in _act_generator(g, gen, N).items():
                nxt[image] = nxt.get(image, ZERO) + coeff * c
        current = {key: c for key, c in nxt.items() if not c.is_zero()}
    return current


def act(g: Union[GeneratorSymbol, UElement], x: BElement, N: int) -> BElement:
    """Left action g |> x, extended to words through the iterated coproduct of g"""
    element = UElement.generator(g.validate(N)) if isinstance(g, GeneratorSymbol) else g
    result: Dict[ZWord, RatFunc] = {}
    tensors: Dict[int, Dict] = {}
    for word, coeff in x.terms.items():
        if not word:
            value = coeff * counit(element)
            if not value.is_zero():
                result[()] = result.get((), ZERO) + value
            continue
        L = len(word)
        if L not in tensors:
            tensors[L] = coproduct_tensor(element, L)
        for slots, c in tensors[L].items():
            partial: Dict[ZWord, RatFunc] = {(): coeff * c}
            for slot_word, letter in zip(slots, word):
                images = _act_word(slot_word, letter, N)
                if not images:
                    partial = {}
                    break
                partial = {w + (img,): pc * ic for w, pc in partial.items() for img, ic in images.items()}
            for w, value in partial.items():
                result[w] = result.get(w, ZERO) + value
    return BElement(result)


# Embedding into words in u^i_j and S(u^i_j)

@dataclass(frozen=True, order=True)
class MixedLetter:
    """u^row_col (kind "u") or S(u^row_col) (kind "Su")"""
    kind: str
    row: int
    col: int

    def __post_init__(self):
        if self.kind not in ("u", "Su"):
            raise ValueError(f"Unknown matrix coefficient kind: {self.kind}")

    def __str__(self) -> str:
        body = f"u^{self.row}_{self.col}"
        return body if self.kind == "u" else f"S({body})"


MixedWord = Tuple[MixedLetter, ...]


def embed(word: ZWord, N: int, r: int) -> Dict[MixedWord, RatFunc]:
    """z_ij -> sum_{k>r} q^{-2N-1+2k} u^k_i S(u^j_k), extended multiplicatively"""
    result: Dict[MixedWord, RatFunc] = {(): ONE}
    for g in word:
        g.validate(N)
        pieces = {
            (MixedLetter("u", k, g.i), MixedLetter("Su", g.j, k)): RatFunc.q_power(-2 * N - 1 + 2 * k)
            for k in range(r + 1, N + 1)
        }
        result = {w + p: c * pc for w, c in result.items() for p, pc in pieces.items()}
    return result


# Relation database

@dataclass
class RewriteRule:
    """lhs = rhs in B; lhs is a product of generators with coefficient 1"""
    lhs: ZWord
    rhs: BElement
    case_tag: str
    inverted_from: Optional[str] = None

    def residual(self) -> BElement:
        return BElement.word(*self.lhs) - self.rhs

    def inverted(self) -> "RewriteRule":
        """Solve the rule for the swapped product of its two letters"""
        if len(self.lhs) != 2:
            raise ValueError(f"Rule {self.case_tag} has no swapped product to solve for")
        swapped = (self.lhs[1], self.lhs[0])
        coeff = self.rhs.terms.get(swapped)
        if coeff is None:
            raise ValueError(f"Rule {self.case_tag} does not contain {word_text(swapped)}")
        rest = self.rhs - BElement.word(*swapped, coeff=coeff)
        rhs = (BElement.word(*self.lhs) - rest) * coeff.inv()
        return RewriteRule(swapped, rhs, self.case_tag, inverted_from=self.case_tag)

    def to_dict(self) -> Dict:
        return {
            "case_tag": self.case_tag,
            "lhs": word_text(self.lhs),
            "rhs": self.rhs.to_dict(),
            "inverted": self.inverted_from is not None,
        }


class _Terms:
    """Accumulator for right-hand sides"""

    def __init__(self):
        self.terms: Dict[ZWord, RatFunc] = {}

    def add(self, coeff: RatFunc, *letters: ZGen) -> "_Terms":
        key = tuple(letters)
        self.terms[key] = self.terms.get(key, ZERO) + coeff
        return self

    def sum_over(self, indices: Iterable[int], coeff: Callable[[int], RatFunc],
                 letters: Callable[[int], Tuple[ZGen, ...]]) -> "_Terms":
        for idx in indices:
            self.add(coeff(idx), *letters(idx))
        return self

    def build(self) -> BElement:
        return BElement(self.terms)


def _qp(e: int) -> RatFunc:
    return RatFunc.q_power(e)


QH2 = QHAT * QHAT


def _rules_0p(b: int, c: int, a: int) -> List[Tuple[str, BElement]]:
    """lhs z_bb z_ca with c < a"""
    zb, y = z(b, b), z(c, a)
    if b < c:
        return [("2.1", _Terms().add(ONE, y, zb).build())]
    if b == c:
        t = _Terms().add(_qp(-2), y, zb)
        t.sum_over(range(1, b), lambda i: -_qp(-1) * QHAT * _qp(2 * b - 2 * i), lambda i: (z(b, i), z(i, a)))
        return [("2.2", t.build())]
    if b < a:
        t = _Terms().add(ONE, y, zb).add(-Q * QHAT, z(c, b), z(b, a))
        t.sum_over(range(1, b), lambda i: -QH2 * _qp(2 * b - 2 * i), lambda i: (z(c, i), z(i, a)))
        second = _Terms().add(ONE, y, zb).add(-QHAT, z(b, a), z(c, b))
        return [("2.3", t.build()), ("2.3b", second.build())]
    if b == a:
        t = _Terms().add(ONE, y, zb)
        t.sum_over(range(1, a), lambda i: _qp(-1) * QHAT * _qp(2 * a - 2 * i), lambda i: (z(c, i), z(i, a)))
        return [("2.4", t.build())]
    return [("2.5", _Terms().add(ONE, y, zb).build())]


def _rules_0m(b: int, c: int, a: int) -> List[Tuple[str, BElement]]:
    """lhs z_bb z_ca with c > a"""
    zb, y = z(b, b), z(c, a)
    if b < a:
        return [("3.1", _Terms().add(ONE, y, zb).build())]
    if b == a:
        t = _Terms().add(_qp(2), y, zb)
        t.sum_over(range(1, b), lambda i: Q * QHAT * _qp(2 * b - 2 * i), lambda i: (z(c, i), z(i, b)))
        return [("3.2", t.build())]
    if b < c:
        t = _Terms().add(ONE, y, zb).add(Q * QHAT, z(c, b), z(b, a))
        t.sum_over(range(1, b), lambda i: QH2 * _qp(2 * b - 2 * i), lambda i: (z(c, i), z(i, a)))
        second = _Terms().add(ONE, y, zb).add(QHAT, z(b, a), z(c, b))
        return [("3.3", t.build()), ("3.3b", second.build())]
    if b == c:
        t = _Terms().add(ONE, y, zb)
        t.sum_over(range(1, b), lambda i: -_qp(-1) * QHAT * _qp(2 * b - 2 * i), lambda i: (z(b, i), z(i, a)))
        return [("3.4", t.build())]
    return [("3.5", _Terms().add(ONE, y, zb).build())]


def _rules_pm(d: int, b: int, c: int, a: int, N: int, r: int) -> List[Tuple[str, BElement]]:
    """lhs z_db z_ca with d < b and c > a"""
    x, y = z(d, b), z(c, a)
    swap = lambda coeff=ONE: _Terms().add(coeff, y, x)
    qinv_hat = _qp(-1) * QHAT
    if b < a:
        return [("4.1", swap().build())]
    if b == a:
        return [("4.2", swap(Q).build())]
    # now a < b
    if b < c:
        if d < a:
            return [("4.3", swap().add(QHAT, z(c, b), z(d, a)).build())]
        if d == a:
            t = swap(Q).add(QHAT, z(c, b), z(a, a))
            t.sum_over(range(1, a), lambda i: QHAT * _qp(2 * a - 2 * i), lambda i: (z(c, i), z(i, b)))
            return [("4.4", t.build())]
        return [("4.5", swap().add(QHAT, z(c, b), z(d, a)).build())]
    if b == c:
        if d < a:
            t = swap(_qp(-1)).add(qinv_hat, z(b, b), z(d, a))
            t.sum_over(range(1, b), lambda j: -qinv_hat * _qp(2 * b - 2 * j), lambda j: (z(d, j), z(j, a)))
            rules = [("4.6", t.build())]
            if a <= r < b:
                # z_ij z_jl with i < l <= r < j, rewritten through the projector relation
                u = swap(Q).add(Q * QHAT, z(b, b), z(d, a)).add(-Q * QHAT * _qp(2 * b - 2 * N - 1), z(d, a))
                u.sum_over(range(b + 1, N + 1), lambda m: Q * QHAT * _qp(2 * b - 2 * m), lambda m: (z(d, m), z(m, a)))
                rules.append(("ubdim", u.build()))
            return rules
        if d == a:
            t = swap().add(qinv_hat, z(b, b), z(a, a))
            t.sum_over(range(1, a), lambda j: qinv_hat * _qp(2 * a - 2 * j), lambda j: (z(b, j), z(j, b)))
            t.sum_over(range(1, b), lambda j: -qinv_hat * _qp(2 * b - 2 * j), lambda j: (z(a, j), z(j, a)))
            return [("4.7", t.build()), ("7.1", _rule_7_1(a, b))]
        t = swap(_qp(-1)).add(qinv_hat, z(d, a), z(b, b))
        t.sum_over(range(1, b), lambda j: -qinv_hat * _qp(2 * b - 2 * j), lambda j: (z(d, j), z(j, a)))
        return [("4.8", t.build())]
    # c < b
    if d < a:
        return [("4.9", swap().add(QHAT, z(d, a), z(c, b)).build()),
                ("4.9b", swap().add(QHAT, z(c, b), z(d, a)).build())]
    if d == a:
        t = swap(Q).add(QHAT, z(a, a), z(c, b))
        t.sum_over(range(1, a), lambda i: QHAT * _qp(2 * a - 2 * i), lambda i: (z(c, i), z(i, b)))
        return [("4.10", t.build())]
    if d < c:
        return [("4.11", swap().add(QHAT, z(d, a), z(c, b)).build())]
    if d == c:
        return [("4.12", swap(Q).build())]
    return [("4.13", swap().build())]


def _rule_7_1(a: int, b: int) -> BElement:
    """z_ab z_ba for a < b, fully in standard order"""
    mid = range(a + 1, b)
    low = range(1, a)
    t = _Terms().add(ONE, z(b, a), z(a, b))
    t.add(_qp(-1) * QHAT, z(a, a), z(b, b))
    t.sum_over(mid, lambda i: -QH2, lambda i: (z(a, a), z(i, i)))
    t.add(-Q * QHAT, z(a, a), z(a, a))
    t.sum_over(mid, lambda i: -Q * QHAT, lambda i: (z(i, a), z(a, i)))
    t.sum_over(low, lambda j: _qp(-1) * QHAT * _qp(2 * a - 2 * j), lambda j: (z(b, j), z(j, b)))
    t.sum_over(low, lambda j: Q * QHAT * _qp(2 * a - 2 * j), lambda j: (z(a, j), z(j, a)))
    for i in mid:
        t.sum_over(low, lambda j: -QH2 * _qp(2 * a - 2 * j), lambda j: (z(i, j), z(j, i)))
    return t.build()


def _rule_7_2(a: int, b: int) -> BElement:
    """z_ba z_ab for a < b"""
    low = range(1, a)
    t = _Terms().add(ONE, z(a, b), z(b, a))
    t.add(-_qp(-1) * QHAT, z(a, a), z(b, b))
    t.sum_over(low, lambda j: QH2, lambda j: (z(j, j), z(b, b)))
    t.sum_over(low, lambda j: -Q * QHAT, lambda j: (z(j, b), z(b, j)))
    t.sum_over(range(a, b), lambda j: _qp(-1) * QHAT * _qp(2 * b - 2 * j), lambda j: (z(a, j), z(j, a)))
    t.sum_over(low, lambda j: -_qp(2 * b - 2 * a) * QH2, lambda j: (z(j, j), z(a, a)))
    t.sum_over(low, lambda j: _qp(2 * b - 2 * a + 1) * QHAT, lambda j: (z(j, a), z(a, j)))
    for i in low:
        t.sum_over(range(a, b), lambda j: -QH2 * _qp(2 * b - 2 * j), lambda j: (z(i, j), z(j, i)))
    return t.build()


def _rules_pp(d: int, b: int, c: int, a: int) -> List[Tuple[str, BElement]]:
    """lhs z_db z_ca with d < b and c < a"""
    x, y = z(d, b), z(c, a)
    if b == c and b < a:
        first = _Terms().add(_qp(-1), y, x)
        first.sum_over(range(1, b), lambda i: -_qp(-1) * QHAT * _qp(2 * b - 2 * i), lambda i: (z(d, i), z(i, a)))
        induced = _Terms().add(_qp(-1), y, x)
        induced.sum_over(range(d + 1, b), lambda i: -QHAT, lambda i: (z(i, a), z(d, i)))
        induced.add(-Q * QHAT, z(d, d), z(d, a))
        induced.sum_over(range(1, d), lambda i: -Q * QHAT * _qp(2 * d - 2 * i), lambda i: (z(d, i), z(i, a)))
        return [("5.1", first.build()), ("6.1", induced.build())]
    if d == c and b < a:
        return [("5.2", _Terms().add(_qp(-1), y, x).build())]
    if d < c < a and b != c:
        t = _Terms().add(_qp(int(a == b)), y, x)
        if a < b:
            t.add(-QHAT, z(c, b), z(d, a))
        return [("5.3", t.build())]
    return []


def _rules_mm(d: int, b: int, c: int, a: int, N: int) -> List[Tuple[str, BElement]]:
    """lhs z_db z_ca with d > b and c > a"""
    x, y = z(d, b), z(c, a)
    if b == c and b > a:
        first = _Terms().add(_qp(-1), y, x)
        first.sum_over(range(1, b), lambda j: -QHAT * _qp(-1) * _qp(2 * b - 2 * j), lambda j: (z(d, j), z(j, a)))
        second = _Terms().add(Q, y, x).add(-_qp(2 * b - 2 * N) * QHAT, z(d, a))
        second.sum_over(range(b + 1, N + 1), lambda j: Q * QHAT * _qp(2 * b - 2 * j), lambda j: (z(d, j), z(j, a)))
        induced = _Terms().add(Q, y, x).add(-QHAT * _qp(-1) * _qp(2 * d - 2 * N - 1), z(d, a))
        induced.sum_over(range(b + 1, d), lambda j: QHAT, lambda j: (z(j, a), z(d, j)))
        induced.add(_qp(-1) * QHAT, z(d, d), z(d, a))
        induced.sum_over(range(d + 1, N + 1), lambda j: _qp(-1) * QHAT * _qp(2 * d - 2 * j), lambda j: (z(d, j), z(j, a)))
        return [("8.1", first.build()), ("8.1b", second.build()), ("9.1", induced.build())]
    if d == c and b > a:
        return [("8.2", _Terms().add(Q, y, x).build())]
    if d > c > a and b != c:
        t = _Terms().add(_qp(-int(a == b)), y, x)
        if a > b:
            t.add(-QHAT, z(d, a), z(c, b))
        return [("8.3", t.build())]
    return []


def pair_rules(x: ZGen, y: ZGen, N: int, r: int) -> List[RewriteRule]:
    """Every tabulated relation whose left side is the product x*y"""
    d, b, c, a = x.i, x.j, y.i, y.j
    blocks = x.block + y.block
    if blocks == "00":
        found = [("1.1", _Terms().add(ONE, y, x).build())] if d > c else []
    elif blocks == "0+":
        found = _rules_0p(b, c, a)
    elif blocks == "0-":
        found = _rules_0m(b, c, a)
    elif blocks == "+-":
        found = _rules_pm(d, b, c, a, N, r)
    elif blocks == "++":
        found = _rules_pp(d, b, c, a)
    elif blocks == "--":
        found = _rules_mm(d, b, c, a, N)
    elif blocks == "-+" and (d, b) == (a, c):
        found = [("7.2", _rule_7_2(b, d))]
    else:
        found = []
    return [RewriteRule((x, y), rhs, tag) for tag, rhs in found]


def trace_rule(N: int, r: int) -> RewriteRule:
    rhs = BElement.constant(trace_constant(N, r))
    for i in range(2, N + 1):
        rhs = rhs - BElement.word(z(i, i))
    return RewriteRule((z(1, 1),), rhs, "trace")


def proj_rule(i: int, k: int, N: int) -> RewriteRule:
    t = _Terms()
    t.sum_over(range(1, N + 1), lambda n: _qp(2 * N + 1 - 2 * n), lambda n: (z(i, n), z(n, k)))
    return RewriteRule((z(i, k),), t.build(), "proj")


@lru_cache(maxsize=None)
def _relation_table(N: int, r: int) -> Tuple[RewriteRule, ...]:
    gens = all_generators(N)
    rules: List[RewriteRule] = []
    for x, y in product(gens, repeat=2):
        rules.extend(pair_rules(x, y, N, r))
    rules.append(trace_rule(N, r))
    rules.extend(proj_rule(g.i, g.j, N) for g in gens)
    logger.info(f"Relation table for N={N}, r={r}: {len(rules)} rules")
    return tuple(rules)


def relation_table(N: int, r: int) -> List[RewriteRule]:
    if not 1 <= r <= N - 1:
        raise ValueError(f"r={r} must lie in 1..{N - 1}")
    return list(_relation_table(N, r))


def all_generators(N: int) -> List[ZGen]:
    return [ZGen(i, j) for i in range(1, N + 1) for j in range(1, N + 1)]


# Reordering into V_- V_0 V_+ standard form

# Forms that are kept in the table but not used for rewriting
_NOT_DISPATCHED = {"2.3", "3.3", "4.9", "6.1", "7.1", "ubdim", "8.1b", "9.1"}


def is_standard(word: ZWord) -> bool:
    return all(word[k].order_key <= word[k + 1].order_key for k in range(len(word) - 1))


@lru_cache(maxsize=None)
def reduction_rule(x: ZGen, y: ZGen, N: int, r: int) -> Optional[RewriteRule]:
    """Rule used to rewrite an out-of-order pair x*y, or None when already ordered"""
    if x.order_key <= y.order_key:
        return None
    if x.block == "+" and y.block == "0":
        candidates = [rule.inverted() for rule in pair_rules(y, x, N, r)]
    else:
        candidates = pair_rules(x, y, N, r)
    for rule in candidates:
        if rule.case_tag not in _NOT_DISPATCHED:
            return rule
    raise LookupError(f"No relation rewrites {x}*{y}")


def reorder(x: Union[ZWord, BElement], N: int, r: int, max_len: Optional[int] = None,
            budget: int = DEFAULT_REWRITE_BUDGET) -> BElement:
    """Rewrite into a combination of standard-form words, leftmost pair first"""
    element = x if isinstance(x, BElement) else BElement.word(*x)
    if max_len is not None and element.max_length > max_len:
        raise ValueError(f"Word length {element.max_length} exceeds max_len={max_len}")
    pending: Dict[ZWord, RatFunc] = dict(element.terms)
    result: Dict[ZWord, RatFunc] = {}
    trace: List[str] = []
    steps = 0
    while pending:
        word, coeff = pending.popitem()
        position = next((k for k in range(len(word) - 1)
                         if word[k].order_key > word[k + 1].order_key), None)
        if position is None:
            total = result.get(word, ZERO) + coeff
            if total.is_zero():
                result.pop(word, None)
            else:
                result[word] = total
            continue
        steps += 1
        rule = reduction_rule(word[position], word[position + 1], N, r)
        trace.append(f"{word_text(word)} @{position}: {rule.case_tag}")
        if steps > budget:
            raise RewriteBudgetExceeded(f"Reordering exceeded {budget} steps", trace[-20:])
        prefix, suffix = word[:position], word[position + 2:]
        for piece, c in rule.rhs.terms.items():
            key = prefix + piece + suffix
            total = pending.get(key, ZERO) + coeff * c
            if total.is_zero():
                pending.pop(key, None)
            else:
                pending[key] = total
    logger.debug(f"Reordered {len(element.terms)} terms in {steps} steps")
    return BElement(result)


# Spanning words in the shifted generators

def spanning_words(N: int, r: int, k: int) -> List[ZWord]:
    """All words of length <= k in the z^+_{ij}, graded lexicographic"""
    if k < 0:
        raise ValueError("k must be non-negative")
    gens = all_generators(N)
    words: List[ZWord] = []
    for length in range(k + 1):
        words.extend(product(gens, repeat=length))
    return words
