from typing import Any, Dict, List, Optional, Sequence, Tuple, Union
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import groupby
from math import comb
import json
import logging
import os

import numpy as np
import pandas as pd
from sympy.polys.domains import QQ
from sympy.polys.matrices import DomainMatrix

from qfield import DOMAIN, ZERO, Laurent, RatFunc, laurent_add, laurent_evaluate, laurent_to_field
from linalg import (RowSpace, Vector, exact_rank, first_independent_rows, inverse, nullspace,
                    probe_point, probe_rank, to_qq, vec_add)
from uq import (CONVENTIONS, GeneratorSymbol, PbwMonomial, Root, UElement, antipode, element_matrix,
                pbw_monomials, root_vector, skew_primitive_partners)
from grassmann import (BElement, MixedWord, ZGen, ZWord, act, all_generators, shifted_expansion,
                       spanning_words, word_text, word_weight)

logger = logging.getLogger(__name__)

Index = Tuple[int, ...]
Covector = Dict[Index, Laurent]
# row -> (column, sign, q-exponent) of a monomial matrix
SlotTable = Dict[int, Tuple[int, int, int]]


class KnondegViolation(RuntimeError):
    """The truncated pairing B/(B^+)^{k+1} x U_k is degenerate"""


def expected_dimension(N: int, r: int, k: int) -> int:
    """dim U_k = sum_{l<=k} C(2r(N-r)+l-1, l)"""
    n = 2 * r * (N - r)
    return sum(comb(n + l - 1, l) for l in range(k + 1))


def _theta(x: UElement) -> UElement:
    """Swap E <-> F and K <-> K^{-1}"""
    swap = {"E": "F", "F": "E", "K": "Kinv", "Kinv": "K"}
    return UElement({tuple(GeneratorSymbol(swap[g.kind], g.index) for g in word): c
                     for word, c in x.terms.items()})


def _monomial_table(matrix: List[List[RatFunc]]) -> SlotTable:
    table: SlotTable = {}
    for row, entries in enumerate(matrix, start=1):
        hits = [(col, value) for col, value in enumerate(entries, start=1) if not value.is_zero()]
        if not hits:
            continue
        if len(hits) > 1:
            raise ValueError("slot matrices must be monomial")
        col, value = hits[0]
        (exp, coeff), = value.to_laurent().items()
        table[row] = (col, coeff, exp)
    return table


class PairingEngine:
    """Evaluates <x, b> for x in U_q(sl_N) and b in B through tensor powers of the vector representation.

    A z-word of length L embeds into words in u and S(u) with 2L slots. The pairing
    with x is read off the covector v_L * Phi(x), where v_L encodes the embedding
    coefficients and Phi is the slot representation composed with the iterated
    coproduct. All slot matrices are monomial, so covectors stay sparse.
    """

    def __init__(self, N: int, r: int, convention: str = "standard", cache_dir: Optional[str] = None):
        if not 1 <= r <= N - 1:
            raise ValueError(f"r={r} must lie in 1..{N - 1}")
        if convention not in CONVENTIONS:
            raise ValueError(f"Unknown root vector convention: {convention}")
        self.N = N
        self.r = r
        self.convention = convention
        self.cache_dir = cache_dir
        self._tables: Dict[Tuple[GeneratorSymbol, str], SlotTable] = {}
        self._roots: Dict[Root, List[Tuple[Tuple[GeneratorSymbol, ...], Laurent]]] = {}
        self._covectors: Dict[Tuple[int, Tuple[Root, ...]], Covector] = {}
        self._loaded: set = set()
        logger.info(f"Pairing engine initialized for N={N}, r={r} ({convention})")

    # Slot representations

    def slot_table(self, g: GeneratorSymbol, kind: str) -> SlotTable:
        key = (g, kind)
        if key not in self._tables:
            element = UElement.generator(g.validate(self.N))
            if kind == "u":
                matrix = element_matrix(_theta(element), self.N)
            else:
                image = element_matrix(_theta(antipode(element)), self.N)
                matrix = [list(col) for col in zip(*image)]
            self._tables[key] = _monomial_table(matrix)
        return self._tables[key]

    @staticmethod
    def slot_kinds(L: int) -> Tuple[str, ...]:
        return ("u", "Su") * L

    def start_covector(self, L: int) -> Covector:
        """v_L = (x)_t sum_{k>r} q^{-2N-1+2k} e_{(k,k)}"""
        covector: Covector = {(): {0: 1}}
        for _ in range(L):
            covector = {idx + (k, k): {exp - 2 * self.N - 1 + 2 * k: c for exp, c in value.items()}
                        for idx, value in covector.items() for k in range(self.r + 1, self.N + 1)}
        return covector

    def apply_generator(self, covector: Covector, g: GeneratorSymbol, kinds: Sequence[str]) -> Covector:
        """covector * Phi(g) with Phi = (slot reps) o (iterated coproduct)"""
        n = len(kinds)
        result: Covector = {}
        if g.is_grouplike:
            tables = [self.slot_table(g, kind) for kind in kinds]
            for idx, value in covector.items():
                shift = sum(tables[t][idx[t]][2] for t in range(n))
                entry = result.setdefault(idx, {})
                laurent_add(entry, value, 1, shift)
            return {idx: v for idx, v in result.items() if v}
        left, right = skew_primitive_partners(g)
        tables = [self.slot_table(g, kind) for kind in kinds]
        left_tables = [self.slot_table(left, kind) for kind in kinds] if left else None
        right_tables = [self.slot_table(right, kind) for kind in kinds] if right else None
        for idx, value in covector.items():
            prefix = [0] * (n + 1)
            if left_tables:
                for t in range(n):
                    prefix[t + 1] = prefix[t] + left_tables[t][idx[t]][2]
            suffix = [0] * (n + 1)
            if right_tables:
                for t in range(n - 1, -1, -1):
                    suffix[t] = suffix[t + 1] + right_tables[t][idx[t]][2]
            for p in range(n):
                hit = tables[p].get(idx[p])
                if hit is None:
                    continue
                col, sign, exp = hit
                target = idx[:p] + (col,) + idx[p + 1:]
                entry = result.setdefault(target, {})
                laurent_add(entry, value, sign, exp + prefix[p] + suffix[p + 1])
        return {idx: v for idx, v in result.items() if v}

    def apply_word(self, covector: Covector, word: Sequence[GeneratorSymbol], kinds: Sequence[str]) -> Covector:
        for g in word:
            covector = self.apply_generator(covector, g, kinds)
            if not covector:
                break
        return covector

    # Root vectors and PBW monomials

    def _root_terms(self, root: Root) -> List[Tuple[Tuple[GeneratorSymbol, ...], Laurent]]:
        if root not in self._roots:
            element = root_vector(root.kind, root.i, root.j, self.r, self.N, self.convention)
            self._roots[root] = [(word, coeff.to_laurent()) for word, coeff in element.terms.items()]
        return self._roots[root]

    def apply_root(self, covector: Covector, root: Root, kinds: Sequence[str]) -> Covector:
        result: Covector = {}
        for word, coeff in self._root_terms(root):
            partial = self.apply_word(covector, word, kinds)
            for idx, value in partial.items():
                entry = result.setdefault(idx, {})
                for exp, c in coeff.items():
                    laurent_add(entry, value, c, exp)
        return {idx: v for idx, v in result.items() if v}

    def covector(self, monomial: Union[PbwMonomial, Tuple[Root, ...]], L: int) -> Covector:
        letters = monomial.letters if isinstance(monomial, PbwMonomial) else tuple(monomial)
        self._load_cache(L)
        key = (L, letters)
        if key not in self._covectors:
            if not letters:
                value = self.start_covector(L)
            else:
                value = self.apply_root(self.covector(letters[:-1], L), letters[-1], self.slot_kinds(L))
            self._covectors[key] = value
        return self._covectors[key]

    def apply_uelement(self, x: UElement, L: int) -> Dict[Index, RatFunc]:
        """Covector v_L * Phi(x) for an arbitrary element x"""
        start = self.start_covector(L)
        kinds = self.slot_kinds(L)
        result: Dict[Index, Any] = {}
        for word, coeff in x.terms.items():
            for idx, value in self.apply_word(start, word, kinds).items():
                result[idx] = result.get(idx, DOMAIN.zero) + coeff.value * laurent_to_field(value)
        return {idx: RatFunc(v) for idx, v in result.items() if v}

    # Pairing values

    @staticmethod
    def word_index(word: ZWord) -> Index:
        return tuple(k for g in word for k in (g.i, g.j))

    def pair_monomial(self, monomial: PbwMonomial, word: ZWord) -> Laurent:
        """<monomial, z-word> as a Laurent polynomial"""
        return self.covector(monomial, len(word)).get(self.word_index(word), {})

    def pair_monomial_element(self, monomial: PbwMonomial, b: BElement) -> RatFunc:
        total: Laurent = {}
        extra = ZERO
        for word, coeff in b.terms.items():
            value = self.pair_monomial(monomial, word)
            if not value:
                continue
            laurent = coeff.to_laurent()
            if laurent is None:
                extra = extra + coeff * RatFunc.from_laurent(value)
                continue
            for exp, c in laurent.items():
                laurent_add(total, value, c, exp)
        return RatFunc.from_laurent(total) + extra

    def pair(self, x: UElement, b: BElement,
             by_length: Optional[Dict[int, Dict[Index, RatFunc]]] = None) -> RatFunc:
        """<x, b>; pass by_length to share covectors of x across calls"""
        total = ZERO
        by_length = {} if by_length is None else by_length
        for word, coeff in b.terms.items():
            L = len(word)
            if L not in by_length:
                by_length[L] = self.apply_uelement(x, L)
            value = by_length[L].get(self.word_index(word))
            if value is not None:
                total = total + coeff * value
        return total

    def eval_mixed(self, x: UElement, word: MixedWord) -> RatFunc:
        """<x, w> for a word in u^i_j and S(u^i_j); S-slots read with swapped indices"""
        kinds = tuple(letter.kind for letter in word)
        rows = tuple(letter.row if letter.kind == "u" else letter.col for letter in word)
        cols = tuple(letter.col if letter.kind == "u" else letter.row for letter in word)
        total = DOMAIN.zero
        for g_word, coeff in x.terms.items():
            value = self.apply_word({rows: {0: 1}}, g_word, kinds).get(cols)
            if value:
                total += coeff.value * laurent_to_field(value)
        return RatFunc(total)

    def derived_action(self, g: GeneratorSymbol, x: ZGen) -> BElement:
        """g |> z_ij = sum_{kl} Phi(g)_{(k,l),(i,j)} z_kl"""
        kinds = self.slot_kinds(1)
        terms: Dict[ZWord, RatFunc] = {}
        for k in range(1, self.N + 1):
            for l in range(1, self.N + 1):
                value = self.apply_generator({(k, l): {0: 1}}, g, kinds).get((x.i, x.j))
                if value:
                    terms[(ZGen(k, l),)] = RatFunc.from_laurent(value)
        return BElement(terms)

    # Persistence and parallel precomputation

    def _cache_path(self, L: int) -> Optional[str]:
        if not self.cache_dir:
            return None
        return os.path.join(self.cache_dir, f"pairing_N{self.N}_r{self.r}_{self.convention}_L{L}.json")

    def _load_cache(self, L: int):
        if L in self._loaded:
            return
        self._loaded.add(L)
        path = self._cache_path(L)
        if not path or not os.path.exists(path):
            return
        try:
            with open(path, "r", encoding="utf-8") as fh:
                payload = json.load(fh)
        except (OSError, json.JSONDecodeError) as e:
            logger.warning(f"Ignoring unreadable pairing cache {path}: {e}")
            return
        for key, entries in payload.items():
            self._covectors[(L, _decode_letters(key))] = _decode_covector(entries)
        logger.info(f"Loaded {len(payload)} covectors from {path}")

    def save_cache(self, L: int):
        path = self._cache_path(L)
        if not path:
            return
        os.makedirs(self.cache_dir, exist_ok=True)
        payload = {_encode_letters(letters): _encode_covector(cov)
                   for (length, letters), cov in sorted(self._covectors.items(), key=lambda t: _encode_letters(t[0][1]))
                   if length == L}
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, sort_keys=True)
        logger.info(f"Saved {len(payload)} covectors to {path}")

    def precompute(self, monomials: Sequence[PbwMonomial], L: int, jobs: int = 1):
        self._load_cache(L)
        missing = [u for u in monomials if (L, u.letters) not in self._covectors]
        if not missing:
            return
        if jobs > 1 and len(missing) > 1:
            chunks = [list(group) for _, group in groupby(missing, key=lambda u: u.letters[:1])]
            tasks = [(self.N, self.r, self.convention, L, [u.letters for u in chunk]) for chunk in chunks]
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                for batch in pool.map(_covector_batch, tasks):
                    for key, entries in batch:
                        self._covectors[(L, _decode_letters(key))] = _decode_covector(entries)
        else:
            for u in missing:
                self.covector(u, L)
        logger.debug(f"Computed {len(missing)} covectors of length {L}")
        self.save_cache(L)


def _encode_letters(letters: Tuple[Root, ...]) -> str:
    return "|".join(f"{x.kind}:{x.i}:{x.j}" for x in letters)


def _decode_letters(text: str) -> Tuple[Root, ...]:
    if not text:
        return ()
    letters = []
    for part in text.split("|"):
        kind, i, j = part.split(":")
        letters.append(Root(kind, int(i), int(j)))
    return tuple(letters)


def _encode_covector(covector: Covector) -> Dict[str, Dict[str, int]]:
    return {",".join(map(str, idx)): {str(e): c for e, c in value.items()} for idx, value in covector.items()}


def _decode_covector(entries: Dict[str, Dict[str, int]]) -> Covector:
    return {tuple(int(k) for k in key.split(",") if k): {int(e): int(c) for e, c in value.items()}
            for key, value in entries.items()}


def _covector_batch(task) -> List[Tuple[str, Dict]]:
    """Worker entry point: covectors for one chunk of monomials sharing a first letter"""
    N, r, convention, L, letter_lists = task
    engine = PairingEngine(N, r, convention)
    return [(_encode_letters(letters), _encode_covector(engine.covector(letters, L))) for letters in letter_lists]


# Rank computations

def rank_precheck(rows: Sequence[Sequence[RatFunc]], q0: Optional[Fraction] = None,
                  seed: Optional[int] = None) -> Dict[str, int]:
    """Probe rank at a rational point; certify exactly only when the probe is not full"""
    if not rows or not rows[0]:
        return {"probe": 0, "rank": 0, "exact": False}
    full = min(len(rows), len(rows[0]))
    if q0 is None:
        q0 = probe_point(np.random.default_rng(seed))
    probe = probe_rank(rows, q0)
    if probe == full:
        return {"probe": probe, "rank": probe, "exact": False}
    logger.debug(f"Probe rank {probe} < {full} at q={q0}; running exact elimination")
    return {"probe": probe, "rank": exact_rank(rows), "exact": True}


@dataclass
class PairingMatrix:
    """Values <monomial, z^+-word>; rows are spanning words, columns PBW monomials.

    basis records, per weight block, the first rows in row order whose minor is
    invertible. pairing_matrix fills it when the matrix is built.
    """
    N: int
    r: int
    rows: List[ZWord]
    cols: List[PbwMonomial]
    engine: PairingEngine
    basis: List[int] = field(default_factory=list)
    _entries: Dict[Tuple[int, int], Laurent] = field(default_factory=dict, repr=False)

    def laurent_entry(self, i: int, j: int) -> Laurent:
        key = (i, j)
        if key not in self._entries:
            total: Laurent = {}
            for word, coeff in shifted_expansion(self.rows[i], self.N, self.r).terms.items():
                value = self.engine.pair_monomial(self.cols[j], word)
                if value:
                    for exp, c in coeff.to_laurent().items():
                        laurent_add(total, value, c, exp)
            self._entries[key] = total
        return self._entries[key]

    def entry(self, i: int, j: int) -> RatFunc:
        return RatFunc.from_laurent(self.laurent_entry(i, j))

    @property
    def shape(self) -> Tuple[int, int]:
        return len(self.rows), len(self.cols)

    def to_rows(self) -> List[List[RatFunc]]:
        return [[self.entry(i, j) for j in range(len(self.cols))] for i in range(len(self.rows))]

    def blocks(self) -> Dict[Tuple[int, ...], Tuple[List[int], List[int]]]:
        """Row and column indices of every weight, keyed by the weight of the rows"""
        blocks: Dict[Tuple[int, ...], Tuple[List[int], List[int]]] = {}
        for i, word in enumerate(self.rows):
            blocks.setdefault(word_weight(word, self.N), ([], []))[0].append(i)
        for j, u in enumerate(self.cols):
            key = tuple(-w for w in u.weight(self.N))
            blocks.setdefault(key, ([], []))[1].append(j)
        return blocks

    def rank(self, seed: Optional[int] = None) -> int:
        total = 0
        for rows, cols in self.blocks().values():
            if rows and cols:
                block = [[self.entry(i, j) for j in cols] for i in rows]
                total += rank_precheck(block, seed=seed)["rank"]
        return total

    def basis_rows(self, seed: Optional[int] = None) -> List[int]:
        """The recorded invertible-minor rows, selected on first use"""
        if not self.basis:
            self.basis = self.select_basis(np.random.default_rng(seed))
        return self.basis

    def select_basis(self, rng: np.random.Generator, attempts: int = 3) -> List[int]:
        chosen: List[int] = []
        for key, (rows, cols) in self.blocks().items():
            if rows and cols:
                chosen.extend(self._block_basis(key, rows, cols, rng, attempts))
        return sorted(chosen)

    def _block_basis(self, key: Tuple[int, ...], rows: List[int], cols: List[int],
                     rng: np.random.Generator, attempts: int) -> List[int]:
        target = len(cols)
        for attempt in range(attempts):
            q0 = probe_point(rng)
            values = DomainMatrix([[to_qq(laurent_evaluate(self.laurent_entry(i, j), q0)) for j in cols]
                                   for i in rows], (len(rows), target), QQ)
            pivots = first_independent_rows(values)
            if len(pivots) == target:
                return [rows[p] for p in pivots]
            logger.debug(f"Probe at q={q0} found {len(pivots)}/{target} rows for weight {key}")
        space = RowSpace()
        chosen = []
        for i in rows:
            row = {pos: self.entry(i, j).value for pos, j in enumerate(cols) if self.laurent_entry(i, j)}
            if space.add(row):
                chosen.append(i)
                if space.dim == target:
                    return chosen
        raise KnondegViolation(f"knondeg violation in weight {key}: rank {space.dim} < {target}")

    def to_frame(self) -> pd.DataFrame:
        data = {"word": [word_text(w, shifted=True) for w in self.rows]}
        for j, u in enumerate(self.cols):
            data[str(u)] = [str(self.entry(i, j)) for i in range(len(self.rows))]
        return pd.DataFrame(data)

    def to_csv(self, path: str):
        self.to_frame().to_csv(path, index=False)
        logger.info(f"Pairing matrix written to {path}")


def pairing_matrix(N: int, r: int, k: int, engine: Optional[PairingEngine] = None,
                   max_n: int = 4, seed: Optional[int] = None, check: bool = True,
                   longest_first: bool = False) -> PairingMatrix:
    """Pairing of PBW monomials of degree <= k with z^+-words of length <= k.

    With longest_first the rows run from long words to short ones, so the
    basis prefers words of maximal length. A checked matrix records its basis.
    """
    if N > max_n:
        raise ValueError(f"N={N} exceeds the configured limit {max_n}")
    engine = engine or PairingEngine(N, r)
    words = spanning_words(N, r, k)
    if longest_first:
        words = sorted(words, key=lambda w: (-len(w), w))
    matrix = PairingMatrix(N, r, words, pbw_monomials(N, r, k), engine)
    if check:
        rank = matrix.rank(seed)
        if rank < len(matrix.cols):
            raise KnondegViolation(f"knondeg violation: rank {rank} < {len(matrix.cols)} for (N,r,k)=({N},{r},{k})")
        matrix.basis = matrix.select_basis(np.random.default_rng(seed))
        logger.info(f"Pairing matrix ({N},{r},{k}): {matrix.shape[0]}x{matrix.shape[1]}, rank {rank}")
    return matrix


# Truncated dual: U_m realized as functionals on B/(B^+)^{m+1}

@dataclass
class Functional:
    """Values of a functional on the basis words of B/(B^+)^{m+1}"""
    values: Vector
    degree: int

    def is_zero(self) -> bool:
        return not self.values

    def __add__(self, other: "Functional") -> "Functional":
        return Functional(vec_add(dict(self.values), other.values), max(self.degree, other.degree))

    def scale(self, coeff: Union[RatFunc, int]) -> "Functional":
        factor = RatFunc.coerce(coeff).value
        return Functional({i: v * factor for i, v in self.values.items()} if factor else {}, self.degree)


@dataclass
class Block:
    """One weight component: basis words, dual monomials and the inverted minor"""
    weight: Tuple[int, ...]
    monomials: List[PbwMonomial]
    coords: List[int] = field(default_factory=list)
    rows: List[int] = field(default_factory=list)
    columns: List[int] = field(default_factory=list)
    inverse: List[List[Any]] = field(default_factory=list)


class TruncatedDual:
    """Coordinates on B/(B^+)^{m+1} through the nondegenerate pairing with U_m.

    Basis words are z^+-words picked longest first, so the basis words of length
    >= j span (B^+)^j modulo (B^+)^{m+1}. A functional in U_k is then exactly one
    vanishing on basis words longer than k.
    """

    def __init__(self, N: int, r: int, m: int, convention: str = "standard",
                 probe_seed: int = 20240607, jobs: int = 1, cache_dir: Optional[str] = None,
                 engine: Optional[PairingEngine] = None):
        if m < 0:
            raise ValueError("truncation must be non-negative")
        self.N = N
        self.r = r
        self.m = m
        self.convention = convention
        self.jobs = jobs
        self.rng = np.random.default_rng(probe_seed)
        self.engine = engine or PairingEngine(N, r, convention, cache_dir)
        self.monomials = pbw_monomials(N, r, m)
        self.words: List[ZWord] = []
        self.word_weights: List[Tuple[int, ...]] = []
        self.blocks: Dict[Tuple[int, ...], Block] = {}
        self._index: Dict[ZWord, int] = {}
        self._reduced: Dict[ZWord, Vector] = {}
        self._build()
        logger.info(f"Truncated dual for N={N}, r={r}, m={m}: dimension {self.dim}")

    @property
    def dim(self) -> int:
        return len(self.words)

    def length(self, index: int) -> int:
        return len(self.words[index])

    def coords_up_to(self, k: int) -> List[int]:
        return [i for i, w in enumerate(self.words) if len(w) <= k]

    def coords_of_length(self, k: int) -> List[int]:
        return [i for i, w in enumerate(self.words) if len(w) == k]

    # Construction

    def _build(self):
        for L in range(self.m + 1):
            self.engine.precompute(self.monomials, L, self.jobs)
        self.matrix = pairing_matrix(self.N, self.r, self.m, self.engine, max_n=self.N, check=False,
                                     longest_first=True)
        self.matrix.basis = self.matrix.select_basis(self.rng)
        for j, u in enumerate(self.matrix.cols):
            key = tuple(-w for w in u.weight(self.N))
            block = self.blocks.setdefault(key, Block(key, []))
            block.monomials.append(u)
            block.columns.append(j)
        rows = sorted(self.matrix.basis, key=lambda i: (len(self.matrix.rows[i]), self.matrix.rows[i]))
        for index, row in enumerate(rows):
            word = self.matrix.rows[row]
            key = word_weight(word, self.N)
            self.words.append(word)
            self.word_weights.append(key)
            self._index[word] = index
            self.blocks[key].coords.append(index)
            self.blocks[key].rows.append(row)
        for block in self.blocks.values():
            if len(block.rows) < len(block.monomials):
                raise KnondegViolation(f"knondeg violation in weight {block.weight}: "
                                       f"rank {len(block.rows)} < {len(block.monomials)}")
            block.inverse = inverse([[self.matrix.entry(i, j).value for j in block.columns] for i in block.rows])

    # Reduction of B-elements

    def index_of(self, word: ZWord) -> Optional[int]:
        return self._index.get(word)

    def values(self, b: BElement) -> Dict[Tuple[int, ...], Dict[int, Any]]:
        """<u, b> for every PBW monomial u, grouped by weight block"""
        out: Dict[Tuple[int, ...], Dict[int, Any]] = {}
        for word, coeff in b.terms.items():
            key = word_weight(word, self.N)
            block = self.blocks.get(key)
            if block is None:
                continue
            row = out.setdefault(key, {})
            for j, u in enumerate(block.monomials):
                value = self.engine.pair_monomial(u, word)
                if value:
                    row[j] = row.get(j, DOMAIN.zero) + coeff.value * laurent_to_field(value)
        return out

    def reduce(self, b: BElement) -> Vector:
        """Coordinates of b in B/(B^+)^{m+1}"""
        result: Vector = {}
        for key, row in self.values(b).items():
            block = self.blocks[key]
            for j, value in row.items():
                if not value:
                    continue
                for pos, coord in enumerate(block.coords):
                    entry = block.inverse[j][pos]
                    if entry:
                        result[coord] = result.get(coord, DOMAIN.zero) + value * entry
        return {k: v for k, v in result.items() if v}

    def reduce_shifted(self, word: ZWord) -> Vector:
        if len(word) > self.m:
            return {}
        if word not in self._reduced:
            index = self._index.get(word)
            if index is not None:
                self._reduced[word] = {index: DOMAIN.one}
            else:
                self._reduced[word] = self.reduce(shifted_expansion(word, self.N, self.r))
        return self._reduced[word]

    def express_in_span(self, b: BElement, spanning: Sequence[BElement]) -> Optional[List[RatFunc]]:
        """Coefficients c with b = sum c_i s_i modulo (B^+)^{m+1}, or None"""
        vectors = [self.reduce(s) for s in spanning]
        target = self.reduce(b)
        columns = list(range(len(vectors) + 1))
        coords = sorted(set(target).union(*[set(v) for v in vectors]))
        rows = []
        for c in coords:
            row = {i: v[c] for i, v in enumerate(vectors) if c in v}
            if c in target:
                row[len(vectors)] = -target[c]
            rows.append(row)
        for vec in nullspace(rows, columns):
            pivot = vec.get(len(vectors))
            if pivot:
                return [RatFunc(vec.get(i, DOMAIN.zero) / pivot) for i in range(len(vectors))]
        return None

    # Functionals

    def functional_of(self, x: UElement, k: Optional[int] = None) -> Functional:
        """Values of x on the recorded basis rows of the pairing matrix"""
        values: Vector = {}
        covectors: Dict[int, Dict[Index, RatFunc]] = {}
        for row in self.matrix.basis:
            word = self.matrix.rows[row]
            value = self.engine.pair(x, shifted_expansion(word, self.N, self.r), covectors)
            if not value.is_zero():
                values[self._index[word]] = value.value
        degree = max((len(self.words[i]) for i in values), default=0)
        if k is not None and degree > k:
            raise ValueError(f"element has degree {degree} > {k} in the truncation")
        return Functional(values, degree if k is None else k)

    def functional_of_monomial(self, monomial: PbwMonomial) -> Functional:
        key = tuple(-w for w in monomial.weight(self.N))
        block = self.blocks[key]
        column = block.columns[block.monomials.index(monomial)]
        values = {}
        for coord, row in zip(block.coords, block.rows):
            value = self.matrix.entry(row, column).value
            if value:
                values[coord] = value
        return Functional(values, monomial.degree)

    def counit(self) -> Functional:
        return Functional({self._index[()]: DOMAIN.one}, 0)

    def functional_apply(self, f: Functional, b: BElement) -> RatFunc:
        reduced = self.reduce(b)
        total = DOMAIN.zero
        for i, v in f.values.items():
            if i in reduced:
                total += v * reduced[i]
        return RatFunc(total)

    # Operators on value coordinates: (A f)_rho = sum_sigma A[rho][sigma] f_sigma

    def left_translation(self, g: ZGen) -> Dict[int, Vector]:
        """(L f)(b) = f(z^+ b)"""
        rows = {}
        for index, word in enumerate(self.words):
            row = self.reduce_shifted((g,) + word)
            if row:
                rows[index] = row
        return rows

    def right_action(self, g: Union[GeneratorSymbol, UElement]) -> Dict[int, Vector]:
        """(f . g)(b) = f(g |> b)"""
        rows = {}
        for index, word in enumerate(self.words):
            row = self.reduce(act(g, shifted_expansion(word, self.N, self.r), self.N))
            if row:
                rows[index] = row
        return rows

    def word_label(self, index: int) -> str:
        return word_text(self.words[index], shifted=True)


def functional_of(dual: TruncatedDual, x: UElement, k: Optional[int] = None) -> Functional:
    return dual.functional_of(x, k)


def functional_apply(dual: TruncatedDual, f: Functional, b: BElement) -> RatFunc:
    return dual.functional_apply(f, b)


def apply_rows(rows: Dict[int, Vector], f: Vector) -> Vector:
    out: Vector = {}
    for rho, row in rows.items():
        total = DOMAIN.zero
        for sigma, value in row.items():
            fv = f.get(sigma)
            if fv:
                total += value * fv
        if total:
            out[rho] = total
    return out


def ideal_membership(N: int, r: int, dual: Optional[TruncatedDual] = None) -> Dict[str, bool]:
    """Whether each z^+_ii lies, modulo (B^+)^3, in the span of words of length <= 2
    containing a generator z_kl with k <= r or l <= r"""
    dual = dual or TruncatedDual(N, r, 2)
    gens = all_generators(N)
    small = [g for g in gens if g.i <= r or g.j <= r]
    span = RowSpace()
    for g in small:
        span.add(dual.reduce(BElement.word(g)))
        for h in gens:
            span.add(dual.reduce(BElement.word(g, h)))
            span.add(dual.reduce(BElement.word(h, g)))
    report = {}
    for i in range(1, N + 1):
        target = dual.reduce_shifted((ZGen(i, i),))
        report[word_text((ZGen(i, i),), shifted=True)] = span.contains(target)
    return report
