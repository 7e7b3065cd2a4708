"""
Command-line front end: classification runs, dimension tables and verification suites.

Exit codes:
    0: success
    1: a verification or dimension check failed
    2: the truncation audit refused the classification
    3: unsupported multiplicity in the classification search
    4: invalid configuration
"""

from typing import Any, Dict, List, Optional
from dataclasses import dataclass
import argparse
import json
import logging
import sys

import pandas as pd

from config.config import Config
from qfield import RatFunc
from linalg import RowSpace
from uq import E, F, K, GeneratorSymbol, UElement, pbw_monomials, root_vector
from grassmann import (BElement, RewriteBudgetExceeded, ZGen, act, all_generators, relation_table, reorder,
                       shifted_expansion, spanning_words, word_text)
from pairing import KnondegViolation, PairingEngine, expected_dimension, pairing_matrix
from tangent import (AuditRefusal, IncoherentSearch, TangentAnalyzer, UnsupportedMultiplicity,
                     step4_audit)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_AUDIT = 2
EXIT_MULTIPLICITY = 3
EXIT_CONFIG = 4


@dataclass
class RunConfig:
    N: int
    r: int
    max_dim: Optional[int]
    truncation: int
    cache_dir: Optional[str]
    probe_seed: int
    jobs: int
    convention: str = "standard"
    format: str = "json"
    output: Optional[str] = None
    max_n: int = 4

    def __post_init__(self):
        if self.N < 2:
            raise ValueError("N must be at least 2")
        if not 1 <= self.r <= self.N - 1:
            raise ValueError(f"r={self.r} must lie in 1..{self.N - 1}")
        if self.N > self.max_n:
            raise ValueError(f"N={self.N} exceeds QGR_MAX_N={self.max_n}")
        if self.truncation < 1:
            raise ValueError("truncation must be at least 1")
        if self.jobs < 1:
            raise ValueError("jobs must be positive")
        if self.max_dim is not None and self.max_dim < 0:
            raise ValueError("max-dim must be non-negative or 'auto'")
        if self.format not in Config.OUTPUT_FORMATS:
            raise ValueError(f"format must be one of {Config.OUTPUT_FORMATS}")

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> "RunConfig":
        max_dim = getattr(args, "max_dim", "auto")
        return cls(
            N=args.N,
            r=args.r,
            max_dim=None if max_dim in (None, "auto") else int(max_dim),
            truncation=args.truncation if args.truncation is not None else Config.TRUNCATION,
            cache_dir=args.cache_dir if args.cache_dir is not None else Config.CACHE_DIR,
            probe_seed=args.probe_seed if args.probe_seed is not None else Config.PROBE_SEED,
            jobs=args.jobs if args.jobs is not None else Config.JOBS,
            convention=args.convention,
            format=args.format,
            output=args.output,
            max_n=Config.MAX_N,
        )

    def analyzer(self) -> TangentAnalyzer:
        return TangentAnalyzer(self.N, self.r, self.truncation, self.convention, self.jobs,
                               self.probe_seed, self.cache_dir or None)

    def engine(self) -> PairingEngine:
        return PairingEngine(self.N, self.r, self.convention, self.cache_dir or None)


# Output

def emit(payload: Dict[str, Any], cfg: RunConfig, table: Optional[pd.DataFrame] = None):
    if cfg.format == "csv" and table is not None:
        if cfg.output:
            table.to_csv(cfg.output, index=False)
        else:
            table.to_csv(sys.stdout, index=False)
    elif cfg.format == "text":
        text = table.to_string(index=False) if table is not None else _text(payload)
        _write(text + "\n", cfg.output)
    else:
        _write(json.dumps(payload, indent=2, ensure_ascii=False) + "\n", cfg.output)
    if cfg.output:
        logger.info(f"Report written to {cfg.output}")


def _text(payload: Dict[str, Any]) -> str:
    return "\n".join(f"{key}: {value}" for key, value in payload.items())


def _write(text: str, path: Optional[str]):
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# Commands

def cmd_classify(cfg: RunConfig) -> int:
    analyzer = cfg.analyzer()
    try:
        spaces = analyzer.classify(cfg.max_dim)
    except AuditRefusal as e:
        logger.error(f"Audit refused the classification: {e}")
        emit({"N": cfg.N, "r": cfg.r, "certified": False, "audit": e.report.to_dict()}, cfg)
        return EXIT_AUDIT
    except UnsupportedMultiplicity as e:
        logger.error(f"Unsupported multiplicity: {e}")
        emit({"N": cfg.N, "r": cfg.r, "error": str(e), "weight": list(e.weight),
              "multiplicity": e.multiplicity}, cfg)
        return EXIT_MULTIPLICITY
    except IncoherentSearch as e:
        logger.error(f"Classification search failed: {e}")
        return EXIT_FAILED
    payload = {
        "N": cfg.N,
        "r": cfg.r,
        "truncation": cfg.truncation,
        "max_dim": analyzer.audit.max_dim,
        "certified": analyzer.audit.certified,
        "spaces": [T.to_dict(analyzer.dual) for T in spaces],
    }
    table = pd.DataFrame([{"name": T.name, "dim": T.dim, "gamma_dim": T.gamma_dim,
                           "weights": ";".join(f"{w}:{n}" for w, n in T.to_dict(analyzer.dual)["weights"].items()),
                           **{k: v for k, v in T.certificates.items() if k != "witnesses"}}
                          for T in spaces])
    emit(payload, cfg, table)
    return EXIT_OK


def dims_rows(cfg: RunConfig, k: int) -> List[Dict[str, Any]]:
    engine = cfg.engine()
    rows = []
    for degree in range(k + 1):
        matrix = pairing_matrix(cfg.N, cfg.r, degree, engine, max_n=cfg.max_n, seed=cfg.probe_seed, check=False)
        computed = matrix.rank(cfg.probe_seed)
        predicted = expected_dimension(cfg.N, cfg.r, degree)
        rows.append({"k": degree, "computed": computed, "predicted": predicted, "match": computed == predicted})
        logger.debug(f"k={degree}: computed {computed}, predicted {predicted}")
    return rows


def cmd_dims(cfg: RunConfig, k: int) -> int:
    rows = dims_rows(cfg, k)
    table = pd.DataFrame(rows, columns=["k", "computed", "predicted", "match"])
    emit({"N": cfg.N, "r": cfg.r, "rows": rows}, cfg, table)
    return EXIT_OK if all(row["match"] for row in rows) else EXIT_FAILED


def _simple_generators(N: int) -> List[GeneratorSymbol]:
    return [h(i) for i in range(1, N) for h in (E, F, K)]


def verify_relations(cfg: RunConfig, export: Optional[str] = None) -> Dict[str, Any]:
    """Every tabulated relation pairs to zero with all PBW monomials in degree <= truncation"""
    engine = cfg.engine()
    rules = relation_table(cfg.N, cfg.r)
    if export:
        with open(export, "w", encoding="utf-8") as fh:
            json.dump([rule.to_dict() for rule in rules], fh, indent=2, ensure_ascii=False)
        logger.info(f"Relation table written to {export}")
    monomials = pbw_monomials(cfg.N, cfg.r, min(cfg.truncation, 3))
    for rule in rules:
        residual = rule.residual()
        for u in monomials:
            value = engine.pair_monomial_element(u, residual)
            if not value.is_zero():
                return {"passed": False, "checked": len(rules),
                        "witness": f"{rule.case_tag} {word_text(rule.lhs)} against {u}: {value}"}
    # reordering must not change any pairing value
    words = spanning_words(cfg.N, cfg.r, 2)
    for w in words:
        standard = reorder(w, cfg.N, cfg.r, budget=Config.REWRITE_BUDGET)
        plain = BElement.word(*w)
        for u in monomials:
            if engine.pair_monomial_element(u, plain) != engine.pair_monomial_element(u, standard):
                return {"passed": False, "checked": len(rules) + len(words),
                        "witness": f"reordering {word_text(w)} changes the pairing with {u}"}
    return {"passed": True, "checked": (len(rules) + len(words)) * len(monomials), "witness": None}


def verify_pairing(cfg: RunConfig) -> Dict[str, Any]:
    """<x, g |> b> = <x g, b> for simple generators g and words of length <= 2"""
    engine = cfg.engine()
    words = [w for w in spanning_words(cfg.N, cfg.r, 2) if w]
    elements = [u.to_uelement(cfg.convention) for u in pbw_monomials(cfg.N, cfg.r, 1)]
    checked = 0
    for g in _simple_generators(cfg.N):
        for x in elements:
            product = x * UElement.generator(g)
            lhs_cache, rhs_cache = {}, {}
            for w in words:
                lhs = engine.pair(x, act(g, BElement.word(*w), cfg.N), lhs_cache)
                rhs = engine.pair(product, BElement.word(*w), rhs_cache)
                checked += 1
                if lhs != rhs:
                    return {"passed": False, "checked": checked,
                            "witness": f"<{x}, {g} |> {word_text(w)}> = {lhs} but <x*{g}, b> = {rhs}"}
    s = cfg.N - cfg.r
    value = engine.pair(root_vector("E", cfg.r, cfg.r, cfg.r, cfg.N), BElement.word(ZGen(cfg.r, cfg.r + 1)))
    if value != RatFunc.q_power(-2 * s):
        return {"passed": False, "checked": checked, "witness": f"<E_r, z[r,r+1]> = {value}"}
    return {"passed": True, "checked": checked + 1, "witness": None}


def verify_actions(cfg: RunConfig) -> Dict[str, Any]:
    """Action formulas agree with the action derived from the pairing"""
    engine = cfg.engine()
    checked = 0
    for g in _simple_generators(cfg.N) + [GeneratorSymbol("Kinv", i) for i in range(1, cfg.N)]:
        for x in all_generators(cfg.N):
            derived = engine.derived_action(g, x)
            formula = act(g, BElement.word(x), cfg.N)
            checked += 1
            if derived != formula:
                return {"passed": False, "checked": checked,
                        "witness": f"{g} |> {x}: formula {formula}, pairing {derived}"}
    return {"passed": True, "checked": checked, "witness": None}


def verify_primitives(cfg: RunConfig) -> Dict[str, Any]:
    analyzer = TangentAnalyzer(cfg.N, cfg.r, 2, cfg.convention, cfg.jobs, cfg.probe_seed, cfg.cache_dir or None)
    rdim = cfg.r * (cfg.N - cfg.r)
    total = analyzer.primitives(2)
    e_side = analyzer.primitives(2, "+")
    span = RowSpace(f.values for f in e_side)
    stable = all(span.contains(analyzer.k_action(f, g).values) for f in e_side for g in analyzer.k_generators)
    passed = len(total) == 2 * rdim and len(e_side) == rdim and stable
    return {"passed": passed, "checked": 3, "dimension": len(total), "e_side": len(e_side),
            "witness": None if passed else f"dimension {len(total)}, E-side {len(e_side)}, K-stable {stable}"}


def verify_nilpotency(cfg: RunConfig) -> Dict[str, Any]:
    analyzer = cfg.analyzer()
    spaces = analyzer.classify(cfg.max_dim)
    reports = {}
    for T in spaces:
        R = analyzer.induced_rep(T)
        report = analyzer.nilpotency_report(R)
        failures = analyzer.relations_hold(R)
        if not analyzer.leibniz_holds(R):
            failures.append("leibniz")
        reports[T.name] = {"offdiagonal": report["offdiagonal"], "diagonal": report["diagonal"],
                           "spectrum": report["spectrum"]}
        if report["violations"] or failures:
            return {"passed": False, "checked": len(reports),
                    "witness": f"{T.name}: {(report['violations'] + failures)[0]}"}
    return {"passed": True, "checked": len(reports), "witness": None, "reports": reports}


def verify_rank(cfg: RunConfig) -> Dict[str, Any]:
    rows = dims_rows(cfg, min(cfg.truncation, 3))
    failed = [row for row in rows if not row["match"]]
    if failed:
        row = failed[0]
        return {"passed": False, "checked": len(rows),
                "witness": f"k={row['k']}: rank {row['computed']} != {row['predicted']}"}
    return {"passed": True, "checked": len(rows), "witness": None}


def verify_orthogonality(cfg: RunConfig) -> Dict[str, Any]:
    """Degree-k monomials vanish on products of k+1 shifted generators"""
    engine = cfg.engine()
    monomials = pbw_monomials(cfg.N, cfg.r, 2)
    checked = 0
    for k in range(min(cfg.truncation, 2) + 1):
        layer = [u for u in monomials if u.degree == k]
        for word in spanning_words(cfg.N, cfg.r, k + 1):
            if len(word) != k + 1:
                continue
            expansion = shifted_expansion(word, cfg.N, cfg.r)
            for u in layer:
                checked += 1
                value = engine.pair_monomial_element(u, expansion)
                if not value.is_zero():
                    return {"passed": False, "checked": checked,
                            "witness": f"<{u}, {word_text(word, shifted=True)}> = {value}"}
    return {"passed": True, "checked": checked, "witness": None}


SUITES = {
    "relations": verify_relations,
    "pairing": verify_pairing,
    "primitives": verify_primitives,
    "actions": verify_actions,
    "nilpotency": verify_nilpotency,
    "rank": verify_rank,
    "orthogonality": verify_orthogonality,
}


def cmd_verify(suite: str, cfg: RunConfig, export: Optional[str] = None) -> int:
    if suite not in SUITES:
        raise ValueError(f"Unknown verification suite: {suite}")
    try:
        result = verify_relations(cfg, export) if suite == "relations" else SUITES[suite](cfg)
    except (AuditRefusal, UnsupportedMultiplicity, IncoherentSearch, KnondegViolation,
            RewriteBudgetExceeded) as e:
        result = {"passed": False, "checked": 0, "witness": str(e)}
    payload = {"suite": suite, "N": cfg.N, "r": cfg.r, **result}
    if result["passed"]:
        logger.info(f"Suite {suite} passed ({result['checked']} checks)")
    else:
        logger.error(f"Suite {suite} failed: {result['witness']}")
    emit(payload, cfg)
    return EXIT_OK if result["passed"] else EXIT_FAILED


def cmd_audit(cfg: RunConfig) -> int:
    report = step4_audit(cfg.N, cfg.r, cfg.truncation, cfg.max_dim)
    emit(report.to_dict(), cfg)
    return EXIT_OK if report.certified else EXIT_AUDIT


# Parser

def _add_common(parser: argparse.ArgumentParser):
    parser.add_argument("--N", type=int, required=True, help="Rank N of SL_N")
    parser.add_argument("--r", type=int, required=True, help="Grassmannian parameter r, 1 <= r <= N-1")
    parser.add_argument("--truncation", type=int, default=None, help="Truncation degree m (default: QGR_TRUNCATION)")
    parser.add_argument("--format", choices=Config.OUTPUT_FORMATS, default="json", help="Report format")
    parser.add_argument("--output", default=None, help="Write the report to this file instead of stdout")
    parser.add_argument("--cache-dir", default=None, help="Pairing cache directory (default: QGR_CACHE_DIR)")
    parser.add_argument("--probe-seed", type=int, default=None, help="Seed for rational probe points")
    parser.add_argument("--jobs", type=int, default=None, help="Worker processes for covector precomputation")
    parser.add_argument("--convention", choices=["standard", "alternate"], default="standard",
                        help="Root vector recursion convention")
    parser.add_argument("--max-dim", default="auto", help="Largest Gamma-dimension searched, or 'auto' = 2r(N-r)")
    parser.add_argument("--verbose", "-v", action="store_true", help="Verbose output")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qgr",
        description=f"{Config.APP_NAME} - quantum tangent spaces of the quantum Grassmannian"
    )
    sub = parser.add_subparsers(dest="command", required=True)
    _add_common(sub.add_parser("classify", help="Classify tangent spaces up to max-dim"))
    dims = sub.add_parser("dims", help="Dimensions of B/(B^+)^{k+1} by rank and by formula")
    _add_common(dims)
    dims.add_argument("--k", type=int, default=2, help="Largest degree k")
    verify = sub.add_parser("verify", help="Run a verification suite")
    verify.add_argument("suite", choices=Config.VERIFY_SUITES)
    _add_common(verify)
    verify.add_argument("--export", default=None, help="relations suite: also export the rule table as JSON")
    _add_common(sub.add_parser("audit", help="Truncation audit only"))
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        Config.validate_config()
    except ValueError as e:
        logging.basicConfig(format=Config.LOG_FORMAT)
        logger.error(f"Invalid configuration: {e}")
        return EXIT_CONFIG
    logging.basicConfig(level=logging.DEBUG if args.verbose else Config.LOG_LEVEL, format=Config.LOG_FORMAT)
    try:
        cfg = RunConfig.from_args(args)
        if args.command == "dims" and args.k < 0:
            raise ValueError("k must be non-negative")
    except ValueError as e:
        logger.error(f"Invalid configuration: {e}")
        return EXIT_CONFIG
    if cfg.max_dim is not None and cfg.max_dim > 2 * cfg.r * (cfg.N - cfg.r):
        logger.warning(f"max-dim {cfg.max_dim} is beyond the classified range")
    logger.info(f"{Config.APP_NAME} {Config.APP_VERSION}: {args.command} for N={cfg.N}, r={cfg.r}")
    if args.command == "classify":
        return cmd_classify(cfg)
    if args.command == "dims":
        return cmd_dims(cfg, args.k)
    if args.command == "verify":
        return cmd_verify(args.suite, cfg, args.export)
    return cmd_audit(cfg)


if __name__ == "__main__":
    sys.exit(main())
