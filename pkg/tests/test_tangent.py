import unittest
import sys
import os
import json

# Add the src directory to the Python path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', 'src'))

from qfield import DOMAIN, RatFunc
from linalg import RowSpace, vec_add
from uq import E, F, K, UElement, parse_word
from grassmann import ZGen, trace_constant
from tangent import (AuditRefusal, TangentAnalyzer, TangentSpace, cauchy_decomposition, classify,
                     isotypic_decompose, schur_dimension, step4_audit)

GOLDEN_PATH = os.path.join(os.path.dirname(__file__), '..', 'data', 'golden_classification.json')

def load_golden():
    with open(GOLDEN_PATH, 'r') as f:
        return json.load(f)

class TestAudit(unittest.TestCase):
    """Test cases for the truncation audit"""

    def test_schur_dimensions(self):
        """Test hook-content dimensions of small Schur functors"""
        self.assertEqual(schur_dimension((2,), 3), 6)
        self.assertEqual(schur_dimension((1, 1), 3), 3)
        self.assertEqual(schur_dimension((2, 1), 2), 2)
        self.assertEqual(schur_dimension((2, 1), 3), 8)
        self.assertEqual(schur_dimension((1, 1, 1), 2), 0)

    def test_cauchy_decomposition_sums_to_symmetric_power(self):
        """Test that the pieces add up to dim Sym^l(C^r (x) C^s)"""
        from math import comb
        for r, s, degree in [(1, 3, 2), (2, 2, 3), (2, 2, 4), (2, 3, 3)]:
            with self.subTest(r=r, s=s, degree=degree):
                total = sum(piece["dim"] for piece in cauchy_decomposition(r, s, degree))
                self.assertEqual(total, comb(r * s + degree - 1, degree))

    def test_lower_bounds(self):
        """Test the Gamma-dimension lower bounds for constituents in degree 3 and 4"""
        expected = {(2, 1): (3, 4), (3, 1): (9, 14), (4, 1): (19, 34), (4, 2): (9, 10)}
        for (N, r), (lb3, lb4) in expected.items():
            with self.subTest(N=N, r=r):
                report = step4_audit(N, r, 3)
                self.assertEqual(report.lower_bounds[3], lb3)
                self.assertEqual(report.lower_bounds[4], lb4)
                self.assertTrue(report.certified)

    def test_golden_audit_values(self):
        """Test dim V1, dim V2 and the boundary case"""
        for case in load_golden()["audit"]:
            with self.subTest(N=case["N"], r=case["r"]):
                report = step4_audit(case["N"], case["r"]).to_dict()
                for key in ("dim V1", "dim V2", "boundary"):
                    if key in case:
                        self.assertEqual(report[key], case[key])

    def test_degree_three_dimensions(self):
        """Test dim V1' = 16 and dim V2' = 4 at (4, 2)"""
        report = step4_audit(4, 2)
        self.assertEqual(report.degree3, {"dim V1'": 16, "dim V2'": 4})
        self.assertIsNone(step4_audit(4, 1).degree3)
        self.assertIsNotNone(step4_audit(2, 1).n2_branch)

    def test_refusals(self):
        """Test that low truncation and large max_dim are refused"""
        self.assertFalse(step4_audit(2, 1, 1).certified)
        report = step4_audit(3, 1, 3, max_dim=5)
        self.assertFalse(report.certified)
        self.assertTrue(report.reasons)

    def test_classify_refuses_uncertified_runs(self):
        """Test that classify raises AuditRefusal with the report attached"""
        analyzer = TangentAnalyzer(2, 1, 1)
        with self.assertRaises(AuditRefusal) as ctx:
            analyzer.classify()
        self.assertFalse(ctx.exception.report.certified)

class TestPrimitives(unittest.TestCase):
    """Test cases for primitive functionals and the K-action"""

    def setUp(self):
        """Set up test fixtures"""
        self.analyzer = TangentAnalyzer(3, 1, 2)
        self.dual = self.analyzer.dual

    def test_primitive_dimensions(self):
        """Test 2r(N-r) primitives split evenly between the two sides"""
        self.assertEqual(len(self.analyzer.primitives(2)), 4)
        self.assertEqual(len(self.analyzer.primitives(2, "+")), 2)
        self.assertEqual(len(self.analyzer.primitives(2, "-")), 2)

    def test_k_action_on_raising_functional(self):
        """Test f_E1 . K_j = q^(-(alpha_1, alpha_j)) f_E1"""
        f = self.dual.functional_of(UElement.generator(E(1)))
        for j, exponent in [(1, -2), (2, 1)]:
            with self.subTest(j=j):
                moved = self.analyzer.k_action(f, K(j))
                self.assertEqual(moved.values, f.scale(RatFunc.q_power(exponent)).values)

    def test_k_action_rejects_generators_outside_k(self):
        """Test that E_r is not part of K"""
        f = self.dual.counit()
        with self.assertRaises(ValueError):
            self.analyzer.k_action(f, E(1))

    def test_orbit_and_translates(self):
        """Test the K-orbit and left translates of f_E1"""
        f = self.dual.functional_of(UElement.generator(E(1)))
        self.assertEqual(self.analyzer.k_orbit(f).dim, 2)
        self.assertEqual(self.analyzer.right_translates(f).dim, 2)
        self.assertEqual(self.analyzer.right_translates(self.dual.counit()).dim, 1)

    def test_primitives_are_k_stable(self):
        """Test that the E-side primitives span a K-submodule"""
        e_side = self.analyzer.primitives(2, "+")
        span = RowSpace(f.values for f in e_side)
        for f in e_side:
            for g in self.analyzer.k_generators:
                with self.subTest(g=str(g)):
                    self.assertTrue(span.contains(self.analyzer.k_action(f, g).values))

    def test_isotypic_degree_two(self):
        """Test that degree-two E-symbols form the symmetric square of C^2"""
        result = self.analyzer.isotypic_decompose(2, "+")
        self.assertEqual([(c["dim"], c["multiplicity"]) for c in result], [(3, 1)])

    def test_isotypic_limits(self):
        """Test argument checks"""
        with self.assertRaises(ValueError):
            self.analyzer.isotypic_decompose(2, "x")
        with self.assertRaises(ValueError):
            isotypic_decompose(3, 1, 4)

class TestTangentSpaceChecks(unittest.TestCase):
    """Test cases for the tangent space certificate at (2, 1)"""

    def setUp(self):
        """Set up test fixtures"""
        self.analyzer = TangentAnalyzer(2, 1, 2)
        self.dual = self.analyzer.dual

    def _space(self, *elements):
        vectors = [self.dual.counit().values]
        vectors += [self.dual.functional_of(x).values for x in elements]
        return TangentSpace(RowSpace(vectors))

    def test_raising_side_is_a_tangent_space(self):
        """Test span{counit, f_E1}"""
        result = self.analyzer.is_tangent_space(self._space(UElement.generator(E(1))))
        self.assertTrue(result["contains_counit"])
        self.assertTrue(result["k_stable"])
        self.assertTrue(result["coideal"])
        self.assertEqual(result["witnesses"], {})

    def test_second_order_alone_is_not(self):
        """Test that span{counit, f_E1E1} is not a right coideal"""
        result = self.analyzer.is_tangent_space(self._space(parse_word("E1*E1", 2)))
        self.assertFalse(result["coideal"])
        self.assertIn("coideal", result["witnesses"])

    def test_missing_counit(self):
        """Test that a space without the counit is reported"""
        T = TangentSpace(RowSpace([self.dual.functional_of(UElement.generator(F(1))).values]))
        result = self.analyzer.is_tangent_space(T)
        self.assertFalse(result["contains_counit"])

    def test_ideal_round_trip(self):
        """Test T -> ideal -> T and codim(ideal) + 1 = dim T"""
        T = self._space(UElement.generator(E(1)), UElement.generator(F(1)))
        ideal = self.analyzer.ideal_of(T)
        self.assertTrue(self.analyzer.is_left_ideal(ideal))
        self.assertEqual(ideal.codim + 1, T.dim)
        self.assertEqual(self.analyzer.tangent_of(ideal).key(), T.key())

class TestClassification(unittest.TestCase):
    """Test cases for the classification against golden data"""

    def _check_case(self, N, r, truncation, **options):
        expected = load_golden()["classification"][f"{N},{r}"]["spaces"]
        spaces = classify(N, r, truncation=truncation, **options)
        self.assertEqual({T.name: T.gamma_dim for T in spaces}, expected)
        for T in spaces:
            with self.subTest(space=T.name):
                for key in ("contains_counit", "k_stable", "coideal", "round_trip", "dimension_law"):
                    self.assertTrue(T.certificates[key], key)
        return spaces

    def test_two_one(self):
        """Test the six tangent spaces of the quantum projective line"""
        self._check_case(2, 1, 3)

    def test_three_one(self):
        """Test the four tangent spaces at (3, 1)"""
        self._check_case(3, 1, 3)

    def test_alternate_convention(self):
        """Test that the root vector convention does not change the result"""
        standard = classify(2, 1)
        alternate = classify(2, 1, convention="alternate")
        self.assertEqual([T.name for T in standard], [T.name for T in alternate])
        self.assertEqual([T.key() for T in standard], [T.key() for T in alternate])

    def test_deterministic_across_jobs_and_conventions(self):
        """Test that worker count and root vector convention leave the (3, 1) result unchanged"""
        serial = classify(3, 1, jobs=1)
        summary = [(T.name, T.gamma_dim, T.key()) for T in serial]
        for options in ({"jobs": 8}, {"convention": "alternate"}):
            with self.subTest(**options):
                spaces = classify(3, 1, **options)
                self.assertEqual([(T.name, T.gamma_dim, T.key()) for T in spaces], summary)

    def test_four_one(self):
        """Test the four tangent spaces at (4, 1)"""
        self._check_case(4, 1, 2)

    def test_four_two(self):
        """Test the six tangent spaces at (4, 2)"""
        self._check_case(4, 2, 2)

    def test_golden_isotypic(self):
        """Test isotypic dimensions at N=4"""
        analyzers = {}
        for case in load_golden()["isotypic"]:
            key = (case["N"], case["r"])
            if key not in analyzers:
                analyzers[key] = TangentAnalyzer(case["N"], case["r"], 2)
            with self.subTest(**case):
                result = isotypic_decompose(case["N"], case["r"], case["k"], case["side"], analyzers[key])
                dims = [c["dim"] for c in result for _ in range(c["multiplicity"])]
                self.assertEqual(dims, case["dims"])

class TestInducedRepresentations(unittest.TestCase):
    """Test cases for representations induced on tangent spaces"""

    @classmethod
    def setUpClass(cls):
        cls.analyzer = TangentAnalyzer(2, 1, 3)
        cls.spaces = {T.name: T for T in cls.analyzer.classify()}

    def test_relations_and_leibniz(self):
        """Test that every induced representation respects the relations"""
        for name, T in self.spaces.items():
            with self.subTest(space=name):
                R = self.analyzer.induced_rep(T)
                self.assertEqual(R.dim, T.dim)
                self.assertEqual(self.analyzer.relations_hold(R), [])
                self.assertTrue(self.analyzer.leibniz_holds(R))

    def test_trace_identity(self):
        """Test rho(z_11) + rho(z_22) = trace constant times identity"""
        R = self.analyzer.induced_rep(self.spaces["T"])
        total = R.matrices[ZGen(1, 1)] + R.matrices[ZGen(2, 2)]
        value = trace_constant(2, 1).value
        n = R.dim
        expected = [[value if i == j else DOMAIN.zero for j in range(n)] for i in range(n)]
        self.assertEqual(total.to_list(), expected)

    def test_nilpotency(self):
        """Test nilpotent off-diagonal generators and the diagonal spectrum"""
        for name, T in self.spaces.items():
            with self.subTest(space=name):
                report = self.analyzer.nilpotency_report(self.analyzer.induced_rep(T))
                self.assertEqual(report["violations"], [])
                self.assertEqual(report["spectrum"], [["0", "1/q"]])
                for index in report["offdiagonal"].values():
                    self.assertLessEqual(index, T.dim)

    def test_eigenvalue_transitions(self):
        """Test that eigenvalues change under z_kl as the closed forms predict"""
        seen = []
        for name, T in self.spaces.items():
            report = self.analyzer.nilpotency_report(self.analyzer.induced_rep(T))
            for entry in report["transitions"]:
                with self.subTest(space=name, generator=entry["generator"]):
                    self.assertTrue(entry["eigenvector"])
                    self.assertTrue(entry["matches"], f"{entry['mu']} != {entry['expected']}")
                seen.append((name, entry["generator"], entry["block"]))
        self.assertIn(("T+", "z[1,2]", "V+"), seen)
        self.assertIn(("T-", "z[2,1]", "V-"), seen)

    def test_raising_transition_values(self):
        """Test z_12 sends the counit eigenvector of T+ to eigenvalues (0, q^-1)"""
        report = self.analyzer.nilpotency_report(self.analyzer.induced_rep(self.spaces["T+"]))
        entry = next(e for e in report["transitions"] if e["generator"] == "z[1,2]")
        self.assertEqual(entry["mu"], ["0", "1/q"])
        self.assertEqual(entry["mu"], entry["expected"])

    def test_expected_eigenvalues(self):
        """Test the closed forms for V+ and V- steps"""
        q = RatFunc.q_power(1).value
        eps = [DOMAIN.zero, RatFunc.q_power(-1).value]
        self.assertEqual(self.analyzer.expected_eigenvalues(ZGen(1, 2), eps), eps)
        self.assertEqual(self.analyzer.expected_eigenvalues(ZGen(2, 1), eps), eps)
        self.assertEqual(self.analyzer.expected_eigenvalues(ZGen(1, 2), [DOMAIN.one, DOMAIN.zero]),
                         [1 / (q * q), 1 - 1 / (q * q)])
        self.assertEqual(self.analyzer.expected_eigenvalues(ZGen(2, 1), [DOMAIN.zero, DOMAIN.zero]),
                         [(q * q - 1) / q, (1 - q * q) / q])

    def test_raising_side_matrix(self):
        """Test that z_12 acts with square zero on T+"""
        R = self.analyzer.induced_rep(self.spaces["T+"])
        matrix = R.matrices[ZGen(1, 2)]
        self.assertFalse(all(not x for row in matrix.to_list() for x in row))
        self.assertTrue(all(not x for row in (matrix * matrix).to_list() for x in row))

    def test_trivial_space(self):
        """Test that T0 carries the counit representation"""
        R = self.analyzer.induced_rep(self.spaces["T0"])
        for g, matrix in R.matrices.items():
            with self.subTest(g=str(g)):
                self.assertEqual(matrix.to_list(), [[R.epsilon[g]]])

class TestInducedRepresentationsBeyondTwo(unittest.TestCase):
    """Test cases for induced representations of every classified space with N = 3, 4"""

    def test_every_case(self):
        """Test relations, nilpotency and the counit spectrum at (3, 1), (4, 1) and (4, 2)"""
        for N, r, truncation in [(3, 1, 3), (4, 1, 2), (4, 2, 2)]:
            analyzer = TangentAnalyzer(N, r, truncation)
            spectrum = [str(RatFunc.q_power(2 * i - 2 * N - 1)) if i > r else "0" for i in range(1, N + 1)]
            for T in analyzer.classify():
                with self.subTest(N=N, r=r, space=T.name):
                    R = analyzer.induced_rep(T)
                    self.assertEqual(analyzer.relations_hold(R), [])
                    self.assertTrue(analyzer.leibniz_holds(R))
                    report = analyzer.nilpotency_report(R)
                    self.assertEqual(report["violations"], [])
                    self.assertEqual(report["spectrum"], [spectrum])

class TestSymbolMultiplicities(unittest.TestCase):
    """Test cases for highest weights occurring twice among the symbols"""

    @classmethod
    def setUpClass(cls):
        cls.analyzer = TangentAnalyzer(4, 2, 3)
        cls.doubled = [w for w, d in cls.analyzer.symbol_multiplicities(3).items() if d == 2]

    def test_multiplicities(self):
        """Test that only degree three at (4, 2) has a highest weight of multiplicity two"""
        self.assertEqual(max(self.analyzer.symbol_multiplicities(3).values()), 2)
        self.assertTrue(self.doubled)
        self.assertEqual(set(self.analyzer.symbol_multiplicities(2).values()), {1})
        small = TangentAnalyzer(3, 1, 3)
        for k in (1, 2, 3):
            with self.subTest(k=k):
                self.assertEqual(set(small.symbol_multiplicities(k).values()), {1})

    def test_solve_multiplicity(self):
        """Test the solutions inside the full span, a single combination and the zero span"""
        weight = self.doubled[0]
        copies = self.analyzer.symbol_highest_weights(weight, 3)
        self.assertEqual(len(copies), 2)
        d, solutions = self.analyzer.solve_multiplicity(weight, 3, RowSpace(copies))
        self.assertEqual((d, len(solutions)), (2, 2))
        combined = vec_add(dict(copies[0]), copies[1])
        d, solutions = self.analyzer.solve_multiplicity(weight, 3, RowSpace([combined]))
        self.assertEqual((d, len(solutions)), (2, 1))
        self.assertTrue(RowSpace([combined]).contains(solutions[0]))
        self.assertEqual(self.analyzer.solve_multiplicity(weight, 3, RowSpace()), (2, []))

if __name__ == '__main__':
    unittest.main()
