import unittest
import sys
import os

# Add the src directory to the Python path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', 'src'))

from qfield import ONE, ZERO, Q, QHAT, RatFunc
from uq import E, F, K, Kinv, UElement
from grassmann import (BElement, MixedLetter, RewriteBudgetExceeded, ZGen, act, all_generators, embed,
                       epsilon, is_standard, pair_rules, parse_zword, reduction_rule, relation_table, reorder,
                       shifted_expansion, spanning_words, trace_constant, word_text, word_weight, z)

class TestGenerators(unittest.TestCase):
    """Test cases for z-generators and word syntax"""

    def test_blocks_and_order(self):
        """Test block membership and the V_- V_0 V_+ order"""
        self.assertEqual(z(2, 1).block, "-")
        self.assertEqual(z(1, 1).block, "0")
        self.assertEqual(z(1, 2).block, "+")
        self.assertTrue(is_standard((z(2, 1), z(1, 1), z(2, 2), z(1, 2))))
        self.assertFalse(is_standard((z(1, 2), z(2, 1))))

    def test_validation(self):
        """Test index checks"""
        with self.assertRaises(ValueError):
            ZGen(0, 1)
        with self.assertRaises(ValueError):
            z(3, 1).validate(2)

    def test_weights(self):
        """Test weights of generators and words"""
        self.assertEqual(z(1, 2).weight(2), (-1,))
        self.assertEqual(z(2, 1).weight(2), (1,))
        self.assertEqual(word_weight((z(1, 3), z(3, 1)), 3), (0, 0))

    def test_word_syntax(self):
        """Test reading and writing plain and shifted words"""
        word, shifted = parse_zword("z+[1,2]*z+[2,1]")
        self.assertEqual(word, (z(1, 2), z(2, 1)))
        self.assertTrue(shifted)
        self.assertEqual(word_text(word), "z[1,2]*z[2,1]")
        self.assertEqual(parse_zword("1"), ((), False))
        with self.assertRaises(ValueError):
            parse_zword("z[1,2]*z+[2,1]")

class TestCounit(unittest.TestCase):
    """Test cases for the counit of B"""

    def test_diagonal_values(self):
        """Test eps(z_kk) = q^(-2N-1+2k) for k > r and 0 otherwise"""
        self.assertEqual(epsilon(BElement.word(z(2, 2)), 2, 1), Q.inv())
        self.assertEqual(epsilon(BElement.word(z(1, 1)), 2, 1), ZERO)
        self.assertEqual(epsilon(BElement.word(z(1, 2)), 2, 1), ZERO)

    def test_trace_constant(self):
        """Test that the counit of the trace equals the trace constant"""
        for N, r in [(2, 1), (3, 1), (4, 1), (4, 2)]:
            with self.subTest(N=N, r=r):
                trace = BElement()
                for i in range(1, N + 1):
                    trace = trace + BElement.word(z(i, i))
                self.assertEqual(epsilon(trace, N, r), trace_constant(N, r))

    def test_counit_kills_relations(self):
        """Test that every tabulated relation lies in the kernel of the counit"""
        for N, r in [(2, 1), (3, 1)]:
            for rule in relation_table(N, r):
                with self.subTest(N=N, r=r, rule=rule.case_tag, lhs=word_text(rule.lhs)):
                    self.assertEqual(epsilon(rule.residual(), N, r), ZERO)

    def test_shifted_generators(self):
        """Test that shifted generators have zero counit"""
        word = (z(2, 2), z(2, 1))
        expansion = shifted_expansion(word, 2, 1)
        self.assertEqual(epsilon(expansion, 2, 1), ZERO)
        self.assertEqual(expansion, BElement({(z(2, 2), z(2, 1)): ONE, (z(2, 1),): -Q.inv()}))

class TestAction(unittest.TestCase):
    """Test cases for the left U-action on B"""

    def test_raising_operator(self):
        """Test E_1 |> z_12 = q^-1 z_22 - q z_11 at N=2"""
        expected = BElement({(z(2, 2),): Q.inv(), (z(1, 1),): -Q})
        self.assertEqual(act(E(1), BElement.word(z(1, 2)), 2), expected)

    def test_grouplike_scaling(self):
        """Test K_1 |> z_12 = q^-2 z_12"""
        self.assertEqual(act(K(1), BElement.word(z(1, 2)), 2),
                         BElement.word(z(1, 2), coeff=RatFunc.q_power(-2)))

    def test_constants(self):
        """Test that constants are scaled by the counit of U"""
        self.assertTrue(act(E(1), BElement.one(), 2).is_zero())
        self.assertEqual(act(K(1), BElement.constant(3), 2), BElement.constant(3))

    def test_action_on_products(self):
        """Test that the action on a product goes through the coproduct"""
        x = BElement.word(z(2, 1))
        y = BElement.word(z(1, 2))
        lhs = act(F(1), x * y, 2)
        # Delta(F) = F (x) 1 + K^-1 (x) F
        rhs = act(F(1), x, 2) * y + act(Kinv(1), x, 2) * act(F(1), y, 2)
        self.assertEqual(lhs, rhs)

    def test_action_is_a_module_structure(self):
        """Test (gh) |> x = g |> (h |> x)"""
        x = BElement.word(z(1, 2), z(2, 1))
        g, h = UElement.generator(E(1)), UElement.generator(F(1))
        self.assertEqual(act(g * h, x, 2), act(g, act(h, x, 2), 2))

class TestEmbedding(unittest.TestCase):
    """Test cases for the embedding into matrix coefficients"""

    def test_single_generator(self):
        """Test z_12 -> q^-1 u^2_1 S(u^2_2) at N=2, r=1"""
        image = embed((z(1, 2),), 2, 1)
        self.assertEqual(image, {(MixedLetter("u", 2, 1), MixedLetter("Su", 2, 2)): Q.inv()})

    def test_multiplicative(self):
        """Test that words embed to concatenated products"""
        image = embed((z(1, 2), z(2, 1)), 3, 1)
        self.assertEqual(len(image), 4)

class TestRelations(unittest.TestCase):
    """Test cases for the relation table and reordering"""

    def test_reorder_example(self):
        """Test z12 z21 = z21 z12 + q^-1 qhat z11 z22 - q qhat z11 z11 at N=2"""
        expected = BElement({
            (z(2, 1), z(1, 2)): ONE,
            (z(1, 1), z(2, 2)): Q.inv() * QHAT,
            (z(1, 1), z(1, 1)): -Q * QHAT,
        })
        self.assertEqual(reorder((z(1, 2), z(2, 1)), 2, 1), expected)

    def test_reorder_output_is_standard(self):
        """Test that every reordered word is in standard form"""
        for word in spanning_words(3, 1, 2):
            with self.subTest(word=word_text(word)):
                result = reorder(word, 3, 1)
                self.assertTrue(all(is_standard(w) for w in result.terms))

    def test_rewrites_use_the_relations_of_the_given_grassmannian(self):
        """Test that every rewrite at (4, 2) is a tabulated relation for r = 2 or its inversion"""
        table = {}
        for rule in relation_table(4, 2):
            table.setdefault((rule.lhs, rule.case_tag), []).append(rule.residual())
        gens = all_generators(4)
        for x in gens:
            for y in gens:
                rule = reduction_rule(x, y, 4, 2)
                if rule is None:
                    continue
                with self.subTest(x=str(x), y=str(y), tag=rule.case_tag):
                    if rule.inverted_from is None:
                        self.assertIn(rule.residual(), table[(rule.lhs, rule.case_tag)])
                    else:
                        swapped = (rule.lhs[1], rule.lhs[0])
                        self.assertIn(-rule.residual(), table[(swapped, rule.case_tag)])
        self.assertIn("ubdim", {rule.case_tag for rule in pair_rules(z(1, 3), z(3, 2), 4, 2)})
        self.assertNotIn("ubdim", {rule.case_tag for rule in pair_rules(z(1, 3), z(3, 2), 4, 1)})

    def test_reorder_output_is_standard_at_four_two(self):
        """Test standard output for words of length two at (4, 2)"""
        for word in spanning_words(4, 2, 2):
            with self.subTest(word=word_text(word)):
                self.assertTrue(all(is_standard(w) for w in reorder(word, 4, 2).terms))

    def test_inverted_rule(self):
        """Test that solving a rule for the swapped product gives the same relation"""
        rule = pair_rules(z(1, 2), z(2, 1), 2, 1)[0]
        inverted = rule.inverted()
        self.assertEqual(inverted.lhs, (z(2, 1), z(1, 2)))
        self.assertEqual(inverted.residual(), -rule.residual())
        self.assertEqual(inverted.inverted_from, rule.case_tag)

    def test_budget(self):
        """Test that an exhausted rewrite budget raises with a trace"""
        with self.assertRaises(RewriteBudgetExceeded) as ctx:
            reorder((z(1, 2), z(2, 1)), 2, 1, budget=0)
        self.assertTrue(ctx.exception.trace)

    def test_max_length(self):
        """Test that over-long inputs are refused"""
        with self.assertRaises(ValueError):
            reorder((z(1, 2), z(2, 1), z(1, 1)), 2, 1, max_len=2)

    def test_relation_table_range(self):
        """Test that r must lie strictly between 0 and N"""
        with self.assertRaises(ValueError):
            relation_table(3, 3)
        tags = {rule.case_tag for rule in relation_table(2, 1)}
        self.assertIn("trace", tags)
        self.assertIn("proj", tags)

    def test_spanning_word_count(self):
        """Test 1 + N^2 + N^4 words of length <= 2"""
        self.assertEqual(len(spanning_words(2, 1, 2)), 21)
        self.assertEqual(spanning_words(2, 1, 0), [()])

if __name__ == '__main__':
    unittest.main()
