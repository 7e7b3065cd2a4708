import unittest
import sys
import os
from fractions import Fraction

# Add the src directory to the Python path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', 'src'))

from qfield import (ONE, Q, QHAT, ZERO, DivisionByZero, PoleError, RatFunc, laurent_add, laurent_mul,
                    laurent_text, sum_ratfuncs)

class TestRatFunc(unittest.TestCase):
    """Test cases for exact arithmetic in Q(q)"""

    def test_normalize_cancels_common_factors(self):
        """Test that (q^2-1)/(q-1) is stored as q+1"""
        value = RatFunc.normalize([-1, 0, 1], [-1, 1])
        self.assertEqual(value, Q + 1)
        self.assertEqual(str(value), "q+1")

    def test_zero_denominator(self):
        """Test that a zero denominator is rejected"""
        with self.assertRaises(DivisionByZero):
            RatFunc.normalize(1, 0)
        with self.assertRaises(ZeroDivisionError):
            ONE / ZERO

    def test_inverse_and_powers(self):
        """Test inversion and negative powers"""
        self.assertEqual(Q.inv(), RatFunc.q_power(-1))
        self.assertEqual(Q ** -3 * Q ** 3, ONE)
        self.assertEqual(QHAT * Q, Q * Q - 1)

    def test_evaluate_at(self):
        """Test evaluation at a rational point"""
        self.assertEqual((Q + 1).evaluate_at(2), Fraction(3))
        self.assertEqual(QHAT.evaluate_at(Fraction(1, 2)), Fraction(-3, 2))

    def test_pole_detection(self):
        """Test that evaluating at a pole raises"""
        with self.assertRaises(PoleError):
            (ONE / (Q - 1)).evaluate_at(1)

    def test_text_form_round_trip(self):
        """Test the canonical text form and parsing it back"""
        self.assertEqual(str(QHAT), "(q^2-1)/q")
        self.assertEqual(RatFunc.parse("(q^2-1)/q"), QHAT)
        self.assertEqual(str(RatFunc.q_power(-2)), "1/q^2")

    def test_laurent_conversion(self):
        """Test conversion to and from Laurent dictionaries"""
        self.assertEqual(RatFunc.q_power(-2).to_laurent(), {-2: 1})
        self.assertEqual(QHAT.to_laurent(), {1: 1, -1: -1})
        self.assertIsNone((ONE / (Q + 1)).to_laurent())
        self.assertEqual(RatFunc.from_laurent({1: 1, -1: -1}), QHAT)

    def test_positive_laurent_exponents(self):
        """Test that Laurent dictionaries with only non-negative exponents keep their powers of q"""
        self.assertEqual(RatFunc.q_power(3), Q * Q * Q)
        self.assertEqual(RatFunc.q_power(1), Q)
        self.assertEqual(RatFunc.q_power(0), ONE)
        self.assertEqual(RatFunc.from_laurent({1: -1}), -Q)
        self.assertEqual(RatFunc.from_laurent({2: 1, 0: 1}), Q * Q + 1)
        self.assertEqual(RatFunc.from_laurent({}), ZERO)
        for exponent in range(-4, 5):
            with self.subTest(exponent=exponent):
                self.assertEqual(RatFunc.q_power(exponent).to_laurent(), {exponent: 1})
                self.assertEqual(RatFunc.q_power(exponent) * RatFunc.q_power(-exponent), ONE)

    def test_normalize_is_idempotent(self):
        """Test that normalizing an already reduced fraction changes nothing"""
        samples = [([-1, 0, 1], [-1, 1]), ([0, 2], [0, 0, 4]), ([3], [6]), ([1, 1], [0, 0, 1])]
        for num, den in samples:
            with self.subTest(num=num, den=den):
                once = RatFunc.normalize(num, den)
                twice = RatFunc.normalize(once.numerator, once.denominator)
                self.assertEqual(once, twice)
                self.assertEqual(str(once), str(twice))

    def test_field_axioms(self):
        """Test the field axioms on a handful of elements"""
        elements = [Q, QHAT, Q + 1, ONE / (Q - 1), RatFunc.q_power(-2) * 3, RatFunc.normalize([1, 0, 2], [5, 1])]
        for a in elements:
            with self.subTest(a=str(a)):
                self.assertEqual(a + ZERO, a)
                self.assertEqual(a * ONE, a)
                self.assertEqual(a + (-a), ZERO)
                self.assertEqual(a * a.inv(), ONE)
            for b in elements:
                with self.subTest(a=str(a), b=str(b)):
                    self.assertEqual(a + b, b + a)
                    self.assertEqual(a * b, b * a)
                    for c in elements[:3]:
                        self.assertEqual((a + b) + c, a + (b + c))
                        self.assertEqual((a * b) * c, a * (b * c))
                        self.assertEqual(a * (b + c), a * b + a * c)

    def test_evaluate_at_is_a_homomorphism(self):
        """Test that evaluation at a rational point respects sums, products and inverses"""
        elements = [Q, QHAT, Q + 1, RatFunc.q_power(-3), RatFunc.normalize([1, 0, 2], [5, 1])]
        for q0 in (Fraction(2), Fraction(-3, 5), Fraction(7, 3)):
            for a in elements:
                for b in elements:
                    with self.subTest(q0=q0, a=str(a), b=str(b)):
                        self.assertEqual((a + b).evaluate_at(q0), a.evaluate_at(q0) + b.evaluate_at(q0))
                        self.assertEqual((a * b).evaluate_at(q0), a.evaluate_at(q0) * b.evaluate_at(q0))
                self.assertEqual(a.inv().evaluate_at(q0), 1 / a.evaluate_at(q0))

    def test_coerce(self):
        """Test coercion from ints and fractions"""
        self.assertEqual(RatFunc.coerce(3), ONE + ONE + ONE)
        self.assertEqual(RatFunc.coerce(Fraction(1, 2)) * 2, ONE)
        with self.assertRaises(TypeError):
            RatFunc.coerce("q")

class TestLaurentHelpers(unittest.TestCase):
    """Test cases for the Laurent polynomial helpers"""

    def test_add_in_place_with_shift(self):
        """Test target += c * q^shift * source, dropping zeros"""
        target = {0: 1, 2: 1}
        laurent_add(target, {0: 1}, -1, 2)
        self.assertEqual(target, {0: 1})

    def test_multiply(self):
        """Test (q - 1/q)(q + 1/q) = q^2 - q^-2"""
        self.assertEqual(laurent_mul({1: 1, -1: -1}, {1: 1, -1: 1}), {2: 1, -2: -1})
        self.assertEqual(laurent_text({2: 1, -2: -1}), "(q^4-1)/q^2")

    def test_sum(self):
        """Test summing a sequence of rational functions"""
        self.assertEqual(sum_ratfuncs([Q, -Q.inv()]), QHAT)
        self.assertEqual(sum_ratfuncs([]), ZERO)

if __name__ == '__main__':
    unittest.main()
