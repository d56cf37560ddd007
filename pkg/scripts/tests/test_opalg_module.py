#!/usr/bin/python

import unittest
from fractions import Fraction
from pathlib import Path

import numpy as np

from model_module import PhysicalParams
from opalg_module import (
    I_UNIT, MINUS_I, MOMENTA, OPERATORS, POSITIONS, GaussianRational, NonFiniteCoefficient,
    OperatorPolynomial, adjoint, angular_momentum, antisymmetric_tensor, bopp_rule, bopp_shift,
    collect_orders, commutative_hamiltonian, commutator, constant, evaluate_coefficients,
    expanded_hamiltonian, generator, generators, reassemble)

GOLDEN = Path(__file__).parent / "golden"


class TestGaussianRational(unittest.TestCase):

    def test_arithmetic(self):
        a = GaussianRational(Fraction(1, 2), 1)
        b = GaussianRational(2, -1)
        self.assertEqual(a * b, GaussianRational(2, Fraction(3, 2)))
        self.assertEqual(a + 1, GaussianRational(Fraction(3, 2), 1))
        self.assertEqual(1 - a, GaussianRational(Fraction(1, 2), -1))
        self.assertEqual(I_UNIT ** 2, GaussianRational(-1))
        self.assertEqual(a.conjugate(), GaussianRational(Fraction(1, 2), -1))
        self.assertEqual(complex(a), complex(0.5, 1.0))
        self.assertFalse(GaussianRational())

    def test_render(self):
        self.assertEqual(str(GaussianRational(3)), "3")
        self.assertEqual(str(GaussianRational(Fraction(1, 2))), "(1/2)")
        self.assertEqual(str(I_UNIT), "i")
        self.assertEqual(str(MINUS_I), "-i")
        self.assertEqual(str(GaussianRational(0, Fraction(1, 2))), "(1/2)*i")
        self.assertEqual(str(GaussianRational(1, Fraction(-1, 3))), "(1-1/3*i)")

    def test_negative_power_rejected(self):
        with self.assertRaises(ValueError):
            I_UNIT ** -1


class TestOperatorPolynomial(unittest.TestCase):

    def setUp(self):
        self.x, self.y, self.z, self.p_x, self.p_y, self.p_z = generators()

    def test_like_terms_merge(self):
        self.assertEqual(self.x + self.x, self.x.scale(2))
        self.assertEqual(self.x - self.x, OperatorPolynomial())
        self.assertFalse(self.x - self.x)
        self.assertEqual((self.x - self.x).render(), "0")
        self.assertEqual(constant(3), 3)
        self.assertEqual(constant(0), 0)

    def test_normal_order(self):
        # p x = x p - i hbar
        self.assertEqual(self.p_x * self.x, self.x * self.p_x + constant(MINUS_I, hbar=1))
        # p_x and y commute
        self.assertEqual(self.p_x * self.y, self.y * self.p_x)

    def test_reordering_weights(self):
        # p^2 x^2 = x^2 p^2 - 4 i hbar x p - 2 hbar^2
        expected = (
            self.x * self.x * self.p_x * self.p_x
            + (self.x * self.p_x).scale(GaussianRational(0, -4), hbar=1)
            + constant(-2, hbar=2)
        )
        self.assertEqual((self.p_x ** 2) * (self.x ** 2), expected)

    def test_canonical_commutators(self):
        for i, position in enumerate(POSITIONS):
            for j, momentum in enumerate(MOMENTA):
                expected = constant(I_UNIT, hbar=1) if i == j else OperatorPolynomial()
                self.assertEqual(commutator(generator(position), generator(momentum)), expected)
            for other in POSITIONS:
                self.assertEqual(commutator(generator(position), generator(other)), 0)
        self.assertEqual(commutator(self.x, self.p_x).render(), "i*hbar")

    def test_product_order(self):
        # (x p_y)(y p_x) - (y p_x)(x p_y) = -i hbar (x p_x - y p_y)
        left = (self.x * self.p_y) * (self.y * self.p_x)
        right = (self.y * self.p_x) * (self.x * self.p_y)
        self.assertEqual(left - right, (self.x * self.p_x - self.y * self.p_y).scale(MINUS_I, hbar=1))

    def test_associativity(self):
        left = (self.p_x * self.x) * (self.p_x * self.y)
        right = self.p_x * (self.x * (self.p_x * self.y))
        self.assertEqual(left, right)

    def test_adjoint(self):
        self.assertEqual(adjoint(self.x * self.p_x), self.x * self.p_x + constant(MINUS_I, hbar=1))
        self.assertEqual(adjoint(constant(I_UNIT, theta=1)), constant(MINUS_I, theta=1))
        for axis in "xyz":
            self.assertEqual(adjoint(angular_momentum(axis)), angular_momentum(axis))
        self.assertEqual(adjoint(commutative_hamiltonian()), commutative_hamiltonian())

    def test_render(self):
        term = (self.x * self.p_y).scale(GaussianRational(0, Fraction(1, 2)), theta=1, hbar=-1)
        self.assertEqual(term.render(), "(1/2)*i*hbar^-1*theta * x^1 p_y^1")
        self.assertEqual(self.x.scale(-1, alpha=1).render(), "-alpha * x^1")

    def test_degree_and_power(self):
        self.assertEqual((self.x * self.p_z * self.p_z).degree, 3)
        self.assertEqual(self.x ** 0, constant(1))
        with self.assertRaises(ValueError):
            self.x ** -1

    def test_unknown_names(self):
        with self.assertRaises(KeyError):
            generator("q")
        with self.assertRaises(KeyError):
            constant(1, kappa=1)


class TestRandomIdentities(unittest.TestCase):

    def setUp(self):
        self.rng = np.random.default_rng(20240611)
        self.generators = generators()

    def random_polynomial(self, max_terms=3, max_degree=3):
        total = OperatorPolynomial()
        for _ in range(int(self.rng.integers(1, max_terms + 1))):
            coefficient = GaussianRational(
                Fraction(int(self.rng.integers(-4, 5)), int(self.rng.integers(1, 4))),
                Fraction(int(self.rng.integers(-4, 5)), int(self.rng.integers(1, 4))),
            )
            symbols = {name: int(self.rng.integers(-1, 2)) for name in ("hbar", "theta", "eta", "alpha")}
            term = constant(coefficient, **symbols)
            # operators are multiplied in random order so products need reordering
            for _ in range(int(self.rng.integers(0, max_degree + 1))):
                term = term * self.generators[int(self.rng.integers(0, 6))]
            total = total + term
        return total

    def test_algebra_laws(self):
        for trial in range(20):
            a, b, c = (self.random_polynomial() for _ in range(3))
            with self.subTest(trial=trial):
                self.assertEqual((a * b) * c, a * (b * c))
                jacobi = (
                    commutator(a, commutator(b, c))
                    + commutator(b, commutator(c, a))
                    + commutator(c, commutator(a, b))
                )
                self.assertEqual(jacobi, OperatorPolynomial())
                self.assertEqual(adjoint(adjoint(a)), a)
                self.assertEqual(adjoint(a * b), adjoint(b) * adjoint(a))
                self.assertEqual(commutator(a, a), OperatorPolynomial())
                self.assertEqual(reassemble(collect_orders(a)), a)


class TestBoppShift(unittest.TestCase):

    def test_rules_against_golden(self):
        expected = (GOLDEN / "bopp_rules.txt").read_text().splitlines()
        rendered = [f"{name} -> {bopp_rule(name).render()}" for name in OPERATORS]
        self.assertEqual(rendered, expected)

    def test_antisymmetric_tensor(self):
        self.assertEqual(antisymmetric_tensor(0, 1), 1)
        self.assertEqual(antisymmetric_tensor(2, 0), 1)
        self.assertEqual(antisymmetric_tensor(1, 0), -1)
        self.assertEqual(antisymmetric_tensor(1, 1), 0)

    def test_noncommutative_brackets(self):
        for i in range(3):
            for j in range(3):
                sign = antisymmetric_tensor(i, j)
                self.assertEqual(
                    commutator(bopp_rule(POSITIONS[i]), bopp_rule(POSITIONS[j])),
                    constant(I_UNIT * sign, theta=1),
                )
                self.assertEqual(
                    commutator(bopp_rule(MOMENTA[i]), bopp_rule(MOMENTA[j])),
                    constant(I_UNIT * sign, eta=1),
                )

    def test_effective_hbar(self):
        expected = constant(I_UNIT, alpha=2, hbar=1) + constant(
            GaussianRational(0, Fraction(1, 2)), theta=1, eta=1, alpha=-2, hbar=-1
        )
        for i in range(3):
            self.assertEqual(commutator(bopp_rule(POSITIONS[i]), bopp_rule(MOMENTA[i])), expected)
        # off the diagonal only the theta*eta cross term survives
        self.assertEqual(
            commutator(bopp_rule("x"), bopp_rule("p_y")),
            constant(GaussianRational(0, Fraction(-1, 4)), theta=1, eta=1, alpha=-2, hbar=-1),
        )

    def test_linearity(self):
        x, _, _, p_x, _, _ = generators()
        self.assertEqual(bopp_shift(x + p_x), bopp_rule("x") + bopp_rule("p_x"))
        self.assertEqual(bopp_shift(constant(3, omega=1)), constant(3, omega=1))
        self.assertEqual(bopp_shift(x * p_x), bopp_rule("x") * bopp_rule("p_x"))

    def test_commutative_limit(self):
        parts = collect_orders(expanded_hamiltonian())
        self.assertEqual(parts[(0, 0)], commutative_hamiltonian().scale(alpha=2))


class TestCollectOrders(unittest.TestCase):

    def test_orders_of_hamiltonian(self):
        parts = collect_orders(expanded_hamiltonian())
        self.assertEqual(list(parts), [(0, 0), (0, 1), (0, 2), (1, 0), (1, 1), (2, 0)])

    def test_reassembly(self):
        whole = expanded_hamiltonian()
        self.assertEqual(reassemble(collect_orders(whole)), whole)
        self.assertEqual(collect_orders(OperatorPolynomial()), {})

    def test_first_orders_free_of_alpha(self):
        parts = collect_orders(expanded_hamiltonian())
        for order in ((0, 1), (1, 0)):
            self.assertTrue(all(term.symbols["alpha"] == 0 for term in parts[order]))
        for order in ((1, 1), (0, 2), (2, 0)):
            self.assertTrue(all(term.symbols["alpha"] == -2 for term in parts[order]))


class TestEvaluateCoefficients(unittest.TestCase):

    def test_zero_terms_pruned(self):
        numeric = evaluate_coefficients(bopp_rule("x"), PhysicalParams(theta=0.0))
        self.assertEqual(numeric.as_dict(), {(1, 0, 0, 0, 0, 0): 1 + 0j})
        self.assertEqual(numeric.degree, 1)

    def test_values_substituted(self):
        numeric = evaluate_coefficients(constant(Fraction(1, 2), m=1, omega=2), PhysicalParams(m=2.0, omega=3.0))
        self.assertEqual(numeric.as_dict(), {(0, 0, 0, 0, 0, 0): 9 + 0j})

    def test_imaginary_unit(self):
        numeric = evaluate_coefficients(constant(I_UNIT, hbar=1), PhysicalParams())
        self.assertEqual(numeric.as_dict(), {(0, 0, 0, 0, 0, 0): 1j})

    def test_overflow_is_reported(self):
        with self.assertRaises(NonFiniteCoefficient):
            evaluate_coefficients(constant(1, hbar=-2), PhysicalParams(hbar=1e-200))


if __name__ == '__main__':
    unittest.main()
