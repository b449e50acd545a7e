from django.test import SimpleTestCase

from securesum.adversary import LinearEquation
from securesum.exceptions import InconsistentViewError
from securesum.linalg import EchelonBasis, prime_field

FIELD = 2**61 - 1


def equation(terms, constant):
    return LinearEquation(tuple(terms), constant)


class EchelonBasisTests(SimpleTestCase):
    def test_empty_view_determines_nothing(self):
        basis = EchelonBasis.from_equations((), 3, 5)
        self.assertEqual(basis.determine(((0, 1),)), (False, None))
        self.assertEqual(basis.determine(()), (True, 0))

    def test_sum_without_parts(self):
        basis = EchelonBasis.from_equations([equation(((0, 1), (1, 1)), 4)], 2, 5)
        self.assertEqual(basis.determine(((0, 1),)), (False, None))
        self.assertEqual(basis.determine(((0, 1), (1, 1))), (True, 4))
        self.assertEqual(basis.determine(((0, 2), (1, 2))), (True, 3))

    def test_substitution(self):
        basis = EchelonBasis.from_equations(
            [equation(((0, 1), (1, 1)), 3), equation(((1, 1),), 1)], 2, 5
        )
        self.assertEqual(basis.determine(((0, 1),)), (True, 2))
        self.assertEqual(basis.determine(((1, 4),)), (True, 4))

    def test_large_field_values_do_not_overflow(self):
        basis = EchelonBasis.from_equations(
            [equation(((0, 1), (1, 1), (2, 1)), 5), equation(((1, 1),), 5), equation(((2, 1),), FIELD - 2)],
            3,
            FIELD,
        )
        self.assertEqual(basis.determine(((0, 1),)), (True, 2))
        self.assertEqual(basis.determine(((0, FIELD - 1), (1, 3))), (True, 13))

    def test_redundant_equations_are_accepted(self):
        basis = EchelonBasis.from_equations(
            [equation(((0, 1), (1, 1)), 3), equation(((0, 2), (1, 2)), 6), equation(((2, 1),), 0)], 3, 7
        )
        self.assertEqual(basis.determine(((0, 1),)), (False, None))
        self.assertEqual(basis.determine(((2, 1), (0, 3), (1, 3))), (True, 2))

    def test_contradiction(self):
        with self.assertRaises(InconsistentViewError):
            EchelonBasis.from_equations([equation(((0, 1),), 1), equation(((0, 1),), 2)], 1, 5)

    def test_fields_are_shared(self):
        self.assertIs(prime_field(97), prime_field(97))
        self.assertEqual(prime_field(97).order, 97)
