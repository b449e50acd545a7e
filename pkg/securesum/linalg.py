"""
Span membership over the prime field Z_p, on top of :mod:`galois`.

A view's equations are stacked into one augmented matrix over ``GF(p)`` and
row-reduced once. In the reduced form every pivot row has a 1 in its pivot
column and zeros in every other pivot column, so a target functional lies
in the row span exactly when subtracting the pivot rows it touches leaves
no coefficient behind. The same combination of right-hand sides is the
value the view forces on it.
"""
from functools import lru_cache

import galois
import numpy as np

from securesum.exceptions import InconsistentViewError


@lru_cache(maxsize=None)
def prime_field(p):
    return galois.GF(int(p))


class EchelonBasis:
    def __init__(self, equations, size, modulus):
        self.field = GF = prime_field(modulus)
        self.size = size

        rows = []
        for equation in equations:
            row = [0] * (size + 1)
            for column, coefficient in equation.terms:
                row[column] = (row[column] + coefficient) % GF.order
            row[size] = equation.constant % GF.order
            rows.append(row)

        if rows:
            reduced = GF(rows).row_reduce(ncols=size)
            coefficients, constants = reduced[:, :size], reduced[:, size]
            has_pivot = np.any(coefficients != 0, axis=1)
            if np.any(constants[~has_pivot] != 0):
                raise InconsistentViewError("the view's equations contradict each other")
            self._rows, self._rhs = coefficients[has_pivot], constants[has_pivot]
        else:
            self._rows, self._rhs = GF.Zeros((0, size)), GF.Zeros(0)

        self._pivot_columns = np.argmax(self._rows != 0, axis=1)
        self._row_of = {int(column): i for i, column in enumerate(self._pivot_columns)}

    @classmethod
    def from_equations(cls, equations, size, modulus):
        return cls(tuple(equations), size, modulus)

    def _target(self, terms):
        coefficients = [0] * self.size
        for column, coefficient in terms:
            coefficients[column] = (coefficients[column] + coefficient) % self.field.order
        return self.field(coefficients)

    def determine(self, terms):
        """``(True, value)`` when the functional is in the row span, else ``(False, None)``."""
        target = self._target(terms)
        touched = [self._row_of[int(c)] for c in np.flatnonzero(target != 0) if int(c) in self._row_of]
        if not touched:
            return (True, 0) if not np.any(target != 0) else (False, None)

        factors = target[self._pivot_columns[touched]][np.newaxis, :]
        residual = target - (factors @ self._rows[touched])[0]
        if np.any(residual != 0):
            return False, None
        value = (factors @ self._rhs[touched][:, np.newaxis])[0, 0]
        return True, int(value)
