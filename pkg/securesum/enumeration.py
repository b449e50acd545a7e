"""
Brute-force determinacy oracle over a tiny prime field.

Enumerates every assignment of the unknowns consistent with a coalition
view and reports whether a target functional takes a single value on all
of them. Unknowns are grouped by protocol round: equations inside one
round are checked while enumerating that round's block, and the few
equations spanning rounds (the announced sum, own inputs) are resolved by
a dynamic program over their partial sums.
"""
import itertools
from collections import defaultdict

from securesum.exceptions import InconsistentViewError


class BruteForceOracle:
    def __init__(self, view, modulus):
        self.p = p = int(modulus)
        space = view.space

        blocks = defaultdict(list)
        for column in range(space.size):
            blocks[space.round_of(column)].append(column)
        block_of = {c: b for b, columns in blocks.items() for c in columns}

        fixed, local, self.cross = {}, defaultdict(list), []
        for equation in view.equations:
            terms = [(c, a % p) for c, a in equation.terms if a % p]
            owners = {block_of[c] for c, _ in terms}
            if len(terms) == 1:
                column, a = terms[0]
                value = equation.constant * pow(a, -1, p) % p
                if fixed.setdefault(column, value) != value:
                    raise InconsistentViewError(f"view fixes {space.label(column)} to two values")
            elif len(owners) == 1:
                local[owners.pop()].append((terms, equation.constant % p))
            else:
                self.cross.append((terms, equation.constant % p))

        self.blocks = []
        for b in sorted(blocks):
            columns = blocks[b]
            free = [c for c in columns if c not in fixed]
            feasible = []
            for values in itertools.product(range(p), repeat=len(free)):
                assignment = {c: fixed[c] for c in columns if c in fixed}
                assignment.update(zip(free, values))
                if all(sum(a * assignment[c] for c, a in terms) % p == rhs for terms, rhs in local[b]):
                    feasible.append(assignment)
            if not feasible:
                raise InconsistentViewError(f"round {b} has no consistent assignment")
            self.blocks.append((set(columns), feasible))

    def _partials(self, columns, assignment, functionals):
        return tuple(
            sum(a * assignment[c] for c, a in terms if c in columns) % self.p for terms in functionals
        )

    def values(self, target):
        """Every value ``target`` takes over the assignments consistent with the view."""
        p = self.p
        functionals = [terms for terms, _ in self.cross] + [list(target)]
        states = {(0,) * len(functionals)}
        for columns, feasible in self.blocks:
            steps = {self._partials(columns, assignment, functionals) for assignment in feasible}
            states = {tuple((s + d) % p for s, d in zip(state, step)) for state in states for step in steps}

        wanted = tuple(rhs for _, rhs in self.cross)
        return {state[-1] for state in states if state[:-1] == wanted}

    def determine(self, target):
        values = self.values(target)
        return (True, values.pop()) if len(values) == 1 else (False, None)
