"""
Ring orders per round and the neighbor-exchange schedule.

Parties are numbered ``1..n`` and sit on a ring; ``P1`` is the initiator
and keeps position 1 in every round. Between rounds ``j`` and ``j + 1``
``P2`` swaps places with ``P(j+2)``, so after ``n - 2`` swaps it has walked
from position 2 to position ``n``.
"""
from dataclasses import dataclass
from functools import lru_cache

from securesum.exceptions import ConfigurationError, TooFewPartiesError, UnknownPartyError

INITIATOR = 1
WALKER = 2
MIN_PARTIES = 4


def require_parties(n, minimum=MIN_PARTIES):
    if isinstance(n, bool) or not isinstance(n, int):
        raise ConfigurationError(f"party count must be an integer, got {n!r}")
    if n < minimum:
        raise TooFewPartiesError(n, minimum)
    return n


@dataclass(frozen=True)
class RingOrder:
    order: tuple

    def __post_init__(self):
        order = tuple(self.order)
        object.__setattr__(self, "order", order)
        if sorted(order) != list(range(1, len(order) + 1)):
            raise ConfigurationError(f"ring order {order} is not a permutation of P1..P{len(order)}")
        if order[0] != INITIATOR:
            raise ConfigurationError(f"ring order {order} does not keep P{INITIATOR} at position 1")

    @classmethod
    def sequential(cls, n):
        return cls(tuple(range(1, n + 1)))

    @property
    def n(self):
        return len(self.order)

    def __iter__(self):
        return iter(self.order)

    def __len__(self):
        return len(self.order)

    def __str__(self):
        return ",".join(f"P{p}" for p in self.order)

    def party_at(self, position):
        """Party at 1-based ``position``; position ``n + 1`` wraps to the initiator."""
        return self.order[(position - 1) % self.n]

    def position(self, party):
        try:
            return self.order.index(party) + 1
        except ValueError:
            raise UnknownPartyError(party) from None

    def swapped(self, a, b):
        order = list(self.order)
        i, j = self.position(a) - 1, self.position(b) - 1
        order[i], order[j] = order[j], order[i]
        return RingOrder(tuple(order))


@dataclass(frozen=True)
class Swap:
    after_round: int
    a: int
    b: int

    def __str__(self):
        return f"after r{self.after_round}: P{self.a}<->P{self.b}"


@dataclass(frozen=True)
class ExchangeSchedule:
    swaps: tuple

    def __len__(self):
        return len(self.swaps)

    def __iter__(self):
        return iter(self.swaps)


def initial_order(n):
    return RingOrder.sequential(require_parties(n))


@lru_cache(maxsize=None)
def exchange_schedule(n):
    # P(j+2) without reduction mod n: the last partner is Pn, never P0.
    require_parties(n)
    return ExchangeSchedule(tuple(Swap(j, WALKER, j + 2) for j in range(1, n - 1)))


@lru_cache(maxsize=None)
def order_for_round(n, j):
    require_parties(n)
    if isinstance(j, bool) or not isinstance(j, int) or not 1 <= j <= n - 1:
        raise ConfigurationError(f"round index must be in [1, {n - 1}], got {j!r}")

    order = initial_order(n)
    for swap in exchange_schedule(n).swaps[: j - 1]:
        order = order.swapped(swap.a, swap.b)
    return order


def neighbors(order, p):
    position = order.position(p)
    return order.party_at(position - 1), order.party_at(position + 1)


def neighbor_pairs(n, p):
    """``(pred, succ)`` of ``p`` in each of the ``n - 1`` ck rounds."""
    return tuple(neighbors(order_for_round(n, j), p) for j in range(1, n))
