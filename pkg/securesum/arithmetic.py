"""
Modular arithmetic and additive segment sharing.

Every value a party sends is a residue modulo ``M``. A party's secret input
is split into ``k`` segments: the first ``k - 1`` are drawn uniformly from
``[0, M)`` and the last one is forced so that the segments sum to the input.
Any ``k - 1`` of them are therefore independent of the input.
"""
import logging
from dataclasses import dataclass, field
from functools import lru_cache

import gmpy2
import numpy as np

from securesum.exceptions import ConfigurationError, NonPrimeModulusError, UnknownPartyError
from securesum.topology import INITIATOR

logger = logging.getLogger(__name__)

DEFAULT_MODULUS = 2**61 - 1

# Segments are drawn as numpy int64 values.
MAX_MODULUS = 2**63 - 1

# Spawn key reserved for randomly drawn inputs; parties use their own index.
INPUT_STREAM = 0


@lru_cache(maxsize=None)
def is_prime(value):
    return bool(gmpy2.is_prime(value))


@dataclass(frozen=True)
class Modulus:
    value: int

    def __post_init__(self):
        if isinstance(self.value, bool) or not isinstance(self.value, int):
            raise ConfigurationError(f"modulus must be an integer, got {self.value!r}")
        if self.value < 2:
            raise ConfigurationError(f"modulus must be at least 2, got {self.value}")
        if self.value > MAX_MODULUS:
            raise ConfigurationError(f"modulus must not exceed 2**63 - 1, got {self.value}")

    @property
    def is_prime(self):
        return is_prime(self.value)

    def require_prime(self):
        if not self.is_prime:
            raise NonPrimeModulusError(self.value)
        return self

    def check(self, value, what="value"):
        """Reject anything outside ``[0, M)``; returns the value unchanged."""
        if isinstance(value, bool) or not isinstance(value, int) or not 0 <= value < self.value:
            raise ConfigurationError(f"{what} must be an integer in [0, {self.value}), got {value!r}")
        return value

    def __int__(self):
        return self.value

    def __str__(self):
        return str(self.value)


def as_modulus(modulus):
    return modulus if isinstance(modulus, Modulus) else Modulus(modulus)


@dataclass(frozen=True)
class SecretInput:
    party: int
    value: int


@dataclass(frozen=True)
class SegmentVector:
    party: int
    segments: tuple

    def __len__(self):
        return len(self.segments)


def mod_add(a, b, modulus):
    m = as_modulus(modulus)
    return (m.check(a, "a") + m.check(b, "b")) % m.value


def party_stream(master_seed, *key):
    """
    Independent, reproducible random stream for ``(master_seed, key)``.

    Party ``i`` draws from ``party_stream(seed, i)``; distinct keys never
    share state, so the same seed always yields the same transcript.
    """
    if isinstance(master_seed, bool) or not isinstance(master_seed, int) or master_seed < 0:
        raise ConfigurationError(f"seed must be a non-negative integer, got {master_seed!r}")
    return np.random.default_rng(np.random.SeedSequence(master_seed, spawn_key=key))


def draw_residues(rng, count, modulus):
    m = as_modulus(modulus)
    if count <= 0:
        return ()
    return tuple(int(v) for v in rng.integers(0, m.value, size=count, dtype=np.int64))


def make_segments(x, k, modulus, rng):
    m = as_modulus(modulus)
    if k < 1:
        raise ConfigurationError(f"segment count must be at least 1, got {k}")
    m.check(x.value, f"input of P{x.party}")

    head = draw_residues(rng, k - 1, m)
    last = (x.value - sum(head)) % m.value
    return SegmentVector(party=x.party, segments=head + (last,))


def recombine(sv, modulus):
    m = as_modulus(modulus)
    if not sv.segments:
        raise ConfigurationError(f"cannot recombine an empty segment list for P{sv.party}")
    return sum(sv.segments) % m.value


@dataclass(frozen=True)
class SegmentMatrix:
    """
    Ground-truth shares of a run: one segment row per party and, when the
    initiator masks its rounds, the per-round masks ``R_j``.

    A restricted matrix (see :meth:`restrict`) holds only what a coalition
    knows about itself.
    """

    modulus: Modulus
    rows: dict
    masks: tuple = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "rows", dict(self.rows))

    @property
    def parties(self):
        return tuple(sorted(self.rows))

    @property
    def k(self):
        return len(next(iter(self.rows.values()))) if self.rows else 0

    def row(self, party):
        try:
            return self.rows[party]
        except KeyError:
            raise UnknownPartyError(party) from None

    def segment(self, party, j):
        return self.row(party)[j - 1]

    def input_of(self, party):
        return recombine(SegmentVector(party, self.row(party)), self.modulus)

    def inputs(self):
        return {p: self.input_of(p) for p in self.parties}

    def restrict(self, members):
        members = set(members)
        unknown = members - set(self.rows)
        if unknown:
            raise UnknownPartyError(min(unknown))
        return SegmentMatrix(
            modulus=self.modulus,
            rows={p: r for p, r in self.rows.items() if p in members},
            masks=self.masks if INITIATOR in members else (),
        )
