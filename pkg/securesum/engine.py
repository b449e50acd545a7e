"""
Protocol engine: Clifton secure sum, k-Secure Sum and ck-Secure Sum.

Every party is a small state machine. The scheduler opens one round at a
time, tells each party its successor for that round, and delivers messages
strictly hop by hop, so a run is a pure function of ``(config, inputs)``.
"""
import logging
from collections import deque
from dataclasses import dataclass, field

from django.db import models

from securesum.arithmetic import (
    DEFAULT_MODULUS,
    SecretInput,
    SegmentMatrix,
    as_modulus,
    draw_residues,
    make_segments,
    party_stream,
)
from securesum.exceptions import (
    ConfigurationError,
    MalformedTranscriptError,
    ProtocolStateError,
)
from securesum.topology import INITIATOR, MIN_PARTIES, RingOrder, order_for_round, require_parties

logger = logging.getLogger(__name__)

CLIFTON_MIN_PARTIES = 3


class ProtocolKind(models.TextChoices):
    CLIFTON = "clifton", "Clifton secure sum"
    K_SECURE = "ksecure", "k-Secure Sum (fixed ring)"
    CK_SECURE = "ck", "ck-Secure Sum (changing neighbors)"

    @property
    def segmented(self):
        return self is not ProtocolKind.CLIFTON

    @property
    def min_parties(self):
        return MIN_PARTIES if self.segmented else CLIFTON_MIN_PARTIES


@dataclass(frozen=True)
class Config:
    n: int
    modulus: object = DEFAULT_MODULUS
    kind: ProtocolKind = ProtocolKind.CK_SECURE
    master_seed: int = 0
    initiator_mask: bool = False
    segments: int = None

    def __post_init__(self):
        try:
            kind = ProtocolKind(self.kind)
        except ValueError:
            raise ConfigurationError(f"unknown protocol kind {self.kind!r}") from None
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "modulus", as_modulus(self.modulus))
        object.__setattr__(self, "initiator_mask", bool(self.initiator_mask))
        require_parties(self.n, kind.min_parties)

        if isinstance(self.master_seed, bool) or not isinstance(self.master_seed, int) or self.master_seed < 0:
            raise ConfigurationError(f"seed must be a non-negative integer, got {self.master_seed!r}")
        if self.segments is not None:
            if kind is not ProtocolKind.K_SECURE:
                raise ConfigurationError(f"a segment count can only be chosen for {ProtocolKind.K_SECURE.value}")
            if isinstance(self.segments, bool) or not isinstance(self.segments, int) or self.segments < 1:
                raise ConfigurationError(f"segment count must be a positive integer, got {self.segments!r}")
            if self.segments == self.n - 1:
                object.__setattr__(self, "segments", None)

    @property
    def k(self):
        if self.kind is ProtocolKind.CLIFTON:
            return 1
        if self.kind is ProtocolKind.K_SECURE and self.segments is not None:
            return self.segments
        return self.n - 1

    @property
    def rounds(self):
        return self.k

    @property
    def masked(self):
        """Whether the initiator adds a random mask to the value it opens each round with."""
        return self.kind is ProtocolKind.CLIFTON or self.initiator_mask

    def order_for(self, j):
        if self.kind is ProtocolKind.CK_SECURE:
            return order_for_round(self.n, j)
        return RingOrder.sequential(self.n)


@dataclass(frozen=True)
class Message:
    round: int
    hop: int
    sender: int
    receiver: int
    value: int

    def __str__(self):
        return f"{self.round} {self.hop} {self.sender} {self.receiver} {self.value}"


@dataclass(frozen=True)
class Metrics:
    rounds: int
    messages: int
    exchanges: int


@dataclass(frozen=True)
class Transcript:
    config: Config
    orders: tuple
    messages: tuple
    announced_sum: int

    def round_messages(self, j):
        return tuple(m for m in self.messages if m.round == j)

    def validate(self):
        """Check the structural invariants; raises MalformedTranscriptError."""
        config, n, m = self.config, self.config.n, self.config.modulus.value
        if len(self.orders) != config.rounds:
            raise MalformedTranscriptError(f"expected {config.rounds} round orders, found {len(self.orders)}")
        if len(self.messages) != config.rounds * n:
            raise MalformedTranscriptError(
                f"expected {config.rounds * n} messages ({config.rounds} rounds x {n}), found {len(self.messages)}"
            )
        if not 0 <= self.announced_sum < m:
            raise MalformedTranscriptError(f"announced sum {self.announced_sum} is not a residue mod {m}")

        for index, message in enumerate(self.messages):
            j, t = divmod(index, n)
            j, t = j + 1, t + 1
            order = self.orders[j - 1]
            if order.n != n:
                raise MalformedTranscriptError(f"round {j} order has {order.n} parties, expected {n}")
            expected = (j, t, order.party_at(t), order.party_at(t + 1))
            if (message.round, message.hop, message.sender, message.receiver) != expected:
                raise MalformedTranscriptError(f"message '{message}' is out of place; expected round/hop/sender/receiver {expected}")
            if not 0 <= message.value < m:
                raise MalformedTranscriptError(f"message '{message}' carries a value outside [0, {m})")

        if not config.masked:
            totals = sum(m_.value for m_ in self.messages if m_.hop == n)
            if totals % m != self.announced_sum:
                raise MalformedTranscriptError("announced sum does not equal the sum of the round totals")
        return self


@dataclass(frozen=True)
class ProtocolRun:
    announced: int
    transcript: Transcript
    shares: SegmentMatrix


class Party:
    """
    A ring member: adds its segment for the round to whatever arrives and
    forwards the result to its successor.
    """

    IDLE = "idle"
    WAITING = "waiting"

    def __init__(self, party, segments, modulus):
        self.party = party
        self.segments = tuple(segments)
        self.modulus = modulus
        self.state = self.IDLE
        self.round = None
        self.successor = None

    def begin_round(self, j, successor):
        self.round, self.successor, self.state = j, successor, self.WAITING

    def receive(self, message):
        if self.state != self.WAITING or message.round != self.round:
            raise ProtocolStateError(f"P{self.party} cannot accept '{message}' in state {self.state}")
        self.state = self.IDLE
        value = (message.value + self.segments[self.round - 1]) % self.modulus.value
        return Message(self.round, message.hop + 1, self.party, self.successor, value)


class Initiator(Party):
    """P1: opens every round, collects the round totals and announces the sum."""

    def __init__(self, party, segments, modulus, masks=()):
        super().__init__(party, segments, modulus)
        self.masks = tuple(masks)
        self.total = 0

    def mask(self, j):
        return self.masks[j - 1] if self.masks else 0

    def open_round(self, j, successor):
        self.begin_round(j, successor)
        value = (self.mask(j) + self.segments[j - 1]) % self.modulus.value
        return Message(j, 1, self.party, successor, value)

    def receive(self, message):
        if self.state != self.WAITING or message.round != self.round:
            raise ProtocolStateError(f"P{self.party} cannot accept '{message}' in state {self.state}")
        self.state = self.IDLE
        self.total = (self.total + message.value - self.mask(message.round)) % self.modulus.value
        return None

    def announce(self):
        return self.total


def _normalize_inputs(config, inputs):
    inputs = list(inputs)
    if len(inputs) != config.n:
        raise ConfigurationError(f"expected {config.n} inputs for n={config.n}, got {len(inputs)}")

    normalized = {}
    for index, x in enumerate(inputs, start=1):
        if not isinstance(x, SecretInput):
            x = SecretInput(party=index, value=x)
        if x.party in normalized or not 1 <= x.party <= config.n:
            raise ConfigurationError(f"inputs must name each of P1..P{config.n} exactly once")
        config.modulus.check(x.value, f"input of P{x.party}")
        normalized[x.party] = x
    return [normalized[p] for p in range(1, config.n + 1)]


def deal_shares(config, inputs):
    """Split every input into segments (and draw the initiator's masks) from the per-party streams."""
    rows, masks = {}, ()
    for x in _normalize_inputs(config, inputs):
        rng = party_stream(config.master_seed, x.party)
        rows[x.party] = make_segments(x, config.k, config.modulus, rng).segments
        if x.party == INITIATOR and config.masked:
            masks = draw_residues(rng, config.rounds, config.modulus)
    return SegmentMatrix(modulus=config.modulus, rows=rows, masks=masks)


def execute(config, inputs):
    shares = deal_shares(config, inputs)
    initiator = Initiator(INITIATOR, shares.row(INITIATOR), config.modulus, shares.masks)
    parties = {INITIATOR: initiator}
    for p in shares.parties:
        if p != INITIATOR:
            parties[p] = Party(p, shares.row(p), config.modulus)

    orders, messages = [], []
    for j in range(1, config.rounds + 1):
        order = config.order_for(j)
        orders.append(order)
        for position, p in enumerate(order, start=1):
            if p != INITIATOR:
                parties[p].begin_round(j, order.party_at(position + 1))

        pending = deque([initiator.open_round(j, order.party_at(2))])
        while pending:
            message = pending.popleft()
            messages.append(message)
            forwarded = parties[message.receiver].receive(message)
            if forwarded is not None:
                pending.append(forwarded)

    announced = initiator.announce()
    transcript = Transcript(config=config, orders=tuple(orders), messages=tuple(messages), announced_sum=announced)
    logger.debug("%s n=%d seed=%d: %d messages, announced %d",
                 config.kind.value, config.n, config.master_seed, len(messages), announced)
    return ProtocolRun(announced=announced, transcript=transcript, shares=shares)


def run_protocol(config, inputs):
    run = execute(config, inputs)
    return run.announced, run.transcript


def round_values(order, round_segments, modulus, offset=0):
    """
    Prefix sums ``V_1..V_n`` of one round: ``V_t`` is what the party at
    position ``t`` sends on, ``V_n`` is the round total that reaches P1.
    ``offset`` is the initiator's mask for the round.
    """
    m = as_modulus(modulus)
    if set(round_segments) != set(order.order):
        raise ConfigurationError(f"need exactly one segment per party of {order}, got parties {sorted(round_segments)}")

    values, running = [], offset % m.value
    for p in order:
        running = (running + round_segments[p]) % m.value
        values.append(running)
    return values


def _transpositions(a, b):
    return sum(1 for x, y in zip(a.order, b.order) if x != y)


def compute_metrics(t):
    t.validate()
    exchanges = 0
    for before, after in zip(t.orders, t.orders[1:]):
        changed = _transpositions(before, after)
        if changed == 0:
            continue
        if changed != 2:
            raise MalformedTranscriptError(f"orders {before} -> {after} differ by more than one transposition")
        exchanges += 1
    return Metrics(
        rounds=len({m.round for m in t.messages}),
        messages=len(t.messages),
        exchanges=exchanges,
    )


def serialize_transcript(t):
    config = t.config
    lines = [
        f"n {config.n}",
        f"modulus {config.modulus.value}",
        f"kind {config.kind.value}",
        f"seed {config.master_seed}",
        f"initiator_mask {int(config.initiator_mask)}",
        f"segments {config.k}",
    ]
    lines += [f"order {j} " + " ".join(str(p) for p in order) for j, order in enumerate(t.orders, start=1)]
    lines += [str(m) for m in t.messages]
    lines.append(f"announced {t.announced_sum}")
    return "\n".join(lines) + "\n"


HEADER_KEYS = ("n", "modulus", "kind", "seed", "initiator_mask", "segments")


def parse_transcript(text):
    header, orders, messages, announced = {}, [], [], None
    try:
        for lineno, line in enumerate(text.splitlines(), start=1):
            fields = line.split()
            if not fields:
                continue
            if announced is not None:
                raise MalformedTranscriptError(f"line {lineno}: content after the announced sum")
            key = fields[0]
            if key in HEADER_KEYS and len(fields) == 2:
                header[key] = fields[1]
            elif key == "order":
                orders.append(RingOrder(tuple(int(p) for p in fields[2:])))
            elif key == "announced" and len(fields) == 2:
                announced = int(fields[1])
            elif len(fields) == 5:
                messages.append(Message(*(int(f) for f in fields)))
            else:
                raise MalformedTranscriptError(f"line {lineno}: unrecognised line {line!r}")

        missing = [k for k in HEADER_KEYS if k not in header]
        if missing or announced is None:
            raise MalformedTranscriptError(f"transcript is incomplete; missing {missing or ['announced']}")

        kind = ProtocolKind(header["kind"])
        n, segments = int(header["n"]), int(header["segments"])
        config = Config(
            n=n,
            modulus=int(header["modulus"]),
            kind=kind,
            master_seed=int(header["seed"]),
            initiator_mask=header["initiator_mask"] == "1",
            segments=segments if kind is ProtocolKind.K_SECURE else None,
        )
    except (ValueError, ConfigurationError) as exc:
        if isinstance(exc, MalformedTranscriptError):
            raise
        raise MalformedTranscriptError(f"cannot parse transcript: {exc}") from exc

    transcript = Transcript(config=config, orders=tuple(orders), messages=tuple(messages), announced_sum=announced)
    return transcript.validate()
