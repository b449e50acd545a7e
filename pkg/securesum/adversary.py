"""
What a semi-honest coalition learns from a transcript.

A coalition sees every message one of its members sends or receives. Each
such value is a linear equation over the unknown segments ``d[i,j]`` (and
the initiator's masks ``r[j]`` when the protocol masks its rounds). Together
with the members' own segments and the announced sum this forms the
coalition view.

Two inference powers are offered:

* ``bracketing`` - the first-order rule closure: a segment is learned when
  the values entering and leaving its owner in that round are known.
* ``linear`` - exact span membership of the target over Z_M, which also
  captures cross-round inferences through the announced sum.

A victim's input is *leaked* when the view determines it but the ideal
world (own inputs plus announced sum) does not.
"""
import itertools
import logging
import math
import multiprocessing
from collections import Counter
from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np
from django.db import models

from securesum.arithmetic import INPUT_STREAM, as_modulus, draw_residues, party_stream
from securesum.engine import Config, execute
from securesum.exceptions import ConfigurationError, UnknownPartyError
from securesum.linalg import EchelonBasis
from securesum.topology import INITIATOR

logger = logging.getLogger(__name__)

# Monte Carlo trial t draws from party_stream(seed, INPUT_STREAM, TRIAL_STREAM, t).
TRIAL_STREAM = 1


class InferenceMode(models.TextChoices):
    LINEAR = "linear", "Exact linear span over Z_M"
    BRACKETING = "bracketing", "First-order neighbor bracketing rules"


class VictimClass(models.TextChoices):
    INITIATOR = "initiator", "Protocol initiator (P1)"
    MIDDLE = "middle", "Middle party"

    @classmethod
    def of(cls, party):
        return cls.INITIATOR if party == INITIATOR else cls.MIDDLE


@dataclass(frozen=True)
class UnknownSpace:
    """Column layout: ``d[i,j]`` at ``(i-1)*k + j-1``, then one mask per round."""

    n: int
    k: int
    masked: bool

    @property
    def size(self):
        return self.n * self.k + (self.k if self.masked else 0)

    def segment(self, party, j):
        return (party - 1) * self.k + (j - 1)

    def mask(self, j):
        return self.n * self.k + (j - 1)

    def round_of(self, column):
        if column >= self.n * self.k:
            return column - self.n * self.k + 1
        return column % self.k + 1

    def label(self, column):
        if column >= self.n * self.k:
            return f"r[{column - self.n * self.k + 1}]"
        party, j = divmod(column, self.k)
        return f"d[{party + 1},{j + 1}]"

    def input_functional(self, party):
        return tuple((self.segment(party, j), 1) for j in range(1, self.k + 1))

    def segment_functional(self, party, j):
        return ((self.segment(party, j), 1),)

    def total_functional(self):
        return tuple((self.segment(p, j), 1) for p in range(1, self.n + 1) for j in range(1, self.k + 1))


@dataclass(frozen=True)
class LinearEquation:
    terms: tuple
    constant: int
    source: str = ""

    def render(self, space):
        lhs = " + ".join(space.label(c) if a == 1 else f"{a}*{space.label(c)}" for c, a in self.terms)
        return f"{lhs} = {self.constant}"


@dataclass(frozen=True)
class Coalition:
    members: frozenset

    def __post_init__(self):
        object.__setattr__(self, "members", frozenset(self.members))

    @classmethod
    def of(cls, members, n):
        coalition = cls(frozenset(members))
        coalition.check(n)
        return coalition

    def check(self, n):
        for p in self.members:
            if isinstance(p, bool) or not isinstance(p, int) or not 1 <= p <= n:
                raise UnknownPartyError(p)
        if not 1 <= len(self.members) <= n - 1:
            raise ConfigurationError(
                f"coalition must be a non-empty proper subset of P1..P{n}, got {len(self.members)} members"
            )
        return self

    @property
    def parties(self):
        return tuple(sorted(self.members))

    def __contains__(self, party):
        return party in self.members

    def __len__(self):
        return len(self.members)

    def __str__(self):
        return "+".join(f"P{p}" for p in self.parties)


@dataclass(frozen=True)
class CoalitionView:
    coalition: Coalition
    space: UnknownSpace
    modulus: object
    equations: tuple

    @cached_property
    def basis(self):
        return EchelonBasis.from_equations(
            self.equations, self.space.size, as_modulus(self.modulus).require_prime().value
        )


@dataclass(frozen=True)
class OracleResult:
    determined: bool
    value: int = None

    def __bool__(self):
        return self.determined


@dataclass(frozen=True)
class LeakageVerdict:
    victim: int
    real_determined: bool
    ideal_determined: bool
    segments_learned: int
    recovered_value: int = None

    @property
    def leaked(self):
        return self.real_determined and not self.ideal_determined

    @property
    def victim_class(self):
        return VictimClass.of(self.victim)


def _observed(message, coalition):
    return message.sender in coalition or message.receiver in coalition


def extract_view(t, c, own_segments):
    config = t.config
    c.check(config.n)
    space = UnknownSpace(config.n, config.k, config.masked)
    missing = [p for p in c.parties if p not in own_segments.rows]
    if missing:
        raise ConfigurationError(f"own segments of P{missing[0]} are missing from the coalition knowledge")

    equations = []
    for message in t.messages:
        if not _observed(message, c):
            continue
        order, j = t.orders[message.round - 1], message.round
        terms = [(space.segment(order.party_at(s), j), 1) for s in range(1, message.hop + 1)]
        if config.masked:
            terms.append((space.mask(j), 1))
        equations.append(LinearEquation(
            tuple(terms), message.value, f"r{j} h{message.hop} P{message.sender}->P{message.receiver}"
        ))

    for p in c.parties:
        for j, value in enumerate(own_segments.row(p), start=1):
            equations.append(LinearEquation(space.segment_functional(p, j), value, f"own d[{p},{j}]"))
    if config.masked and INITIATOR in c:
        for j, value in enumerate(own_segments.masks, start=1):
            equations.append(LinearEquation(((space.mask(j), 1),), value, f"own r[{j}]"))

    equations.append(LinearEquation(space.total_functional(), t.announced_sum, "announced"))
    return CoalitionView(coalition=c, space=space, modulus=config.modulus, equations=tuple(equations))


def ideal_view(t, c, own_inputs):
    """What the coalition would know with a trusted third party: its inputs and the sum."""
    config = t.config
    c.check(config.n)
    space = UnknownSpace(config.n, config.k, config.masked)
    equations = [
        LinearEquation(space.input_functional(p), own_inputs[p], f"own x[{p}]") for p in c.parties
    ]
    equations.append(LinearEquation(space.total_functional(), t.announced_sum, "announced"))
    return CoalitionView(coalition=c, space=space, modulus=config.modulus, equations=tuple(equations))


def linear_oracle(v, target, modulus):
    m = as_modulus(modulus).require_prime()
    if m != as_modulus(v.modulus):
        raise ConfigurationError(f"view was built over Z_{v.modulus}, not Z_{m.value}")
    determined, value = v.basis.determine(target)
    return OracleResult(determined, value)


def rule_closure(v, t):
    """
    Segments ``(party, round)`` outside the coalition that the bracketing
    rules determine, iterated to a fixpoint within each round.

    ``V_0`` is the value the initiator starts from: 0, or its mask, which only
    the initiator knows.
    """
    config, c = t.config, v.coalition
    determined = set()
    for j, order in enumerate(t.orders, start=1):
        n = order.n
        known_value = [False] * (n + 1)
        known_value[0] = not config.masked or INITIATOR in c
        for message in t.messages[(j - 1) * n: j * n]:
            if _observed(message, c):
                known_value[message.hop] = True
        known_segment = [False] + [order.party_at(s) in c for s in range(1, n + 1)]

        changed = True
        while changed:
            changed = False
            for s in range(1, n + 1):
                before, after = known_value[s - 1], known_value[s]
                if not known_segment[s] and before and after:
                    known_segment[s] = changed = True
                elif known_segment[s] and before != after:
                    known_value[s - 1] = known_value[s] = changed = True

        determined.update(
            (order.party_at(s), j) for s in range(1, n + 1) if known_segment[s] and order.party_at(s) not in c
        )
    return frozenset(determined)


def _verdicts(run, c, inference):
    t, shares = run.transcript, run.shares
    view = extract_view(t, c, shares.restrict(c.members))
    ideal = ideal_view(t, c, {p: shares.input_of(p) for p in c.parties})
    space, m = view.space, t.config.modulus
    closure = rule_closure(view, t) if inference == InferenceMode.BRACKETING else None

    verdicts = []
    for victim in range(1, t.config.n + 1):
        if victim in c:
            continue
        target = space.input_functional(victim)
        if closure is None:
            real = linear_oracle(view, target, m)
            learned = sum(
                1 for j in range(1, space.k + 1)
                if linear_oracle(view, space.segment_functional(victim, j), m).determined
            )
        else:
            learned = sum(1 for j in range(1, space.k + 1) if (victim, j) in closure)
            real = linear_oracle(view, target, m) if learned == space.k else OracleResult(False)
        verdicts.append(LeakageVerdict(
            victim=victim,
            real_determined=real.determined,
            ideal_determined=linear_oracle(ideal, target, m).determined,
            segments_learned=learned,
            recovered_value=real.value,
        ))
    return verdicts


def _class_counts(verdicts):
    counts = Counter()
    for verdict in verdicts:
        cls = verdict.victim_class.value
        counts[cls, "observed"] += 1
        counts[cls, "leaked"] += int(verdict.leaked)
        counts[cls, "segments_learned"] += verdict.segments_learned
    return {
        cls.value: {key: counts[cls.value, key] for key in ("observed", "leaked", "segments_learned")}
        for cls in VictimClass
    }


@dataclass(frozen=True)
class LeakageReport:
    config: Config
    coalition: Coalition
    inference: InferenceMode
    verdicts: tuple

    @property
    def aggregates(self):
        return _class_counts(self.verdicts)


def analyse(config, inputs, c, inference=InferenceMode.LINEAR):
    config.modulus.require_prime()
    inference = InferenceMode(inference)
    c = c if isinstance(c, Coalition) else Coalition(c)
    c.check(config.n)
    run = execute(config, inputs)
    return LeakageReport(config=config, coalition=c, inference=inference, verdicts=tuple(_verdicts(run, c, inference)))


def leakage_report(config, inputs, c, inference=InferenceMode.LINEAR):
    return list(analyse(config, inputs, c, inference).verdicts)


def random_inputs(n, modulus, seed):
    return list(draw_residues(party_stream(seed, INPUT_STREAM), n, modulus))


def _pool(jobs):
    return multiprocessing.Pool(processes=jobs)


def _pair_task(args):
    config, inputs, members, inference = args
    c = Coalition(members)
    return c.parties, _verdicts(execute(config, inputs), c, inference)


@dataclass(frozen=True)
class SweepEntry:
    coalition: tuple
    verdict: LeakageVerdict


@dataclass(frozen=True)
class PairSweep:
    config: Config
    inference: InferenceMode
    inputs: tuple
    entries: tuple

    @property
    def matrix(self):
        return {(e.coalition, e.verdict.victim): e.verdict for e in self.entries}

    @property
    def aggregates(self):
        return _class_counts(e.verdict for e in self.entries)

    def leaking_coalitions(self, victim):
        return tuple(e.coalition for e in self.entries if e.verdict.victim == victim and e.verdict.leaked)


def exhaustive_pair_sweep(n, kind, modulus, seed, initiator_mask=False, inference=InferenceMode.LINEAR,
                          jobs=1, inputs=None, segments=None):
    config = Config(n=n, modulus=modulus, kind=kind, master_seed=seed, initiator_mask=initiator_mask,
                    segments=segments)
    config.modulus.require_prime()
    inference = InferenceMode(inference)
    inputs = tuple(inputs) if inputs is not None else tuple(random_inputs(n, config.modulus, seed))
    pairs = list(itertools.combinations(range(1, n + 1), 2))
    logger.info("sweeping %d pairs for %s n=%d (%s inference)", len(pairs), config.kind.value, n, inference.value)

    if jobs > 1:
        with _pool(jobs) as pool:
            results = pool.map(_pair_task, [(config, inputs, pair, inference) for pair in pairs])
    else:
        run = execute(config, inputs)
        results = [(pair, _verdicts(run, Coalition(pair), inference)) for pair in pairs]

    entries = tuple(
        SweepEntry(coalition, verdict)
        for coalition, verdicts in sorted(results, key=lambda result: result[0])
        for verdict in verdicts
    )
    return PairSweep(config=config, inference=inference, inputs=inputs, entries=entries)


@dataclass(frozen=True)
class ClassEstimate:
    observations: int
    leaks: int

    @property
    def probability(self):
        return self.leaks / self.observations if self.observations else None

    @property
    def standard_error(self):
        p = self.probability
        return math.sqrt(p * (1 - p) / self.observations) if p is not None else None


@dataclass(frozen=True)
class MonteCarloReport:
    config: Config
    inference: InferenceMode
    trials: int
    coalition_size: int
    seed: int
    estimates: dict = field(default_factory=dict)


def _trial_task(args):
    config, coalition_size, seed, trial, inference = args
    rng = party_stream(seed, INPUT_STREAM, TRIAL_STREAM, trial)
    trial_config = replace(config, master_seed=int(rng.integers(0, 2**63 - 1)))
    inputs = draw_residues(rng, config.n, config.modulus)
    members = rng.choice(np.arange(1, config.n + 1), size=coalition_size, replace=False)
    c = Coalition(frozenset(int(p) for p in members))

    counts = Counter()
    for verdict in _verdicts(execute(trial_config, inputs), c, inference):
        counts[verdict.victim_class.value, "observed"] += 1
        counts[verdict.victim_class.value, "leaked"] += int(verdict.leaked)
    return counts


def monte_carlo_leakage(config, trials, coalition_size, seed, inference=InferenceMode.LINEAR, jobs=1):
    if isinstance(trials, bool) or not isinstance(trials, int) or trials < 1:
        raise ConfigurationError(f"trials must be a positive integer, got {trials!r}")
    if not 1 <= coalition_size <= config.n - 1:
        raise ConfigurationError(f"coalition size must be in [1, {config.n - 1}], got {coalition_size}")
    config.modulus.require_prime()
    inference = InferenceMode(inference)
    tasks = [(config, coalition_size, seed, trial, inference) for trial in range(trials)]
    logger.info("running %d Monte Carlo trials for %s n=%d", trials, config.kind.value, config.n)

    totals = Counter()
    if jobs > 1:
        with _pool(jobs) as pool:
            for counts in pool.imap_unordered(_trial_task, tasks, chunksize=max(1, trials // (jobs * 8))):
                totals.update(counts)
    else:
        for task in tasks:
            totals.update(_trial_task(task))

    estimates = {
        cls.value: ClassEstimate(observations=totals[cls.value, "observed"], leaks=totals[cls.value, "leaked"])
        for cls in VictimClass
    }
    return MonteCarloReport(config=config, inference=inference, trials=trials, coalition_size=coalition_size,
                            seed=seed, estimates=estimates)
