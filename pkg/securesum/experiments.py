"""
Experiment commands behind ``manage.py run|sweep|montecarlo|verify``.

Each ``cmd_*`` takes a validated :class:`ExperimentSpec` and returns an
:class:`Outcome`: the lines for standard output and the files to write.
Nothing touches the filesystem here, so a failing experiment never leaves
a partial file behind.
"""
import csv
import io
import itertools
import logging
import os
from dataclasses import dataclass, field, replace

from django.conf import settings

from securesum.adversary import (
    Coalition,
    InferenceMode,
    VictimClass,
    analyse,
    exhaustive_pair_sweep,
    extract_view,
    linear_oracle,
    monte_carlo_leakage,
    random_inputs,
)
from securesum.arithmetic import INPUT_STREAM, draw_residues, party_stream
from securesum.engine import Config, ProtocolKind, compute_metrics, execute, run_protocol, serialize_transcript
from securesum.enumeration import BruteForceOracle
from securesum.exceptions import ConfigurationError
from securesum.serializers import (
    ExperimentSpecSerializer,
    LeakageReportSerializer,
    MonteCarloReportSerializer,
    render_json,
)
from securesum.topology import RingOrder, neighbor_pairs, neighbors, order_for_round
from securesum.utils import parse_config_file, party_label

logger = logging.getLogger(__name__)

# verify draws its correctness cases from party_stream(seed, INPUT_STREAM, VERIFY_STREAM).
VERIFY_STREAM = 2

# Enumeration checks run over a field small enough to try every assignment.
ENUMERATION_MODULUS = 5

CSV_COLUMNS = ("n", "protocol", "coalition", "victim", "leaked", "segments_learned")
SUMMARY_COALITION = "*"

SETTINGS_KEYS = {
    "modulus": "MODULUS",
    "seed": "SEED",
    "trials": "TRIALS",
    "cases": "CASES",
    "coalition_size": "COALITION_SIZE",
    "jobs": "JOBS",
    "inference": "INFERENCE",
}


@dataclass(frozen=True)
class ExperimentSpec:
    command: str
    modulus: int
    seed: int
    trials: int
    cases: int
    coalition_size: int
    protocol: str = ProtocolKind.CK_SECURE.value
    n: tuple = None
    coalition: tuple = None
    inputs: tuple = None
    segments: int = None
    out: str = None
    report: str = None
    jobs: int = None
    initiator_mask: bool = False
    inference: str = InferenceMode.LINEAR.value

    @property
    def kind(self):
        return ProtocolKind(self.protocol)

    @property
    def workers(self):
        return self.jobs or os.cpu_count() or 1

    def config(self, n=None):
        return Config(
            n=self.n[0] if n is None else n,
            modulus=self.modulus,
            kind=self.kind,
            master_seed=self.seed,
            initiator_mask=self.initiator_mask,
            segments=self.segments,
        )


@dataclass(frozen=True)
class Outcome:
    lines: list = field(default_factory=list)
    files: dict = field(default_factory=dict)
    ok: bool = True


def _first_error(errors):
    name, messages = next(iter(errors.items()))
    message = messages[0] if isinstance(messages, list) else messages
    return str(message) if name == "non_field_errors" else f"{name}: {message}"


def build_spec(command, options):
    """
    Merge ``settings.SECURESUM`` defaults, the ``--config`` file and the
    command-line flags (in increasing precedence) and validate the result.

    :param options: Flag values; ``None`` means the flag was not given.
    :raises ConfigurationError: On an unreadable config file, an unknown key
        or options that fail validation.
    """
    defaults = settings.SECURESUM
    merged = {name: defaults[key] for name, key in SETTINGS_KEYS.items()}

    config_path = options.get("config")
    if config_path:
        from_file = parse_config_file(config_path)
        unknown = sorted(set(from_file) - set(ExperimentSpecSerializer().fields) - {"command"})
        if unknown:
            raise ConfigurationError(f"{config_path}: unknown option {unknown[0]!r}")
        merged.update(from_file)

    merged.update({name: value for name, value in options.items() if value is not None and name != "config"})
    merged["command"] = command

    serializer = ExperimentSpecSerializer(data=merged, context={"sweep_max_n": defaults["SWEEP_MAX_N"]})
    if not serializer.is_valid():
        message = _first_error(serializer.errors)
        logger.warning("rejected %s configuration: %s", command, message)
        raise ConfigurationError(message)
    return serializer.save()


# Run
def cmd_run(spec):
    config = spec.config()
    inputs = list(spec.inputs) if spec.inputs is not None else random_inputs(config.n, config.modulus, spec.seed)
    announced, transcript = run_protocol(config, inputs)

    outcome = Outcome(lines=[f"announced {announced}"])
    if spec.out:
        outcome.files[spec.out] = serialize_transcript(transcript)

    if spec.coalition is not None:
        report = analyse(config, inputs, Coalition.of(spec.coalition, config.n), spec.inference)
        rendered = render_json(LeakageReportSerializer(report).data)
        if spec.report:
            outcome.files[spec.report] = rendered
        else:
            outcome.lines.append(rendered.rstrip("\n"))
    return outcome


# Sweep
def _sweep_rows(n, sweep):
    protocol = sweep.config.kind.value
    rows = [
        (n, protocol, str(Coalition(entry.coalition)), party_label(entry.verdict.victim),
         int(entry.verdict.leaked), entry.verdict.segments_learned)
        for entry in sweep.entries
    ]
    for cls, counts in sweep.aggregates.items():
        rows.append((n, protocol, SUMMARY_COALITION, cls, counts["leaked"], counts["segments_learned"]))
    return rows


def cmd_sweep(spec):
    lo, hi = spec.n
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)

    for n in range(lo, hi + 1):
        sweep = exhaustive_pair_sweep(
            n, spec.kind, spec.modulus, spec.seed,
            initiator_mask=spec.initiator_mask,
            inference=spec.inference,
            jobs=spec.workers,
            segments=spec.segments,
        )
        writer.writerows(_sweep_rows(n, sweep))

    text = buffer.getvalue()
    if spec.out:
        return Outcome(lines=[f"wrote {hi - lo + 1} sweep(s) to {spec.out}"], files={spec.out: text})
    return Outcome(lines=text.splitlines())


# Monte Carlo
def _estimate_line(cls, estimate):
    if estimate.probability is None:
        return f"{cls} p=n/a se=n/a leaks=0/0"
    return (f"{cls} p={estimate.probability:.6f} se={estimate.standard_error:.6f} "
            f"leaks={estimate.leaks}/{estimate.observations}")


def cmd_montecarlo(spec):
    report = monte_carlo_leakage(
        spec.config(), spec.trials, spec.coalition_size, spec.seed,
        inference=spec.inference,
        jobs=spec.workers,
    )
    outcome = Outcome(lines=[_estimate_line(cls, estimate) for cls, estimate in report.estimates.items()])
    path = spec.report or spec.out
    if path:
        outcome.files[path] = render_json(MonteCarloReportSerializer(report).data)
    return outcome


# Verify
@dataclass(frozen=True)
class Claim:
    status: str
    name: str
    detail: str

    def __str__(self):
        return f"{self.status:<5} {self.name:<30} {self.detail}"


def _claim(name, ok, detail):
    return Claim("PASS" if ok else "FAIL", name, detail)


def _check_correctness(spec, kinds=tuple(ProtocolKind), sizes=(4, 5, 8, 16), initiator_mask=False):
    rng = party_stream(spec.seed, INPUT_STREAM, VERIFY_STREAM)
    failures = 0
    for kind in kinds:
        for n in sizes:
            for _ in range(spec.cases):
                config = Config(n=n, modulus=spec.modulus, kind=kind,
                                master_seed=int(rng.integers(0, 2**63 - 1)), initiator_mask=initiator_mask)
                inputs = draw_residues(rng, n, config.modulus)
                announced, _ = run_protocol(config, inputs)
                failures += announced != sum(inputs) % spec.modulus
    total = len(kinds) * len(sizes) * spec.cases
    return failures == 0, f"{total - failures}/{total} announced sums correct"


def _check_orders():
    expected = ((1, 2, 3, 4), (1, 3, 2, 4), (1, 3, 4, 2))
    actual = tuple(order_for_round(4, j).order for j in range(1, 4))
    return actual == expected, "n=4 orders " + " | ".join(",".join(f"P{p}" for p in order) for order in actual)


def _check_complexity(modulus):
    wrong = []
    for n in range(4, 33):
        _, transcript = run_protocol(Config(n=n, modulus=modulus), [0] * n)
        metrics = compute_metrics(transcript)
        if (metrics.rounds, metrics.exchanges, metrics.messages) != (n - 1, n - 2, n * (n - 1)):
            wrong.append(n)
    detail = "rounds=n-1 exchanges=n-2 messages=n(n-1) for n=4..32"
    return not wrong, detail + (f"; wrong at n={wrong}" if wrong else "")


def _middle_leaks(spec, n_range, inference, initiator_mask, victims=VictimClass.MIDDLE):
    leaks = []
    for n in n_range:
        sweep = exhaustive_pair_sweep(n, ProtocolKind.CK_SECURE, spec.modulus, spec.seed,
                                      initiator_mask=initiator_mask, inference=inference, jobs=spec.workers)
        leaks += [
            (n, e.coalition, e.verdict.victim) for e in sweep.entries
            if e.verdict.leaked and (victims is None or e.verdict.victim_class == victims)
        ]
    return leaks


def _describe_leaks(leaks, limit=3):
    shown = ", ".join(
        f"n={n} {'+'.join(party_label(p) for p in coalition)}->{party_label(victim)}"
        for n, coalition, victim in leaks[:limit]
    )
    return shown + (", ..." if len(leaks) > limit else "")


def _check_baseline(spec):
    """Clifton bracketing pairs recover their victim; the fixed ring hands them every segment."""
    problems = []
    for n in range(4, 9):
        clifton = exhaustive_pair_sweep(n, ProtocolKind.CLIFTON, spec.modulus, spec.seed, jobs=1)
        ksecure = exhaustive_pair_sweep(n, ProtocolKind.K_SECURE, spec.modulus, spec.seed, jobs=1)
        for victim in range(1, n + 1):
            pred, succ = neighbors(RingOrder.sequential(n), victim)
            bracket = tuple(sorted((pred, succ)))
            verdict = clifton.matrix[bracket, victim]
            if not verdict.leaked or verdict.recovered_value != clifton.inputs[victim - 1]:
                problems.append(f"clifton n={n} {party_label(victim)}")
            if victim != 1 and ksecure.matrix[bracket, victim].segments_learned != ksecure.config.k:
                problems.append(f"ksecure n={n} {party_label(victim)}")
    detail = "bracketing pairs leak every Clifton victim and all ksecure segments, n=4..8"
    return not problems, detail + (f"; failed: {', '.join(problems[:3])}" if problems else "")


def _check_oracle_equivalence(spec):
    m = ENUMERATION_MODULUS
    compared, mismatches = 0, []
    for n in (4, 5, 6):
        run = execute(Config(n=n, modulus=m, master_seed=spec.seed), random_inputs(n, m, spec.seed))
        for members in itertools.combinations(range(1, n + 1), 2):
            c = Coalition(members)
            view = extract_view(run.transcript, c, run.shares.restrict(c.members))
            brute = BruteForceOracle(view, m)
            space = view.space
            for victim in range(1, n + 1):
                if victim in c:
                    continue
                targets = [space.input_functional(victim)]
                targets += [space.segment_functional(victim, j) for j in range(1, space.k + 1)]
                for target in targets:
                    exact = linear_oracle(view, target, m)
                    compared += 1
                    if brute.determine(target) != (exact.determined, exact.value):
                        mismatches.append(f"n={n} {c}->{party_label(victim)}")
    detail = f"{compared - len(mismatches)}/{compared} answers match enumeration over Z_{m}, ck n=4..6"
    return not mismatches, detail + (f"; differ: {', '.join(mismatches[:3])}" if mismatches else "")


def _check_neighbor_change():
    stuck = [(n, p) for n in range(4, 33) for p in range(2, n + 1) if len(set(neighbor_pairs(n, p))) < 2]
    return not stuck, "every middle party changes neighbors, n=4..32" + (f"; stuck: {stuck[:3]}" if stuck else "")


def _check_determinism(spec):
    config = Config(n=5, modulus=spec.modulus, master_seed=spec.seed)
    inputs = random_inputs(5, config.modulus, spec.seed)
    coalition = Coalition.of((2, 3), 5)

    def artifacts():
        run = execute(config, inputs)
        report = analyse(config, inputs, coalition)
        return serialize_transcript(run.transcript), render_json(LeakageReportSerializer(report).data)

    return artifacts() == artifacts(), "identical transcript and report bytes for repeated ck n=5 runs"


def _check_initiator_finding(spec):
    unmasked = analyse(Config(n=4, modulus=spec.modulus, master_seed=spec.seed),
                       random_inputs(4, spec.modulus, spec.seed), Coalition.of((2, 3), 4))
    p1 = next(v for v in unmasked.verdicts if v.victim == 1)
    masked_leaks = _middle_leaks(spec, [4], InferenceMode.LINEAR, True, victims=None)
    masked_ok, _ = _check_correctness(
        replace(spec, cases=min(spec.cases, 100)), kinds=(ProtocolKind.CK_SECURE,), sizes=(4,), initiator_mask=True
    )
    ok = p1.leaked and not masked_leaks and masked_ok
    return ok, (f"n=4 P2+P3 learn P1 unmasked ({'yes' if p1.leaked else 'no'}); "
                f"masked sweep leaks {len(masked_leaks)}; masked sums {'correct' if masked_ok else 'wrong'}")


def cmd_verify(spec):
    if spec.n:
        leakage_range = range(spec.n[0], spec.n[1] + 1)
    else:
        leakage_range = range(4, settings.SECURESUM["VERIFY_MAX_LEAKAGE_N"] + 1)
    span = f"n={leakage_range.start}..{leakage_range.stop - 1}"
    claims = []

    logger.info("verify: correctness over %d cases per (kind, n)", spec.cases)
    claims.append(_claim("1 correctness", *_check_correctness(spec)))
    claims.append(_claim("2 four-party orders", *_check_orders()))
    claims.append(_claim("3 rounds/exchanges/messages", *_check_complexity(spec.modulus)))

    logger.info("verify: pair sweeps over %s", span)
    bracketing = _middle_leaks(spec, leakage_range, InferenceMode.BRACKETING, False)
    claims.append(_claim("4a middle leakage, bracketing", not bracketing,
                         f"{len(bracketing)} leaking (pair, middle victim) verdicts, unmasked ck, {span}"))
    masked = _middle_leaks(spec, leakage_range, InferenceMode.LINEAR, True, victims=None)
    claims.append(_claim("4b leakage, linear, masked", not masked,
                         f"{len(masked)} leaking (pair, victim) verdicts, initiator-masked ck, {span}"))
    unmasked_linear = _middle_leaks(spec, leakage_range, InferenceMode.LINEAR, False)
    claims.append(Claim("INFO", "4c middle leakage, linear", (
        f"{len(unmasked_linear)} leaking verdicts, unmasked ck, {span}"
        + (f": {_describe_leaks(unmasked_linear)}" if unmasked_linear else "")
    )))

    claims.append(_claim("5 baseline collusion attack", *_check_baseline(spec)))
    claims.append(_claim("6 oracle equivalence", *_check_oracle_equivalence(spec)))
    claims.append(_claim("7 neighbor change", *_check_neighbor_change()))
    claims.append(_claim("8 determinism", *_check_determinism(spec)))
    claims.append(_claim("9 initiator mask repairs P1", *_check_initiator_finding(spec)))

    failed = sum(1 for claim in claims if claim.status == "FAIL")
    lines = [str(claim) for claim in claims]
    passed = sum(1 for claim in claims if claim.status == "PASS")
    lines.append(f"{passed} passed, {failed} failed")
    return Outcome(lines=lines, ok=failed == 0)


COMMANDS = {
    "run": cmd_run,
    "sweep": cmd_sweep,
    "montecarlo": cmd_montecarlo,
    "verify": cmd_verify,
}
