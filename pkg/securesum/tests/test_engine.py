from django.test import SimpleTestCase
from hypothesis import given, settings
from hypothesis import strategies as st

from securesum.arithmetic import DEFAULT_MODULUS, Modulus, SecretInput
from securesum.engine import (
    Config,
    Message,
    Party,
    ProtocolKind,
    compute_metrics,
    deal_shares,
    execute,
    parse_transcript,
    round_values,
    run_protocol,
    serialize_transcript,
)
from securesum.exceptions import (
    ConfigurationError,
    MalformedTranscriptError,
    ProtocolStateError,
    TooFewPartiesError,
)
from securesum.topology import RingOrder, order_for_round


class ConfigTests(SimpleTestCase):
    def test_segment_counts(self):
        self.assertEqual(Config(n=6).k, 5)
        self.assertEqual(Config(n=6, kind=ProtocolKind.CLIFTON).k, 1)
        self.assertEqual(Config(n=6, kind=ProtocolKind.K_SECURE).k, 5)
        self.assertEqual(Config(n=6, kind=ProtocolKind.K_SECURE, segments=3).rounds, 3)

    def test_default_segment_count_is_not_recorded(self):
        explicit = Config(n=5, kind=ProtocolKind.K_SECURE, segments=4)
        self.assertIsNone(explicit.segments)
        self.assertEqual(explicit, Config(n=5, kind=ProtocolKind.K_SECURE))
        self.assertEqual(Config(n=5, kind=ProtocolKind.K_SECURE, segments=2).segments, 2)

    def test_masking(self):
        self.assertTrue(Config(n=4, kind=ProtocolKind.CLIFTON).masked)
        self.assertFalse(Config(n=4).masked)
        self.assertTrue(Config(n=4, initiator_mask=True).masked)

    def test_minimum_party_counts(self):
        with self.assertRaisesMessage(TooFewPartiesError, "too few parties"):
            Config(n=3)
        with self.assertRaises(TooFewPartiesError):
            Config(n=3, kind=ProtocolKind.K_SECURE)
        self.assertEqual(Config(n=3, kind=ProtocolKind.CLIFTON).n, 3)

    def test_invalid_values(self):
        for kwargs in ({"kind": "ring"}, {"master_seed": -1}, {"modulus": 1}, {"segments": 2},
                       {"kind": ProtocolKind.K_SECURE, "segments": 0}):
            with self.assertRaises(ConfigurationError):
                Config(n=4, **kwargs)

    def test_kind_accepts_its_value(self):
        self.assertIs(Config(n=4, kind="ksecure").kind, ProtocolKind.K_SECURE)


class RunProtocolTests(SimpleTestCase):
    def test_all_zero_inputs(self):
        for seed in (0, 1, 99):
            announced, _ = run_protocol(Config(n=4, modulus=97, master_seed=seed), [0, 0, 0, 0])
            self.assertEqual(announced, 0)

    def test_four_party_example(self):
        announced, transcript = run_protocol(Config(n=4, modulus=97, master_seed=42), [1, 2, 3, 4])
        self.assertEqual(announced, 10)
        self.assertEqual(
            [order.order for order in transcript.orders],
            [(1, 2, 3, 4), (1, 3, 2, 4), (1, 3, 4, 2)],
        )

    def test_clifton_example(self):
        announced, transcript = run_protocol(Config(n=4, modulus=97, kind=ProtocolKind.CLIFTON), [10, 20, 30, 96])
        self.assertEqual(announced, 59)
        self.assertEqual(len(transcript.messages), 4)

    def test_clifton_masks_the_first_hop(self):
        run = execute(Config(n=5, modulus=97, kind=ProtocolKind.CLIFTON, master_seed=3), [10, 20, 30, 40, 50])
        (r,) = run.shares.masks
        values = [m.value for m in run.transcript.messages]
        self.assertEqual(values[0], (r + 10) % 97)
        self.assertEqual((values[-1] - r) % 97, run.announced)

    def test_initiator_mask(self):
        run = execute(Config(n=5, modulus=97, master_seed=3, initiator_mask=True), [1, 2, 3, 4, 5])
        self.assertEqual(run.announced, 15)
        self.assertEqual(len(run.shares.masks), 4)
        first_hops = [m.value for m in run.transcript.messages if m.hop == 1]
        expected = [(r + run.shares.segment(1, j)) % 97 for j, r in enumerate(run.shares.masks, start=1)]
        self.assertEqual(first_hops, expected)

    def test_fixed_ring_for_ksecure(self):
        _, transcript = run_protocol(Config(n=5, kind=ProtocolKind.K_SECURE), [1, 2, 3, 4, 5])
        self.assertTrue(all(order == RingOrder.sequential(5) for order in transcript.orders))

    def test_ck_orders_follow_the_schedule(self):
        _, transcript = run_protocol(Config(n=7), list(range(7)))
        self.assertEqual(transcript.orders, tuple(order_for_round(7, j) for j in range(1, 7)))

    def test_input_count_mismatch(self):
        with self.assertRaises(ConfigurationError):
            run_protocol(Config(n=4), [1, 2, 3])

    def test_input_outside_the_ring(self):
        with self.assertRaises(ConfigurationError):
            run_protocol(Config(n=4, modulus=97), [1, 2, 3, 97])

    def test_secret_inputs_in_any_order(self):
        inputs = [SecretInput(3, 30), SecretInput(1, 10), SecretInput(4, 40), SecretInput(2, 20)]
        announced, _ = run_protocol(Config(n=4, modulus=97), inputs)
        self.assertEqual(announced, 100 % 97)

    def test_ksecure_and_ck_announce_the_same_sum(self):
        inputs = [5, 17, 23, 42, 8, 99]
        ck, _ = run_protocol(Config(n=6, master_seed=4), inputs)
        ksecure, _ = run_protocol(Config(n=6, master_seed=4, kind=ProtocolKind.K_SECURE), inputs)
        self.assertEqual(ck, ksecure)
        self.assertEqual(ck, sum(inputs))

    def test_deterministic(self):
        config = Config(n=8, master_seed=123, initiator_mask=True)
        first = serialize_transcript(run_protocol(config, list(range(8)))[1])
        second = serialize_transcript(run_protocol(config, list(range(8)))[1])
        self.assertEqual(first, second)

    def test_message_values_are_prefix_sums(self):
        run = execute(Config(n=6, modulus=101, master_seed=8), [3, 1, 4, 1, 5, 9])
        for message in run.transcript.messages:
            if message.hop == 1:
                continue
            previous = run.transcript.messages[run.transcript.messages.index(message) - 1]
            self.assertEqual(
                (message.value - previous.value) % 101,
                run.shares.segment(message.sender, message.round),
            )

    @settings(max_examples=1000, deadline=None)
    @given(
        kind=st.sampled_from(list(ProtocolKind)),
        n=st.sampled_from([4, 5, 8, 16]),
        seed=st.integers(min_value=0, max_value=2**63 - 1),
        data=st.data(),
    )
    def test_announced_sum_is_correct(self, kind, n, seed, data):
        inputs = data.draw(st.lists(st.integers(0, DEFAULT_MODULUS - 1), min_size=n, max_size=n))
        announced, transcript = run_protocol(Config(n=n, kind=kind, master_seed=seed), inputs)
        self.assertEqual(announced, sum(inputs) % DEFAULT_MODULUS)
        transcript.validate()


class RoundValuesTests(SimpleTestCase):
    def test_unit_segments(self):
        self.assertEqual(round_values(RingOrder((1, 2, 3, 4)), {1: 1, 2: 1, 3: 1, 4: 1}, 97), [1, 2, 3, 4])

    def test_zero_segments(self):
        self.assertEqual(round_values(RingOrder((1, 3, 4, 2)), dict.fromkeys(range(1, 5), 0), 97), [0, 0, 0, 0])

    def test_matches_the_transcript(self):
        run = execute(Config(n=4, modulus=97, master_seed=42), [1, 2, 3, 4])
        order = run.transcript.orders[1]
        segments = {p: run.shares.segment(p, 2) for p in order}
        self.assertEqual(round_values(order, segments, 97), [m.value for m in run.transcript.round_messages(2)])

    def test_offset_is_the_mask(self):
        self.assertEqual(round_values(RingOrder((1, 2, 3, 4)), {1: 1, 2: 1, 3: 1, 4: 1}, 97, offset=95), [96, 0, 1, 2])

    def test_segment_count_mismatch(self):
        with self.assertRaises(ConfigurationError):
            round_values(RingOrder((1, 2, 3, 4)), {1: 1, 2: 1, 3: 1}, 97)


class MetricsTests(SimpleTestCase):
    def metrics(self, n, **kwargs):
        return compute_metrics(run_protocol(Config(n=n, **kwargs), [0] * n)[1])

    def test_examples(self):
        m = self.metrics(4)
        self.assertEqual((m.rounds, m.exchanges, m.messages), (3, 2, 12))
        m = self.metrics(10)
        self.assertEqual((m.rounds, m.exchanges, m.messages), (9, 8, 90))
        m = self.metrics(6, kind=ProtocolKind.CLIFTON)
        self.assertEqual((m.rounds, m.exchanges, m.messages), (1, 0, 6))

    def test_fixed_ring_has_no_exchanges(self):
        self.assertEqual(self.metrics(7, kind=ProtocolKind.K_SECURE).exchanges, 0)

    def test_complexity_formulas(self):
        for n in range(4, 33):
            m = self.metrics(n)
            self.assertEqual((m.rounds, m.exchanges, m.messages), (n - 1, n - 2, n * (n - 1)), f"n={n}")


class PartyTests(SimpleTestCase):
    def test_idle_party_rejects_messages(self):
        party = Party(2, (1, 2, 3), Modulus(97))
        with self.assertRaises(ProtocolStateError):
            party.receive(Message(1, 1, 1, 2, 5))

    def test_forwards_with_its_segment(self):
        party = Party(2, (1, 2, 3), Modulus(97))
        party.begin_round(2, 4)
        self.assertEqual(party.receive(Message(2, 1, 1, 2, 96)), Message(2, 2, 2, 4, 1))
        with self.assertRaises(ProtocolStateError):
            party.receive(Message(2, 1, 1, 2, 96))


class TranscriptCodecTests(SimpleTestCase):
    def test_header_and_lines(self):
        _, transcript = run_protocol(Config(n=4, modulus=97, master_seed=42), [1, 2, 3, 4])
        lines = serialize_transcript(transcript).splitlines()
        self.assertEqual(lines[:6], ["n 4", "modulus 97", "kind ck", "seed 42", "initiator_mask 0", "segments 3"])
        self.assertEqual(lines[6:9], ["order 1 1 2 3 4", "order 2 1 3 2 4", "order 3 1 3 4 2"])
        self.assertEqual(len(lines), 6 + 3 + 12 + 1)
        self.assertEqual(lines[-1], "announced 10")
        self.assertEqual(lines[9], "1 1 1 2 7")

    def test_parse_restores_the_transcript(self):
        for config in (Config(n=5, initiator_mask=True, master_seed=3),
                       Config(n=6, kind=ProtocolKind.K_SECURE, segments=2),
                       Config(n=5, kind=ProtocolKind.K_SECURE, segments=4),
                       Config(n=4, kind=ProtocolKind.CLIFTON)):
            _, transcript = run_protocol(config, list(range(config.n)))
            self.assertEqual(parse_transcript(serialize_transcript(transcript)), transcript)

    def test_metrics_from_a_parsed_file(self):
        _, transcript = run_protocol(Config(n=9), [1] * 9)
        m = compute_metrics(parse_transcript(serialize_transcript(transcript)))
        self.assertEqual((m.rounds, m.exchanges, m.messages), (8, 7, 72))

    def test_malformed_transcripts(self):
        _, transcript = run_protocol(Config(n=4, modulus=97, master_seed=42), [1, 2, 3, 4])
        text = serialize_transcript(transcript)
        lines = text.splitlines()
        broken = [
            "\n".join(lines[:-1]),                                   # no announced sum
            text.replace("announced 10", "announced 11"),            # sum disagrees with round totals
            "\n".join(lines[:9] + lines[10:]),                       # message missing
            text.replace("kind ck", "kind ring"),
            text.replace("order 2 1 3 2 4", "order 2 1 3 3 4"),
            text + "1 1 1 2 3\n",
        ]
        for candidate in broken:
            with self.assertRaises(MalformedTranscriptError):
                parse_transcript(candidate)


class DealSharesTests(SimpleTestCase):
    def test_rows_recombine_to_the_inputs(self):
        shares = deal_shares(Config(n=5, modulus=97, master_seed=11), [9, 8, 7, 6, 5])
        self.assertEqual(shares.inputs(), {1: 9, 2: 8, 3: 7, 4: 6, 5: 5})
        self.assertEqual(shares.k, 4)
        self.assertEqual(shares.masks, ())
