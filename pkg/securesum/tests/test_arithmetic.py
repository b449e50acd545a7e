from collections import Counter

from django.test import SimpleTestCase
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import chisquare

from securesum.arithmetic import (
    DEFAULT_MODULUS,
    Modulus,
    SecretInput,
    SegmentMatrix,
    SegmentVector,
    as_modulus,
    draw_residues,
    make_segments,
    mod_add,
    party_stream,
    recombine,
)
from securesum.exceptions import ConfigurationError, NonPrimeModulusError, UnknownPartyError


class ModulusTests(SimpleTestCase):
    def test_default_is_the_mersenne_prime(self):
        self.assertEqual(DEFAULT_MODULUS, 2**61 - 1)
        self.assertTrue(Modulus(DEFAULT_MODULUS).is_prime)

    def test_rejects_values_below_two(self):
        for value in (0, 1, -7):
            with self.assertRaises(ConfigurationError):
                Modulus(value)

    def test_rejects_values_beyond_int64(self):
        with self.assertRaises(ConfigurationError):
            Modulus(2**63)

    def test_rejects_non_integers(self):
        for value in (97.0, "97", True):
            with self.assertRaises(ConfigurationError):
                Modulus(value)

    def test_require_prime(self):
        self.assertEqual(Modulus(97).require_prime(), Modulus(97))
        with self.assertRaises(NonPrimeModulusError):
            Modulus(100).require_prime()

    def test_check_rejects_out_of_range_residues(self):
        m = Modulus(97)
        self.assertEqual(m.check(96), 96)
        for value in (-1, 97, 1.5):
            with self.assertRaises(ConfigurationError):
                m.check(value)

    def test_as_modulus_passes_instances_through(self):
        m = Modulus(5)
        self.assertIs(as_modulus(m), m)
        self.assertEqual(as_modulus(5), m)


class ModAddTests(SimpleTestCase):
    def test_examples(self):
        self.assertEqual(mod_add(0, 0, 97), 0)
        self.assertEqual(mod_add(96, 5, 97), 4)
        self.assertEqual(mod_add(60, 60, 97), 23)

    def test_large_operands_do_not_overflow(self):
        m = DEFAULT_MODULUS
        self.assertEqual(mod_add(m - 1, m - 1, m), m - 2)

    def test_rejects_unreduced_operands(self):
        with self.assertRaises(ConfigurationError):
            mod_add(97, 1, 97)


class SegmentTests(SimpleTestCase):
    def test_single_segment_is_the_value(self):
        sv = make_segments(SecretInput(1, 5), 1, 97, party_stream(0, 1))
        self.assertEqual(sv.segments, (5,))

    def test_zero_splits_into_segments_summing_to_zero(self):
        sv = make_segments(SecretInput(2, 0), 3, 97, party_stream(3, 2))
        a, b, last = sv.segments
        self.assertEqual(last, (97 - a - b) % 97)
        self.assertEqual(recombine(sv, 97), 0)

    def test_large_modulus_example(self):
        sv = make_segments(SecretInput(1, 42), 4, DEFAULT_MODULUS, party_stream(7, 1))
        self.assertEqual(len(sv), 4)
        self.assertTrue(all(0 <= d < DEFAULT_MODULUS for d in sv.segments))
        self.assertEqual(recombine(sv, DEFAULT_MODULUS), 42)

    def test_recombine_examples(self):
        self.assertEqual(recombine(SegmentVector(1, (5,)), 97), 5)
        self.assertEqual(recombine(SegmentVector(1, (96, 96)), 97), 95)

    def test_rejects_zero_segments(self):
        with self.assertRaises(ConfigurationError):
            make_segments(SecretInput(1, 5), 0, 97, party_stream(0, 1))

    def test_rejects_empty_segment_list(self):
        with self.assertRaises(ConfigurationError):
            recombine(SegmentVector(1, ()), 97)

    def test_rejects_input_outside_the_ring(self):
        with self.assertRaises(ConfigurationError):
            make_segments(SecretInput(1, 97), 2, 97, party_stream(0, 1))

    def test_same_seed_same_segments(self):
        first = make_segments(SecretInput(3, 11), 5, 97, party_stream(9, 3))
        second = make_segments(SecretInput(3, 11), 5, 97, party_stream(9, 3))
        self.assertEqual(first, second)

    def test_party_streams_are_independent(self):
        self.assertNotEqual(
            draw_residues(party_stream(9, 1), 8, DEFAULT_MODULUS),
            draw_residues(party_stream(9, 2), 8, DEFAULT_MODULUS),
        )

    @settings(max_examples=1000, deadline=None)
    @given(
        modulus=st.sampled_from([2, 5, 97, 2**31 - 1, DEFAULT_MODULUS]),
        data=st.data(),
        k=st.integers(min_value=1, max_value=32),
        seed=st.integers(min_value=0, max_value=2**32),
    )
    def test_round_trip(self, modulus, data, k, seed):
        x = data.draw(st.integers(min_value=0, max_value=modulus - 1))
        sv = make_segments(SecretInput(1, x), k, modulus, party_stream(seed, 1))
        self.assertEqual(len(sv), k)
        self.assertEqual(recombine(sv, modulus), x)

    def test_first_segment_is_uniform_and_independent_of_the_input(self):
        m, draws = 7, 14000
        heads = {
            x: Counter(make_segments(SecretInput(1, x), 2, m, party_stream(seed, 1)).segments[0] for seed in range(draws))
            for x in (0, 5)
        }
        self.assertEqual(heads[0], heads[5])
        _, p_value = chisquare([heads[0][v] for v in range(m)])
        self.assertGreater(p_value, 1e-4)


class SegmentMatrixTests(SimpleTestCase):
    def setUp(self):
        self.matrix = SegmentMatrix(
            modulus=Modulus(97),
            rows={1: (1, 2, 3), 2: (10, 20, 30), 3: (96, 1, 0), 4: (0, 0, 5)},
            masks=(7, 8, 9),
        )

    def test_accessors(self):
        self.assertEqual(self.matrix.parties, (1, 2, 3, 4))
        self.assertEqual(self.matrix.k, 3)
        self.assertEqual(self.matrix.segment(2, 3), 30)
        self.assertEqual(self.matrix.inputs(), {1: 6, 2: 60, 3: 0, 4: 5})

    def test_unknown_party(self):
        with self.assertRaises(UnknownPartyError):
            self.matrix.row(5)

    def test_restrict_keeps_masks_only_for_the_initiator(self):
        self.assertEqual(self.matrix.restrict({2, 3}).masks, ())
        self.assertEqual(self.matrix.restrict({2, 3}).parties, (2, 3))
        self.assertEqual(self.matrix.restrict({1, 4}).masks, (7, 8, 9))

    def test_restrict_rejects_unknown_members(self):
        with self.assertRaises(UnknownPartyError):
            self.matrix.restrict({2, 9})
