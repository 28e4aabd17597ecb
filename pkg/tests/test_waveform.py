import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from v2vsounder.waveform import (
    cyclic_shift,
    generate_zc,
    periodic_xcorr,
    periodic_xcorr_direct,
    validate_cazac,
)


def valid_roots(length, limit=6):
    return [u for u in range(1, length) if math.gcd(u, length) == 1][:limit]


class TestGenerateZc:
    def test_default_sounding_sequence(self):
        seq = generate_zc(1, 2048)
        assert seq.length == 2048
        assert seq.symbol_period_ns == 1.0
        assert seq.duration_ns == 2048.0
        assert seq.shift == 0

    def test_zero_phase_first_sample(self):
        for root in (1, 3, 5, 7):
            assert generate_zc(root, 2048).samples[0] == pytest.approx(1.0 + 0.0j)

    def test_length_three_hand_evaluated(self):
        # Direct evaluation of exp(-j*pi*n(n+1)/3) for n = 0, 1, 2.
        seq = generate_zc(1, 3)
        expected = np.array([1.0, np.exp(-2j * np.pi / 3), 1.0])
        np.testing.assert_allclose(seq.samples, expected, atol=1e-12)

    def test_invalid_root_rejected(self):
        with pytest.raises(ValueError, match="invalid-root"):
            generate_zc(2, 2048)  # gcd = 2
        with pytest.raises(ValueError, match="invalid-root"):
            generate_zc(0, 2048)
        with pytest.raises(ValueError, match="invalid-root"):
            generate_zc(2048, 2048)

    def test_invalid_length_rejected(self):
        with pytest.raises(ValueError, match="invalid-length"):
            generate_zc(1, 1)

    @given(length=st.integers(8, 512))
    @settings(max_examples=40, deadline=None)
    def test_unit_modulus(self, length):
        root = valid_roots(length)[-1]
        seq = generate_zc(root, length)
        assert np.max(np.abs(np.abs(seq.samples) - 1.0)) <= 1e-12

    def test_samples_read_only(self):
        seq = generate_zc(1, 64)
        with pytest.raises(ValueError):
            seq.samples[0] = 0


class TestCyclicShift:
    def test_identity(self):
        seq = generate_zc(1, 128)
        shifted = cyclic_shift(seq, 0)
        np.testing.assert_array_equal(shifted.samples, seq.samples)
        assert shifted.shift == 0

    def test_offset_definition(self):
        seq = generate_zc(1, 128)
        shifted = cyclic_shift(seq, 5)
        np.testing.assert_allclose(shifted.samples[0], seq.samples[5])
        assert shifted.shift == 5

    def test_full_length_offset_rejected(self):
        seq = generate_zc(1, 128)
        with pytest.raises(ValueError):
            cyclic_shift(seq, 128)
        with pytest.raises(ValueError):
            cyclic_shift(seq, -1)

    @given(a=st.integers(0, 127), b=st.integers(0, 127))
    @settings(max_examples=40, deadline=None)
    def test_shift_composition(self, a, b):
        seq = generate_zc(3, 128)
        twice = cyclic_shift(cyclic_shift(seq, a), b)
        once = cyclic_shift(seq, (a + b) % 128)
        np.testing.assert_array_equal(twice.samples, once.samples)
        assert twice.shift == once.shift


class TestPeriodicXcorr:
    def test_autocorrelation_peak_and_floor(self):
        seq = generate_zc(1, 2048)
        profile = periodic_xcorr(seq.samples, seq.samples)
        assert abs(profile[0]) == pytest.approx(2048, rel=1e-12)
        assert np.max(np.abs(profile[1:])) <= 1e-6 * 2048

    def test_shifted_copy_peaks_at_shift_lag(self):
        seq = generate_zc(1, 2048)
        shifted = cyclic_shift(seq, 1024)
        profile = periodic_xcorr(seq.samples, shifted.samples)
        assert int(np.argmax(np.abs(profile))) == 1024
        assert abs(profile[1024]) == pytest.approx(2048, rel=1e-9)

    def test_constant_input(self):
        profile = periodic_xcorr(np.ones(4), np.ones(4))
        np.testing.assert_allclose(profile, [4, 4, 4, 4], atol=1e-12)

    def test_length_mismatch(self):
        with pytest.raises(ValueError, match="length mismatch"):
            periodic_xcorr(np.ones(4), np.ones(5))

    @pytest.mark.parametrize("root,length", [(1, 64), (5, 64), (3, 139), (7, 500)])
    def test_fast_matches_direct_sum(self, root, length):
        rng = np.random.default_rng(root * length)
        a = generate_zc(root, length).samples
        b = a + 0.1 * (rng.standard_normal(length) + 1j * rng.standard_normal(length))
        fast = periodic_xcorr(a, b)
        direct = periodic_xcorr_direct(a, b)
        scale = np.max(np.abs(direct))
        assert np.max(np.abs(fast - direct)) <= 1e-6 * scale

    def test_shift_separability(self):
        # Two shifted copies summed against the base: one peak at exactly
        # each shift lag and nothing else above 1e-6 * N.
        n = 2048
        seq = generate_zc(1, n)
        s1, s2 = 300, 1500
        total = cyclic_shift(seq, s1).samples + cyclic_shift(seq, s2).samples
        profile = periodic_xcorr(total, seq.samples)
        peaks = set(np.flatnonzero(np.abs(profile) > 1e-6 * n).tolist())
        assert peaks == {s1, s2}
        for lag in (s1, s2):
            assert abs(profile[lag]) == pytest.approx(n, rel=1e-9)


class TestValidateCazac:
    @pytest.mark.parametrize("root", [1, 3])
    def test_valid_sequences_pass_direct_oracle(self, root):
        report = validate_cazac(generate_zc(root, 2048), 1e-9, use_direct_sum=True)
        assert report.passed
        assert report.max_modulus_error <= 1e-12

    def test_zeroed_sample_fails_amplitude(self):
        seq = generate_zc(1, 256)
        samples = seq.samples.copy()
        samples[17] = 0.0
        broken = generate_zc(1, 256)
        object.__setattr__(broken, "samples", samples)
        report = validate_cazac(broken, 1e-9)
        assert not report.amplitude_ok
        assert not report.passed

    def test_odd_length_passes(self):
        report = validate_cazac(generate_zc(2, 139), 1e-9, use_direct_sum=True)
        assert report.passed
