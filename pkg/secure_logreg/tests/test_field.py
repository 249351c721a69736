"""
Tests for prime-field arithmetic and fixed-point encoding
"""
import math

import numpy as np
import pytest

from secure_logreg.errors import FieldOverflowError, InvalidParamsError, ZeroInverseError
from secure_logreg.field import (
    FieldModulus,
    decode_array,
    decode_fixed,
    encode_array,
    encode_fixed,
    field_inverse,
    random_elements,
)


class TestFieldModulus:
    """Test modulus validation"""

    def test_mersenne_default_is_prime(self, modulus):
        assert modulus.bits == 127

    def test_composite_rejected(self):
        with pytest.raises(InvalidParamsError):
            FieldModulus(91)

    def test_too_small_rejected(self):
        with pytest.raises(InvalidParamsError):
            FieldModulus(2)

    def test_invalid_params_is_value_error(self):
        with pytest.raises(ValueError):
            FieldModulus(100)


class TestFixedPointEncoding:
    """Test encode/decode with the upper-half embedding for negatives"""

    def test_positive(self, small_modulus):
        assert encode_fixed(1.5, 4, small_modulus) == 24

    def test_zero(self, small_modulus, modulus):
        assert encode_fixed(0.0, 4, small_modulus) == 0
        assert encode_fixed(0.0, 40, modulus) == 0

    def test_negative_maps_to_upper_half(self, small_modulus):
        assert encode_fixed(-1.0, 4, small_modulus) == 81

    def test_decode_examples(self, small_modulus):
        assert decode_fixed(24, 4, small_modulus) == 1.5
        assert decode_fixed(81, 4, small_modulus) == -1.0
        assert decode_fixed(0, 4, small_modulus) == 0.0

    def test_overflow(self, small_modulus):
        # 3.1 * 16 = 49.6, 2 * 49.6 >= 97
        with pytest.raises(FieldOverflowError):
            encode_fixed(3.1, 4, small_modulus)

    def test_headroom_boundary(self, small_modulus):
        # 2 * 48 = 96 < 97 still fits
        assert encode_fixed(3.0, 4, small_modulus) == 48
        assert decode_fixed(48, 4, small_modulus) == 3.0
        assert encode_fixed(-3.0, 4, small_modulus) == 49
        with pytest.raises(FieldOverflowError):
            encode_fixed(-3.1, 4, small_modulus)

    def test_overflow_accounts_for_addends(self, modulus):
        x = 2.0 ** 80
        encode_fixed(x, 40, modulus, addends=1)
        with pytest.raises(FieldOverflowError):
            encode_fixed(x, 40, modulus, addends=1 << 10)

    def test_overflow_is_builtin_overflow(self, small_modulus):
        with pytest.raises(OverflowError):
            encode_fixed(1e9, 4, small_modulus)

    def test_non_finite_rejected(self, modulus):
        with pytest.raises(FieldOverflowError):
            encode_fixed(math.inf, 40, modulus)
        with pytest.raises(FieldOverflowError):
            encode_array([1.0, math.nan], 40, modulus)

    def test_quantization_bound(self, modulus, rng):
        s = 40
        xs = rng.normal(0, 1e3, size=2000)
        for x in xs:
            assert abs(decode_fixed(encode_fixed(x, s, modulus), s, modulus) - x) <= 2.0 ** (-s - 1)

    def test_array_matches_scalar(self, modulus, rng):
        values = rng.normal(size=(3, 4))
        encoded = encode_array(values, 40, modulus)
        assert encoded.shape == (3, 4)
        assert encoded.dtype == object
        for (i, j), v in np.ndenumerate(values):
            assert encoded[i, j] == encode_fixed(v, 40, modulus)
        np.testing.assert_allclose(decode_array(encoded, 40, modulus), values, atol=2.0 ** -41)


class TestFieldInverse:
    """Test multiplicative inverses"""

    def test_one(self, small_modulus):
        assert field_inverse(1, small_modulus) == 1

    def test_small_example(self):
        assert field_inverse(3, FieldModulus(7)) == 5

    def test_random_property(self, modulus):
        rng = np.random.default_rng(1)
        for a in random_elements(rng, modulus, 200):
            if a == 0:
                continue
            assert a * field_inverse(a, modulus) % modulus.p == 1

    def test_zero_has_no_inverse(self, small_modulus):
        with pytest.raises(ZeroInverseError):
            field_inverse(0, small_modulus)
        with pytest.raises(ZeroDivisionError):
            field_inverse(97, small_modulus)


class TestRandomElements:
    """Test uniform field sampling"""

    def test_range_and_count(self, modulus, rng):
        values = random_elements(rng, modulus, 500)
        assert len(values) == 500
        assert all(0 <= v < modulus.p for v in values)

    def test_small_field_hits_every_element(self, small_modulus, rng):
        values = random_elements(rng, small_modulus, 5000)
        assert set(values) == set(range(97))

    def test_deterministic_under_seed(self, modulus):
        a = random_elements(np.random.default_rng(9), modulus, 10)
        b = random_elements(np.random.default_rng(9), modulus, 10)
        assert a == b
