"""
Prime-field arithmetic and fixed-point encoding of reals

Field elements are plain Python ints in [0, p). Negative reals live in the upper
half of the field (two's-complement-style embedding):

    encode(x) = round(x * 2^s) mod p
    decode(e) = (e if e <= p // 2 else e - p) / 2^s
"""
import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray
from sympy import isprime

from secure_logreg.errors import FieldOverflowError, InvalidParamsError, ZeroInverseError

FieldElement = int


@dataclass(frozen=True)
class FieldModulus:
    """Order p of the prime field; primality is verified at construction"""
    p: int

    def __post_init__(self):
        if not isinstance(self.p, int) or self.p < 3:
            raise InvalidParamsError(f"modulus must be an integer >= 3, got {self.p!r}")
        if not isprime(self.p):
            raise InvalidParamsError(f"modulus {self.p} is not prime")

    @property
    def bits(self) -> int:
        return self.p.bit_length()

    def headroom(self, addends: int = 1) -> float:
        """Largest encoded magnitude that survives a sum of `addends` values"""
        return self.p / (2 * addends)


def encode_fixed(
    x: float,
    scale_exponent: int,
    modulus: FieldModulus,
    addends: int = 1,
) -> FieldElement:
    """
    Encode a real as a field element

    Raises FieldOverflowError unless |x| * 2^scale_exponent < p / (2 * addends).
    """
    scaled = math.ldexp(float(x), scale_exponent)
    if not math.isfinite(scaled) or abs(scaled) * 2 * addends >= modulus.p:
        raise FieldOverflowError(
            f"|{x}| * 2^{scale_exponent} exceeds field headroom p/(2*{addends}) "
            f"for a {modulus.bits}-bit modulus"
        )
    return int(round(scaled)) % modulus.p


def decode_fixed(e: FieldElement, scale_exponent: int, modulus: FieldModulus) -> float:
    """Inverse of encode_fixed up to quantization 2^-(scale_exponent+1)"""
    p = modulus.p
    e %= p
    signed = e if e <= p // 2 else e - p
    return signed / (1 << scale_exponent)


def encode_array(
    values: ArrayLike,
    scale_exponent: int,
    modulus: FieldModulus,
    addends: int = 1,
) -> NDArray[np.object_]:
    """Vectorized encode_fixed; returns an object array of Python ints"""
    arr = np.ldexp(np.asarray(values, dtype=np.float64), scale_exponent)
    if arr.size:
        if not np.isfinite(arr).all():
            raise FieldOverflowError("cannot encode non-finite values")
        peak = float(np.max(np.abs(arr)))
        if peak * 2 * addends >= modulus.p:
            raise FieldOverflowError(
                f"peak magnitude {math.ldexp(peak, -scale_exponent):.6g} exceeds field "
                f"headroom for {addends} addends at scale 2^{scale_exponent}"
            )
    p = modulus.p
    flat = [int(v) % p for v in np.rint(arr).ravel()]
    return object_array(flat, arr.shape)


def decode_array(
    elements: NDArray[np.object_],
    scale_exponent: int,
    modulus: FieldModulus,
) -> NDArray[np.float64]:
    elements = np.asarray(elements, dtype=object)
    flat = [decode_fixed(int(e), scale_exponent, modulus) for e in elements.ravel()]
    return np.array(flat, dtype=np.float64).reshape(elements.shape)


def field_inverse(a: FieldElement, modulus: FieldModulus) -> FieldElement:
    """Multiplicative inverse mod p"""
    a %= modulus.p
    if a == 0:
        raise ZeroInverseError("0 has no inverse in a field")
    return pow(a, -1, modulus.p)


def random_elements(
    rng: np.random.Generator,
    modulus: FieldModulus,
    count: int,
) -> list[FieldElement]:
    """Uniform draws from [0, p) by rejection sampling on bit-masked 64-bit words"""
    p = modulus.p
    bits = p.bit_length()
    words = -(-bits // 64)
    mask = (1 << bits) - 1
    out: list[int] = []
    while len(out) < count:
        need = count - len(out)
        raw = rng.integers(
            0, np.iinfo(np.uint64).max, size=(need, words), dtype=np.uint64, endpoint=True
        )
        for row in raw.tolist():
            v = 0
            for word in row:
                v = (v << 64) | word
            v &= mask
            if v < p:
                out.append(v)
    return out


def object_array(flat: list[int], shape: tuple[int, ...]) -> NDArray[np.object_]:
    out = np.empty(len(flat), dtype=object)
    out[:] = flat
    return out.reshape(shape)
