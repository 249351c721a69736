"""
Shamir t-out-of-w secret sharing over a prime field

Scalars, vectors and matrices of fixed-point reals are shared with one random
polynomial of degree t-1 per element; center j holds the evaluations at x = j.
Secure addition and multiplication by a public integer act share-locally.
"""
import numbers
from collections.abc import Iterator, Mapping, Sequence
from dataclasses import dataclass
from types import MappingProxyType
from typing import Any, Optional

import numpy as np
from numpy.typing import ArrayLike, NDArray

from secure_logreg.errors import (
    DuplicateEvalPointError,
    InsufficientSharesError,
    InvalidParamsError,
    LayoutMismatchError,
    ScaleMismatchError,
    ShapeMismatchError,
)
from secure_logreg.field import (
    FieldElement,
    FieldModulus,
    decode_array,
    encode_array,
    field_inverse,
    object_array,
    random_elements,
)


@dataclass(frozen=True)
class SharingParams:
    """Threshold t out of w share-holders"""
    t: int
    w: int

    def __post_init__(self):
        if self.t < 2:
            raise InvalidParamsError(f"threshold t={self.t} offers no secrecy; need t >= 2")
        if self.t > self.w:
            raise InvalidParamsError(f"threshold t={self.t} exceeds holders w={self.w}")

    def check_field(self, modulus: FieldModulus) -> None:
        # evaluation points 1..w must be distinct nonzero field elements
        if self.w >= modulus.p:
            raise InvalidParamsError(f"w={self.w} must be smaller than the modulus {modulus.p}")


@dataclass(frozen=True)
class Share:
    """A point (x, q(x)) on a secret polynomial"""
    eval_point: int
    value: FieldElement

    def __post_init__(self):
        if self.eval_point < 1:
            # q(0) is the secret itself
            raise InvalidParamsError(f"eval_point must be >= 1, got {self.eval_point}")


def _horner(secret, coefficients: Sequence, x: int, p: int):
    """q(x) = m + a_1 x + ... + a_{t-1} x^{t-1} mod p; works elementwise on object arrays"""
    acc = 0
    for a in reversed(coefficients):
        acc = (acc * x + a) % p
    return (secret + acc * x) % p


def share_secret(
    m: FieldElement,
    params: SharingParams,
    modulus: FieldModulus,
    rng: np.random.Generator,
    coefficients: Optional[Sequence[int]] = None,
) -> list[Share]:
    """
    Split m into w shares (j, q(j)), j = 1..w

    `coefficients` pins a_1..a_{t-1} (hand-checkable cases); otherwise they are
    drawn uniformly from [0, p) with `rng`.
    """
    params.check_field(modulus)
    p = modulus.p
    if coefficients is None:
        coefficients = random_elements(rng, modulus, params.t - 1)
    elif len(coefficients) != params.t - 1:
        raise InvalidParamsError(f"expected {params.t - 1} coefficients, got {len(coefficients)}")
    coefficients = [int(a) % p for a in coefficients]
    m = int(m) % p
    return [Share(x, _horner(m, coefficients, x, p)) for x in range(1, params.w + 1)]


def lagrange_at_zero(points: Sequence[int], modulus: FieldModulus) -> list[FieldElement]:
    """L_j(0) = prod_{k != j} x_k / (x_k - x_j) mod p"""
    p = modulus.p
    if len(set(points)) != len(points):
        raise DuplicateEvalPointError(f"duplicate evaluation points in {sorted(points)}")
    coeffs = []
    for j, xj in enumerate(points):
        num, den = 1, 1
        for k, xk in enumerate(points):
            if k == j:
                continue
            num = num * xk % p
            den = den * (xk - xj) % p
        coeffs.append(num * field_inverse(den, modulus) % p)
    return coeffs


def reconstruct_secret(
    shares: Sequence[Share],
    params: SharingParams,
    modulus: FieldModulus,
) -> FieldElement:
    """Lagrange interpolation at 0 from at least t shares"""
    if len(shares) < params.t:
        raise InsufficientSharesError(f"need {params.t} shares, got {len(shares)}")
    points = [s.eval_point for s in shares]
    coeffs = lagrange_at_zero(points, modulus)
    return sum(s.value * c for s, c in zip(shares, coeffs)) % modulus.p


@dataclass(frozen=True, eq=False)
class SharedTensor:
    """
    Shares of a rows x cols grid of fixed-point reals

    `grids` maps each evaluation point (= center id) to that center's grid of
    share values. A single center's view holds exactly one grid.
    """
    shape: tuple[int, int]
    grids: Mapping[int, NDArray[np.object_]]
    scale_exponent: int
    params: SharingParams
    modulus: FieldModulus

    def __post_init__(self):
        frozen = {}
        for x in sorted(self.grids):
            if not 1 <= x <= self.params.w:
                raise LayoutMismatchError(f"eval point {x} outside 1..{self.params.w}")
            grid = np.asarray(self.grids[x], dtype=object)
            if grid.shape != tuple(self.shape):
                raise ShapeMismatchError(f"grid for center {x} has shape {grid.shape}, expected {self.shape}")
            grid.flags.writeable = False
            frozen[x] = grid
        object.__setattr__(self, "shape", tuple(self.shape))
        object.__setattr__(self, "grids", MappingProxyType(frozen))

    @property
    def eval_points(self) -> tuple[int, ...]:
        return tuple(self.grids)

    def for_center(self, center_id: int) -> "SharedTensor":
        return self.restrict([center_id])

    def restrict(self, center_ids: Sequence[int]) -> "SharedTensor":
        missing = [c for c in center_ids if c not in self.grids]
        if missing:
            raise InsufficientSharesError(f"no shares held for centers {missing}")
        return SharedTensor(
            shape=self.shape,
            grids={c: self.grids[c] for c in center_ids},
            scale_exponent=self.scale_exponent,
            params=self.params,
            modulus=self.modulus,
        )

    def share_values(self) -> Iterator[int]:
        for grid in self.grids.values():
            yield from (int(v) for v in grid.ravel())

    def check_compatible(self, other: "SharedTensor", same_points: bool = True) -> None:
        if self.shape != other.shape:
            raise ShapeMismatchError(f"{self.shape} vs {other.shape}")
        if self.scale_exponent != other.scale_exponent:
            raise ScaleMismatchError(f"scale 2^{self.scale_exponent} vs 2^{other.scale_exponent}")
        if self.params != other.params or self.modulus != other.modulus:
            raise LayoutMismatchError("tensors were shared under different (t, w) or modulus")
        if same_points and self.eval_points != other.eval_points:
            raise LayoutMismatchError(f"eval points {self.eval_points} vs {other.eval_points}")

    @classmethod
    def merge(cls, parts: Sequence["SharedTensor"]) -> "SharedTensor":
        """Combine single-center views into one tensor (the reconstruction rendezvous)"""
        if not parts:
            raise InsufficientSharesError("nothing to merge")
        first = parts[0]
        grids: dict[int, NDArray[np.object_]] = {}
        for part in parts:
            first.check_compatible(part, same_points=False)
            for x, grid in part.grids.items():
                if x in grids:
                    raise DuplicateEvalPointError(f"center {x} contributed twice")
                grids[x] = grid
        return cls(first.shape, grids, first.scale_exponent, first.params, first.modulus)

    def to_message_body(self, center_id: int) -> dict[str, Any]:
        """Canonical JSON object for one center's grid"""
        grid = self.grids[center_id]
        rows, cols = self.shape
        return {
            "modulus": str(self.modulus.p),
            "scale_exponent": self.scale_exponent,
            "t": self.params.t,
            "w": self.params.w,
            "shape": [rows, cols],
            "center_id": center_id,
            "entries": [[r, c, str(grid[r, c])] for r in range(rows) for c in range(cols)],
        }

    @classmethod
    def from_message_body(cls, body: Mapping[str, Any]) -> "SharedTensor":
        rows, cols = body["shape"]
        grid = np.zeros((rows, cols), dtype=object)
        for r, c, value in body["entries"]:
            grid[r, c] = int(value)
        return cls(
            shape=(rows, cols),
            grids={int(body["center_id"]): grid},
            scale_exponent=int(body["scale_exponent"]),
            params=SharingParams(int(body["t"]), int(body["w"])),
            modulus=FieldModulus(int(body["modulus"])),
        )


def _as_grid(values: ArrayLike) -> NDArray[np.float64]:
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim == 0:
        return arr.reshape(1, 1)
    if arr.ndim == 1:
        return arr.reshape(-1, 1)
    if arr.ndim == 2:
        return arr
    raise ShapeMismatchError(f"only scalars, vectors and matrices can be shared, got ndim={arr.ndim}")


def share_encoded(
    encoded: NDArray[np.object_],
    params: SharingParams,
    modulus: FieldModulus,
    scale_exponent: int,
    rng: np.random.Generator,
) -> SharedTensor:
    """Share a grid of field elements that are already fixed-point encoded"""
    params.check_field(modulus)
    p = modulus.p
    encoded = np.asarray(encoded, dtype=object)
    shape = encoded.shape
    coefficients = [
        object_array(random_elements(rng, modulus, encoded.size), shape)
        for _ in range(params.t - 1)
    ]
    grids = {x: _horner(encoded, coefficients, x, p) for x in range(1, params.w + 1)}
    return SharedTensor(shape, grids, scale_exponent, params, modulus)


def share_tensor(
    values: ArrayLike,
    params: SharingParams,
    modulus: FieldModulus,
    scale_exponent: int,
    rng: np.random.Generator,
    addends: int = 1,
) -> SharedTensor:
    """Fixed-point encode a scalar/vector/matrix and share every element"""
    grid = _as_grid(values)
    encoded = encode_array(grid, scale_exponent, modulus, addends=addends)
    return share_encoded(encoded, params, modulus, scale_exponent, rng)


def reconstruct_tensor(parts: SharedTensor | Sequence[SharedTensor]) -> NDArray[np.object_]:
    """Interpolate every element at 0 from the grids of at least t centers"""
    tensor = parts if isinstance(parts, SharedTensor) else SharedTensor.merge(parts)
    if len(tensor.eval_points) < tensor.params.t:
        raise InsufficientSharesError(
            f"need {tensor.params.t} centers, got {len(tensor.eval_points)}"
        )
    coeffs = lagrange_at_zero(tensor.eval_points, tensor.modulus)
    total = np.zeros(tensor.shape, dtype=object)
    for x, c in zip(tensor.eval_points, coeffs):
        total = total + tensor.grids[x] * c
    return total % tensor.modulus.p


def reconstruct_values(parts: SharedTensor | Sequence[SharedTensor]) -> NDArray[np.float64]:
    """reconstruct_tensor followed by fixed-point decoding"""
    tensor = parts if isinstance(parts, SharedTensor) else SharedTensor.merge(parts)
    return decode_array(reconstruct_tensor(tensor), tensor.scale_exponent, tensor.modulus)


def secure_sum(tensors: Sequence[SharedTensor]) -> SharedTensor:
    """Share-local sum of any number of tensors; nothing is reconstructed"""
    if not tensors:
        raise InsufficientSharesError("secure_sum needs at least one tensor")
    first = tensors[0]
    for other in tensors[1:]:
        first.check_compatible(other)
    p = first.modulus.p
    grids = {
        x: sum((t.grids[x] for t in tensors[1:]), first.grids[x]) % p
        for x in first.eval_points
    }
    return SharedTensor(first.shape, grids, first.scale_exponent, first.params, first.modulus)


def secure_add(a: SharedTensor, b: SharedTensor) -> SharedTensor:
    """sum_j = A_j + B_j at every share-holder"""
    return secure_sum([a, b])


def secure_scale_public(a: SharedTensor, c: int) -> SharedTensor:
    """Multiply the shared secret by a public integer constant, share-locally"""
    if isinstance(c, bool) or not isinstance(c, numbers.Integral):
        raise InvalidParamsError(f"public constant must be an integer, got {c!r}")
    p = a.modulus.p
    c = int(c) % p
    grids = {x: grid * c % p for x, grid in a.grids.items()}
    return SharedTensor(a.shape, grids, a.scale_exponent, a.params, a.modulus)
