"""
Bilinear group backends.

G1 and G2 are written additively; the target group is combined with
`gt_combine` (additive for the mock backend). A backend also owns the text
encoding of its group elements.
"""

import logging
from abc import ABC, abstractmethod
from typing import Any, Dict, Type

from sympy import isprime

from app.services.errors import CryptoError, MalformedProof, NotPrime


logger = logging.getLogger(__name__)


class BilinearBackend(ABC):
    """Pairing e: G1 x G2 -> GT over groups of prime order r."""

    name: str = "abstract"

    def __init__(self, order: int):
        if not isprime(order):
            logger.warning("rejected group order %d: not prime", order)
            raise NotPrime(f"group order {order} is not prime")
        self.order = order

    @property
    @abstractmethod
    def P(self) -> Any:
        """Generator of G1."""

    @property
    @abstractmethod
    def Q(self) -> Any:
        """Generator of G2."""

    @abstractmethod
    def g1_mul(self, point: Any, k: int) -> Any: ...

    @abstractmethod
    def g2_mul(self, point: Any, k: int) -> Any: ...

    @abstractmethod
    def g1_add(self, a: Any, b: Any) -> Any: ...

    @abstractmethod
    def g2_add(self, a: Any, b: Any) -> Any: ...

    @abstractmethod
    def g1_zero(self) -> Any: ...

    @abstractmethod
    def g2_zero(self) -> Any: ...

    @abstractmethod
    def pair(self, a: Any, b: Any) -> Any: ...

    @abstractmethod
    def gt_combine(self, x: Any, y: Any) -> Any: ...

    @abstractmethod
    def gt_identity(self) -> Any: ...

    @abstractmethod
    def is_g1(self, point: Any) -> bool: ...

    @abstractmethod
    def is_g2(self, point: Any) -> bool: ...

    @abstractmethod
    def encode(self, element: Any) -> str: ...

    @abstractmethod
    def decode(self, text: str) -> Any: ...

    def gt_equal(self, x: Any, y: Any) -> bool:
        return x == y

    def g1_sum(self, points, scalars) -> Any:
        total = self.g1_zero()
        for point, k in zip(points, scalars):
            if k % self.order:
                total = self.g1_add(total, self.g1_mul(point, k))
        return total

    def g2_sum(self, points, scalars) -> Any:
        total = self.g2_zero()
        for point, k in zip(points, scalars):
            if k % self.order:
                total = self.g2_add(total, self.g2_mul(point, k))
        return total


class MockBackend(BilinearBackend):
    """
    Integers mod r standing in for all three groups: P = Q = 1, e(a, b) = ab.

    INSECURE: discrete logarithms are the elements themselves. For functional
    testing of the proof pipeline only.
    """

    name = "mock"

    @property
    def P(self) -> int:
        return 1

    @property
    def Q(self) -> int:
        return 1

    def g1_mul(self, point: int, k: int) -> int:
        return point * k % self.order

    g2_mul = g1_mul

    def g1_add(self, a: int, b: int) -> int:
        return (a + b) % self.order

    g2_add = g1_add
    gt_combine = g1_add

    def g1_zero(self) -> int:
        return 0

    g2_zero = g1_zero
    gt_identity = g1_zero

    def pair(self, a: int, b: int) -> int:
        return a * b % self.order

    def is_g1(self, point: Any) -> bool:
        return isinstance(point, int) and 0 <= point < self.order

    is_g2 = is_g1

    def encode(self, element: int) -> str:
        return format(element, "x")

    def decode(self, text: str) -> int:
        try:
            value = int(text, 16)
        except ValueError as exc:
            raise MalformedProof(f"'{text}' is not a hex group element") from exc
        if not self.is_g1(value):
            raise MalformedProof(f"element {text} lies outside the group")
        return value


BACKENDS: Dict[str, Type[BilinearBackend]] = {"mock": MockBackend}


def mock_backend(r: int) -> MockBackend:
    return MockBackend(r)


def get_backend(name: str, order: int) -> BilinearBackend:
    if name not in BACKENDS:
        logger.warning("unknown backend '%s' (known: %s)", name, ", ".join(sorted(BACKENDS)))
        raise CryptoError(f"unknown backend '{name}'")
    return BACKENDS[name](order)
