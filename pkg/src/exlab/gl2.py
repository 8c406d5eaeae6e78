"""Conjugacy classes of GL2(F_l) and the trace fibers C_l(a), in exact arithmetic."""
from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import ParameterError

ENUMERATION_LIMIT = 11


class ClassKind(enum.Enum):
    CENTRAL = "Central"
    NON_SEMISIMPLE = "NonSemisimple"
    SPLIT_SEMISIMPLE = "SplitSemisimple"
    NON_SPLIT = "NonSplit"


@dataclass(frozen=True)
class ClassFamily:
    kind: ClassKind
    class_count: int
    class_size: int

    @property
    def mass(self) -> int:
        return self.class_count * self.class_size


@dataclass(frozen=True)
class TraceFiber:
    ell: int
    a: int
    proportion: Fraction
    class_count: int
    fiber_size: int


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    d = 2
    while d * d <= n:
        if n % d == 0:
            return False
        d += 1
    return True


def check_odd_prime(ell: int) -> None:
    if ell == 2 or not _is_prime(ell):
        raise ParameterError(f"ell must be an odd prime, got {ell}")


def group_order(ell: int) -> int:
    check_odd_prime(ell)
    return (ell * ell - 1) * (ell * ell - ell)


def class_inventory(ell: int) -> list[ClassFamily]:
    check_odd_prime(ell)
    l = ell
    return [
        ClassFamily(ClassKind.CENTRAL, l - 1, 1),
        ClassFamily(ClassKind.NON_SEMISIMPLE, l - 1, l * l - 1),
        ClassFamily(ClassKind.SPLIT_SEMISIMPLE, (l - 1) * (l - 2) // 2, l * (l + 1)),
        ClassFamily(ClassKind.NON_SPLIT, l * (l - 1) // 2, l * (l - 1)),
    ]


def least_nonresidue(ell: int) -> int:
    """The non-square D used for non-split representatives [[a, D b], [b, a]]."""
    check_odd_prime(ell)
    return next(d for d in range(2, ell) if pow(d, (ell - 1) // 2, ell) == ell - 1)


def _fiber_classes(ell: int, a: int) -> tuple[int, int]:
    """(number of classes, number of elements) of trace a, counted family by family."""
    l = ell
    classes = elements = 0
    # central lambda*I and non-semisimple [[lambda,1],[0,lambda]]: trace 2*lambda
    lam = a * pow(2, -1, l) % l
    if lam:
        classes += 2
        elements += 1 + (l * l - 1)
    # split diag(l1, l2), l1 != l2 unordered, both nonzero, l1 + l2 = a
    pairs = sum(1 for l1 in range(1, l) if (a - l1) % l and (a - l1) % l != l1)
    classes += pairs // 2
    elements += pairs // 2 * l * (l + 1)
    # non-split: trace 2*alpha, beta up to sign -> (l-1)/2 classes per alpha
    classes += (l - 1) // 2
    elements += (l - 1) // 2 * l * (l - 1)
    return classes, elements


def trace_fiber(ell: int, a: int) -> TraceFiber:
    """|C_l(a)|/|G_l| from the closed form, with the class count alongside."""
    check_odd_prime(ell)
    if not 0 <= a < ell:
        raise ParameterError(f"residue a must lie in [0, {ell}), got {a}")
    l = ell
    if a:
        prop = Fraction(l * l - l - 1, (l - 1) ** 2 * (l + 1))
        count = l
    else:
        prop = Fraction(l, (l - 1) * (l + 1))
        count = l - 1
    size = prop * group_order(l)
    assert size.denominator == 1
    return TraceFiber(l, a, prop, count, int(size))


def fiber_by_families(ell: int, a: int) -> tuple[int, int]:
    """(class count, fiber size) summed over the class table, independent of the closed form."""
    check_odd_prime(ell)
    return _fiber_classes(ell, a % ell)


def enumerate_trace_fiber(ell: int, a: int) -> int:
    """#{M in GL2(F_l) : tr M = a} by running over all l^4 matrices."""
    check_odd_prime(ell)
    if ell > ENUMERATION_LIMIT:
        raise ParameterError(
            f"enumeration over GL2(F_{ell}) needs {ell**4} matrices; limit is l <= {ENUMERATION_LIMIT}"
        )
    r = np.arange(ell)
    m00, m01, m10, m11 = np.meshgrid(r, r, r, r, indexing="ij")
    det = (m00 * m11 - m01 * m10) % ell
    tr = (m00 + m11) % ell
    return int(np.count_nonzero((det != 0) & (tr == a % ell)))


def enumerate_group_order(ell: int) -> int:
    check_odd_prime(ell)
    if ell > ENUMERATION_LIMIT:
        raise ParameterError(f"enumeration limit is l <= {ENUMERATION_LIMIT}")
    r = np.arange(ell)
    m00, m01, m10, m11 = np.meshgrid(r, r, r, r, indexing="ij")
    return int(np.count_nonzero((m00 * m11 - m01 * m10) % ell))


def reference_masses(ell: int) -> list[Fraction]:
    return [trace_fiber(ell, a).proportion for a in range(ell)]
