from fractions import Fraction

import pytest

from exlab import gl2, primes
from exlab.errors import ParameterError
from oracles import gl2_trace_counts

ODD_PRIMES = primes.sieve_range(2, 97).tolist()


@pytest.mark.parametrize("ell,order", [(3, 48), (5, 480), (7, 2016)])
def test_group_order_examples(ell, order):
    assert gl2.group_order(ell) == order
    assert sum(gl2_trace_counts(ell)) == order


@pytest.mark.parametrize("bad", [2, 4, 9, 1, 0, -3])
def test_rejects_non_odd_primes(bad):
    with pytest.raises(ParameterError):
        gl2.group_order(bad)


def test_inventory_for_three():
    fams = {f.kind: (f.class_count, f.class_size) for f in gl2.class_inventory(3)}
    assert fams == {
        gl2.ClassKind.CENTRAL: (2, 1),
        gl2.ClassKind.NON_SEMISIMPLE: (2, 8),
        gl2.ClassKind.SPLIT_SEMISIMPLE: (1, 12),
        gl2.ClassKind.NON_SPLIT: (3, 6),
    }
    assert sum(f.mass for f in gl2.class_inventory(3)) == 48
    assert sum(f.class_count for f in gl2.class_inventory(3)) == 8


@pytest.mark.parametrize("ell", ODD_PRIMES)
def test_inventory_and_fibers_cover_the_group(ell):
    inv = gl2.class_inventory(ell)
    assert sum(f.mass for f in inv) == gl2.group_order(ell)
    assert sum(f.class_count for f in inv) == ell * ell - 1
    fibers = [gl2.trace_fiber(ell, a) for a in range(ell)]
    assert sum(f.fiber_size for f in fibers) == gl2.group_order(ell)
    assert sum(f.proportion for f in fibers) == 1
    for f in fibers:
        assert f.class_count == (ell - 1 if f.a == 0 else ell)
        assert abs(f.proportion - Fraction(1, ell)) <= Fraction(2, ell * ell)
        assert (f.class_count, f.fiber_size) == gl2.fiber_by_families(ell, f.a)


@pytest.mark.parametrize("ell,a,prop,size", [
    (5, 1, Fraction(19, 96), 95),
    (5, 0, Fraction(5, 24), 100),
    (3, 0, Fraction(3, 8), 18),
])
def test_trace_fiber_examples(ell, a, prop, size):
    f = gl2.trace_fiber(ell, a)
    assert (f.proportion, f.fiber_size) == (prop, size)


@pytest.mark.parametrize("ell", [3, 5, 7])
def test_fibers_match_enumeration(ell):
    brute = gl2_trace_counts(ell)
    for a in range(ell):
        assert gl2.trace_fiber(ell, a).fiber_size == gl2.enumerate_trace_fiber(ell, a) == brute[a]


def test_enumeration_examples():
    assert [gl2.enumerate_trace_fiber(3, a) for a in range(3)] == [18, 15, 15]
    assert gl2.enumerate_trace_fiber(5, 1) == 95


def test_enumeration_refuses_large_ell():
    with pytest.raises(ParameterError):
        gl2.enumerate_trace_fiber(13, 0)


def test_least_nonresidue():
    for ell in ODD_PRIMES:
        d = gl2.least_nonresidue(ell)
        assert pow(d, (ell - 1) // 2, ell) == ell - 1
        assert all(pow(k, (ell - 1) // 2, ell) == 1 for k in range(1, d))


def test_reference_masses_for_five():
    assert gl2.reference_masses(5) == [Fraction(5, 24)] + [Fraction(19, 96)] * 4
