import random

import pytest

from superloop import weyl
from superloop.cli import random_torsion_triple
from superloop.coeffs import ONE, ZERO, ZPoly, q, scalar
from superloop.weyl import (
    HighestWeight,
    TorsionError,
    TorsionTriple,
    charpoly,
    identity_triple,
    monoid_product,
    series_to_torsion,
    slice_spectrum_identity,
    star_product_window,
    torsion_to_series,
    weyl_odd_slice,
)

WORKED = TorsionTriple(q, ZPoly([1, -(q**-2)]), ZPoly([1, -1]))


def test_triple_invariants():
    with pytest.raises(TorsionError):
        TorsionTriple(ZERO, ZPoly.one(), ZPoly.one())
    with pytest.raises(TorsionError):
        TorsionTriple(ONE, ZPoly([2]), ZPoly.one())
    with pytest.raises(TorsionError):
        TorsionTriple(ONE, ZPoly([1, 1]), ZPoly.one())
    with pytest.raises(TorsionError):
        # equal degree but not coprime
        TorsionTriple(ONE, ZPoly([1, 2]), ZPoly([1, 2]))
    with pytest.raises(TorsionError):
        # leading coefficients must match c^-2 lead(P)
        TorsionTriple(q, ZPoly([1, 1]), ZPoly([1, 2]))


def test_identity_series_is_zero():
    _, _, win = torsion_to_series(identity_triple(), 6)
    assert all(v == ZERO for v in win.values())
    assert series_to_torsion(win, ONE, 3) == identity_triple()


def test_worked_example_series():
    plus, minus, win = torsion_to_series(WORKED, 6)
    assert plus.coeff(0) == q and minus.coeff(0) == q**-1
    assert all(v == ONE for v in win.values())
    assert series_to_torsion(win, q, 4) == WORKED


def test_f0_constraint():
    for t in (WORKED, identity_triple(), TorsionTriple(scalar(2), ZPoly([1, scalar(3)]), ZPoly([1, scalar(12)]))):
        _, _, win = torsion_to_series(t, 5)
        assert win[0] == (t.c - t.c**-1) / (q - q**-1)
    _, _, win = torsion_to_series(WORKED, 5)
    with pytest.raises(TorsionError):
        series_to_torsion(win, scalar(2), 2)


def test_annihilation_property():
    rng = random.Random(11)
    for _ in range(6):
        t = random_torsion_triple(rng, 3)
        _, _, win = torsion_to_series(t, 8)
        d = t.P.degree
        for m in range(-8 + d, 9):
            acc = sum((t.P.coeff(s) * win[m - s] for s in range(d + 1)), start=ZERO)
            assert acc == ZERO


def test_series_to_torsion_errors():
    _, _, win = torsion_to_series(WORKED, 6)
    with pytest.raises(TorsionError):
        series_to_torsion(win, q, 7)  # window shorter than 2*bound+1
    small = {n: ZERO for n in range(-2, 3)}
    small[0] = ZERO
    # no annihilator of degree <= bound: cook an honest failure
    fib = {}
    x = {0: scalar(1), 1: scalar(1)}
    for n in range(-6, 7):
        fib[n] = scalar(1) if n >= 0 else ZERO
    with pytest.raises(TorsionError):
        series_to_torsion(fib, ONE, 2)


def test_roundtrip_random_triples():
    rng = random.Random(5)
    for _ in range(8):
        t = random_torsion_triple(rng, 4)
        _, _, win = torsion_to_series(t, 10)
        assert series_to_torsion(win, t.c, 4) == t


def _hw(t):
    return HighestWeight({}, t, {})


def test_monoid_identity_and_inverse_pair():
    t1 = WORKED
    t2 = TorsionTriple(q**-1, ZPoly([1, -1]), ZPoly([1, -(q**-2)]))
    prod = monoid_product(_hw(t1), _hw(t2)).torsion
    assert prod == identity_triple()  # gcd reduction collapses both factors
    assert monoid_product(_hw(t1), _hw(identity_triple())).torsion == t1


def test_monoid_star_formula_window():
    t1, t2 = WORKED, TorsionTriple(scalar(2), ZPoly([1, scalar(3)]), ZPoly([1, scalar(12)]))
    order = 6
    _, _, w1 = torsion_to_series(t1, 2 * order)
    _, _, w2 = torsion_to_series(t2, 2 * order)
    direct = star_product_window(w1, w2, t1.c, t2.c, order)
    prod = monoid_product(_hw(t1), _hw(t2)).torsion
    _, _, wp = torsion_to_series(prod, order)
    for n in range(-order, order + 1):
        assert direct[n] == wp[n]


def test_monoid_node_mismatch():
    h1 = HighestWeight({1: ZPoly.one()}, identity_triple(), {1: 1})
    h2 = HighestWeight({}, identity_triple(), {})
    with pytest.raises(ValueError):
        monoid_product(h1, h2)


def test_odd_slice_degree_one():
    alpha = scalar(7)
    sl = weyl_odd_slice(ZPoly([ONE, alpha]), ZPoly.one())
    assert sl.d == 1
    assert sl.theta == ZERO
    assert sl.hM1 == ((-alpha,),)


def test_theta_from_neighbour_polynomial():
    sl = weyl_odd_slice(ZPoly([1, 1]), ZPoly([1, -3]))
    assert sl.theta == scalar(3)
    assert sl.hM1 == ((scalar(3) - ONE,),)


def test_zero_dimensional_slice():
    sl = weyl_odd_slice(ZPoly.one(), ZPoly([1, -2]))
    assert sl.d == 0 and sl.hM1 == ()
    assert slice_spectrum_identity(ZPoly.one(), sl)


def test_slice_dimension_and_spectrum_random():
    rng = random.Random(3)
    pool = [scalar(1), scalar(-2), q, -q, q**-1, q + q**-1]
    for _ in range(8):
        d = rng.randint(1, 5)
        Q = ZPoly([ONE] + [pool[rng.randrange(len(pool))] for _ in range(d)])
        if Q.degree != d:
            continue
        Pprev = ZPoly([ONE] + [pool[rng.randrange(len(pool))] for _ in range(rng.randint(0, 3))])
        sl = weyl_odd_slice(Q, Pprev)
        assert sl.d == d
        assert sl.theta == -Pprev.coeff(1)
        assert slice_spectrum_identity(Q, sl)


def test_charpoly_companion():
    rows = ((scalar(0), scalar(-6)), (scalar(1), scalar(5)))
    # companion of z^2 - 5z + 6
    assert charpoly(rows) == ZPoly([scalar(6), scalar(-5), ONE])


def test_odd_slice_from_highest_weight():
    hw = HighestWeight({1: ZPoly([1, -3])}, WORKED, {1: 1})
    assert hw.odd_node == 2
    sl = weyl.odd_slice_of_highest_weight(hw)
    assert sl.d == 1 and sl.theta == scalar(3)
    # recurrence comes from the annihilator 1 - z: shift eigenvalue 1
    assert sl.hM1 == ((scalar(4),),)
    with pytest.raises(ValueError):
        weyl.odd_slice_of_highest_weight(HighestWeight({2: ZPoly.one()}, WORKED, {2: 1}))
    with pytest.raises(TorsionError):
        HighestWeight({1: ZPoly([2])}, WORKED, {1: 1})


def test_json_forms():
    blob = WORKED.to_json()
    assert blob["c"] == "q"
    hw = HighestWeight({1: ZPoly([1, -3])}, WORKED, {1: 1})
    out = hw.to_json()
    assert out["Q"] == ["1", "(-1)/(q**2)"] and out["P_odd"] == ["1", "-1"]
    sl = weyl_odd_slice(ZPoly([1, -2, 1]), ZPoly([1, -3]))
    out = sl.to_json()
    assert out["d"] == 2 and out["theta"] == "3"
