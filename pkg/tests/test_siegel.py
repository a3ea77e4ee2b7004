import random
from fractions import Fraction

import mpmath
import pytest

from ellunits.errors import LatticeArgument, PrecisionTooLow
from ellunits.quadfield import make_field
from ellunits.siegel import (
    Phase,
    QTable,
    digits_to_bits,
    phi,
    phi_quotient,
    reduce_args,
    term_count,
)
from ellunits.conjugates import classical_exponent
from oracles import phi_direct

PREC = 300
TOL = mpmath.mpf(2) ** -(PREC - 24)


def close(a, b, tol=TOL):
    return abs(a - b) <= tol * max(abs(a), abs(b))


def rand_point(rng):
    u = Fraction(rng.randint(-30, 30), rng.randint(2, 12))
    v = Fraction(rng.randint(-30, 30), rng.randint(2, 12))
    if u.denominator == 1 and v.denominator == 1:
        v += Fraction(1, 3)
    z = mpmath.mpc(rng.uniform(-0.5, 0.5), rng.uniform(0.5, 2.0))
    return u, v, z


def test_reduce_args_trivial():
    assert reduce_args(0, Fraction(1, 5)) == (0, Fraction(1, 5), Phase(0))


def test_reduce_args_large():
    u0, v0, ph = reduce_args(Fraction(3622, 5), Fraction(877, 5))
    assert (u0, v0) == (Fraction(2, 5), Fraction(2, 5))
    with mpmath.workprec(400):
        z = make_field(-91).tau1(400)
        direct = phi_direct(Fraction(3622, 5) - 724, Fraction(877, 5), z, terms=300)
        # the v-steps are checked against the literal product at moderate arguments
        lhs = phi(Fraction(2, 5), Fraction(877, 5), z, PREC)
        assert close(lhs, direct)


def test_v_shift_identity():
    u, v = Fraction(1, 5), Fraction(2, 5)
    _, _, ph = reduce_args(u, v + 1)
    with mpmath.workprec(200):
        assert abs(ph.value() - (-mpmath.expjpi(mpmath.mpf(1) / 5))) < 1e-50


def test_phase_algebra():
    p = Phase(Fraction(5, 12))
    assert (p * p.inverse()) == Phase(0)
    assert p ** 12 == Phase(0)
    assert Phase(Fraction(13, 12)) == Phase(Fraction(1, 12))


def test_lattice_argument():
    with pytest.raises(LatticeArgument):
        phi(3, -2, mpmath.mpc(0, 1), 128)


def test_precision_floor():
    with pytest.raises(PrecisionTooLow):
        phi(Fraction(1, 3), 0, mpmath.mpc(0, 1), 32)


def test_term_budget_exhausted():
    with pytest.raises(PrecisionTooLow):
        term_count(10 ** 6, 1e-4)


def test_digits_to_bits():
    assert digits_to_bits(256) == 851


def test_odd_symmetry():
    with mpmath.workprec(PREC + 64):
        z = make_field(-91).tau1(PREC + 64)
        a = phi(Fraction(1, 5), Fraction(2, 5), z, PREC)
        b = phi(Fraction(-1, 5), Fraction(-2, 5), z, PREC)
        assert close(a, -b)


def test_four_transformation_identities_100_points():
    rng = random.Random(11)
    with mpmath.workprec(PREC + 64):
        for _ in range(100):
            u, v, z = rand_point(rng)
            base = phi(u, v, z, PREC)
            ref = phi_direct(u, v, z, terms=120) if abs(u) < 2 else None
            # v -> v + 1 and u -> u + 1, against the literal product where it converges
            assert close(phi(u, v + 1, z, PREC), -mpmath.expjpi(u) * base)
            assert close(phi(u + 1, v, z, PREC), -mpmath.expjpi(-v) * base)
            if ref is not None:
                assert close(base, ref, mpmath.mpf(2) ** -200)
            # z -> z + 1
            assert close(phi(u, v, z + 1, PREC), mpmath.expjpi(mpmath.mpf(1) / 6) * phi(u, u + v, z, PREC))
            # z -> -1/z
            w = -1 / z
            assert close(phi(u, v, w, PREC), mpmath.expjpi(mpmath.mpf(-1) / 2) * phi(v, -u, z, PREC))


def test_precision_doubling_is_stable():
    with mpmath.workprec(1200):
        z = make_field(-40).tau1(1200)
        a = phi(Fraction(1, 3), Fraction(1, 2), z, 256)
        b = phi(Fraction(1, 3), Fraction(1, 2), z, 512)
        assert abs(a - b) <= abs(b) * mpmath.mpf(2) ** -250


def test_phi_quotient():
    with mpmath.workprec(PREC + 64):
        z = make_field(-91).tau1(PREC + 64)
        one = phi_quotient((0, Fraction(1, 5)), (0, Fraction(1, 5)), z, PREC)
        assert close(one, mpmath.mpc(1))
        q = phi_quotient((Fraction(2, 5), Fraction(1, 5)), (0, Fraction(1, 5)), z, PREC)
        assert close(q, phi(Fraction(2, 5), Fraction(1, 5), z, PREC) / phi(0, Fraction(1, 5), z, PREC))


def test_qtable_terms_grow_with_precision():
    z = mpmath.mpc(0, 1)
    assert QTable(z, 512).n > QTable(z, 128).n


@pytest.mark.parametrize("N,e", [(6, 12), (5, 60), (12, 24), (2, 12)])
def test_classical_exponent(N, e):
    assert classical_exponent(N) == e
