import random
from fractions import Fraction
from math import gcd

import mpmath
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ellunits.errors import NoAdmissibleLift, NonInvertibleDeterminant
from ellunits.quadfield import QuadForm, class_group, make_field
from ellunits.reciprocity import (
    IDENTITY,
    ResidueMatrix,
    WClassMatrix,
    det,
    gee_uQ,
    glM_split,
    herglotz_omega,
    lift_sl2,
    lift_with_det,
    matmul,
    sl2_decompose,
    w_matrices,
    word_product,
)
from ellunits.siegel import phi
from oracles import D40_W6_MATRICES, D91_UQ_535_MOD300, D91_W5_MATRICES

GEN_EXP = {"T": 1, "Ti": 11, "S": 9}
GEN_MAT = {"T": (1, 1, 0, 1), "Ti": (1, -1, 0, 1), "S": (0, -1, 1, 0)}


def random_word(rng, length):
    return [rng.choice(list(GEN_MAT)) for _ in range(length)]


def test_w_matrices_d91_n5():
    got = {w.entries for w in w_matrices(5, QuadForm(1, 1, 23))}
    assert got == D91_W5_MATRICES


def test_w_matrices_d40_n6():
    ws = w_matrices(6, QuadForm(1, 0, 10))
    assert {w.entries for w in ws} == D40_W6_MATRICES
    assert [w.entries for w in ws][:2] == [(1, 0, 0, 1), (1, -10, 1, 1)]


def test_w_matrices_inert_two():
    assert len(w_matrices(2, QuadForm(1, 1, 3))) == 3


@given(st.integers(-40, 40), st.integers(-40, 40), st.sampled_from([-91, -40, -23, -56, -71]))
def test_det_is_norm(s, t, d):
    K = make_field(d)
    for Q in class_group(K):
        w = WClassMatrix(s, t, Q, 7)
        x = K.elt(t, 0) + K.elt((K.B0 - Q.b) // 2, 1) * s
        assert w.det == x.norm()


def test_gee_uQ_examples():
    assert gee_uQ(QuadForm(5, 3, 5), 300).entries == D91_UQ_535_MOD300
    for M in (12, 300, 432):
        assert gee_uQ(QuadForm(1, 1, 23), M).entries == IDENTITY
    u = gee_uQ(QuadForm(2, 0, 5), 432)
    assert u.entries == (272, 27, 81, 352)
    assert u.reduce(16).entries == (0, 11, 1, 0)
    assert u.reduce(27).entries == (2, 0, 0, 1)


@pytest.mark.parametrize("d", [-91, -40, -23, -84, -71, -195])
def test_gee_uQ_reduces_and_is_invertible(d):
    K = make_field(d)
    for Q in class_group(K):
        big = gee_uQ(Q, 12 * 30 * 30)
        assert big.is_invertible()
        for m in (4, 9, 25, 12, 60, 300):
            assert big.reduce(m) == gee_uQ(Q, m)


def test_lift_with_det_examples():
    P = QuadForm(1, 1, 23)
    a = lift_with_det(WClassMatrix(2, 1, P, 5), 300, None, 6)
    assert a.entries == (-1, -46, 2, 1) and a.det == 91
    a = lift_with_det(WClassMatrix(2, 1, P, 5), 300, gee_uQ(QuadForm(5, 3, 5), 300), 6)
    assert a.entries == (9, -46, 2, 11)
    a = lift_with_det(WClassMatrix(2, 3, QuadForm(1, 0, 10), 6), 432, None, 3)
    assert a.entries == (3, -20, 2, 3) and a.det % 3 == 1
    assert lift_with_det(WClassMatrix(0, 1, P, 5), 300).entries == IDENTITY


@pytest.mark.parametrize("s,t", [(1, 0), (1, 1), (2, 2), (0, 4)])
def test_lift_with_det_reduces_to_input(s, t):
    Q = QuadForm(1, 1, 23)
    u = gee_uQ(QuadForm(5, 3, 5), 300)
    a = lift_with_det(WClassMatrix(s, t, Q, 5), 300, u, 6)
    assert (a.s - s) % 5 == 0 and (a.t - t) % 5 == 0
    assert gcd(a.det, 300) == 1 and (a.det * u.det) % 6 == 1


def test_lift_with_det_exhausted():
    # every lift of x = 2 mod 5 has det = 4 mod 5
    with pytest.raises(NoAdmissibleLift):
        lift_with_det(WClassMatrix(0, 2, QuadForm(1, 1, 23), 5), 300, None, 5)


def test_sl2_decompose_examples():
    assert sl2_decompose((1, 1, 0, 1)) == [("T", 1)]
    assert word_product(sl2_decompose((-1, 0, 0, -1))) == (-1, 0, 0, -1)
    assert word_product(sl2_decompose((2, 1, 1, 1))) == (2, 1, 1, 1)


@given(st.integers(0, 10 ** 6))
def test_sl2_decompose_random(seed):
    rng = random.Random(seed)
    A = IDENTITY
    for g in random_word(rng, rng.randint(0, 25)):
        A = matmul(A, GEN_MAT[g])
    assert word_product(sl2_decompose(A)) == A


def test_herglotz_generators():
    assert herglotz_omega((1, 1, 0, 1)) == 1
    assert herglotz_omega((0, -1, 1, 0)) == 9
    assert herglotz_omega((-1, 0, 0, -1)) == 6
    assert herglotz_omega(IDENTITY) == 0


def test_herglotz_multiplicative_200_words():
    rng = random.Random(2024)
    for _ in range(200):
        w = random_word(rng, rng.randint(1, 20))
        A = IDENTITY
        for g in w:
            A = matmul(A, GEN_MAT[g])
        assert herglotz_omega(A) == sum(GEN_EXP[g] for g in w) % 12


def test_herglotz_transformation_of_phi():
    rng = random.Random(7)
    with mpmath.workprec(300):
        z = mpmath.mpc("0.1", "1.3")
        for _ in range(6):
            A = IDENTITY
            for g in random_word(rng, 5):
                A = matmul(A, GEN_MAT[g])
            a, b, c, d = A
            u, v = Fraction(rng.randint(1, 6), 7), Fraction(rng.randint(0, 6), 7)
            Az = (a * z + b) / (c * z + d)
            if mpmath.im(Az) < 0.2:
                continue
            lhs = phi(u, v, Az, 200)
            rhs = phi(u * a + v * c, u * b + v * d, z, 200)
            rhs *= mpmath.expjpi(mpmath.mpf(herglotz_omega(A)) / 6)
            assert abs(lhs - rhs) < abs(lhs) * mpmath.mpf(2) ** -180


def test_glM_split_examples():
    A, d = glM_split(ResidueMatrix(IDENTITY, 12))
    assert (A, d) == (IDENTITY, 1)
    A, d = glM_split(ResidueMatrix((1, 0, 0, 7), 12))
    assert d == 7 and all((x - y) % 12 == 0 for x, y in zip(A, IDENTITY))
    g = ResidueMatrix((293, 169, 276, 49), 300)
    A, d = glM_split(g)
    assert det(A) == 1
    assert ResidueMatrix(matmul(A, (1, 0, 0, d)), 300) == g


def test_glM_split_rejects_singular():
    with pytest.raises(NonInvertibleDeterminant):
        glM_split(ResidueMatrix((2, 0, 0, 1), 12))


@given(st.integers(0, 10 ** 6), st.sampled_from([12, 48, 108, 300, 432, 972]))
def test_glM_split_random(seed, M):
    rng = random.Random(seed)
    while True:
        g = ResidueMatrix(tuple(rng.randrange(M) for _ in range(4)), M)
        if g.is_invertible():
            break
    A, d = glM_split(g)
    assert det(A) == 1 and ResidueMatrix(matmul(A, (1, 0, 0, d)), M) == g


@given(st.integers(0, 10 ** 6), st.sampled_from([5, 12, 300, 432]))
def test_lift_sl2_random(seed, M):
    rng = random.Random(seed)
    A = IDENTITY
    for g in random_word(rng, 12):
        A = matmul(A, GEN_MAT[g])
    L = lift_sl2(tuple(x % M for x in A), M)
    assert det(L) == 1 and all((x - y) % M == 0 for x, y in zip(L, A))
