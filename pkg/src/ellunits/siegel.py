"""Siegel functions phi_(u,v)(z) evaluated through their q-product.

phi(u, v, z) = -i e^{pi i z/6} e^{pi i u g} (e^{pi i g} - e^{-pi i g})
               * prod_{n>=1} (1 - q^n e^{2 pi i g}) (1 - q^n e^{-2 pi i g}),
with g = u z + v and q = e^{2 pi i z}.  Arguments are first moved into
[0,1)^2; the root of unity picked up on the way is tracked exactly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import mpmath

from .errors import LatticeArgument, PrecisionTooLow

DEFAULT_DIGITS = 256
MIN_PREC_BITS = 64
MAX_TERMS = 200_000


def digits_to_bits(digits: int) -> int:
    return int(math.ceil(digits * math.log2(10)))


@dataclass(frozen=True)
class Phase:
    """Root of unity exp(2 pi i * turns), turns kept in [0, 1)."""

    turns: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "turns", Fraction(self.turns) % 1)

    def __mul__(self, other: Phase) -> Phase:
        return Phase(self.turns + other.turns)

    def __pow__(self, k: int) -> Phase:
        return Phase(self.turns * k)

    def inverse(self) -> Phase:
        return Phase(-self.turns)

    def value(self) -> mpmath.mpc:
        return mpmath.expjpi(2 * mpmath.mpf(self.turns.numerator) / self.turns.denominator)


def reduce_args(u, v) -> tuple[Fraction, Fraction, Phase]:
    """Return (u0, v0, ph) with 0 <= u0, v0 < 1 and phi(u,v) = ph * phi(u0,v0)."""
    u, v = Fraction(u), Fraction(v)
    k = math.floor(u)
    u0 = u - k
    # u -> u0 at the original v
    turns = k * (Fraction(1, 2) - v / 2)
    l = math.floor(v)
    v0 = v - l
    # then v -> v0 at u0
    turns += l * (Fraction(1, 2) + u0 / 2)
    return u0, v0, Phase(turns)


def guard_bits(n_terms: int) -> int:
    return 32 + n_terms.bit_length()


def term_count(prec_bits: int, im_z) -> int:
    """Product length for relative error below 2^-prec_bits."""
    im = float(im_z)
    if im <= 0:
        raise ValueError("z must lie in the upper half plane")
    rate = 2 * math.pi * im / math.log(2)
    n = math.ceil((prec_bits + 40) / rate) + 2
    n = math.ceil((prec_bits + guard_bits(n)) / rate) + 2
    if n > MAX_TERMS:
        raise PrecisionTooLow(f"Im z = {im:.3g} needs {n} product terms")
    return n


class QTable:
    """Shared powers q^n for one value of z."""

    def __init__(self, z, prec_bits: int):
        if prec_bits < MIN_PREC_BITS:
            raise PrecisionTooLow(f"precision {prec_bits} bits is below {MIN_PREC_BITS}")
        self.prec = prec_bits
        self.n = term_count(prec_bits, mpmath.im(z))
        self.wp = prec_bits + guard_bits(self.n)
        with mpmath.workprec(self.wp):
            self.z = mpmath.mpc(z)
            q = mpmath.expjpi(2 * self.z)
            self.powers = [q]
            for _ in range(self.n - 1):
                self.powers.append(self.powers[-1] * q)
            self.pre = -1j * mpmath.expjpi(self.z / 6)


def _phi_reduced(u0: Fraction, v0: Fraction, tab: QTable):
    mp_u = mpmath.mpf(u0.numerator) / u0.denominator
    mp_v = mpmath.mpf(v0.numerator) / v0.denominator
    g = mp_u * tab.z + mp_v
    e = mpmath.expjpi(g)
    e2 = e * e
    ie2 = 1 / e2
    val = tab.pre * mpmath.expjpi(mp_u * g) * (e - 1 / e)
    for qn in tab.powers:
        val *= (1 - qn * e2) * (1 - qn * ie2)
    return val


def phi_with_table(u, v, tab: QTable):
    u0, v0, ph = reduce_args(u, v)
    if u0 == 0 and v0 == 0:
        raise LatticeArgument(f"({u}, {v}) lies in Z^2")
    with mpmath.workprec(tab.wp):
        return ph.value() * _phi_reduced(u0, v0, tab)


def phi(u, v, z, prec_bits: int):
    """Siegel function phi_(u,v)(z) to prec_bits of relative precision."""
    return phi_with_table(u, v, QTable(z, prec_bits))


def phi_quotient(num, den, z, prec_bits: int):
    """phi_num(z) / phi_den(z) for argument pairs num, den sharing one q table."""
    tab = QTable(z, prec_bits)
    a = phi_with_table(num[0], num[1], tab)
    b = phi_with_table(den[0], den[1], tab)
    with mpmath.workprec(tab.wp):
        return a / b
