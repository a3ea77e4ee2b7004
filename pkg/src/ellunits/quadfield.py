"""Exact arithmetic in imaginary quadratic fields.

Elements are stored in the basis (1, tau1) where tau1 = (-B0 + sqrt(d))/2 is
the CM point of the principal form [1, B0, C0].  Ideals are kept in Hermite
normal form with respect to the basis (1, omega), omega = (d + sqrt(d))/2,
which makes equality of ideals a tuple comparison.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd, isqrt

import mpmath
from sympy.ntheory import factorint

from .errors import ExcludedField, NotFundamental, UnitIdeal, ZeroIdeal


def _squarefree(n: int) -> bool:
    return all(e == 1 for e in factorint(abs(n)).values())


def is_fundamental(d: int) -> bool:
    if d >= 0:
        return False
    if d % 4 == 1:
        return _squarefree(d)
    if d % 4 == 0:
        return (d // 4) % 4 in (2, 3) and _squarefree(d // 4)
    return False


def egcd(a: int, b: int) -> tuple[int, int, int]:
    """Return (g, x, y) with a*x + b*y = g = gcd(a, b) >= 0."""
    x0, y0, x1, y1 = 1, 0, 0, 1
    while b:
        q, r = divmod(a, b)
        a, b = b, r
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        return -a, -x0, -y0
    return a, x0, y0


@dataclass(frozen=True)
class Field:
    disc: int

    @property
    def B0(self) -> int:
        return self.disc % 2

    @property
    def C0(self) -> int:
        return (self.B0 * self.B0 - self.disc) // 4

    @property
    def kappa(self) -> int:
        """omega - tau1, an integer."""
        return (self.disc + self.B0) // 2

    @property
    def w_units(self) -> int:
        return {-3: 6, -4: 4}.get(self.disc, 2)

    @property
    def principal_form(self) -> QuadForm:
        return QuadForm(1, self.B0, self.C0)

    def tau1(self, prec: int) -> mpmath.mpc:
        return self.principal_form.tau(prec)

    def elt(self, a=0, b=0) -> FieldElement:
        return FieldElement(self, a, b)

    def __str__(self):
        return f"Q(sqrt({self.disc}))"


def make_field(d: int) -> Field:
    """Field for a squarefree d < 0 or a fundamental discriminant d."""
    if d >= 0:
        raise NotFundamental(f"{d} is not negative")
    if is_fundamental(d):
        dk = d
    elif _squarefree(d):
        dk = d if d % 4 == 1 else 4 * d
    else:
        raise NotFundamental(f"{d} is neither squarefree nor a fundamental discriminant")
    if dk in (-3, -4):
        raise ExcludedField(f"Q(sqrt({d})) has more than two units")
    return Field(dk)


@dataclass(frozen=True)
class FieldElement:
    """a + b*tau1 with a, b integers or Fractions."""

    K: Field
    a: int | Fraction = 0
    b: int | Fraction = 0

    def _coerce(self, other) -> FieldElement:
        if isinstance(other, FieldElement):
            return other
        return FieldElement(self.K, other, 0)

    def __add__(self, other):
        o = self._coerce(other)
        return FieldElement(self.K, self.a + o.a, self.b + o.b)

    __radd__ = __add__

    def __neg__(self):
        return FieldElement(self.K, -self.a, -self.b)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        o = self._coerce(other)
        K = self.K
        bb = self.b * o.b
        return FieldElement(K, self.a * o.a - K.C0 * bb,
                            self.a * o.b + o.a * self.b - K.B0 * bb)

    __rmul__ = __mul__

    def conj(self) -> FieldElement:
        return FieldElement(self.K, self.a - self.K.B0 * self.b, -self.b)

    def norm(self):
        K = self.K
        return self.a * self.a - K.B0 * self.a * self.b + K.C0 * self.b * self.b

    def trace(self):
        return 2 * self.a - self.K.B0 * self.b

    def __truediv__(self, other):
        o = self._coerce(other)
        n = Fraction(o.norm())
        if n == 0:
            raise ZeroDivisionError("division by zero field element")
        p = self * o.conj()
        return FieldElement(self.K, Fraction(p.a) / n, Fraction(p.b) / n)

    def is_integral(self) -> bool:
        return Fraction(self.a).denominator == 1 and Fraction(self.b).denominator == 1

    def integral(self) -> FieldElement:
        assert self.is_integral()
        return FieldElement(self.K, int(self.a), int(self.b))

    def omega_coords(self) -> tuple:
        return self.a - self.b * self.K.kappa, self.b

    def is_zero(self) -> bool:
        return self.a == 0 and self.b == 0

    def to_mpc(self, prec: int) -> mpmath.mpc:
        with mpmath.workprec(prec):
            tau = self.K.tau1(prec)
            a, b = Fraction(self.a), Fraction(self.b)
            return (mpmath.mpf(a.numerator) / a.denominator
                    + mpmath.mpf(b.numerator) / b.denominator * tau)

    def __str__(self):
        return format_tau(self.a, self.b)


def format_tau(a, b, name="tau1") -> str:
    if b == 0:
        return str(a)
    lead = {1: name, -1: f"-{name}"}.get(b, f"{b}*{name}")
    if a == 0:
        return lead
    return f"{lead} {'+' if a > 0 else '-'} {abs(a)}"


@dataclass(frozen=True)
class QuadForm:
    a: int
    b: int
    c: int

    @property
    def disc(self) -> int:
        return self.b * self.b - 4 * self.a * self.c

    def is_reduced(self) -> bool:
        a, b, c = self.a, self.b, self.c
        if not (a > 0 and abs(b) <= a <= c):
            return False
        if (abs(b) == a or a == c) and b < 0:
            return False
        return True

    def tau(self, prec: int) -> mpmath.mpc:
        with mpmath.workprec(prec):
            return (-self.b + mpmath.sqrt(mpmath.mpf(self.disc))) / (2 * self.a)

    def __iter__(self):
        yield from (self.a, self.b, self.c)

    def __str__(self):
        return f"[{self.a},{self.b},{self.c}]"


def reduce_form(q: QuadForm) -> QuadForm:
    a, b, c = q.a, q.b, q.c
    if a <= 0 or q.disc >= 0:
        raise ValueError(f"{q} is not a positive definite form")
    while True:
        if not (-a < b <= a):
            r = (a - b) // (2 * a)
            b, c = b + 2 * a * r, a * r * r + b * r + c
        if a > c:
            a, b, c = c, -b, a
            continue
        if a == c and b < 0:
            b = -b
        return QuadForm(a, b, c)


def class_group(K: Field) -> list[QuadForm]:
    """All reduced forms of discriminant K.disc, sorted by (a, b)."""
    d = K.disc
    forms = []
    a = 1
    while 3 * a * a <= -d:
        for b in range(-a + 1, a + 1):
            if (b - d) % 2:
                continue
            num = b * b - d
            if num % (4 * a):
                continue
            c = num // (4 * a)
            if c < a or (c == a and b < 0):
                continue
            if gcd(gcd(a, b), c) != 1:
                continue
            forms.append(QuadForm(a, b, c))
        a += 1
    forms.sort(key=lambda f: (f.a, f.b))
    return forms


def class_number(K: Field) -> int:
    return len(class_group(K))


def _hnf(vectors) -> tuple[int, int, int]:
    """HNF (m, n, k) of the lattice spanned by integer vectors (t, s).

    The lattice equals Z*(m, 0) + Z*(n, k) with k > 0 and 0 <= n < m.
    """
    m = 0
    piv = None
    for t, s in vectors:
        t, s = int(t), int(s)
        if s == 0:
            m = gcd(m, t)
            continue
        if piv is None:
            piv = (t, s)
            continue
        n, k = piv
        g, p, q = egcd(k, s)
        m = gcd(m, (s // g) * n - (k // g) * t)
        piv = (p * n + q * t, g)
    if piv is None or m == 0:
        raise ZeroIdeal("generators do not span a rank-2 lattice")
    n, k = piv
    if k < 0:
        n, k = -n, -k
    return m, n % m, k


@dataclass(frozen=True)
class Ideal:
    """Integral ideal with HNF basis [m, n + k*omega]."""

    K: Field
    m: int
    n: int
    k: int

    @property
    def norm(self) -> int:
        return self.m * self.k

    @property
    def hnf(self) -> tuple[int, int, int]:
        return self.m, self.n, self.k

    @property
    def tau_n(self) -> int:
        """n' such that the basis is [m, n' + k*tau1]."""
        return (self.n + self.k * self.K.kappa) % self.m

    def basis(self) -> list[FieldElement]:
        return [self.K.elt(self.m, 0), self.K.elt(self.tau_n, self.k)]

    def contains(self, x: FieldElement) -> bool:
        if not x.is_integral():
            return False
        a, b = int(x.a), int(x.b)
        if b % self.k:
            return False
        return (a - (b // self.k) * self.tau_n) % self.m == 0

    def __contains__(self, x):
        if not isinstance(x, FieldElement):
            x = self.K.elt(x)
        return self.contains(x)

    def __mul__(self, other: Ideal) -> Ideal:
        if isinstance(other, FieldElement) or isinstance(other, int):
            return make_ideal(self.K, [g * other for g in self.basis()])
        return make_ideal(self.K, [x * y for x in self.basis() for y in other.basis()])

    __rmul__ = __mul__

    def __add__(self, other: Ideal) -> Ideal:
        return make_ideal(self.K, self.basis() + other.basis())

    def __pow__(self, e: int) -> Ideal:
        out = unit_ideal(self.K)
        for _ in range(e):
            out = out * self
        return out

    def conj(self) -> Ideal:
        return make_ideal(self.K, [x.conj() for x in self.basis()])

    def is_unit(self) -> bool:
        return self.m == 1

    def reduce(self, x: FieldElement) -> FieldElement:
        """Canonical residue of an integral x: 0 <= b < k, 0 <= a < m."""
        a, b = int(x.a), int(x.b)
        q, b = divmod(b, self.k)
        a = (a - q * self.tau_n) % self.m
        return FieldElement(self.K, a, b)

    def divide_integer(self, c: int) -> Ideal:
        """self / (c) when c divides every element."""
        m, n, k = self.m, self.tau_n, self.k
        if m % c or n % c or k % c:
            raise ValueError(f"{c} does not divide {self}")
        return make_ideal(self.K, [self.K.elt(m // c), self.K.elt(n // c, k // c)])

    def __str__(self):
        return f"[{self.m}, {self.n} + {self.k}*omega]"


def unit_ideal(K: Field) -> Ideal:
    return make_ideal(K, 1)


def make_ideal(K: Field, gens) -> Ideal:
    """O_K-ideal generated by a list of elements/integers, or by one integer N."""
    if isinstance(gens, int):
        gens = [gens]
    elts = [g if isinstance(g, FieldElement) else K.elt(g) for g in gens]
    elts = [g for g in elts if not g.is_zero()]
    if not elts:
        raise ZeroIdeal("ideal needs a nonzero generator")
    tau = K.elt(0, 1)
    vecs = []
    for g in elts:
        if not g.is_integral():
            raise ValueError(f"{g} is not integral")
        for h in (g, g * tau):
            vecs.append((int(h.a), int(h.b)))
    m, n_tau, k = _hnf(vecs)
    return Ideal(K, m, (n_tau - k * K.kappa) % m, k)


def ideal_from_hnf(K: Field, m: int, n: int, k: int) -> Ideal:
    """Ideal with omega-basis [m, n + k*omega]; checks that it is an O_K-module."""
    gen = K.elt(n + k * K.kappa, k)
    I = make_ideal(K, [K.elt(m), gen])
    if I.hnf != (m, n % m, k):
        raise ValueError(f"[{m}, {n} + {k}*omega] is not an ideal in HNF")
    return I


def principal_ideal(x: FieldElement) -> Ideal:
    return make_ideal(x.K, [x])


def minimal_integer(f: Ideal) -> int:
    if f.is_unit():
        raise UnitIdeal("modulus is the unit ideal")
    return f.m


def principal_generator(I: Ideal) -> FieldElement | None:
    """A generator of I, or None when I is not principal.

    Enumerates lattice points of norm N(I); ties broken by (|b|, |a|, sign).
    """
    K = I.K
    N = I.norm
    D = -K.disc
    best = None
    for s in range(-isqrt(4 * N // D), isqrt(4 * N // D) + 1):
        if s % I.k:
            continue
        r2 = 4 * N - D * s * s
        r = isqrt(r2)
        if r * r != r2:
            continue
        for sign in (1, -1):
            num = sign * r + K.B0 * s
            if num % 2:
                continue
            x = K.elt(num // 2, s)
            if not I.contains(x):
                continue
            key = (abs(s), abs(x.a), s < 0, x.a < 0)
            if best is None or key < best[0]:
                best = (key, x)
    return None if best is None else best[1]


def ideal_of_form(K: Field, Q: QuadForm) -> Ideal:
    """The ideal [a, (-b + sqrt(d))/2] attached to Q."""
    return make_ideal(K, [K.elt(Q.a), K.elt((K.B0 - Q.b) // 2, 1)])


def form_of_ideal(I: Ideal) -> QuadForm:
    """Reduced form whose class corresponds to the class of I."""
    K = I.K
    m, n, k = I.m, I.tau_n, I.k
    A = m // k
    B = K.B0 - 2 * (n // k)
    C = (B * B - K.disc) // (4 * A)
    return reduce_form(QuadForm(A, B, C))


def p_part(x: FieldElement, p: int) -> Ideal:
    """Product of the prime-power factors of (x) lying over p."""
    e = factorint(abs(int(x.norm()))).get(p, 0)
    return principal_ideal(x) + make_ideal(x.K, p ** e)


def invertible_residues(f: Ideal) -> list[FieldElement]:
    """Canonical representatives of (O/f)*, sorted by (b, a)."""
    K = f.K
    Nf = f.norm
    out = []
    for b in range(f.k):
        for a in range(f.m):
            x = K.elt(a, b)
            if x.is_zero():
                continue
            if gcd(int(x.norm()), Nf) == 1 or (principal_ideal(x) + f).is_unit():
                out.append(x)
    return out


def unit_orbits(f: Ideal) -> list[FieldElement]:
    """One representative per {+1, -1} orbit of (O/f)*, the (b, a)-smaller one."""
    seen = set()
    reps = []
    for x in invertible_residues(f):
        key = (x.b, x.a)
        if key in seen:
            continue
        y = f.reduce(-x)
        seen.update({key, (y.b, y.a)})
        reps.append(x)
    return reps
