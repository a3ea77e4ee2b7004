"""Matrix side of Shimura reciprocity.

Matrices are 2x2 tuples (a, b, c, d) read row by row.  Galois elements act on
the right: phi_(u,v) transforms under gamma through the row vector (u, v)*gamma.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import gcd

from sympy.ntheory import factorint
from sympy.ntheory.modular import crt

from .errors import NoAdmissibleLift, NonInvertibleDeterminant
from .quadfield import QuadForm, egcd

IDENTITY = (1, 0, 0, 1)
S = (0, -1, 1, 0)
T = (1, 1, 0, 1)


def matmul(A, B, mod: int | None = None):
    a, b, c, d = A
    e, f, g, h = B
    out = (a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h)
    if mod is None:
        return out
    return tuple(x % mod for x in out)


def det(A) -> int:
    a, b, c, d = A
    return a * d - b * c


@dataclass(frozen=True)
class ResidueMatrix:
    entries: tuple
    level: int

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(int(x) % self.level for x in self.entries))

    def __matmul__(self, other):
        if isinstance(other, ResidueMatrix):
            level = gcd(self.level, other.level)
            other = other.entries
        else:
            level = self.level
        return ResidueMatrix(matmul(self.entries, other), level)

    @property
    def det(self) -> int:
        return det(self.entries) % self.level

    def reduce(self, level: int) -> ResidueMatrix:
        if self.level % level:
            raise ValueError(f"{level} does not divide {self.level}")
        return ResidueMatrix(self.entries, level)

    def is_invertible(self) -> bool:
        return gcd(self.det, self.level) == 1


@dataclass(frozen=True)
class WClassMatrix:
    """The matrix (t - B s, -C s; s A, t) of x = s A tau_Q + t, kept with integer s, t."""

    s: int
    t: int
    form: QuadForm
    level: int

    @property
    def entries(self) -> tuple:
        A, B, C = self.form
        s, t = self.s, self.t
        return (t - B * s, -C * s, s * A, t)

    @property
    def det(self) -> int:
        return det(self.entries)

    def residue(self, level: int | None = None) -> ResidueMatrix:
        return ResidueMatrix(self.entries, level or self.level)


def w_matrices(N: int, Q: QuadForm) -> list[WClassMatrix]:
    """Representatives of W_{N,tau_Q} / {+-1}, lexicographic in (s, t)."""
    out = []
    seen = set()
    for s in range(N):
        for t in range(N):
            w = WClassMatrix(s, t, Q, N)
            if gcd(w.det, N) != 1:
                continue
            key = min((s, t), ((-s) % N, (-t) % N))
            if key in seen:
                continue
            seen.add(key)
            out.append(w)
    return out


def _gee_local(Q: QuadForm, p: int) -> tuple:
    a, b, c = Q
    if Q.disc % 4 == 0:
        h = b // 2
        if a % p:
            return (a, h, 0, 1)
        if c % p:
            return (-h, -c, 1, 0)
        return (-a - h, -c - h, 1, -1)
    if a % p:
        return (a, (b - 1) // 2, 0, 1)
    if c % p:
        return (-(b + 1) // 2, -c, 1, 0)
    # top-right entry is -c - (b-1)/2; this is the value that reproduces
    # u_[5,3,5] = (293, 169; 276, 49) mod 300 for d = -91
    return (-a - (b + 1) // 2, -c - (b - 1) // 2, 1, -1)


def gee_uQ(Q: QuadForm, M: int) -> ResidueMatrix:
    """Gee's matrix u_Q modulo M, assembled prime by prime with CRT."""
    if M == 1:
        return ResidueMatrix(IDENTITY, 1)
    mods = []
    cols = [[], [], [], []]
    for p, e in sorted(factorint(M).items()):
        loc = _gee_local(Q, p)
        mods.append(p ** e)
        for i in range(4):
            cols[i].append(loc[i] % p ** e)
    return ResidueMatrix(tuple(int(crt(mods, col)[0]) for col in cols), M)


def lift_with_det(x: WClassMatrix, M: int, u_Q: ResidueMatrix | None = None,
                  ell: int = 1, lattice: tuple[int, int, int] | None = None) -> WClassMatrix:
    """Lift x to W_{M,tau} with det(alpha * u_Q) = 1 mod ell.

    Candidates are x + j*(n + k*tau1) + i*m for the ideal basis lattice = (m, n, k),
    scanned with j outermost. The default lattice is (f) with f = x.level, which
    is the row-major scan over (s + f j, t + f i).
    """
    m, n, k = lattice if lattice is not None else (x.level, 0, x.level)
    if M % m or M % k:
        raise ValueError(f"lattice {(m, n, k)} does not contain {M}")
    du = 1 if u_Q is None else u_Q.det
    for j in range(M // k):
        for i in range(M // m):
            w = WClassMatrix(x.s + k * j, x.t + n * j + m * i, x.form, M)
            dw = w.det
            if gcd(dw, M) != 1:
                continue
            if (dw * du - 1) % ell == 0:
                return w
    raise NoAdmissibleLift(f"no lift of (s,t)=({x.s},{x.t}) to level {M} "
                           f"with det = 1 mod {ell}")


def sl2_decompose(A) -> list[tuple[str, int]]:
    """Word in S and T**k whose product is A exactly."""
    a, b, c, d = A
    if det(A) != 1:
        raise ValueError(f"{A} is not in SL2(Z)")
    word = []
    while c != 0:
        q = a // c
        if q:
            word.append(("T", q))
        word.append(("S", 1))
        # A = T^q S A'  with  A' = S^-1 T^-q A
        a, b, c, d = c, d, -(a - q * c), -(b - q * d)
    if a == -1:
        word.append(("S", 2))
        b = -b
    if b:
        word.append(("T", b))
    return word


def word_product(word) -> tuple:
    A = IDENTITY
    for g, e in word:
        if g == "S":
            for _ in range(e % 4):
                A = matmul(A, S)
        else:
            A = matmul(A, (1, e, 0, 1))
    return A


def herglotz_omega(A) -> int:
    """Exponent e (mod 12) with omega(A) = exp(2 pi i e / 12)."""
    a, b, c, d = A
    p3 = a * c * (b * b + 1) + b * d * (a * a + 1)
    p4 = (b * b - a + 2) * c + (a * a - b + 2) * d + a * d
    # zeta_4^p4 * zeta_3^-p3
    return (3 * p4 - 4 * p3) % 12


def lift_sl2(A, M: int) -> tuple:
    """Integral matrix of determinant 1 congruent to A (det A = 1 mod M)."""
    a, b, c, d = (x % M for x in A)
    if (a * d - b * c) % M != 1 % M:
        raise ValueError(f"{A} is not in SL2(Z/{M})")
    centred = tuple(x - M if 2 * x > M else x for x in (a, b, c, d))
    if det(centred) == 1:
        return centred
    c1 = c if c else M
    k = 0
    while gcd(c1, d + k * M) != 1:
        k += 1
    d1 = d + k * M
    _, x, y = egcd(d1, c1)
    # base lift (x, -y; c1, d1), then fix the top row by a left T^k0 factor
    a0, b0 = x, -y
    k0 = (y * (a - a0) + x * (b - b0)) % M
    L = (a0 + k0 * c1, b0 + k0 * d1, c1, d1)
    assert det(L) == 1 and all((L[i] - A[i]) % M == 0 for i in range(4))
    return L


def glM_split(gamma: ResidueMatrix) -> tuple[tuple, int]:
    """Write gamma = A * diag(1, d) mod M with A integral of determinant 1."""
    M = gamma.level
    d = gamma.det
    if gcd(d, M) != 1:
        raise NonInvertibleDeterminant(f"det {d} is not a unit mod {M}")
    a, b, c, dd = gamma.entries
    dinv = pow(d, -1, M)
    A = lift_sl2((a, b * dinv, c, dd * dinv), M)
    return A, d
