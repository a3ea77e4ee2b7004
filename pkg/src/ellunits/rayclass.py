"""Ray class data: roots of unity in K_f, class selection, Galois elements."""
from __future__ import annotations

from dataclasses import dataclass
from math import gcd

from sympy.ntheory import factorint
from sympy.ntheory.modular import crt

from .errors import NoClassFound, UnitIdeal
from .quadfield import (
    Field,
    FieldElement,
    Ideal,
    QuadForm,
    class_group,
    form_of_ideal,
    invertible_residues,
    make_ideal,
    p_part,
    principal_generator,
    unit_ideal,
    unit_orbits,
)
from .reciprocity import ResidueMatrix, WClassMatrix, gee_uQ, lift_with_det


@dataclass(frozen=True)
class Modulus:
    ideal: Ideal

    def __post_init__(self):
        if self.ideal.is_unit():
            raise UnitIdeal("modulus must be a proper ideal")

    @property
    def K(self) -> Field:
        return self.ideal.K

    @property
    def f(self) -> int:
        return self.ideal.m

    @property
    def M(self) -> int:
        return 12 * self.f * self.f

    @property
    def norm(self) -> int:
        return self.ideal.norm

    def is_rational(self) -> bool:
        return self.ideal == make_ideal(self.K, self.f)


@dataclass(frozen=True)
class RayData:
    W: int
    ell: int
    degenerate: bool
    h_f: int


def _passes_norm_test(f: Ideal, n: int) -> bool:
    b1, b2 = f.basis()
    for i in range(n):
        for j in range(n):
            N = int((1 + b1 * i + b2 * j).norm())
            if gcd(N, n) == 1 and (N - 1) % n:
                return False
    return True


def roots_of_unity_count(f: Ideal) -> int:
    """Number W of roots of unity in K_f."""
    if f.is_unit():
        raise UnitIdeal("modulus must be a proper ideal")
    W = 1
    for p, e in factorint(12 * f.m).items():
        best = 1
        for k in range(1, e + 1):
            if not _passes_norm_test(f, p ** k):
                break
            best = p ** k
        W *= best
    return W


def class_norm(x: FieldElement, f: Ideal, W: int) -> int:
    """N(x') mod W for a lift x' of x mod f with N(x') prime to W."""
    b1, b2 = f.basis()
    for i in range(W):
        for j in range(W):
            N = int((x + b1 * i + b2 * j).norm())
            if gcd(N, W) == 1:
                return N % W
    raise ValueError(f"{x} has no lift with norm prime to {W}")


def e_value(W: int, d_c: int) -> int:
    return W // gcd(W, d_c - 1)


def _is_pm_one(x: FieldElement, f: Ideal) -> bool:
    K = f.K
    return f.reduce(x) in (f.reduce(K.elt(1)), f.reduce(K.elt(-1)))


def class_candidates(f: Ideal, W: int) -> list[FieldElement]:
    """Residues x != +-1 mod f with N(x) = 1 mod W, one per {+-1} orbit."""
    return [x for x in unit_orbits(f)
            if not _is_pm_one(x, f) and class_norm(x, f, W) == 1 % W]


def is_degenerate(f: Ideal, W: int) -> bool:
    """True iff K_f = H(zeta_W)."""
    return not class_candidates(f, W)


def select_class(f: Ideal, W: int, exhaustive: bool = False):
    """First admissible class (lexicographic in (s, t)), or all of them."""
    cands = class_candidates(f, W)
    if not cands:
        raise NoClassFound("every class with N(x) = 1 mod W is +-1 mod f")
    return cands if exhaustive else cands[0]


def ray_class_number(f: Ideal) -> int:
    K = f.K
    units = len(invertible_residues(f))
    # -1 = 1 mod f exactly when 2 lies in f
    image = 1 if 2 in f else 2
    return len(class_group(K)) * units // image


def ray_data(f: Ideal) -> RayData:
    W = roots_of_unity_count(f)
    return RayData(W=W, ell=12 * f.m // W, degenerate=is_degenerate(f, W),
                   h_f=ray_class_number(f))


def residue_matrix(x: FieldElement, f: Ideal) -> WClassMatrix:
    """The principal-form matrix of x = s*tau1 + t, tagged with level f."""
    return WClassMatrix(int(x.b), int(x.a), f.K.principal_form, f.m)


def ideal_lattice(f: Ideal) -> tuple[int, int, int]:
    """(m, n, k) with f = Z m + Z (n + k tau1), the lattice scanned by lifts."""
    return f.m, f.tau_n, f.k


@dataclass(frozen=True)
class GaloisElement:
    x: FieldElement
    beta: ResidueMatrix
    Q: QuadForm
    u_Q: ResidueMatrix

    @property
    def gamma(self) -> ResidueMatrix:
        return self.beta @ self.u_Q

    @property
    def d_det(self) -> int:
        return self.gamma.det


def galois_elements(f: Ideal, ell: int = 1) -> list[GaloisElement]:
    """Pairs (beta, Q) restricting bijectively onto Gal(K_f/K), beta-major order."""
    mod = Modulus(f)
    M = mod.M
    forms = class_group(f.K)
    uqs = {Q: gee_uQ(Q, M) for Q in forms}
    out = []
    for x in unit_orbits(f):
        w = lift_with_det(residue_matrix(x, f), M, None, ell, ideal_lattice(f))
        beta = w.residue(M)
        for Q in forms:
            out.append(GaloisElement(x, beta, Q, uqs[Q]))
    return out


# Composition of Galois elements through the idele of each form.

def _a_tau(K: Field, Q: QuadForm) -> FieldElement:
    """a * tau_Q as an element of O_K."""
    return K.elt((K.B0 - Q.b) // 2, 1)


def idele_component(K: Field, Q: QuadForm, p: int) -> FieldElement:
    a, _, c = Q
    if a % p:
        return K.elt(a)
    if c % p:
        return _a_tau(K, Q)
    return _a_tau(K, Q) - a


def idele_ideal(K: Field, Q: QuadForm) -> Ideal:
    """Ideal of the finite idele attached to Q."""
    out = unit_ideal(K)
    for p in factorint(Q.a):
        out = out * p_part(idele_component(K, Q, p), p)
    return out


def _local_residue(y: FieldElement, q: int):
    out = []
    for c in (y.a, y.b):
        num, den = c.numerator, c.denominator
        if gcd(den, q) != 1:
            raise ValueError(f"{y} is not integral at {q}")
        out.append(num * pow(den, -1, q) % q)
    return out


def galois_compose(alpha: ResidueMatrix, Q1: QuadForm, beta: ResidueMatrix,
                   Q2: QuadForm, K: Field) -> tuple[ResidueMatrix, QuadForm]:
    """(alpha, Q1) followed by (beta, Q2), as a single pair (gamma, Q3)."""
    M = alpha.level
    J = idele_ideal(K, Q1) * idele_ideal(K, Q2)
    Q3 = form_of_ideal(J)
    I3 = idele_ideal(K, Q3)
    mu = principal_generator(J * I3.conj())
    if mu is None:
        raise ValueError(f"class of {J} does not match {Q3}")
    lam = mu / I3.norm
    mods, ts, ss = [], [], []
    for p, e in sorted(factorint(M).items()):
        q = p ** e
        y = (idele_component(K, Q1, p) * idele_component(K, Q2, p)
             / (lam * idele_component(K, Q3, p)))
        t, s = _local_residue(y, q)
        mods.append(q)
        ts.append(t)
        ss.append(s)
    t = int(crt(mods, ts)[0])
    s = int(crt(mods, ss)[0])
    h = WClassMatrix(s, t, K.principal_form, M).residue()
    return alpha @ beta @ h, Q3
