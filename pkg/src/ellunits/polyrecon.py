"""Minimal polynomials from conjugate values, recognized exactly in O_K and Z."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import mpmath

from .errors import RecognitionFailure
from .quadfield import Field, FieldElement


def poly_from_roots(values) -> list:
    """Monic coefficients (ascending degree) of prod (x - r), small roots first."""
    if not values:
        raise ValueError("need at least one root")
    coeffs = [mpmath.mpc(1)]
    for r in sorted(values, key=abs):
        nxt = [mpmath.mpc(0)] * (len(coeffs) + 1)
        for i, c in enumerate(coeffs):
            nxt[i + 1] += c
            nxt[i] -= r * c
        coeffs = nxt
    return coeffs


def recognize_OK(coeff, tau1, tol) -> tuple[int, int, mpmath.mpf]:
    """Integers (a, b) with coeff = a + b*tau1, and the residual."""
    b = int(mpmath.nint(mpmath.im(coeff) / mpmath.im(tau1)))
    a = int(mpmath.nint(mpmath.re(coeff) - b * mpmath.re(tau1)))
    residual = abs(coeff - (a + b * tau1))
    if residual >= tol:
        raise RecognitionFailure(f"coefficient {mpmath.nstr(coeff, 15)} is not in O_K "
                                 f"(residual {mpmath.nstr(residual, 5)})", residual)
    return a, b, residual


@dataclass
class AlgebraicPoly:
    """Monic polynomial over O_K; coeffs ascending, each (a, b) = a + b*tau1."""

    K: Field
    coeffs: list
    residuals: list = field(default_factory=list)
    multiplicity: int = 1

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def elements(self) -> list[FieldElement]:
        return [self.K.elt(a, b) for a, b in self.coeffs]

    def omega_coeffs(self) -> list:
        return [tuple(int(c) for c in x.omega_coords()) for x in self.elements()]

    def is_rational(self) -> bool:
        return all(b == 0 for _, b in self.coeffs)

    def max_residual(self):
        return max(self.residuals) if self.residuals else 0

    def evaluate(self, x, prec: int):
        tau = self.K.tau1(prec)
        with mpmath.workprec(prec):
            acc = mpmath.mpc(0)
            for a, b in reversed(self.coeffs):
                acc = acc * x + (a + b * tau)
            return acc


def collapse_duplicates(values, tol):
    """Distinct values and the common multiplicity (values within tol coincide)."""
    distinct, counts = [], []
    for v in values:
        for i, w in enumerate(distinct):
            if abs(v - w) < tol:
                counts[i] += 1
                break
        else:
            distinct.append(v)
            counts.append(1)
    mult = counts[0] if len(set(counts)) == 1 else max(counts)
    return distinct, mult


def min_poly_over_K(K: Field, values, prec: int) -> AlgebraicPoly:
    """Recognize prod (x - v) over O_K; repeated conjugates are collapsed first."""
    wp = prec + 64
    with mpmath.workprec(wp):
        tol = mpmath.mpf(2) ** (-prec // 2)
        distinct, mult = collapse_duplicates(values, tol)
        coeffs = poly_from_roots(distinct)
        tau = K.tau1(wp)
        out, res = [], []
        for c in coeffs:
            a, b, r = recognize_OK(c, tau, tol * max(1, abs(c)))
            out.append((a, b))
            res.append(r)
    return AlgebraicPoly(K, out, res, mult)


def min_poly_over_Q(p: AlgebraicPoly) -> list[int]:
    """Integer coefficients (ascending) of p * conj(p), or of p when p is rational."""
    if p.is_rational():
        return [a for a, _ in p.coeffs]
    el = p.elements()
    cj = [x.conj() for x in el]
    prod = [p.K.elt(0)] * (2 * p.degree + 1)
    for i, x in enumerate(el):
        for j, y in enumerate(cj):
            prod[i + j] = prod[i + j] + x * y
    out = []
    for z in prod:
        if z.b != 0 or not z.is_integral():
            raise ValueError(f"coefficient {z} of p * conj(p) is not rational")
        out.append(int(z.a))
    return out


def max_abs_coeff(coeffs) -> int:
    return max(abs(int(c)) for c in coeffs)


def max_abs_over_K(p: AlgebraicPoly) -> float:
    """Largest complex absolute value sqrt(N(a + b tau1)) among the coefficients."""
    return max(math.sqrt(x.norm()) for x in p.elements())


@dataclass(frozen=True)
class HeightReport:
    max_abs_coeff: int
    log_height: float
    reduction_factor: float | None = None
    classical_max: int | None = None


def height_report(eps_Q: list[int], classical_Q: list[int] | None = None) -> HeightReport:
    c = max_abs_coeff(eps_Q)
    lh = math.log(c) if c > 1 else 0.0
    if classical_Q is None:
        return HeightReport(c, lh)
    cc = max_abs_coeff(classical_Q)
    ratio = math.log(cc) / lh if lh else float("inf")
    return HeightReport(c, lh, ratio, cc)


def log_ratio(big, small) -> float:
    return math.log(big) / math.log(small)
