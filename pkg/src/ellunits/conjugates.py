"""Conjugates of elliptic units and of the classical Siegel generator.

Every grid cell is described by a picklable CellSpec so that cells can be
evaluated in worker processes (mpmath keeps its precision in global state).
"""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd

import mpmath

from .errors import RootNotInField, SearchExhausted
from .quadfield import Field, Ideal, QuadForm, make_ideal, principal_ideal
from .rayclass import GaloisElement, Modulus, galois_compose
from .reciprocity import ResidueMatrix, gee_uQ, glM_split, herglotz_omega, matmul
from .siegel import Phase, QTable, phi_with_table


@dataclass(frozen=True)
class StartArgs:
    u1: Fraction
    v1: Fraction

    def __iter__(self):
        yield from (self.u1, self.v1)


def row_times(uv, A) -> tuple[Fraction, Fraction]:
    u, v = uv
    a, b, c, d = A
    return (Fraction(u) * a + Fraction(v) * c, Fraction(u) * b + Fraction(v) * d)


def _start_candidates(f: Ideal):
    """x = (s tau1 + t)/f with x*f integral and prime to f, lexicographic in (s, t)."""
    K, N = f.K, f.m
    for s in range(N):
        for t in range(N):
            y = K.elt(t, s)
            if y.is_zero():
                continue
            Y = principal_ideal(y) * f
            try:
                xf = Y.divide_integer(N)
            except ValueError:
                continue
            if (xf + f).is_unit():
                yield StartArgs(Fraction(s, N), Fraction(t, N))


def initial_args(f: Ideal, index: int = 0) -> StartArgs:
    """Arguments (u1, v1) of phi for the class c0; index picks a later admissible choice."""
    Modulus(f)
    K, N = f.K, f.m
    if index == 0:
        if f == make_ideal(K, N):
            return StartArgs(Fraction(0), Fraction(1, N))
        fbar = f.conj()
        if f.k == 1 and gcd(N, 6) == 1 and (f + fbar).is_unit():
            # tau1 + t1 lies in conj(f)
            return StartArgs(Fraction(1, N), Fraction(fbar.tau_n, N))
    for i, st in enumerate(_start_candidates(f)):
        if i == index:
            return st
    raise SearchExhausted(f"no admissible start argument #{index} for {f}")


def conjugate_args(start: StartArgs, alpha) -> tuple[Fraction, Fraction]:
    """[u_c, v_c] = [u1, v1] * alpha with alpha an integral matrix."""
    entries = alpha.entries if hasattr(alpha, "entries") else alpha
    return row_times(start, entries)


@dataclass(frozen=True)
class Factor:
    """phi(u, v) at tau_Q raised to exp; gamma given means the full action of gamma."""

    u: Fraction
    v: Fraction
    Q: QuadForm
    exp: int = 1
    gamma: ResidueMatrix | None = None


@dataclass(frozen=True)
class CellSpec:
    factors: tuple
    phase: Phase = Phase()
    power: int = 1


def action_phase_and_args(u, v, gamma: ResidueMatrix):
    """Root of unity and arguments with phi_(u,v)^gamma = phase * phi_(args)."""
    A, d = glM_split(gamma)
    e = herglotz_omega(A) * d
    sign = ((d - 1) // 2) % 2
    ph = Phase(Fraction(e, 12) + Fraction(sign, 2))
    u2, v2 = row_times((u, v), A)
    return ph, (u2, v2 * d)


_TABLES: dict = {}


def _table(Q: QuadForm, prec: int) -> QTable:
    key = (Q, prec)
    if key not in _TABLES:
        if len(_TABLES) > 64:
            _TABLES.clear()
        _TABLES[key] = QTable(Q.tau(prec + 64), prec)
    return _TABLES[key]


def eval_cell(spec: CellSpec, prec: int):
    tabs = [_table(fa.Q, prec) for fa in spec.factors]
    wp = max(t.wp for t in tabs)
    with mpmath.workprec(wp):
        val = spec.phase.value()
        for fa, tab in zip(spec.factors, tabs):
            if fa.gamma is None:
                x = phi_with_table(fa.u, fa.v, tab)
            else:
                ph, (u2, v2) = action_phase_and_args(fa.u, fa.v, fa.gamma)
                x = ph.value() * phi_with_table(u2, v2, tab)
            val *= x ** fa.exp
        return val ** spec.power


def _eval_packed(args):
    spec, prec = args
    return eval_cell(spec, prec)


def evaluate_cells(specs, prec: int, threads: int = 1) -> list:
    if threads <= 1 or len(specs) < 2:
        return [eval_cell(s, prec) for s in specs]
    with ProcessPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(_eval_packed, [(s, prec) for s in specs],
                           chunksize=max(1, len(specs) // (4 * threads))))


@dataclass
class ConjugateGrid:
    values: list
    labels: list
    dets: list
    args: list
    prec: int
    W: int | None = None
    specs: list = field(default_factory=list, repr=False)

    def __len__(self):
        return len(self.values)


def full_action_value(u, v, gamma: ResidueMatrix, Q: QuadForm, prec: int):
    """phi_(u,v)^gamma evaluated at tau_Q, all root-of-unity factors included."""
    return eval_cell(CellSpec((Factor(Fraction(u), Fraction(v), Q, 1, gamma),)), prec)


def _labels(elements):
    return [(el.beta.entries, tuple(el.Q)) for el in elements]


def epsilon_grid(start: StartArgs, uc_vc, elements: list[GaloisElement], prec: int,
                 threads: int = 1, W: int | None = None) -> ConjugateGrid:
    """Conjugates of phi(u_c, v_c, tau1)/phi(u1, v1, tau1) for a class with e_c = 1."""
    specs, args = [], []
    for el in elements:
        g = matmul(el.beta.entries, el.u_Q.entries)
        num = row_times(uc_vc, g)
        den = row_times(start, g)
        args.append((num, den))
        specs.append(CellSpec((Factor(*num, el.Q), Factor(*den, el.Q, -1))))
    values = evaluate_cells(specs, prec, threads)
    return ConjugateGrid(values, _labels(elements), [el.d_det for el in elements],
                         args, prec, W, specs)


def general_epsilon_grid(start: StartArgs, alpha: ResidueMatrix, Qc: QuadForm,
                         elements: list[GaloisElement], e_c: int, prec: int,
                         threads: int = 1, W: int | None = None) -> ConjugateGrid:
    """Conjugates of (E(c)/E(1))^(e_c) through composed Galois actions.

    E(c) is phi_(u1,v1) acted on by (alpha, Qc); conjugating by (beta, Q)
    acts by the composite pair, whose root-of-unity factors are kept.
    """
    specs, args = [], []
    uq_cache = {}
    for el in elements:
        K = el.x.K
        g, Q3 = galois_compose(alpha, Qc, el.beta, el.Q, K)
        if Q3 not in uq_cache:
            uq_cache[Q3] = gee_uQ(Q3, alpha.level)
        num_gamma = g @ uq_cache[Q3]
        den_gamma = el.gamma
        args.append((num_gamma.entries, Q3, den_gamma.entries, el.Q))
        specs.append(CellSpec((Factor(start.u1, start.v1, Q3, 1, num_gamma),
                               Factor(start.u1, start.v1, el.Q, -1, den_gamma)),
                              power=e_c))
    values = evaluate_cells(specs, prec, threads)
    return ConjugateGrid(values, _labels(elements), [el.d_det for el in elements],
                         args, prec, W, specs)


def classical_exponent(N: int) -> int:
    return 12 * N // gcd(6, N)


def classical_conjugates(elements: list[GaloisElement], N: int, prec: int,
                         threads: int = 1) -> ConjugateGrid:
    """Conjugates of phi(0, 1/N, tau1)^(12N/gcd(6,N))."""
    e = classical_exponent(N)
    specs, args = [], []
    for el in elements:
        g = matmul(el.beta.entries, el.u_Q.entries)
        uv = row_times((0, Fraction(1, N)), g)
        args.append(uv)
        specs.append(CellSpec((Factor(*uv, el.Q, e),)))
    values = evaluate_cells(specs, prec, threads)
    return ConjugateGrid(values, _labels(elements), [el.d_det for el in elements],
                         args, prec, None, specs)


def rou_twist(grid: ConjugateGrid, n: int, k: int) -> ConjugateGrid:
    """Multiply each cell by zeta_n^(k * det(beta u_Q))."""
    if grid.W is None or grid.W % n:
        raise RootNotInField(f"zeta_{n} is not in K_f (W = {grid.W})")
    wp = grid.prec + 64
    with mpmath.workprec(wp):
        values = [v * Phase(Fraction(k * d, n)).value() for v, d in zip(grid.values, grid.dets)]
    return ConjugateGrid(values, grid.labels, grid.dets, grid.args, grid.prec, grid.W,
                         grid.specs)


def stark_E_value(K: Field, f: int, start: StartArgs, alpha=None, prec: int = 256):
    """E = phi([u1, v1] * alpha, tau1)^(12 f)."""
    uv = tuple(start) if alpha is None else conjugate_args(start, alpha)
    return eval_cell(CellSpec((Factor(*uv, K.principal_form, 12 * f),)), prec)
