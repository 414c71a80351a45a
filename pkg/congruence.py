"""Congruence lifts: quotient representatives, the N_D(l, t) series, ~D' and the rank-1 columns."""

import itertools
import logging
from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import NamedTuple

import numpy as np
from scipy import special
from sympy import primefactors

import config
import intmath
from admissible import (
    AdmissibleMatrix,
    FamilyMember,
    Origin,
    count_N,
    enumerate_admissible,
)
from errors import NotAdmissibleError, ParameterError

logger = logging.getLogger(__name__)


class SeriesValue(NamedTuple):
    value: float
    tail_bound: float
    exact: bool


@dataclass(frozen=True)
class QuotientReps:
    """Transversal of Z^k / (D/u) Lambda_D in column Hermite form."""

    source: AdmissibleMatrix
    lambda_basis: tuple  # r x r, columns generate Lambda_D
    generators: tuple  # (D/u) * lambda_basis
    hnf: tuple
    pivot_coords: tuple
    zero_rows: tuple  # B_0
    unit_rows: tuple  # B_u

    def pivot_heights(self):
        return tuple(self.hnf[p][j] for j, p in enumerate(self.pivot_coords))

    def canonical_rep(self, v):
        v = [int(x) for x in v]
        if len(v) != self.source.k:
            raise ParameterError(f"vector of length {len(v)} for a {self.source.k}-row matrix")
        for j, p in enumerate(self.pivot_coords):
            h = self.hnf[p][j]
            f = v[p] // h
            if f:
                v = [x - f * row[j] for x, row in zip(v, self.hnf)]
        return tuple(v)

    def contains(self, v):
        """True when v is its own canonical representative."""
        return self.canonical_rep(v) == tuple(int(x) for x in v)

    def in_subgroup(self, w):
        return not any(self.canonical_rep(w))

    def multiple_in_set(self, ell, e):
        """Whether e*ell is a canonical representative, read off the pivot coordinates."""
        return all(0 <= e * ell[p] < h for p, h in zip(self.pivot_coords, self.pivot_heights()))


@dataclass(eq=False)
class CongruenceTerm:
    matrix: AdmissibleMatrix  # ~D'
    u0: int
    t: int
    u: int
    ell: tuple
    taus: tuple
    coefficient: object  # Fraction when exact, float when an N_D series was truncated
    q: int
    tail: float = 0.0
    source: AdmissibleMatrix = None

    def to_dict(self):
        return {
            "matrix": self.matrix.to_dict(),
            "u0": self.u0,
            "t": self.t,
            "u": self.u,
            "ell": list(self.ell),
            "taus": [str(x) for x in self.taus],
            "coefficient": None if self.coefficient is None else str(self.coefficient),
            "q": self.q,
            "tail": self.tail,
        }


def quotient_reps(D):
    """Lambda_D from the Smith form of D, then the Hermite transversal of Z^k/(D/u)Lambda_D."""
    u, r = D.u, D.r
    _, s, v = intmath.smith_decomposition(D.entries)
    diag = [s[i][i] for i in range(r)]
    multipliers = [u // gcd(x, u) for x in diag]
    lam = [[v[a][i] * multipliers[i] for i in range(r)] for a in range(r)]

    products = intmath.mat_mul([list(row) for row in D.entries], lam)
    if any(x % u for row in products for x in row):
        raise ArithmeticError(f"Lambda_D basis for {D.entries} does not clear the denominator {u}")
    generators = [[x // u for x in row] for row in products]
    hnf, pivots = intmath.column_hnf(generators)

    zero_rows = tuple(i for i, row in enumerate(D.entries) if not any(row))
    unit_rows = []
    for i, row in enumerate(D.entries):
        nonzero = [j for j, x in enumerate(row) if x != 0]
        if len(nonzero) == 1 and row[nonzero[0]] == u:
            j = nonzero[0]
            if sum(1 for other in D.entries if other[j] != 0) == 1:
                unit_rows.append(i)

    return QuotientReps(
        source=D,
        lambda_basis=tuple(tuple(row) for row in lam),
        generators=tuple(tuple(row) for row in generators),
        hnf=tuple(tuple(row) for row in hnf),
        pivot_coords=tuple(pivots),
        zero_rows=zero_rows,
        unit_rows=tuple(unit_rows),
    )


def coprime_zeta(d, q, e_max=None):
    """
    Sum of e^-d over e >= 1 coprime to q.

    With e_max the sum is taken directly up to e_max; otherwise it is
    zeta(d) * prod_{p | q} (1 - p^-d).
    """
    if e_max is None:
        value = float(special.zeta(d))
        for p in primefactors(q):
            value *= 1.0 - float(p) ** (-d)
        return value
    e = np.arange(1, e_max + 1, dtype=np.int64)
    e = e[np.gcd(e, q) == 1]
    return float(np.sum(e.astype(float) ** (-d)))


def n_sub_d(D, reps, ell, t, q, d, e_max=config.DEFAULT_E_MAX):
    """
    Normalized density N_D(ell, t) of multipliers e (coprime to q) with e*ell in the representative set.

    Returns:
        SeriesValue(value, tail_bound, exact): value in [0, 1]; tail_bound bounds the
        omitted e > e_max part; exact is set when value is exactly 1.
    """
    if d < 3:
        raise ParameterError(f"N_D series needs d >= 3, got d={d}")
    if gcd(t, q) != 1:
        raise ParameterError(f"gcd(t={t}, q={q}) != 1")
    ell = tuple(int(x) for x in ell)
    if not any(ell):
        return SeriesValue(1.0, 0.0, True)
    if intmath.gcd_all(ell + (t,)) != 1:
        raise ParameterError(f"gcd({ell}, {t}) != 1")

    # e*ell stays a representative until its first pivot coordinate leaves [0, h)
    first_failure = None
    for p, h in zip(reps.pivot_coords, reps.pivot_heights()):
        x = ell[p]
        if x < 0:
            first_failure = 1
        elif x > 0:
            bound = -(-h // x)
            first_failure = bound if first_failure is None else min(first_failure, bound)
    if first_failure is None:
        return SeriesValue(1.0, 0.0, True)

    denominator = coprime_zeta(d, q)
    last = min(first_failure - 1, e_max)
    numerator = coprime_zeta(d, q, e_max=last) if last >= 1 else 0.0
    value = min(1.0, numerator / denominator)
    tail = 0.0 if first_failure <= e_max + 1 else e_max ** (1 - d) / (d - 1) / denominator
    return SeriesValue(value, tail, False)


def congruence_lift(D, ell, t, q, d, reps=None, e_max=config.DEFAULT_E_MAX):
    """Build ~D' with denominator u0 = lcm(u, t) from D, ell and t, with coefficient N'."""
    if q < 2:
        raise ParameterError("modulus q must be at least 2")
    if t < 1 or gcd(t, q) != 1:
        raise ParameterError(f"t={t} must be positive and coprime to q={q}")
    ell = tuple(int(x) for x in ell)
    if len(ell) != D.k:
        raise ParameterError(f"ell has length {len(ell)}, expected {D.k}")
    reps = reps or quotient_reps(D)
    is_zero = not any(ell)
    if is_zero and t != 1:
        raise ParameterError("ell = 0 is only paired with t = 1")
    if not reps.contains(ell):
        raise ParameterError(f"ell={ell} is not a canonical representative for {D.entries}")
    if not is_zero and intmath.gcd_all(ell + (t,)) != 1:
        raise ParameterError(f"gcd({ell}, {t}) != 1")

    u, r = D.u, D.r
    u0 = u * t // gcd(u, t)
    taus = tuple(Fraction(x * q + t, t) for x in ell)
    scale = Fraction(u0, u)
    intermediate = [[Fraction(u0)] + [Fraction(0)] * r]
    for i, row in enumerate(D.entries):
        intermediate.append([u0 * taus[i]] + [scale * x for x in row])

    rows = []
    for row in intermediate:
        first = row[0] - sum(taus[p] * row[j + 1] for j, p in enumerate(D.pivot_rows))
        full = [first] + row[1:]
        if any(x.denominator != 1 for x in full):
            raise ParameterError(f"lift of {D.entries} with ell={ell}, t={t} is not integral")
        rows.append([int(x) for x in full])
    try:
        matrix = AdmissibleMatrix(rows, u0)
    except NotAdmissibleError as exc:
        raise ParameterError(f"lift of {D.entries} with ell={ell}, t={t} is not admissible: {exc}") from exc

    base = Fraction(count_N(D) ** d, u ** (d * r))
    if is_zero:
        coefficient, tail = base, 0.0
    else:
        density = n_sub_d(D, reps, ell, t, q, d, e_max=e_max)
        if density.exact:
            coefficient, tail = base / t**d, 0.0
        else:
            coefficient = density.value * float(base) / t**d
            tail = density.tail_bound * float(base) / t**d
    return CongruenceTerm(
        matrix=matrix,
        u0=u0,
        t=t,
        u=u,
        ell=ell,
        taus=taus,
        coefficient=coefficient,
        q=q,
        tail=tail,
        source=D,
    )


def enumerate_congruence_rank1(k, q, t_max, ell_bound, d=None):
    """Rank-1 columns (t, l_1 q + t, ..., l_{k-1} q + t) inside the (t, l) window."""
    if q < 2:
        raise ParameterError("modulus q must be at least 2")
    terms = []
    for t in range(1, t_max + 1):
        if gcd(t, q) != 1:
            continue
        for ell in itertools.product(range(-ell_bound, ell_bound + 1), repeat=k - 1):
            if intmath.gcd_all(ell + (t,)) != 1:
                continue
            column = (t,) + tuple(x * q + t for x in ell)
            terms.append(
                CongruenceTerm(
                    matrix=AdmissibleMatrix.from_columns([column], u=t),
                    u0=t,
                    t=t,
                    u=1,
                    ell=ell,
                    taus=tuple(Fraction(x * q + t, t) for x in ell),
                    coefficient=Fraction(1, t**d) if d is not None else None,
                    q=q,
                )
            )
    return terms


def lift_preimage(M, q):
    """
    Recover (D, ell) with t = 1 whose congruence lift is the unit-pattern matrix M.

    M has u = 1, first row (1, 0, ..., 0) and one nonzero (+-1) entry per row.
    For a single column D is None and ell gives the rank-1 parameters.
    """
    if M.u != 1 or M.entries[0] != tuple([1] + [0] * (M.r - 1)):
        raise ParameterError(f"{M.entries} is not a unit pattern with first row e_1")
    if M.r == 1:
        ell = []
        for (c,) in M.entries[1:]:
            if (c - 1) % q:
                raise ParameterError(f"entry {c} is not 1 mod q={q}")
            ell.append((c - 1) // q)
        return None, tuple(ell)

    D = AdmissibleMatrix([row[1:] for row in M.entries[1:]], 1)
    ell = []
    for i, row in enumerate(D.entries):
        if i in D.pivot_rows:
            ell.append(0)
            continue
        c = M.entries[i + 1][0]
        numerator = c + sum(row) - 1
        if numerator % q:
            raise ParameterError(f"row {i + 1} of {M.entries} has no integral ell for q={q}")
        ell.append(numerator // q)
    return D, tuple(ell)


def congruence_family(k, q, d, u_max=1, t_max=1, ell_bound=0, entry_bound=1, e_max=config.DEFAULT_E_MAX):
    """
    Summands of the congruence k-th moment formula inside a window.

    Yields the product term, the rank-1 columns (m = 1) and the lifts ~D' for
    m = 2..k-1 built from D, t and every canonical ell in the box |l_i| <= ell_bound.
    """
    if k < 1:
        raise ParameterError("moment order k must be positive")
    yield FamilyMember(AdmissibleMatrix.identity(k), Fraction(1), Origin.PRODUCT)
    if k == 1:
        return
    for term in enumerate_congruence_rank1(k, q, t_max, ell_bound, d=d):
        yield FamilyMember(
            term.matrix,
            term.coefficient,
            Origin.CONGRUENCE,
            detail={"t": term.t, "ell": term.ell, "u": 1, "entry_max": 0, "rank1": True},
        )
    box = list(itertools.product(range(-ell_bound, ell_bound + 1), repeat=k - 1))
    for m in range(2, k):
        r = m - 1
        for u in range(1, min(u_max, entry_bound) + 1):
            for D in enumerate_admissible(k - 1, r, u, entry_bound):
                reps = quotient_reps(D)
                for t in range(1, t_max + 1):
                    if gcd(t, q) != 1:
                        continue
                    for ell in box:
                        is_zero = not any(ell)
                        if is_zero and t != 1:
                            continue
                        if not reps.contains(ell):
                            continue
                        if not is_zero and intmath.gcd_all(ell + (t,)) != 1:
                            continue
                        try:
                            term = congruence_lift(D, ell, t, q, d, reps=reps, e_max=e_max)
                        except ParameterError as exc:
                            logger.debug("skipping lift: %s", exc)
                            continue
                        yield FamilyMember(
                            term.matrix,
                            term.coefficient,
                            Origin.CONGRUENCE,
                            tail=term.tail,
                            detail={
                                "t": t,
                                "ell": ell,
                                "u": u,
                                "entry_max": D.max_abs_entry(),
                                "rank1": False,
                            },
                        )
