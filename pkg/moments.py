"""Moment formula evaluation: exact main terms, Poisson joint moments, limits and truncated full formulas.

Every truncated evaluator returns a TermSeries that unpacks as (value, residual).
"""

import logging
import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from math import gcd
from typing import NamedTuple

import numpy as np
from scipy import special
from sympy import factorial2
from sympy.utilities.iterables import multiset_partitions

import config
from admissible import Context, MatrixClass, Origin, affine_family, classify, matrix_class
from centered import CenteredFamily, aggregate_centered
from congruence import congruence_family
from errors import ParameterError
from partitions import MainContext, enumerate_main_family
from regions import RegionFamily, RegionKind, ball_volume, radius_for_volume  # noqa: F401

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Truncation:
    """Finite window on the infinite families plus Monte Carlo settings."""

    u_max: int = config.DEFAULT_U_MAX
    t_max: int = config.DEFAULT_T_MAX
    entry_bound: int = config.DEFAULT_ENTRY_BOUND
    e_max: int = config.DEFAULT_E_MAX
    ell_bound: int = config.DEFAULT_ELL_BOUND
    main_only: bool = False
    mc_samples: int = config.MC_SAMPLES
    seed: int = config.MC_SEED

    def __post_init__(self):
        for name in ("u_max", "t_max", "entry_bound", "e_max", "mc_samples"):
            if getattr(self, name) < 1:
                raise ParameterError(f"truncation {name} must be positive")
        if self.ell_bound < 0:
            raise ParameterError("truncation ell_bound must be nonnegative")

    def to_dict(self):
        return asdict(self)


class IntegralEstimate(NamedTuple):
    value: object  # Fraction on exact paths
    stderr: float
    exact: bool


@dataclass(eq=False)
class MomentTerm:
    matrix: object
    coefficient: object
    rank: int
    origin: Origin
    klass: MatrixClass = MatrixClass.MAIN
    integral: object = None
    stderr: float = 0.0
    contribution: object = 0
    tail: float = 0.0
    included: bool = True
    shell: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "matrix": self.matrix.to_dict(),
            "coefficient": str(self.coefficient),
            "rank": self.rank,
            "origin": self.origin.value,
            "class": self.klass.value,
            "integral": str(self.integral),
            "contribution": float(self.contribution),
            "stderr": self.stderr,
            "included": self.included,
        }


@dataclass(eq=False)
class TermSeries:
    terms: list
    truncation: Truncation
    value: float
    residual: float
    stderr: float = 0.0
    residual_kind: str = "bound"
    exact_value: object = None  # Fraction when every included term is exact
    series: dict = field(default_factory=dict)

    def __iter__(self):
        yield self.value
        yield self.residual

    def to_dict(self):
        return {
            "value": self.value,
            "residual": self.residual,
            "residual_kind": self.residual_kind,
            "stderr": self.stderr,
            "exact_value": None if self.exact_value is None else str(self.exact_value),
            "terms": [term.to_dict() for term in self.terms],
            "series": self.series,
            "truncation": self.truncation.to_dict(),
        }


def _fractions(values):
    return [v if isinstance(v, Fraction) else Fraction(str(v)) for v in values]


def _check_nondecreasing(V):
    if any(b < a for a, b in zip(V, V[1:])):
        raise ParameterError(f"volumes {V} must be nondecreasing")


# Main terms and limits

def poisson_joint_moment(lam, V):
    """E[prod N(V_i)] for a Poisson process of intensity lam on nested sets of volumes V_1 <= ... <= V_k."""
    lam = _fractions([lam])[0]
    V = _fractions(V)
    if not V:
        raise ParameterError("need at least one volume")
    if lam <= 0:
        raise ParameterError("intensity must be positive")
    _check_nondecreasing(V)
    total = Fraction(0)
    for partition in multiset_partitions(list(range(len(V)))):
        term = lam ** len(partition)
        for block in partition:
            term *= V[min(block)]
        total += term
    return total


def _support_min_product(M, V):
    product = Fraction(1)
    for j in range(M.r):
        product *= min(V[i] for i, row in enumerate(M.entries) if row[j] != 0)
    return product


def affine_main_term(k, V):
    """Sum over the Main family of prod over columns of the smallest volume in the column support."""
    V = _fractions(V)
    if len(V) != k:
        raise ParameterError(f"expected {k} volumes, got {len(V)}")
    _check_nondecreasing(V)
    return sum((_support_min_product(M, V) for M in enumerate_main_family(k, MainContext.AFFINE)), Fraction(0))


def congruence_main_term(k, V, q, symmetric=True):
    """
    Congruence main term; for q = 2 it is reported for N/2, i.e. scaled by 2^-k.

    V may be a RegionFamily, in which case its symmetric flag is used.
    """
    if isinstance(V, RegionFamily):
        symmetric = V.symmetric
        V = V.volumes
    V = _fractions(V)
    if len(V) != k:
        raise ParameterError(f"expected {k} volumes, got {len(V)}")
    if q < 2:
        raise ParameterError("modulus q must be at least 2")
    if q == 2 and not symmetric:
        raise ParameterError("q = 2 requires origin-symmetric regions")
    _check_nondecreasing(V)
    context = MainContext.Q2 if q == 2 else MainContext.Q3PLUS
    total = sum((_support_min_product(M, V) for M in enumerate_main_family(k, context)), Fraction(0))
    return total / 2**k if q == 2 else total


def centered_moment_limit(c, kvec):
    """prod c_i^(k_i/2) (k_i - 1)!! when every k_i is even, else 0."""
    c = _fractions(c)
    if len(c) != len(kvec):
        raise ParameterError("c and kvec must have the same length")
    if any(k < 0 for k in kvec):
        raise ParameterError("moment orders must be nonnegative")
    if any(k % 2 for k in kvec):
        return Fraction(0)
    value = Fraction(1)
    for ci, ki in zip(c, kvec):
        if ki:
            value *= ci ** (ki // 2) * int(factorial2(ki - 1))
    return value


# Term integrals

def _factorized_integral(D, regions):
    """Exact integral when every row of D has at most one nonzero entry."""
    d, u = regions.d, D.u
    for i, row in enumerate(D.entries):
        if not any(row) and not regions.contains_origin(i):
            return Fraction(0)
    value = Fraction(1)
    for j in range(D.r):
        outer, inner = None, Fraction(0)
        for i, row in enumerate(D.entries):
            if row[j] == 0:
                continue
            # rho_i(c y) with c = D_ij / u confines |y| to the region scaled by u/|D_ij|
            scale = Fraction(u, abs(row[j])) ** d
            o = regions.outer_volume(i) * scale
            outer = o if outer is None else min(outer, o)
            inner = max(inner, regions.inner_volumes[i] * scale)
        value *= max(Fraction(0), outer - inner)
    return value


def _monte_carlo_integral(D, regions, n, rng):
    """Sample y_j in the pivot region of column j, weight by pivot volumes, test the other rows."""
    u = D.u
    samples = [regions.sample(p, rng, n) for p in D.pivot_rows]
    weight = 1.0
    for p in D.pivot_rows:
        weight *= float(regions.volumes[p])
    inside = np.ones(n, dtype=bool)
    pivots = set(D.pivot_rows)
    for i, row in enumerate(D.entries):
        if i in pivots:
            continue
        x = np.zeros((n, regions.d))
        for j, c in enumerate(row):
            if c:
                x += (c / u) * samples[j]
        inside &= regions.contains(i, np.linalg.norm(x, axis=1))
    p = float(inside.mean())
    return IntegralEstimate(weight * p, weight * math.sqrt(p * (1.0 - p) / n), False)


def term_integral(D, regions, mc_budget=None, rng=None, method="auto"):
    """
    I(D, u) = integral of prod_i rho_i((D y / u)_i) over y in (R^d)^r.

    method is "auto", "exact" or "monte_carlo"; auto takes the exact path whenever
    every row of D has at most one nonzero entry.

    Returns:
        IntegralEstimate(value, stderr, exact); exact paths give a Fraction.
    """
    if regions.k != D.k:
        raise ParameterError(f"{regions.k} regions for a matrix with {D.k} rows")
    if method not in ("auto", "exact", "monte_carlo"):
        raise ParameterError(f"unknown integration method {method!r}")
    factorized = all(sum(1 for x in row if x != 0) <= 1 for row in D.entries)
    if method != "monte_carlo" and factorized:
        return IntegralEstimate(_factorized_integral(D, regions), 0.0, True)
    if method == "exact":
        raise ParameterError(f"no exact integral for {D.entries}")
    if mc_budget is None:
        raise ParameterError(f"no exact integral for {D.entries}; mc_budget is required")
    if rng is None:
        rng = np.random.default_rng(config.MC_SEED)
    logger.debug("Monte Carlo integral for %s with %d samples", D.entries, mc_budget)
    return _monte_carlo_integral(D, regions, int(mc_budget), rng)


# Truncated formulas

def _evaluate_member(member, klass, regions, truncation, rng):
    estimate = term_integral(member.matrix, regions, mc_budget=truncation.mc_samples, rng=rng)
    coefficient = member.coefficient
    if isinstance(coefficient, Fraction) and estimate.exact:
        contribution = coefficient * estimate.value
    else:
        contribution = float(coefficient) * float(estimate.value)
    shell = {}
    if "u" in member.detail:
        shell = {key: member.detail[key] for key in ("u", "entry_max", "t", "ell", "rank1") if key in member.detail}
    return MomentTerm(
        matrix=member.matrix,
        coefficient=coefficient,
        rank=member.matrix.r,
        origin=getattr(member, "origin", Origin.CENTERED),
        klass=klass,
        integral=estimate.value,
        stderr=abs(float(coefficient)) * estimate.stderr,
        contribution=contribution,
        tail=member.tail * float(estimate.value),
        included=not truncation.main_only or klass is MatrixClass.MAIN,
        shell=shell,
    )


def _power_tail(reference, anchor, start, exponent):
    """reference * sum_{j >= start} (j / anchor)^-exponent, via the Hurwitz zeta function."""
    if reference == 0:
        return 0.0
    if exponent <= 1:
        return math.inf
    return reference * anchor**exponent * float(special.zeta(exponent, start))


def _window_tails(terms, truncation, exponent):
    """
    Extrapolated size of the summands outside the window.

    Shell magnitudes at the window boundary are continued with the power decay
    j^-exponent; these are estimates, not bounds.
    """
    shelled = [t for t in terms if t.shell]
    if not shelled:
        return {}
    tails = {}
    first_u = math.fsum(abs(float(t.contribution)) for t in shelled if t.shell.get("u") == 1)
    tails["u"] = _power_tail(first_u, 1, truncation.u_max + 1, exponent)
    lifted = [t for t in shelled if not t.shell.get("rank1")]
    boundary = math.fsum(
        abs(float(t.contribution)) for t in lifted if t.shell.get("entry_max") == truncation.entry_bound
    )
    tails["entry"] = _power_tail(boundary, truncation.entry_bound, truncation.entry_bound + 1, exponent)
    if any("t" in t.shell for t in shelled):
        first_t = math.fsum(abs(float(t.contribution)) for t in shelled if t.shell.get("t") == 1)
        tails["t"] = _power_tail(first_t, 1, truncation.t_max + 1, exponent + 1)
        edge = math.fsum(
            abs(float(t.contribution))
            for t in shelled
            if t.shell.get("ell") and max(abs(x) for x in t.shell["ell"]) == truncation.ell_bound
        )
        tails["ell"] = _power_tail(edge, truncation.ell_bound + 1, truncation.ell_bound + 2, exponent + 1)
    return tails


def _assemble(terms, truncation, tails=None, analytic_tail=0.0, extra_exact=None, series=None):
    tails = tails or {}
    exact = Fraction(0) if extra_exact is None else extra_exact
    floats = []
    all_exact = True
    for term in terms:
        if not term.included:
            continue
        if isinstance(term.contribution, Fraction):
            exact += term.contribution
        else:
            floats.append(float(term.contribution))
            all_exact = False
    if series:
        floats.append(series.get("included_sum", 0.0))
        all_exact = False
    value = float(exact) + math.fsum(floats)
    excluded = math.fsum(abs(float(t.contribution)) for t in terms if not t.included)
    coefficient_tails = math.fsum(t.tail for t in terms if t.included)
    residual = excluded + coefficient_tails + analytic_tail + math.fsum(tails.values())
    stderr = math.sqrt(math.fsum(t.stderr**2 for t in terms if t.included))
    if math.isinf(residual):
        kind = "unbounded"
        logger.warning("truncation residual is unbounded (window tails diverge for this d and k)")
    elif any(v > 0 for v in tails.values()):
        kind = "estimate"
    else:
        kind = "bound"
    return TermSeries(
        terms=terms,
        truncation=truncation,
        value=value,
        residual=residual,
        stderr=stderr,
        residual_kind=kind,
        exact_value=exact if all_exact else None,
        series=dict(series or {}, window_tails=tails),
    )


def _check_regions(k, regions):
    if regions.k != k:
        raise ParameterError(f"moment order {k} needs {k} regions, got {regions.k}")


def affine_moment(k, d, regions, truncation=None):
    """
    E[prod_i N_i] on the space of affine unimodular lattices.

    Product term, diagonal term and the lifted ~D' for m = 2..k-1 inside the window.
    k = 1 is the single value V.
    """
    truncation = truncation or Truncation()
    if not 1 <= k <= d:
        raise ParameterError(f"affine moment formula needs 1 <= k <= d, got k={k}, d={d}")
    _check_regions(k, regions)
    if regions.d != d:
        raise ParameterError(f"regions live in dimension {regions.d}, not {d}")
    rng = np.random.default_rng(truncation.seed)
    terms = []
    for member in affine_family(k, d, truncation.u_max, truncation.entry_bound):
        klass = classify(member.matrix, Context.AFFINE)
        terms.append(_evaluate_member(member, klass, regions, truncation, rng))
    tails = _window_tails(terms, truncation, d - k) if k >= 3 else {}
    series = _assemble(terms, truncation, tails)
    logger.info("affine_moment(k=%d, d=%d): %d terms, value %.6g, residual %.3g", k, d, len(terms),
                series.value, series.residual)
    return series


def _rank1_series_k2(d, q, regions, truncation):
    """
    Rank-1 part of the k = 2 congruence formula for two centred balls.

    sum_{t <= T, (t,q)=1} t^-d sum_{|l| <= L, gcd(l,t)=1} min(V_1, V_2 |t/(lq+t)|^d)
    with rigorous bounds on the omitted t > T and |l| > L parts.
    """
    v1 = float(regions.volumes[0])
    v2 = float(regions.volumes[1])
    T, L = truncation.t_max, truncation.ell_bound
    ell = np.arange(-L, L + 1, dtype=np.int64)
    main_sum, other_sum, ell_tail = 0.0, 0.0, 0.0
    count = 0
    for t in range(1, T + 1):
        if gcd(t, q) != 1:
            continue
        keep = np.gcd(ell, t) == 1
        scale = np.abs((ell * q + t) / t)
        values = np.minimum(v1, v2 / scale**d) * float(t) ** (-d)
        is_main = np.zeros_like(keep)
        if t == 1:
            is_main = (ell == 0) | ((ell == -1) & (q == 2))
        main_sum += float(values[keep & is_main].sum())
        other_sum += float(values[keep & ~is_main].sum())
        count += int(keep.sum())
        if L * q > t:
            ell_tail += 2.0 * v2 * (L * q - t) ** (1 - d) / (q * (d - 1))
        else:
            ell_tail = math.inf
    vmax = max(v1, v2)
    t_tail = vmax * (3.0 * float(special.zeta(d, T + 1))
                     + 2.0 * d / (q * (d - 1)) * float(special.zeta(d - 1, T + 1)))
    return {
        "t_max": T,
        "ell_bound": L,
        "columns": count,
        "main_sum": main_sum,
        "other_sum": other_sum,
        "t_tail": t_tail,
        "ell_tail": ell_tail,
    }


def congruence_moment(k, d, q, regions, truncation=None):
    """
    E[prod_i N_i] on the space of congruence lattices (Z^d + p/q) g.

    Product term plus the rank-1 columns and congruence lifts inside the window;
    k = 2 with balls uses the rank-1 series with rigorous tail bounds.
    """
    truncation = truncation or Truncation()
    if d < 3:
        raise ParameterError(f"congruence moment formula needs d >= 3, got {d}")
    if not 1 <= k <= d - 1:
        raise ParameterError(f"congruence moment formula needs 1 <= k <= d-1, got k={k}, d={d}")
    if q < 2:
        raise ParameterError("modulus q must be at least 2")
    if q == 2 and not regions.symmetric:
        raise ParameterError("q = 2 requires origin-symmetric regions")
    _check_regions(k, regions)

    rng = np.random.default_rng(truncation.seed)
    if k == 2 and regions.kind is not RegionKind.ANNULUS:
        product = next(congruence_family(2, q, d, u_max=1, t_max=1, ell_bound=0))
        terms = [_evaluate_member(product, MatrixClass.MAIN, regions, truncation, rng)]
        summary = _rank1_series_k2(d, q, regions, truncation)
        included = summary["main_sum"] if truncation.main_only else summary["main_sum"] + summary["other_sum"]
        excluded = summary["other_sum"] if truncation.main_only else 0.0
        summary["included_sum"] = included
        return _assemble(terms, truncation, analytic_tail=summary["t_tail"] + summary["ell_tail"] + excluded,
                         series=summary)

    terms = []
    for member in congruence_family(
        k, q, d,
        u_max=truncation.u_max,
        t_max=truncation.t_max,
        ell_bound=truncation.ell_bound,
        entry_bound=truncation.entry_bound,
        e_max=truncation.e_max,
    ):
        klass = classify(member.matrix, Context.CONGRUENCE)
        terms.append(_evaluate_member(member, klass, regions, truncation, rng))
    tails = _window_tails(terms, truncation, d - k) if k >= 2 else {}
    series = _assemble(terms, truncation, tails)
    logger.info("congruence_moment(k=%d, d=%d, q=%d): %d terms, value %.6g, residual %.3g", k, d, q,
                len(terms), series.value, series.residual)
    return series


def centered_moment_finite(k, d, regions, truncation=None, family=CenteredFamily.AFFINE, q=None):
    """
    E[prod_i (N_i - V_i)] from the aggregated centered families.

    regions carries one region per factor: a common ball for the single-set
    statistic, or repeated shells for joint moments over disjoint sets.
    """
    truncation = truncation or Truncation()
    family = CenteredFamily(family)
    _check_regions(k, regions)
    if family is CenteredFamily.AFFINE:
        if not 1 <= k <= d:
            raise ParameterError(f"affine centered moments need 1 <= k <= d, got k={k}, d={d}")
    else:
        if d < 3 or not 1 <= k <= d - 1:
            raise ParameterError(f"congruence centered moments need d >= 3 and 1 <= k <= d-1, got k={k}, d={d}")
        if q is None or q < 2:
            raise ParameterError("the congruence centered family needs q >= 2")
        if q == 2 and not regions.symmetric:
            raise ParameterError("q = 2 requires origin-symmetric regions")

    if k == 1:
        return TermSeries([], truncation, 0.0, 0.0, exact_value=Fraction(0))

    # large k: only the unit-pattern members are expanded
    main_fast = truncation.main_only and k > config.CENTERED_FULL_K
    rng = np.random.default_rng(truncation.seed)
    aggregated = aggregate_centered(
        k, family, d=d, q=q,
        u_max=truncation.u_max,
        entry_bound=truncation.entry_bound,
        t_max=truncation.t_max,
        ell_bound=truncation.ell_bound,
        e_max=truncation.e_max,
        main_only=main_fast,
    )
    terms = []
    for term in aggregated:
        terms.append(_evaluate_member(term, matrix_class(term.matrix), regions, truncation, rng))
    tails = _window_tails(terms, truncation, d - k) if k >= 3 else {}
    series = _assemble(terms, truncation, tails)
    if main_fast:
        series.series["excluded_classes"] = "not enumerated"
        if series.residual_kind == "bound":
            series.residual_kind = "estimate"
    logger.info("centered_moment_finite(k=%d, d=%d, %s): %d terms, value %.6g, residual %.3g", k, d,
                family.value, len(terms), series.value, series.residual)
    return series
