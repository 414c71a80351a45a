"""Centered-moment families: every D'' of E[prod (N_i - V_i)] with its aggregated signed coefficient."""

import itertools
import logging
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction

import config
from admissible import AdmissibleMatrix, FamilyMember, Origin, affine_family
from congruence import congruence_family
from errors import ParameterError
from partitions import MainContext, enumerate_main_family

logger = logging.getLogger(__name__)


class CenteredFamily(str, Enum):
    AFFINE = "AffineS"
    CONGRUENCE = "CongruenceT"


@dataclass(eq=False)
class CenteredTerm:
    matrix: AdmissibleMatrix  # D''
    sign_exponent: int
    coefficient: object
    family: CenteredFamily
    case_tag: str
    multiplicity: int = 1  # (A, ~D') pairs folded into this matrix
    tail: float = 0.0
    detail: dict = field(default_factory=dict)

    @property
    def n(self):
        return self.matrix.r

    def to_dict(self):
        return {
            "matrix": self.matrix.to_dict(),
            "sign_exponent": self.sign_exponent,
            "coefficient": str(self.coefficient),
            "family": self.family.value,
            "case": self.case_tag,
            "multiplicity": self.multiplicity,
        }


def isolated_rows(D):
    """Rows u*e_j whose column j has no other nonzero entry."""
    found = []
    for i, row in enumerate(D.entries):
        nonzero = [j for j, x in enumerate(row) if x != 0]
        if len(nonzero) == 1 and row[nonzero[0]] == D.u:
            j = nonzero[0]
            if sum(1 for other in D.entries if other[j] != 0) == 1:
                found.append(i)
    return found


def _is_lifted_shape(rows, u):
    """First row (u, 0, ..., 0) and first column u*1 minus the sum of the others."""
    if rows[0][0] != u or any(rows[0][1:]):
        return False
    return all(row[0] == u - sum(row[1:]) for row in rows)


def case_of(D):
    """
    Structural case tag and sign exponent a of a centered matrix.

    (a): no isolated row. (b): removing the isolated rows and their columns leaves
    nothing or a matrix of lifted shape; the last isolated row belongs to the lift.
    (c): anything else, with every isolated row coming from the centering.
    """
    isolated = isolated_rows(D)
    if not isolated:
        return "a", 0
    cols = {next(j for j, x in enumerate(D.entries[i]) if x != 0) for i in isolated}
    core = [
        [x for j, x in enumerate(row) if j not in cols]
        for i, row in enumerate(D.entries)
        if i not in isolated
    ]
    if not core or not core[0] or _is_lifted_shape(core, D.u):
        return "b", len(isolated) - 1
    return "c", len(isolated)


def _embed(member_matrix, rows_kept, centered_rows, k, u):
    """D'' with rows_kept carrying member_matrix and each centered row its own u*e column."""
    m = member_matrix.r
    a = len(centered_rows)
    rows = [[0] * (m + a) for _ in range(k)]
    for src, dst in enumerate(rows_kept):
        rows[dst][:m] = list(member_matrix.entries[src])
    for j, i in enumerate(centered_rows):
        rows[i][m + j] = u
    # order columns by first nonzero row so pivots increase
    columns = list(zip(*rows))
    columns.sort(key=lambda col: next(i for i, x in enumerate(col) if x != 0))
    return AdmissibleMatrix(tuple(zip(*columns)), u)


def aggregate_centered(k, family, d=None, q=None, u_max=1, entry_bound=1, t_max=1, ell_bound=0,
                       e_max=config.DEFAULT_E_MAX, main_only=False):
    """
    Expand E[prod_i (N_i - V_i)] = sum_A (-1)^|A| prod_{i in A} V_i E[prod_{i not in A} N_i]
    over the moment families of the remaining rows, and fold equal D'' together.

    With main_only the remaining rows only run over unit-pattern matrices, which
    is exactly the set of members producing Main-class D''.

    Returns:
        list of CenteredTerm with nonzero aggregated coefficient and 1 <= n <= k-1.
    """
    family = CenteredFamily(family)
    if k < 2:
        raise ParameterError("centered families need k >= 2")
    if family is CenteredFamily.CONGRUENCE and (q is None or q < 2):
        raise ParameterError("the congruence centered family needs q >= 2")
    if d is None and not main_only and (family is CenteredFamily.CONGRUENCE or u_max > 1):
        raise ParameterError("coefficients depend on d outside the affine u = 1 window")
    # unit-denominator affine coefficients are 1 for every d
    d_eff = d if d is not None else 3

    def members(rows):
        if main_only:
            if family is CenteredFamily.AFFINE:
                context = MainContext.AFFINE
            else:
                context = MainContext.Q2 if q == 2 else MainContext.Q3PLUS
            return [FamilyMember(M, Fraction(1), Origin.CENTERED) for M in enumerate_main_family(rows, context)]
        if family is CenteredFamily.AFFINE:
            return affine_family(rows, d_eff, u_max=u_max, entry_bound=entry_bound)
        return congruence_family(
            rows, q, d_eff, u_max=u_max, t_max=t_max, ell_bound=ell_bound,
            entry_bound=entry_bound, e_max=e_max,
        )

    folded = {}
    cache = {}
    for a in range(0, k):
        rest = k - a
        if rest not in cache:
            cache[rest] = list(members(rest))
        for centered_rows in itertools.combinations(range(k), a):
            kept = [i for i in range(k) if i not in centered_rows]
            for member in cache[rest]:
                u = member.matrix.u
                D2 = _embed(member.matrix, kept, centered_rows, k, u)
                if D2.r >= k:
                    continue
                sign = -1 if a % 2 else 1
                key = (D2.entries, u)
                entry = folded.setdefault(key, {"matrix": D2, "coefficient": Fraction(0), "tail": 0.0,
                                                "multiplicity": 0, "shell": None})
                entry["coefficient"] += sign * member.coefficient
                entry["tail"] += member.tail
                entry["multiplicity"] += 1
                if "u" in member.detail:
                    shell = (member.detail["u"], member.detail.get("entry_max", 0))
                    entry["shell"] = shell if entry["shell"] is None else max(entry["shell"], shell)

    terms = []
    for entry in folded.values():
        coefficient = entry["coefficient"]
        if isinstance(coefficient, Fraction):
            if coefficient == 0:
                continue
        elif abs(coefficient) < config.COEFFICIENT_FLOOR:
            continue
        tag, a = case_of(entry["matrix"])
        detail = {}
        if entry["shell"] is not None:
            detail = {"u": entry["shell"][0], "entry_max": entry["shell"][1]}
        terms.append(CenteredTerm(
            matrix=entry["matrix"],
            sign_exponent=a,
            coefficient=coefficient,
            family=family,
            case_tag=tag,
            multiplicity=entry["multiplicity"],
            tail=entry["tail"],
            detail=detail,
        ))
    terms.sort(key=lambda term: (term.matrix.u, term.n, term.matrix.entries))
    logger.debug("aggregate_centered(k=%d, %s): %d surviving matrices", k, family.value, len(terms))
    return terms


def enumerate_centered(k, n, u, entry_bound=1, family=CenteredFamily.AFFINE, q=None, d=None,
                       t_max=1, ell_bound=0, e_max=config.DEFAULT_E_MAX, main_only=False):
    """Centered terms with n columns and denominator u (u0 for the congruence family)."""
    if not 1 <= n <= k - 1:
        raise ParameterError(f"n={n} outside 1..{k - 1}")
    family = CenteredFamily(family)
    terms = aggregate_centered(
        k, family, d=d, q=q, u_max=u, entry_bound=max(entry_bound, u),
        t_max=t_max if family is CenteredFamily.CONGRUENCE else 1,
        ell_bound=ell_bound, e_max=e_max, main_only=main_only,
    )
    return [term for term in terms if term.n == n and term.matrix.u == u]
