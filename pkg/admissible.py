"""Admissible matrices D with denominator u, their counts N(D,u), and the affine lift."""

import itertools
import json
import logging
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from math import gcd

import numpy as np

import config
import intmath
from errors import NotAdmissibleError, ParameterError

logger = logging.getLogger(__name__)


class Context(str, Enum):
    AFFINE = "affine"
    CONGRUENCE = "congruence"


class MatrixClass(str, Enum):
    MAIN = "Main"
    R1 = "R1"
    R2 = "R2"


class Origin(str, Enum):
    PRODUCT = "ProductTerm"
    DIAGONAL = "DiagonalTerm"
    AFFINE_LIFT = "AffineLiftTerm"
    CONGRUENCE = "CongruenceTerm"
    CENTERED = "CenteredTerm"


@dataclass(frozen=True)
class AdmissibleMatrix:
    """Integer k x r matrix with denominator u, gcd 1, a u*Id pivot minor and zeros above pivots."""

    entries: tuple
    u: int = 1
    pivot_rows: tuple = field(init=False)

    def __post_init__(self):
        rows = tuple(tuple(int(x) for x in row) for row in self.entries)
        object.__setattr__(self, "entries", rows)
        object.__setattr__(self, "u", int(self.u))
        if not rows or not rows[0]:
            raise NotAdmissibleError("admissible matrix needs at least one row and one column")
        r = len(rows[0])
        if any(len(row) != r for row in rows):
            raise NotAdmissibleError("ragged matrix rows")
        if self.u < 1:
            raise NotAdmissibleError(f"denominator must be positive, got {self.u}")
        if intmath.gcd_all(x for row in rows for x in row) != 1:
            raise NotAdmissibleError(f"entries of {rows} do not have gcd 1")

        # the j-th pivot is the first nonzero row of column j, since everything above it vanishes
        pivots = []
        for j in range(r):
            first = next((i for i, row in enumerate(rows) if row[j] != 0), None)
            if first is None:
                raise NotAdmissibleError(f"column {j} is zero")
            expected = tuple(self.u if jj == j else 0 for jj in range(r))
            if rows[first] != expected:
                raise NotAdmissibleError(f"row {first} is not {self.u}*e_{j}")
            if pivots and first <= pivots[-1]:
                raise NotAdmissibleError("pivot rows are not strictly increasing")
            pivots.append(first)
        object.__setattr__(self, "pivot_rows", tuple(pivots))

    @property
    def k(self):
        return len(self.entries)

    @property
    def r(self):
        return len(self.entries[0])

    def column(self, j):
        return tuple(row[j] for row in self.entries)

    def columns(self):
        return [self.column(j) for j in range(self.r)]

    def as_array(self):
        return np.array(self.entries, dtype=np.int64)

    def max_abs_entry(self):
        return max(abs(x) for row in self.entries for x in row)

    def to_dict(self):
        return {
            "k": self.k,
            "r": self.r,
            "u": self.u,
            "rows": [list(row) for row in self.entries],
            "pivot_rows": list(self.pivot_rows),
        }

    def to_json(self):
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data):
        matrix = cls(data["rows"], data.get("u", 1))
        if "pivot_rows" in data and tuple(data["pivot_rows"]) != matrix.pivot_rows:
            raise NotAdmissibleError(f"pivot_rows {data['pivot_rows']} disagree with {matrix.pivot_rows}")
        return matrix

    @classmethod
    def from_columns(cls, columns, u=1):
        return cls(tuple(zip(*columns)), u)

    @classmethod
    def identity(cls, k):
        return cls(tuple(tuple(1 if i == j else 0 for j in range(k)) for i in range(k)), 1)

    @classmethod
    def ones_column(cls, k):
        return cls(tuple((1,) for _ in range(k)), 1)


@dataclass(frozen=True)
class AffineLiftedMatrix:
    matrix: AdmissibleMatrix  # ~D'
    source: AdmissibleMatrix  # D
    intermediate: tuple  # D'


@dataclass(eq=False)
class FamilyMember:
    """One summand of a lifted family with its coefficient.

    coefficient is a Fraction whenever it is exact; congruence terms that depend on a
    truncated series carry a float and a nonzero tail.
    """

    matrix: AdmissibleMatrix
    coefficient: object
    origin: Origin
    tail: float = 0.0
    detail: dict = field(default_factory=dict)


def value_order(bound):
    """Integers of absolute value <= bound in the order 0, 1, -1, 2, -2, ..."""
    values = [0]
    for x in range(1, bound + 1):
        values.extend((x, -x))
    return values


def enumerate_admissible(k, r, u, entry_bound):
    """All D in the admissible family (k, r, u) with |entries| <= entry_bound."""
    if r < 1 or k < 1:
        raise ParameterError("k and r must be positive")
    if r > k:
        raise ParameterError(f"rank r={r} exceeds row count k={k}")
    if u < 1:
        raise ParameterError("denominator u must be positive")
    if u > entry_bound:
        raise ParameterError(f"entry_bound={entry_bound} is below the denominator u={u}")

    values = value_order(entry_bound)
    result = []
    for pivots in itertools.combinations(range(k), r):
        free = [
            (i, j)
            for i in range(k)
            if i not in pivots
            for j in range(r)
            if i > pivots[j]
        ]
        for choice in itertools.product(values, repeat=len(free)):
            rows = [[0] * r for _ in range(k)]
            for j, i in enumerate(pivots):
                rows[i][j] = u
            for (i, j), x in zip(free, choice):
                rows[i][j] = x
            if intmath.gcd_all(x for row in rows for x in row) != 1:
                continue
            result.append(AdmissibleMatrix(rows, u))
    logger.debug("enumerate_admissible(k=%d, r=%d, u=%d, bound=%d): %d matrices", k, r, u, entry_bound, len(result))
    return result


def count_N(D, method="auto"):
    """
    Number of v in {0..u-1}^r with D v / u integral.

    Args:
        D: AdmissibleMatrix.
        method: "direct" enumerates all v, "smith" multiplies gcd(s_i, u) over the
            invariant factors, "auto" picks direct while u^r <= config.DIRECT_COUNT_LIMIT.
    """
    u, r = D.u, D.r
    if u == 1:
        return 1
    if method == "auto":
        method = "direct" if u**r <= config.DIRECT_COUNT_LIMIT else "smith"
    if method == "direct":
        grid = np.indices((u,) * r).reshape(r, -1)
        images = D.as_array() @ grid
        return int(np.count_nonzero(np.all(images % u == 0, axis=0)))
    if method == "smith":
        factors = intmath.invariant_factors(D.entries)
        factors += [0] * (r - len(factors))
        count = 1
        for s in factors:
            count *= gcd(s, u) if s else u
        return int(count)
    raise ParameterError(f"unknown counting method {method!r}")


def affine_lift(D):
    """Build D' and ~D' for D in the (k-1)-row admissible family."""
    u = D.u
    intermediate = [[u] + [0] * D.r]
    for row in D.entries:
        intermediate.append([u] + list(row))
    lifted = [list(row) for row in intermediate]
    for row in lifted:
        row[0] -= sum(row[1:])
    matrix = AdmissibleMatrix(lifted, u)
    return AffineLiftedMatrix(matrix=matrix, source=D, intermediate=tuple(tuple(row) for row in intermediate))


def is_affine_member(D):
    """First row (u, 0, ..., 0) and first column u*1 minus the sum of the other columns."""
    u = D.u
    if D.entries[0] != tuple([u] + [0] * (D.r - 1)):
        return False
    return all(row[0] == u - sum(row[1:]) for row in D.entries)


def matrix_class(D):
    """R1: u >= 2 or an entry of size >= 2; R2: otherwise a row with two nonzeros; else Main."""
    if D.u >= 2 or D.max_abs_entry() >= 2:
        return MatrixClass.R1
    if any(sum(1 for x in row if x != 0) >= 2 for row in D.entries):
        return MatrixClass.R2
    return MatrixClass.MAIN


def classify(D, context=Context.AFFINE):
    """Main / R1 / R2 class of a lifted-family matrix."""
    context = Context(context)
    if context is Context.AFFINE and not is_affine_member(D):
        raise ParameterError(f"{D.entries} is not in the affine lifted family")
    return matrix_class(D)


def affine_family(k, d, u_max=1, entry_bound=1):
    """
    Summands of the affine k-th moment formula inside a (u, entry) window.

    Yields the product term, the diagonal term and every lifted ~D' for
    m = 2..k-1, with coefficient N(D,u)^d / u^(d r).
    """
    if k < 1:
        raise ParameterError("moment order k must be positive")
    if k == 1:
        yield FamilyMember(AdmissibleMatrix(((1,),)), Fraction(1), Origin.PRODUCT)
        return
    yield FamilyMember(AdmissibleMatrix.identity(k), Fraction(1), Origin.PRODUCT)
    yield FamilyMember(AdmissibleMatrix.ones_column(k), Fraction(1), Origin.DIAGONAL)
    for m in range(2, k):
        r = m - 1
        for u in range(1, u_max + 1):
            if u > entry_bound:
                break
            for D in enumerate_admissible(k - 1, r, u, entry_bound):
                lift = affine_lift(D)
                coefficient = Fraction(count_N(D) ** d, u ** (d * r))
                yield FamilyMember(
                    lift.matrix,
                    coefficient,
                    Origin.AFFINE_LIFT,
                    detail={"source": D, "u": u, "entry_max": D.max_abs_entry()},
                )
