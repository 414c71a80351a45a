"""Lattices, LLL reduction and enumeration of lattice points in centred balls, on top of fplll."""

import csv
import itertools
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import NamedTuple

import numpy as np
from fpylll import GSO, LLL, Enumeration, EnumerationError, EvaluatorStrategy, IntegerMatrix

import config
from errors import EnumerationBudgetError, ParameterError, SingularBasisError
from regions import ball_volume, radius_for_volume

logger = logging.getLogger(__name__)


class ShiftKind(str, Enum):
    NONE = "None"
    AFFINE = "AffineUniform"
    CONGRUENCE = "CongruenceRational"


@dataclass(eq=False)
class Lattice:
    """
    The point set Z^d * basis + shift; basis rows are the generators.

    Sampled lattices also carry an exact integer form with basis = scale * integral,
    which is what reduction and enumeration work on. Congruence lattices record p, q
    and the integer matrix gamma with basis = gamma * g, so that x * basis^-1 - p/q is
    integral for every point x.
    """

    basis: np.ndarray
    shift: np.ndarray = None
    shift_kind: ShiftKind = ShiftKind.NONE
    p: tuple = None
    q: int = None
    gamma: tuple = None
    integral: tuple = None
    scale: float = 1.0
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        self.basis = np.array(self.basis, dtype=float)
        if self.basis.ndim != 2 or self.basis.shape[0] != self.basis.shape[1]:
            raise ParameterError(f"basis must be square, got shape {self.basis.shape}")
        d = self.basis.shape[0]
        if not 1 <= d <= config.MAX_DIMENSION:
            raise ParameterError(f"dimension {d} outside 1..{config.MAX_DIMENSION}")
        self.shift = np.zeros(d) if self.shift is None else np.array(self.shift, dtype=float)
        if self.shift.shape != (d,):
            raise ParameterError(f"shift must have length {d}")
        self.shift_kind = ShiftKind(self.shift_kind)
        det = abs(float(np.linalg.det(self.basis)))
        if det == 0.0:
            raise SingularBasisError("basis is singular")
        if abs(det - 1.0) > config.DET_TOLERANCE:
            raise ParameterError(f"|det(basis)| = {det!r} is not 1")
        if self.integral is not None:
            self.integral = tuple(tuple(int(x) for x in row) for row in self.integral)
            self.scale = float(self.scale)
            if not np.allclose(self.scale * np.array(self.integral, dtype=float), self.basis, rtol=1e-9, atol=1e-9):
                raise ParameterError("basis does not equal scale * integral")
        if self.shift_kind is ShiftKind.CONGRUENCE:
            if self.p is None or self.q is None:
                raise ParameterError("congruence lattices need p and q")
            if math.gcd(*[int(x) for x in self.p], int(self.q)) != 1:
                raise ParameterError(f"gcd(p, q) must be 1 for p={self.p}, q={self.q}")

    @property
    def d(self):
        return self.basis.shape[0]

    @property
    def is_shifted(self):
        return self.shift_kind is not ShiftKind.NONE

    @property
    def include_zero_default(self):
        # linear lattices count L minus the origin
        return self.is_shifted

    @cached_property
    def reduced(self):
        if self.integral is not None:
            return lll_reduce(self.integral, scale=self.scale)
        return lll_reduce(self.basis)

    @property
    def reduced_basis(self):
        return self.reduced.basis

    def coordinates(self, x):
        """Real coefficients c with x = c * basis + shift."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        return np.linalg.solve(self.basis.T, (x - self.shift).T).T

    def contains(self, x, tol=config.MEMBERSHIP_TOLERANCE):
        c = self.coordinates(x)
        return np.all(np.abs(c - np.round(c)) <= tol, axis=1)

    def to_dict(self):
        return {
            "d": self.d,
            "basis": self.basis.tolist(),
            "shift": self.shift.tolist(),
            "shift_kind": self.shift_kind.value,
            "p": None if self.p is None else list(self.p),
            "q": self.q,
            "gamma": None if self.gamma is None else [list(row) for row in self.gamma],
            "integral": None if self.integral is None else [list(row) for row in self.integral],
            "scale": self.scale,
            "provenance": self.provenance,
        }

    @classmethod
    def from_dict(cls, data):
        return cls(
            basis=data["basis"],
            shift=data.get("shift"),
            shift_kind=data.get("shift_kind", ShiftKind.NONE),
            p=None if data.get("p") is None else tuple(data["p"]),
            q=data.get("q"),
            gamma=None if data.get("gamma") is None else tuple(tuple(row) for row in data["gamma"]),
            integral=data.get("integral"),
            scale=data.get("scale", 1.0),
            provenance=data.get("provenance", {}),
        )


@dataclass(eq=False)
class PointCloud:
    """Lattice points sorted by norm."""

    vectors: np.ndarray
    norms: np.ndarray
    counts_at: dict = field(default_factory=dict)

    def __post_init__(self):
        self.norms = np.asarray(self.norms, dtype=float)
        order = np.argsort(self.norms, kind="stable")
        vectors = np.asarray(self.vectors, dtype=float)
        if vectors.ndim != 2:
            vectors = vectors.reshape(len(order), -1) if len(order) else np.zeros((0, 0))
        self.norms = self.norms[order]
        self.vectors = vectors[order]

    @property
    def count(self):
        return len(self.norms)

    def count_within(self, radius):
        return int(np.searchsorted(self.norms, radius * (1.0 + config.NORM_TOLERANCE), side="right"))

    def write_csv(self, stream):
        writer = csv.writer(stream)
        d = self.vectors.shape[1] if self.vectors.size else 0
        writer.writerow(["norm"] + [f"x{i}" for i in range(d)])
        for norm, vector in zip(self.norms, self.vectors):
            writer.writerow([repr(float(norm))] + [repr(float(x)) for x in vector])


class ReducedBasis(NamedTuple):
    basis: np.ndarray  # real rows, transform * input
    transform: np.ndarray  # unimodular H with basis = H * input
    integral: np.ndarray  # integer rows with basis = scale * integral
    scale: float


def integer_form(basis):
    """
    (A, s) with A an integer matrix and basis ~= s * A.

    Integral input is returned as is with s = 1; anything else is rounded on a
    fixed-point grid of 2^-FIXED_POINT_BITS.
    """
    b = np.asarray(basis, dtype=float)
    rounded = np.round(b)
    if np.array_equal(b, rounded) and np.max(np.abs(b), initial=0.0) < 2.0**52:
        return rounded.astype(np.int64), 1.0
    unit = 2.0 ** -config.FIXED_POINT_BITS
    return np.round(b / unit).astype(np.int64), unit


def _to_integer_matrix(rows):
    return IntegerMatrix.from_matrix([[int(x) for x in row] for row in rows])


def _to_array(matrix):
    rows = [[0] * matrix.ncols for _ in range(matrix.nrows)]
    matrix.to_matrix(rows)
    return np.array(rows, dtype=np.int64)


def lll_reduce(basis, delta=config.LLL_DELTA, eta=config.LLL_ETA, scale=1.0):
    """
    LLL reduction of the rows of scale * basis.

    The integer form of basis is reduced by fplll with the transform tracked; the
    transform is then applied to the real rows.

    Returns:
        ReducedBasis(basis, transform, integral, scale)
    """
    if not 0.25 < delta < 1:
        raise ParameterError(f"delta must lie in (1/4, 1), got {delta}")
    if not 0.5 <= eta < math.sqrt(delta):
        raise ParameterError(f"eta must lie in [1/2, sqrt(delta)), got {eta}")
    b = np.array(basis, dtype=float)
    if b.ndim != 2 or b.shape[0] != b.shape[1]:
        raise ParameterError("lll_reduce expects a square basis")
    d = b.shape[0]
    if np.linalg.matrix_rank(b) < d:
        raise SingularBasisError("cannot reduce a singular basis")
    integral, unit = integer_form(b)
    A = _to_integer_matrix(integral)
    U = IntegerMatrix.identity(d)
    LLL.reduction(A, U, delta=delta, eta=eta)
    transform = _to_array(U)
    logger.debug("LLL reduced a %d-dimensional basis (%s)", d,
                 "unchanged" if np.array_equal(transform, np.eye(d, dtype=np.int64)) else "changed")
    return ReducedBasis(scale * (transform @ b), transform, _to_array(A), scale * unit)


def _gram_schmidt(b):
    d = b.shape[0]
    mu = np.zeros((d, d))
    bstar = np.zeros_like(b)
    B = np.zeros(d)
    for i in range(d):
        bstar[i] = b[i]
        for j in range(i):
            mu[i, j] = b[i] @ bstar[j] / B[j]
            bstar[i] -= mu[i, j] * bstar[j]
        B[i] = bstar[i] @ bstar[i]
    return mu, B


def satisfies_lovasz(basis, delta=config.LLL_DELTA, eta=config.LLL_ETA, tol=1e-9):
    """Size reduction |mu_ij| <= eta and the Lovasz condition at every index."""
    mu, B = _gram_schmidt(np.array(basis, dtype=float))
    d = len(B)
    for i in range(1, d):
        if np.any(np.abs(mu[i, :i]) > eta + tol):
            return False
        if B[i] < (delta - mu[i, i - 1] ** 2) * B[i - 1] * (1 - tol):
            return False
    return True


def enumerate_coefficients(reduced, radius, shift=None, node_budget=config.NODE_BUDGET):
    """
    Integer vectors m with |m * reduced.basis + shift| <= radius.

    Runs fplll's enumeration on the Gram-Schmidt data of reduced.integral: as a
    closest-vector search around -shift for shifted sets, and as a short-vector
    search otherwise. The short-vector search returns one of each +-pair and skips
    the origin, so both are added back. The bound carries a small relative slack;
    callers filter on the real norms.

    Raises:
        EnumerationBudgetError: when node_budget solutions are reached.
    """
    d = len(reduced.integral)
    M = GSO.Mat(_to_integer_matrix(reduced.integral))
    M.update_gso()
    bound = (radius / reduced.scale) ** 2 * (1.0 + config.ENUMERATION_SLACK)
    target = None
    if shift is not None:
        target = M.from_canonical(tuple(-float(x) / reduced.scale for x in shift))
    enum = Enumeration(M, nr_solutions=node_budget, strategy=EvaluatorStrategy.FIRST_N_SOLUTIONS)
    try:
        solutions = enum.enumerate(0, d, bound, 0, target=target)
    except EnumerationError:
        solutions = []
    nodes = enum.get_nodes()
    if len(solutions) >= node_budget:
        raise EnumerationBudgetError(
            f"enumeration reached {node_budget} points at radius {radius:.6g}", nodes=max(nodes, len(solutions))
        )
    coefficients = np.array(
        [[int(round(x)) for x in coords] for _, coords in solutions], dtype=np.int64
    ).reshape(-1, d)
    if target is None:
        coefficients = np.vstack([np.zeros((1, d), dtype=np.int64), coefficients, -coefficients])
    logger.debug("enumeration at radius %.6g: %d coefficient vectors, %d nodes", radius, len(coefficients), nodes)
    return coefficients


def _points_from_coefficients(basis, coefficients, shift):
    points = coefficients @ basis
    if shift is not None:
        points = points + shift
    return points


def _filter_zero(points, norms, include_zero):
    if include_zero or not len(norms):
        return points, norms
    keep = norms > config.NORM_TOLERANCE
    return points[keep], norms[keep]


def brute_force_points(basis, radius, shift=None, include_zero=True):
    """Coefficient-box search; |c_i| <= radius * |column i of basis^-1| bounds every point."""
    basis = np.asarray(basis, dtype=float)
    d = basis.shape[0]
    inverse = np.linalg.inv(basis)
    c0 = np.zeros(d) if shift is None else np.asarray(shift, dtype=float) @ inverse
    reach = radius * np.linalg.norm(inverse, axis=0)
    ranges = [range(math.floor(-c0[i] - reach[i]), math.ceil(-c0[i] + reach[i]) + 1) for i in range(d)]
    coefficients = np.array(list(itertools.product(*ranges)), dtype=float).reshape(-1, d)
    points = _points_from_coefficients(basis, coefficients, shift)
    norms = np.linalg.norm(points, axis=1)
    keep = norms <= radius * (1.0 + config.NORM_TOLERANCE)
    points, norms = _filter_zero(points[keep], norms[keep], include_zero)
    return PointCloud(points, norms)


def _budget_precheck(d, radius, node_budget):
    expected = ball_volume(d, radius)
    if expected > node_budget:
        raise EnumerationBudgetError(
            f"ball of radius {radius:.6g} holds about {expected:.3g} points, over the node budget",
            nodes=int(expected),
        )


def enumerate_in_ball(lattice, radius, include_zero=None, node_budget=config.NODE_BUDGET):
    """All points of the lattice with norm <= radius."""
    if radius <= 0:
        raise ParameterError(f"radius must be positive, got {radius}")
    if include_zero is None:
        include_zero = lattice.include_zero_default
    _budget_precheck(lattice.d, radius, node_budget)
    reduced = lattice.reduced
    shift = lattice.shift if lattice.is_shifted else None
    coefficients = enumerate_coefficients(reduced, radius, shift=shift, node_budget=node_budget)
    points = _points_from_coefficients(reduced.basis, coefficients.astype(float), shift)
    norms = np.linalg.norm(points, axis=1) if len(points) else np.zeros(0)
    keep = norms <= radius * (1.0 + config.NORM_TOLERANCE)
    points, norms = _filter_zero(points[keep], norms[keep], include_zero)
    return PointCloud(points.reshape(-1, lattice.d), norms)


def nested_counts(lattice, radii, include_zero=None, node_budget=config.NODE_BUDGET):
    """Counts in balls of increasing radii from one enumeration at the largest radius."""
    radii = [float(r) for r in radii]
    if not radii or any(b <= a for a, b in zip(radii, radii[1:])):
        raise ParameterError("radii must be a nonempty increasing list")
    cloud = enumerate_in_ball(lattice, radii[-1], include_zero=include_zero, node_budget=node_budget)
    counts = [cloud.count_within(r) for r in radii]
    cloud.counts_at = dict(zip(radii, counts))
    return counts


def _sign_canonical(points):
    """Keep one of each +-x pair: the first coordinate away from zero is positive."""
    if not len(points):
        return np.zeros(len(points), dtype=bool)
    nonzero = np.abs(points) > config.MEMBERSHIP_TOLERANCE
    first = np.argmax(nonzero, axis=1)
    lead = points[np.arange(len(points)), first]
    return lead > 0


def successive_volumes(lattice, n, include_zero=None, distinct_pairs=False, node_budget=config.NODE_BUDGET):
    """
    Volumes V_d * l_i^d of the balls through the n shortest points (with multiplicity).

    distinct_pairs keeps one vector of every +-pair, for origin-symmetric point sets.
    """
    if n < 1:
        raise ParameterError("n must be positive")
    d = lattice.d
    target = 2 * n + 2 if distinct_pairs else n + 1
    radius = 1.25 * radius_for_volume(d, target)
    while True:
        cloud = enumerate_in_ball(lattice, radius, include_zero=include_zero, node_budget=node_budget)
        norms = cloud.norms
        if distinct_pairs:
            norms = norms[_sign_canonical(cloud.vectors)]
        if len(norms) >= n:
            return [ball_volume(d, r) if r > 0 else 0.0 for r in norms[:n]]
        radius *= 1.25
