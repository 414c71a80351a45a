"""Random lattice samplers: Hecke-point unimodular lattices, affine shifts and congruence cosets."""

import itertools
import logging
import math
from enum import Enum

import numpy as np
from sympy import isprime

import config
from errors import ParameterError
from intmath import complete_to_unimodular, gcd_all, lift_primitive, mat_mul
from lattice import Lattice, ShiftKind, lll_reduce

logger = logging.getLogger(__name__)


class Space(str, Enum):
    LINEAR = "linear"
    AFFINE = "affine"
    CONGRUENCE = "congruence"


def substream(seed, index):
    """Independent generator for one sample, fixed by (seed, index) alone."""
    sequence = np.random.SeedSequence(int(seed), spawn_key=(int(index),))
    return np.random.Generator(np.random.Philox(sequence))


def hecke_basis(d, prime, coeffs, scaled=True):
    """
    Rows (p, 0, ..., 0) and (a_i, e_{i+1}); determinant p, scaled by p^(-1/d) to covolume 1.
    """
    coeffs = [int(a) for a in coeffs]
    if len(coeffs) != d - 1:
        raise ParameterError(f"need {d - 1} Hecke coefficients, got {len(coeffs)}")
    basis = np.eye(d, dtype=np.int64)
    basis[0, 0] = prime
    basis[1:, 0] = coeffs
    if not scaled:
        return basis
    return basis * float(prime) ** (-1.0 / d)


def _check_dimension(d, minimum=2):
    if not minimum <= d <= config.MAX_DIMENSION:
        raise ParameterError(f"dimension {d} outside {minimum}..{config.MAX_DIMENSION}")


def sample_unimodular(d, prime=config.DEFAULT_PRIME, rng=None):
    """Hecke point with uniform coefficients, LLL-reduced on its integer basis."""
    _check_dimension(d)
    if prime < config.MIN_HECKE_PRIME or not isprime(prime):
        raise ParameterError(f"Hecke sampling needs a prime >= {config.MIN_HECKE_PRIME}, got {prime}")
    rng = rng if rng is not None else np.random.default_rng()
    coeffs = rng.integers(0, prime, size=d - 1)
    reduced = lll_reduce(hecke_basis(d, prime, coeffs, scaled=False), scale=float(prime) ** (-1.0 / d))
    return Lattice(
        reduced.basis,
        integral=reduced.integral,
        scale=reduced.scale,
        provenance={"method": "hecke", "prime": int(prime)},
    )


def sample_affine(d, prime=config.DEFAULT_PRIME, rng=None):
    """Unimodular sample g with shift x * g, x uniform on [0, 1)^d."""
    rng = rng if rng is not None else np.random.default_rng()
    lattice = sample_unimodular(d, prime, rng)
    x = rng.random(d)
    return Lattice(
        lattice.basis,
        shift=x @ lattice.basis,
        shift_kind=ShiftKind.AFFINE,
        integral=lattice.integral,
        scale=lattice.scale,
        provenance=dict(lattice.provenance, method="hecke-affine"),
    )


def _check_congruence(d, p_vec, q):
    _check_dimension(d, minimum=3)
    if q < 2:
        raise ParameterError("modulus q must be at least 2")
    if len(p_vec) != d:
        raise ParameterError(f"p has length {len(p_vec)}, expected {d}")
    if math.gcd(*[int(x) for x in p_vec], int(q)) != 1:
        raise ParameterError(f"gcd(p, q) must be 1 for p={list(p_vec)}, q={q}")


def _primitive_residue(d, q, rng):
    while True:
        v = [int(x) for x in rng.integers(0, q, size=d)]
        if math.gcd(*v, q) == 1:
            return v


def sample_congruence(d, p_vec, q, prime=config.DEFAULT_PRIME, rng=None):
    """
    (Z^d + p/q) gamma g with gamma a uniform coset of Gamma_1(q) in SL_d(Z).

    The coset is drawn through a uniform primitive residue v mod q: gamma completes
    a primitive lift of v, and gamma' = gamma_p^-1 gamma with gamma_p completing
    p / gcd(p) moves p/q to g0 * v / q with g0 = gcd(p) prime to q.
    """
    p_vec = [int(x) for x in p_vec]
    _check_congruence(d, p_vec, q)
    rng = rng if rng is not None else np.random.default_rng()
    v = _primitive_residue(d, q, rng)
    gamma, _ = complete_to_unimodular(lift_primitive(v, q))
    g0 = gcd_all(p_vec)
    _, gamma_p_inv = complete_to_unimodular([x // g0 for x in p_vec])
    gamma_prime = mat_mul(gamma_p_inv, gamma)

    g = sample_unimodular(d, prime, rng)
    basis = np.array(gamma_prime, dtype=float) @ g.basis
    return Lattice(
        basis,
        shift=(np.array(p_vec, dtype=float) / q) @ basis,
        shift_kind=ShiftKind.CONGRUENCE,
        p=tuple(p_vec),
        q=int(q),
        gamma=tuple(tuple(row) for row in gamma_prime),
        integral=mat_mul(gamma_prime, g.integral),
        scale=g.scale,
        provenance=dict(g.provenance, method="hecke-congruence", residue=v),
    )


def primitive_residues(d, q):
    """Vectors v in (Z/q)^d with gcd(v, q) = 1."""
    if d < 1 or q < 1:
        raise ParameterError("need d >= 1 and q >= 1")
    return [v for v in itertools.product(range(q), repeat=d) if math.gcd(*v, q) == 1]


def sample_lattice(space, d, rng, prime=config.DEFAULT_PRIME, p_vec=None, q=None):
    space = Space(space)
    if space is Space.LINEAR:
        return sample_unimodular(d, prime, rng)
    if space is Space.AFFINE:
        return sample_affine(d, prime, rng)
    if p_vec is None or q is None:
        raise ParameterError("congruence sampling needs p and q")
    return sample_congruence(d, p_vec, q, prime, rng)
