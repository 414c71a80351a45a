"""Set partitions and the unit-pattern (Main) matrices they label."""

import itertools
from dataclasses import dataclass
from enum import Enum

from sympy.utilities.iterables import multiset_partitions

from admissible import AdmissibleMatrix
from errors import ParameterError


class MainContext(str, Enum):
    AFFINE = "affine"
    Q3PLUS = "congruence-q3plus"
    Q2 = "congruence-q2"


@dataclass(frozen=True)
class Partition:
    """Partition of {1..k} into blocks, stored sorted by block minimum."""

    blocks: tuple

    def __post_init__(self):
        blocks = [tuple(sorted(int(x) for x in block)) for block in self.blocks]
        if any(not block for block in blocks):
            raise ParameterError("partition blocks must be nonempty")
        blocks.sort(key=lambda block: block[0])
        elements = [x for block in blocks for x in block]
        if sorted(elements) != list(range(1, len(elements) + 1)):
            raise ParameterError(f"blocks {blocks} do not partition 1..{len(elements)}")
        object.__setattr__(self, "blocks", tuple(blocks))

    @property
    def k(self):
        return sum(len(block) for block in self.blocks)

    @property
    def block_minima(self):
        return tuple(block[0] for block in self.blocks)

    def __len__(self):
        return len(self.blocks)

    def has_singleton(self):
        return any(len(block) == 1 for block in self.blocks)

    def __str__(self):
        return "{" + ",".join("{" + ",".join(map(str, block)) + "}" for block in self.blocks) + "}"


def set_partitions(k):
    """All partitions of {1..k}, ordered by block count then blocks."""
    if k < 1:
        raise ParameterError("k must be positive")
    parts = [Partition(tuple(tuple(block) for block in p)) for p in multiset_partitions(list(range(1, k + 1)))]
    return sorted(parts, key=lambda p: (len(p), p.blocks))


def is_unit_pattern(M):
    """u = 1, entries in {0, +-1}, exactly one nonzero entry in every row."""
    if M.u != 1:
        return False
    for row in M.entries:
        nonzero = [x for x in row if x != 0]
        if len(nonzero) != 1 or abs(nonzero[0]) != 1:
            return False
    return True


def matrix_to_partition(M):
    """Blocks are the column supports (rows labelled 1..k)."""
    if not is_unit_pattern(M):
        raise ParameterError(f"{M.entries} is not a Main-class matrix")
    return Partition(tuple(
        tuple(i + 1 for i, row in enumerate(M.entries) if row[j] != 0) for j in range(M.r)
    ))


def partition_to_matrix(P, context=MainContext.AFFINE, signs=None):
    """
    Unit-pattern matrix whose j-th column is the indicator of the j-th block.

    Args:
        P: Partition of {1..k}.
        context: MainContext; only CongruenceQ2 accepts signs.
        signs: optional {row label: -1} for rows that are not block minima.
    """
    context = MainContext(context)
    signs = signs or {}
    if signs and context is not MainContext.Q2:
        raise ParameterError("negative entries only occur in the q = 2 family")
    minima = set(P.block_minima)
    for label, sign in signs.items():
        if label in minima:
            raise ParameterError(f"row {label} is a pivot row and keeps sign +1")
        if sign not in (1, -1):
            raise ParameterError(f"sign {sign} for row {label}")
    rows = [[0] * len(P) for _ in range(P.k)]
    for j, block in enumerate(P.blocks):
        for label in block:
            rows[label - 1][j] = signs.get(label, 1)
    return AdmissibleMatrix(rows, 1)


def enumerate_main_family(k, context=MainContext.AFFINE):
    """
    Main-class matrices on k rows.

    Affine and q >= 3 give one matrix per partition (Bell(k) of them); q = 2 adds
    every sign choice on the rows outside the block minima.
    """
    context = MainContext(context)
    result = []
    for P in set_partitions(k):
        if context is not MainContext.Q2:
            result.append(partition_to_matrix(P, context))
            continue
        free = [x for x in range(1, k + 1) if x not in P.block_minima]
        for choice in itertools.product((1, -1), repeat=len(free)):
            signs = {label: s for label, s in zip(free, choice) if s < 0}
            result.append(partition_to_matrix(P, context, signs=signs))
    return result


def sign_weight(P):
    """Number of q = 2 sign variants of the matrix labelled by P."""
    return 2 ** (P.k - len(P))
