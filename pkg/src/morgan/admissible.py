"""Enumeration of the finite search space.

The outer list holds the admissible closed-loop controllability-index
m-tuples; the inner list holds the row configurations for M(s) (which pencil
block-end rows receive the preliminary feedback).  Both lists are ordered
lexicographically so the whole search is deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

from .canonical import positions_from_sigma
from .errors import MorganError


def is_admissible_dimension(sigma, d: int) -> bool:
    """Single-index admissibility: sigma_k <= d <= sigma_1 + ... + sigma_k.

    k is the largest index with sigma_k <= d; False when every index exceeds d.
    Note that tuple admissibility (enumerate_tuples) is stronger than
    admissibility of each component.
    """
    if d < 1:
        return False
    k = 0
    acc = 0
    for s in sigma:
        if s <= d:
            k += 1
            acc += s
        else:
            break
    if k == 0:
        return False
    return d <= acc


def enumerate_tuples(sigma, m: int):
    """Ordered list of admissible closed-loop CI m-tuples.

    A nondecreasing tuple (st_1, ..., st_m) qualifies iff every prefix
    satisfies st_1 + ... + st_i <= sigma_1 + ... + sigma_{k_i} with
    k_i the largest index such that sigma_{k_i} <= st_i.  Components below
    sigma_1 are rejected (k_i undefined).  Lexicographic order.
    """
    sigma = tuple(sigma)
    l = len(sigma)
    if m > l:
        raise MorganError("m must not exceed the number of inputs")
    n = sum(sigma)
    prefix = [0]
    for s in sigma:
        prefix.append(prefix[-1] + s)

    def k_of(value):
        k = 0
        for s in sigma:
            if s <= value:
                k += 1
            else:
                break
        return k

    out = []

    def extend(partial, total):
        i = len(partial)
        if i == m:
            out.append(tuple(partial))
            return
        lo = partial[-1] if partial else sigma[0]
        for v in range(lo, n - total + 1):
            k = k_of(v)
            if k == 0:
                continue
            if total + v > prefix[k]:
                continue
            partial.append(v)
            extend(partial, total + v)
            partial.pop()

    extend([], 0)
    return out


@dataclass(frozen=True)
class RowConfig:
    """One choice of the l-m pencil rows that form M(s).

    blocks are 1-based block indices; positions are the matching s-positions
    p_i = sigma_1 + ... + sigma_{blocks[i]}.
    """

    blocks: tuple
    positions: tuple

    def complement(self, l):
        return tuple(b for b in range(1, l + 1) if b not in self.blocks)

    def __str__(self):
        return "(" + ", ".join(map(str, self.positions)) + ")"


def enumerate_row_configs(sigma, m: int):
    """All C(l, l-m) strictly increasing block choices, lexicographic."""
    l = len(sigma)
    if m > l:
        raise MorganError("m must not exceed the number of inputs")
    pos = positions_from_sigma(sigma)
    out = []
    for blocks in combinations(range(1, l + 1), l - m):
        out.append(
            RowConfig(
                blocks=tuple(blocks),
                positions=tuple(pos[b - 1] for b in blocks),
            )
        )
    return out
