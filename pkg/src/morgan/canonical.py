"""Controllability indices, controller (Popov) canonical form, pencil layout.

The working form used by the search: a similarity P takes (A, B) to
controller canonical form, an input transformation G_I normalizes the
block-end rows of the input matrix to unit rows, and a row permutation splits
the pencil sI - A_r into the chain block L(s) and the block-end rows
sK - Lambda.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import InvalidSystem, MorganError, NotControllable
from .exactalg import (
    Poly,
    PolyMatrix,
    RationalMatrix,
    s_identity_minus,
)


@dataclass(frozen=True)
class StateSpace:
    """The triple (A, B, C) with m <= l <= n and B monic."""

    A: RationalMatrix
    B: RationalMatrix
    C: RationalMatrix

    def __post_init__(self):
        n = self.A.rows
        if self.A.cols != n:
            raise InvalidSystem("A must be square")
        if self.B.rows != n:
            raise InvalidSystem("B must have as many rows as A")
        if self.C.cols != n:
            raise InvalidSystem("C must have as many columns as A")
        if not (self.m <= self.l <= self.n):
            raise InvalidSystem(
                f"need m <= l <= n, got m={self.m}, l={self.l}, n={self.n}"
            )
        if self.B.rank() != self.l:
            raise InvalidSystem("B must have full column rank")
        kal = self.B
        blk = self.B
        for _ in range(self.n - 1):
            blk = self.A * blk
            kal = kal.hstack(blk)
        if kal.rank() != self.n:
            raise NotControllable(
                f"controllability matrix has rank {kal.rank()} < n = {self.n}"
            )

    @property
    def n(self):
        return self.A.rows

    @property
    def l(self):
        return self.B.cols

    @property
    def m(self):
        return self.C.rows


def _staircase_select(a: RationalMatrix, b: RationalMatrix):
    """Degree-major staircase selection of independent columns A^k b_j.

    Returns per-input chain lengths (in the original input order).  The
    selection scans degrees k = 0, 1, ... and inputs j = 1..l within each
    degree, keeping a column iff it is independent of everything kept so far.
    """
    n = a.rows
    l = b.cols
    lengths = [0] * l
    basis_rows: list[list] = []  # reduced echelon rows of kept vectors
    pivots: list[int] = []

    def try_add(vec):
        v = list(vec)
        for row, p in zip(basis_rows, pivots):
            if v[p] != 0:
                f = v[p]
                v = [x - f * y for x, y in zip(v, row)]
        p = next((i for i, x in enumerate(v) if x != 0), None)
        if p is None:
            return False
        inv = 1 / v[p]
        basis_rows.append([x * inv for x in v])
        pivots.append(p)
        return True

    powers = [b.col(j) for j in range(l)]
    total = 0
    alive = [True] * l
    for k in range(n):
        if total == n:
            break
        for j in range(l):
            if not alive[j]:
                continue
            if try_add(powers[j]):
                lengths[j] += 1
                total += 1
            else:
                # once A^k b_j is dependent, all higher powers are too
                alive[j] = False
        powers = [a.mul_vector(v) for v in powers]
    if total != n:
        raise NotControllable(
            f"controllability matrix has rank {total} < n = {n}"
        )
    return lengths


def controllability_indices(a: RationalMatrix, b: RationalMatrix):
    """The l controllability indices, nondecreasing.  Raises NotControllable."""
    return tuple(sorted(_staircase_select(a, b)))


def positions_from_sigma(sigma):
    """s-positions p_i = sigma_1 + ... + sigma_i (1-based)."""
    out = []
    acc = 0
    for s in sigma:
        acc += s
        out.append(acc)
    return tuple(out)


def build_S(sigma) -> PolyMatrix:
    """Block-diagonal basis matrix S(s) = diag([1, s, ..., s^(sigma_i - 1)]^T)."""
    if any(s < 1 for s in sigma):
        raise MorganError("all indices must be >= 1")
    n = sum(sigma)
    l = len(sigma)
    m = [[Poly.zero() for _ in range(l)] for _ in range(n)]
    row = 0
    for j, s in enumerate(sigma):
        for k in range(s):
            m[row + k][j] = Poly.s(k) if k else Poly.one()
        row += s
    return PolyMatrix(m)


def build_L(sigma) -> PolyMatrix:
    """diag{L_sigma_i(s)} with L_k(s) = s[I|0] - [0|I] of shape (k-1) x k."""
    n = sum(sigma)
    rows = []
    col_off = 0
    for s in sigma:
        for c in range(s - 1):
            row = [Poly.zero()] * n
            row[col_off + c] = Poly.s()
            row[col_off + c + 1] = Poly.constant(-1)
            rows.append(row)
        col_off += s
    return PolyMatrix(rows) if rows else PolyMatrix.zeros(0, n)


@dataclass(frozen=True)
class PencilForm:
    """Controller canonical data for one system.

    sigma is nondecreasing; P and G_I satisfy A_r = P^-1 A P and
    B_r_GI = P^-1 B G_I with unit rows at the block-end positions p_i.
    row_perm lists the chain rows followed by the block-end rows, so that
    permuting the rows of sI - A_r with it yields [L(s); sK - Lambda].
    """

    sigma: tuple
    P: RationalMatrix
    P_inv: RationalMatrix
    G_I: RationalMatrix
    A_r: RationalMatrix
    B_r_GI: RationalMatrix
    C_r: RationalMatrix
    row_perm: tuple
    L: PolyMatrix
    K: RationalMatrix
    Lambda: RationalMatrix

    @property
    def n(self):
        return self.A_r.rows

    @property
    def l(self):
        return len(self.sigma)

    @property
    def positions(self):
        return positions_from_sigma(self.sigma)

    def pencil_row(self, block_index):
        """Row block_index (1-based) of sK - Lambda as (K row, Lambda row)."""
        return self.K.row(block_index - 1), self.Lambda.row(block_index - 1)


def to_pencil_form(sys: StateSpace) -> PencilForm:
    """Transform (A, B, C) to controller canonical form plus pencil split.

    Construction: staircase-selected chain vectors {A^k b_j}, inputs sorted by
    chain length (ties keep the original input order), change of basis built
    from the block-end rows of the chain matrix inverse.  The result is
    verified by reassembly before returning.
    """
    a, b, c = sys.A, sys.B, sys.C
    n, l = sys.n, sys.l
    raw = _staircase_select(a, b)
    if any(x == 0 for x in raw):
        raise InvalidSystem("an input column contributes no chain (B rank deficient)")
    order = sorted(range(l), key=lambda j: (raw[j], j))
    sigma = tuple(raw[j] for j in order)
    pos = positions_from_sigma(sigma)

    # chain matrix: columns grouped by (sorted) input, ascending power
    cols = []
    for j in order:
        v = b.col(j)
        for _ in range(raw[j]):
            cols.append(v)
            v = a.mul_vector(v)
    chain = RationalMatrix.from_columns(cols)
    chain_inv = chain.inverse()

    # controller-form basis: stack q_i A^k, q_i = block-end row of chain^-1
    t_inv_rows = []
    for i, p in enumerate(pos):
        q = chain_inv.row(p - 1)
        for _ in range(sigma[i]):
            t_inv_rows.append(q)
            q = tuple(
                sum(q[r] * a[r, col] for r in range(n)) for col in range(n)
            )
    p_inv = RationalMatrix(t_inv_rows)
    p_mat = p_inv.inverse()

    perm = RationalMatrix.from_columns(
        [RationalMatrix.identity(l).col(j) for j in order]
    )
    a_r = p_inv * a * p_mat
    b_sorted = p_inv * b * perm
    v = RationalMatrix([b_sorted.row(p - 1) for p in pos])
    g_i = perm * v.inverse()
    b_r_gi = p_inv * b * g_i
    c_r = c * p_mat

    # pencil split
    pos_set = set(pos)
    chain_rows = [i for i in range(1, n + 1) if i not in pos_set]
    row_perm = tuple([i - 1 for i in chain_rows] + [p - 1 for p in pos])
    k_mat = RationalMatrix([RationalMatrix.identity(n).row(p - 1) for p in pos])
    lam = RationalMatrix([a_r.row(p - 1) for p in pos])
    l_mat = build_L(sigma)

    pf = PencilForm(
        sigma=sigma,
        P=p_mat,
        P_inv=p_inv,
        G_I=g_i,
        A_r=a_r,
        B_r_GI=b_r_gi,
        C_r=c_r,
        row_perm=row_perm,
        L=l_mat,
        K=k_mat,
        Lambda=lam,
    )
    _verify_pencil_form(sys, pf)
    return pf


def _verify_pencil_form(sys: StateSpace, pf: PencilForm):
    """Exact reassembly checks of every PencilForm component."""
    n, l = sys.n, sys.l
    pos = pf.positions
    ident = RationalMatrix.identity(n)
    if pf.P * pf.P_inv != ident:
        raise MorganError("P inverse mismatch")
    if pf.P_inv * sys.A * pf.P != pf.A_r:
        raise MorganError("A_r mismatch")
    if pf.P_inv * sys.B * pf.G_I != pf.B_r_GI:
        raise MorganError("B_r_GI mismatch")
    if sys.C * pf.P != pf.C_r:
        raise MorganError("C_r mismatch")
    # unit input rows exactly at the block ends
    for i in range(n):
        expected_row = [0] * l
        if (i + 1) in pos:
            expected_row[pos.index(i + 1)] = 1
        if any(x != e for x, e in zip(pf.B_r_GI.row(i), expected_row)):
            raise MorganError("B_r_GI does not have the unit-row pattern")
    # chain rows of A_r are unit rows pointing at the next chain state
    pos_set = set(pos)
    for i in range(1, n + 1):
        if i in pos_set:
            continue
        row = pf.A_r.row(i - 1)
        if any(
            row[j] != (1 if j == i else 0) for j in range(n)
        ):
            raise MorganError("A_r chain structure broken")
    # reassembly: row_perm applied to sI - A_r gives [L(s); sK - Lambda]
    pencil = s_identity_minus(pf.A_r).permute_rows(pf.row_perm)
    expected = pf.L.vstack(
        PolyMatrix(
            [
                [
                    Poly([-pf.Lambda[i, j], pf.K[i, j]])
                    for j in range(n)
                ]
                for i in range(l)
            ]
        )
    )
    if pencil != expected:
        raise MorganError("pencil reassembly failed")
    # L(s) S(s) = 0 identically
    if not (pf.L * build_S(pf.sigma)).is_zero():
        raise MorganError("L(s) S(s) != 0")
