"""Fixed poles of a decoupled solution.

Two kinds: the input decoupling zeros created by the singular input
transformation (the uncontrollable modes of the squared-down system, present
whenever sum(sigma_tilde) < n), and the classical fixed decoupling poles
det(C_f S_f(s)) / prod(row gcds).  The former can often be placed through the
free parameters of the feedback-row solution families; this module does that
exactly when the affine parameter-to-block map is onto.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .canonical import build_S
from .errors import DegenerateNumerator, MorganError, TargetDegreeMismatch
from .exactalg import (
    Poly,
    RationalMatrix,
    det,
    poly_gcd,
    resolvent,
)


def charpoly(a: RationalMatrix) -> Poly:
    """Monic characteristic polynomial (exact)."""
    if a.rows == 0:
        return Poly.one()
    return resolvent(a)[1]


def _restriction(a: RationalMatrix, basis_cols):
    """Matrix of A restricted to an A-invariant subspace, in the given basis."""
    if not basis_cols:
        return RationalMatrix.zeros(0, 0)
    v = RationalMatrix.from_columns(basis_cols)
    cols = []
    for j in range(v.cols):
        img = a.mul_vector(v.col(j))
        x = v.solve(img)
        if x is None:
            raise MorganError("subspace is not invariant (bug)")
        cols.append(x)
    return RationalMatrix.from_columns(cols)


def controllable_subspace(a: RationalMatrix, b: RationalMatrix):
    """Canonical basis (leftmost independent Kalman columns) of <A | Im B>."""
    n = a.rows
    kal = b
    block = b
    for _ in range(n - 1):
        block = a * block
        kal = kal.hstack(block)
    pivots = kal.column_space_pivots()
    return [kal.col(j) for j in pivots]


def uncontrollable_polynomial(a: RationalMatrix, b: RationalMatrix) -> Poly:
    """Characteristic polynomial of the quotient map on R^n / <A | Im B>."""
    n = a.rows
    basis = controllable_subspace(a, b)
    r = len(basis)
    if r == n:
        return Poly.one()
    cols = list(basis)
    for i in range(n):
        if len(cols) == n:
            break
        e = tuple(Fraction(1 if k == i else 0) for k in range(n))
        trial = RationalMatrix.from_columns(cols + [e])
        if trial.rank() == len(cols) + 1:
            cols.append(e)
    t = RationalMatrix.from_columns(cols)
    abar = t.inverse() * a * t
    quot = abar.submatrix(range(r, n), range(r, n))
    return charpoly(quot)


def unobservable_polynomial(a: RationalMatrix, c: RationalMatrix) -> Poly:
    """Characteristic polynomial of A restricted to the unobservable subspace."""
    n = a.rows
    obs = c
    block = c
    for _ in range(n - 1):
        block = block * a
        obs = obs.vstack(block)
    basis = obs.nullspace()
    return charpoly(_restriction(a, basis))


def input_decoupling_zeros(square) -> Poly:
    """Monic characteristic polynomial of the uncontrollable part of (A_f, B_f).

    Equals the product of the finite elementary divisors of the augmented
    input-state pencil; degree is n - sum(sigma_tilde), and 1 when the squared
    system is controllable.
    """
    p = uncontrollable_polynomial(square.A_f, square.B_f)
    if p.degree != square.uncontrollable_dim:
        raise MorganError("unexpected uncontrollable dimension (bug)")
    return p


def fixed_decoupling_poles(square) -> Poly:
    """det(C_f S_f(s)) divided by the product of the row gcds, monic.

    S_f pads the controller-part basis S~(s) with zero rows for the quotient
    coordinates.  DegenerateNumerator when the determinant vanishes
    identically (a non-right-invertible configuration, rejected upstream).
    """
    k = square.uncontrollable_dim
    s_tilde = build_S(square.sigma_tilde)
    cfs = (
        square.C_f.submatrix(
            range(square.C_f.rows), range(k, square.C_f.cols)
        )
        * s_tilde
    )
    d = det(cfs)
    if d.is_zero():
        raise DegenerateNumerator("det(C_f S_f) is identically zero")
    out = d
    for i in range(cfs.rows):
        entries = [cfs[i, j] for j in range(cfs.cols) if not cfs[i, j].is_zero()]
        if not entries:
            raise DegenerateNumerator(f"row {i + 1} of C_f S_f is zero")
        g = entries[0]
        for e in entries[1:]:
            g = poly_gcd(g, e)
        q, r = out.divmod(g)
        if not r.is_zero():
            raise MorganError("row gcd does not divide det(C_f S_f) (bug)")
        out = q
    return out.monic()


def routh_hurwitz_stable(p: Poly) -> bool:
    """Exact sign test: True iff every root has negative real part.

    Degenerate first-column entries (zeros) report False; the zero polynomial
    is rejected.  Degree 0 is vacuously stable.
    """
    if p.is_zero():
        raise MorganError("zero polynomial has no stability character")
    deg = p.degree
    if deg == 0:
        return True
    coeffs = list(reversed(p.monic().coeffs))  # descending
    if any(c <= 0 for c in coeffs):
        return False
    row0 = coeffs[0::2]
    row1 = coeffs[1::2]
    width = len(row0)
    row0 = row0 + [Fraction(0)] * (width - len(row0))
    row1 = row1 + [Fraction(0)] * (width - len(row1))
    first_col = [row0[0], row1[0]]
    for _ in range(deg - 1):
        if row1[0] == 0:
            return False
        nxt = [
            (row1[0] * row0[j + 1] - row0[0] * row1[j + 1]) / row1[0]
            for j in range(width - 1)
        ]
        nxt.append(Fraction(0))
        first_col.append(nxt[0])
        row0, row1 = row1, nxt
    return all(x > 0 for x in first_col[: deg + 1])


@dataclass(frozen=True)
class FixedPoleReport:
    """Both fixed-pole polynomials of one solution plus stability flags."""

    input_dz_poly: Poly
    fixed_dec_poly: Poly
    free_params: tuple  # ParamIds of the t parameters
    t_assignment: dict
    input_dz_stable: bool
    fixed_dec_stable: bool


def fixed_pole_report(square, mu_family, t_assignment) -> FixedPoleReport:
    dz = input_decoupling_zeros(square)
    fixed = fixed_decoupling_poles(square)
    return FixedPoleReport(
        input_dz_poly=dz,
        fixed_dec_poly=fixed,
        free_params=mu_family.all_t_params(),
        t_assignment=dict(t_assignment),
        input_dz_stable=routh_hurwitz_stable(dz),
        fixed_dec_stable=routh_hurwitz_stable(fixed),
    )


@dataclass(frozen=True)
class BestEffortReport:
    """Returned when exact zero placement is out of reach.

    Carries the affine data X(t) = X0 - U T W so the caller can still explore
    the parametric characteristic polynomial numerically.
    """

    reason: str
    x0: RationalMatrix
    u: RationalMatrix
    w: RationalMatrix
    t_params: tuple

    def char_poly_at(self, t_assignment: dict) -> Poly:
        t = RationalMatrix(
            [
                [Fraction(t_assignment.get(p, 0)) for p in row]
                for row in self.t_params
            ]
        )
        return charpoly(self.x0 - self.u * t * self.w)


def companion(p: Poly) -> RationalMatrix:
    """Companion matrix of a monic polynomial."""
    d = p.degree
    if d < 1:
        return RationalMatrix.zeros(0, 0)
    q = p.monic()
    m = [[Fraction(0)] * d for _ in range(d)]
    for i in range(1, d):
        m[i][i - 1] = Fraction(1)
    for i in range(d):
        m[i][d - 1] = -q.coeff(i)
    return RationalMatrix(m)


def _zero_block_data(pencil, squaring, mu_family):
    """X0, U, W of the affine map t -> quotient block X(t) = X0 - U T W."""
    n = pencil.n
    k = len(mu_family.nullbasis)
    q, q_inv = squaring.Q, squaring.Q_inv
    ga = q_inv.submatrix(range(k), range(n))
    qa = q.submatrix(range(n), range(k))
    a_cl0 = pencil.A_r + pencil.B_r_GI * squaring.F0
    x0 = ga * a_cl0 * qa
    u_cols = [ga.col(p - 1) for p in squaring.config.positions]
    u = RationalMatrix.from_columns(u_cols) if u_cols else RationalMatrix.zeros(k, 0)
    w_rows = [
        tuple(
            sum(nb[r] * qa[r, c] for r in range(n)) for c in range(k)
        )
        for nb in mu_family.nullbasis
    ]
    w = RationalMatrix(w_rows)
    return x0, u, w


def assign_zeros(pencil, squaring_at_zero, mu_family, target: Poly):
    """Choose the free t parameters so the input decoupling zeros are target.

    When the rank-one update map is onto (U has full row rank) the quotient
    block can be steered to the companion matrix of the target, which always
    succeeds over Q.  Otherwise a BestEffortReport exposes the parametric
    polynomial.  TargetDegreeMismatch when deg(target) != n - sum(sigma_tilde).
    """
    k = len(mu_family.nullbasis)
    if target.degree != k:
        raise TargetDegreeMismatch(
            f"target degree {target.degree} != n - sum(sigma_tilde) = {k}"
        )
    if k == 0:
        return {}
    if target.leading() != 1:
        raise MorganError("target polynomial must be monic")
    x0, u, w = _zero_block_data(pencil, squaring_at_zero, mu_family)
    if u.rank() < k or w.rank() < k:
        return BestEffortReport(
            reason="free-parameter map does not reach every quotient block",
            x0=x0,
            u=u,
            w=w,
            t_params=mu_family.t_params,
        )
    y = (x0 - companion(target)) * w.inverse()
    t_cols = []
    for c in range(k):
        sol = u.solve(y.col(c))
        if sol is None:
            raise MorganError("onto map failed to solve (bug)")
        t_cols.append(sol)
    t_mat = RationalMatrix.from_columns(t_cols)
    x_reached = x0 - u * t_mat * w
    if charpoly(x_reached) != target.monic():
        raise MorganError("zero placement verification failed (bug)")
    assignment = {}
    for i, row in enumerate(mu_family.t_params):
        for j, pid in enumerate(row):
            assignment[pid] = t_mat[i, j]
    return assignment
