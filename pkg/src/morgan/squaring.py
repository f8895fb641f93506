"""Per-configuration machinery: parametric basis Q_B, decouplability search,
feedback-row systems, and assembly of the preliminary pair (F_0, G_0).

For a candidate closed-loop index tuple the basis matrix Q_B is banded
block-Toeplitz; its entries are single named parameters.  The decouplability
test asks whether the parameters can be chosen so that the row
highest-coefficient matrix of the shifted numerator has full row rank while
Q_B stays monic and the denominator stays column reduced.  The search runs
over per-row degree deficits in ascending total deficit and derives the
induced zero constraints exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .admissible import RowConfig
from .canonical import PencilForm, positions_from_sigma
from .errors import MorganError, NotSolvable, SingularQ
from .exactalg import RationalMatrix
from .paramalg import (
    ConstraintSet,
    FormPoly,
    LinearForm,
    ParamId,
    ParamMatrix,
    ParamPolyMatrix,
    generic_rank,
    rat_times_param,
    solve_zero_constraints,
)


@dataclass(frozen=True)
class QBasis:
    """Parametric basis matrix for one candidate index tuple."""

    sigma: tuple
    sigma_tilde: tuple
    qb: ParamMatrix  # n x sum(sigma_tilde)
    params: tuple  # all ParamIds, lexicographic

    @property
    def width(self):
        return sum(self.sigma_tilde)

    @property
    def col_offsets(self):
        out = []
        acc = 0
        for s in self.sigma_tilde:
            out.append(acc)
            acc += s
        return tuple(out)

    @property
    def row_offsets(self):
        out = []
        acc = 0
        for s in self.sigma:
            out.append(acc)
            acc += s
        return tuple(out)


def build_QB(sigma, sigma_tilde) -> QBasis:
    """Banded block-Toeplitz Q_B.

    Block (i, j) is zero when sigma_tilde[j] < sigma[i]; otherwise it carries
    the band parameters q^{i,j}_1 .. q^{i,j}_{sigma_tilde[j]-sigma[i]+1} with
    entry (r, c) = q^{i,j}_{c-r+1}.  This shift structure is exactly what
    makes L(s) * Q_B * S_tilde(s) vanish identically.
    """
    sigma = tuple(sigma)
    sigma_tilde = tuple(sigma_tilde)
    n = sum(sigma)
    w = sum(sigma_tilde)
    grid = [[LinearForm.zero() for _ in range(w)] for _ in range(n)]
    params = []
    roff = 0
    for bi, si in enumerate(sigma, start=1):
        coff = 0
        for bj, sj in enumerate(sigma_tilde, start=1):
            if sj >= si:
                band = sj - si + 1
                ids = [ParamId("q", bi, bj, k) for k in range(1, band + 1)]
                params.extend(ids)
                for r in range(si):
                    for k, pid in enumerate(ids):
                        c = r + k
                        grid[roff + r][coff + c] = LinearForm.of_param(pid)
            coff += sj
        roff += si
    qb = ParamMatrix(grid)
    _check_shift_identity(sigma, sigma_tilde, qb)
    return QBasis(sigma=sigma, sigma_tilde=sigma_tilde, qb=qb, params=tuple(params))


def _check_shift_identity(sigma, sigma_tilde, qb: ParamMatrix):
    """Verify L(s) Q_B S_tilde(s) = 0 identically in the parameters.

    Row (i, c) of L is s e_{a} - e_{a+1} with a the c-th state of block i, so
    the product vanishes iff QB[a, off_j + k - 1] = QB[a+1, off_j + k] for all
    feasible k, plus the boundary terms.
    """
    col_off = []
    acc = 0
    for s in sigma_tilde:
        col_off.append(acc)
        acc += s
    roff = 0
    for si in sigma:
        for c in range(si - 1):
            a = roff + c  # global row of the 's' entry; chain partner is a+1
            for j, sj in enumerate(sigma_tilde):
                for d in range(sj + 1):
                    up = qb[a, col_off[j] + d - 1] if d >= 1 else LinearForm.zero()
                    low = qb[a + 1, col_off[j] + d] if d < sj else LinearForm.zero()
                    if not (up - low).is_zero():
                        raise MorganError("Q_B shift identity violated (bug)")
        roff += si


@dataclass(frozen=True)
class DecouplabilityReport:
    """Outcome of the decouplability search for one configuration."""

    success: bool
    ci_tuple: tuple
    config: RowConfig
    constraints: ConstraintSet
    degree_deficits: tuple
    n_alpha: ParamMatrix | None
    reason: str
    candidates_tried: int = 0


def _leading_forms(qbasis: QBasis, config: RowConfig):
    """Raw leading-coefficient forms of the config rows of Q_B.

    The s^{sigma_tilde_j} coefficient of a feedback row of M(s) Q_B S~(s)
    cannot be matched by any mu, so these entries must vanish for the
    feedback-row systems to be solvable.
    """
    offs = qbasis.col_offsets
    forms = []
    for p in config.positions:
        for j, sj in enumerate(qbasis.sigma_tilde):
            f = qbasis.qb[p - 1, offs[j] + sj - 1]
            if not f.is_zero():
                forms.append(f)
    return forms


def _nhat(c_r: RationalMatrix, qbasis: QBasis) -> ParamPolyMatrix:
    """N_hat(s) = C_r Q_B S~(s) diag(s^{st_max - st_j}) as a ParamPolyMatrix."""
    chat = rat_times_param(c_r, qbasis.qb)
    st = qbasis.sigma_tilde
    st_max = max(st)
    offs = qbasis.col_offsets
    rows = []
    for r in range(chat.rows):
        row = []
        for j, sj in enumerate(st):
            coeffs = [chat[r, offs[j] + k] for k in range(sj)]
            row.append(FormPoly(coeffs).shift(st_max - sj))
        rows.append(row)
    return ParamPolyMatrix(rows)


def dtilde_formpoly(pencil: PencilForm, qbasis: QBasis, config: RowConfig) -> ParamPolyMatrix:
    """D~(s) = (sK_b - Lambda_b) Q_B S~(s), rows indexed by the complement blocks."""
    offs = qbasis.col_offsets
    st = qbasis.sigma_tilde
    pos = positions_from_sigma(qbasis.sigma)
    rows = []
    for b in config.complement(pencil.l):
        p = pos[b - 1]
        u = qbasis.qb.row(p - 1)
        lam = pencil.A_r.row(p - 1)
        v = []
        for c in range(qbasis.width):
            acc = LinearForm.zero()
            for r, lr in enumerate(lam):
                if lr != 0:
                    acc = acc + qbasis.qb[r, c] * lr
            v.append(acc)
        row = []
        for j, sj in enumerate(st):
            coeffs = []
            for d in range(sj + 1):
                up = u[offs[j] + d - 1] if d >= 1 else LinearForm.zero()
                low = v[offs[j] + d] if d < sj else LinearForm.zero()
                coeffs.append(up - low)
            row.append(FormPoly(coeffs))
        rows.append(row)
    return ParamPolyMatrix(rows)


def dtilde_hc(pencil: PencilForm, qbasis: QBasis, config: RowConfig) -> ParamMatrix:
    """Column highest-coefficient matrix of D~(s) at declared degrees sigma_tilde."""
    dt = dtilde_formpoly(pencil, qbasis, config)
    st = qbasis.sigma_tilde
    return ParamMatrix(
        [
            [dt[i, j].coeff(st[j]) for j in range(dt.cols)]
            for i in range(dt.rows)
        ]
    )


def _ascending_deficits(bounds):
    """All deficit vectors d with 0 <= d_r <= bounds[r], ascending total, then lex."""
    out = []

    def rec(prefix, rest):
        if not rest:
            out.append(tuple(prefix))
            return
        for v in range(rest[0] + 1):
            prefix.append(v)
            rec(prefix, rest[1:])
            prefix.pop()

    rec([], list(bounds))
    out.sort(key=lambda d: (sum(d), d))
    return out


def decouplability_search(
    c_r: RationalMatrix,
    pencil: PencilForm,
    qbasis: QBasis,
    config: RowConfig,
    rng,
) -> DecouplabilityReport:
    """Search degree-deficit vectors for a parameter selection that decouples.

    A candidate deficit vector (d_1, ..., d_m) zeroes every coefficient form
    of N_hat row r above its target degree; success means the resulting row
    highest-coefficient matrix has generic rank m while Q_B keeps full column
    rank and [D~]_hc keeps rank m.  The per-config leading-coefficient
    constraints (solvability of the feedback-row systems) are seeded first.
    """
    m = c_r.rows
    w = qbasis.width
    seeds = _leading_forms(qbasis, config)
    nhat = _nhat(c_r, qbasis)
    dhc = dtilde_hc(pencil, qbasis, config)

    def fail(reason, tried=0, deficits=()):
        return DecouplabilityReport(
            success=False,
            ci_tuple=qbasis.sigma_tilde,
            config=config,
            constraints=ConstraintSet.empty(),
            degree_deficits=tuple(deficits),
            n_alpha=None,
            reason=reason,
            candidates_tried=tried,
        )

    cs0 = solve_zero_constraints(seeds)
    nhat0 = cs0.apply(nhat)
    bounds = []
    for r in range(m):
        d = nhat0.row_degree(r)
        if d < 0:
            return fail(
                "output row %d of N_hat is identically zero under the "
                "leading-coefficient constraints" % (r + 1)
            )
        bounds.append(d)

    tried = 0
    seen = set()
    pruned = []
    n_alpha_failures = 0
    qb_failures = 0
    dhc_failures = 0
    for deficits in _ascending_deficits(bounds):
        if any(all(dv >= pv for dv, pv in zip(deficits, pr)) for pr in pruned):
            continue
        forms = list(seeds)
        for r, d in enumerate(deficits):
            target = bounds[r] - d
            for deg in range(target + 1, max(qbasis.sigma_tilde)):
                for j in range(m):
                    f = nhat[r, j].coeff(deg)
                    if not f.is_zero():
                        forms.append(f)
        key = frozenset(forms)
        if key in seen:
            continue
        seen.add(key)
        tried += 1
        cs = solve_zero_constraints(forms)
        nh = cs.apply(nhat)
        degs = [nh.row_degree(r) for r in range(m)]
        if any(d < 0 for d in degs):
            pruned.append(deficits)
            continue
        n_alpha = ParamMatrix([nh.row_coeffs(r, degs[r]) for r in range(m)])
        if generic_rank(n_alpha, rng) != m:
            n_alpha_failures += 1
            continue
        if generic_rank(cs.apply(qbasis.qb), rng) != w:
            qb_failures += 1
            continue
        if generic_rank(cs.apply(dhc), rng) != m:
            dhc_failures += 1
            continue
        return DecouplabilityReport(
            success=True,
            ci_tuple=qbasis.sigma_tilde,
            config=config,
            constraints=cs,
            degree_deficits=deficits,
            n_alpha=n_alpha,
            reason="",
            candidates_tried=tried,
        )
    return fail(
        "no degree-deficit assignment gives N_alpha full generic row rank "
        "with Q_B monic and [D~]_hc of rank m "
        "(%d candidates: %d failed N_alpha, %d failed Q_B rank, %d failed [D~]_hc)"
        % (tried, n_alpha_failures, qb_failures, dhc_failures),
        tried,
    )


@dataclass(frozen=True)
class MuFamily:
    """Affine solution families of the feedback-row systems for one config.

    Row i of M(s) is mu_i = particulars[i] + sum_k t^{i}_{k} * nullbasis[k];
    the nullspace basis of Q_B^T is shared by all rows.
    """

    config: RowConfig
    particulars: tuple  # one n-vector per config row
    nullbasis: tuple  # basis of ker(Q_B^T)
    t_params: tuple  # t_params[i][k] = ParamId('t', i+1, k+1)

    @property
    def free_count(self):
        return len(self.nullbasis) * len(self.particulars)

    def all_t_params(self):
        return tuple(p for row in self.t_params for p in row)

    def rows_at(self, t_assignment: dict):
        """Numeric mu rows for a t assignment (missing ids default to 0)."""
        out = []
        for i, part in enumerate(self.particulars):
            row = list(part)
            for k, basis in enumerate(self.nullbasis):
                tv = Fraction(t_assignment.get(self.t_params[i][k], 0))
                if tv:
                    row = [x + tv * y for x, y in zip(row, basis)]
            out.append(tuple(row))
        return out

    def row_forms(self):
        """Mu rows as LinearForm vectors affine in the t parameters."""
        out = []
        for i, part in enumerate(self.particulars):
            row = []
            for c in range(len(part)):
                f = LinearForm.of_const(part[c])
                for k, basis in enumerate(self.nullbasis):
                    if basis[c]:
                        f = f + LinearForm(0, {self.t_params[i][k]: basis[c]})
                row.append(f)
            out.append(tuple(row))
        return out


@dataclass(frozen=True)
class MuSystem:
    """Symbolic feedback-row systems W_mu mu_i = Q_mu^i with W_mu = Q_B^T."""

    qbasis: QBasis
    config: RowConfig
    constraints: ConstraintSet
    rhs_forms: tuple  # one width-vector of LinearForms per config row

    def solve_numeric(self, qb_num: RationalMatrix, assignment: dict) -> MuFamily:
        """Exact affine solution families for a numeric instantiation."""
        w_mu = qb_num.transpose()
        nullbasis = tuple(w_mu.nullspace())
        particulars = []
        for rhs_form in self.rhs_forms:
            rhs = [f.eval(assignment) for f in rhs_form]
            sol = w_mu.solve(rhs)
            if sol is None:
                raise NotSolvable("feedback-row system inconsistent")
            particulars.append(sol)
        t_params = tuple(
            tuple(ParamId("t", i + 1, k + 1) for k in range(len(nullbasis)))
            for i in range(len(particulars))
        )
        return MuFamily(
            config=self.config,
            particulars=tuple(particulars),
            nullbasis=nullbasis,
            t_params=t_params,
        )


def solve_feedback_rows(qbasis: QBasis, constraints: ConstraintSet, config: RowConfig):
    """Build the feedback-row systems; returns (extra_constraints, MuSystem).

    Coefficient matching of s * (row p_i of Q_B) * S~(s) gives the right-hand
    sides; the s^{sigma_tilde_j} coefficients cannot be matched, so any
    not-yet-zero leading form becomes an extra constraint (normally none,
    because the decouplability search seeds them).
    """
    offs = qbasis.col_offsets
    st = qbasis.sigma_tilde
    extra = [
        f
        for f in (constraints.apply_form(g) for g in _leading_forms(qbasis, config))
        if not f.is_zero()
    ]
    extra_cs = solve_zero_constraints(extra)
    merged = constraints if extra_cs.is_empty() else _compose(constraints, extra_cs)

    rhs_rows = []
    for p in config.positions:
        rhs = [LinearForm.zero()] * qbasis.width
        for j, sj in enumerate(st):
            for k in range(1, sj):
                rhs[offs[j] + k] = -merged.apply_form(qbasis.qb[p - 1, offs[j] + k - 1])
            # k = sigma_tilde_j would need the (zeroed) leading entry; k = 0 is zero
        rhs_rows.append(tuple(rhs))
    system = MuSystem(
        qbasis=qbasis, config=config, constraints=merged, rhs_forms=tuple(rhs_rows)
    )
    return extra_cs, system


def _compose(cs: ConstraintSet, delta: ConstraintSet) -> ConstraintSet:
    new_map = {p: f.subs(delta.subs_map) for p, f in cs.subs_map.items()}
    new_map.update(delta.subs_map)
    return ConstraintSet(new_map, tuple(list(cs.order) + list(delta.order)))


def complete_basis(qb_num: RationalMatrix) -> RationalMatrix:
    """Q = [Q_A | Q_B] with Q_A greedily chosen standard basis vectors."""
    n = qb_num.rows
    cols = [qb_num.col(j) for j in range(qb_num.cols)]
    chosen = []
    for i in range(n):
        if len(chosen) + len(cols) == n:
            break
        e = tuple(Fraction(1 if r == i else 0) for r in range(n))
        trial = RationalMatrix.from_columns(chosen + [e] + cols)
        if trial.rank() == len(chosen) + 1 + len(cols):
            chosen.append(e)
    q = RationalMatrix.from_columns(chosen + cols)
    if q.rows != q.cols or q.rank() != n:
        raise SingularQ("could not complete Q_B to an invertible Q")
    return q


@dataclass(frozen=True)
class SquaringData:
    """Numeric output of one successful configuration."""

    sigma_tilde: tuple
    config: RowConfig
    Q: RationalMatrix
    Q_inv: RationalMatrix
    F0: RationalMatrix  # l x n, rows at config blocks
    G0: RationalMatrix  # l x m
    M_rows: tuple  # numeric mu rows
    qb_num: RationalMatrix
    assignment: dict  # q-parameter values used
    t_assignment: dict  # t-parameter values used


def assemble_squaring(
    pencil: PencilForm,
    qbasis: QBasis,
    config: RowConfig,
    qb_num: RationalMatrix,
    mu_family: MuFamily,
    assignment: dict,
    t_assignment: dict | None = None,
) -> SquaringData:
    """Build (F_0, G_0, Q) from a numeric Q_B and solved mu rows.

    F_0 rows at the config positions are (sK^a - Lambda^a) - M(s), whose
    s-parts cancel; all other rows are zero.  G_0 drops the config columns
    from the identity.
    """
    t_assignment = dict(t_assignment or {})
    n, l = pencil.n, pencil.l
    st = qbasis.sigma_tilde
    offs = qbasis.col_offsets
    mu_rows = mu_family.rows_at(t_assignment)

    # exact check: M(s) Q_B S~(s) = 0
    for p, mu in zip(config.positions, mu_rows):
        for j, sj in enumerate(st):
            if qb_num[p - 1, offs[j] + sj - 1] != 0:
                raise MorganError("leading Q_B entry not zeroed (bug)")
            for k in range(sj):
                acc = sum(mu[r] * qb_num[r, offs[j] + k] for r in range(n))
                if k >= 1:
                    acc += qb_num[p - 1, offs[j] + k - 1]
                if acc != 0:
                    raise MorganError("M(s) Q_B S~(s) != 0 (bug)")

    f0_rows = [[Fraction(0)] * n for _ in range(l)]
    for (block, p), mu in zip(zip(config.blocks, config.positions), mu_rows):
        lam = pencil.A_r.row(p - 1)
        f0_rows[block - 1] = [-lv - mv for lv, mv in zip(lam, mu)]
    f0 = RationalMatrix(f0_rows)

    ident = RationalMatrix.identity(l)
    keep = [j for j in range(1, l + 1) if j not in config.blocks]
    g0 = RationalMatrix.from_columns([ident.col(j - 1) for j in keep])

    q = complete_basis(qb_num)
    return SquaringData(
        sigma_tilde=st,
        config=config,
        Q=q,
        Q_inv=q.inverse(),
        F0=f0,
        G0=g0,
        M_rows=tuple(mu_rows),
        qb_num=qb_num,
        assignment=dict(assignment),
        t_assignment=t_assignment,
    )
