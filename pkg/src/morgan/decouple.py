"""Search driver, square-system assembly, square decoupling, final composition.

The driver walks the (index tuple, row configuration) grid in lexicographic
order.  Each configuration is evaluated independently and purely from its own
derived sub-seed, so results do not depend on execution order or job count;
the winner is the first configuration whose entire pipeline (search,
instantiation, feedback solve, square decoupling, exact closed-loop
verification) goes through.
"""

from __future__ import annotations

import dataclasses
import hashlib
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

from .admissible import RowConfig, enumerate_row_configs, enumerate_tuples
from .canonical import (
    PencilForm,
    StateSpace,
    controllability_indices,
    to_pencil_form,
)
from .errors import (
    MorganError,
    NotSolvable,
    SingularBstar,
    TargetDegreeMismatch,
    VerificationFailed,
)
from .exactalg import Poly, RationalMatrix, transfer_function
from .paramalg import instantiate
from .squaring import (
    SquaringData,
    assemble_squaring,
    build_QB,
    decouplability_search,
    dtilde_hc,
    solve_feedback_rows,
)
from . import zeros as zeros_mod

DEFAULT_SEED = 1729
INSTANTIATION_RETRIES = 32
INSTANTIATION_BOUND = 5  # numeric Q_B entries drawn from [-5, 5]


@dataclass(frozen=True)
class SquareSystem:
    """The squared-down system (A_f, B_f, C_f) of one configuration."""

    A_f: RationalMatrix
    B_f: RationalMatrix
    C_f: RationalMatrix
    sigma_tilde: tuple
    uncontrollable_dim: int
    rel_degrees: tuple
    B_star: RationalMatrix

    @property
    def n(self):
        return self.A_f.rows

    @property
    def m(self):
        return self.C_f.rows


def relative_degrees(a: RationalMatrix, b: RationalMatrix, c: RationalMatrix):
    """Per-output relative degrees d_i and the decoupling matrix B*.

    d_i is the least k with C_i A^k B != 0; B* stacks those rows.  Raises
    SingularBstar when an output row never reaches B.
    """
    n = a.rows
    ds = []
    rows = []
    for i in range(c.rows):
        cur = c.row(i)
        found = None
        for k in range(n):
            hit = tuple(
                sum(cur[r] * b[r, j] for r in range(n)) for j in range(b.cols)
            )
            if any(x != 0 for x in hit):
                found = (k, hit)
                break
            cur = tuple(
                sum(cur[r] * a[r, col] for r in range(n)) for col in range(n)
            )
        if found is None:
            raise SingularBstar(f"output {i + 1} is disconnected from the inputs")
        ds.append(found[0])
        rows.append(found[1])
    return tuple(ds), RationalMatrix(rows)


def make_square_system(pencil: PencilForm, squaring: SquaringData) -> SquareSystem:
    """A_f = Q^-1 (A_r + B_r G_I F_0) Q, B_f = Q^-1 B_r G_I G_0, C_f = C_r Q.

    The controllable part sits in the trailing sum(sigma_tilde) coordinates in
    controller canonical form with indices sigma_tilde; both facts are
    asserted exactly.
    """
    q, q_inv = squaring.Q, squaring.Q_inv
    a_cl = pencil.A_r + pencil.B_r_GI * squaring.F0
    a_f = q_inv * a_cl * q
    b_f = q_inv * pencil.B_r_GI * squaring.G0
    c_f = pencil.C_r * q
    n = a_f.rows
    w = sum(squaring.sigma_tilde)
    k = n - w

    for i in range(k):
        if any(a_f[i, j] != 0 for j in range(k, n)):
            raise MorganError("controllable subspace not invariant (bug)")
        if any(b_f[i, j] != 0 for j in range(b_f.cols)):
            raise MorganError("B_f leaks into the quotient block (bug)")
    a_c = a_f.submatrix(range(k, n), range(k, n))
    b_c = b_f.submatrix(range(k, n), range(b_f.cols))
    if controllability_indices(a_c, b_c) != tuple(squaring.sigma_tilde):
        raise MorganError("squared system does not have the requested indices")

    ds, b_star = relative_degrees(a_f, b_f, c_f)
    if b_star.rank() != c_f.rows:
        raise SingularBstar(
            "decoupling matrix singular although the rank tests passed"
        )
    return SquareSystem(
        A_f=a_f,
        B_f=b_f,
        C_f=c_f,
        sigma_tilde=tuple(squaring.sigma_tilde),
        uncontrollable_dim=k,
        rel_degrees=ds,
        B_star=b_star,
    )


def default_diagonal_polys(square: SquareSystem):
    """(s+1)^(d_i+1) for each output."""
    out = []
    for d in square.rel_degrees:
        p = Poly.one()
        for _ in range(d + 1):
            p = p * Poly([1, 1])
        out.append(p)
    return out


def square_decouple(square: SquareSystem, target_polys=None):
    """Static decoupling law: F_f = -B*^-1 stack(C_i p_i(A_f)), G_f = B*^-1.

    The closed loop transfer function is exactly diag(1/p_i(s)); the default
    p_i is (s+1)^(d_i+1).
    """
    if target_polys is None:
        target_polys = default_diagonal_polys(square)
    if len(target_polys) != square.m:
        raise MorganError("need one diagonal polynomial per output")
    for i, p in enumerate(target_polys):
        if p.degree != square.rel_degrees[i] + 1:
            raise TargetDegreeMismatch(
                f"diagonal polynomial {i + 1} must have degree "
                f"{square.rel_degrees[i] + 1}, got {p.degree}"
            )
        if p.leading() != 1:
            raise MorganError(f"diagonal polynomial {i + 1} must be monic")
    g_f = square.B_star.inverse()
    rows = []
    for i, p in enumerate(target_polys):
        pa = p.eval_matrix(square.A_f)
        ci = square.C_f.row(i)
        rows.append(
            tuple(
                sum(ci[r] * pa[r, j] for r in range(square.n))
                for j in range(square.n)
            )
        )
    f_f = -(g_f * RationalMatrix(rows))
    return f_f, g_f, list(target_polys)


def compose_final(
    sys: StateSpace,
    pencil: PencilForm,
    squaring: SquaringData,
    f_f: RationalMatrix,
    g_f: RationalMatrix,
    p_list,
):
    """F = G_I (F_0 + G_0 F_f Q^-1) P^-1 and G = G_I G_0 G_f, verified.

    The exact closed-loop transfer function is recomputed from the original
    (A, B, C) and must equal diag(1/p_i) identically; VerificationFailed
    otherwise (this would be an implementation bug, never a search miss).
    """
    f = pencil.G_I * (squaring.F0 + squaring.G0 * f_f * squaring.Q_inv) * pencil.P_inv
    g = pencil.G_I * squaring.G0 * g_f
    h = transfer_function(sys.A, sys.B, sys.C, f, g)
    diag = verify_diagonal(h, p_list)
    if g.rank() != sys.m:
        raise VerificationFailed("final G is not monic")
    return f, g, diag


def verify_diagonal(h, p_list=None):
    """Check a transfer-function matrix is diagonal with nonzero diagonal.

    When p_list is given, diagonal entry i must equal 1/p_i exactly.
    Returns the list of diagonal (num, den) pairs.
    """
    m = len(h)
    for i in range(m):
        for j in range(len(h[i])):
            num, den = h[i][j]
            if i != j and not num.is_zero():
                raise VerificationFailed(
                    f"off-diagonal entry ({i + 1},{j + 1}) is {num}/{den}, not 0",
                    entry=(i + 1, j + 1),
                )
        num, den = h[i][i]
        if num.is_zero():
            raise VerificationFailed(
                f"diagonal entry {i + 1} is zero", entry=(i + 1, i + 1)
            )
        if p_list is not None:
            if num != Poly.one() or den != p_list[i].monic():
                raise VerificationFailed(
                    f"diagonal entry {i + 1} is ({num})/({den}), "
                    f"expected 1/({p_list[i]})",
                    entry=(i + 1, i + 1),
                )
    return [h[i][i] for i in range(m)]


# ---------------------------------------------------------------------------
# driver


@dataclass(frozen=True)
class SolveOptions:
    seed: int = DEFAULT_SEED
    return_all: bool = False
    diag_polys: tuple | None = None
    dz_target: Poly | None = None
    jobs: int = 1


@dataclass(frozen=True)
class ConfigOutcome:
    """Audit record for one (tuple, config) cell."""

    tuple_index: int
    config_index: int
    ci_tuple: tuple
    config: RowConfig
    status: str  # 'solved' or 'rejected'
    reason: str
    constraints: tuple = ()
    degree_deficits: tuple = ()


@dataclass(frozen=True)
class DecouplingSolution:
    """One decoupling pair plus its full audit trail."""

    F: RationalMatrix
    G: RationalMatrix
    ci_tuple: tuple
    config: RowConfig
    diag: tuple  # (num, den) Poly pairs
    p_list: tuple
    F_f: RationalMatrix
    G_f: RationalMatrix
    squaring: SquaringData
    square: SquareSystem
    pencil: PencilForm
    fixed_poles: "zeros_mod.FixedPoleReport"
    mu_family: object
    seed: int
    outcomes: tuple = ()

    @property
    def sigma(self):
        return self.pencil.sigma


@dataclass(frozen=True)
class NoSolution:
    """Certified failure of the whole finite search."""

    sigma: tuple
    outcomes: tuple
    searched: int
    seed: int
    reason: str = "every configuration was rejected"


def _sub_seed(seed: int, ti: int, ci: int) -> int:
    h = hashlib.sha256(f"{seed}:{ti}:{ci}".encode()).digest()
    return int.from_bytes(h[:8], "big")


def _evaluate_config(sys, pencil, ci_tuple, config, ti, ci, options):
    """Run the whole per-configuration pipeline; returns (outcome, solution|None)."""
    rng = random.Random(_sub_seed(options.seed, ti, ci))

    def rejected(reason, report=None):
        return (
            ConfigOutcome(
                tuple_index=ti,
                config_index=ci,
                ci_tuple=ci_tuple,
                config=config,
                status="rejected",
                reason=reason,
                constraints=tuple(report.constraints.describe()) if report else (),
                degree_deficits=report.degree_deficits if report else (),
            ),
            None,
        )

    qbasis = build_QB(pencil.sigma, ci_tuple)
    w = qbasis.width
    n, m = pencil.n, sys.m

    if options.dz_target is not None and options.dz_target.degree != n - w:
        return rejected(
            f"input-decoupling-zero target degree {options.dz_target.degree} "
            f"!= n - sum(sigma_tilde) = {n - w}"
        )

    report = decouplability_search(pencil.C_r, pencil, qbasis, config, rng)
    if not report.success:
        return rejected(report.reason)

    try:
        extra, musys = solve_feedback_rows(qbasis, report.constraints, config)
    except MorganError as e:
        return rejected(f"feedback-row constraint derivation failed: {e}", report)
    cs = musys.constraints
    n_alpha = extra.apply(report.n_alpha) if not extra.is_empty() else report.n_alpha
    dhc = cs.apply(dtilde_hc(pencil, qbasis, config))

    free = [p for p in qbasis.params if p not in cs.subs_map]
    family = None
    assignment = None
    qb_num = None
    for _ in range(INSTANTIATION_RETRIES):
        trial = {
            p: Fraction(rng.randint(-INSTANTIATION_BOUND, INSTANTIATION_BOUND))
            for p in free
        }
        qn = instantiate(cs.apply(qbasis.qb), trial)
        if qn.rank() != w:
            continue
        if instantiate(n_alpha, trial).rank() != m:
            continue
        if instantiate(dhc, trial).rank() != m:
            continue
        try:
            family = musys.solve_numeric(qn, trial)
        except NotSolvable:
            continue
        assignment = trial
        qb_num = qn
        break
    if family is None:
        return rejected(
            "no numeric instantiation satisfied the exact rank checks "
            f"within {INSTANTIATION_RETRIES} attempts",
            report,
        )

    t_assignment = {}
    if options.dz_target is not None and n - w > 0:
        squar0 = assemble_squaring(
            pencil, qbasis, config, qb_num, family, assignment, {}
        )
        placed = zeros_mod.assign_zeros(
            pencil, squar0, family, options.dz_target
        )
        if isinstance(placed, zeros_mod.BestEffortReport):
            return rejected(
                f"cannot place the requested input decoupling zeros: {placed.reason}",
                report,
            )
        t_assignment = placed

    squaring = assemble_squaring(
        pencil, qbasis, config, qb_num, family, assignment, t_assignment
    )
    try:
        square = make_square_system(pencil, squaring)
        f_f, g_f, p_list = square_decouple(
            square,
            list(options.diag_polys) if options.diag_polys else None,
        )
        f, g, diag = compose_final(sys, pencil, squaring, f_f, g_f, p_list)
    except TargetDegreeMismatch as e:
        return rejected(str(e), report)
    except SingularBstar as e:
        raise  # internal inconsistency: surfaced, never skipped
    fixed = zeros_mod.fixed_pole_report(square, family, t_assignment)

    outcome = ConfigOutcome(
        tuple_index=ti,
        config_index=ci,
        ci_tuple=ci_tuple,
        config=config,
        status="solved",
        reason="",
        constraints=tuple(cs.describe()),
        degree_deficits=report.degree_deficits,
    )
    solution = DecouplingSolution(
        F=f,
        G=g,
        ci_tuple=ci_tuple,
        config=config,
        diag=tuple(diag),
        p_list=tuple(p_list),
        F_f=f_f,
        G_f=g_f,
        squaring=squaring,
        square=square,
        pencil=pencil,
        fixed_poles=fixed,
        mu_family=family,
        seed=options.seed,
    )
    return outcome, solution


def solve(sys: StateSpace, options: SolveOptions | None = None):
    """Decide and construct a decoupling pair for the system.

    Returns a DecouplingSolution (the first feasible configuration in
    lexicographic order) or NoSolution after exhausting the finite search.
    With return_all, the audit covers the full grid and the returned solution
    is still the first feasible one.
    """
    options = options or SolveOptions()
    pencil = to_pencil_form(sys)
    tuples = enumerate_tuples(pencil.sigma, sys.m)
    configs = enumerate_row_configs(pencil.sigma, sys.m)
    grid = [
        (ti, ci) for ti in range(len(tuples)) for ci in range(len(configs))
    ]

    if options.jobs > 1:
        # chunked so a solved configuration still short-circuits the search;
        # the audit is truncated at the winner, so any overshoot within the
        # final chunk never changes the output
        ordered = []
        chunk = max(options.jobs * 2, 4)
        with ThreadPoolExecutor(max_workers=options.jobs) as pool:
            for start in range(0, len(grid), chunk):
                batch = grid[start : start + chunk]
                futures = [
                    pool.submit(
                        _evaluate_config,
                        sys,
                        pencil,
                        tuples[ti],
                        configs[ci],
                        ti,
                        ci,
                        options,
                    )
                    for ti, ci in batch
                ]
                outs = [f.result() for f in futures]
                ordered.extend(outs)
                if not options.return_all and any(s is not None for _, s in outs):
                    break
    else:
        ordered = []
        for ti, ci in grid:
            out = _evaluate_config(
                sys, pencil, tuples[ti], configs[ci], ti, ci, options
            )
            ordered.append(out)
            if out[1] is not None and not options.return_all:
                break

    outcomes = []
    winner = None
    for outcome, solution in ordered:
        outcomes.append(outcome)
        if solution is not None and winner is None:
            winner = solution
            if not options.return_all:
                break

    if winner is None:
        return NoSolution(
            sigma=pencil.sigma,
            outcomes=tuple(outcomes),
            searched=len(outcomes),
            seed=options.seed,
        )
    return dataclasses.replace(winner, outcomes=tuple(outcomes))
