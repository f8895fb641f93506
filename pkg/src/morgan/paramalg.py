"""Affine expressions in named free parameters and exact operations on them.

The entries of the parametric basis matrix Q_B are single parameters or zero,
so every expression that shows up downstream (output matrices, coefficient
matrices, right-hand sides) is affine in the parameters.  LinearForm captures
exactly that; ConstraintSet is a triangular substitution system produced by
equating forms to zero.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import Inconsistent, MissingParameter, MorganError
from .exactalg import Poly, RationalMatrix, rat


@dataclass(frozen=True, order=True)
class ParamId:
    """One named parameter.

    Namespace 'q' holds the Q_B entries q^{i,j}_k (block row i, block column
    j, band shift k); namespace 't' holds the free feedback parameters created
    when the mu-systems are underdetermined.
    """

    ns: str
    i: int
    j: int
    k: int = 0

    def __str__(self):
        if self.ns == "q":
            return f"q^{{{self.i},{self.j}}}_{self.k}"
        if self.ns == "t":
            return f"t^{{{self.i}}}_{self.j}"
        return f"{self.ns}^{{{self.i},{self.j}}}_{self.k}"


class LinearForm:
    """constant + sum(coeff * param); immutable, hashable."""

    __slots__ = ("const", "terms")

    def __init__(self, const=0, terms=()):
        object.__setattr__(self, "const", rat(const))
        if isinstance(terms, dict):
            items = terms.items()
        else:
            items = terms
        clean = {p: rat(c) for p, c in items if c != 0}
        object.__setattr__(
            self, "terms", tuple(sorted(clean.items(), key=lambda t: t[0]))
        )

    def __setattr__(self, *a):
        raise AttributeError("LinearForm is immutable")

    @staticmethod
    def zero() -> "LinearForm":
        return LinearForm(0)

    @staticmethod
    def of_param(p: ParamId) -> "LinearForm":
        return LinearForm(0, {p: Fraction(1)})

    @staticmethod
    def of_const(c) -> "LinearForm":
        return LinearForm(c)

    def term_map(self) -> dict:
        return dict(self.terms)

    def params(self):
        return tuple(p for p, _ in self.terms)

    def is_zero(self) -> bool:
        return self.const == 0 and not self.terms

    def is_constant(self) -> bool:
        return not self.terms

    def __eq__(self, other):
        return (
            isinstance(other, LinearForm)
            and self.const == other.const
            and self.terms == other.terms
        )

    def __hash__(self):
        return hash((self.const, self.terms))

    def __add__(self, other):
        if isinstance(other, (int, Fraction)):
            return LinearForm(self.const + other, self.terms)
        t = self.term_map()
        for p, c in other.terms:
            t[p] = t.get(p, Fraction(0)) + c
        return LinearForm(self.const + other.const, t)

    __radd__ = __add__

    def __neg__(self):
        return LinearForm(-self.const, [(p, -c) for p, c in self.terms])

    def __sub__(self, other):
        if isinstance(other, (int, Fraction)):
            return LinearForm(self.const - other, self.terms)
        return self + (-other)

    def __mul__(self, scalar):
        scalar = rat(scalar)
        return LinearForm(self.const * scalar, [(p, c * scalar) for p, c in self.terms])

    __rmul__ = __mul__

    def subs(self, mapping: dict) -> "LinearForm":
        """Substitute parameters by LinearForms (absent ones unchanged)."""
        out_const = self.const
        out_terms: dict[ParamId, Fraction] = {}
        for p, c in self.terms:
            rep = mapping.get(p)
            if rep is None:
                out_terms[p] = out_terms.get(p, Fraction(0)) + c
            else:
                out_const += c * rep.const
                for p2, c2 in rep.terms:
                    out_terms[p2] = out_terms.get(p2, Fraction(0)) + c * c2
        return LinearForm(out_const, out_terms)

    def eval(self, assignment: dict) -> Fraction:
        acc = self.const
        for p, c in self.terms:
            if p not in assignment:
                raise MissingParameter(p)
            acc += c * rat(assignment[p])
        return acc

    def __str__(self):
        if self.is_zero():
            return "0"
        parts = []
        if self.const != 0:
            parts.append(str(self.const))
        for p, c in self.terms:
            if c == 1:
                parts.append(f"+{p}" if parts else str(p))
            elif c == -1:
                parts.append(f"-{p}")
            else:
                sign = "+" if c > 0 and parts else ""
                parts.append(f"{sign}{c}*{p}")
        return "".join(parts)

    __repr__ = __str__


class ParamMatrix:
    """Immutable dense matrix of LinearForm entries."""

    __slots__ = ("entries",)

    def __init__(self, entries):
        rows = tuple(
            tuple(
                e if isinstance(e, LinearForm) else LinearForm.of_const(e)
                for e in row
            )
            for row in entries
        )
        if rows:
            w = len(rows[0])
            if any(len(r) != w for r in rows):
                raise MorganError("ragged matrix")
        object.__setattr__(self, "entries", rows)

    def __setattr__(self, *a):
        raise AttributeError("ParamMatrix is immutable")

    @property
    def rows(self):
        return len(self.entries)

    @property
    def cols(self):
        return len(self.entries[0]) if self.entries else 0

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    def __eq__(self, other):
        return isinstance(other, ParamMatrix) and self.entries == other.entries

    def row(self, i):
        return self.entries[i]

    def params(self):
        seen = set()
        for r in self.entries:
            for e in r:
                seen.update(e.params())
        return tuple(sorted(seen))

    def subs(self, mapping) -> "ParamMatrix":
        return ParamMatrix([[e.subs(mapping) for e in r] for r in self.entries])

    def __repr__(self):
        return f"ParamMatrix({[[str(e) for e in r] for r in self.entries]})"


def rat_times_param(a: RationalMatrix, b: ParamMatrix) -> ParamMatrix:
    """Product of a rational matrix and a ParamMatrix."""
    if a.cols != b.rows:
        raise MorganError("dimension mismatch")
    out = []
    for i in range(a.rows):
        row = []
        for j in range(b.cols):
            acc = LinearForm.zero()
            for k in range(a.cols):
                c = a[i, k]
                if c != 0:
                    acc = acc + b[k, j] * c
            row.append(acc)
        out.append(row)
    return ParamMatrix(out)


class FormPoly:
    """Polynomial in s whose coefficients are LinearForms."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs=()):
        cs = [
            c if isinstance(c, LinearForm) else LinearForm.of_const(c)
            for c in coeffs
        ]
        while cs and cs[-1].is_zero():
            cs.pop()
        object.__setattr__(self, "coeffs", tuple(cs))

    def __setattr__(self, *a):
        raise AttributeError("FormPoly is immutable")

    def coeff(self, k) -> LinearForm:
        return self.coeffs[k] if 0 <= k < len(self.coeffs) else LinearForm.zero()

    @property
    def structural_degree(self):
        """Highest s-power with a not-identically-zero coefficient form; -1 if none."""
        return len(self.coeffs) - 1

    def is_zero(self):
        return not self.coeffs

    def shift(self, k: int) -> "FormPoly":
        if self.is_zero() or k == 0:
            return self
        return FormPoly([LinearForm.zero()] * k + list(self.coeffs))

    def subs(self, mapping) -> "FormPoly":
        return FormPoly([c.subs(mapping) for c in self.coeffs])

    def eval_poly(self, assignment) -> Poly:
        return Poly([c.eval(assignment) for c in self.coeffs])

    def __eq__(self, other):
        return isinstance(other, FormPoly) and self.coeffs == other.coeffs

    def __repr__(self):
        return f"FormPoly({[str(c) for c in self.coeffs]})"


class ParamPolyMatrix:
    """Immutable dense matrix of FormPoly entries."""

    __slots__ = ("entries",)

    def __init__(self, entries):
        rows = tuple(tuple(row) for row in entries)
        if rows:
            w = len(rows[0])
            if any(len(r) != w for r in rows):
                raise MorganError("ragged matrix")
        object.__setattr__(self, "entries", rows)

    def __setattr__(self, *a):
        raise AttributeError("ParamPolyMatrix is immutable")

    @property
    def rows(self):
        return len(self.entries)

    @property
    def cols(self):
        return len(self.entries[0]) if self.entries else 0

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    def subs(self, mapping) -> "ParamPolyMatrix":
        return ParamPolyMatrix(
            [[e.subs(mapping) for e in r] for r in self.entries]
        )

    def row_degree(self, i):
        """Max structural degree over row i (-1 when the row is identically zero)."""
        return max(e.structural_degree for e in self.entries[i])

    def row_coeffs(self, i, d):
        return [e.coeff(d) for e in self.entries[i]]


class ConstraintSet:
    """Triangular substitutions ParamId -> LinearForm with idempotent closure.

    Substituted parameters never appear on any right-hand side, so applying
    the set twice equals applying it once.
    """

    __slots__ = ("subs_map", "order")

    def __init__(self, subs_map: dict, order: tuple):
        object.__setattr__(self, "subs_map", dict(subs_map))
        object.__setattr__(self, "order", tuple(order))

    def __setattr__(self, *a):
        raise AttributeError("ConstraintSet is immutable")

    @staticmethod
    def empty() -> "ConstraintSet":
        return ConstraintSet({}, ())

    def __len__(self):
        return len(self.order)

    def __eq__(self, other):
        return isinstance(other, ConstraintSet) and self.subs_map == other.subs_map

    def is_empty(self):
        return not self.order

    def apply_form(self, f: LinearForm) -> LinearForm:
        return f.subs(self.subs_map)

    def apply(self, m):
        """Apply to a ParamMatrix or ParamPolyMatrix."""
        return m.subs(self.subs_map)

    def items(self):
        return [(p, self.subs_map[p]) for p in self.order]

    def describe(self):
        return [f"{p} = {self.subs_map[p]}" for p in self.order]

    def __repr__(self):
        return f"ConstraintSet({self.describe()})"


def solve_zero_constraints(forms) -> ConstraintSet:
    """Triangular substitution set making every listed form identically zero.

    Pivots are chosen as the smallest ParamId (lexicographic on
    (namespace, i, j, k)) present in each reduced form, so the result is
    deterministic.  Raises Inconsistent for a nonzero constant form.
    """
    subs_map: dict[ParamId, LinearForm] = {}
    order: list[ParamId] = []
    for f in forms:
        g = f.subs(subs_map)
        if g.is_zero():
            continue
        if g.is_constant():
            raise Inconsistent(f"constraint {f} reduces to {g.const} = 0")
        pivot, pc = g.terms[0]
        rest = LinearForm(g.const, g.terms[1:])
        rep = rest * (Fraction(-1) / pc)
        # keep closure: eliminate the new pivot from existing substitutions
        one_step = {pivot: rep}
        for p in order:
            subs_map[p] = subs_map[p].subs(one_step)
        subs_map[pivot] = rep
        order.append(pivot)
    return ConstraintSet(subs_map, order)


def structural_dependency(rows):
    """Smallest r with row r a rational combination of rows 0..r-1 identically.

    Each row is a sequence of LinearForms.  Returns (r, coeffs) where
    coeffs[k] multiplies row k, or None when all rows are independent.
    The witness is verified exactly by LinearForm arithmetic.
    """
    rows = [tuple(r) for r in rows]
    if not rows:
        return None
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise MorganError("rows have different lengths")
    # basis of the coefficient space: constant slot + one slot per parameter
    params = sorted({p for r in rows for f in r for p in f.params()})
    pidx = {p: k for k, p in enumerate(params)}
    ncols = width * (1 + len(params))

    def flatten(row):
        v = [Fraction(0)] * ncols
        for j, f in enumerate(row):
            base = j * (1 + len(params))
            v[base] = f.const
            for p, c in f.terms:
                v[base + 1 + pidx[p]] = c
        return v

    seen: list[list[Fraction]] = []  # stacked flattened rows, for solving
    for r, row in enumerate(rows):
        v = flatten(row)
        if seen:
            mat = RationalMatrix(seen).transpose()
            sol = mat.solve(v)
            if sol is not None:
                # exact verification of the witness
                combo = [LinearForm.zero()] * width
                for k, ck in enumerate(sol):
                    if ck != 0:
                        combo = [a + rows[k][j] * ck for j, a in enumerate(combo)]
                if all((row[j] - combo[j]).is_zero() for j in range(width)):
                    return r, tuple(sol)
                raise MorganError("dependency witness failed verification (bug)")
        if all(x == 0 for x in v):
            return r, tuple(Fraction(0) for _ in range(r))
        seen.append(v)
    return None


SAMPLE_BOUND = 10**6  # random evaluations drawn from [-SAMPLE_BOUND, SAMPLE_BOUND]


def generic_rank(m: ParamMatrix, rng, repetitions: int = 3) -> int:
    """Rank of m for generic parameter values (randomized, Schwartz-Zippel).

    Evaluates all parameters at independent random integers and takes the
    maximum exact rank over the repetitions.  Minors are polynomials of degree
    <= min(rows, cols) in the parameters, so the per-trial failure probability
    is at most min(rows, cols) / (2 * SAMPLE_BOUND + 1).
    """
    if m.rows == 0 or m.cols == 0:
        return 0
    params = m.params()
    best = 0
    for _ in range(repetitions):
        assignment = {p: Fraction(rng.randint(-SAMPLE_BOUND, SAMPLE_BOUND)) for p in params}
        best = max(best, instantiate(m, assignment).rank())
        if best == min(m.rows, m.cols):
            break
    return best


def instantiate(m, assignment: dict):
    """Evaluate a ParamMatrix / ParamPolyMatrix / LinearForm at an assignment."""
    from .exactalg import PolyMatrix

    if isinstance(m, LinearForm):
        return m.eval(assignment)
    if isinstance(m, ParamMatrix):
        return RationalMatrix(
            [[e.eval(assignment) for e in r] for r in m.entries]
        )
    if isinstance(m, ParamPolyMatrix):
        return PolyMatrix(
            [[e.eval_poly(assignment) for e in r] for r in m.entries]
        )
    raise TypeError(f"cannot instantiate {type(m).__name__}")
