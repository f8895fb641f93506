"""Exact rational arithmetic: polynomials and matrices over Q.

Everything here is immutable and pure.  Scalars are `fractions.Fraction`
(always normalized: positive denominator, gcd(num, den) = 1), so every
comparison in the package is exact with zero tolerance.
"""

from __future__ import annotations

import re
from fractions import Fraction

from .errors import DegreeExceeded, MorganError

Rational = Fraction

NEG_INF = float("-inf")  # degree of the zero polynomial


def rat(x) -> Fraction:
    """Coerce int / Fraction / 'p/q' string to a Fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"cannot interpret {x!r} as a rational number")


# ---------------------------------------------------------------------------
# polynomials


class Poly:
    """Univariate polynomial in s with Fraction coefficients, ascending order."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs=()):
        cs = [rat(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        object.__setattr__(self, "coeffs", tuple(cs))

    def __setattr__(self, *a):
        raise AttributeError("Poly is immutable")

    @staticmethod
    def zero() -> "Poly":
        return Poly(())

    @staticmethod
    def one() -> "Poly":
        return Poly((1,))

    @staticmethod
    def s(power: int = 1) -> "Poly":
        return Poly([0] * power + [1])

    @staticmethod
    def constant(c) -> "Poly":
        return Poly((rat(c),))

    @property
    def degree(self):
        """Degree; NEG_INF for the zero polynomial (never a stored index)."""
        return len(self.coeffs) - 1 if self.coeffs else NEG_INF

    def is_zero(self) -> bool:
        return not self.coeffs

    def coeff(self, k: int) -> Fraction:
        return self.coeffs[k] if 0 <= k < len(self.coeffs) else Fraction(0)

    def leading(self) -> Fraction:
        if not self.coeffs:
            return Fraction(0)
        return self.coeffs[-1]

    def __eq__(self, other):
        return isinstance(other, Poly) and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __add__(self, other: "Poly") -> "Poly":
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for i, c in enumerate(b):
            out[i] += c
        return Poly(out)

    def __neg__(self) -> "Poly":
        return Poly([-c for c in self.coeffs])

    def __sub__(self, other: "Poly") -> "Poly":
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return Poly([c * other for c in self.coeffs])
        if not isinstance(other, Poly):
            return NotImplemented
        if self.is_zero() or other.is_zero():
            return Poly.zero()
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a == 0:
                continue
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return Poly(out)

    __rmul__ = __mul__

    def shift(self, k: int) -> "Poly":
        """Multiply by s^k."""
        if self.is_zero() or k == 0:
            return self
        return Poly([Fraction(0)] * k + list(self.coeffs))

    def divmod(self, other: "Poly"):
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        q = Poly.zero()
        r = self
        d = other.degree
        lead = other.leading()
        while not r.is_zero() and r.degree >= d:
            k = r.degree - d
            c = r.leading() / lead
            q = q + Poly([0] * k + [c])
            r = r - other * Poly([0] * k + [c])
        return q, r

    def __floordiv__(self, other: "Poly") -> "Poly":
        return self.divmod(other)[0]

    def __mod__(self, other: "Poly") -> "Poly":
        return self.divmod(other)[1]

    def monic(self) -> "Poly":
        if self.is_zero():
            return self
        return self * (1 / self.leading())

    def eval(self, x) -> Fraction:
        x = rat(x)
        acc = Fraction(0)
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def eval_matrix(self, a: "RationalMatrix") -> "RationalMatrix":
        """p(A) for a square matrix A (Horner)."""
        n = a.rows
        acc = RationalMatrix.zeros(n, n)
        for c in reversed(self.coeffs):
            acc = acc * a + RationalMatrix.identity(n) * c
        return acc

    def __repr__(self):
        return f"Poly({format_poly(self)!r})"

    def __str__(self):
        return format_poly(self)


def poly_gcd(a: Poly, b: Poly) -> Poly:
    """Monic greatest common divisor."""
    if a.is_zero() and b.is_zero():
        raise MorganError("gcd of two zero polynomials is undefined")
    while not b.is_zero():
        a, b = b, a % b
    return a.monic()


_TERM_RE = re.compile(
    r"""^(?P<sign>[+-])?(?P<coef>\d+(?:/\d+)?)?\*?(?P<var>s(?:\^(?P<pow>\d+))?)?$"""
)


def parse_poly(text: str) -> Poly:
    """Parse strings like 's^4+2s-3', '-s + 5/2', '7'."""
    s = text.replace(" ", "")
    if not s:
        raise MorganError("empty polynomial string")
    # split into signed terms
    terms = re.findall(r"[+-]?[^+-]+", s)
    if "".join(terms) != s:
        raise MorganError(f"cannot parse polynomial {text!r}")
    coeffs: dict[int, Fraction] = {}
    for term in terms:
        m = _TERM_RE.match(term)
        if not m or (m.group("coef") is None and m.group("var") is None):
            raise MorganError(f"cannot parse term {term!r} of {text!r}")
        c = Fraction(m.group("coef")) if m.group("coef") else Fraction(1)
        if m.group("sign") == "-":
            c = -c
        if m.group("var") is None:
            p = 0
        else:
            p = int(m.group("pow") or 1)
        coeffs[p] = coeffs.get(p, Fraction(0)) + c
    out = [Fraction(0)] * (max(coeffs) + 1)
    for p, c in coeffs.items():
        out[p] = c
    return Poly(out)


def format_poly(p: Poly) -> str:
    """Human form, descending powers: 's^4+2s-3'."""
    if p.is_zero():
        return "0"
    parts = []
    for k in range(len(p.coeffs) - 1, -1, -1):
        c = p.coeffs[k]
        if c == 0:
            continue
        sign = "-" if c < 0 else ("+" if parts else "")
        mag = abs(c)
        if k == 0:
            body = str(mag)
        else:
            var = "s" if k == 1 else f"s^{k}"
            body = var if mag == 1 else f"{mag}{var}"
        parts.append(sign + body)
    return "".join(parts)


# ---------------------------------------------------------------------------
# rational matrices


class RationalMatrix:
    """Immutable dense matrix of Fractions."""

    __slots__ = ("entries",)

    def __init__(self, entries):
        rows = tuple(tuple(rat(x) for x in row) for row in entries)
        if rows:
            w = len(rows[0])
            if any(len(r) != w for r in rows):
                raise MorganError("ragged matrix")
        object.__setattr__(self, "entries", rows)

    def __setattr__(self, *a):
        raise AttributeError("RationalMatrix is immutable")

    @property
    def rows(self) -> int:
        return len(self.entries)

    @property
    def cols(self) -> int:
        return len(self.entries[0]) if self.entries else 0

    @staticmethod
    def identity(n: int) -> "RationalMatrix":
        return RationalMatrix(
            [[1 if i == j else 0 for j in range(n)] for i in range(n)]
        )

    @staticmethod
    def zeros(r: int, c: int) -> "RationalMatrix":
        return RationalMatrix([[0] * c for _ in range(r)])

    @staticmethod
    def from_columns(cols) -> "RationalMatrix":
        cols = [list(c) for c in cols]
        return RationalMatrix(
            [[cols[j][i] for j in range(len(cols))] for i in range(len(cols[0]))]
        )

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    def row(self, i) -> tuple:
        return self.entries[i]

    def col(self, j) -> tuple:
        return tuple(r[j] for r in self.entries)

    def __eq__(self, other):
        return isinstance(other, RationalMatrix) and self.entries == other.entries

    def __hash__(self):
        return hash(self.entries)

    def __add__(self, other):
        return RationalMatrix(
            [
                [a + b for a, b in zip(ra, rb)]
                for ra, rb in zip(self.entries, other.entries)
            ]
        )

    def __sub__(self, other):
        return RationalMatrix(
            [
                [a - b for a, b in zip(ra, rb)]
                for ra, rb in zip(self.entries, other.entries)
            ]
        )

    def __neg__(self):
        return RationalMatrix([[-a for a in r] for r in self.entries])

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return RationalMatrix([[a * other for a in r] for r in self.entries])
        if not isinstance(other, RationalMatrix):
            return NotImplemented
        if self.cols != other.rows:
            raise MorganError(
                f"dimension mismatch {self.rows}x{self.cols} * {other.rows}x{other.cols}"
            )
        bt = list(zip(*other.entries)) if other.entries else []
        return RationalMatrix(
            [
                [sum(a * b for a, b in zip(row, col)) for col in bt]
                for row in self.entries
            ]
        )

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self * other
        return NotImplemented

    def transpose(self) -> "RationalMatrix":
        return RationalMatrix(list(zip(*self.entries)) if self.entries else [])

    def hstack(self, other: "RationalMatrix") -> "RationalMatrix":
        return RationalMatrix(
            [list(a) + list(b) for a, b in zip(self.entries, other.entries)]
        )

    def vstack(self, other: "RationalMatrix") -> "RationalMatrix":
        return RationalMatrix(list(self.entries) + list(other.entries))

    def submatrix(self, row_idx, col_idx) -> "RationalMatrix":
        return RationalMatrix(
            [[self.entries[i][j] for j in col_idx] for i in row_idx]
        )

    def is_zero(self) -> bool:
        return all(x == 0 for r in self.entries for x in r)

    def trace(self) -> Fraction:
        return sum(self.entries[i][i] for i in range(self.rows))

    def mul_vector(self, v) -> tuple:
        return tuple(sum(a * b for a, b in zip(row, v)) for row in self.entries)

    # -- elimination-based operations ---------------------------------------

    def _echelon(self):
        """Row echelon form; returns (rows, pivot column list)."""
        m = [list(r) for r in self.entries]
        pivots = []
        r = 0
        for c in range(self.cols):
            pr = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
            if pr is None:
                continue
            m[r], m[pr] = m[pr], m[r]
            pv = m[r][c]
            m[r] = [x / pv for x in m[r]]
            for i in range(len(m)):
                if i != r and m[i][c] != 0:
                    f = m[i][c]
                    m[i] = [x - f * y for x, y in zip(m[i], m[r])]
            pivots.append(c)
            r += 1
            if r == len(m):
                break
        return m, pivots

    def rank(self) -> int:
        return len(self._echelon()[1])

    def inverse(self) -> "RationalMatrix":
        n = self.rows
        if n != self.cols:
            raise MorganError("inverse of a nonsquare matrix")
        aug = RationalMatrix(
            [list(r) + list(RationalMatrix.identity(n).entries[i]) for i, r in enumerate(self.entries)]
        )
        m, pivots = aug._echelon()
        if len(pivots) < n or pivots[:n] != list(range(n)):
            raise MorganError("matrix is singular")
        return RationalMatrix([row[n:] for row in m[:n]])

    def solve(self, rhs):
        """One solution x of self * x = rhs (vector), or None if inconsistent."""
        aug = RationalMatrix([list(r) + [v] for r, v in zip(self.entries, rhs)])
        m, pivots = aug._echelon()
        # inconsistent iff a pivot lands in the rhs column
        if self.cols in pivots:
            return None
        x = [Fraction(0)] * self.cols
        for r, c in enumerate(pivots):
            x[c] = m[r][-1]
        return tuple(x)

    def nullspace(self):
        """Canonical basis of the right null space (free-variable columns)."""
        m, pivots = self._echelon()
        piv_set = set(pivots)
        free = [c for c in range(self.cols) if c not in piv_set]
        basis = []
        for fc in free:
            v = [Fraction(0)] * self.cols
            v[fc] = Fraction(1)
            for r, c in enumerate(pivots):
                v[c] = -m[r][fc]
            basis.append(tuple(v))
        return basis

    def column_space_pivots(self):
        """Indices of a maximal independent column set (leftmost choice)."""
        return self._echelon()[1]

    def __repr__(self):
        return f"RationalMatrix({[list(map(str, r)) for r in self.entries]})"


def rank(m: RationalMatrix) -> int:
    """Exact rank over Q."""
    return m.rank()


# ---------------------------------------------------------------------------
# polynomial matrices


class PolyMatrix:
    """Immutable dense matrix of Poly entries."""

    __slots__ = ("entries",)

    def __init__(self, entries):
        rows = tuple(
            tuple(e if isinstance(e, Poly) else Poly.constant(e) for e in row)
            for row in entries
        )
        if rows:
            w = len(rows[0])
            if any(len(r) != w for r in rows):
                raise MorganError("ragged matrix")
        object.__setattr__(self, "entries", rows)

    def __setattr__(self, *a):
        raise AttributeError("PolyMatrix is immutable")

    @property
    def rows(self):
        return len(self.entries)

    @property
    def cols(self):
        return len(self.entries[0]) if self.entries else 0

    @staticmethod
    def from_rational(m: RationalMatrix) -> "PolyMatrix":
        return PolyMatrix([[Poly.constant(x) for x in r] for r in m.entries])

    @staticmethod
    def zeros(r, c) -> "PolyMatrix":
        return PolyMatrix([[Poly.zero()] * c for _ in range(r)])

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    def __eq__(self, other):
        return isinstance(other, PolyMatrix) and self.entries == other.entries

    def __add__(self, other):
        return PolyMatrix(
            [[a + b for a, b in zip(ra, rb)] for ra, rb in zip(self.entries, other.entries)]
        )

    def __sub__(self, other):
        return PolyMatrix(
            [[a - b for a, b in zip(ra, rb)] for ra, rb in zip(self.entries, other.entries)]
        )

    def __mul__(self, other):
        if isinstance(other, RationalMatrix):
            other = PolyMatrix.from_rational(other)
        elif isinstance(other, (Poly, int, Fraction)):
            p = other if isinstance(other, Poly) else Poly.constant(other)
            return PolyMatrix([[e * p for e in r] for r in self.entries])
        if not isinstance(other, PolyMatrix):
            return NotImplemented
        if self.rows == 0:
            return PolyMatrix([])
        if self.cols != other.rows:
            raise MorganError("dimension mismatch in PolyMatrix product")
        bt = list(zip(*other.entries)) if other.entries else []
        out = []
        for row in self.entries:
            out.append(
                [
                    sum((a * b for a, b in zip(row, col)), Poly.zero())
                    for col in bt
                ]
            )
        return PolyMatrix(out)

    def __rmul__(self, other):
        if isinstance(other, RationalMatrix):
            return PolyMatrix.from_rational(other) * self
        return NotImplemented

    def is_zero(self) -> bool:
        return all(e.is_zero() for r in self.entries for e in r)

    def vstack(self, other):
        return PolyMatrix(list(self.entries) + list(other.entries))

    def permute_rows(self, perm) -> "PolyMatrix":
        """Row i of the result is row perm[i] of self."""
        return PolyMatrix([self.entries[p] for p in perm])

    def __repr__(self):
        return f"PolyMatrix({[[str(e) for e in r] for r in self.entries]})"


def s_identity_minus(a: RationalMatrix) -> PolyMatrix:
    """sI - A as a PolyMatrix."""
    n = a.rows
    return PolyMatrix(
        [
            [
                Poly([-a[i, j], 1]) if i == j else Poly.constant(-a[i, j])
                for j in range(n)
            ]
            for i in range(n)
        ]
    )


def high_row_coeff(m: PolyMatrix, row_degrees) -> RationalMatrix:
    """Row highest-order coefficient matrix at the declared row degrees.

    Entry (i, j) is the coefficient of s^row_degrees[i] in m[i, j]; raises
    DegreeExceeded if any entry's degree is above its declared row degree.
    """
    if len(row_degrees) != m.rows:
        raise MorganError("row_degrees length mismatch")
    out = []
    for i, d in enumerate(row_degrees):
        for j in range(m.cols):
            if m[i, j].degree > d:
                raise DegreeExceeded(
                    f"entry ({i},{j}) has degree {m[i, j].degree} > declared {d}"
                )
        out.append([m[i, j].coeff(d) for j in range(m.cols)])
    return RationalMatrix(out)


def high_col_coeff(m: PolyMatrix, col_degrees) -> RationalMatrix:
    """Column analogue of high_row_coeff."""
    if len(col_degrees) != m.cols:
        raise MorganError("col_degrees length mismatch")
    for j, d in enumerate(col_degrees):
        for i in range(m.rows):
            if m[i, j].degree > d:
                raise DegreeExceeded(
                    f"entry ({i},{j}) has degree {m[i, j].degree} > declared {d}"
                )
    return RationalMatrix(
        [
            [m[i, j].coeff(col_degrees[j]) for j in range(m.cols)]
            for i in range(m.rows)
        ]
    )


RESOLVENT_SIZE_CAP = 64  # guard against accidental blow-up; problem scale here is n <= 9


def resolvent(a: RationalMatrix, size_cap: int | None = None):
    """(adjugate of sI-A, characteristic polynomial) via Faddeev-LeVerrier.

    Satisfies adj(s) * (sI - A) = charpoly(s) * I identically; charpoly monic.
    size_cap overrides the default guard of RESOLVENT_SIZE_CAP.
    """
    n = a.rows
    cap = RESOLVENT_SIZE_CAP if size_cap is None else size_cap
    if n != a.cols:
        raise MorganError("resolvent needs a square matrix")
    if n > cap:
        raise MorganError(f"resolvent size cap exceeded ({n} > {cap})")
    ident = RationalMatrix.identity(n)
    coeffs = [Fraction(0)] * n + [Fraction(1)]  # charpoly, ascending
    mats = [ident]  # M_0
    m = ident
    for k in range(1, n + 1):
        am = a * m
        c = -am.trace() / k
        coeffs[n - k] = c
        m = am + ident * c
        if k < n:
            mats.append(m)
    charpoly = Poly(coeffs)
    # adjugate(s) = sum_k M_k s^{n-1-k}
    adj = PolyMatrix(
        [
            [
                Poly([mats[n - 1 - p][i, j] for p in range(n)])
                for j in range(n)
            ]
            for i in range(n)
        ]
    )
    return adj, charpoly


def transfer_function(a, b, c, f=None, g=None):
    """Exact closed-loop transfer function C (sI - A - BF)^(-1) B G.

    Returns a matrix (list of lists) of (numerator, denominator) Poly pairs in
    lowest terms with monic denominators.  F defaults to 0, G to the identity.
    """
    n = a.rows
    if f is None:
        f = RationalMatrix.zeros(b.cols, n)
    if g is None:
        g = RationalMatrix.identity(b.cols)
    acl = a + b * f
    adj, chi = resolvent(acl)
    num = PolyMatrix.from_rational(c) * adj * PolyMatrix.from_rational(b * g)
    out = []
    for i in range(num.rows):
        row = []
        for j in range(num.cols):
            p = num[i, j]
            if p.is_zero():
                row.append((Poly.zero(), Poly.one()))
                continue
            d = poly_gcd(p, chi)
            pn = (p.divmod(d))[0]
            pd = (chi.divmod(d))[0]
            lead = pd.leading()
            row.append((pn * (1 / lead), pd.monic()))
        out.append(row)
    return out


def det(m: PolyMatrix) -> Poly:
    """Exact determinant of a square PolyMatrix (fraction-free Bareiss)."""
    n = m.rows
    if n != m.cols:
        raise MorganError("determinant of a nonsquare matrix")
    if n == 0:
        return Poly.one()
    a = [[m[i, j] for j in range(n)] for i in range(n)]
    sign = 1
    prev = Poly.one()
    for k in range(n - 1):
        if a[k][k].is_zero():
            pr = next((i for i in range(k + 1, n) if not a[i][k].is_zero()), None)
            if pr is None:
                return Poly.zero()
            a[k], a[pr] = a[pr], a[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                num = a[i][j] * a[k][k] - a[i][k] * a[k][j]
                q, r = num.divmod(prev)
                if not r.is_zero():
                    raise MorganError("Bareiss division not exact (bug)")
                a[i][j] = q
        prev = a[k][k]
    d = a[n - 1][n - 1]
    return d if sign == 1 else -d


def det_rational(m: RationalMatrix) -> Fraction:
    """Exact determinant of a square rational matrix."""
    n = m.rows
    if n != m.cols:
        raise MorganError("determinant of a nonsquare matrix")
    a = [list(r) for r in m.entries]
    d = Fraction(1)
    for k in range(n):
        pr = next((i for i in range(k, n) if a[i][k] != 0), None)
        if pr is None:
            return Fraction(0)
        if pr != k:
            a[k], a[pr] = a[pr], a[k]
            d = -d
        d *= a[k][k]
        inv = 1 / a[k][k]
        for i in range(k + 1, n):
            if a[i][k] != 0:
                fmul = a[i][k] * inv
                a[i] = [x - fmul * y for x, y in zip(a[i], a[k])]
    return d
