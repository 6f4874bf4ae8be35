"""Truncated p-adic scalars and precision-certified linear algebra over a DVR.

A ``PadicScalar`` stores ``p**(-m) * (mantissa + O(p**N))``. Every operation
derives the precision of its result from the precisions of its inputs, so a
valuation reported as an ``int`` is always exact, and anything that may have
been swallowed by truncation comes back as ``AtLeast``.

The matrix routines are written against a tiny duck-typed protocol so they
run unchanged over Z_p (``PadicScalar``) and over the integers of a tower
field (``TowerElement``):

* elements: ``+``, ``-``, ``*``, unary ``-``, ``valuation()``, ``inverse()``
* ring: ``zero()``, ``one()``, ``uniformizer_power(k)``
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple, Union

from .errors import (
    InvalidData,
    NotInvertibleToPrecision,
    PrecisionExhausted,
    PrimeMismatch,
)


@dataclass(frozen=True, order=True)
class AtLeast:
    """Lower bound for a valuation that truncation could not pin down."""

    bound: int

    def __repr__(self):
        return f"AtLeast({self.bound})"


Valuation = Union[int, AtLeast]


def vp_int(x: int, p: int) -> int:
    """Valuation of a nonzero integer."""
    if x == 0:
        raise ValueError("vp_int of zero")
    v = 0
    while x % p == 0:
        x //= p
        v += 1
    return v


def vp_capped(x: int, p: int, cap: int) -> int:
    """Valuation of ``x`` capped at ``cap``; zero counts as ``cap``."""
    if x == 0:
        return cap
    v = 0
    while v < cap and x % p == 0:
        x //= p
        v += 1
    return v


class PadicScalar:
    """Element of Q_p known to a finite number of p-adic digits."""

    __slots__ = ("p", "N", "m", "mantissa")

    def __init__(self, p: int, N: int, m: int, mantissa: int):
        if p < 2:
            raise ValueError("p must be at least 2")
        if N < 0 or m < 0:
            raise ValueError("precision and denominator exponent must be non-negative")
        if m > N:
            raise PrecisionExhausted(
                f"denominator exponent {m} exceeds precision {N}: no digits left"
            )
        mod = p**N
        mantissa %= mod
        if m > 0:
            if mantissa == 0:
                N, m = N - m, 0
            else:
                k = min(m, vp_int(mantissa, p))
                if k:
                    mantissa //= p**k
                    N -= k
                    m -= k
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "N", N)
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "mantissa", mantissa)

    def __setattr__(self, name, value):
        raise AttributeError("PadicScalar is immutable")

    # construction helpers

    @classmethod
    def from_int(cls, p: int, x: int, N: int) -> "PadicScalar":
        return cls(p, N, 0, x)

    @classmethod
    def from_fraction(cls, p: int, q, N: int) -> "PadicScalar":
        q = Fraction(q)
        num, den = q.numerator, q.denominator
        m = 0
        while den % p == 0:
            den //= p
            m += 1
        mod = p ** (N + m)
        return cls(p, N + m, m, num * pow(den, -1, mod))

    @classmethod
    def zero(cls, p: int, N: int) -> "PadicScalar":
        return cls(p, N, 0, 0)

    @classmethod
    def one(cls, p: int, N: int) -> "PadicScalar":
        return cls(p, N, 0, 1)

    @classmethod
    def uniformizer_pow(cls, p: int, k: int, N: int) -> "PadicScalar":
        """Exact ``p**k`` for any integer ``k`` (at relative precision N)."""
        if k >= 0:
            return cls(p, N + k, 0, p**k)
        return cls(p, N, -k, 1)

    # arithmetic

    def _check(self, other: "PadicScalar"):
        if other.p != self.p:
            raise PrimeMismatch(f"cannot combine {self.p}-adic and {other.p}-adic values")

    def _mant_val(self) -> int:
        return vp_capped(self.mantissa, self.p, self.N)

    def __add__(self, other):
        if isinstance(other, int):
            other = PadicScalar.from_int(self.p, other, self.N + self.m)
        self._check(other)
        p = self.p
        m = max(self.m, other.m)
        s1, s2 = m - self.m, m - other.m
        N = min(self.N + s1, other.N + s2)
        return PadicScalar(p, N, m, self.mantissa * p**s1 + other.mantissa * p**s2)

    __radd__ = __add__

    def __neg__(self):
        return PadicScalar(self.p, self.N, self.m, -self.mantissa)

    def __sub__(self, other):
        if isinstance(other, int):
            other = PadicScalar.from_int(self.p, other, self.N + self.m)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, int):
            other = PadicScalar.from_int(self.p, other, self.N + self.m)
        self._check(other)
        N = min(self.N + other._mant_val(), other.N + self._mant_val())
        return PadicScalar(self.p, N, self.m + other.m, self.mantissa * other.mantissa)

    __rmul__ = __mul__

    def inverse(self) -> "PadicScalar":
        p = self.p
        v = self._mant_val()
        if v >= self.N:
            raise NotInvertibleToPrecision("value is zero to the available precision")
        unit = self.mantissa // p**v
        rel = self.N - v
        uinv = pow(unit, -1, p**rel)
        shift = self.m - v
        if shift >= 0:
            return PadicScalar(p, rel + shift, 0, uinv * p**shift)
        return PadicScalar(p, rel, -shift, uinv)

    inv = inverse

    def __truediv__(self, other):
        if isinstance(other, int):
            other = PadicScalar.from_int(self.p, other, self.N + self.m)
        return self * other.inverse()

    # inspection

    def valuation(self) -> Valuation:
        if self.mantissa == 0:
            return AtLeast(self.N - self.m)
        return vp_int(self.mantissa, self.p) - self.m

    def is_zero(self) -> bool:
        return self.mantissa == 0

    def absolute_precision(self) -> int:
        """The value is known modulo ``p**absolute_precision()``."""
        return self.N - self.m

    def agrees_with(self, other) -> bool:
        """Equality of represented values modulo the coarser precision."""
        if isinstance(other, (int, Fraction)):
            other = PadicScalar.from_fraction(self.p, other, self.N + self.m + 1)
        self._check(other)
        return (self - other).is_zero()

    def to_fraction(self) -> Fraction:
        return Fraction(self.mantissa, self.p**self.m)

    def lift(self) -> int:
        """Integer representative of an integral value."""
        if self.m:
            raise ValueError("value is not integral")
        return self.mantissa

    def __eq__(self, other):
        if not isinstance(other, PadicScalar):
            return NotImplemented
        return (self.p, self.N, self.m, self.mantissa) == (
            other.p,
            other.N,
            other.m,
            other.mantissa,
        )

    def __hash__(self):
        return hash((self.p, self.N, self.m, self.mantissa))

    def __repr__(self):
        if self.m:
            return f"PadicScalar({self.p}^-{self.m}*{self.mantissa} + O({self.p}^{self.N - self.m}))"
        return f"PadicScalar({self.mantissa} + O({self.p}^{self.N}))"


class ZpRing:
    """Ring handle for Z_p at a nominal precision, used by the matrix code."""

    def __init__(self, p: int, N: int):
        self.p = p
        self.N = N

    def zero(self) -> PadicScalar:
        return PadicScalar.zero(self.p, self.N)

    def one(self) -> PadicScalar:
        return PadicScalar.one(self.p, self.N)

    def uniformizer_power(self, k: int) -> PadicScalar:
        return PadicScalar.uniformizer_pow(self.p, k, self.N)

    def embed(self, x: int) -> PadicScalar:
        return PadicScalar.from_int(self.p, x, self.N)


class ScalarMatrix:
    """Rectangular matrix of ``PadicScalar`` entries over one prime."""

    def __init__(self, p: int, N: int, entries: Sequence[Sequence[PadicScalar]]):
        rows = [tuple(r) for r in entries]
        if rows:
            width = len(rows[0])
            if any(len(r) != width for r in rows):
                raise ValueError("ragged matrix")
        for r in rows:
            for x in r:
                if x.p != p:
                    raise PrimeMismatch("matrix entry over a different prime")
        self.p = p
        self.N = N
        self.entries: Tuple[Tuple[PadicScalar, ...], ...] = tuple(rows)

    @classmethod
    def from_ints(cls, p: int, N: int, rows) -> "ScalarMatrix":
        return cls(p, N, [[PadicScalar.from_int(p, x, N) for x in r] for r in rows])

    @classmethod
    def identity(cls, p: int, N: int, n: int) -> "ScalarMatrix":
        return cls.from_ints(p, N, [[int(i == j) for j in range(n)] for i in range(n)])

    @property
    def rows(self) -> int:
        return len(self.entries)

    @property
    def cols(self) -> int:
        return len(self.entries[0]) if self.entries else 0

    @property
    def ring(self) -> ZpRing:
        return ZpRing(self.p, self.N)

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    def __matmul__(self, other: "ScalarMatrix") -> "ScalarMatrix":
        return ScalarMatrix(
            self.p, min(self.N, other.N), matmul(self.entries, other.entries, self.ring)
        )

    def tolist(self) -> List[List[PadicScalar]]:
        return [list(r) for r in self.entries]


# generic linear algebra over a discrete valuation ring


def matmul(A, B, ring):
    n, k, m = len(A), len(B), len(B[0]) if B else 0
    out = []
    for i in range(n):
        row = []
        for j in range(m):
            acc = ring.zero()
            for t in range(k):
                acc = acc + A[i][t] * B[t][j]
            row.append(acc)
        out.append(row)
    return out


def _rows_and_ring(M, ring):
    if isinstance(M, ScalarMatrix):
        return M.tolist(), ring or M.ring
    if ring is None:
        raise ValueError("a ring handle is required for plain nested lists")
    return [list(r) for r in M], ring


def _min_pivot(A, r0, c0, rows, cols):
    """Certified minimal-valuation entry in A[r0:, c0:] and the smallest AtLeast bound."""
    best = None
    bound = None
    for i in range(r0, rows):
        row = A[i]
        for j in range(c0, cols):
            v = row[j].valuation()
            if isinstance(v, AtLeast):
                if bound is None or v.bound < bound:
                    bound = v.bound
            elif best is None or v < best[0]:
                best = (v, i, j)
    return best, bound


def det_valuation(M, ring=None) -> int:
    """Valuation of the determinant of a square matrix.

    Elimination uses the entry of minimal valuation as pivot (ties go to the
    lowest row, then column), so the Schur complements stay integral. Each
    pivot must carry a certified valuation that is strictly below every
    uncertified entry still in play; otherwise ``PrecisionExhausted``.
    """
    A, ring = _rows_and_ring(M, ring)
    n = len(A)
    if any(len(r) != n for r in A):
        raise ValueError("det_valuation needs a square matrix")
    total = 0
    for k in range(n):
        best, bound = _min_pivot(A, k, k, n, n)
        if best is None:
            raise PrecisionExhausted("determinant vanishes to the working precision")
        v, i, j = best
        if bound is not None and v >= bound:
            raise PrecisionExhausted(
                f"pivot valuation {v} not certified below truncated entries (>= {bound})"
            )
        A[k], A[i] = A[i], A[k]
        if j != k:
            for row in A:
                row[k], row[j] = row[j], row[k]
        pinv = A[k][k].inverse()
        for r in range(k + 1, n):
            if A[r][k].is_zero():
                continue
            f = A[r][k] * pinv
            pr = A[k]
            row = A[r]
            for c in range(k + 1, n):
                row[c] = row[c] - f * pr[c]
        total += v
    return total


@dataclass
class SmithForm:
    """Result of ``dvr_smith_form``: ``P*T*Q = S`` and ``T = U*S*V``.

    ``valuations`` holds the exponents of the diagonal of S in ascending
    order. ``rank_deficient`` is set when the rank to precision is smaller
    than the number of columns.
    """

    valuations: Tuple[int, ...]
    rank: int
    P: list
    Q: list
    U: list
    V: list
    rank_deficient: bool

    @property
    def index(self) -> int:
        return sum(self.valuations)


def _identity(ring, n):
    return [[ring.one() if i == j else ring.zero() for j in range(n)] for i in range(n)]


def dvr_smith_form(T, ring=None) -> SmithForm:
    """Smith normal form of an integral matrix over the valuation ring."""
    A, ring = _rows_and_ring(T, ring)
    nr = len(A)
    nc = len(A[0]) if nr else 0
    for row in A:
        for x in row:
            v = x.valuation()
            if isinstance(v, int) and v < 0:
                raise InvalidData("dvr_smith_form needs integral entries")
    P, U = _identity(ring, nr), _identity(ring, nr)
    Q, V = _identity(ring, nc), _identity(ring, nc)
    vals = []
    k = 0
    while k < min(nr, nc):
        best, bound = _min_pivot(A, k, k, nr, nc)
        if best is None:
            break
        s, i, j = best
        if bound is not None and s >= bound:
            raise PrecisionExhausted(
                f"Smith pivot valuation {s} not certified below truncated entries (>= {bound})"
            )
        # move pivot to (k, k)
        if i != k:
            A[k], A[i] = A[i], A[k]
            P[k], P[i] = P[i], P[k]
            for row in U:
                row[k], row[i] = row[i], row[k]
        if j != k:
            for row in A:
                row[k], row[j] = row[j], row[k]
            for row in Q:
                row[k], row[j] = row[j], row[k]
            V[k], V[j] = V[j], V[k]
        # normalise the pivot to exactly pi^s
        pis = ring.uniformizer_power(s)
        pinv = ring.uniformizer_power(-s)
        unit = A[k][k] * pinv
        uinv = unit.inverse()
        A[k] = [x * uinv for x in A[k]]
        A[k][k] = pis
        P[k] = [x * uinv for x in P[k]]
        for row in U:
            row[k] = row[k] * unit
        # clear the pivot column
        for r in range(nr):
            if r == k or A[r][k].is_zero():
                continue
            f = A[r][k] * pinv
            A[r] = [A[r][c] - f * A[k][c] for c in range(nc)]
            A[r][k] = ring.zero()
            P[r] = [P[r][c] - f * P[k][c] for c in range(nr)]
            for row in U:
                row[k] = row[k] + f * row[r]
        # clear the pivot row (only row k changes since column k is now clear)
        for c in range(nc):
            if c == k or A[k][c].is_zero():
                continue
            f = A[k][c] * pinv
            A[k][c] = ring.zero()
            for row in Q:
                row[c] = row[c] - f * row[k]
            V[k] = [V[k][t] + f * V[c][t] for t in range(nc)]
        vals.append(s)
        k += 1
    return SmithForm(
        valuations=tuple(vals),
        rank=len(vals),
        P=P,
        Q=Q,
        U=U,
        V=V,
        rank_deficient=len(vals) < nc,
    )


def solve(M, rhs, ring=None):
    """Solve ``M x = rhs`` for square nonsingular ``M`` over the fraction field."""
    A, ring = _rows_and_ring(M, ring)
    n = len(A)
    A = [list(A[i]) + [rhs[i]] for i in range(n)]
    perm = list(range(n))
    for k in range(n):
        best, bound = _min_pivot(A, k, k, n, n)
        if best is None:
            raise PrecisionExhausted("singular to the working precision")
        v, i, j = best
        if bound is not None and v >= bound:
            raise PrecisionExhausted("solve pivot not certified")
        A[k], A[i] = A[i], A[k]
        if j != k:
            for row in A:
                row[k], row[j] = row[j], row[k]
            perm[k], perm[j] = perm[j], perm[k]
        pinv = A[k][k].inverse()
        for r in range(k + 1, n):
            if A[r][k].is_zero():
                continue
            f = A[r][k] * pinv
            for c in range(k + 1, n + 1):
                A[r][c] = A[r][c] - f * A[k][c]
    y = [None] * n
    for k in range(n - 1, -1, -1):
        acc = A[k][n]
        for c in range(k + 1, n):
            acc = acc - A[k][c] * y[c]
        y[k] = acc * A[k][k].inverse()
    x = [None] * n
    for k in range(n):
        x[perm[k]] = y[k]
    return x


def min_valuation(values) -> Optional[Valuation]:
    """Minimum of a collection of valuations, respecting ``AtLeast`` bounds."""
    certified = [v for v in values if isinstance(v, int)]
    bounds = [v.bound for v in values if isinstance(v, AtLeast)]
    if not certified and not bounds:
        return None
    if certified:
        c = min(certified)
        if not bounds or c < min(bounds):
            return c
        return AtLeast(min(bounds))
    return AtLeast(min(bounds))
