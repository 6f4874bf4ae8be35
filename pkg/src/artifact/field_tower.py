"""p-adic fields as towers Q_p -> (unramified) -> (Eisenstein)*.

Elements are stored in the flat product basis of the tower: for layers with
generators g_0, g_1, ... the basis vector with exponents (i_0, i_1, ...) sits
at index i_0 + d_0*i_1 + d_0*d_1*i_2 + ..., so the first layer's exponent
varies fastest. Since each layer's generator is either a unit lifting a
residue-field generator or a uniformizer of an Eisenstein step, this flat
basis is a Z_p-basis of the ring of integers, and a value is integral exactly
when its coordinates are.

A subfield made of the first k layers occupies the first coordinates, so the
embedding K -> L is zero padding, and coordinates of an L element over the
power basis of the top generator are consecutive blocks.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from typing import Dict, List, Optional, Sequence, Tuple

from .errors import (
    InputError,
    InvalidData,
    InvariantViolation,
    NoPthRootsOfUnity,
    NotInvertibleToPrecision,
    NotEisenstein,
    NotGalois,
    NotIrreducible,
    PrecisionError,
    PrecisionExhausted,
    PrimeMismatch,
    UnsupportedTower,
)
from .padic_arith import AtLeast, PadicScalar, Valuation, ZpRing, solve, vp_capped, vp_int

UNRAMIFIED = "unramified"
EISENSTEIN = "eisenstein"


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    i = 2
    while i * i <= n:
        if n % i == 0:
            return False
        i += 1
    return True


def _prime_factors(n: int) -> List[int]:
    out, q = [], 2
    while q * q <= n:
        if n % q == 0:
            out.append(q)
            while n % q == 0:
                n //= q
        q += 1
    if n > 1:
        out.append(n)
    return out


# polynomials over F_p (little-endian lists of ints)


def _fp_trim(a):
    a = list(a)
    while a and a[-1] == 0:
        a.pop()
    return a


def _fp_mod(a, b, p):
    a = _fp_trim([x % p for x in a])
    b = _fp_trim([x % p for x in b])
    inv = pow(b[-1], -1, p)
    while len(a) >= len(b):
        c = a[-1] * inv % p
        shift = len(a) - len(b)
        for i, y in enumerate(b):
            a[shift + i] = (a[shift + i] - c * y) % p
        a = _fp_trim(a)
    return a


def _fp_mul(a, b, p):
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] = (out[i + j] + x * y) % p
    return _fp_trim(out)


def _fp_powmod(base, e, mod, p):
    result = [1]
    base = _fp_mod(base, mod, p)
    while e:
        if e & 1:
            result = _fp_mod(_fp_mul(result, base, p), mod, p)
        base = _fp_mod(_fp_mul(base, base, p), mod, p)
        e >>= 1
    return result


def _fp_gcd(a, b, p):
    a, b = _fp_trim([x % p for x in a]), _fp_trim([x % p for x in b])
    while b:
        a, b = b, _fp_mod(a, b, p)
    return a


def _fp_sub(a, b, p):
    n = max(len(a), len(b))
    a = list(a) + [0] * (n - len(a))
    b = list(b) + [0] * (n - len(b))
    return _fp_trim([(x - y) % p for x, y in zip(a, b)])


def irreducible_mod_p(poly: Sequence[int], p: int) -> bool:
    """Rabin's test for a monic polynomial over F_p."""
    f = _fp_trim([c % p for c in poly])
    n = len(f) - 1
    if n < 1 or f[-1] != 1:
        return False
    if n == 1:
        return True
    x = [0, 1]
    if _fp_sub(_fp_powmod(x, p**n, f, p), x, p):
        return False
    for q in _prime_factors(n):
        h = _fp_sub(_fp_powmod(x, p ** (n // q), f, p), x, p)
        g = _fp_gcd(f, h, p)
        if len(g) > 1:
            return False
    return True


def default_unramified_poly(p: int, f: int) -> Tuple[int, ...]:
    """Lexicographically smallest monic irreducible polynomial of degree f mod p.

    Coefficient tuples are compared from the constant term upwards, and the
    result is little-endian with the leading 1 included.
    """
    for tail in itertools.product(range(p), repeat=f):
        cand = tuple(tail) + (1,)
        if irreducible_mod_p(cand, p):
            return cand
    raise InvariantViolation(f"no irreducible polynomial of degree {f} mod {p}")


class ResidueField:
    """F_q presented as F_p[x]/(modulus); elements are coefficient tuples."""

    def __init__(self, p: int, modulus: Sequence[int]):
        self.p = p
        self.modulus = tuple(c % p for c in modulus)
        self.f = len(modulus) - 1

    def zero(self):
        return (0,) * self.f

    def add(self, a, b):
        return tuple((x + y) % self.p for x, y in zip(a, b))

    def mul(self, a, b):
        prod = _fp_mul(list(a), list(b), self.p)
        red = _fp_mod(prod, list(self.modulus), self.p) if prod else []
        red = list(red) + [0] * (self.f - len(red))
        return tuple(red[: self.f])

    def scale(self, a, k: int):
        return tuple(x * k % self.p for x in a)

    def power(self, a, e: int):
        out = (1,) + (0,) * (self.f - 1)
        for _ in range(e):
            out = self.mul(out, a)
        return out

    def elements(self):
        """All elements, in lexicographic order of the digit tuples."""
        return itertools.product(range(self.p), repeat=self.f)

    def eval_poly(self, coeffs, x):
        acc = self.zero()
        for c in reversed(coeffs):
            acc = self.add(self.mul(acc, x), c)
        return acc


@dataclass(frozen=True)
class Layer:
    kind: str
    poly: Tuple[Tuple[int, ...], ...]  # little-endian, each entry in flat coords below

    @property
    def degree(self) -> int:
        return len(self.poly) - 1

    def poly_ints(self) -> Tuple[int, ...]:
        """Coefficients of a layer sitting directly over Q_p."""
        return tuple(c[0] for c in self.poly)


class FieldTower:
    """A validated tower of layers over Q_p with a working precision."""

    def __init__(self, p: int, layers: Sequence[Layer], precision: int = 32, _cache=None):
        self.p = p
        self.layers: Tuple[Layer, ...] = tuple(layers)
        self.precision = precision
        dims = [1]
        for layer in self.layers:
            dims.append(dims[-1] * layer.degree)
        self.dims = tuple(dims)
        self.degree = dims[-1]
        self.e = 1
        self.f = 1
        for layer in self.layers:
            if layer.kind == EISENSTEIN:
                self.e *= layer.degree
            else:
                self.f *= layer.degree
        # Kummer towers carry the image of the top generator under a generator
        # of Gal(L/K) as flat coordinates; it is metadata, not part of the key.
        self.recorded_conjugate: Optional[Tuple[Tuple[int, ...], int]] = None
        self._cache = _cache if _cache is not None else {}
        self._table = self._cache.get("table")
        if self._table is None:
            self._table = self._build_table()
            self._cache["table"] = self._table

    # identity

    @property
    def key(self):
        return (self.p, self.layers)

    def __eq__(self, other):
        return isinstance(other, FieldTower) and self.key == other.key

    def __hash__(self):
        return hash(self.key)

    def __repr__(self):
        desc = ", ".join(f"{l.kind[0].upper()}{l.degree}" for l in self.layers)
        return f"FieldTower(p={self.p}, [{desc}], e={self.e}, f={self.f}, N={self.precision})"

    def with_precision(self, precision: int) -> "FieldTower":
        t = FieldTower(self.p, self.layers, precision, _cache=self._cache)
        t.recorded_conjugate = self.recorded_conjugate
        return t

    def subtower(self, k: int) -> "FieldTower":
        """The field generated by the first k layers."""
        sub = self._cache.setdefault("sub", {})
        if k not in sub:
            sub[k] = FieldTower(self.p, self.layers[:k], self.precision)
        t = sub[k]
        return t if t.precision == self.precision else t.with_precision(self.precision)

    def is_prefix_of(self, other: "FieldTower") -> bool:
        return self.p == other.p and other.layers[: len(self.layers)] == self.layers

    # exact multiplication

    def _mul_level(self, level: int, x, y):
        if level == 0:
            return [x[0] * y[0]]
        layer = self.layers[level - 1]
        d = layer.degree
        db = self.dims[level - 1]
        xs = [x[i * db : (i + 1) * db] for i in range(d)]
        ys = [y[i * db : (i + 1) * db] for i in range(d)]
        prod = [[0] * db for _ in range(2 * d - 1)]
        for i in range(d):
            if not any(xs[i]):
                continue
            for j in range(d):
                if not any(ys[j]):
                    continue
                t = self._mul_level(level - 1, xs[i], ys[j])
                acc = prod[i + j]
                for k in range(db):
                    acc[k] += t[k]
        for k in range(2 * d - 2, d - 1, -1):
            top = prod[k]
            if not any(top):
                continue
            for j in range(d):
                c = layer.poly[j]
                if not any(c):
                    continue
                t = self._mul_level(level - 1, top, list(c))
                acc = prod[k - d + j]
                for r in range(db):
                    acc[r] -= t[r]
            prod[k] = [0] * db
        out = []
        for blk in prod[:d]:
            out.extend(blk)
        return out

    def _build_table(self):
        D = self.degree
        level = len(self.layers)
        table = []
        for u in range(D):
            row = []
            for v in range(D):
                eu = [0] * D
                ev = [0] * D
                eu[u] = 1
                ev[v] = 1
                prod = self._mul_level(level, eu, ev)
                row.append(tuple((w, c) for w, c in enumerate(prod) if c))
            table.append(tuple(row))
        return tuple(table)

    def mul_coords(self, x: Sequence[int], y: Sequence[int]) -> List[int]:
        """Exact product of two flat coordinate vectors."""
        out = [0] * self.degree
        table = self._table
        for u, xu in enumerate(x):
            if not xu:
                continue
            row = table[u]
            for v, yv in enumerate(y):
                if not yv:
                    continue
                t = xu * yv
                for w, c in row[v]:
                    out[w] += c * t
        return out

    def mult_matrix(self, x: Sequence[int]) -> List[List[int]]:
        """Integer matrix of multiplication by x in the flat basis (columns = images)."""
        D = self.degree
        cols = []
        for v in range(D):
            ev = [0] * D
            ev[v] = 1
            cols.append(self.mul_coords(x, ev))
        return [[cols[v][w] for v in range(D)] for w in range(D)]

    # valuations

    def _val_level(self, level: int, coords, prec: Optional[int]) -> Optional[Valuation]:
        """Valuation normalised for the field of the first ``level`` layers.

        ``prec`` is the absolute p-adic precision of the coordinates, or None
        for exact integers (then None is returned for the zero vector).
        """
        if level == 0:
            c = coords[0]
            if prec is None:
                return None if c == 0 else vp_int(c, self.p)
            c %= self.p**prec
            return AtLeast(prec) if c == 0 else vp_int(c, self.p)
        layer = self.layers[level - 1]
        d = layer.degree
        db = self.dims[level - 1]
        certified = []
        bounds = []
        for i in range(d):
            v = self._val_level(level - 1, coords[i * db : (i + 1) * db], prec)
            if v is None:
                continue
            if layer.kind == EISENSTEIN:
                if isinstance(v, AtLeast):
                    bounds.append(d * v.bound + i)
                else:
                    certified.append(d * v + i)
            else:
                if isinstance(v, AtLeast):
                    bounds.append(v.bound)
                else:
                    certified.append(v)
        if not certified and not bounds:
            return None
        if certified:
            c = min(certified)
            if not bounds or c < min(bounds):
                return c
            return AtLeast(min(min(bounds), c))
        return AtLeast(min(bounds))

    def exact_valuation(self, coords: Sequence[int]) -> Optional[int]:
        """Valuation of an exact integral coordinate vector (None for zero)."""
        return self._val_level(len(self.layers), list(coords), None)

    # element constructors

    def element(self, coords, den: int = 0, prec: Optional[int] = None) -> "TowerElement":
        return TowerElement(self, coords, den, self.precision if prec is None else prec)

    def from_int(self, x: int, prec: Optional[int] = None) -> "TowerElement":
        c = [0] * self.degree
        c[0] = x
        return self.element(c, 0, prec)

    def from_fraction(self, q) -> "TowerElement":
        s = PadicScalar.from_fraction(self.p, q, self.precision)
        c = [0] * self.degree
        c[0] = s.mantissa
        return TowerElement(self, c, s.m, s.N)

    def zero(self) -> "TowerElement":
        return self.from_int(0)

    def one(self) -> "TowerElement":
        return self.from_int(1)

    def basis_element(self, index: int) -> "TowerElement":
        c = [0] * self.degree
        c[index] = 1
        return self.element(c)

    def generator(self, k: Optional[int] = None) -> "TowerElement":
        """Generator of layer k (default: the top layer)."""
        if k is None:
            k = len(self.layers) - 1
        if k < 0:
            raise ValueError("Q_p has no layer generator")
        return self.basis_element(self.dims[k])

    def uniformizer_coords(self) -> Tuple[int, ...]:
        c = [0] * self.degree
        for k in range(len(self.layers) - 1, -1, -1):
            if self.layers[k].kind == EISENSTEIN:
                c[self.dims[k]] = 1
                return tuple(c)
        c[0] = self.p
        return tuple(c)

    def uniformizer(self) -> "TowerElement":
        return self.element(self.uniformizer_coords())

    def uniformizer_power(self, k: int) -> "TowerElement":
        if k >= 0:
            x = self.uniformizer_coords()
            out = [0] * self.degree
            out[0] = 1
            for _ in range(k):
                out = self.mul_coords(out, x)
            # exact, so give it headroom beyond the nominal precision
            return TowerElement(self, out, 0, self.precision + k)
        cache = self._cache.setdefault("uinv", {})
        key = (k, self.precision)
        if key not in cache:
            cache[key] = self.uniformizer_power(-k).inverse()
        return cache[key]

    def ring(self):
        return self

    # residue field

    def residue_field(self) -> ResidueField:
        if self.layers and self.layers[0].kind == UNRAMIFIED:
            return ResidueField(self.p, self.layers[0].poly_ints())
        return ResidueField(self.p, (0, 1))

    def lift_residue(self, digits: Sequence[int]) -> "TowerElement":
        c = [0] * self.degree
        for a, t in enumerate(digits):
            c[a] = t
        return self.element(c, 0, self.precision)

    def embed(self, x: "TowerElement") -> "TowerElement":
        """Image of an element of a prefix subfield."""
        if x.tower.key == self.key:
            return x
        if not x.tower.is_prefix_of(self):
            raise PrimeMismatch("element does not belong to a subfield of this tower")
        c = list(x.coords) + [0] * (self.degree - len(x.coords))
        return TowerElement(self, c, x.den, x.prec)


class TowerElement:
    """``p**(-den) * (sum coords[i] * b_i + O(p**prec))`` in the flat basis."""

    __slots__ = ("tower", "coords", "den", "prec")

    def __init__(self, tower: FieldTower, coords, den: int = 0, prec: Optional[int] = None):
        p = tower.p
        if prec is None:
            prec = tower.precision
        if len(coords) != tower.degree:
            raise ValueError(f"expected {tower.degree} coordinates, got {len(coords)}")
        if den < 0:
            raise ValueError("negative denominator exponent")
        if den > prec:
            raise PrecisionExhausted("denominator exceeds precision: no digits left")
        mod = p**prec
        c = [x % mod for x in coords]
        if den:
            content = min(vp_capped(x, p, prec) for x in c)
            k = min(den, content)
            if k:
                pk = p**k
                c = [x // pk for x in c]
                den -= k
                prec -= k
        self.tower = tower
        self.coords = tuple(c)
        self.den = den
        self.prec = prec

    # helpers

    def _content(self) -> int:
        return min(vp_capped(x, self.tower.p, self.prec) for x in self.coords)

    def _coerce(self, other):
        if isinstance(other, int):
            return self.tower.from_int(other, self.prec + self.den)
        if isinstance(other, Fraction):
            return self.tower.from_fraction(other)
        if isinstance(other, TowerElement):
            if other.tower.key == self.tower.key:
                return other
            if other.tower.is_prefix_of(self.tower):
                return self.tower.embed(other)
            raise PrimeMismatch("elements live in incompatible towers")
        return NotImplemented

    # arithmetic

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if other.tower.key != self.tower.key:
            return other + self
        p = self.tower.p
        den = max(self.den, other.den)
        s1, s2 = den - self.den, den - other.den
        prec = min(self.prec + s1, other.prec + s2)
        f1, f2 = p**s1, p**s2
        c = [a * f1 + b * f2 for a, b in zip(self.coords, other.coords)]
        return TowerElement(self.tower, c, den, prec)

    __radd__ = __add__

    def __neg__(self):
        return TowerElement(self.tower, [-a for a in self.coords], self.den, self.prec)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if other.tower.key != self.tower.key:
            return other * self
        c = self.tower.mul_coords(self.coords, other.coords)
        prec = min(self.prec + other._content(), other.prec + self._content())
        return TowerElement(self.tower, c, self.den + other.den, prec)

    __rmul__ = __mul__

    def __pow__(self, e: int):
        if e < 0:
            return self.inverse() ** (-e)
        out = self.tower.from_int(1, self.prec + self.den)
        base = self
        while e:
            if e & 1:
                out = out * base
            base = base * base
            e >>= 1
        return out

    def scalars(self) -> List[PadicScalar]:
        p = self.tower.p
        return [PadicScalar(p, self.prec, self.den, c) for c in self.coords]

    @classmethod
    def from_scalars(cls, tower: FieldTower, scalars: Sequence[PadicScalar]) -> "TowerElement":
        p = tower.p
        den = max(s.m for s in scalars)
        prec = min(s.N + den - s.m for s in scalars)
        c = [s.mantissa * p ** (den - s.m) for s in scalars]
        return cls(tower, c, den, prec)

    def inverse(self) -> "TowerElement":
        """Inverse via a linear solve over Q_p of the multiplication matrix."""
        tower = self.tower
        p = tower.p
        M = tower.mult_matrix(self.coords)
        A = [[PadicScalar(p, self.prec, 0, x) for x in row] for row in M]
        # the right-hand side is exact; give it more digits than anything else
        big = self.prec + 4 * tower.degree + 8
        rhs = [PadicScalar(p, big, 0, int(i == 0)) for i in range(tower.degree)]
        try:
            y = solve(A, rhs, ZpRing(p, self.prec))
        except PrecisionExhausted as exc:
            raise NotInvertibleToPrecision(str(exc)) from exc
        inv = TowerElement.from_scalars(tower, y)
        # multiply by p**den
        return inv._scale_p(self.den)

    def _scale_p(self, k: int) -> "TowerElement":
        if k == 0:
            return self
        p = self.tower.p
        if k > 0:
            if self.den >= k:
                return TowerElement(self.tower, self.coords, self.den - k, self.prec - k)
            extra = k - self.den
            return TowerElement(
                self.tower, [c * p**extra for c in self.coords], 0, self.prec - self.den + extra
            )
        return TowerElement(self.tower, self.coords, self.den - k, self.prec - k)

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self * other.inverse()

    # inspection

    def valuation(self) -> Valuation:
        """Valuation normalised so that the tower's uniformizer has valuation 1."""
        t = self.tower
        v = t._val_level(len(t.layers), list(self.coords), self.prec)
        shift = self.den * t.e
        if isinstance(v, AtLeast):
            return AtLeast(v.bound - shift)
        return v - shift

    def is_zero(self) -> bool:
        return not any(self.coords)

    def is_integral(self) -> bool:
        return self.den == 0

    def residue(self) -> Tuple[int, ...]:
        """Residue-field digits of an integral element."""
        if self.den:
            raise InvalidData("residue of a non-integral element")
        f = self.tower.residue_field().f
        return tuple(c % self.tower.p for c in self.coords[:f])

    def truncate(self, prec: int) -> "TowerElement":
        return TowerElement(self.tower, self.coords, self.den, min(prec, self.prec))

    def agrees_with(self, other) -> bool:
        other = self._coerce(other)
        return (self - other).is_zero()

    def int_coords(self) -> Tuple[int, ...]:
        """Integer coordinates of an integral element, reduced to its precision."""
        if self.den:
            raise InvalidData("element is not integral")
        return self.coords

    def __eq__(self, other):
        if not isinstance(other, TowerElement):
            return NotImplemented
        return (self.tower.key, self.coords, self.den, self.prec) == (
            other.tower.key,
            other.coords,
            other.den,
            other.prec,
        )

    def __hash__(self):
        return hash((self.tower.key, self.coords, self.den, self.prec))

    def __repr__(self):
        d = f"p^-{self.den}*" if self.den else ""
        return f"TowerElement({d}{list(self.coords)} + O(p^{self.prec}))"


# construction and parsing


def _parse_coeff(obj, level: int, layers: Sequence[Layer], p: int, dims) -> List[Fraction]:
    if level == 0:
        if isinstance(obj, bool):
            raise InputError("booleans are not coefficients")
        if isinstance(obj, int):
            return [Fraction(obj)]
        if isinstance(obj, (list, tuple)) and len(obj) == 2 and all(isinstance(x, int) for x in obj):
            if obj[1] < 0:
                raise InputError("denominator exponent must be non-negative")
            return [Fraction(obj[0], p ** obj[1])]
        raise InputError(f"bad scalar coefficient {obj!r}")
    if isinstance(obj, int) and not isinstance(obj, bool):
        return [Fraction(obj)] + [Fraction(0)] * (dims[level] - 1)
    d = layers[level - 1].degree
    if not isinstance(obj, (list, tuple)) or len(obj) != d:
        raise InputError(f"coefficient {obj!r} should be a list of {d} entries")
    out: List[Fraction] = []
    for part in obj:
        out.extend(_parse_coeff(part, level - 1, layers, p, dims))
    return out


def _integral(vec: Sequence[Fraction]) -> Tuple[int, ...]:
    if any(x.denominator != 1 for x in vec):
        raise NotEisenstein("defining polynomial coefficients must be integral")
    return tuple(int(x) for x in vec)


def make_tower(p: int, layer_descriptions, precision: int = 32) -> FieldTower:
    """Validate layer descriptions and build the tower.

    Each description is a mapping with keys ``kind`` (``"unramified"`` or
    ``"eisenstein"``) and ``poly`` (little-endian coefficients over the field
    below; nested lists follow the layers, and at the bottom a coefficient is
    an int or an ``[int, denominator_exponent]`` pair). An optional ``p`` key
    must agree with the tower prime.
    """
    if not isinstance(p, int) or not is_prime(p):
        raise InputError(f"p = {p!r} is not a prime")
    if not isinstance(precision, int) or precision < 1:
        raise InputError("precision must be a positive integer")
    layers: List[Layer] = []
    dims = [1]
    for idx, desc in enumerate(layer_descriptions):
        if isinstance(desc, Layer):
            kind, raw = desc.kind, desc.poly
            coeffs = [tuple(Fraction(x) for x in c) for c in raw]
        else:
            if "p" in desc and desc["p"] != p:
                raise PrimeMismatch(f"layer {idx} declares p = {desc['p']}, tower has p = {p}")
            kind = desc.get("kind")
            raw = desc.get("poly")
            if kind not in (UNRAMIFIED, EISENSTEIN):
                raise InputError(f"layer {idx}: unknown kind {kind!r}")
            if not isinstance(raw, (list, tuple)) or len(raw) < 2:
                raise InputError(f"layer {idx}: polynomial needs degree at least 1")
            coeffs = [_parse_coeff(c, idx, layers, p, dims) for c in raw]
        vecs = [_integral(c) for c in coeffs]
        one = tuple([1] + [0] * (dims[idx] - 1))
        if vecs[-1] != one:
            raise InputError(f"layer {idx}: polynomial is not monic")
        layer = Layer(kind, tuple(vecs))
        below = FieldTower(p, layers, precision)
        if kind == UNRAMIFIED:
            if idx != 0:
                raise UnsupportedTower("an unramified layer is only supported directly over Q_p")
            if not irreducible_mod_p([v[0] for v in vecs], p):
                raise NotIrreducible(f"layer {idx}: polynomial is reducible modulo {p}")
        else:
            for i, v in enumerate(vecs[:-1]):
                val = below.exact_valuation(v)
                if i == 0:
                    if val != 1:
                        raise NotEisenstein(
                            f"layer {idx}: constant term has valuation {val}, expected 1"
                        )
                elif val is not None and val < 1:
                    raise NotEisenstein(f"layer {idx}: coefficient {i} is a unit")
        layers.append(layer)
        dims.append(dims[-1] * layer.degree)
    return FieldTower(p, layers, precision)


def tower_from_spec(doc) -> Tuple[FieldTower, FieldTower]:
    """Build (L, K) from an extension-spec document."""
    try:
        p = doc["p"]
        layers = doc["layers"]
    except (KeyError, TypeError) as exc:
        raise InputError(f"extension spec is missing {exc}") from exc
    precision = doc.get("precision", 32)
    L = make_tower(p, layers, precision)
    cut = doc.get("base_cut", len(L.layers) - 1)
    if not isinstance(cut, int) or not 0 <= cut < len(L.layers):
        raise InputError(f"base_cut {cut!r} out of range")
    return L, L.subtower(cut)


# polynomials over a tower


def poly_eval(coeffs: Sequence[TowerElement], x: TowerElement) -> TowerElement:
    acc = coeffs[-1]
    for c in reversed(coeffs[:-1]):
        acc = acc * x + c
    return acc


def poly_derivative(coeffs: Sequence[TowerElement]) -> List[TowerElement]:
    return [coeffs[k] * k for k in range(1, len(coeffs))]


def taylor_shift(coeffs: Sequence[TowerElement], c: TowerElement) -> List[TowerElement]:
    """Coefficients of P(c + z) as a polynomial in z."""
    n = len(coeffs) - 1
    powers = [c.tower.from_int(1, c.prec + c.den)]
    for _ in range(n):
        powers.append(powers[-1] * c)
    out = []
    for k in range(n + 1):
        acc = coeffs[k]
        for j in range(k + 1, n + 1):
            acc = acc + coeffs[j] * powers[j - k] * comb(j, k)
        out.append(acc)
    return out


def _lower_hull(points):
    hull = []
    for pt in points:
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            if (y2 - y1) * (pt[0] - x1) >= (pt[1] - y1) * (x2 - x1):
                hull.pop()
            else:
                break
        hull.append(pt)
    return hull


def roots_in_field(F: FieldTower, coeffs: Sequence[TowerElement], target: Optional[int] = None):
    """Roots in F with simple residues, via Newton polygon slopes and Newton lifting.

    Returns a list of ``(valuation, residue_digits, root)`` sorted by
    valuation and then by residue digits. Roots whose normalised residue is a
    repeated root of the residue polynomial are not found; callers that need
    every root compare counts.
    """
    if target is None:
        target = F.precision
    vals = [c.valuation() for c in coeffs]
    pts = [(k, v) for k, v in enumerate(vals) if isinstance(v, int)]
    if not pts:
        raise PrecisionExhausted("polynomial vanishes to precision")
    hull = _lower_hull(pts)
    for k, v in enumerate(vals):
        if isinstance(v, AtLeast):
            for (x1, y1), (x2, y2) in zip(hull, hull[1:]):
                if x1 <= k <= x2 and v.bound * (x2 - x1) < y1 * (x2 - x1) + (y2 - y1) * (k - x1):
                    raise PrecisionExhausted("coefficient not certified above the Newton polygon")
    rf = F.residue_field()
    found = []
    for (k1, v1), (k2, v2) in zip(hull, hull[1:]):
        num, dk = v1 - v2, k2 - k1
        if num % dk:
            continue
        s = num // dk
        m = v1 + s * k1
        R = [coeffs[k] * F.uniformizer_power(s * k - m) for k in range(len(coeffs))]
        res = []
        for r in R:
            v = r.valuation()
            if isinstance(v, AtLeast):
                if v.bound < 1:
                    raise PrecisionExhausted("normalised coefficient not certified")
                res.append(rf.zero())
            elif v < 0:
                raise InvariantViolation("normalised coefficient is not integral")
            elif v > 0:
                res.append(rf.zero())
            else:
                res.append(r.residue())
        dres = [rf.scale(res[k], k) for k in range(1, len(res))]
        dR = poly_derivative(R)
        for u0 in rf.elements():
            if not any(u0):
                continue
            if any(rf.eval_poly(res, u0)):
                continue
            if not any(rf.eval_poly(dres, u0)):
                continue
            u = _newton_lift(F, R, dR, F.lift_residue(u0), target)
            found.append((s, tuple(u0), F.uniformizer_power(s) * u))
    found.sort(key=lambda item: (item[0], item[1]))
    return found


def _newton_lift(F, R, dR, u, target):
    goal = F.e * target
    for _ in range(4 * max(1, target.bit_length()) + 8):
        val = poly_eval(R, u)
        v = val.valuation()
        if isinstance(v, AtLeast) or v >= goal:
            return u
        step = val * poly_eval(dR, u).inverse()
        u = u - step
    raise PrecisionExhausted("Newton iteration did not converge to the requested precision")


def _top_poly_in(L: FieldTower) -> List[TowerElement]:
    layer = L.layers[-1]
    Db = L.dims[-2]
    out = []
    for c in layer.poly:
        coords = list(c) + [0] * (L.degree - Db)
        out.append(TowerElement(L, coords, 0, L.precision + 1))
    return out


def _conjugates_at(L: FieldTower):
    layer = L.layers[-1]
    n = layer.degree
    P = _top_poly_in(L)
    g = L.generator()
    g = TowerElement(L, g.coords, 0, L.precision + 1)
    if layer.kind == UNRAMIFIED:
        roots = [r for _, _, r in roots_in_field(L, P)]
        rf = L.residue_field()
        theta = tuple(g.residue())
        ordered = []
        for k in range(n):
            want = rf.power(theta, L.p**k) if k else theta
            match = [r for r in roots if r.residue() == want]
            if len(match) != 1:
                raise NotGalois("unramified layer does not split in its own field")
            ordered.append(match[0])
        return ordered
    Q = taylor_shift(P, g)
    q0 = Q[0].valuation()
    if isinstance(q0, int) and q0 < L.e * L.precision:
        raise InvariantViolation("generator is not a root of its own polynomial")
    zs = roots_in_field(L, Q[1:])
    conj = [g] + [g + z for _, _, z in zs]
    if len(conj) != n:
        raise NotGalois(f"found {len(conj)} of {n} conjugates of the top generator")
    return conj


def find_conjugates(L: FieldTower, K: Optional[FieldTower] = None) -> List[TowerElement]:
    """All images of the top generator of L under Gal(L/K), identity first.

    For an unramified top layer the list is ordered by powers of Frobenius.
    """
    if not L.layers:
        raise UnsupportedTower("Q_p has no top layer")
    if K is not None and K.key != L.subtower(len(L.layers) - 1).key:
        raise UnsupportedTower("only one-step relative extensions are supported")
    N = L.precision
    for slack in (8, N, 4 * N):
        W = L.with_precision(N + slack)
        try:
            conj = _conjugates_at(W)
        except PrecisionError:
            continue
        if all(c.den == 0 and c.prec >= N for c in conj):
            return [TowerElement(L, c.coords, 0, N) for c in conj]
    raise PrecisionExhausted("conjugates could not be computed to the requested precision")


def cyclotomic_shifted(p: int) -> List[int]:
    """Coefficients of Phi_p(1 + y) = ((1 + y)^p - 1) / y."""
    return [comb(p, k) for k in range(1, p + 1)]


def root_of_unity_p(K: FieldTower) -> TowerElement:
    """A primitive p-th root of unity in K, or NoPthRootsOfUnity."""
    p = K.p
    coeffs = [K.from_int(c, K.precision + 1) for c in cyclotomic_shifted(p)]
    try:
        roots = roots_in_field(K, coeffs)
    except PrecisionError:
        roots = []
    if not roots:
        raise NoPthRootsOfUnity(f"the base field contains no primitive {p}-th root of unity")
    return roots[0][2] + 1


def kummer_extension(K: FieldTower, uniformizer: Optional[TowerElement] = None) -> FieldTower:
    """K(u^(1/p)) for a uniformizer u of K, with the Galois action recorded.

    The extra layer is x^p - u; the recorded conjugate is zeta_p * pi_L.
    """
    p = K.p
    zeta = root_of_unity_p(K)
    u = K.uniformizer() if uniformizer is None else uniformizer
    if u.valuation() != 1 or u.den:
        raise InvalidData("Kummer generator must be a uniformizer of the base")
    neg = [(-c) for c in u.coords]
    zero = [0] * K.degree
    one = [1] + [0] * (K.degree - 1)
    poly = [neg] + [zero] * (p - 1) + [one]
    layers = list(K.layers) + [Layer(EISENSTEIN, tuple(tuple(c) for c in poly))]
    L = make_tower(p, layers, K.precision)
    img = L.embed(zeta) * L.generator()
    L.recorded_conjugate = (img.coords, img.prec)
    return L


# the Galois lattice model


@dataclass
class GaloisLatticeModel:
    """Integral basis of O_L over O_K with the matrix of each group element.

    ``matrices[k]`` is the matrix of sigma**k over O_K (entries are elements
    of ``base``), columns giving the images of the basis vectors. The group
    is cyclic, ``table[i][j] = (i + j) % n``. ``flat[k]`` is the same map on
    the flat Z_p basis of L as integers modulo ``p**precision``.
    """

    base: FieldTower
    top: FieldTower
    n: int
    kind: str
    labels: Tuple[str, ...]
    matrices: Tuple[Tuple[Tuple[TowerElement, ...], ...], ...]
    table: Tuple[Tuple[int, ...], ...]
    flat: Tuple[Tuple[Tuple[int, ...], ...], ...]
    uniformizer: Tuple[TowerElement, ...]
    precision: int
    sigma_image: TowerElement = field(repr=False)

    @property
    def p(self) -> int:
        return self.top.p

    def to_base_coords(self, x: TowerElement) -> List[TowerElement]:
        """Coordinates of an L element over the O_K basis."""
        Db = self.base.degree
        return [
            TowerElement(self.base, x.coords[i * Db : (i + 1) * Db], x.den, x.prec)
            for i in range(self.n)
        ]

    def from_base_coords(self, coords: Sequence[TowerElement]) -> TowerElement:
        L = self.top
        Db = self.base.degree
        acc = L.zero()
        acc = TowerElement(L, acc.coords, 0, max(c.prec + c.den for c in coords) + 1)
        for i, c in enumerate(coords):
            shifted = [0] * L.degree
            shifted[i * Db : (i + 1) * Db] = c.coords
            acc = acc + TowerElement(L, shifted, c.den, c.prec)
        return acc

    def apply(self, k: int, x: TowerElement) -> TowerElement:
        """sigma**k applied to an element of L."""
        M = self.flat[k]
        D = self.top.degree
        c = [sum(M[r][s] * x.coords[s] for s in range(D)) for r in range(D)]
        return TowerElement(self.top, c, x.den, min(x.prec, self.precision + x.den))

    def apply_base(self, k: int, omega: Sequence[TowerElement]) -> List[TowerElement]:
        """M_k times a coordinate vector over O_K."""
        M = self.matrices[k]
        out = []
        for r in range(self.n):
            acc = M[r][0] * omega[0]
            for s in range(1, self.n):
                acc = acc + M[r][s] * omega[s]
            out.append(acc)
        return out


def _matmul_mod(A, B, mod):
    n = len(A)
    m = len(B[0])
    k = len(B)
    return tuple(
        tuple(sum(A[i][t] * B[t][j] for t in range(k)) % mod for j in range(m)) for i in range(n)
    )


def build_lattice_model(L: FieldTower, K: Optional[FieldTower] = None) -> GaloisLatticeModel:
    """Galois lattice model of the top layer of L over the field below it."""
    if not L.layers:
        raise UnsupportedTower("the tower has no layers")
    Kexp = L.subtower(len(L.layers) - 1)
    if K is None:
        K = Kexp
    elif K.key != Kexp.key:
        raise UnsupportedTower(
            "only a single relative step is supported; compositum towers are out of scope"
        )
    K = K.with_precision(L.precision) if K.precision != L.precision else K
    layer = L.layers[-1]
    n = layer.degree
    p = L.p
    N = L.precision
    mod = p**N
    if L.recorded_conjugate is not None:
        coords, prec = L.recorded_conjugate
        if prec < N:
            raise PrecisionExhausted("recorded conjugate is less precise than the tower")
        sigma = TowerElement(L, coords, 0, N)
    else:
        conj = find_conjugates(L, K)
        sigma = conj[1] if n > 1 else conj[0]
    D = L.degree
    Db = K.degree
    # images of basis vectors kappa * g^i under sigma
    powers = [L.from_int(1)]
    for _ in range(n - 1):
        powers.append(powers[-1] * sigma)
    cols = []
    for i in range(n):
        for k in range(Db):
            kappa = [0] * D
            kappa[k] = 1
            img = L.mul_coords(kappa, powers[i].coords)
            cols.append([x % mod for x in img])
    G = tuple(tuple(cols[c][r] for c in range(D)) for r in range(D))
    ident = tuple(tuple(int(r == c) for c in range(D)) for r in range(D))
    flat = [ident]
    for _ in range(n - 1):
        flat.append(_matmul_mod(G, flat[-1], mod))
    if _matmul_mod(G, flat[-1], mod) != ident:
        raise InvariantViolation("sigma does not have order [L:K] to precision")
    for i in range(n):
        for j in range(n):
            if _matmul_mod(flat[i], flat[j], mod) != flat[(i + j) % n]:
                raise InvariantViolation("action matrices violate the group law")
    matrices = []
    for k in range(n):
        F = flat[k]
        M = []
        for r in range(n):
            row = []
            for c in range(n):
                col = c * Db
                row.append(TowerElement(K, [F[r * Db + s][col] for s in range(Db)], 0, N))
            M.append(tuple(row))
        matrices.append(tuple(M))
    if layer.kind == EISENSTEIN:
        labels = tuple(f"pi_L^{i}" for i in range(n))
        unif = tuple(K.from_int(int(i == 1)) for i in range(n))
    else:
        labels = tuple(f"theta^{i}" for i in range(n))
        unif = (K.uniformizer(),) + tuple(K.zero() for _ in range(n - 1))
    table = tuple(tuple((i + j) % n for j in range(n)) for i in range(n))
    return GaloisLatticeModel(
        base=K,
        top=L,
        n=n,
        kind=layer.kind,
        labels=labels,
        matrices=tuple(matrices),
        table=table,
        flat=tuple(flat),
        uniformizer=unif,
        precision=N,
        sigma_image=sigma,
    )
