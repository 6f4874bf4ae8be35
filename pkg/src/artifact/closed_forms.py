"""Closed-form indices for cyclic degree-p and absolutely abelian extensions.

Everything is exact integer (or Fraction) arithmetic on exponents of p; the
huge integers p**v never appear.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from .errors import GcdViolation, InvalidData, InvalidProfile, UnsupportedBase
from .field_tower import _prime_factors, is_prime
from .ramification import RamificationProfile, profile_from_invariants, valid_jumps

P2_NOTE = (
    "the abelian formulas fail for p = 2 (the associated order need not be maximal "
    "there; e.g. Q_2(zeta_8) over its maximal real subfield)"
)


@dataclass(frozen=True)
class NuData:
    p: int
    nu: Tuple[int, ...]
    mu: int
    n: Tuple[int, ...]
    i_m: int


def _require_wild(profile: RamificationProfile):
    if not profile.wild or profile.n != profile.p:
        raise InvalidProfile("expected a ramified cyclic extension of degree p")


def nu_data(profile: RamificationProfile) -> NuData:
    _require_wild(profile)
    p, e, t, a = profile.p, profile.e_K, profile.t, profile.a
    if a == 0:
        raise InvalidProfile("the nu sequence is only defined for t not divisible by p")
    nu = tuple((a + i * t) // p for i in range(p))
    terms = [i * e - (p - 1) * nu[i] for i in range(p)]
    mu = min(terms)
    i_m = terms.index(mu)
    n = tuple(min(nu[i + j] - nu[j] for j in range(p - i)) for i in range(p))
    return NuData(p=p, nu=nu, mu=mu, n=n, i_m=i_m)


def minimal_index_cyclic_p(profile: RamificationProfile) -> int:
    """v_p(m(L/K)) for a ramified cyclic extension of degree p."""
    _require_wild(profile)
    if profile.a == 0:
        total = profile.p * profile.e_K * profile.f_K
        if total % 2:
            raise InvalidProfile("a = 0 requires (p-1) | e_K")
        return total // 2
    d = nu_data(profile)
    return profile.f_K * (sum(d.nu) + d.mu)


def assoc_index_cyclic_p(profile: RamificationProfile) -> int:
    """v_p([A : O_K[G]]) for the associated order A."""
    _require_wild(profile)
    if profile.a == 0:
        return profile.f_K * profile.p * profile.e_K // 2
    return profile.f_K * sum(nu_data(profile).n)


def freeness_cyclic_p(profile: RamificationProfile) -> Tuple[bool, int]:
    assoc = assoc_index_cyclic_p(profile)
    return assoc == minimal_index_cyclic_p(profile), assoc


@dataclass(frozen=True)
class Witness:
    """Recipe for an element realising the minimal index.

    kind ``"power"``: pi_L**a. kind ``"power_plus_correction"``:
    pi_L**a + pi_K**(-shift) * (sigma - 1)**index * pi_L**a. kind
    ``"unit_sum"``: sum of pi_L**i for i < p.
    """

    kind: str
    a: int
    index: int = 0
    shift: int = 0
    degree: int = 0

    def describe(self) -> str:
        if self.kind == "power":
            return f"pi_L^{self.a}"
        if self.kind == "power_plus_correction":
            return (
                f"pi_L^{self.a} + pi_K^-{self.shift} (sigma-1)^{self.index} pi_L^{self.a}"
            )
        return " + ".join(["1"] + [f"pi_L^{i}" for i in range(1, self.degree)])


def minimal_generator_recipe(profile: RamificationProfile) -> Witness:
    _require_wild(profile)
    if profile.a == 0:
        return Witness(kind="unit_sum", a=0, degree=profile.p)
    d = nu_data(profile)
    if d.mu == 0:
        return Witness(kind="power", a=profile.a)
    return Witness(
        kind="power_plus_correction", a=profile.a, index=d.i_m, shift=d.nu[d.i_m]
    )


def general_bound(p: int, e_LK: int, f_L: int, deg_L: int, deg_LK: int) -> Tuple[Fraction, Fraction]:
    """(bound, easy_bound) on v_p(m(L/K)); the easy bound is strict."""
    for x in (e_LK, f_L, deg_L, deg_LK):
        if x < 1:
            raise InvalidData("degrees must be positive")
    if deg_LK % e_LK:
        raise InvalidData("e_{L/K} must divide [L:K]")
    v = 0
    k = deg_LK
    while k % p == 0:
        k //= p
        v += 1
    bound = Fraction(f_L * (e_LK - 1)) + Fraction(deg_L * v, 2)
    easy = Fraction(deg_L) * (1 + Fraction(v, 2))
    return bound, easy


def multiplicative_order(p: int, s: int) -> int:
    if s == 1:
        return 1
    k, x = 1, p % s
    while x != 1:
        x = x * p % s
        k += 1
    return k


def cyclotomic_disc_valuation(p: int, r: int, s: int) -> int:
    """v_p of the discriminant of Q_p(zeta_{p^r s}) over Q_p."""
    if s < 1 or r < 0:
        raise InvalidData("need r >= 0 and s >= 1")
    if gcd(s, p) != 1:
        raise GcdViolation(f"s = {s} is not coprime to p = {p}")
    if r == 0:
        return 0
    return p ** (r - 1) * (p * r - r - 1) * multiplicative_order(p, s)


def _factor(n: int) -> Dict[int, int]:
    out: Dict[int, int] = {}
    for q in _prime_factors(n):
        while n % q == 0:
            n //= q
            out[q] = out.get(q, 0) + 1
    return out


def _divisors(n: int) -> List[int]:
    divs = [1]
    for q, k in _factor(n).items():
        divs = [d * q**i for d in divs for i in range(k + 1)]
    return sorted(divs)


def _phi(n: int) -> int:
    out = n
    for q in _factor(n):
        out = out // q * (q - 1)
    return out


def _split_p(p: int, x: int) -> Tuple[int, int]:
    r = 0
    while x % p == 0:
        x //= p
        r += 1
    return r, x


def _wedderburn_disc_sum(p: int, group_order: int, f_K: int) -> Fraction:
    """Sum over delta | |G| of phi(delta)/[K(zeta_delta):K] * v_K(disc K(zeta_delta)/K).

    K is unramified of degree f_K over Q_p. The residue degree of K(zeta_s)
    over K is f_s / gcd(f_s, f_K), which also rescales the discriminant.
    """
    total = Fraction(0)
    for delta in _divisors(group_order):
        r, s = _split_p(p, delta)
        f_s = multiplicative_order(p, s)
        l_s = gcd(f_s, f_K)
        deg = _phi(p**r) * Fraction(f_s, l_s)
        disc = Fraction(cyclotomic_disc_valuation(p, r, s), l_s)
        total += Fraction(_phi(delta)) / deg * disc
    return total


def abs_abelian_unreduced(p: int, f_L: int, n: int, d: int, f_K: int = 1) -> Fraction:
    """The discriminant-sum form of the absolutely abelian index (before simplification)."""
    group_order = p**n * d
    return Fraction(f_L, 2) * (group_order * n - _wedderburn_disc_sum(p, group_order, f_K))


def minimal_index_abs_abelian(p: int, f_L: int, n: int, d: int) -> int:
    """v_p(m(L/K)) for L/Q_p abelian, K/Q_p unramified, p odd, e_{L/K} = p^n d."""
    if p == 2:
        raise InvalidProfile(P2_NOTE)
    if not is_prime(p) or f_L < 1 or n < 0 or d < 1:
        raise InvalidProfile("need p prime, f_L >= 1, n >= 0, d >= 1")
    if gcd(d, p) != 1:
        raise InvalidProfile(f"d = {d} must be coprime to p = {p}")
    reduced = f_L * d * (p**n - 1) // (p - 1)
    unreduced = abs_abelian_unreduced(p, f_L, n, d)
    if unreduced != reduced:
        raise InvalidProfile(f"internal disagreement: {unreduced} != {reduced}")
    return reduced


def maximal_order_index_cyclic(
    p: int, f_K: int, group_order: int, e_K: int = 1, zeta_p_in_base: bool = False
) -> int:
    """v_p([M : O_K[G]]) for cyclic G and the maximal order M of K[G].

    Supported bases: K unramified over Q_p (any cyclic G), or any K
    containing the p-th roots of unity with |G| = p.
    """
    if e_K == 1:
        total = Fraction(f_K, 2) * (
            group_order * _split_p(p, group_order)[0]
            - _wedderburn_disc_sum(p, group_order, f_K)
        )
        if total.denominator != 1:
            raise InvalidData("maximal-order index is not an integer")
        return int(total)
    if zeta_p_in_base and group_order == p:
        if e_K % (p - 1):
            raise InvalidData("zeta_p in K forces (p-1) | e_K")
        return f_K * p * e_K // 2
    raise UnsupportedBase(
        "no closed form for the maximal-order index over a ramified base "
        "without p-th roots of unity"
    )


def global_abelian_valuation(degree: int, ram: Mapping[int, Sequence[int]]) -> Dict[int, int]:
    """v_p(m(L/Q)) for an abelian L/Q of the given degree.

    ``ram`` maps each ramified prime p to (n, d) or (n, d, f), where p^n d is
    the ramification index and f an optional local residue degree used for
    the local-to-global recombination check.
    """
    if degree < 1:
        raise InvalidData("degree must be positive")
    out = {}
    for p, data in sorted(ram.items()):
        if not is_prime(p):
            raise InvalidData(f"{p} is not prime")
        if p == 2:
            raise InvalidData("ramified p = 2 is out of scope: " + P2_NOTE)
        if len(data) not in (2, 3):
            raise InvalidData("ramification data must be (n, d) or (n, d, f)")
        n, d = data[0], data[1]
        f = data[2] if len(data) == 3 else 1
        if n < 0 or d < 1 or f < 1 or gcd(d, p) != 1:
            raise InvalidData(f"bad ramification data for p = {p}: {data}")
        e = p**n * d
        if degree % (e * f):
            raise InvalidData(f"e*f = {e * f} does not divide the degree {degree}")
        num = degree * (p**n - 1)
        den = p**n * (p - 1)
        if num % den:
            raise InvalidData("global valuation is not an integer")
        direct = num // den
        recombined = degree // (e * f) * minimal_index_abs_abelian(p, f, n, d)
        if direct != recombined:
            raise InvalidData(f"local-global mismatch at p = {p}: {direct} != {recombined}")
        out[p] = direct
    return out


@dataclass
class IndexReport:
    profile: RamificationProfile
    v_p_m: int
    v_p_assoc_index: int
    free_over_assoc: bool
    v_p_maximal_order_index: Optional[int]
    bound_general: Fraction
    bound_easy: Fraction
    witness: Optional[str]
    nu: Optional[NuData] = None
    sources: Dict[str, str] = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = {
            "v_p_m": self.v_p_m,
            "m": f"{self.profile.p}^{self.v_p_m}",
            "v_p_assoc_index": self.v_p_assoc_index,
            "free_over_assoc": self.free_over_assoc,
            "v_p_maximal_order_index": self.v_p_maximal_order_index,
            "bound_general": str(self.bound_general),
            "bound_easy": str(self.bound_easy),
            "witness": self.witness,
            "sources": dict(sorted(self.sources.items())),
        }
        if self.nu is not None:
            out["nu"] = list(self.nu.nu)
            out["mu"] = self.nu.mu
            out["n"] = list(self.nu.n)
            out["i_m"] = self.nu.i_m
        return out


def _maximal_order_or_none(profile: RamificationProfile) -> Optional[int]:
    if profile.e_K == 1:
        return maximal_order_index_cyclic(profile.p, profile.f_K, profile.n)
    # a = 0 forces zeta_p into K, and zeta_2 = -1 always lies in K
    if profile.n == profile.p and (profile.p == 2 or (profile.wild and profile.a == 0)):
        return maximal_order_index_cyclic(
            profile.p, profile.f_K, profile.n, profile.e_K, zeta_p_in_base=True
        )
    return None


def index_report(profile: RamificationProfile) -> IndexReport:
    """All closed-form quantities for a profile."""
    p = profile.p
    f_L = profile.f_K * profile.f_LK
    deg_L = profile.n * profile.e_K * profile.f_K
    bound, easy = general_bound(p, profile.e_LK, f_L, deg_L, profile.n)
    if not profile.wild:
        return IndexReport(
            profile=profile,
            v_p_m=0,
            v_p_assoc_index=0,
            free_over_assoc=True,
            v_p_maximal_order_index=_maximal_order_or_none(profile),
            bound_general=bound,
            bound_easy=easy,
            witness=None,
            sources={"v_p_m": "formula", "v_p_assoc_index": "formula"},
        )
    v = minimal_index_cyclic_p(profile)
    free, assoc = freeness_cyclic_p(profile)
    return IndexReport(
        profile=profile,
        v_p_m=v,
        v_p_assoc_index=assoc,
        free_over_assoc=free,
        v_p_maximal_order_index=_maximal_order_or_none(profile),
        bound_general=bound,
        bound_easy=easy,
        witness=minimal_generator_recipe(profile).describe(),
        nu=None if profile.a == 0 else nu_data(profile),
        sources={"v_p_m": "formula", "v_p_assoc_index": "formula"},
    )


def profile_violations(profile: RamificationProfile) -> List[str]:
    """Every closed-form property that fails for a wild cyclic profile."""
    bad = []
    p, e, f, t, a, t0 = profile.p, profile.e_K, profile.f_K, profile.t, profile.a, profile.t0
    v = minimal_index_cyclic_p(profile)
    free, assoc = freeness_cyclic_p(profile)
    bound, easy = general_bound(p, p, f, p * e * f, p)
    if v > bound:
        bad.append(f"general bound {bound} < v = {v}")
    if not v < easy:
        bad.append(f"easy bound {easy} <= v = {v}")
    if assoc > v:
        bad.append("associated-order index exceeds the minimal index")
    if free != (assoc == v):
        bad.append("freeness flag disagrees with index equality")
    if t == 1 and v != f:
        bad.append("t = 1 but v != f_K")
    bound_e = a + (p - 1) * t0
    if e < bound_e or (not profile.almost_maximal and e == bound_e):
        bad.append("e_K >= a + (p-1) t_0 fails")
    if a == 0:
        if 2 * v != p * e * f:
            bad.append("a = 0 but v != p e_K f_K / 2")
        if v != maximal_order_index_cyclic(p, f, p, e, zeta_p_in_base=True):
            bad.append("a = 0 but v differs from the maximal-order index")
        if not free:
            bad.append("a = 0 but not free")
        return bad
    d = nu_data(profile)
    if d.mu > 0:
        bad.append("mu > 0")
    if sum(d.nu) + d.mu < 1:
        bad.append("sum nu + mu < 1")
    if d.n[0] != 0:
        bad.append("n_0 != 0")
    if any(not 0 <= d.n[i] <= d.nu[i] for i in range(p)):
        bad.append("n_i outside [0, nu_i]")
    if any(d.nu[i] > d.nu[i + 1] for i in range(p - 1)):
        bad.append("nu not non-decreasing")
    if d.nu[0] != 0:
        bad.append("nu_0 != 0")
    if not e >= d.nu[p - 1] or any(not e > d.nu[s] for s in range(p - 1)):
        bad.append("nu exceeds e_K")
    divides = (p - 1) % a == 0
    if divides:
        if not free:
            bad.append("a | p-1 but not free")
        k = (p - 1) // a
        if d.nu != tuple(i * t0 + i // k for i in range(p)):
            bad.append("a | p-1 but nu differs from i t_0 + floor(i/k)")
        if d.mu != 0:
            bad.append("a | p-1 but mu != 0")
    if free and not profile.almost_maximal and not divides:
        bad.append("free and not almost maximal but a does not divide p-1")
    return bad


@dataclass(frozen=True)
class SweepRow:
    p: int
    e_K: int
    f_K: int
    t: int
    a: int
    nu_sum: Optional[int]
    mu: Optional[int]
    v_p_m: int
    n_sum: Optional[int]
    free: bool
    bound: Fraction
    violations: Tuple[str, ...]

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "e_K": self.e_K,
            "f_K": self.f_K,
            "t": self.t,
            "a": self.a,
            "nu_sum": self.nu_sum,
            "mu": self.mu,
            "v_p_m": self.v_p_m,
            "n_sum": self.n_sum,
            "free": self.free,
            "bound": str(self.bound),
            "violations": list(self.violations),
        }


def sweep(p: int, e_max: int, f_K: int = 1, e_min: int = 1) -> List[SweepRow]:
    """Rows for every admissible (e_K, t) with e_min <= e_K <= e_max."""
    rows = []
    for e in range(e_min, e_max + 1):
        for t in valid_jumps(p, e):
            prof = profile_from_invariants(p, e, f_K, t)
            v = minimal_index_cyclic_p(prof)
            free, assoc = freeness_cyclic_p(prof)
            bound, _ = general_bound(p, p, f_K, p * e * f_K, p)
            if prof.a:
                d = nu_data(prof)
                nu_sum, mu, n_sum = sum(d.nu), d.mu, sum(d.n)
            else:
                nu_sum = mu = n_sum = None
            rows.append(
                SweepRow(
                    p=p,
                    e_K=e,
                    f_K=f_K,
                    t=t,
                    a=prof.a,
                    nu_sum=nu_sum,
                    mu=mu,
                    v_p_m=v,
                    n_sum=n_sum,
                    free=free,
                    bound=bound,
                    violations=tuple(profile_violations(prof)),
                )
            )
    return rows
