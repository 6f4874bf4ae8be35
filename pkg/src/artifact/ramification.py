"""Lower ramification filtration, jumps and the derived profile."""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Dict, FrozenSet, Optional

from .errors import InvalidJump, InvariantViolation, PrecisionExhausted, UnsupportedTower
from .field_tower import EISENSTEIN, GaloisLatticeModel, TowerElement, is_prime
from .padic_arith import AtLeast


@dataclass(frozen=True)
class RamificationProfile:
    p: int
    e_K: int
    f_K: int
    n: int
    e_LK: int
    f_LK: int
    t: int
    a: Optional[int]
    t0: Optional[int]
    unramified: bool
    tame: bool
    weakly_ramified: bool
    maximal: bool
    almost_maximal: bool

    @property
    def wild(self) -> bool:
        return not self.unramified and not self.tame

    @property
    def max_jump_numerator(self) -> int:
        """e_K * p; the largest admissible jump is this over p - 1."""
        return self.e_K * self.p

    def to_dict(self) -> dict:
        return asdict(self)


def _wild_profile(p, e_K, f_K, t) -> RamificationProfile:
    a = t % p
    t0 = (t - a) // p
    # e_K*p/(p-1) - t <= 1, kept in integers
    almost = e_K * p - t * (p - 1) <= p - 1
    return RamificationProfile(
        p=p,
        e_K=e_K,
        f_K=f_K,
        n=p,
        e_LK=p,
        f_LK=1,
        t=t,
        a=a,
        t0=t0,
        unramified=False,
        tame=False,
        weakly_ramified=t <= 1,
        maximal=a == 0,
        almost_maximal=almost,
    )


def jump_is_valid(p: int, e_K: int, t: int) -> bool:
    if t < 1 or t * (p - 1) > e_K * p:
        return False
    if t % p == 0 and t * (p - 1) != e_K * p:
        return False
    return True


def valid_jumps(p: int, e_K: int):
    return [t for t in range(1, e_K * p // (p - 1) + 1) if jump_is_valid(p, e_K, t)]


def profile_from_invariants(p: int, e_K: int, f_K: int, t: int) -> RamificationProfile:
    """Profile of a ramified cyclic degree-p extension with jump t."""
    if not is_prime(p) or e_K < 1 or f_K < 1:
        raise InvalidJump(f"invalid base invariants p={p}, e_K={e_K}, f_K={f_K}")
    if not jump_is_valid(p, e_K, t):
        raise InvalidJump(
            f"jump t={t} is not admissible for p={p}, e_K={e_K} "
            f"(need 1 <= t <= {e_K * p}/{p - 1}, and t = e_K*p/(p-1) when p | t)"
        )
    return _wild_profile(p, e_K, f_K, t)


def check_profile(profile: RamificationProfile) -> None:
    """Raise InvariantViolation if a wild cyclic profile breaks the jump constraints."""
    if not profile.wild:
        return
    p, e, t, a, t0 = profile.p, profile.e_K, profile.t, profile.a, profile.t0
    if not 1 <= t or t * (p - 1) > e * p:
        raise InvariantViolation(f"jump {t} outside [1, {e}*{p}/({p}-1)]")
    if a == 0 and t * (p - 1) != e * p:
        raise InvariantViolation(f"p | t but t={t} is not maximal")
    if profile.maximal != (a == 0):
        raise InvariantViolation("maximal flag disagrees with a = 0")
    if profile.almost_maximal != (e * p - t * (p - 1) <= p - 1):
        raise InvariantViolation("almost-maximal flag is wrong")
    bound = a + (p - 1) * t0
    if e < bound or (not profile.almost_maximal and e == bound):
        raise InvariantViolation(f"e_K = {e} violates e_K >= a + (p-1)t_0 = {bound}")


def _scan_cap(model: GaloisLatticeModel) -> int:
    p = model.p
    return model.top.e * p // (p - 1) + 2


def lower_index(model: GaloisLatticeModel, k: int) -> int:
    """i_G(sigma^k) = min over the integral basis of v_L((sigma^k - 1) b_j).

    Returns a value capped at the filtration scan limit plus one for the
    identity.
    """
    L = model.top
    cap = _scan_cap(model)
    if k % model.n == 0:
        return cap + 1
    Db = model.base.degree
    best = None
    for j in range(model.n):
        col = j * Db
        img = [model.flat[k][r][col] for r in range(L.degree)]
        b = [0] * L.degree
        b[col] = 1
        diff = TowerElement(L, [x - y for x, y in zip(img, b)], 0, model.precision)
        v = diff.valuation()
        if isinstance(v, AtLeast):
            if v.bound <= cap + 1:
                raise PrecisionExhausted(
                    f"v_L((g-1)b) only known to be >= {v.bound}, below the scan cap"
                )
            v = cap + 1
        best = v if best is None else min(best, v)
    return best


def filtration(model: GaloisLatticeModel) -> Dict[int, FrozenSet[int]]:
    """Lower-numbering groups G_i as sets of exponents k of sigma^k, i >= 0."""
    idx = {k: lower_index(model, k) for k in range(model.n)}
    cap = _scan_cap(model)
    out = {}
    i = 0
    while True:
        group = frozenset(k for k in range(model.n) if idx[k] >= i + 1)
        out[i] = group
        if group == frozenset({0}) or i > cap:
            break
        i += 1
    return out


def jump(model: GaloisLatticeModel) -> int:
    """The lower jump of a prime-degree model; -1 when unramified."""
    if model.n == 1:
        return -1
    return lower_index(model, 1) - 1


def profile(model: GaloisLatticeModel) -> RamificationProfile:
    """Ramification profile of a prime-degree or unramified model."""
    p = model.p
    K = model.base
    n = model.n
    t = jump(model)
    if model.kind != EISENSTEIN:
        if t != -1:
            raise InvariantViolation("unramified model with a nontrivial inertia group")
        return RamificationProfile(
            p=p,
            e_K=K.e,
            f_K=K.f,
            n=n,
            e_LK=1,
            f_LK=n,
            t=-1,
            a=None,
            t0=None,
            unramified=True,
            tame=False,
            weakly_ramified=True,
            maximal=False,
            almost_maximal=False,
        )
    if not is_prime(n):
        raise UnsupportedTower("only prime-degree Eisenstein steps are supported")
    if n != p:
        if t != 0:
            raise InvariantViolation(f"tame extension with jump {t}")
        return RamificationProfile(
            p=p,
            e_K=K.e,
            f_K=K.f,
            n=n,
            e_LK=n,
            f_LK=1,
            t=0,
            a=None,
            t0=None,
            unramified=False,
            tame=True,
            weakly_ramified=True,
            maximal=False,
            almost_maximal=False,
        )
    prof = _wild_profile(p, K.e, K.f, t)
    check_profile(prof)
    return prof
