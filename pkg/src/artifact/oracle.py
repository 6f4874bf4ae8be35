"""Brute-force ground truth for minimal indices and associated orders.

The minimal index is found by the effective procedure: pick any normal
basis generator w0 with index valuation R0, then every residue class of
O_L modulo pi_K**(R0+1) O_L is tried. Index valuations up to R0 are constant
on such a class, so the minimum over representatives is exact.

For speed each class is evaluated on the flattened Z_p lattice: the
O_K[G]-span of w is the Z_p-span of kappa * g(w) for kappa in the Z_p basis
of O_K, whose Z_p-index is p**(f_K * v_K). Determinants are only needed
modulo p**(f_K*R0 + 1), which is exact with minimal-valuation pivoting.
"""

from __future__ import annotations

import itertools
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from math import comb
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .closed_forms import Witness, minimal_generator_recipe
from .errors import (
    BudgetExceeded,
    InvariantViolation,
    NotGenerator,
    PrecisionExhausted,
    SearchExhausted,
)
from .field_tower import GaloisLatticeModel, TowerElement, build_lattice_model
from .padic_arith import AtLeast, det_valuation, dvr_smith_form, vp_capped
from .ramification import RamificationProfile

DEFAULT_BUDGET = 10**7
BASE_PRECISION = 32
PRECISION_CAP = 4096
CHUNK = 1 << 15


# single-generator index


def _as_base_coords(model: GaloisLatticeModel, omega) -> List[TowerElement]:
    K = model.base
    if isinstance(omega, TowerElement) and omega.tower.key == model.top.key:
        return model.to_base_coords(omega)
    out = []
    for c in omega:
        if isinstance(c, TowerElement):
            out.append(c)
        elif isinstance(c, int):
            out.append(K.from_int(c))
        else:
            out.append(K.element(list(c)))
    if len(out) != model.n:
        raise ValueError(f"expected {model.n} coordinates over O_K")
    return out


def generated_module_matrix(model: GaloisLatticeModel, omega) -> List[List[TowerElement]]:
    """The matrix (w | M_2 w | ... | M_n w) over O_K."""
    w = _as_base_coords(model, omega)
    cols = [model.apply_base(k, w) for k in range(model.n)]
    return [[cols[k][r] for k in range(model.n)] for r in range(model.n)]


def rebuild_model(model: GaloisLatticeModel, precision: int) -> GaloisLatticeModel:
    """The same model recomputed at another working precision."""
    return build_lattice_model(
        model.top.with_precision(precision), model.base.with_precision(precision)
    )


def _exact_input(omega) -> bool:
    if isinstance(omega, TowerElement):
        return False
    return all(
        isinstance(c, int) or (isinstance(c, (list, tuple)) and all(isinstance(x, int) for x in c))
        for c in omega
    )


def index_of_generated_module(
    model: GaloisLatticeModel, omega, retry_cap: int = PRECISION_CAP
) -> int:
    """v_K([O_L : O_K[G] w]); the group index is p**(f_K * result).

    Exact integer coordinates are retried at doubled precision up to
    ``retry_cap`` before w is declared not to be a normal basis generator.
    """
    exact = _exact_input(omega)
    while True:
        w = _as_base_coords(model, omega)
        if any(c.den for c in w):
            raise ValueError("w must be integral")
        try:
            return det_valuation(generated_module_matrix(model, w), model.base)
        except PrecisionExhausted as exc:
            failure = NotGenerator(
                f"determinant vanishes to precision {model.precision}: "
                "not a normal basis generator"
            )
            if not exact or 2 * model.precision > retry_cap:
                raise failure from exc
            try:
                model = rebuild_model(model, 2 * model.precision)
            except PrecisionExhausted:
                raise failure from exc


# flattened Z_p kernel


def _flat_contributions(model: GaloisLatticeModel, mod: int) -> np.ndarray:
    """Array C[u] with Mat(w) = sum_u w_u C[u] on flat coordinates, mod ``mod``."""
    L = model.top
    D = L.degree
    Db = model.base.degree
    blocks = []
    for g in range(model.n):
        G = model.flat[g]
        for c in range(Db):
            kappa = [0] * D
            kappa[c] = 1
            Mk = L.mult_matrix(kappa)
            B = [[sum(Mk[r][s] * G[s][u] for s in range(D)) % mod for u in range(D)] for r in range(D)]
            blocks.append(B)
    C = np.zeros((D, D, D), dtype=object)
    for col, B in enumerate(blocks):
        for r in range(D):
            for u in range(D):
                C[u, r, col] = B[r][u]
    return C


def det_valuation_mod(rows, p: int, M: int) -> int:
    """v_p(det) of an integer matrix, capped at M (M means det = 0 mod p**M)."""
    P = p**M
    A = [[x % P for x in r] for r in rows]
    n = len(A)
    total = 0
    for k in range(n):
        best = None
        for i in range(k, n):
            for j in range(k, n):
                v = vp_capped(A[i][j], p, M)
                if best is None or v < best[0]:
                    best = (v, i, j)
        s, i, j = best
        if s >= M:
            return M
        total += s
        if total >= M:
            return M
        A[k], A[i] = A[i], A[k]
        for row in A:
            row[k], row[j] = row[j], row[k]
        ps = p**s
        uinv = pow(A[k][k] // ps, -1, P)
        for r in range(k + 1, n):
            if A[r][k]:
                f = (A[r][k] // ps) * uinv % P
                A[r] = [(A[r][c] - f * A[k][c]) % P if c >= k else A[r][c] for c in range(n)]
    return min(total, M)


def _np_modinv(u, p, M):
    P = p**M
    e = p ** (M - 1) * (p - 1) - 1
    result = np.ones_like(u)
    base = u % P
    while e:
        if e & 1:
            result = result * base % P
        base = base * base % P
        e >>= 1
    return result


def batch_det_valuation(A: np.ndarray, p: int, M: int) -> np.ndarray:
    """Vectorised ``det_valuation_mod`` over a stack of matrices (int64, mod p**M)."""
    P = p**M
    A = A % P
    B, D, _ = A.shape
    idx = np.arange(B)
    total = np.zeros(B, dtype=np.int64)
    powers = np.array([p**i for i in range(M + 1)], dtype=np.int64)
    for k in range(D):
        sub = A[:, k:, k:]
        val = np.full(sub.shape, M, dtype=np.int64)
        nz = sub != 0
        val[nz] = 0
        for i in range(1, M):
            val += nz & (sub % powers[i] == 0)
        m = D - k
        flat = val.reshape(B, m * m)
        pos = flat.argmin(axis=1)
        s = flat[idx, pos]
        r = pos // m + k
        c = pos % m + k
        total += s
        # swap rows k <-> r and columns k <-> c
        tmp = A[idx, k, :].copy()
        A[idx, k, :] = A[idx, r, :]
        A[idx, r, :] = tmp
        tmp = A[idx, :, k].copy()
        A[idx, :, k] = A[idx, :, c]
        A[idx, :, c] = tmp
        if k == D - 1:
            break
        live = s < M
        ps = powers[np.minimum(s, M)]
        unit = np.where(live, A[idx, k, k] // ps, 1)
        uinv = np.where(live, _np_modinv(unit, p, M), 0)
        factor = (A[:, k + 1 :, k] // ps[:, None]) % P * uinv[:, None] % P
        A[:, k + 1 :, k:] = (A[:, k + 1 :, k:] - factor[:, :, None] * A[:, None, k, k:]) % P
    return np.minimum(total, M)


def _fits_int64(p: int, M: int, nvars: int) -> bool:
    P = p**M
    return P * P < 2**62 and nvars * p * P < 2**62


@dataclass
class _EnumJob:
    p: int
    M: int
    f_K: int
    nvars: int
    C: np.ndarray  # (nvars, D, D) contributions, int64 or object


def _enum_chunk(job: _EnumJob, start: int, stop: int):
    p, M, V = job.p, job.M, job.nvars
    idx = np.arange(start, stop, dtype=np.int64)
    weights = np.array([p ** (V - 1 - v) for v in range(V)], dtype=np.int64)
    digits = (idx[:, None] // weights[None, :]) % p
    D = job.C.shape[1]
    P = p**M
    if job.C.dtype == object:
        vals = []
        for row in digits.tolist():
            mat = [[0] * D for _ in range(D)]
            for v, t in enumerate(row):
                if t:
                    Cv = job.C[v]
                    for r in range(D):
                        for c in range(D):
                            mat[r][c] += t * Cv[r, c]
            vals.append(det_valuation_mod(mat, p, M))
        vals = np.array(vals, dtype=np.int64)
    else:
        mats = np.tensordot(digits, job.C, axes=(1, 0)) % P
        vals = batch_det_valuation(mats, p, M)
    best = int(vals.min())
    first = start + int(np.argmax(vals == best))
    hist = np.bincount(vals, minlength=M + 1)
    return best, first, hist


_WORKER_JOB: Optional[_EnumJob] = None


def _init_worker(job):
    global _WORKER_JOB
    _WORKER_JOB = job


def _worker_chunk(bounds):
    return _enum_chunk(_WORKER_JOB, *bounds)


def enumerate_classes(job: _EnumJob, count: int, workers: int = 1, chunk: int = CHUNK):
    """Minimum (valuation, index) over all digit vectors, plus a histogram."""
    chunks = [(s, min(s + chunk, count)) for s in range(0, count, chunk)]
    if workers > 1 and len(chunks) > 1:
        with ProcessPoolExecutor(
            max_workers=workers, initializer=_init_worker, initargs=(job,)
        ) as pool:
            results = list(pool.map(_worker_chunk, chunks))
    else:
        results = [_enum_chunk(job, s, e) for s, e in chunks]
    best = min((b, f) for b, f, _ in results)
    hist = sum(h for _, _, h in results)
    return best, hist


# generator search


def realize_witness(model: GaloisLatticeModel, witness: Witness) -> TowerElement:
    """The L element described by a closed-form witness recipe."""
    L = model.top
    g = L.generator()
    if witness.kind == "unit_sum":
        acc = L.from_int(1)
        for i in range(1, model.n):
            acc = acc + g**i
        return acc
    base = g**witness.a
    if witness.kind == "power":
        return base
    fi = sigma_minus_one_power(model, base, witness.index)
    scale = L.embed(model.base.uniformizer_power(-witness.shift))
    corr = fi * scale
    if corr.den:
        raise InvariantViolation("witness correction term is not integral")
    return base + corr


def sigma_minus_one_power(model: GaloisLatticeModel, x: TowerElement, i: int) -> TowerElement:
    """(sigma - 1)**i applied to x."""
    acc = None
    for k in range(i + 1):
        term = model.apply(k % model.n, x) * (comb(i, k) * (-1) ** (i - k))
        acc = term if acc is None else acc + term
    return acc


def _flat_det_ok(model, C_full, w_flat, M) -> bool:
    D = model.top.degree
    mat = [[0] * D for _ in range(D)]
    for u, x in enumerate(w_flat):
        if x:
            for r in range(D):
                for c in range(D):
                    mat[r][c] += x * C_full[u, r, c]
    return det_valuation_mod(mat, model.p, M) < M


def find_normal_basis_generator(
    model: GaloisLatticeModel,
    profile: Optional[RamificationProfile] = None,
    seed: int = 0,
    random_tries: int = 200,
) -> Tuple[List[TowerElement], str]:
    """Some integral normal basis generator and a description of how it was found."""
    if profile is not None and profile.wild:
        w = realize_witness(model, minimal_generator_recipe(profile))
        try:
            index_of_generated_module(model, w, retry_cap=model.precision)
            return model.to_base_coords(w), "closed-form witness"
        except NotGenerator:
            pass
    L = model.top
    D = L.degree
    N = model.precision
    C_full = _flat_contributions(model, model.p**N)
    for size in range(1, D + 1):
        for support in itertools.combinations(range(D), size):
            w = [int(i in support) for i in range(D)]
            if _flat_det_ok(model, C_full, w, N):
                x = L.element(w)
                return model.to_base_coords(x), f"0/1 vector {w}"
    rng = random.Random(seed)
    for _ in range(random_tries):
        w = [rng.randrange(1, L.p) for _ in range(D)]
        if _flat_det_ok(model, C_full, w, N):
            return model.to_base_coords(L.element(w)), f"random vector {w}"
    raise SearchExhausted("no normal basis generator found; precision may be too low")


# the effective procedure


@dataclass
class OracleResult:
    v_K_min: int
    v_p_m: int
    witness_digits: Tuple[int, ...]
    witness_coords: Tuple[Tuple[int, ...], ...]
    R_0: int
    omega0_source: str
    classes_enumerated: int
    histogram: Dict[str, int]
    v_p_assoc_index: Optional[int] = None
    v_K_assoc_index: Optional[int] = None
    assoc_pivots: Optional[Tuple[int, ...]] = None
    assoc_basis: Optional[dict] = None
    free_over_assoc: Optional[bool] = None
    assoc_generator: Optional[Tuple[Tuple[int, ...], ...]] = None

    def to_dict(self) -> dict:
        return {
            "v_K_min": self.v_K_min,
            "v_p_m": self.v_p_m,
            "witness_digits": list(self.witness_digits),
            "witness_coords": [list(c) for c in self.witness_coords],
            "R_0": self.R_0,
            "omega0_source": self.omega0_source,
            "classes_enumerated": self.classes_enumerated,
            "histogram": dict(self.histogram),
            "v_p_assoc_index": self.v_p_assoc_index,
            "v_K_assoc_index": self.v_K_assoc_index,
            "assoc_pivots": None if self.assoc_pivots is None else list(self.assoc_pivots),
            "assoc_basis": self.assoc_basis,
            "free_over_assoc": self.free_over_assoc,
            "assoc_generator": None
            if self.assoc_generator is None
            else [list(c) for c in self.assoc_generator],
        }


def _digit_vectors(model: GaloisLatticeModel, R0: int):
    """Flat L coordinates of theta^a pi_K^j b_i, ordered by (i, j, a)."""
    L, K = model.top, model.base
    f = K.f
    Db = K.degree
    piK = list(K.uniformizer_coords()) + [0] * (L.degree - Db)
    one = [1] + [0] * (L.degree - 1)
    pis = [one]
    for _ in range(R0):
        pis.append(L.mul_coords(pis[-1], piK))
    vecs = []
    for i in range(model.n):
        b = [0] * L.degree
        b[i * Db] = 1
        for j in range(R0 + 1):
            for a in range(f):
                theta = [0] * L.degree
                theta[a] = 1
                vecs.append(L.mul_coords(L.mul_coords(theta, pis[j]), b))
    return vecs


def _digits_of(index: int, p: int, V: int) -> Tuple[int, ...]:
    return tuple((index // p ** (V - 1 - v)) % p for v in range(V))


def minimal_index_search(
    model: GaloisLatticeModel,
    profile: Optional[RamificationProfile] = None,
    budget: int = DEFAULT_BUDGET,
    workers: int = 1,
    chunk: int = CHUNK,
) -> OracleResult:
    p = model.p
    K = model.base
    n = model.n
    f_K = K.f
    omega0, source = find_normal_basis_generator(model, profile)
    R0 = index_of_generated_module(model, omega0)
    V = n * (R0 + 1) * f_K
    count = p**V
    if count > budget:
        raise BudgetExceeded(count, budget)
    M = f_K * R0 + 1
    if M > model.precision:
        raise PrecisionExhausted("model precision is below the enumeration modulus")
    P = p**M
    C_full = _flat_contributions(model, P)
    vecs = _digit_vectors(model, R0)
    D = model.top.degree
    Cv = np.zeros((V, D, D), dtype=object)
    for v, vec in enumerate(vecs):
        acc = np.zeros((D, D), dtype=object)
        for u, x in enumerate(vec):
            if x:
                acc = acc + x * C_full[u]
        Cv[v] = acc % P
    if _fits_int64(p, M, V):
        Cv = Cv.astype(np.int64)
    job = _EnumJob(p=p, M=M, f_K=f_K, nvars=V, C=Cv)
    (best, first), hist = enumerate_classes(job, count, workers, chunk)
    if best > f_K * R0:
        raise InvariantViolation("no residue class reproduces the pilot index")
    if best % f_K:
        raise InvariantViolation("Z_p index is not a power of the norm of pi_K")
    R = best // f_K
    digits = _digits_of(first, p, V)
    w = [0] * D
    for t, vec in zip(digits, vecs):
        if t:
            w = [x + t * y for x, y in zip(w, vec)]
    w_el = model.top.element(w)
    check = index_of_generated_module(model, w_el)
    if check != R:
        raise InvariantViolation(f"witness re-evaluates to {check}, expected {R}")
    histogram = {}
    for v in range(M):
        if hist[v]:
            if v % f_K:
                raise InvariantViolation("Z_p index is not a power of the norm of pi_K")
            histogram[str(v // f_K)] = int(hist[v])
    if hist[M]:
        histogram[f">{R0}"] = int(hist[M])
    Db = K.degree
    coords = tuple(tuple(w[i * Db : (i + 1) * Db]) for i in range(n))
    return OracleResult(
        v_K_min=R,
        v_p_m=f_K * R,
        witness_digits=digits,
        witness_coords=coords,
        R_0=R0,
        omega0_source=source,
        classes_enumerated=count,
        histogram=histogram,
    )


# associated order


@dataclass
class AssociatedOrder:
    pivots: Tuple[int, ...]
    v_K_index: int
    v_p_index: int
    den_exponent: int
    hnf: Tuple[Tuple[Tuple[int, ...], ...], ...]  # columns of K coordinates

    def basis_dict(self) -> dict:
        return {
            "den_exponent": self.den_exponent,
            "columns": [[list(x) for x in col] for col in self.hnf],
        }


def _canonical_rep(K, x: TowerElement, k: int) -> Tuple[int, ...]:
    """Exact digit representative of an integral x modulo pi_K**k."""
    pinv = K.uniformizer_power(-1)
    pic = K.uniformizer_coords()
    rep = [0] * K.degree
    power = [1] + [0] * (K.degree - 1)
    y = x
    for _ in range(k):
        if y.den:
            raise InvariantViolation("digit expansion met a non-integral remainder")
        if y.prec < 1:
            raise PrecisionExhausted("ran out of digits while reducing a lattice entry")
        d = y.residue()
        lift = [0] * K.degree
        lift[: len(d)] = d
        term = K.mul_coords(lift, power)
        rep = [a + b for a, b in zip(rep, term)]
        y = (y - K.element(lift)) * pinv
        power = K.mul_coords(power, pic)
    return tuple(rep)


def _hnf(K, cols: List[List[TowerElement]]) -> Tuple[Tuple[Tuple[int, ...], ...], ...]:
    """Canonical lower-triangular basis of the O_K-lattice spanned by the columns."""
    n = len(cols)
    B = [list(c) for c in cols]
    diag = []
    for i in range(n):
        best = None
        for j in range(i, n):
            v = B[j][i].valuation()
            if isinstance(v, int) and (best is None or v < best[0]):
                best = (v, j)
        if best is None:
            raise PrecisionExhausted("lattice basis is degenerate to precision")
        k, j = best
        B[i], B[j] = B[j], B[i]
        unit = B[i][i] * K.uniformizer_power(-k)
        uinv = unit.inverse()
        B[i] = [x * uinv for x in B[i]]
        B[i][i] = K.uniformizer_power(k)
        pinv = K.uniformizer_power(-k)
        for j in range(i + 1, n):
            if B[j][i].is_zero():
                continue
            q = B[j][i] * pinv
            B[j] = [B[j][r] - q * B[i][r] for r in range(n)]
            B[j][i] = K.zero()
        diag.append(k)
    out = []
    for i in range(n):
        col = B[i]
        exact = [None] * n
        for r in range(i):
            exact[r] = (0,) * K.degree
        pk = [1] + [0] * (K.degree - 1)
        for _ in range(diag[i]):
            pk = K.mul_coords(pk, K.uniformizer_coords())
        exact[i] = tuple(pk)
        for r in range(i + 1, n):
            x = col[r]
            rep = _canonical_rep(K, x, diag[r])
            q = (x - K.element(list(rep))) * K.uniformizer_power(-diag[r])
            col = [col[s] - q * B[r][s] for s in range(n)]
            exact[r] = rep
        out.append(tuple(exact))
    return tuple(out)


def associated_order_lattice(model: GaloisLatticeModel) -> AssociatedOrder:
    """Associated order of O_L inside K[G], in the basis of group elements."""
    K = model.base
    n = model.n
    T = []
    for j in range(n):
        for r in range(n):
            T.append([model.matrices[k][r][j] for k in range(n)])
    sf = dvr_smith_form(T, K)
    if sf.rank_deficient:
        raise PrecisionExhausted("group algebra acts degenerately to precision")
    S = max(sf.valuations)
    cols = []
    for i, s in enumerate(sf.valuations):
        scale = K.uniformizer_power(S - s)
        cols.append([sf.Q[r][i] * scale for r in range(n)])
    hnf = _hnf(K, cols)
    index = sum(sf.valuations)
    return AssociatedOrder(
        pivots=tuple(sorted(sf.valuations)),
        v_K_index=index,
        v_p_index=K.f * index,
        den_exponent=S,
        hnf=hnf,
    )


def check_freeness(result: OracleResult, assoc: AssociatedOrder):
    """(free, generator over the associated order or None)."""
    free = result.v_K_min == assoc.v_K_index
    if result.v_K_min < assoc.v_K_index:
        raise InvariantViolation("minimal index below the associated-order index")
    return free, (result.witness_coords if free else None)


def run_oracle(
    model: GaloisLatticeModel,
    profile: Optional[RamificationProfile] = None,
    budget: int = DEFAULT_BUDGET,
    workers: int = 1,
) -> OracleResult:
    """Minimal index search plus associated order and freeness."""
    res = minimal_index_search(model, profile, budget, workers)
    assoc = associated_order_lattice(model)
    free, gen = check_freeness(res, assoc)
    res.v_p_assoc_index = assoc.v_p_index
    res.v_K_assoc_index = assoc.v_K_index
    res.assoc_pivots = assoc.pivots
    res.assoc_basis = assoc.basis_dict()
    res.free_over_assoc = free
    res.assoc_generator = gen
    return res
