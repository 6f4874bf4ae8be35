from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from artifact.closed_forms import (
    abs_abelian_unreduced,
    assoc_index_cyclic_p,
    cyclotomic_disc_valuation,
    freeness_cyclic_p,
    general_bound,
    global_abelian_valuation,
    index_report,
    maximal_order_index_cyclic,
    minimal_generator_recipe,
    minimal_index_abs_abelian,
    minimal_index_cyclic_p,
    nu_data,
    profile_violations,
    sweep,
)
from artifact.errors import (
    GcdViolation,
    InvalidData,
    InvalidProfile,
    UnsupportedBase,
)
from artifact.ramification import profile_from_invariants, valid_jumps

P = profile_from_invariants


def test_nu_data_examples():
    d = nu_data(P(5, 4, 1, 3))
    assert (d.nu, d.mu, d.n) == ((0, 1, 1, 2, 3), 0, (0, 0, 1, 2, 3))
    d = nu_data(P(5, 2, 1, 2))
    assert (d.nu, d.mu, d.n) == ((0, 0, 1, 1, 2), 0, (0, 0, 1, 1, 2))
    d = nu_data(P(3, 1, 1, 1))
    assert (d.nu, d.mu, d.n) == ((0, 0, 1), 0, (0, 0, 1))


def test_nu_data_rejects_maximal():
    with pytest.raises(InvalidProfile):
        nu_data(P(2, 1, 1, 2))


def test_minimal_index_examples():
    assert minimal_index_cyclic_p(P(2, 1, 1, 2)) == 1
    assert minimal_index_cyclic_p(P(2, 2, 1, 1)) == 1
    assert minimal_index_cyclic_p(P(5, 4, 1, 3)) == 7
    assert minimal_index_cyclic_p(P(3, 2, 1, 3)) == 3


def test_freeness_examples():
    assert freeness_cyclic_p(P(3, 2, 1, 3)) == (True, 3)
    assert freeness_cyclic_p(P(5, 2, 1, 2)) == (True, 4)
    assert freeness_cyclic_p(P(5, 4, 1, 3)) == (False, 6)


def test_recipes():
    assert minimal_generator_recipe(P(3, 1, 1, 1)).describe() == "pi_L^1"
    assert minimal_generator_recipe(P(5, 4, 1, 3)).describe() == "pi_L^3"
    w = minimal_generator_recipe(P(2, 1, 1, 2))
    assert w.kind == "unit_sum"


def test_recipe_uses_correction_when_mu_negative():
    for p in (3, 5, 7):
        for e in range(1, 15):
            for t in valid_jumps(p, e):
                pr = P(p, e, 1, t)
                if pr.a and nu_data(pr).mu < 0:
                    w = minimal_generator_recipe(pr)
                    assert w.kind == "power_plus_correction"
                    assert w.index == nu_data(pr).i_m and w.shift == nu_data(pr).nu[w.index]
                    return
    pytest.fail("no profile with negative mu found")


def test_general_bound_examples():
    assert general_bound(3, 3, 1, 6, 3)[1] == 9
    assert general_bound(2, 2, 1, 2, 2)[0] == 2
    assert general_bound(2, 3, 1, 3, 3)[0] == 2


def test_cyclotomic_discriminants():
    assert cyclotomic_disc_valuation(3, 1, 1) == 1
    assert cyclotomic_disc_valuation(5, 0, 7) == 0
    assert cyclotomic_disc_valuation(3, 2, 1) == 9
    with pytest.raises(GcdViolation):
        cyclotomic_disc_valuation(3, 1, 6)


def test_abs_abelian_examples():
    assert minimal_index_abs_abelian(3, 1, 1, 1) == 1
    assert minimal_index_abs_abelian(3, 1, 1, 2) == 2
    assert minimal_index_abs_abelian(5, 2, 2, 1) == 12
    with pytest.raises(InvalidProfile):
        minimal_index_abs_abelian(2, 1, 1, 1)


@pytest.mark.parametrize("p", [3, 5, 7, 11, 13])
def test_abs_abelian_reduced_equals_unreduced(p):
    for n in range(0, 5):
        for d in range(1, 21):
            if d % p == 0:
                continue
            for f in range(1, 5):
                expected = Fraction(f * d * (p**n - 1), p - 1)
                assert abs_abelian_unreduced(p, f, n, d) == expected


def test_maximal_order_examples():
    assert maximal_order_index_cyclic(2, 1, 2, e_K=2, zeta_p_in_base=True) == 2
    assert maximal_order_index_cyclic(3, 1, 3) == 1
    assert maximal_order_index_cyclic(3, 1, 3, e_K=2, zeta_p_in_base=True) == 3
    with pytest.raises(UnsupportedBase):
        maximal_order_index_cyclic(5, 1, 5, e_K=2)


def test_global_examples():
    assert global_abelian_valuation(6, {3: (1, 2)}) == {3: 2}
    assert global_abelian_valuation(20, {5: (1, 4)}) == {5: 4}
    assert global_abelian_valuation(6, {}) == {}
    with pytest.raises(InvalidData):
        global_abelian_valuation(8, {2: (2, 1)})
    with pytest.raises(InvalidData):
        global_abelian_valuation(5, {3: (1, 2)})


def test_index_report_tame_and_unramified():
    from artifact.ramification import RamificationProfile

    rep = index_report(
        RamificationProfile(3, 1, 1, 2, 2, 1, 0, None, None, False, True, True, False, False)
    )
    assert rep.v_p_m == 0 and rep.free_over_assoc


def test_sweep_examples():
    rows = {(r.e_K, r.t): r for r in sweep(5, 8)}
    assert rows[(4, 3)].free is False
    assert all(r.free for r in sweep(3, 2))
    assert all(r.free for r in sweep(2, 12))
    assert all(not r.violations for r in rows.values())


def _brute_nu(p, e, t):
    a = t % p
    nu = [(a + i * t) // p for i in range(p)]
    mu = min(i * e - (p - 1) * nu[i] for i in range(p))
    n = [min(nu[i + j] - nu[j] for j in range(p - i)) for i in range(p)]
    return nu, mu, n


profiles = st.sampled_from([2, 3, 5, 7, 11, 13]).flatmap(
    lambda p: st.integers(1, 40).flatmap(
        lambda e: st.sampled_from(valid_jumps(p, e)).map(lambda t: (p, e, t))
    )
)


@settings(max_examples=300, deadline=None)
@given(pet=profiles, f=st.integers(1, 3))
def test_formulas_against_direct_evaluation(pet, f):
    p, e, t = pet
    pr = P(p, e, f, t)
    assert profile_violations(pr) == []
    if pr.a:
        nu, mu, n = _brute_nu(p, e, t)
        d = nu_data(pr)
        assert (list(d.nu), d.mu, list(d.n)) == (nu, mu, n)
        assert minimal_index_cyclic_p(pr) == f * (sum(nu) + mu)
        assert assoc_index_cyclic_p(pr) == f * sum(n)
    else:
        assert minimal_index_cyclic_p(pr) * 2 == p * e * f
