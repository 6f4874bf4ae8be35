import pytest

from artifact.errors import InvalidJump, InvariantViolation
from artifact.ramification import (
    RamificationProfile,
    check_profile,
    filtration,
    jump,
    lower_index,
    profile,
    profile_from_invariants,
    valid_jumps,
)

from conftest import catalog_model


def test_sqrt2_filtration():
    m, _ = catalog_model("Q2(sqrt2)/Q2")
    G = filtration(m)
    assert G[0] == G[1] == G[2] == frozenset({0, 1})
    assert G[3] == frozenset({0})


def test_profiles_from_models():
    _, pr = catalog_model("Q2(sqrt2)/Q2")
    assert (pr.t, pr.a, pr.t0, pr.maximal) == (2, 0, 1, True)
    _, pr = catalog_model("Q2(sqrt-1)/Q2")
    assert (pr.t, pr.a, pr.t0) == (1, 1, 0)
    assert pr.weakly_ramified and pr.almost_maximal
    _, pr = catalog_model("cyclic cubic/Q3")
    assert (pr.t, pr.a, pr.t0) == (1, 1, 0)
    _, pr = catalog_model("Q4/Q2")
    assert pr.unramified and pr.t == -1


def test_unramified_filtration_is_trivial_from_zero():
    m, _ = catalog_model("Q4/Q2")
    assert filtration(m)[0] == frozenset({0})


def test_jump_equals_sigma_pi_minus_pi():
    from artifact.catalog import CATALOG

    for e in CATALOG:
        m, pr = catalog_model(e.name)
        if m.kind != "eisenstein":
            continue
        pi = m.top.generator()
        assert jump(m) == (m.apply(1, pi) - pi).valuation() - 1
        assert lower_index(m, 1) == jump(m) + 1


def test_profile_from_invariants_examples():
    pr = profile_from_invariants(5, 4, 1, 3)
    assert (pr.a, pr.t0, pr.almost_maximal) == (3, 0, False)
    pr = profile_from_invariants(3, 2, 1, 3)
    assert pr.a == 0 and pr.maximal
    with pytest.raises(InvalidJump):
        profile_from_invariants(3, 1, 1, 2)
    with pytest.raises(InvalidJump):
        profile_from_invariants(5, 8, 1, 5)


def test_profile_round_trip_on_models():
    from artifact.catalog import CATALOG

    for e in CATALOG:
        m, pr = catalog_model(e.name)
        if pr.wild:
            assert profile_from_invariants(pr.p, pr.e_K, pr.f_K, pr.t) == pr


@pytest.mark.parametrize("p", [2, 3, 5, 7])
def test_every_valid_jump_obeys_the_constraints(p):
    for e in range(1, 25):
        for t in valid_jumps(p, e):
            pr = profile_from_invariants(p, e, 1, t)
            check_profile(pr)
            assert e >= pr.a + (p - 1) * pr.t0


def test_check_profile_catches_bad_flags():
    pr = profile_from_invariants(5, 4, 1, 3)
    bad = RamificationProfile(**{**pr.to_dict(), "almost_maximal": True})
    with pytest.raises(InvariantViolation):
        check_profile(bad)
