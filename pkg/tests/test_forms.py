import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from cantorvar.abelian import characters, make_group
from cantorvar.averages import ScaleLadder
from cantorvar.errors import CapExceeded
from cantorvar.exact import Cyclo
from cantorvar.forms import (FormContext, assembled_constant, c_p, certify_c_p,
                             jensen_worst_ratio, lambda_abs_intermediate, lambda_fast,
                             lambda_tilde_oracle, proposition_bound_check, scalar_lemma_check,
                             scalar_lemma_margin, theta_fast, theta_function, theta_haar_oracle,
                             theta_prime, xi)
from cantorvar.stepfn import constant, lp_norm_p, make_step, random_step, tilde_transform_F

G2, G3 = make_group([2]), make_group([3])
ONE = constant(G2)


def ctx_of(F, G, p, ks, **kw):
    return FormContext(F, G, p, ScaleLadder(tuple(ks)), **kw)


# -- scalar lemma ------------------------------------------------------------------

def test_c_p_values():
    assert c_p(2) == 1
    c4 = c_p(4)
    assert 0.333 - 1e-3 < c4 <= 1 / 3
    cert = certify_c_p(4)
    assert abs(cert.grid_argmin + 3) < 1e-3
    c3 = c_p(3)
    assert 0 < c3 <= 1
    # independent check: the infimum for p = 3 is attained near t = -2 - sqrt(2)
    assert c3 <= theta_function(-2 - math.sqrt(2), 3) <= c3 * (1 + 1e-3)


def test_c_p_is_a_lower_bound_on_a_dense_grid():
    t = np.concatenate([-np.geomspace(1e-4, 1e5, 400_001), np.geomspace(1e-4, 1e5, 400_001)])
    for p in (2.5, 3, 4, 5, 6):
        assert theta_function(t, p).min() >= c_p(p)


def test_c_p_rejects_small_p():
    with pytest.raises(ValueError):
        certify_c_p(1.5)


def test_theta_limits():
    for p in (3, 4):
        assert theta_function(1e-6, p) > 1e3
        assert abs(theta_function(1e8, p) - 1) < 1e-6
        assert abs(theta_function(-1e8, p) - 1) < 1e-6


def test_scalar_lemma_examples():
    assert scalar_lemma_check(2.5, 2.5, 4, c_p(4))
    assert scalar_lemma_check(1.0, 0.0, 3, c_p(3))
    margin, _ = scalar_lemma_margin(3.0, -1.25, 2, 1.0)
    assert abs(margin) < 1e-12
    margin, _ = scalar_lemma_margin(1.0, 2.0, 4, 0.333)
    assert abs(margin - (17 - 0.333)) < 1e-12


@given(st.floats(-1e3, 1e3), st.floats(-1e3, 1e3), st.sampled_from([2, 3, 4, 5]))
def test_scalar_lemma_property(a, b, p):
    assert scalar_lemma_check(a, b, p, c_p(p))


def test_assembled_constant():
    assert assembled_constant(2) == 3
    assert assembled_constant(4) == pytest.approx(5 / c_p(4))


# -- Lambda --------------------------------------------------------------------------

def test_lambda_examples():
    one1 = constant(G2, K=1)
    assert lambda_fast(ctx_of(one1, one1, 2, (0, 1))) == 0
    assert lambda_tilde_oracle(ctx_of(one1, one1, 2, (0, 1))) == 0
    assert lambda_fast(ctx_of(ONE, ONE, 2, (-1, 0))) == Fraction(1, 4)
    assert lambda_tilde_oracle(ctx_of(ONE, ONE, 2, (-1, 0))) == Fraction(1, 4)


def test_lambda_homogeneity(rng):
    F, G = random_step(rng, G2, 1, 1), random_step(rng, G2, 1, 1)
    base = lambda_fast(ctx_of(F, G, 2, (-1, 0, 1)))
    twice = lambda_fast(ctx_of(F.with_values(F.values * 2), G, 2, (-1, 0, 1)))
    assert twice == 4 * base


@pytest.mark.parametrize("orders,K,N,p,ks", [
    ([2], 1, 0, 2, (-1, 0)),
    ([2], 1, 1, 3, (-2, 0, 1)),
    ([3], 1, 0, 2, (-1, 1)),
    ([2, 2], 1, 0, 3, (0, 1)),
    ([4], 1, 0, 2, (-1, 0, 1)),
])
def test_lambda_substitution_exact(rng, orders, K, N, p, ks):
    g = make_group(orders)
    for cplx in (False, True):
        F = random_step(rng, g, K, N, nonnegative=False, complex_values=cplx)
        G = random_step(rng, g, K, N, nonnegative=False, complex_values=cplx)
        ctx = ctx_of(F, G, p, ks)
        assert lambda_fast(ctx) == lambda_tilde_oracle(ctx)


def test_lambda_oracle_enumeration_invariant(rng):
    g = make_group([4])
    F, G = random_step(rng, g, 1, 0), random_step(rng, g, 1, 0)
    table = characters(g).permuted([2, 3, 1])
    a = lambda_tilde_oracle(ctx_of(F, G, 2, (-1, 1)))
    b = lambda_tilde_oracle(ctx_of(F, G, 2, (-1, 1), table=table))
    assert a == b


def test_lambda_oracle_cap():
    big = constant(G2, K=2, N=2)
    with pytest.raises(CapExceeded):
        lambda_tilde_oracle(ctx_of(big, big, 4, (0, 1)))
    with pytest.raises(CapExceeded):
        lambda_tilde_oracle(ctx_of(ONE, ONE, 2, (-1, 0), max_terms=0))


def test_context_validation():
    with pytest.raises(ValueError):
        ctx_of(ONE, ONE, 1, (-1, 0))
    with pytest.raises(ValueError):
        ctx_of(ONE, ONE, 2.5, (-1, 0))
    with pytest.raises(ValueError):
        ctx_of(ONE, ONE, 2, (0, 1))
    with pytest.raises(ValueError):
        ctx_of(ONE, constant(G3), 2, (-1, 0))


# -- Theta family -----------------------------------------------------------------

def test_theta_examples():
    assert xi(ONE, 2, 0) == 1 == lp_norm_p(ONE, 4)
    one1 = constant(G2, K=1)
    assert theta_fast(one1, 2, (0, 1)) == 0
    assert theta_prime(one1, 2, (0, 1)) == 0
    assert xi(one1, 2, 1) == xi(one1, 2, 0) == 1


@pytest.mark.parametrize("orders,K,N,p,ks", [
    ([2], 1, 0, 2, (-1, 0)),
    ([2], 1, 1, 3, (-2, -1, 1)),
    ([3], 1, 1, 2, (-2, 0, 1)),
    ([2, 2], 1, 0, 3, (-1, 1)),
    ([4], 1, 0, 2, (-1, 0, 1)),
])
def test_theta_identities_exact(rng, orders, K, N, p, ks):
    g = make_group(orders)
    for _ in range(3):
        Ft = tilde_transform_F(random_step(rng, g, K, N))
        th = theta_fast(Ft, p, ks)
        assert th == theta_haar_oracle(Ft, p, ks)
        assert th + theta_prime(Ft, p, ks) == xi(Ft, p, ks[-1]) - xi(Ft, p, ks[0])


def test_theta_needs_real_data():
    z = make_step(G2, 0, 0, np.array([[Cyclo.gaussian(1, 1)]], dtype=object))
    with pytest.raises(ValueError):
        theta_fast(z, 2, (-1, 0))


def test_theta_inequalities_float(rng):
    for _ in range(30):
        g = make_group([int(rng.choice([2, 3]))])
        Ft = tilde_transform_F(random_step(rng, g, 1, 1, mode="float"))
        p = int(rng.choice([2, 3, 4]))
        ks = (-2, 0, 1)
        norm = lp_norm_p(Ft, 2 * p)
        assert theta_prime(Ft, p, ks) >= -1e-9 * norm
        assert theta_fast(Ft, p, ks) <= norm * (1 + 1e-9)
        for k in ks:
            assert -1e-9 * norm <= xi(Ft, p, k) <= norm * (1 + 1e-9)
        assert jensen_worst_ratio(Ft, p, ks) <= 1 + 1e-9


def test_abs_intermediate_dominates_lambda(rng):
    for _ in range(10):
        F = random_step(rng, G3, 1, 0, mode="float")
        G = random_step(rng, G3, 1, 0, mode="float")
        ctx = ctx_of(F, G, 2, (-1, 0, 1))
        inter = lambda_abs_intermediate(ctx)
        assert abs(lambda_fast(ctx)) <= inter * (1 + 1e-9)
        assert lambda_abs_intermediate(ctx, max_work=0) is None


# -- proposition ---------------------------------------------------------------------

def test_proposition_examples():
    one1 = constant(G2, K=1)
    rep = proposition_bound_check(ctx_of(one1, one1, 2, (0, 1)))
    assert rep.variation_sum == 0 and rep.bound == pytest.approx(3)
    rep = proposition_bound_check(ctx_of(ONE, ONE, 2, (-1, 0)))
    assert rep.variation_sum == pytest.approx(0.25)
    assert rep.bound == pytest.approx(3)
    assert rep.ratio == pytest.approx(1 / 12)
    assert all(link.passed for link in rep.links.values())
    assert set(rep.to_json()["links"]) == set(rep.links)


def test_proposition_needs_nonnegative_data():
    F = make_step(G2, 0, 0, [[-1]])
    with pytest.raises(ValueError):
        proposition_bound_check(ctx_of(F, F, 2, (-1, 0)))


def test_proposition_links_on_random_data(rng):
    for _ in range(25):
        g = make_group([int(rng.choice([2, 3]))])
        F = random_step(rng, g, 1, 1, mode="float")
        G = random_step(rng, g, 1, 1, mode="float")
        p = int(rng.choice([2, 3, 4]))
        rep = proposition_bound_check(ctx_of(F, G, p, (-2, -1, 1)))
        assert rep.ratio <= 1
        bad = [name for name, link in rep.links.items() if not link.passed]
        assert bad == []


def test_exact_context_runs_proposition_in_float(rng):
    F, G = random_step(rng, G2, 1, 0), random_step(rng, G2, 1, 0)
    rep = proposition_bound_check(ctx_of(F, G, 3, (-1, 0, 1)))
    assert rep.ratio <= 1
