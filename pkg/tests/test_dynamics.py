from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cantorvar.abelian import make_group
from cantorvar.averages import discrete_average, ergodic_average
from cantorvar.dynamics import (explicit_system, jump_check, make_translation_system,
                                product_point, product_system, regular_system,
                                system_from_json, theorem_check, transference_check,
                                translation_average_oracle)
from cantorvar.forms import assembled_constant

G2, G3 = make_group([2]), make_group([3])


def fr_grid(rng, shape, lo=-4, hi=5):
    size = int(np.prod(shape))
    vals = [Fraction(int(a), int(b)) for a, b in zip(rng.integers(lo, hi, size),
                                                     rng.integers(1, 4, size))]
    return np.array(vals, dtype=object).reshape(shape)


def test_regular_system():
    sys = regular_system(G2, 2)
    assert sys.size == 4
    assert sys.axiom_failures(exhaustive=True) == []
    assert np.array_equal(sys.S((1, 0)), sys.T((1, 0)))
    assert not np.array_equal(sys.S((1, 0)), np.arange(4))


def test_two_point_toggles():
    # B = Z/2, S toggles with a_0 and T with a_1
    sys = make_translation_system(G2, 2, [2], [(1,), (0,)], [(0,), (1,)])
    assert sys.size == 2
    assert sys.axiom_failures(exhaustive=True) == []
    assert list(sys.S((1, 0))) == [1, 0] and list(sys.S((0, 1))) == [0, 1]
    assert list(sys.T((0, 1))) == [1, 0] and list(sys.T((1, 0))) == [0, 1]
    for a in [(0, 0), (0, 1), (1, 0), (1, 1)]:
        for b in [(0, 0), (0, 1), (1, 0), (1, 1)]:
            assert np.array_equal(sys.S(a)[sys.T(b)], sys.T(b)[sys.S(a)])


def test_trivial_actions_give_pointwise_product(rng):
    sys = make_translation_system(G3, 2, [3, 3], [(0, 0)] * 2, [(0, 0)] * 2)
    f, h = fr_grid(rng, (9,)), fr_grid(rng, (9,))
    for n in range(3):
        assert list(ergodic_average(sys, f, h, n)) == list(f * h)
    rep = theorem_check(sys, np.abs(f), np.abs(h), 2, [0, 1, 2])
    assert rep.variation_sum == 0


def test_bad_generator_images_rejected():
    with pytest.raises(ValueError):
        make_translation_system(G2, 1, [4], [(1,)], [(0,)])
    with pytest.raises(ValueError):
        make_translation_system(G2, 2, [2], [(1,)], [(0,), (0,)])


def test_noncommuting_explicit_system_rejected():
    # two involutions of S_3 that do not commute
    S = [[1, 0, 2]]
    T = [[0, 2, 1]]
    with pytest.raises(ValueError, match="commute"):
        explicit_system(G2, 1, [Fraction(1, 3)] * 3, S, T)


def test_explicit_system_measure_and_order_checks():
    with pytest.raises(ValueError, match="measure"):
        explicit_system(G2, 1, [Fraction(1, 4), Fraction(3, 4)], [[1, 0]], [[0, 1]])
    with pytest.raises(ValueError, match="order"):
        explicit_system(G2, 1, [Fraction(1, 3)] * 3, [[1, 2, 0]], [[0, 1, 2]])
    with pytest.raises(ValueError):
        explicit_system(G2, 1, [Fraction(1, 2)] * 3, [[0, 1, 2]], [[0, 1, 2]])


def test_system_from_json_matches_constructor():
    system_cfg = {"group": [2], "depth": 2,
            "space": {"type": "translation", "B": [2], "sigma": [[1], [0]], "tau": [[0], [1]]}}
    sys = system_from_json(system_cfg)
    assert sys.size == 2 and list(sys.S((1, 0))) == [1, 0]
    assert system_from_json({"group": [3], "depth": 1, "space": {"type": "regular"}}).size == 3
    assert system_from_json({"group": [2], "depth": 1, "space": {"type": "product"}}).size == 4
    exp = system_from_json({"group": [2], "depth": 1,
                            "space": {"type": "explicit", "S": [[1, 0]], "T": [[1, 0]]}})
    assert exp.size == 2
    with pytest.raises(ValueError):
        system_from_json({"group": [2], "depth": 1, "space": {"type": "torus"}})


@settings(max_examples=25)
@given(st.sampled_from([[2], [3], [2, 2]]), st.integers(1, 2), st.data())
def test_ergodic_average_matches_translation_oracle(orders, N, data):
    g = make_group(orders)
    B = list(g.orders) * N
    m = len(g.orders)

    def image():
        return tuple(data.draw(st.integers(0, o - 1)) for o in B)

    sigma = [image() for _ in range(N * m)]
    tau = [image() for _ in range(N * m)]
    sys = make_translation_system(g, N, B, sigma, tau)
    seed = data.draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    f, h = fr_grid(rng, (sys.size,)), fr_grid(rng, (sys.size,))
    for n in range(N + 1):
        assert list(ergodic_average(sys, f, h, n)) == list(
            translation_average_oracle(g, B, sigma, tau, f, h, n))


def test_product_system_is_the_discrete_model(rng):
    N = 2
    sys = product_system(G2, N)
    Fp, Gp = fr_grid(rng, (2,) * 2 * N), fr_grid(rng, (2,) * 2 * N)
    f = np.empty(sys.size, dtype=object)
    h = np.empty(sys.size, dtype=object)
    idx = [(a, b) for a in np.ndindex(*(2,) * N) for b in np.ndindex(*(2,) * N)]
    for a, b in idx:
        f[product_point(G2, N, a, b)] = Fp[a + b]
        h[product_point(G2, N, a, b)] = Gp[a + b]
    for n in range(N + 1):
        M = ergodic_average(sys, f, h, n)
        Ap = discrete_average(Fp, Gp, n, G2)
        assert all(M[product_point(G2, N, a, b)] == Ap[a + b] for a, b in idx)


def test_theorem_examples(rng):
    sys = regular_system(G2, 2)
    ones = np.ones(sys.size)
    assert theorem_check(sys, ones, ones, 2, [0, 1, 2]).variation_sum == 0
    for big in (regular_system(G2, 4), product_system(G2, 2)):
        assert big.size == 16
        for _ in range(10):
            rep = theorem_check(big, rng.random(16), rng.random(16), 2, [0, 1, 2])
            assert rep.ratio <= 1


def test_theorem_errors():
    sys = regular_system(G2, 2)
    ones = np.ones(sys.size)
    with pytest.raises(ValueError):
        theorem_check(sys, ones, ones, 2, [0, 3])
    with pytest.raises(ValueError):
        theorem_check(sys, ones, ones, 1, [0, 1])
    with pytest.raises(ValueError):
        theorem_check(sys, ones, ones, 2, [1, 1])


def test_jump_check_constant_averages():
    sys = regular_system(G3, 2)
    rows = jump_check(sys, np.ones(9), np.ones(9), 2, [0.1, 0.5])
    assert [c for _, c, _ in rows] == [0, 0]
    assert rows[0][2] == pytest.approx(assembled_constant(2) * 100)


def test_transference_examples(rng):
    delta = np.zeros((2, 2), dtype=object)
    delta[0, 0] = Fraction(1)
    assert discrete_average(delta, delta, 1, G2)[0, 0] == Fraction(1, 2)
    for n in (0, 1):
        assert transference_check(delta, delta, n, G2)
    for n in (0, 1):
        assert transference_check(fr_grid(rng, (3, 3)), fr_grid(rng, (3, 3)), n, G3)
    for n in (0, 1, 2):
        assert transference_check(fr_grid(rng, (2,) * 4), fr_grid(rng, (2,) * 4), n, G2)
    with pytest.raises(ValueError):
        transference_check(delta, delta, 2, G2)
