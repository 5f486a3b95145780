import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from oracles import star_discrepancy_brute

from zetalab.errors import BoundMismatchError, DomainError
from zetalab.parameters import Differences, HurwitzCollection, HurwitzFamily, presets
from zetalab.smoothing import SmoothingParams, sample_omega, sample_omega_angles, weight_v1
from zetalab.torus_lab import (
    CharacterIndex,
    compare_distributions,
    coordinate_angles,
    discrepancy_table,
    identity_point,
    rotate,
    star_discrepancy_1d,
    trajectory_point,
    weyl_closed_form,
    weyl_sum,
)
from zetalab.zeta_kernels import EulerProductSpec, LocalFactor, PeriodicSequence


def coll(h="1", alpha="1/pi"):
    return HurwitzCollection((HurwitzFamily(alpha, (PeriodicSequence((1,)),)),), Differences("equal", h=h))


def unit_gap(p, q):
    return max(np.max(np.abs(p.omega1 - q.omega1)), np.max(np.abs(p.omega2 - q.omega2)))


# trajectory and rotation -----------------------------------------------


def test_trajectory_origin_is_identity():
    pt = trajectory_point(0, presets()[1].collection, 30, 10)
    assert np.all(pt.omega1 == 1) and np.all(pt.omega2 == 1)


def test_trajectory_half_turn():
    c = coll(h="pi/log(2)")
    pt = trajectory_point(1, c, 5, 3)
    assert abs(pt.omega1_at(2) - (-1)) < 1e-14


def test_trajectory_values():
    c = presets()[1].collection
    pt = trajectory_point(7, c, 11, 4)
    assert abs(pt.omega1_at(11) - 11 ** (-7j * c.h1)) < 1e-13
    a, h = c.alphas[1], c.h2(1)
    assert abs(pt.omega2[1, 3] - (3 + a) ** (-7j * h)) < 1e-13


def test_group_action():
    for p in presets():
        c = p.collection
        pt = identity_point(c, 20, 20)
        for k in range(1, 1001):
            pt = rotate(pt, c)
            if k in (1, 2, 17, 500, 1000):
                assert unit_gap(pt, trajectory_point(k, c, 20, 20)) < 1e-10, (p.name, k)
        assert np.max(np.abs(np.abs(pt.omega1) - 1)) < 1e-12


def test_rotate_is_next_point():
    c = presets()[2].collection
    for k in (0, 5, 12345):
        assert unit_gap(rotate(trajectory_point(k, c, 20, 20), c), trajectory_point(k + 1, c, 20, 20)) < 1e-12


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**4), st.integers(0, 50))
def test_trajectory_additivity(k1, k2):
    c = presets()[0].collection
    pt = trajectory_point(k1, c, 20, 20)
    for _ in range(k2):
        pt = rotate(pt, c)
    assert unit_gap(pt, trajectory_point(k1 + k2, c, 20, 20)) < 1e-10


def test_rotate_row_mismatch():
    pt = sample_omega(0, 20, 20, 3)
    with pytest.raises(BoundMismatchError):
        rotate(pt, presets()[0].collection)


# Weyl sums ---------------------------------------------------------------


def test_weyl_trivial():
    c = presets()[0].collection
    for N in (0, 1, 10, 1000):
        assert weyl_sum(CharacterIndex(), N, c) == 1


def test_weyl_half_turn_alternates():
    c = coll(h="pi/log(2)")
    chi = CharacterIndex({2: 1})
    expected = [1, 0, 1 / 3, 0, 1 / 5]
    for N, e in enumerate(expected):
        assert abs(weyl_sum(chi, N, c) - e) < 1e-14


def _random_characters(collection, count, seed):
    rng = np.random.default_rng(seed)
    rows = len(collection.torus_rows())
    out = []
    while len(out) < count:
        kp = {int(p): int(rng.integers(-3, 4)) for p in rng.choice([2, 3, 5, 7, 11, 13], size=2, replace=False)}
        lmj = {(int(rng.integers(0, 10)), int(rng.integers(0, rows))): int(rng.integers(-3, 4))}
        chi = CharacterIndex(kp, lmj)
        if not chi.trivial:
            out.append(chi)
    return out


@pytest.mark.parametrize("N", [0, 7, 1000, 10**5])
def test_weyl_closed_form_random_characters(N):
    for p in presets():
        c = p.collection
        for chi in _random_characters(c, 10, N + 1):
            theta = chi.theta(c)
            w = weyl_sum(chi, N, c)
            assert abs(w - weyl_closed_form(theta, N)) < 1e-12
            assert abs(w) <= 1 / ((N + 1) * abs(math.sin(theta / 2))) + 1e-12


def test_character_on_trajectory_point():
    c = presets()[1].collection
    chi = CharacterIndex({3: 2, 7: -1}, {(4, 1): 3})
    theta = chi.theta(c)
    for k in (0, 1, 33):
        assert abs(chi(trajectory_point(k, c, 10, 5)) - np.exp(-1j * k * theta)) < 1e-12
    with pytest.raises(BoundMismatchError):
        chi(trajectory_point(1, c, 5, 5))


# discrepancy -------------------------------------------------------------


def test_discrepancy_examples():
    assert star_discrepancy_1d([0, 0.5]) == pytest.approx(0.5, abs=1e-15)
    assert star_discrepancy_brute([0, 0.5]) == pytest.approx(0.5)
    N = 40
    assert star_discrepancy_1d(np.arange(N) / N) == pytest.approx(1 / N, abs=1e-15)
    assert star_discrepancy_1d([0.3] * 25) >= 0.7
    with pytest.raises(DomainError):
        star_discrepancy_1d([])


@settings(max_examples=60)
@given(st.lists(st.floats(0, 1, exclude_max=True), min_size=1, max_size=40))
def test_discrepancy_matches_brute_force(xs):
    assert star_discrepancy_1d(xs) == pytest.approx(star_discrepancy_brute(xs), abs=1e-12)


def test_discrepancy_binned_close_to_exact():
    x = np.random.default_rng(1).random(5000)
    exact = star_discrepancy_1d(x)
    approx = star_discrepancy_1d(x, exact=False)
    assert approx <= exact + 1e-12
    assert exact - approx <= 2e-3


def test_coordinate_discrepancy_decreases():
    for p in presets():
        for prime in (2, 3, 5):
            d = [star_discrepancy_1d(coordinate_angles(p.collection, prime, N)) for N in (10**3, 10**5)]
            assert d[1] < d[0], (p.name, prime, d)


def test_discrepancy_table_shape():
    rows = discrepancy_table(presets()[0].collection, (2,), (100, 1000))
    assert [(r["p"], r["N"]) for r in rows] == [(2, 100), (2, 1000)]


# Haar sampling -------------------------------------------------------------


def test_haar_sample_means_small():
    count = 4000
    a1, a2 = sample_omega_angles(123, count, 30, 5, 2)
    bound = 4 / math.sqrt(count)
    assert np.max(np.abs(np.mean(np.exp(2j * np.pi * a1), axis=0))) <= bound
    assert np.max(np.abs(np.mean(np.exp(2j * np.pi * a2), axis=0))) <= bound


# moment comparison -----------------------------------------------------------


def test_compare_degenerate_spec_exact():
    one = EulerProductSpec("one", default=LocalFactor((1,), (0,)))
    rep = compare_distributions(presets()[0].collection, one, N=1000, mc_samples=1000, n_smooth=5)
    phi = rep.components[0]
    v = weight_v1(1, SmoothingParams(5))  # the m = 1 term at any sigma
    assert phi.shift.mean.imag == phi.mc.mean.imag == 0
    for x in (phi.shift, phi.mc):
        assert abs(x.mean - v) < 1e-15 and x.se_mean < 1e-15
        assert abs(x.second_moment - v * v) < 1e-15
    assert phi.passed


@pytest.mark.slow
def test_compare_riemann_preset():
    p = presets()[0]
    rep = compare_distributions(p.collection, p.spec, sigma=1.5, N=10**4, mc_samples=10**4)
    assert rep.passed, [c.gates for c in rep.components]
    phi = rep.components[0]
    assert phi.mean_oracle == weight_v1(1, SmoothingParams(10))


def test_compare_determinism_and_validation():
    c = presets()[0].collection
    spec = presets()[0].spec
    a = compare_distributions(c, spec, N=1000, mc_samples=1000, n_smooth=3, seed=4)
    b = compare_distributions(c, spec, N=1000, mc_samples=1000, n_smooth=3, seed=4)
    assert a.to_dict() == b.to_dict()
    with pytest.raises(DomainError):
        compare_distributions(c, spec, N=10)
