import math
import warnings

import numpy as np
import pytest
import sympy
from hypothesis import given, settings, strategies as st

from zetalab.errors import ConvergenceError, DomainError, PoleError, TruncationError, TruncationWarning
from zetalab.zeta_kernels import (
    EulerProductSpec,
    LocalFactor,
    PeriodicSequence,
    dirichlet_coefficients,
    hurwitz_shift_block,
    hurwitz_zeta,
    matsumoto_eval,
    mean_square_on_line,
    periodic_hurwitz_zeta,
    residue_b,
    riemann_spec,
    steuding_kappa,
    zeta_power_spec,
)

from oracles import alternating_brute, factorize, hurwitz_brute

ONE = PeriodicSequence((1,))
ZERO_SPEC = EulerProductSpec(label="trivial", default=LocalFactor((1,), (0,)))


def test_hurwitz_zeta2():
    oracle = hurwitz_brute(2, 1.0)
    assert abs(oracle - math.pi**2 / 6) < 1e-12
    assert abs(hurwitz_zeta(2, 1.0) - oracle) < 1e-12


def test_hurwitz_zeta2_half():
    oracle = hurwitz_brute(2, 0.5)
    assert abs(oracle - 4.9348022005446793) < 1e-11
    assert abs(hurwitz_zeta(2, 0.5) - oracle) < 1e-12


def test_hurwitz_dominant_term():
    v = hurwitz_zeta(50.0, 1 / 3)
    assert abs(v / 3.0**50 - 1) < 1e-10


@pytest.mark.parametrize("s,a", [(0.6 + 3j, 1 / 3), (0.75 - 40j, 1 / math.pi), (2.5 + 17j, 0.99)])
def test_hurwitz_vs_brute(s, a):
    assert abs(hurwitz_zeta(s, a) - hurwitz_brute(s, a)) < 1e-10


def test_hurwitz_array_shape():
    s = np.array([[2.0, 3.0], [0.7 + 1j, 0.8 - 2j]])
    v = hurwitz_zeta(s, 0.5)
    assert v.shape == (2, 2)
    assert abs(v[1, 0] - hurwitz_zeta(0.7 + 1j, 0.5)) < 1e-13


def test_hurwitz_errors():
    with pytest.raises(PoleError):
        hurwitz_zeta(1.0, 0.5)
    for a in (0.0, -0.2, 1.5):
        with pytest.raises(DomainError):
            hurwitz_zeta(2.0, a)
    with pytest.raises(DomainError):
        hurwitz_zeta(complex("nan"), 0.5)


def test_near_pole_is_finite_and_accurate():
    # zeta(s) = 1/(s-1) + Euler-gamma + O(s-1)
    s = 1 + 1e-7
    v = hurwitz_zeta(s, 1.0)
    assert abs(v - (1 / (s - 1) + 0.5772156649015329)) < 1e-6


def test_shift_block_matches_pointwise():
    grid = np.array([0.8 + 0.05j, 0.9 - 0.02j, 0.85])
    blk = hurwitz_shift_block(grid, 1 / 3, 1000, 16, 0.7)
    for j in (0, 7, 15):
        s = grid + 1j * (1000 + j) * 0.7
        assert np.max(np.abs(blk[j] - hurwitz_zeta(s, 1 / 3))) < 1e-10


# periodic Hurwitz ----------------------------------------------------------


def test_periodic_reduces_to_hurwitz_exactly():
    assert periodic_hurwitz_zeta(2, 1.0, ONE) == hurwitz_zeta(2, 1.0)


def test_periodic_alternating_half():
    B = PeriodicSequence((1, -1))
    oracle = alternating_brute(2.0, 0.5)
    assert abs(periodic_hurwitz_zeta(2, 0.5, B) - oracle) < 1e-11


def test_periodic_entire_case_at_one():
    B = PeriodicSequence((1, -1))
    v = periodic_hurwitz_zeta(1, 1 / 3, B)
    assert np.isfinite(v)
    # brute-force alternating sum converges (slowly) at s = 1
    assert abs(v - alternating_brute(1.0, 1 / 3)) < 1e-9


def test_periodic_pole_with_nonzero_residue():
    with pytest.raises(PoleError):
        periodic_hurwitz_zeta(1, 0.5, PeriodicSequence((1, 2)))


def test_minimal_period_enforced():
    with pytest.raises(DomainError):
        PeriodicSequence((1, -1, 1, -1))
    with pytest.raises(DomainError):
        PeriodicSequence((0, 0))
    assert PeriodicSequence((1, -1, 1, -1), check_minimal=False).period == 4


@pytest.mark.parametrize(
    "coeffs,expected", [((1, -1), 0), ((1,), 1), ((2 + 1j, 4 - 1j, 0), 2)]
)
def test_residue_b(coeffs, expected):
    assert residue_b(PeriodicSequence(coeffs)) == expected


small_gauss = st.builds(complex, st.integers(-20, 20), st.integers(-20, 20))


# periods are powers of two so that 1/l is exact and linearity holds bit for bit
@given(
    st.sampled_from([1, 2, 4, 8]).flatmap(
        lambda l: st.tuples(
            st.lists(small_gauss, min_size=l, max_size=l),
            st.lists(small_gauss, min_size=l, max_size=l),
        )
    ),
    small_gauss,
    small_gauss,
)
def test_residue_linearity(pair, u, v):
    b1, b2 = pair
    comb = [u * x + v * y for x, y in zip(b1, b2)]
    seqs = [PeriodicSequence(c, check_minimal=False) for c in (b1, b2, comb) if any(c)]
    if len(seqs) < 3:
        return
    B1, B2, B = seqs
    assert residue_b(B) == u * residue_b(B1) + v * residue_b(B2)


def _strip_grid():
    sig = np.linspace(0.6, 3.0, 8)
    ts = np.linspace(-30, 30, 9)
    return (sig[:, None] + 1j * ts[None, :]).ravel()


def test_reduction_identity_grid():
    s = _strip_grid()
    diff = periodic_hurwitz_zeta(s, 1.0, ONE) - hurwitz_zeta(s, 1.0)
    assert np.max(np.abs(diff)) < 1e-12


@pytest.mark.parametrize("coeffs", [(1, -1), (1, 2, 0), (1j, 1, -2)])
def test_period_doubling_consistency(coeffs):
    s = _strip_grid()
    B = PeriodicSequence(coeffs)
    B2 = PeriodicSequence(coeffs * 2, check_minimal=False)
    d = periodic_hurwitz_zeta(s, 0.37, B) - periodic_hurwitz_zeta(s, 0.37, B2)
    assert np.max(np.abs(d)) < 1e-10


def test_conjugation_symmetry():
    s = _strip_grid()
    B = PeriodicSequence((1, -2, 0.5))
    for f in (
        lambda z: hurwitz_zeta(z, 0.3),
        lambda z: periodic_hurwitz_zeta(z, 0.7, B),
    ):
        assert np.max(np.abs(f(np.conj(s)) - np.conj(f(s)))) < 1e-12
    z = np.array([2.0 + 3j, 1.5 - 7j])
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TruncationWarning)
        e = matsumoto_eval(riemann_spec(), z, cutoff=1000)
        ec = matsumoto_eval(riemann_spec(), np.conj(z), cutoff=1000)
    assert np.max(np.abs(ec - np.conj(e))) < 1e-12


# Dirichlet coefficients -------------------------------------------------------


def test_riemann_coefficients():
    c = dirichlet_coefficients(riemann_spec(), 6)
    assert np.array_equal(c.values, np.ones(6))


def test_trivial_spec_coefficients():
    c = dirichlet_coefficients(ZERO_SPEC, 12)
    assert c.values[0] == 1 and not np.any(c.values[1:])


def test_two_factor_coefficients_against_series():
    x = sympy.symbols("x")
    ser = sympy.series((1 - x) ** -2, x, 0, 4).removeO()
    k1, k2 = int(ser.coeff(x, 1)), int(ser.coeff(x, 2))
    c = dirichlet_coefficients(zeta_power_spec(2), 50)
    for p in (2, 3, 5, 7):
        assert c[p] == k1 == 2
        assert c[p * p] == k2 == 3


def _brute_coeffs(spec, K):
    out = []
    for k in range(1, K + 1):
        val = 1 + 0j
        for p, e in factorize(k).items():
            val *= spec.factor(p).series(e)[e]
        out.append(val * k ** -(spec.shift))
    return np.array(out)


def test_general_spec_against_factorisation_oracle():
    spec = EulerProductSpec(
        label="mixed",
        growth_alpha=0.5,
        growth_beta=0.25,
        c1=2.0,
        factors=((2, LocalFactor((1, 2), (1.0, -0.5j))), (5, LocalFactor((3,), (1.2,)))),
        default=LocalFactor((1,), (0.3 + 0.4j,)),
    )
    c = dirichlet_coefficients(spec, 300)
    assert np.max(np.abs(c.values - _brute_coeffs(spec, 300))) < 1e-12


def test_missing_prime_truncation_error():
    spec = EulerProductSpec(label="finite", factors=((2, LocalFactor((1,), (1,))),))
    dirichlet_coefficients(spec, 2)
    with pytest.raises(TruncationError):
        dirichlet_coefficients(spec, 3)


def test_growth_constant_violation():
    with pytest.raises(DomainError):
        EulerProductSpec(label="bad", factors=((2, LocalFactor((1,), (3.0,))),))


# Euler product ---------------------------------------------------------------


def test_euler_riemann_zeta2():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TruncationWarning)
        v = matsumoto_eval(riemann_spec(), 2.0, "euler_product", 10**5)
    assert abs(v - hurwitz_zeta(2, 1.0)) < 1e-5
    assert abs(v - 1.6449340) < 1e-5


def test_dirichlet_riemann_zeta3():
    from oracles import hurwitz_brute

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TruncationWarning)
        v = matsumoto_eval(riemann_spec(), 3.0, "dirichlet_sum", 10**4)
    oracle = hurwitz_brute(3.0, 1.0)
    # omitted tail sum_{k>1e4} k^-3 ~ 5e-9
    assert abs(v - oracle) < 1e-8
    assert abs(v - 1.2020569) < 1e-7


@pytest.mark.parametrize("spec", [riemann_spec(), zeta_power_spec(2), ZERO_SPEC])
def test_leading_term_large_sigma(spec):
    for mode in ("euler_product", "dirichlet_sum"):
        assert abs(matsumoto_eval(spec, 30.0, mode, 2000) - 1) < 1e-8


def test_euler_dirichlet_agreement():
    P = K = 10**5
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TruncationWarning)
        for s in (2.0, 2.0 + 5j, 2.5, 3.5 - 11j):
            e = matsumoto_eval(riemann_spec(), s, "euler_product", P)
            d = matsumoto_eval(riemann_spec(), s, "dirichlet_sum", K)
            sigma = s.real if isinstance(s, complex) else s
            # combined tails: sum_{k>K} k^-sigma and sum_{p>P} p^-sigma
            tails = K ** (1 - sigma) / (sigma - 1) + P ** (1 - sigma) / ((sigma - 1) * math.log(P))
            assert abs(e - d) < 2 * abs(e) * tails
            if sigma >= 2.5:
                assert abs(e - d) < 1e-6


def test_convergence_error_and_warning():
    with pytest.raises(ConvergenceError):
        matsumoto_eval(riemann_spec(), 0.9, "euler_product", 100)
    with pytest.warns(TruncationWarning):
        matsumoto_eval(riemann_spec(), 1.5, "euler_product", 100)


# mean square and kappa -----------------------------------------------------------


def test_mean_square_constant():
    for T in (1.0, 37.5, 1000.0):
        assert abs(mean_square_on_line(lambda s: np.ones_like(s), 0.5, T, 100) - 1) < 1e-13


def test_mean_square_two_power():
    f = lambda s: np.exp(-s * math.log(2))
    assert abs(mean_square_on_line(f, 0.5, 123.0, 200) - 0.5) < 1e-12


def test_mean_square_scalar_evaluator_fallback():
    f = lambda s: complex(2.0 ** (-s))
    assert abs(mean_square_on_line(f, 0.5, 10.0, 100) - 0.5) < 1e-12


def test_mean_square_resolution_warning():
    from zetalab.errors import QuadratureWarning

    with pytest.warns(QuadratureWarning):
        # 3 radians between samples: unresolved inside every panel
        mean_square_on_line(lambda s: 1 + np.exp(-s * 6.0), 0.0, 100.0, 100)


def test_steuding_kappa():
    for x in (2, 100, 1000):
        c = dirichlet_coefficients(riemann_spec(), x)
        assert steuding_kappa(c, riemann_spec(), x) == 1.0
    assert steuding_kappa(dirichlet_coefficients(ZERO_SPEC, 100), ZERO_SPEC, 100) == 0.0
    two = zeta_power_spec(2)
    c = dirichlet_coefficients(two, 100)
    primes = [p for p in range(2, 101) if sympy.isprime(p)]
    assert len(primes) == 25
    assert steuding_kappa(c, two, 100) == sum(abs(c[p]) ** 2 for p in primes) / 25 == 4.0


@settings(max_examples=25, deadline=None)
@given(st.floats(0.6, 3.0), st.floats(-40, 40), st.sampled_from([1 / 3, 0.5, 1 / math.pi, 0.99]))
def test_hurwitz_vs_mpmath(sigma, t, a):
    import mpmath as mp

    s = complex(sigma, t)
    if abs(s - 1) < 1e-6:
        return
    with mp.workdps(30):
        ref = complex(mp.zeta(mp.mpc(sigma, t), mp.mpf(a)))
    assert abs(hurwitz_zeta(s, a) - ref) < 1e-10


def test_mean_square_zeta_two_term_asymptotic():
    # int_0^T |zeta(s0+it)|^2 dt = zeta(2 s0) T + (2 pi)^(2 s0 - 1) zeta(2 - 2 s0) T^(2 - 2 s0) / (2 - 2 s0) + o
    import mpmath as mp

    s0, T = 0.75, 1000.0
    main = float(mp.zeta(2 * s0))
    second = float((2 * mp.pi) ** (2 * s0 - 1) * mp.zeta(2 - 2 * s0) / (2 - 2 * s0)) * T ** (1 - 2 * s0)
    v = mean_square_on_line(lambda s: hurwitz_zeta(s, 1.0), s0, T, 10_000)
    assert abs(v - (main + second)) < 0.02
