import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import solve_ivp

from kvquant.dynamics import (
    CoefficientState, NormDriftError, SchemeKind, couplings_nonresonant, ground_state, hamiltonian_coupling,
    integrate, resonant_fgh, resonant_phase, resonant_phase_transform, rhs_for, rhs_hamiltonian, rhs_k_nonresonant,
    rhs_k_resonant, rk4_step, select_scheme, suggest_dt,
)
from kvquant.model import natural_params, proton_params, scale_to_dimensionless
from kvquant.oracle import coupling_matrix, oracle_rhs, relative_error
from kvquant.validation import (
    coherent_state, hermiticity, integrator_order, oracle_equivalence, scheme_params, stationarity, unitarity,
)

K_NR, K_R, H = SchemeKind.K_NONRESONANT, SchemeKind.K_RESONANT, SchemeKind.HAMILTONIAN

# 40-digit mpmath evaluations at the proton / 1 GHz / 1e-13 N constants, SI rad/s
NONRES_09_REF = dict(a1=19889740907113713.191, b1=16110690134762107.685, c=11179039664979.530924,
                     d=10061135698481.577831)
FGH_QUARTER_PERIOD_REF = dict(f=179504911686701.26155, g=1062008768173.0554378, h=1668199472070.2083932)
LAMBDA_REF = 2.2399290340168291932e-22


def random_state(rng, n=12):
    c = rng.normal(size=n) + 1j * rng.normal(size=n)
    return c / np.linalg.norm(c)


def e0(n=12):
    return ground_state(n).coeffs


def test_scheme_selection():
    assert select_scheme("K", True) is K_R
    assert select_scheme("K", False) is K_NR
    assert select_scheme("H", True) is H
    with pytest.raises(ValueError):
        select_scheme("X", True)


def test_nonresonant_couplings_reference(proton):
    got = couplings_nonresonant(proton.with_(drive_frequency=0.9 * proton.natural_frequency))
    for name, ref in NONRES_09_REF.items():
        assert getattr(got, name) == pytest.approx(ref, rel=1e-13), name


def test_nonresonant_couplings_limits(proton):
    zero = couplings_nonresonant(proton.with_(drive_amplitude=0.0, drive_frequency=0.5 * proton.natural_frequency))
    assert (zero.a1, zero.b1, zero.c, zero.d) == (0.0, 0.0, 0.0, 0.0)
    static = couplings_nonresonant(proton.with_(drive_frequency=0.0))
    assert static.b1 == 0.0 and static.d == 0.0 and static.a1 > 0 and static.c > 0
    c = couplings_nonresonant(proton.with_(drive_frequency=0.3 * proton.natural_frequency))
    assert c.a1 / c.b1 == pytest.approx(1 / 0.3**2, rel=1e-12)
    with pytest.raises(ValueError):
        couplings_nonresonant(proton)


def test_fgh_reference(proton):
    got = resonant_fgh(proton, math.pi / (2 * proton.natural_frequency))
    for name, ref in FGH_QUARTER_PERIOD_REF.items():
        assert getattr(got, name) == pytest.approx(ref, rel=1e-13), name


def test_fgh_vanish_at_start_and_without_drive(proton):
    assert resonant_fgh(proton, 0.0) == type(resonant_fgh(proton, 0.0))(0.0, 0.0, 0.0)
    free = proton.with_(drive_amplitude=0.0)
    for t in np.linspace(0, 1e-8, 7):
        r = resonant_fgh(free, t)
        assert (r.f, r.g, r.h) == (0.0, 0.0, 0.0)


def test_fgh_match_dimensionless_kernel_couplings(proton):
    # off-diagonal elements of the oracle matrix are g and h in the x and v channels
    s = scale_to_dimensionless(proton)
    tau = 1.3
    r = resonant_fgh(proton, tau / proton.natural_frequency)
    w0 = proton.natural_frequency
    assert r.g / w0 == pytest.approx(0.5 * s.drive_strength * (math.sin(tau) + tau * math.cos(tau)), rel=1e-13)
    assert r.h / w0 == pytest.approx(0.5 * s.drive_strength * tau * math.sin(tau), rel=1e-13)


def test_hamiltonian_coupling(proton):
    assert hamiltonian_coupling(proton).lam == pytest.approx(LAMBDA_REF, rel=1e-13)
    assert hamiltonian_coupling(proton.with_(drive_amplitude=0.0)).lam == 0.0


@pytest.mark.parametrize("scheme", [K_NR, K_R, H])
def test_zero_drive_rhs_vanishes(scheme, rng):
    params = scheme_params(proton_params(drive_amplitude=0.0))[scheme]
    out = rhs_for(scheme, params)(rng.uniform(0, 50), random_state(rng))
    assert np.all(out == 0)


def test_nonresonant_ground_state_row(proton):
    # the k = 0 row at tau = 0, phi = 0: the level-independent term gives Y0' = -a1
    p = proton.with_(drive_frequency=0.5 * proton.natural_frequency)
    s = scale_to_dimensionless(p)
    out = rhs_k_nonresonant(CoefficientState(0.0, e0()), s)
    assert out[0].real == 0.0
    assert out[0].imag == pytest.approx(-s.a1, rel=1e-15)
    assert out[0] == pytest.approx(oracle_rhs(CoefficientState(0.0, e0()), p, K_NR)[0], rel=1e-13)


def test_resonant_ground_state_at_start(proton):
    assert np.all(rhs_k_resonant(CoefficientState(0.0, e0()), proton) == 0)


def test_hamiltonian_ground_state_at_start(proton):
    s = scale_to_dimensionless(proton)
    out = rhs_hamiltonian(CoefficientState(0.0, e0()), s)
    expected = np.zeros(12, complex)
    expected[1] = 1j * s.lam
    np.testing.assert_allclose(out, expected, rtol=1e-15, atol=0)


def test_wrong_scheme_for_case_raises(proton):
    with pytest.raises(ValueError):
        rhs_k_nonresonant(CoefficientState(0.0, e0()), proton)
    with pytest.raises(ValueError):
        rhs_k_resonant(CoefficientState(0.0, e0()), proton.with_(drive_frequency=1.0))


def test_oracle_equivalence_proton_scale():
    for r in oracle_equivalence():
        assert r.passed, r.line()


@settings(max_examples=60, deadline=None)
@given(eps=st.floats(1e-3, 500), ratio=st.floats(0.0, 3.0).filter(lambda r: abs(r - 1) > 1e-3),
       phi=st.floats(-math.pi, math.pi), tau=st.just(0.0) | st.floats(1e-6, 30), n=st.integers(2, 20), keep=st.booleans(),
       seed=st.integers(0, 2**32 - 1))
def test_oracle_equivalence_property(eps, ratio, phi, tau, n, keep, seed):
    rng = np.random.default_rng(seed)
    base = natural_params(eps, ratio, phi)
    for scheme, params in scheme_params(base).items():
        state = CoefficientState(tau, random_state(rng, n))
        hand = rhs_for(scheme, params, keep)(tau, state.coeffs)
        assert relative_error(hand, oracle_rhs(state, params, scheme, keep)) <= 1e-12


def test_planted_sign_error_is_caught():
    good = rhs_for(H, proton_params())

    def flipped(tau, D, scaled):
        out = good(tau, D)
        out[3] = -out[3]
        return out

    results = {r.name: r.passed for r in oracle_equivalence(overrides={H: flipped})}
    assert results == {"oracle-equivalence[K-nonresonant]": True, "oracle-equivalence[K-resonant]": True,
                       "oracle-equivalence[H]": False}


def test_coupling_matrix_hermitian():
    for r in hermiticity():
        assert r.passed, r.line()


def test_coupling_matrix_vanishes_without_drive():
    for scheme, params in scheme_params(proton_params(drive_amplitude=0.0)).items():
        assert np.all(coupling_matrix(params, 3e-10, scheme, 12) == 0)


def test_phase_transform_basic(rng):
    s = scale_to_dimensionless(proton_params())
    D = random_state(rng)
    assert np.array_equal(resonant_phase_transform(D, s, 0.0), D)
    fwd = resonant_phase_transform(D, s, 0.37)
    np.testing.assert_allclose(np.abs(fwd) ** 2, np.abs(D) ** 2, rtol=1e-15, atol=0)
    np.testing.assert_allclose(resonant_phase_transform(fwd, s, 0.37, "backward"), D, atol=1e-15)
    assert resonant_phase(s, 2.0) == pytest.approx(s.drive_strength**2 * 8 / 12)
    with pytest.raises(ValueError):
        resonant_phase_transform(D, s, 0.1, "sideways")


def test_phase_transform_links_the_two_resonant_pictures():
    # integrate the untransformed system, whose diagonal carries the a(t)^2 drift,
    # and compare with the transformed run mapped back
    s = scale_to_dimensionless(natural_params(0.2))
    tilde = rhs_for(K_R, s)

    def plain(tau, D):
        return tilde(tau, D) - 1j * s.drive_strength**2 * tau**2 / 4 * D

    kw = dict(method="DOP853", rtol=1e-12, atol=1e-13)
    T = 12.0
    y0 = e0(10)
    D = solve_ivp(plain, (0, T), y0, **kw).y[:, -1]
    Dt = solve_ivp(tilde, (0, T), y0, **kw).y[:, -1]
    np.testing.assert_allclose(resonant_phase_transform(Dt, s, T, "backward"), D, atol=1e-9)
    np.testing.assert_allclose(np.abs(Dt) ** 2, np.abs(D) ** 2, atol=1e-10)


@pytest.mark.parametrize("scheme,params", [(K_NR, natural_params(0.3, 0.6)), (K_R, natural_params(0.05))])
def test_scalar_phase_does_not_change_populations(scheme, params):
    s = scale_to_dimensionless(params)
    kept = integrate(ground_state(12), s, scheme, 40.0, 1e-3, 100, keep_scalar_phase=True)
    dropped = integrate(ground_state(12), s, scheme, 40.0, 1e-3, 100, keep_scalar_phase=False)
    np.testing.assert_allclose(kept.probabilities, dropped.probabilities, atol=1e-10)


def test_rk4_zero_rhs_is_identity(rng):
    y = random_state(rng)
    out = rk4_step(CoefficientState(0.0, y), lambda t, D: np.zeros_like(D), 0.1)
    assert np.array_equal(out.coeffs, y) and out.tau == 0.1


def test_rk4_rotation_one_period():
    w, dt = 1.0, 1e-3
    state = CoefficientState(0.0, np.array([1.0, 0.0j]))
    for _ in range(round(2 * math.pi / dt)):
        state = rk4_step(state, lambda t, y: 1j * w * y, dt)
    assert abs(abs(state.coeffs[0]) - 1) <= 1e-10


def test_rk4_scalar_convergence_order():
    def final_error(n):
        dt = 4.0 / n
        state = CoefficientState(0.0, np.array([1.0, 0.0j]))
        for _ in range(n):
            state = rk4_step(state, lambda t, y: 1j * t * y, dt)
        return abs(state.coeffs[0] - np.exp(0.5j * state.tau**2))

    ratio = final_error(100) / final_error(200)
    assert 12 <= ratio <= 20


def test_rk4_rejects_bad_input():
    with pytest.raises(ValueError):
        rk4_step(CoefficientState(0.0, e0()), lambda t, y: y, 0.0)
    with pytest.raises(FloatingPointError), np.errstate(all="ignore"):
        rk4_step(CoefficientState(0.0, e0()), lambda t, y: np.full_like(y, np.inf), 0.1)


def test_integrator_order_full_systems():
    for r in integrator_order():
        assert r.passed, r.line()


def test_integrate_matches_python_stepping():
    s = scale_to_dimensionless(natural_params(0.4, 0.7, 0.1))
    run = integrate(ground_state(8), s, K_NR, 1.0, 0.01, 100)
    state = ground_state(8)
    f = rhs_for(K_NR, s)
    for _ in range(100):
        state = rk4_step(state, f, 0.01)
    np.testing.assert_allclose(run.coeffs[-1], state.coeffs, atol=1e-14)
    assert run.tau[-1] == pytest.approx(1.0)


def test_integrate_validates_inputs():
    s = scale_to_dimensionless(natural_params(0.1))
    with pytest.raises(ValueError):
        integrate(CoefficientState(0.0, np.ones(4, complex)), s, H, 1.0)
    with pytest.raises(ValueError):
        integrate(ground_state(4), s, H, 1.0, dt=-1.0)
    with pytest.raises(ValueError):
        integrate(ground_state(4), s, H, 0.0)
    with pytest.raises(ValueError):
        integrate(ground_state(4), s, H, 1.0, sample_every=0)


def test_norm_drift_aborts_with_step_hint():
    s = scale_to_dimensionless(proton_params())
    with pytest.raises(NormDriftError) as info:
        integrate(ground_state(12), s, K_R, 2 * math.pi, 1e-3, 10)
    assert info.value.suggested_dt < 1e-3
    assert "dt" in str(info.value)


def test_suggested_step_keeps_proton_runs_stable():
    s = scale_to_dimensionless(proton_params())
    tau_end = 0.5
    dt = suggest_dt(s, H, tau_end, 12, target_drift=1e-8)
    run = integrate(ground_state(12), s, H, tau_end, dt, 1000)
    assert run.norm_drift <= 1e-8


def test_resonant_proton_run_leaves_ground_state():
    s = scale_to_dimensionless(proton_params())
    dt = suggest_dt(s, K_R, 1.0, 12, keep_scalar_phase=False)
    run = integrate(ground_state(12), s, K_R, 1.0, dt, 100, keep_scalar_phase=False)
    p = run.probabilities
    assert p[0, 0] == 1.0
    assert p[-1, 0] < 0.5 and p[-1, 1:].sum() > 0.5


def test_stationarity():
    for r in stationarity():
        assert r.passed, r.line()


def test_unitarity():
    for r in unitarity():
        assert r.passed, r.line()


def test_coherent_state_oracle():
    for r in coherent_state():
        assert r.passed, r.line()
