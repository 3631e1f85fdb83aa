"""Self-checks behind ``kvquant validate``.

Each suite returns a :class:`SuiteResult` with the measured residual and the
threshold it was held to.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Callable

import numpy as np

from .classical import (
    NONRESONANT,
    RESONANT,
    ClassicalState,
    constant_of_motion,
    integrate_newton,
    oscillator_energy,
    perturbation_W,
)
from .dynamics import (
    CoefficientState,
    SchemeKind,
    ground_state,
    integrate,
    rhs_for,
)
from .model import OscillatorParams, natural_params, proton_params, scale_to_dimensionless
from .oracle import coherent_populations, coupling_matrix, oracle_rhs, relative_error

ORACLE_TOL = 1e-12
HERMITIAN_TOL = 1e-13
STATIONARY_TOL = 1e-12
UNITARITY_TOL = 1e-8
COHERENT_TOL = 1e-6
INVARIANCE_TOL = 1e-9
DECOMPOSITION_TOL = 1e-12
ORDER_RANGE = (12.0, 20.0)


@dataclass
class SuiteResult:
    name: str
    passed: bool
    residual: float
    threshold: float | tuple
    detail: str = ""

    def line(self) -> str:
        mark = "PASS" if self.passed else "FAIL"
        return f"[{mark}] {self.name}: residual={self.residual:.3e} threshold={self.threshold} {self.detail}".rstrip()

    def to_dict(self) -> dict:
        return asdict(self)


def scheme_params(base: OscillatorParams) -> dict:
    """Parameter set per scheme derived from ``base`` (resonant K needs w = w0)."""
    resonant = base.with_(drive_frequency=base.natural_frequency)
    nonresonant = base if not base.is_resonant else base.with_(drive_frequency=0.5 * base.natural_frequency)
    return {
        SchemeKind.K_NONRESONANT: nonresonant,
        SchemeKind.K_RESONANT: resonant,
        SchemeKind.HAMILTONIAN: base,
    }


def _random_state(rng, n):
    c = rng.normal(size=n) + 1j * rng.normal(size=n)
    return c / np.linalg.norm(c)


def oracle_equivalence(base: OscillatorParams | None = None, n_states: int = 12, pairs: int = 100, seed: int = 0,
                       tau_max: float = 20.0, overrides: dict | None = None) -> list[SuiteResult]:
    """Hand-coded right-hand sides against the ladder-operator matrix.

    ``overrides`` maps a scheme to a replacement ``f(tau, D, scaled)``; the
    test suite uses it to confirm a planted sign error is caught.
    """
    base = proton_params() if base is None else base
    rng = np.random.default_rng(seed)
    results = []
    for scheme, params in scheme_params(base).items():
        scaled = scale_to_dimensionless(params)
        if overrides and scheme in overrides:
            f = overrides[scheme]
            rhs = lambda tau, D, f=f: f(tau, D, scaled)  # noqa: E731
        else:
            rhs = rhs_for(scheme, scaled)
        worst = 0.0
        for _ in range(pairs):
            state = CoefficientState(rng.uniform(0.0, tau_max), _random_state(rng, n_states))
            worst = max(worst, relative_error(rhs(state.tau, state.coeffs), oracle_rhs(state, params, scheme)))
        results.append(SuiteResult(f"oracle-equivalence[{scheme.value}]", worst <= ORACLE_TOL, worst, ORACLE_TOL))
    return results


def hermiticity(base: OscillatorParams | None = None, n_states: int = 12, samples: int = 50, seed: int = 0) -> list[SuiteResult]:
    base = proton_params() if base is None else base
    rng = np.random.default_rng(seed)
    results = []
    for scheme, params in scheme_params(base).items():
        worst = 0.0
        for _ in range(samples):
            t = rng.uniform(0.0, 20.0) / params.natural_frequency
            W = coupling_matrix(params, t, scheme, n_states)
            scale = max(np.max(np.abs(W)), np.finfo(float).tiny)
            worst = max(worst, float(np.max(np.abs(W - W.conj().T)) / scale))
        results.append(SuiteResult(f"hermiticity[{scheme.value}]", worst <= HERMITIAN_TOL, worst, HERMITIAN_TOL))
    return results


def stationarity(base: OscillatorParams | None = None, n_states: int = 12, periods: float = 5.0) -> list[SuiteResult]:
    """Zero drive keeps the ground state, for every scheme."""
    base = (proton_params() if base is None else base).with_(drive_amplitude=0.0)
    results = []
    for scheme, params in scheme_params(base).items():
        run = integrate(ground_state(n_states), scale_to_dimensionless(params), scheme, 2 * math.pi * periods, 1e-3, 10)
        target = np.zeros(n_states)
        target[0] = 1.0
        worst = float(np.max(np.abs(run.probabilities - target)))
        results.append(SuiteResult(f"stationarity[{scheme.value}]", worst <= STATIONARY_TOL, worst, STATIONARY_TOL))
    return results


UNITARITY_CASES = {
    SchemeKind.K_NONRESONANT: natural_params(0.1, 0.5),
    SchemeKind.K_RESONANT: natural_params(0.01),
    SchemeKind.HAMILTONIAN: natural_params(0.1),
}


def unitarity(n_states: int = 12, periods: float = 50.0, dt: float = 1e-3) -> list[SuiteResult]:
    results = []
    for scheme, params in UNITARITY_CASES.items():
        run = integrate(ground_state(n_states), scale_to_dimensionless(params), scheme, 2 * math.pi * periods, dt, 10)
        drift = float(np.max(np.abs(run.norms - 1.0)))
        results.append(SuiteResult(f"unitarity[{scheme.value}]", drift <= UNITARITY_TOL, drift, UNITARITY_TOL))
    return results


COHERENT_CASES = {
    "off-resonant": natural_params(0.05, 0.5, 0.3),
    "resonant": natural_params(0.004),
}


def coherent_state(n_states: int = 12, periods: float = 50.0, dt: float = 1e-3) -> list[SuiteResult]:
    """Hamiltonian populations against the Poisson law of the displaced ground state."""
    results = []
    for label, params in COHERENT_CASES.items():
        scaled = scale_to_dimensionless(params)
        run = integrate(ground_state(n_states), scaled, SchemeKind.HAMILTONIAN, 2 * math.pi * periods, dt, 10)
        exact = coherent_populations(scaled, run.tau, n_states)
        top = float(np.max(exact[:, -1]))
        worst = float(np.max(np.abs(run.probabilities - exact)))
        ok = worst <= COHERENT_TOL and top < 1e-10
        results.append(SuiteResult(f"coherent-state[{label}]", ok, worst, COHERENT_TOL, f"top-level population {top:.1e}"))
    return results


def classical_invariance(periods: float = 100.0, dt: float = 1e-3) -> list[SuiteResult]:
    """K stays constant along an RK4 solution of Newton's equation."""
    results = []
    cases = {
        NONRESONANT: natural_params(0.3 / math.sqrt(2.0), 0.7, 0.4),
        RESONANT: natural_params(0.05 / math.sqrt(2.0), None, 0.4),
    }
    for case, params in cases.items():
        path = integrate_newton(params, 1.0, 0.5, 2 * math.pi * periods, dt, stride=100)
        K = constant_of_motion(params, path, case)
        drift = float(np.max(np.abs(K - K[0])) / abs(K[0]))
        results.append(SuiteResult(f"classical-invariance[{case}]", drift <= INVARIANCE_TOL, drift, INVARIANCE_TOL))
    return results


def classical_decomposition(points: int = 1000, seed: int = 0) -> list[SuiteResult]:
    rng = np.random.default_rng(seed)
    results = []
    base = proton_params()
    cases = {NONRESONANT: base.with_(drive_frequency=0.5 * base.natural_frequency), RESONANT: base}
    ell = base.oscillator_length
    for case, params in cases.items():
        w0 = params.natural_frequency
        x = rng.uniform(-1e3, 1e3, points) * ell
        v = rng.uniform(-1e3, 1e3, points) * ell * w0
        t = rng.uniform(0.0, 50.0, points) / w0
        state = ClassicalState(x, v, t)
        K = constant_of_motion(params, state, case)
        split = oscillator_energy(params, x, v) + perturbation_W(params, state, case)
        worst = float(np.max(np.abs(split - K) / np.abs(K)))
        results.append(SuiteResult(f"classical-decomposition[{case}]", worst <= DECOMPOSITION_TOL, worst, DECOMPOSITION_TOL))
    return results


ORDER_CASES = {
    SchemeKind.K_NONRESONANT: natural_params(0.5, 0.6, 0.2),
    SchemeKind.K_RESONANT: natural_params(0.3, None, 0.2),
    SchemeKind.HAMILTONIAN: natural_params(0.5, 0.8, 0.2),
}


def convergence_ratio(scheme: SchemeKind, params: OscillatorParams, tau_end: float = 2 * math.pi,
                      steps: int = 100, n_states: int = 12) -> float:
    """|y(h) - y(h/2)| / |y(h/2) - y(h/4)| for a start that populates several levels."""
    scaled = scale_to_dimensionless(params)
    start = CoefficientState(0.0, np.ones(n_states) / math.sqrt(n_states))
    finals = []
    for k in range(3):
        n = steps * 2**k
        run = integrate(start, scaled, scheme, tau_end, tau_end / n, n, max_drift=1e-2)
        finals.append(run.coeffs[-1])
    return float(np.linalg.norm(finals[0] - finals[1]) / np.linalg.norm(finals[1] - finals[2]))


def integrator_order() -> list[SuiteResult]:
    lo, hi = ORDER_RANGE
    results = []
    for scheme, params in ORDER_CASES.items():
        r = convergence_ratio(scheme, params)
        results.append(SuiteResult(f"rk4-order[{scheme.value}]", lo <= r <= hi, r, ORDER_RANGE))
    return results


SUITES: dict[str, Callable[..., list[SuiteResult]]] = {
    "oracle-equivalence": oracle_equivalence,
    "hermiticity": hermiticity,
    "stationarity": stationarity,
    "unitarity": lambda base=None, **kw: unitarity(),
    "coherent-state": lambda base=None, **kw: coherent_state(),
    "classical": lambda base=None, **kw: classical_invariance() + classical_decomposition(),
    "rk4-order": lambda base=None, **kw: integrator_order(),
}


def run_all(base: OscillatorParams | None = None, seed: int = 0) -> list[SuiteResult]:
    results = []
    results += oracle_equivalence(base, seed=seed)
    results += hermiticity(base, seed=seed)
    results += stationarity(base)
    results += unitarity()
    results += coherent_state()
    results += classical_invariance()
    results += classical_decomposition(seed=seed)
    results += integrator_order()
    return results
