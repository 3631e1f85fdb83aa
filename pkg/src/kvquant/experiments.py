"""Scenario runs, K-versus-H comparisons and drive-amplitude sweeps."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from . import __version__
from .dynamics import (
    DEFAULT_DT,
    DEFAULT_PERIODS,
    DEFAULT_STRIDE,
    CoefficientState,
    SchemeKind,
    coupling_bound,
    ground_state,
    integrate,
    select_scheme,
    suggest_dt,
)
from .model import REFERENCE_DRIVE, TRAP_FREQUENCY, OscillatorParams, Truncation, proton_params, scale_to_dimensionless
from .observables import ObservableSeries

OSCILLATION_DEADBAND = 1e-6
NONRESONANT_RATIO = 0.5
PRESET_STEP_TARGET = 1e-6
PRESET_SAMPLES = 4000
MAX_AUTO_STEPS = 200_000_000
SWEEP_ALPHAS = tuple(np.logspace(-15, -12, 20))

RESONANT = "resonant"
NONRESONANT = "nonresonant"


@dataclass(frozen=True)
class Scenario:
    """One integration run.

    ``t_end`` and ``dt`` are in units of 1/w0.  ``dt=None`` picks a fixed
    step from the coupling strength (shared by the K and H schemes of the
    same parameters) and ``stride=None`` picks the sampling to give about
    ``samples`` points.  ``keep_scalar_phase=False`` drops the
    level-independent phase terms, which leaves every population unchanged.
    """

    params: OscillatorParams
    scheme: str = "K"
    case: str = RESONANT
    n_states: int = 12
    t_end: float = 2.0 * math.pi * DEFAULT_PERIODS
    dt: float | None = DEFAULT_DT
    stride: int | None = DEFAULT_STRIDE
    keep_scalar_phase: bool = True
    initial: tuple | None = None
    samples: int = PRESET_SAMPLES
    step_target: float = PRESET_STEP_TARGET

    def __post_init__(self):
        if self.case not in (RESONANT, NONRESONANT):
            raise ValueError(f"case must be 'resonant' or 'nonresonant', got {self.case!r}")
        resonant = self.case == RESONANT
        if resonant != self.params.is_resonant:
            raise ValueError(f"case {self.case!r} contradicts drive_frequency / natural_frequency")
        Truncation(self.n_states)
        if not self.t_end > 0:
            raise ValueError("t_end must be positive")
        select_scheme(self.scheme, resonant)

    @property
    def kind(self) -> SchemeKind:
        return select_scheme(self.scheme, self.case == RESONANT)

    def with_(self, **changes) -> "Scenario":
        return replace(self, **changes)

    def initial_state(self) -> CoefficientState:
        if self.initial is None:
            return ground_state(self.n_states)
        c = np.asarray(self.initial, dtype=complex)
        if c.size != self.n_states:
            raise ValueError("initial vector length differs from n_states")
        return CoefficientState(0.0, c)

    def grid(self) -> tuple[float, int, int]:
        """(dt, stride, n_steps); dt * n_steps is t_end to within dt / 2."""
        if self.dt is not None:
            n_steps = int(round(self.t_end / self.dt))
            if n_steps < 1:
                raise ValueError(f"dt={self.dt!r} exceeds t_end={self.t_end!r}")
            stride = self.stride if self.stride is not None else max(1, n_steps // self.samples)
            return self.dt, stride, n_steps
        scaled = scale_to_dimensionless(self.params)
        kinds = [SchemeKind.HAMILTONIAN, select_scheme("K", self.case == RESONANT)]
        dt_max = min(suggest_dt(scaled, k, self.t_end, self.n_states, self.keep_scalar_phase, self.step_target) for k in kinds)
        if self.stride is not None:
            stride = self.stride
            n_steps = stride * math.ceil(self.t_end / (dt_max * stride))
        else:
            n_samples = self.samples
            stride = math.ceil(self.t_end / n_samples / dt_max)
            n_steps = n_samples * stride
        if n_steps > MAX_AUTO_STEPS:
            hint = "" if not self.keep_scalar_phase else "; dropping the scalar phase may help"
            raise ValueError(f"automatic step needs {n_steps:.3g} steps (limit {MAX_AUTO_STEPS:.0e}){hint}")
        return self.t_end / n_steps, stride, n_steps

    def to_dict(self) -> dict:
        d = asdict(self)
        d["params"] = asdict(self.params)
        d["initial"] = None if self.initial is None else [[complex(z).real, complex(z).imag] for z in self.initial]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Scenario":
        d = dict(d)
        d["params"] = OscillatorParams(**d["params"])
        if d.get("initial") is not None:
            d["initial"] = tuple(complex(re, im) for re, im in d["initial"])
        return cls(**d)


def preset(name: str, scheme: str = "K") -> Scenario:
    """Named scenarios with the proton / GHz / 1e-13 N constants.

    Both run one natural period with an automatic step and without the
    level-independent phase; the non-resonant drive sits at w = w0 / 2.
    """
    common = dict(scheme=scheme, n_states=12, t_end=2.0 * math.pi, dt=None, stride=None, keep_scalar_phase=False)
    if name == "paper-resonant":
        return Scenario(proton_params(), case=RESONANT, **common)
    if name == "paper-nonresonant":
        return Scenario(proton_params(NONRESONANT_RATIO * TRAP_FREQUENCY), case=NONRESONANT, **common)
    raise ValueError(f"unknown preset {name!r}")


PRESETS = ("paper-resonant", "paper-nonresonant")


def run_scenario(scenario: Scenario) -> ObservableSeries:
    dt, stride, n_steps = scenario.grid()
    scaled = scale_to_dimensionless(scenario.params)
    run = integrate(
        scenario.initial_state(), scaled, scenario.kind, n_steps * dt, dt, stride, scenario.keep_scalar_phase,
    )
    series = ObservableSeries.from_coefficients(run.tau, run.coeffs, scenario.params)
    series.diagnostics = {
        "scheme": scenario.kind.value,
        "dt": dt,
        "stride": stride,
        "n_steps": n_steps,
        "norm_drift": run.norm_drift,
        "coupling_bound": coupling_bound(scaled, scenario.kind, scenario.t_end, scenario.n_states, scenario.keep_scalar_phase),
        "drive_strength": scaled.drive_strength,
    }
    return series


def count_oscillations(values, tau, deadband: float = OSCILLATION_DEADBAND) -> int:
    """Sign changes of the finite-difference slope, ignoring |slope| <= deadband."""
    values = np.asarray(values, dtype=float)
    slope = np.diff(values) / np.diff(np.asarray(tau, dtype=float))
    signs = np.sign(slope[np.abs(slope) > deadband])
    return int(np.count_nonzero(signs[1:] != signs[:-1]))


@dataclass
class Comparison:
    max_p0_difference: float
    min_p0_k: float
    min_p0_h: float
    oscillations_k: int
    oscillations_h: int
    entropy_bar_k: float
    entropy_bar_h: float
    energy_bar_k: float
    energy_bar_h: float
    k_series: ObservableSeries = field(repr=False, default=None)
    h_series: ObservableSeries = field(repr=False, default=None)


def compare_series(k: ObservableSeries, h: ObservableSeries) -> Comparison:
    if k.tau.shape != h.tau.shape or not np.array_equal(k.tau, h.tau):
        raise ValueError("series are sampled on different grids")
    p0k, p0h = k.probabilities[:, 0], h.probabilities[:, 0]
    return Comparison(
        max_p0_difference=float(np.max(np.abs(p0k - p0h))),
        min_p0_k=float(p0k.min()),
        min_p0_h=float(p0h.min()),
        oscillations_k=count_oscillations(p0k, k.tau),
        oscillations_h=count_oscillations(p0h, h.tau),
        entropy_bar_k=k.average_entropy(),
        entropy_bar_h=h.average_entropy(),
        energy_bar_k=k.average_energy(),
        energy_bar_h=h.average_energy(),
        k_series=k,
        h_series=h,
    )


def compare_schemes(k_scenario: Scenario, h_scenario: Scenario) -> Comparison:
    """Run two scenarios that differ only in scheme and compare them."""
    if k_scenario.with_(scheme=h_scenario.scheme) != h_scenario:
        raise ValueError("scenarios must be identical apart from the scheme")
    return compare_series(run_scenario(k_scenario), run_scenario(h_scenario))


@dataclass
class SweepRow:
    alpha: float
    entropy_bar_k: float = math.nan
    entropy_bar_h: float = math.nan
    energy_bar_k: float = math.nan
    energy_bar_h: float = math.nan
    error: str = ""


@dataclass
class SweepResult:
    rows: list[SweepRow]

    @property
    def failed(self) -> list[SweepRow]:
        return [r for r in self.rows if r.error]

    def sorted(self) -> "SweepResult":
        return SweepResult(sorted(self.rows, key=lambda r: r.alpha))

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.rows])


def _sweep_row(base: Scenario, alpha: float) -> SweepRow:
    try:
        params = base.params.with_(drive_amplitude=float(alpha))
        k = run_scenario(base.with_(params=params, scheme="K"))
        h = run_scenario(base.with_(params=params, scheme="H"))
        return SweepRow(alpha, k.average_entropy(), h.average_entropy(), k.average_energy(), h.average_energy())
    except Exception as exc:  # recorded per row; the caller decides
        return SweepRow(alpha, error=f"alpha={alpha:.6g}: {type(exc).__name__}: {exc}")


def sweep_alpha(base: Scenario, alphas=SWEEP_ALPHAS, jobs: int = 1) -> SweepResult:
    """Time-averaged entropy and energy of both schemes for each drive amplitude.

    Rows come back in the order of ``alphas``; each row is independent.
    """
    alphas = [float(a) for a in alphas]
    if not alphas:
        raise ValueError("alpha list is empty")
    if any(not (a >= 0 and math.isfinite(a)) for a in alphas):
        raise ValueError("alpha values must be finite and >= 0")
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_sweep_row, [base] * len(alphas), alphas))
    else:
        rows = [_sweep_row(base, a) for a in alphas]
    return SweepResult(rows)


def manifest(scenario: Scenario, series: ObservableSeries | None = None, **extra) -> dict:
    out = {"kvquant_version": __version__, "scenario": scenario.to_dict()}
    if series is not None:
        out["diagnostics"] = {k: (v.value if isinstance(v, SchemeKind) else v) for k, v in series.diagnostics.items()}
    out.update(extra)
    return out
