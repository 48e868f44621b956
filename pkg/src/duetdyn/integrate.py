"""Time integration of the master equation and of the closed two-mode equation.

The master-equation state is advanced in a real 4-component chart
(rho_RR, rho_LL, Re rho_RL, Im rho_RL); Hermiticity is then exact by
construction while the trace and positivity are monitored by guards every
step.  The closed-system path integrates the raw amplitudes (a_R, a_L)
instead and never applies dissipation, which makes it an independent oracle
for the Gamma = 0 master dynamics.

Batched integration: the fixed-step integrator advances a whole batch of
states (one row per sweep cell) through identical element-wise arithmetic,
so per-cell results do not depend on how cells are grouped into batches.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .model import (
    DensityMatrix,
    InitialState,
    ModelParams,
    ValidationError,
    build_lindblad_operator,
    density_from_initial,
    _dissipator_matrix,
)

__all__ = [
    "Method",
    "TimeGrid",
    "IntegratorConfig",
    "Trajectory",
    "IntegrationError",
    "TraceDriftError",
    "PositivityViolationError",
    "StepUnderflowError",
    "NormDriftError",
    "evolve",
    "evolve_gpe",
    "steady_state",
]

GPE_NORM_ABORT = 1e-8      # |a_R|^2 + |a_L|^2 drift that aborts evolve_gpe
STEADY_DWELL = 10.0        # dwell window (units 1/v) for steady_state
_MIN_STEP_FACTOR = 1e-14   # adaptive step underflow floor, relative to |t|


class Method(str, Enum):
    RK4_FIXED = "rk4"
    RK45_ADAPTIVE = "rk45"


class IntegrationError(RuntimeError):
    """Integration aborted; `time` is the simulation time of the violation."""

    def __init__(self, message: str, time: float):
        super().__init__(f"{message} at t={time:g}")
        self.time = time


class TraceDriftError(IntegrationError):
    pass


class PositivityViolationError(IntegrationError):
    pass


class StepUnderflowError(IntegrationError):
    pass


class NormDriftError(IntegrationError):
    pass


@dataclass(frozen=True)
class TimeGrid:
    """Uniform recording grid: samples every record_stride steps of size dt."""

    t_final: float
    dt: float = 1e-3
    record_stride: int = 1

    def __post_init__(self):
        if not (self.t_final > 0.0 and math.isfinite(self.t_final)):
            raise ValidationError(f"t_final must be positive, got {self.t_final}")
        if not (0.0 < self.dt <= self.t_final):
            raise ValidationError(f"dt must lie in (0, t_final], got {self.dt}")
        if self.record_stride < 1:
            raise ValidationError(f"record_stride must be >= 1, got {self.record_stride}")

    def n_steps(self) -> int:
        return max(1, int(round(self.t_final / self.dt)))

    def record_steps(self) -> list[int]:
        n = self.n_steps()
        ks = list(range(0, n + 1, self.record_stride))
        if ks[-1] != n:
            ks.append(n)
        return ks


@dataclass(frozen=True)
class IntegratorConfig:
    method: Method = Method.RK4_FIXED
    abs_tol: float = 1e-10          # adaptive only
    rel_tol: float = 1e-8           # adaptive only
    trace_guard: float = 1e-9       # max allowed |tr rho - 1|
    positivity_guard: float = 1e-9  # max allowed negative eigenvalue

    def __post_init__(self):
        object.__setattr__(self, "method", Method(self.method))
        for name in ("abs_tol", "rel_tol", "trace_guard", "positivity_guard"):
            if not getattr(self, name) > 0.0:
                raise ValidationError(f"{name} must be positive")


DEFAULT_CONFIG = IntegratorConfig()


class Trajectory:
    """Recorded samples of the state with derived observables.

    `data` has one row per sample: (rho_RR, rho_LL, Re rho_RL, Im rho_RL).
    """

    def __init__(self, times: np.ndarray, data: np.ndarray):
        times = np.asarray(times, dtype=float)
        data = np.asarray(data, dtype=float)
        if times.ndim != 1 or data.shape != (times.size, 4):
            raise ValidationError("times must be (n,) and data (n, 4)")
        if times.size and np.any(np.diff(times) <= 0.0):
            raise ValidationError("sample times must be strictly increasing")
        self.times = times
        self.data = data

    def __len__(self) -> int:
        return self.times.size

    @property
    def rho_rr(self) -> np.ndarray:
        return self.data[:, 0]

    @property
    def rho_ll(self) -> np.ndarray:
        return self.data[:, 1]

    @property
    def re_rl(self) -> np.ndarray:
        return self.data[:, 2]

    @property
    def im_rl(self) -> np.ndarray:
        return self.data[:, 3]

    @property
    def z(self) -> np.ndarray:
        return self.data[:, 0] - self.data[:, 1]

    @property
    def coherence(self) -> np.ndarray:
        return np.hypot(self.data[:, 2], self.data[:, 3])

    @property
    def purity(self) -> np.ndarray:
        d = self.data
        return d[:, 0] ** 2 + d[:, 1] ** 2 + 2.0 * (d[:, 2] ** 2 + d[:, 3] ** 2)

    def density(self, i: int) -> DensityMatrix:
        rr, ll, re, im = self.data[i]
        rl = complex(re, im)
        return DensityMatrix(rr, rl, rl.conjugate(), ll)

    def window_mask(self, t_start: float, t_end: float) -> np.ndarray:
        return (self.times >= t_start) & (self.times <= t_end)


# --------------------------------------------------------------------------
# Right-hand sides on the real charts
# --------------------------------------------------------------------------

def _chart_of(m: np.ndarray) -> np.ndarray:
    return np.array([m[0, 0].real, m[1, 1].real, m[0, 1].real, m[0, 1].imag])


def _lindblad_chart_matrix(params: ModelParams) -> np.ndarray:
    """4x4 real matrix of the dissipator in the (rr, ll, re, im) chart."""
    a_op = build_lindblad_operator(params.lindblad)
    basis = (
        np.array([[1.0, 0.0], [0.0, 0.0]], dtype=complex),
        np.array([[0.0, 0.0], [0.0, 1.0]], dtype=complex),
        np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex),
        np.array([[0.0, 1.0j], [-1.0j, 0.0]], dtype=complex),
    )
    cols = [
        _chart_of(_dissipator_matrix(b, a_op, params.decoherence_rate)) for b in basis
    ]
    return np.column_stack(cols)


def _make_master_rhs(c_vals, params: ModelParams):
    """RHS on the (..., 4) chart; c_vals may be a scalar or a (B,) array."""
    gb = params.gamma
    v = params.v
    hv = 0.5 * v
    if params.decoherence_rate > 0.0:
        dm = _lindblad_chart_matrix(params)
        diss = [
            (r, k, float(dm[r, k]))
            for r in range(4)
            for k in range(4)
            if dm[r, k] != 0.0
        ]
    else:
        diss = []

    def rhs(y):
        rr, ll, re, im = y[..., 0], y[..., 1], y[..., 2], y[..., 3]
        s1 = rr - ll
        two_h = gb + c_vals * s1
        vim = v * im
        d = [-vim, vim, two_h * im, hv * s1 - two_h * re]
        cols = (rr, ll, re, im)
        for r, k, coeff in diss:
            d[r] = d[r] + coeff * cols[k]
        return np.stack(d, axis=-1)

    return rhs


def _make_gpe_rhs(c_vals, params: ModelParams):
    """RHS for amplitudes in the (Re a_R, Im a_R, Re a_L, Im a_L) chart."""
    gb = params.gamma
    hv = 0.5 * params.v

    def rhs(y):
        re_r, im_r, re_l, im_l = y[..., 0], y[..., 1], y[..., 2], y[..., 3]
        z = (re_r * re_r + im_r * im_r) - (re_l * re_l + im_l * im_l)
        h = 0.5 * gb + 0.5 * c_vals * z
        return np.stack(
            [
                h * im_r + hv * im_l,
                -(h * re_r) - hv * re_l,
                hv * im_r - h * im_l,
                h * re_l - hv * re_r,
            ],
            axis=-1,
        )

    return rhs


def _rk4_step(rhs, y, dt):
    k1 = rhs(y)
    k2 = rhs(y + (0.5 * dt) * k1)
    k3 = rhs(y + (0.5 * dt) * k2)
    k4 = rhs(y + dt * k3)
    return y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _check_master_guards(y, t, cfg: IntegratorConfig) -> None:
    tr = y[..., 0] + y[..., 1]
    drift = np.abs(tr - 1.0)
    worst = float(drift.max())
    if worst > cfg.trace_guard:
        raise TraceDriftError(f"|tr rho - 1| = {worst:.3e} exceeds trace guard", t)
    s1 = y[..., 0] - y[..., 1]
    disc = np.sqrt(s1 * s1 + 4.0 * (y[..., 2] ** 2 + y[..., 3] ** 2))
    min_eig = float(((tr - disc) / 2.0).min())
    if min_eig < -cfg.positivity_guard:
        raise PositivityViolationError(
            f"eigenvalue {min_eig:.3e} below positivity guard", t
        )


def _check_gpe_guard(y, t) -> None:
    norm = y[..., 0] ** 2 + y[..., 1] ** 2 + y[..., 2] ** 2 + y[..., 3] ** 2
    worst = float(np.abs(norm - 1.0).max())
    if worst > GPE_NORM_ABORT:
        raise NormDriftError(f"|a|^2 drift {worst:.3e} exceeds {GPE_NORM_ABORT:g}", t)


def _run_fixed(rhs, guard, y0: np.ndarray, grid: TimeGrid):
    """Fixed-step RK4 over the full grid; records along record_steps()."""
    n = grid.n_steps()
    dt = grid.dt
    record = grid.record_steps()
    out = np.empty((len(record),) + y0.shape)
    times = np.empty(len(record))
    pos = 0
    if record[0] == 0:
        out[0] = y0
        times[0] = 0.0
        pos = 1
    y = y0
    for k in range(1, n + 1):
        y = _rk4_step(rhs, y, dt)
        t = k * dt
        guard(y, t)
        if pos < len(record) and record[pos] == k:
            out[pos] = y
            times[pos] = t
            pos += 1
    return times, out


# Dormand-Prince 5(4) tableau.
_DP_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_DP_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_DP_B5 = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0)
_DP_B4 = (
    5179 / 57600,
    0.0,
    7571 / 16695,
    393 / 640,
    -92097 / 339200,
    187 / 2100,
    1 / 40,
)


def _run_adaptive(rhs, guard, y0: np.ndarray, grid: TimeGrid, cfg: IntegratorConfig):
    """Embedded Dormand-Prince 5(4) with PI-free step control, landing
    exactly on each record time."""
    record = grid.record_steps()
    rec_times = [k * grid.dt for k in record]
    out = np.empty((len(record),) + y0.shape)
    times = np.empty(len(record))
    pos = 0
    if record[0] == 0:
        out[0] = y0
        times[0] = 0.0
        pos = 1
    y = y0
    t = 0.0
    h = grid.dt
    for target in rec_times[pos:]:
        while t < target:
            h = min(h, target - t)
            if h < _MIN_STEP_FACTOR * max(1.0, abs(t)):
                raise StepUnderflowError(f"step size underflow (h={h:.3e})", t)
            ks = []
            for i in range(7):
                yi = y
                for aij, kj in zip(_DP_A[i], ks):
                    yi = yi + (h * aij) * kj
                ks.append(rhs(yi))
            y5 = y
            y4 = y
            for b5, b4, k in zip(_DP_B5, _DP_B4, ks):
                if b5:
                    y5 = y5 + (h * b5) * k
                if b4:
                    y4 = y4 + (h * b4) * k
            scale = cfg.abs_tol + cfg.rel_tol * np.maximum(np.abs(y), np.abs(y5))
            err = float(np.sqrt(np.mean(((y5 - y4) / scale) ** 2)))
            if err <= 1.0:
                t = t + h
                y = y5
                guard(y, t)
            factor = 0.9 * (err ** -0.2) if err > 0.0 else 5.0
            h = h * min(5.0, max(0.2, factor))
        out[pos] = y
        times[pos] = target
        pos += 1
    return times, out


def _integrate(rhs, guard, y0, grid: TimeGrid, cfg: IntegratorConfig):
    if cfg.method is Method.RK4_FIXED:
        return _run_fixed(rhs, guard, y0, grid)
    return _run_adaptive(rhs, guard, y0, grid, cfg)


def _master_batch(y0, c_vals, params, grid, cfg):
    """Integrate a batch of master-equation states; shared by evolve/run_sweep."""
    rhs = _make_master_rhs(c_vals, params)

    def guard(y, t):
        _check_master_guards(y, t, cfg)

    return _integrate(rhs, guard, y0, grid, cfg)


def _density_chart(rho: DensityMatrix) -> np.ndarray:
    return np.array([rho.rr.real, rho.ll.real, rho.rl.real, rho.rl.imag])


def evolve(
    rho0: DensityMatrix,
    params: ModelParams,
    grid: TimeGrid,
    cfg: IntegratorConfig = DEFAULT_CONFIG,
) -> Trajectory:
    """Advance the master equation from rho0, recording along the grid."""
    y0 = _density_chart(rho0)[None, :]
    times, out = _master_batch(y0, params.c, params, grid, cfg)
    return Trajectory(times, out[:, 0, :])


def _amplitude_chart(init: InitialState) -> np.ndarray:
    a_r, a_l = init.amplitudes()
    return np.array([a_r.real, a_r.imag, a_l.real, a_l.imag])


def _gpe_to_density_chart(out: np.ndarray) -> np.ndarray:
    re_r, im_r, re_l, im_l = out[..., 0], out[..., 1], out[..., 2], out[..., 3]
    rr = re_r * re_r + im_r * im_r
    ll = re_l * re_l + im_l * im_l
    # rl = a_R * conj(a_L)
    re = re_r * re_l + im_r * im_l
    im = im_r * re_l - re_r * im_l
    return np.stack([rr, ll, re, im], axis=-1)


def evolve_gpe(
    init: InitialState,
    params: ModelParams,
    grid: TimeGrid,
    cfg: IntegratorConfig = DEFAULT_CONFIG,
) -> Trajectory:
    """Closed-system two-mode amplitude dynamics; decoherence_rate is ignored.

    The trajectory exposes the same observable schema as `evolve`
    (purity stays 1 up to the norm drift of the integrator).
    """
    rhs = _make_gpe_rhs(params.c, params)
    y0 = _amplitude_chart(init)[None, :]
    times, out = _integrate(rhs, _check_gpe_guard, y0, grid, cfg)
    return Trajectory(times, _gpe_to_density_chart(out[:, 0, :]))


def steady_state(
    rho0: DensityMatrix,
    params: ModelParams,
    cfg: IntegratorConfig = DEFAULT_CONFIG,
    t_max: float = 200.0,
    eps: float = 1e-7,
    dt: float = 1e-3,
) -> tuple[DensityMatrix, bool]:
    """Integrate until the generator norm stays below eps over a 10/v dwell.

    Returns the state at the start of the dwell window, or the t_max state
    flagged not-converged.  Requires decoherence_rate > 0: the closed flow
    does not converge.
    """
    if not params.decoherence_rate > 0.0:
        raise ValidationError("steady_state requires decoherence_rate > 0")
    rhs = _make_master_rhs(params.c, params)
    dwell = STEADY_DWELL / params.v
    n = max(1, int(round(t_max / dt)))
    y = _density_chart(rho0)[None, :]
    dwell_start_t = None
    dwell_start_y = None

    def rhs_norm(yv) -> float:
        d = rhs(yv)[0]
        # Frobenius norm of drho/dt from the chart components
        return math.sqrt(d[0] ** 2 + d[1] ** 2 + 2.0 * (d[2] ** 2 + d[3] ** 2))

    t = 0.0
    for k in range(n + 1):
        if rhs_norm(y) < eps:
            if dwell_start_t is None:
                dwell_start_t = t
                dwell_start_y = y.copy()
            elif t - dwell_start_t >= dwell:
                rr, ll, re, im = dwell_start_y[0]
                rl = complex(re, im)
                return DensityMatrix(rr, rl, rl.conjugate(), ll), True
        else:
            dwell_start_t = None
            dwell_start_y = None
        if k == n:
            break
        y = _rk4_step(rhs, y, dt)
        t = (k + 1) * dt
        _check_master_guards(y, t, cfg)
    rr, ll, re, im = y[0]
    rl = complex(re, im)
    return DensityMatrix(rr, rl, rl.conjugate(), ll), False
