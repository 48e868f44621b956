"""Self-validation: fast numerical checks of the model and integrator invariants.

Each check returns (name, passed, detail); `run_validation` executes all of
them with a fixed RNG seed so the suite is deterministic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .analysis import window_summary
from .integrate import TimeGrid, evolve, evolve_gpe
from .model import (
    DensityMatrix,
    InitialState,
    LindbladSpec,
    ModelParams,
    bloch_from_density,
    bloch_rhs,
    density_from_bloch,
    density_from_initial,
    mean_field_energy,
    rhs,
)

__all__ = ["CheckResult", "run_validation"]


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def _random_density(rng: np.random.Generator) -> DensityMatrix:
    direction = rng.normal(size=3)
    direction /= np.linalg.norm(direction)
    s = direction * rng.uniform() ** (1.0 / 3.0)
    rl = (s[0] - 1j * s[1]) / 2.0
    return DensityMatrix((1.0 + s[2]) / 2.0, rl, rl.conjugate(), (1.0 - s[2]) / 2.0)


def _random_params(rng: np.random.Generator, closed: bool = False) -> ModelParams:
    lambdas = tuple(complex(a, b) for a, b in rng.normal(size=(3, 2)))
    return ModelParams(
        gamma=rng.uniform(-1.0, 1.0),
        c=rng.uniform(0.0, 4.0),
        v=1.0,
        decoherence_rate=0.0 if closed else rng.uniform(0.0, 0.5),
        lindblad=LindbladSpec.custom(lambdas, scale=rng.uniform(0.2, 1.5)),
    )


def _check_trace_hermiticity(rng) -> list[CheckResult]:
    worst_tr = 0.0
    worst_h = 0.0
    for _ in range(500):
        m = rhs(_random_density(rng), _random_params(rng))
        worst_tr = max(worst_tr, abs(np.trace(m)))
        worst_h = max(worst_h, float(np.abs(m - m.conj().T).max()))
    return [
        CheckResult("rhs-traceless", worst_tr < 1e-14, f"max |tr| = {worst_tr:.2e}"),
        CheckResult("rhs-hermiticity", worst_h < 1e-14, f"max asymmetry = {worst_h:.2e}"),
    ]


def _check_bloch_equivalence(rng) -> CheckResult:
    worst = 0.0
    for _ in range(1000):
        rho = _random_density(rng)
        params = _random_params(rng)
        m = rhs(rho, params)
        ds_matrix = np.array(
            [2.0 * m[0, 1].real, -2.0 * m[0, 1].imag, (m[0, 0] - m[1, 1]).real]
        )
        ds_bloch = bloch_rhs(bloch_from_density(rho), params)
        worst = max(worst, float(np.abs(ds_matrix - ds_bloch).max()))
    return CheckResult(
        "bloch-matrix-equivalence", worst < 1e-12, f"max deviation = {worst:.2e}"
    )


def _check_bloch_roundtrip(rng) -> CheckResult:
    worst = 0.0
    for _ in range(500):
        rho = _random_density(rng)
        back = density_from_bloch(bloch_from_density(rho))
        worst = max(
            worst,
            abs(back.rr - rho.rr),
            abs(back.rl - rho.rl),
            abs(back.ll - rho.ll),
        )
    return CheckResult("bloch-roundtrip", worst < 1e-14, f"max deviation = {worst:.2e}")


def _check_energy_identity(rng) -> CheckResult:
    worst = 0.0
    for _ in range(500):
        rho = _random_density(rng)
        params = _random_params(rng, closed=True)
        s = bloch_from_density(rho)
        ds = bloch_rhs(s, params)
        de = (
            (params.c / 2.0) * s.sz * ds[2]
            + (params.v / 2.0) * ds[0]
            + (params.gamma / 2.0) * ds[2]
        )
        worst = max(worst, abs(de))
    return CheckResult("closed-energy-identity", worst < 1e-12, f"max dE/dt = {worst:.2e}")


def _check_hamiltonian_coherence_independence(rng) -> CheckResult:
    worst = 0.0
    for _ in range(200):
        params = _random_params(rng, closed=True)
        z = rng.uniform(-0.8, 0.8)
        r_max = math.sqrt(1.0 - z * z) / 2.0
        phase = rng.uniform(0.0, 2.0 * math.pi)
        rl_a = 0.9 * r_max * complex(math.cos(phase), math.sin(phase))
        rl_b = 0.3 * r_max * complex(math.cos(phase + 1.0), math.sin(phase + 1.0))
        rho_a = DensityMatrix((1 + z) / 2, rl_a, rl_a.conjugate(), (1 - z) / 2)
        rho_b = DensityMatrix((1 + z) / 2, rl_b, rl_b.conjugate(), (1 - z) / 2)
        from .model import build_hamiltonian

        diff = np.abs(
            build_hamiltonian(rho_a, params) - build_hamiltonian(rho_b, params)
        ).max()
        worst = max(worst, float(diff))
    return CheckResult(
        "hamiltonian-depends-on-imbalance-only", worst == 0.0, f"max diff = {worst:.2e}"
    )


def _check_sigma_x_fixed_point() -> CheckResult:
    params = ModelParams(c=3.0, decoherence_rate=0.2, lindblad=LindbladSpec.sigma_x())
    m = rhs(DensityMatrix.maximally_mixed(), params)
    worst = float(np.abs(m).max())
    return CheckResult("sigma-x-mixed-fixed-point", worst == 0.0, f"|rhs(I/2)| = {worst:.2e}")


def _check_rabi() -> CheckResult:
    params = ModelParams()
    traj = evolve(
        density_from_initial(InitialState(z0=1.0)),
        params,
        TimeGrid(t_final=10.0, dt=1e-3, record_stride=10),
    )
    err = float(np.abs(traj.z - np.cos(traj.times)).max())
    return CheckResult("rabi-oracle", err < 1e-6, f"max |z - cos t| = {err:.2e}")


def _check_gpe_agreement() -> CheckResult:
    params = ModelParams(c=2.5)
    init = InitialState(z0=0.6, theta0=1.0)
    grid = TimeGrid(t_final=10.0, dt=1e-3, record_stride=10)
    t_master = evolve(density_from_initial(init), params, grid)
    t_gpe = evolve_gpe(init, params, grid)
    err = float(np.abs(t_master.rho_rr - t_gpe.rho_rr).max())
    return CheckResult("gpe-master-agreement", err < 1e-8, f"max |drho_RR| = {err:.2e}")


def _check_conservation() -> list[CheckResult]:
    params = ModelParams(c=3.0)
    traj = evolve(
        density_from_initial(InitialState(z0=0.6)),
        params,
        TimeGrid(t_final=20.0, dt=1e-3, record_stride=20),
    )
    tr_err = float(np.abs(traj.rho_rr + traj.rho_ll - 1.0).max())
    pur_err = float(np.abs(traj.purity - 1.0).max())
    e = (
        (params.c / 4.0) * traj.z**2
        + (params.v / 2.0) * 2.0 * traj.re_rl
    )
    e_err = float(np.abs(e - e[0]).max())
    summary = window_summary(traj, 10.0, 20.0)
    return [
        CheckResult("trace-preserved", tr_err < 1e-10, f"max |tr-1| = {tr_err:.2e}"),
        CheckResult("purity-preserved-closed", pur_err < 1e-8, f"max |purity-1| = {pur_err:.2e}"),
        CheckResult("energy-preserved-closed", e_err < 1e-7, f"max |dE| = {e_err:.2e}"),
        CheckResult(
            "self-trapped-window", summary.min_z > 0.0, f"min z = {summary.min_z:.3f}"
        ),
    ]


def _check_rk4_order() -> CheckResult:
    params = ModelParams(c=3.0)
    rho0 = density_from_initial(InitialState(z0=0.6))

    def final_state(dt):
        traj = evolve(rho0, params, TimeGrid(t_final=10.0, dt=dt, record_stride=10**9))
        return traj.data[-1]

    ref = final_state(0.01 / 16.0)
    e1 = float(np.abs(final_state(0.01) - ref).max())
    e2 = float(np.abs(final_state(0.005) - ref).max())
    ratio = e1 / e2
    return CheckResult("rk4-order", 12.0 <= ratio <= 20.0, f"halving ratio = {ratio:.2f}")


def run_validation(seed: int = 20260810) -> list[CheckResult]:
    rng = np.random.default_rng(seed)
    results: list[CheckResult] = []
    results.extend(_check_trace_hermiticity(rng))
    results.append(_check_bloch_equivalence(rng))
    results.append(_check_bloch_roundtrip(rng))
    results.append(_check_energy_identity(rng))
    results.append(_check_hamiltonian_coherence_independence(rng))
    results.append(_check_sigma_x_fixed_point())
    results.append(_check_rabi())
    results.append(_check_gpe_agreement())
    results.extend(_check_conservation())
    results.append(_check_rk4_order())
    return results
