"""Observables and detectors: window statistics, self-trapping, critical jump.

The long-time population reading uses a window mean rather than the endpoint
value, which would alias the oscillation phase.  The jump detector works on
finite differences of a (c, mean z) curve; no functional form is fitted.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .integrate import Trajectory
from .model import ValidationError

__all__ = [
    "WindowSummary",
    "CriticalReport",
    "DEFAULT_SHARPNESS_FLOOR",
    "window_summary",
    "detect_critical_c",
    "jump_sharpness_vs_gamma",
    "self_trapping_indicator",
    "coherence_series",
]

# Below this |d mean_z / dc| no jump is declared (slope units 1/v per unit c);
# calibrated so the heavily smoothed strong-decoherence curves report none.
DEFAULT_SHARPNESS_FLOOR = 2.0


@dataclass(frozen=True)
class WindowSummary:
    t_start: float
    t_end: float
    mean_z: float
    min_z: float
    max_z: float
    mean_coherence: float


@dataclass(frozen=True)
class CriticalReport:
    c_star: float | None
    sharpness: float
    resolution: float


def _window_mask(traj: Trajectory, t_start: float, t_end: float) -> np.ndarray:
    if not t_start < t_end:
        raise ValidationError(f"window must satisfy t_start < t_end, got ({t_start}, {t_end})")
    if len(traj) == 0:
        raise ValidationError("empty trajectory")
    slack = 1e-12 * max(1.0, abs(traj.times[-1]))
    if t_start < traj.times[0] - slack or t_end > traj.times[-1] + slack:
        raise ValidationError(
            f"window ({t_start}, {t_end}) outside trajectory span "
            f"[{traj.times[0]}, {traj.times[-1]}]"
        )
    mask = traj.window_mask(t_start, t_end)
    if not mask.any():
        raise ValidationError(f"no samples inside window ({t_start}, {t_end})")
    return mask


def window_summary(traj: Trajectory, t_start: float, t_end: float) -> WindowSummary:
    """Arithmetic means and extrema of the observables over [t_start, t_end]."""
    mask = _window_mask(traj, t_start, t_end)
    z = traj.z[mask]
    return WindowSummary(
        t_start=t_start,
        t_end=t_end,
        mean_z=float(z.mean()),
        min_z=float(z.min()),
        max_z=float(z.max()),
        mean_coherence=float(traj.coherence[mask].mean()),
    )


def detect_critical_c(
    final_z_vs_c: Sequence[tuple[float, float]],
    sharpness_floor: float = DEFAULT_SHARPNESS_FLOOR,
) -> CriticalReport:
    """Locate the steepest change of mean z along the c axis.

    c_star is the midpoint of the adjacent pair maximizing |d mean_z / dc|;
    it is reported as None when that maximum falls below sharpness_floor.
    """
    pts = list(final_z_vs_c)
    if len(pts) < 3:
        raise ValidationError(f"need at least 3 points, got {len(pts)}")
    c = np.array([p[0] for p in pts], dtype=float)
    mz = np.array([p[1] for p in pts], dtype=float)
    dc = np.diff(c)
    if np.any(dc <= 0.0):
        raise ValidationError("c values must be strictly increasing")
    slopes = np.abs(np.diff(mz) / dc)
    k = int(np.argmax(slopes))
    sharpness = float(slopes[k])
    c_star = float((c[k] + c[k + 1]) / 2.0) if sharpness >= sharpness_floor else None
    return CriticalReport(c_star=c_star, sharpness=sharpness, resolution=float(dc.mean()))


def jump_sharpness_vs_gamma(
    sweeps: Mapping[float, Sequence[tuple[float, float]]],
) -> list[tuple[float, float]]:
    """Jump sharpness per decoherence rate, ordered by increasing rate."""
    out = []
    for gamma_rate in sorted(sweeps):
        report = detect_critical_c(sweeps[gamma_rate], sharpness_floor=0.0)
        out.append((gamma_rate, report.sharpness))
    return out


def self_trapping_indicator(traj: Trajectory, window: tuple[float, float]) -> bool:
    """True iff the population imbalance keeps the sign of its initial value
    throughout the window (strictly; a start at z=0 is never trapped)."""
    mask = _window_mask(traj, window[0], window[1])
    z0 = traj.z[0]
    if z0 > 0.0:
        return bool(traj.z[mask].min() > 0.0)
    if z0 < 0.0:
        return bool(traj.z[mask].max() < 0.0)
    return False


def coherence_series(traj: Trajectory) -> np.ndarray:
    """(n, 2) array of (t, |rho_RL|) samples."""
    return np.column_stack([traj.times, traj.coherence])
