"""Two-mode condensate model: state types and the master-equation right-hand side.

Basis and sign conventions used throughout the package
------------------------------------------------------
Basis order is (|R>, |L>), right well first.  The Pauli operators in this
basis are

    sigma_x = |R><L| + |L><R|
    sigma_y = -i|R><L| + i|L><R|
    sigma_z = |R><R| - |L><L|

The nonlinear mean-field Hamiltonian is

    H(rho) = [[ gamma/2 + (c/2)(rho_RR - rho_LL),  v/2 ],
              [ v/2, -gamma/2 - (c/2)(rho_RR - rho_LL) ]]

with gamma the energy bias between the wells, c the self-interaction and
v > 0 the inter-well coupling.  All rates are measured in units of v and
time in units of 1/v.

The master equation carries the imaginary unit on its left-hand side; this
module stores the real-time generator with the i moved across, i.e. the
standard Lindblad form

    drho/dt = -i[H(rho), rho] + (Gamma/2)(2 A rho A+ - A+A rho - rho A+A)

where A = scale * (lx sigma_x + ly sigma_y + lz sigma_z) and Gamma >= 0 is
the decoherence rate.  Note that the raising-type preset A = sigma_x +
i*sigma_y equals 2|R><L|, twice the conventional lowering operator; the
`scale` field of LindbladSpec recovers the conventional normalization
(scale=0.5) when wanted.

Bloch-vector convention: s_z = rho_RR - rho_LL, s_x = 2 Re rho_RL,
s_y = -2 Im rho_RL, so that rho = (I + s . sigma)/2.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

__all__ = [
    "ValidationError",
    "LindbladPreset",
    "LindbladSpec",
    "ModelParams",
    "DensityMatrix",
    "BlochVector",
    "InitialState",
    "SIGMA_X",
    "SIGMA_Y",
    "SIGMA_Z",
    "IDENTITY",
    "density_from_initial",
    "bloch_from_density",
    "density_from_bloch",
    "build_lindblad_operator",
    "build_hamiltonian",
    "dissipator",
    "rhs",
    "bloch_rhs",
    "mean_field_energy",
    "parse_complex",
    "format_complex",
]

# Double-precision slack for the type invariants (not paper-specified).
TRACE_TOL = 1e-12
HERMITICITY_TOL = 1e-12
POSITIVITY_TOL = 1e-9
BLOCH_NORM_TOL = 1e-9

SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
IDENTITY = np.eye(2, dtype=complex)
for _m in (SIGMA_X, SIGMA_Y, SIGMA_Z, IDENTITY):
    _m.setflags(write=False)


class ValidationError(ValueError):
    """Raised when a domain object or argument violates its invariants."""


class LindbladPreset(str, Enum):
    SIGMA_PLUS = "sigma_plus"
    SIGMA_X = "sigma_x"
    SIGMA_Z = "sigma_z"
    CUSTOM = "custom"


_PRESET_LAMBDAS = {
    LindbladPreset.SIGMA_PLUS: (1.0 + 0.0j, 1.0j, 0.0 + 0.0j),
    LindbladPreset.SIGMA_X: (1.0 + 0.0j, 0.0 + 0.0j, 0.0 + 0.0j),
    LindbladPreset.SIGMA_Z: (0.0 + 0.0j, 0.0 + 0.0j, 1.0 + 0.0j),
}


@dataclass(frozen=True)
class LindbladSpec:
    """Coefficients defining the condensate operator A = scale * (l . sigma)."""

    preset: LindbladPreset = LindbladPreset.SIGMA_PLUS
    lambdas: tuple[complex, complex, complex] = _PRESET_LAMBDAS[LindbladPreset.SIGMA_PLUS]
    scale: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "preset", LindbladPreset(self.preset))
        lams = tuple(complex(l) for l in self.lambdas)
        if len(lams) != 3:
            raise ValidationError("lambdas must be a triple (lx, ly, lz)")
        object.__setattr__(self, "lambdas", lams)
        if not (self.scale > 0.0 and math.isfinite(self.scale)):
            raise ValidationError(f"scale must be positive and finite, got {self.scale}")
        forced = _PRESET_LAMBDAS.get(self.preset)
        if forced is not None and lams != forced:
            raise ValidationError(
                f"preset {self.preset.value} forces lambdas {forced}, got {lams}"
            )

    @classmethod
    def sigma_plus(cls, scale: float = 1.0) -> "LindbladSpec":
        return cls(LindbladPreset.SIGMA_PLUS, _PRESET_LAMBDAS[LindbladPreset.SIGMA_PLUS], scale)

    @classmethod
    def sigma_x(cls, scale: float = 1.0) -> "LindbladSpec":
        return cls(LindbladPreset.SIGMA_X, _PRESET_LAMBDAS[LindbladPreset.SIGMA_X], scale)

    @classmethod
    def sigma_z(cls, scale: float = 1.0) -> "LindbladSpec":
        return cls(LindbladPreset.SIGMA_Z, _PRESET_LAMBDAS[LindbladPreset.SIGMA_Z], scale)

    @classmethod
    def custom(cls, lambdas, scale: float = 1.0) -> "LindbladSpec":
        return cls(LindbladPreset.CUSTOM, tuple(complex(l) for l in lambdas), scale)


@dataclass(frozen=True)
class ModelParams:
    """Physical parameters of the master equation, all in units of v."""

    gamma: float = 0.0          # energy bias between the wells
    c: float = 0.0              # nonlinear self-interaction
    v: float = 1.0              # inter-well coupling (reference frequency)
    decoherence_rate: float = 0.0
    lindblad: LindbladSpec = field(default_factory=LindbladSpec.sigma_plus)

    def __post_init__(self):
        for name in ("gamma", "c", "v", "decoherence_rate"):
            val = getattr(self, name)
            if not math.isfinite(val):
                raise ValidationError(f"{name} must be finite, got {val}")
        if not self.v > 0.0:
            raise ValidationError(f"v must be positive, got {self.v}")
        if self.decoherence_rate < 0.0:
            raise ValidationError(
                f"decoherence_rate must be >= 0, got {self.decoherence_rate}"
            )
        if self.decoherence_rate > 0.0 and all(l == 0 for l in self.lindblad.lambdas):
            raise ValidationError(
                "decoherence_rate > 0 requires at least one nonzero lambda"
            )


@dataclass(frozen=True)
class BlochVector:
    """Real (sx, sy, sz) parametrization of a unit-trace 2x2 density matrix."""

    sx: float
    sy: float
    sz: float

    def __post_init__(self):
        n2 = self.sx * self.sx + self.sy * self.sy + self.sz * self.sz
        if not n2 <= 1.0 + BLOCH_NORM_TOL:
            raise ValidationError(f"Bloch vector norm^2 = {n2} exceeds 1")

    def as_array(self) -> np.ndarray:
        return np.array([self.sx, self.sy, self.sz])


@dataclass(frozen=True)
class DensityMatrix:
    """2x2 Hermitian unit-trace state of the two-mode condensate.

    Entries are indexed in the (|R>, |L>) basis: rr = <R|rho|R>, rl = <R|rho|L>.
    """

    rr: complex
    rl: complex
    lr: complex
    ll: complex

    def __post_init__(self):
        rr, rl, lr, ll = (complex(x) for x in (self.rr, self.rl, self.lr, self.ll))
        object.__setattr__(self, "rr", rr)
        object.__setattr__(self, "rl", rl)
        object.__setattr__(self, "lr", lr)
        object.__setattr__(self, "ll", ll)
        if abs((rr + ll) - 1.0) > TRACE_TOL:
            raise ValidationError(f"trace {rr + ll} differs from 1 by more than {TRACE_TOL}")
        if abs(rr.imag) > HERMITICITY_TOL or abs(ll.imag) > HERMITICITY_TOL:
            raise ValidationError("diagonal entries must be real")
        if abs(lr - rl.conjugate()) > HERMITICITY_TOL:
            raise ValidationError("lr must equal conjugate(rl)")
        # eigenvalues of a Hermitian 2x2 with trace t: (t +/- disc)/2
        disc = math.sqrt((rr.real - ll.real) ** 2 + 4.0 * abs(rl) ** 2)
        if (rr.real + ll.real - disc) / 2.0 < -POSITIVITY_TOL:
            raise ValidationError("state has an eigenvalue below the positivity tolerance")

    @classmethod
    def from_matrix(cls, m: np.ndarray) -> "DensityMatrix":
        m = np.asarray(m, dtype=complex)
        if m.shape != (2, 2):
            raise ValidationError(f"expected a 2x2 matrix, got shape {m.shape}")
        return cls(m[0, 0], m[0, 1], m[1, 0], m[1, 1])

    @classmethod
    def maximally_mixed(cls) -> "DensityMatrix":
        return cls(0.5, 0.0, 0.0, 0.5)

    def matrix(self) -> np.ndarray:
        return np.array([[self.rr, self.rl], [self.lr, self.ll]], dtype=complex)

    @property
    def z(self) -> float:
        return self.rr.real - self.ll.real

    @property
    def coherence(self) -> float:
        return abs(self.rl)

    def purity(self) -> float:
        return (
            self.rr.real**2 + self.ll.real**2 + 2.0 * (self.rl.real**2 + self.rl.imag**2)
        )


@dataclass(frozen=True)
class InitialState:
    """Initial pure state a_R|R> + a_L|L> given by imbalance z0 and phase theta0.

    theta0 is the phase of a_L relative to a_R.
    """

    z0: float
    theta0: float = 0.0

    def __post_init__(self):
        if not -1.0 <= self.z0 <= 1.0:
            raise ValidationError(f"z0 must lie in [-1, 1], got {self.z0}")
        if not 0.0 <= self.theta0 < 2.0 * math.pi:
            raise ValidationError(f"theta0 must lie in [0, 2*pi), got {self.theta0}")

    def amplitudes(self) -> tuple[complex, complex]:
        a_r = math.sqrt((1.0 + self.z0) / 2.0)
        a_l = math.sqrt((1.0 - self.z0) / 2.0) * cmath.exp(1j * self.theta0)
        return complex(a_r), a_l


def density_from_initial(init: InitialState) -> DensityMatrix:
    """Pure-state projector rho = |phi><phi| of the two-mode expansion."""
    a_r, a_l = init.amplitudes()
    rl = a_r * a_l.conjugate()
    return DensityMatrix(abs(a_r) ** 2, rl, rl.conjugate(), abs(a_l) ** 2)


def bloch_from_density(rho: DensityMatrix) -> BlochVector:
    return BlochVector(2.0 * rho.rl.real, -2.0 * rho.rl.imag, rho.rr.real - rho.ll.real)


def density_from_bloch(s: BlochVector) -> DensityMatrix:
    rl = (s.sx - 1j * s.sy) / 2.0
    return DensityMatrix((1.0 + s.sz) / 2.0, rl, rl.conjugate(), (1.0 - s.sz) / 2.0)


def build_lindblad_operator(spec: LindbladSpec) -> np.ndarray:
    """A = scale * (lx sigma_x + ly sigma_y + lz sigma_z) in the (|R>, |L>) basis."""
    lx, ly, lz = spec.lambdas
    return spec.scale * (lx * SIGMA_X + ly * SIGMA_Y + lz * SIGMA_Z)


def build_hamiltonian(rho: DensityMatrix, params: ModelParams) -> np.ndarray:
    """Nonlinear mean-field Hamiltonian; depends on rho only through rho_RR - rho_LL."""
    h = params.gamma / 2.0 + (params.c / 2.0) * (rho.rr.real - rho.ll.real)
    return np.array([[h, params.v / 2.0], [params.v / 2.0, -h]], dtype=complex)


def _dissipator_matrix(rho_m: np.ndarray, a_op: np.ndarray, gamma_rate: float) -> np.ndarray:
    """Lindblad dissipator on a raw 2x2 matrix (linear in rho_m)."""
    ad = a_op.conj().T
    ada = ad @ a_op
    return (gamma_rate / 2.0) * (
        2.0 * (a_op @ rho_m @ ad) - ada @ rho_m - rho_m @ ada
    )


def dissipator(rho: DensityMatrix, a_op: np.ndarray, gamma_rate: float) -> np.ndarray:
    """(Gamma/2)(2 A rho A+ - A+A rho - rho A+A); traceless, Hermiticity-preserving."""
    if gamma_rate < 0.0:
        raise ValidationError(f"decoherence rate must be >= 0, got {gamma_rate}")
    return _dissipator_matrix(rho.matrix(), np.asarray(a_op, dtype=complex), gamma_rate)


def rhs(rho: DensityMatrix, params: ModelParams) -> np.ndarray:
    """Generator of the master equation: drho/dt = -i[H(rho), rho] + dissipator."""
    h = build_hamiltonian(rho, params)
    m = rho.matrix()
    out = -1j * (h @ m - m @ h)
    if params.decoherence_rate > 0.0:
        a_op = build_lindblad_operator(params.lindblad)
        out = out + _dissipator_matrix(m, a_op, params.decoherence_rate)
    return out


def bloch_rhs(s: BlochVector, params: ModelParams) -> np.ndarray:
    """Closed-form Bloch reformulation of `rhs`, ds/dt for s = (sx, sy, sz).

    Hamiltonian part: ds/dt = b x s with b = (v, 0, gamma + c*sz).
    Dissipative part for A = n . sigma (n = scale*lambdas, p = Re n, q = Im n):

        ds/dt = 2*Gamma*( 2 p x q + Re[(conj(n) . s) n] - |n|^2 s )

    Kept independent of the matrix route so the two can cross-check each other.
    """
    sv = s.as_array()
    bz = params.gamma + params.c * s.sz
    ds = np.array(
        [-bz * s.sy, bz * s.sx - params.v * s.sz, params.v * s.sy]
    )
    g = params.decoherence_rate
    if g > 0.0:
        n = params.lindblad.scale * np.asarray(params.lindblad.lambdas, dtype=complex)
        p, q = n.real, n.imag
        n_dot_s = np.vdot(n, sv)  # conj(n) . s
        ds = ds + 2.0 * g * (
            2.0 * np.cross(p, q) + (n_dot_s * n).real - (np.abs(n) ** 2).sum() * sv
        )
    return ds


def mean_field_energy(s: BlochVector, params: ModelParams) -> float:
    """E = (c/4) sz^2 + (v/2) sx + (gamma/2) sz, conserved by the closed flow."""
    return (
        (params.c / 4.0) * s.sz**2
        + (params.v / 2.0) * s.sx
        + (params.gamma / 2.0) * s.sz
    )


def parse_complex(text: str) -> complex:
    """Parse the 'a+bi' literal grammar used for lambda entries ('1', 'i', '-0.5-0.3i')."""
    cleaned = text.strip().replace(" ", "")
    if not cleaned:
        raise ValidationError("empty complex literal")
    try:
        return complex(cleaned.replace("i", "j"))
    except ValueError:
        raise ValidationError(f"invalid complex literal: {text!r}") from None


def format_complex(value: complex) -> str:
    """Inverse of parse_complex, emitting the 'a+bi' grammar."""
    value = complex(value)
    if value.imag == 0.0:
        return repr(value.real)
    if value.real == 0.0:
        return f"{value.imag!r}i"
    sign = "+" if value.imag >= 0 else "-"
    return f"{value.real!r}{sign}{abs(value.imag)!r}i"
