"""Qutrit plus truncated-Fock cavity model of the walk.

Levels are ordered (up, down, f).  A lattice site ``x`` on an ``M``-site
ring is the coherent state ``|beta exp(2 pi i x / M)>``; the spin-dependent
translation is free dispersive evolution ``exp(i phi a^dag a sigma_z)``
with ``phi = chi t / 2``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray
from scipy.special import gammaln

from .errors import PhysicsInvariantError, TruncationError
from .lattice import DOWN, UP, WalkConfig

F_LEVEL = 2
LEVELS = ("up", "down", "f")

DEFAULT_CHI = 2 * np.pi * 1.6125e6  # rad/s
DEFAULT_NMAX = 48
DEFAULT_BETA = np.sqrt(8.0)
ALT_BETA = 2.78  # smaller displacement used in some cavity runs

NORM_TOL = 1e-10
LEAKAGE_TOL = 1e-8
TRANSFER_SIGN = -1  # (i)^2 from the two transfer pulses


@dataclass(frozen=True)
class CavityState:
    """Amplitudes of shape ``(3, N_max + 1)`` indexed by (level, photon number)."""

    amplitudes: NDArray[np.complex128]
    beta_ref: complex = DEFAULT_BETA

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=np.complex128, copy=True)
        if amps.ndim != 2 or amps.shape[0] != 3:
            raise ValueError(f"amplitudes must have shape (3, N_max+1), got {amps.shape}")
        if amps.shape[1] < 3:
            raise ValueError("Fock truncation too small")
        norm = float(np.sum(np.abs(amps) ** 2))
        if abs(norm - 1.0) > NORM_TOL:
            raise PhysicsInvariantError(f"cavity state not normalized (norm^2 = {norm!r})")
        leak = self.leakage_of(amps)
        if leak > LEAKAGE_TOL:
            raise TruncationError(
                f"population {leak:.3g} in the top two Fock levels (N_max={amps.shape[1] - 1})"
            )
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "beta_ref", complex(self.beta_ref))

    @staticmethod
    def leakage_of(amps) -> float:
        return float(np.sum(np.abs(amps[:, -2:]) ** 2))

    @property
    def n_max(self) -> int:
        return self.amplitudes.shape[1] - 1

    @property
    def leakage(self) -> float:
        return self.leakage_of(self.amplitudes)

    def level_weights(self) -> NDArray[np.float64]:
        return np.sum(np.abs(self.amplitudes) ** 2, axis=1)

    def photon_distribution(self) -> NDArray[np.float64]:
        return np.sum(np.abs(self.amplitudes) ** 2, axis=0)

    def mean_photon_number(self) -> float:
        return float(self.photon_distribution() @ np.arange(self.n_max + 1))

    def overlap(self, other: "CavityState") -> complex:
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def cavity_vector(self, level: int = UP) -> NDArray[np.complex128]:
        """Unnormalized cavity wavefunction of one level."""
        return self.amplitudes[level].copy()

    def with_amplitudes(self, amps) -> "CavityState":
        return CavityState(amps, self.beta_ref)


def coherent_amplitudes(beta: complex, n_max: int) -> NDArray[np.complex128]:
    """Fock amplitudes of ``|beta>`` truncated at ``n_max`` (not renormalized)."""
    n = np.arange(n_max + 1)
    beta = complex(beta)
    if beta == 0:
        out = np.zeros(n_max + 1, dtype=np.complex128)
        out[0] = 1.0
        return out
    mag = np.exp(-abs(beta) ** 2 / 2 + n * np.log(abs(beta)) - 0.5 * gammaln(n + 1))
    return mag * np.exp(1j * n * np.angle(beta))


def coherent_state(
    beta: complex, n_max: int = DEFAULT_NMAX, level: int = UP, beta_ref: complex | None = None
) -> CavityState:
    """``|beta>`` on one qutrit level, renormalized after truncation."""
    amp = coherent_amplitudes(beta, n_max)
    amps = np.zeros((3, n_max + 1), dtype=np.complex128)
    amps[level] = amp / np.linalg.norm(amp)
    return CavityState(amps, beta if beta_ref is None else beta_ref)


def dispersive_evolve(
    state: CavityState, duration: float, chi: float = DEFAULT_CHI, phi_f: float = 0.0
) -> CavityState:
    """Free evolution under ``-chi a^dag a sigma_z / 2`` for ``duration`` seconds.

    ``(up, n)`` picks up ``exp(i phi n)`` and ``(down, n)`` ``exp(-i phi n)``
    with ``phi = chi * duration / 2``; the f level gets ``exp(i phi_f n)``.
    """
    phi = chi * duration / 2
    n = np.arange(state.n_max + 1)
    phases = np.stack([np.exp(1j * phi * n), np.exp(-1j * phi * n), np.exp(1j * phi_f * n)])
    return state.with_amplitudes(state.amplitudes * phases)


def translation_time(sites: int, chi: float = DEFAULT_CHI) -> float:
    """Duration giving a rotation of ``2 pi / sites`` per translation."""
    return 2 * (2 * np.pi / sites) / chi


def qubit_pulse(state: CavityState, theta: float, axis: str = "x") -> CavityState:
    """Ideal rotation ``exp(i theta sigma_axis / 2)`` on the up/down block.

    The f level is untouched.  A lattice-layer ``z_rotation(dk)`` equals a
    z pulse with ``theta = 2 dk``.
    """
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    if axis == "x":
        block = np.array([[c, 1j * s], [1j * s, c]])
    elif axis == "z":
        block = np.diag([c + 1j * s, c - 1j * s])
    else:
        raise ValueError(f"unsupported pulse axis {axis!r}")
    amps = state.amplitudes.copy()
    amps[:2] = block @ amps[:2]
    return state.with_amplitudes(amps)


def prepare_cat(beta: complex = DEFAULT_BETA, n_max: int = DEFAULT_NMAX) -> CavityState:
    """``(|beta, up> + |0, f>) / sqrt(2)``, built directly."""
    amps = np.zeros((3, n_max + 1), dtype=np.complex128)
    amp = coherent_amplitudes(beta, n_max)
    amps[UP] = amp / np.linalg.norm(amp) / np.sqrt(2)
    amps[F_LEVEL, 0] = 1 / np.sqrt(2)
    return CavityState(amps, beta)


def disentangle_f(state: CavityState, tol: float = 1e-6) -> CavityState:
    """Transfer ``|0, f> -> TRANSFER_SIGN |0, up>``.

    Modeled as the two resonant pi pulses f -> down -> up, each contributing
    a factor ``i``, so the vacuum amplitude changes sign.  Whatever sat in
    ``(up, 0)`` moves to ``(f, 0)``; for a cat of ``|beta|^2 = 8`` that
    residual weight is of order ``e^{-8}``.
    """
    stray = float(np.sum(np.abs(state.amplitudes[F_LEVEL, 1:]) ** 2))
    if stray > tol:
        raise PhysicsInvariantError(f"f level has weight {stray:.3g} outside vacuum")
    amps = state.amplitudes.copy()
    up0, f0 = amps[UP, 0], amps[F_LEVEL, 0]
    amps[UP, 0] = TRANSFER_SIGN * f0
    amps[F_LEVEL, 0] = -TRANSFER_SIGN * up0
    return state.with_amplitudes(amps)


def cavity_step(
    state: CavityState,
    theta1: float,
    theta2: float,
    shifts: tuple[float, float],
    duration: float,
    chi: float = DEFAULT_CHI,
    phi_f: float = 0.0,
) -> CavityState:
    """Pulse-level mirror of :func:`qwtopo.lattice.walk_step`."""
    first, second = shifts
    state = qubit_pulse(state, theta2, "x")
    state = qubit_pulse(state, 2 * first, "z")
    state = dispersive_evolve(state, duration, chi, phi_f)
    state = qubit_pulse(state, theta1, "x")
    state = qubit_pulse(state, 2 * second, "z")
    return dispersive_evolve(state, duration, chi, phi_f)


def run_cavity_walk(
    config: WalkConfig,
    initial: CavityState | None = None,
    chi: float = DEFAULT_CHI,
    phi_f: float = 0.0,
    n_max: int = DEFAULT_NMAX,
    beta: complex = DEFAULT_BETA,
) -> list[CavityState]:
    """Cavity trajectory of ``config.steps + 1`` states.

    Each translation lasts :func:`translation_time` so that one hop is
    ``2 pi / M`` in phase space.  ``initial`` defaults to ``|beta, up>``.
    """
    if initial is None:
        initial = coherent_state(beta, n_max)
    duration = translation_time(config.sites, chi)
    traj = [initial]
    for shifts in config.schedule:
        traj.append(
            cavity_step(traj[-1], config.theta1, config.theta2, shifts, duration, chi, phi_f)
        )
    return traj


def lattice_frame(beta: complex, sites: int, n_max: int) -> NDArray[np.complex128]:
    """Columns are the normalized truncated coherent states ``|beta e^{2 pi i x/M}>``."""
    cols = [coherent_amplitudes(beta * np.exp(2j * np.pi * x / sites), n_max) for x in range(sites)]
    frame = np.stack(cols, axis=1)
    return frame / np.linalg.norm(frame, axis=0)


def walker_to_cavity(amplitudes, beta: complex = DEFAULT_BETA, n_max: int = DEFAULT_NMAX):
    """Embed lattice amplitudes ``(2, M)`` as ``sum c_{x,s} |beta_x, s>``, renormalized."""
    amplitudes = np.asarray(amplitudes)
    frame = lattice_frame(beta, amplitudes.shape[1], n_max)
    amps = np.zeros((3, n_max + 1), dtype=np.complex128)
    amps[UP] = frame @ amplitudes[UP]
    amps[DOWN] = frame @ amplitudes[DOWN]
    amps /= np.linalg.norm(amps)
    return CavityState(amps, beta)
