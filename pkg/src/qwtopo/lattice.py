"""State-vector engine for the split-step quantum walk on a ring.

The walker lives on ``spin (2) x site (M)``; amplitudes are stored as a
``(2, M)`` complex array with row 0 = spin up, row 1 = spin down.

One step of the walk is ``U(theta1, theta2) = T R(theta1) T R(theta2)``:
the coin ``R(theta2)`` acts first, then a translation, then ``R(theta1)``
and a second translation.  ``R(theta) = exp(i theta sigma_x / 2)`` and the
translation moves spin up by +1 site and spin down by -1 site.  A digital
Bloch oscillation inserts ``exp(i dk sigma_z)`` after each coin.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray

from .bands import kspace_eigensystem

UP, DOWN = 0, 1

_NORM_TOL = 1e-10


def _frozen(arr: NDArray) -> NDArray:
    arr = np.array(arr, dtype=np.complex128, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class WalkerState:
    """Normalized walker amplitudes, shape ``(2, M)``."""

    amplitudes: NDArray[np.complex128]

    def __post_init__(self):
        amps = np.asarray(self.amplitudes)
        if amps.ndim != 2 or amps.shape[0] != 2:
            raise ValueError(f"amplitudes must have shape (2, M), got {amps.shape}")
        if amps.shape[1] < 2:
            raise ValueError("lattice needs at least 2 sites")
        norm = float(np.sum(np.abs(amps) ** 2))
        if abs(norm - 1.0) > _NORM_TOL:
            raise ValueError(f"state not normalized (norm^2 = {norm!r})")
        object.__setattr__(self, "amplitudes", _frozen(amps))

    @classmethod
    def localized(cls, sites: int, x: int = 0, spin: int = UP) -> "WalkerState":
        amps = np.zeros((2, sites), dtype=np.complex128)
        amps[spin, x % sites] = 1.0
        return cls(amps)

    @classmethod
    def from_vector(cls, vec) -> "WalkerState":
        """Build from a flat vector ordered ``(spin, x)`` (spin-major)."""
        vec = np.asarray(vec, dtype=np.complex128)
        return cls(vec.reshape(2, -1))

    @property
    def sites(self) -> int:
        return self.amplitudes.shape[1]

    @property
    def vector(self) -> NDArray[np.complex128]:
        return self.amplitudes.reshape(-1)

    def populations(self) -> NDArray[np.float64]:
        return np.abs(self.amplitudes) ** 2

    def overlap(self, other: "WalkerState") -> complex:
        """``<self|other>``."""
        if other.sites != self.sites:
            raise ValueError(f"lattice size mismatch: {self.sites} vs {other.sites}")
        return complex(np.vdot(self.amplitudes, other.amplitudes))


def coin_rotation(state: WalkerState, theta: float) -> WalkerState:
    """Apply ``exp(i theta sigma_x / 2)`` to the spin at every site."""
    c, s = np.cos(theta / 2), 1j * np.sin(theta / 2)
    up, down = state.amplitudes
    return WalkerState(np.stack([c * up + s * down, s * up + c * down]))


def z_rotation(state: WalkerState, dk: float) -> WalkerState:
    """Apply ``exp(i dk sigma_z)``: up gets ``e^{i dk}``, down ``e^{-i dk}``."""
    phases = np.array([[np.exp(1j * dk)], [np.exp(-1j * dk)]])
    return WalkerState(state.amplitudes * phases)


def spin_translate(state: WalkerState) -> WalkerState:
    """Move spin up x -> x+1 and spin down x -> x-1 (periodic)."""
    up, down = state.amplitudes
    return WalkerState(np.stack([np.roll(up, 1), np.roll(down, -1)]))


def walk_step(
    state: WalkerState,
    theta1: float,
    theta2: float,
    shifts: tuple[float, float] = (0.0, 0.0),
) -> WalkerState:
    """One step ``T Z(s2) R(theta1) T Z(s1) R(theta2)``.

    ``shifts`` are the Bloch z-rotation angles of the first and second
    half-step, in time order.
    """
    first, second = shifts
    state = spin_translate(z_rotation(coin_rotation(state, theta2), first))
    return spin_translate(z_rotation(coin_rotation(state, theta1), second))


class BlochMode(str, enum.Enum):
    OFF = "off"
    CONSTANT = "constant"
    STAGGERED = "staggered"


def bloch_schedule(
    steps: int, mode: BlochMode | str, dk_total: float = np.pi
) -> list[tuple[float, float]]:
    """Per-step ``(first, second)`` z-rotation angles.

    ``constant`` uses ``n dk`` for both half-steps, ``staggered`` uses
    ``n dk`` then ``(n + 1/2) dk``, with ``dk = dk_total / steps``.
    """
    mode = BlochMode(mode)
    if mode is BlochMode.OFF or steps == 0:
        return [(0.0, 0.0)] * steps
    dk = dk_total / steps
    if mode is BlochMode.CONSTANT:
        return [(n * dk, n * dk) for n in range(steps)]
    return [(n * dk, (n + 0.5) * dk) for n in range(steps)]


@dataclass(frozen=True)
class WalkConfig:
    theta1: float
    theta2: float
    sites: int
    steps: int
    bloch: BlochMode = BlochMode.OFF
    dk_total: float = np.pi
    schedule: tuple[tuple[float, float], ...] = field(init=False, repr=False)

    def __post_init__(self):
        if self.sites < 2:
            raise ValueError(f"need at least 2 sites, got {self.sites}")
        if self.steps < 0:
            raise ValueError(f"step count must be non-negative, got {self.steps}")
        object.__setattr__(self, "bloch", BlochMode(self.bloch))
        sched = bloch_schedule(self.steps, self.bloch, self.dk_total)
        object.__setattr__(self, "schedule", tuple(sched))


def run_walk(config: WalkConfig, initial: WalkerState | None = None) -> list[WalkerState]:
    """Trajectory of ``config.steps + 1`` states starting from ``initial``.

    ``initial`` defaults to spin up on site 0.
    """
    if initial is None:
        initial = WalkerState.localized(config.sites)
    if initial.sites != config.sites:
        raise ValueError(f"initial state has {initial.sites} sites, config {config.sites}")
    traj = [initial]
    for shifts in config.schedule:
        traj.append(walk_step(traj[-1], config.theta1, config.theta2, shifts))
    return traj


def refocusing_overlap(initial: WalkerState, final: WalkerState) -> complex:
    return initial.overlap(final)


def refocusing_fidelity(initial: WalkerState, final: WalkerState) -> float:
    """``|<initial|final>|^2``."""
    return abs(refocusing_overlap(initial, final)) ** 2


# -- quasimomentum picture ---------------------------------------------------
#
# Plane waves are |k> = sum_x e^{-ikx}|x>/sqrt(M) so that the translation acts
# as exp(+ik sigma_z), matching kspace_unitary.


def allowed_momenta(sites: int) -> NDArray[np.float64]:
    return 2 * np.pi * np.arange(sites) / sites


@dataclass(frozen=True)
class BandDecomposition:
    k: NDArray[np.float64]
    upper: NDArray[np.complex128]
    lower: NDArray[np.complex128]
    upper_states: NDArray[np.complex128]  # (M, 2) spinors
    lower_states: NDArray[np.complex128]

    def weights(self) -> NDArray[np.float64]:
        """Per-k total weight ``|alpha_k|^2 + |beta_k|^2``."""
        return np.abs(self.upper) ** 2 + np.abs(self.lower) ** 2


def band_decompose(
    state: WalkerState, theta1: float, theta2: float, gap_tol: float = 1e-9
) -> BandDecomposition:
    """Expand ``state`` in the band eigenbasis ``|k, +-n(k)>``.

    Raises :class:`~qwtopo.errors.GapClosedError` if any allowed k sits at a
    gap closing, where the eigenbasis is ill-defined.
    """
    sites = state.sites
    k = allowed_momenta(sites)
    phases = np.exp(1j * np.outer(k, np.arange(sites))) / np.sqrt(sites)
    spinors = phases @ state.amplitudes.T  # (M, 2): psi(k) per spin
    _, upper_vec, lower_vec = kspace_eigensystem(k, theta1, theta2, gap_tol=gap_tol)
    alpha = np.einsum("ks,ks->k", upper_vec.conj(), spinors)
    beta = np.einsum("ks,ks->k", lower_vec.conj(), spinors)
    return BandDecomposition(k, alpha, beta, upper_vec, lower_vec)


def reconstruct(dec: BandDecomposition) -> WalkerState:
    sites = len(dec.k)
    spinors = dec.upper[:, None] * dec.upper_states + dec.lower[:, None] * dec.lower_states
    phases = np.exp(-1j * np.outer(np.arange(sites), dec.k)) / np.sqrt(sites)
    return WalkerState((phases @ spinors).T)
