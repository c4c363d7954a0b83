"""Band structure and topology of the split-step walk.

In quasimomentum space one step is the 2x2 unitary

    U(k) = exp(i(k+dk) sz) R(theta1) exp(i(k+dk) sz) R(theta2),

with ``R(theta) = exp(i theta sx / 2)``.  ``U(k)`` has period pi in ``k``
(one step hops two sites), so the Brillouin zone is ``[0, pi)``.  Writing
``U = exp(-i H)`` with ``H = eps n.sigma`` defines the quasienergy
``eps in [0, pi]`` and the Bloch vector ``n``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from numpy.typing import NDArray

from .errors import ChiralSymmetryError, GapClosedError, PhysicsInvariantError, SamplingError

SX = np.array([[0, 1], [1, 0]], dtype=np.complex128)
SY = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
SZ = np.array([[1, 0], [0, -1]], dtype=np.complex128)
PAULI = np.stack([SX, SY, SZ])

BZ_PERIOD = np.pi


def coin(theta: float) -> NDArray[np.complex128]:
    return np.cos(theta / 2) * np.eye(2) + 1j * np.sin(theta / 2) * SX


def kspace_unitary(k, theta1: float, theta2: float, dk: float = 0.0) -> NDArray[np.complex128]:
    """One-step unitary at quasimomentum ``k`` (scalar or array).

    Returns shape ``(2, 2)`` for scalar ``k`` and ``(..., 2, 2)`` otherwise.
    """
    k = np.asarray(k, dtype=np.float64)
    ph = np.exp(1j * (k + dk))
    # exp(i q sz) is diagonal; build the product in closed matrix form
    z = np.zeros(k.shape + (2, 2), dtype=np.complex128)
    z[..., 0, 0] = ph
    z[..., 1, 1] = ph.conj()
    return z @ coin(theta1) @ z @ coin(theta2)


def _gauge_fix(vecs: NDArray[np.complex128]) -> NDArray[np.complex128]:
    # first component real non-negative; fall back to the second when it vanishes
    ref = np.where(np.abs(vecs[..., 0]) > 1e-8, vecs[..., 0], vecs[..., 1])
    return vecs * (np.abs(ref) / ref)[..., None]


def kspace_eigensystem(k, theta1: float, theta2: float, dk: float = 0.0, gap_tol: float = 1e-9):
    """Quasienergies and band spinors for an array of momenta.

    Returns ``(eps, upper, lower)`` with ``upper[i]`` the eigenvector of
    ``U(k_i)`` with eigenvalue ``exp(-i eps_i)``.  Spinors are orthonormal
    and in a smooth-in-k gauge (first component real and non-negative).
    """
    k = np.atleast_1d(np.asarray(k, dtype=np.float64))
    u = kspace_unitary(k, theta1, theta2, dk)
    # U is normal; its anti-Hermitian part shares the eigenvectors and is
    # Hermitian-diagonalizable, which keeps the spinors orthonormal.
    herm = (u - np.conj(np.swapaxes(u, -1, -2))) / 2j
    _, vecs = np.linalg.eigh(herm)
    vals = np.einsum("kij,kjl,kli->ki", np.conj(np.swapaxes(vecs, -1, -2)), u, vecs)
    phases = np.angle(vals)  # in (-pi, pi]
    sin_eps = np.abs(np.sin(phases[:, 0]))
    if np.any(sin_eps < gap_tol):
        bad = k[np.argmin(sin_eps)]
        raise GapClosedError(f"quasienergy gap closes at k={bad:.6g} (|sin eps| < {gap_tol})")
    upper_idx = np.argmin(phases, axis=1)  # eigenvalue exp(-i eps)
    rows = np.arange(len(k))
    upper = vecs[rows, :, upper_idx]
    lower = vecs[rows, :, 1 - upper_idx]
    eps = -phases[rows, upper_idx]
    return eps, _gauge_fix(upper), _gauge_fix(lower)


@dataclass(frozen=True)
class BandPoint:
    k: float
    energy: float
    n: NDArray[np.float64]
    upper: NDArray[np.complex128]
    lower: NDArray[np.complex128]

    def hamiltonian(self) -> NDArray[np.complex128]:
        return self.energy * np.einsum("i,ijk->jk", self.n, PAULI)


def effective_hamiltonian(k: float, theta1: float, theta2: float, dk: float = 0.0) -> BandPoint:
    """Matrix-log band data ``H = i log U = eps n.sigma`` at one momentum.

    The identity component of ``H`` must vanish; anything above 1e-10 is
    treated as a broken invariant.
    """
    eps, upper, lower = kspace_eigensystem([k], theta1, theta2, dk)
    proj = np.outer(upper[0], upper[0].conj()) - np.outer(lower[0], lower[0].conj())
    n = np.real(np.einsum("ijk,kj->i", PAULI, proj)) / 2
    u = kspace_unitary(k, theta1, theta2, dk)
    offset = np.angle(np.linalg.det(u)) / 2
    if abs(offset) > 1e-10:
        raise PhysicsInvariantError(f"identity component {offset:.3g} in effective Hamiltonian")
    return BandPoint(float(k), float(eps[0]), n, upper[0], lower[0])


def bloch_vectors(k, theta1: float, theta2: float, gap_tol: float = 1e-9):
    """Vectorized ``(eps, n)`` over an array of momenta."""
    eps, upper, lower = kspace_eigensystem(k, theta1, theta2, gap_tol=gap_tol)
    # n.sigma = P_upper - P_lower  =>  n_i = <u|s_i|u> - <l|s_i|l> over 2
    n = (
        np.real(np.einsum("ka,iab,kb->ki", upper.conj(), PAULI, upper))
        - np.real(np.einsum("ka,iab,kb->ki", lower.conj(), PAULI, lower))
    ) / 2
    return eps, n


def closed_form_energy(k, theta1: float, theta2: float):
    """Quasienergy from ``cos eps = Tr U / 2``.

    ``cos eps = cos 2k cos(theta1/2) cos(theta2/2) - sin(theta1/2) sin(theta2/2)``
    """
    c = np.cos(2 * np.asarray(k)) * np.cos(theta1 / 2) * np.cos(theta2 / 2) - np.sin(
        theta1 / 2
    ) * np.sin(theta2 / 2)
    return np.arccos(np.clip(c, -1.0, 1.0))


def variant_energy(k, theta1: float, theta2: float):
    """Alternative closed form with ``+ sin sin``; equals ``pi - eps(k + pi/2)``.

    Kept only so the discrepancy can be tested.
    """
    c = np.cos(2 * np.asarray(k)) * np.cos(theta2 / 2) * np.cos(theta1 / 2) + np.sin(
        theta2 / 2
    ) * np.sin(theta1 / 2)
    return np.arccos(np.clip(c, -1.0, 1.0))


def variant_bloch_vector(k, theta1: float, theta2: float):
    """Alternative component formulas for ``n(k)`` (note n_y and n_z coincide)."""
    k = np.asarray(k)
    eps = variant_energy(k, theta1, theta2)
    s = np.sin(eps)
    c1, s1 = np.cos(theta1 / 2), np.sin(theta1 / 2)
    c2, s2 = np.cos(theta2 / 2), np.sin(theta2 / 2)
    nx = (np.cos(2 * k) * c2 * s1 + s2 * c1) / s
    ny = -(np.sin(2 * k) * c2 * s1) / s
    nz = -(np.sin(2 * k) * c2 * s1) / s
    return np.stack([nx, ny, nz], axis=-1)


def bz_grid(samples: int) -> NDArray[np.float64]:
    return np.arange(samples) * BZ_PERIOD / samples


def band_gaps(theta1: float, theta2: float, samples: int = 1024) -> tuple[float, float]:
    """Minimum distance of ``eps`` to 0 and to pi over the zone."""
    eps = closed_form_energy(bz_grid(samples), theta1, theta2)
    return float(eps.min()), float(np.pi - eps.max())


def _parallel(a, b, tol=1e-6) -> bool:
    return np.linalg.norm(np.cross(a, b)) < tol


@dataclass(frozen=True)
class ChiralAxis:
    vector: NDArray[np.float64]
    planarity: float  # max_k |A . n(k)|
    matches: dict[str, bool] = field(default_factory=dict)


def candidate_axes(theta: float) -> dict[str, NDArray[np.float64]]:
    return {
        "yz": np.array([0.0, -np.cos(theta / 2), np.sin(theta / 2)]),
        "xz": np.array([np.cos(theta / 2), 0.0, np.sin(theta / 2)]),
    }


def chiral_axis(theta1: float, theta2: float, samples: int = 64, tol: float = 1e-9) -> ChiralAxis:
    """Unit vector orthogonal to every ``n(k)``, found as a null vector.

    The sign is fixed so the largest component is positive.  ``matches``
    records whether each candidate closed form (evaluated at ``theta1`` and at
    ``theta2``) is parallel to the numerical axis.
    """
    if samples < 16:
        raise ValueError("need at least 16 k-samples")
    _, n = bloch_vectors(bz_grid(samples), theta1, theta2)
    _, sv, vt = np.linalg.svd(n)
    if sv[1] < 1e-6:
        raise ChiralSymmetryError("n(k) spans fewer than two directions")
    axis = vt[-1]
    axis = axis * np.sign(axis[np.argmax(np.abs(axis))])
    planarity = float(np.max(np.abs(n @ axis)))
    if planarity > tol:
        raise ChiralSymmetryError(f"n(k) not planar: max |A.n| = {planarity:.3g}")
    matches = {}
    for label, theta in (("theta1", theta1), ("theta2", theta2)):
        for form, vec in candidate_axes(theta).items():
            matches[f"{form}({label})"] = bool(_parallel(axis, vec))
    return ChiralAxis(axis, planarity, matches)


def _plane_basis(axis):
    trial = np.eye(3)[np.argmin(np.abs(axis))]
    e1 = np.cross(axis, trial)
    e1 /= np.linalg.norm(e1)
    return e1, np.cross(axis, e1)


def winding_angle(theta1: float, theta2: float, samples: int = 256) -> float:
    """Total angle (in turns) swept by ``n(k)`` about the chiral axis."""
    if samples < 64:
        raise ValueError("winding needs at least 64 k-samples")
    ks = bz_grid(samples)
    eps, n = bloch_vectors(ks, theta1, theta2, gap_tol=1e-6)
    axis = chiral_axis(theta1, theta2, samples=max(16, samples // 4)).vector
    e1, e2 = _plane_basis(axis)
    ang = np.arctan2(n @ e2, n @ e1)
    steps = np.diff(np.append(ang, ang[0]))
    steps = (steps + np.pi) % (2 * np.pi) - np.pi
    return float(steps.sum() / (2 * np.pi))


def winding_number(theta1: float, theta2: float, samples: int = 256) -> int:
    """Integer winding of ``n(k)`` in the plane perpendicular to the chiral axis.

    Right-handed about ``+A`` as ``k`` increases; only ``|W|`` is
    convention-free.
    """
    turns = winding_angle(theta1, theta2, samples)
    w = round(turns)
    if abs(turns - w) >= 0.01:
        raise SamplingError(f"winding residual {abs(turns - w):.3g} with {samples} samples")
    return int(w)


def berry_phase(theta1: float, theta2: float, band: int = +1, samples: int = 256) -> float:
    """Discrete Wilson-loop Berry phase of one band, wrapped to (-pi, pi]."""
    ks = bz_grid(samples)
    _, upper, lower = kspace_eigensystem(ks, theta1, theta2, gap_tol=1e-6)
    u = upper if band > 0 else lower
    links = np.einsum("ka,ka->k", u.conj(), np.roll(u, -1, axis=0))
    phase = -np.angle(np.prod(links))
    return float(phase if phase > -np.pi else phase + 2 * np.pi)


def wrap(phase):
    """Wrap to (-pi, pi]."""
    w = np.mod(np.asarray(phase) + np.pi, 2 * np.pi) - np.pi
    w = np.where(w == -np.pi, np.pi, w)
    return float(w) if np.ndim(w) == 0 else w


class DynamicalPhase(NamedTuple):
    value: float
    residual: float  # folded to [-pi, pi]


def dynamical_phase(theta1: float, theta2: float, steps: int, points: int = 2048) -> DynamicalPhase:
    """``phi_d = (N / pi) * integral of eps(k) over one zone``.

    ``eps`` is smooth and pi-periodic on a gapped walk, so the periodic
    trapezoid rule converges spectrally; summation order is fixed.
    """
    if points < 1024:
        raise ValueError("use at least 1024 quadrature points")
    eps = closed_form_energy(bz_grid(points), theta1, theta2)
    integral = math.fsum(eps.tolist()) * BZ_PERIOD / points
    value = steps * integral / np.pi
    return DynamicalPhase(value, wrap(value))


def refocus_step_search(theta1: float, theta2: float, max_steps: int) -> list[tuple[int, float]]:
    """``(N, residual)`` for N = 1..max_steps, smallest ``|residual|`` first."""
    if max_steps < 1:
        raise ValueError("max_steps must be >= 1")
    rows = [(n, dynamical_phase(theta1, theta2, n).residual) for n in range(1, max_steps + 1)]
    return sorted(rows, key=lambda r: (abs(r[1]), r[0]))


@dataclass(frozen=True)
class TopologySummary:
    winding: int | None
    berry_upper: float | None
    berry_lower: float | None
    gap0: float
    gap_pi: float

    @property
    def gapped(self) -> bool:
        return self.winding is not None


def topology_summary(theta1: float, theta2: float, samples: int = 256) -> TopologySummary:
    """All invariants at once; topology fields are ``None`` if the gap closes."""
    gap0, gap_pi = band_gaps(theta1, theta2, max(samples, 1024))
    try:
        w = winding_number(theta1, theta2, samples)
        up = berry_phase(theta1, theta2, +1, samples)
        lo = berry_phase(theta1, theta2, -1, samples)
    except (GapClosedError, ChiralSymmetryError):
        return TopologySummary(None, None, None, gap0, gap_pi)
    return TopologySummary(w, up, lo, gap0, gap_pi)


def band_scan(theta1: float, theta2: float, samples: int = 256):
    """``(k, eps, n)`` arrays over the zone; ``n`` is NaN where the gap closes."""
    ks = bz_grid(samples)
    eps = closed_form_energy(ks, theta1, theta2)
    n = np.full((samples, 3), np.nan)
    ok = np.abs(np.sin(eps)) > 1e-9
    if ok.any():
        _, n_ok = bloch_vectors(ks[ok], theta1, theta2)
        n[ok] = n_ok
    return ks, eps, n

