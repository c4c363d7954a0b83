"""Husimi Q and Wigner functions on rectangular grids, plus shot-noise sampling.

Conventions: ``Q(alpha) = |<alpha|psi>|^2 / pi`` and
``W(alpha) = <psi| D(alpha) P D(-alpha) |psi> / pi`` with ``P`` the photon
parity.  With these, ``W_vac(0) = 1/pi``, ``int Q d^2alpha = 1`` and
``int W d^2alpha = 1/2`` (``int W dx dp = 1`` for ``alpha = (x + ip)/sqrt 2``).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from numpy.typing import NDArray
from scipy.special import eval_genlaguerre, gammaln

from .cavity import CavityState
from .errors import PhysicsInvariantError, TruncationError

KINDS = ("Q", "W")
_BOUND_TOL = 1e-9


@dataclass(frozen=True)
class GridSpec:
    re_min: float
    re_max: float
    im_min: float
    im_max: float
    n_re: int = 41
    n_im: int = 41

    def __post_init__(self):
        if self.n_re < 2 or self.n_im < 2:
            raise ValueError("grid needs at least 2 points per axis")
        if not (self.re_max > self.re_min and self.im_max > self.im_min):
            raise ValueError("grid ranges must be increasing")
        if not np.all(np.isfinite([self.re_min, self.re_max, self.im_min, self.im_max])):
            raise ValueError("grid ranges must be finite")

    @classmethod
    def square(cls, half_width: float, n: int = 41, center: complex = 0j) -> "GridSpec":
        c = complex(center)
        return cls(c.real - half_width, c.real + half_width, c.imag - half_width, c.imag + half_width, n, n)

    @property
    def re_axis(self):
        return np.linspace(self.re_min, self.re_max, self.n_re)

    @property
    def im_axis(self):
        return np.linspace(self.im_min, self.im_max, self.n_im)

    @property
    def alphas(self) -> NDArray[np.complex128]:
        """Complex grid of shape ``(n_im, n_re)``; rows run along Im alpha."""
        re, im = np.meshgrid(self.re_axis, self.im_axis)
        return re + 1j * im

    @property
    def cell_area(self) -> float:
        return (self.re_max - self.re_min) / (self.n_re - 1) * (self.im_max - self.im_min) / (self.n_im - 1)


@dataclass(frozen=True)
class PhaseSpaceGrid:
    """Real values of Q or W on a :class:`GridSpec`.

    ``values`` has shape ``(n_im, n_re)``.  ``shots`` and ``sigma`` are set
    only for sampled grids.
    """

    spec: GridSpec
    values: NDArray[np.float64]
    kind: str
    shots: int | None = None
    seed: int | None = None
    sigma: NDArray[np.float64] | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}")
        vals = np.array(self.values, dtype=np.float64, copy=True)
        if vals.shape != (self.spec.n_im, self.spec.n_re):
            raise ValueError(f"values shape {vals.shape} does not match grid")
        if self.shots is None:
            # sampled estimates may overshoot physical bounds by noise
            check_bounds(vals, self.kind)
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def alphas(self):
        return self.spec.alphas

    def normalization(self) -> float:
        """Riemann-sum integral, in ``d^2 alpha`` for Q and ``dx dp`` for W."""
        total = float(np.sum(self.values)) * self.spec.cell_area
        return total if self.kind == "Q" else 2 * total

    def value_at(self, alpha: complex) -> float:
        """Value at the grid point nearest to ``alpha``."""
        i = int(np.argmin(np.abs(self.spec.im_axis - alpha.imag)))
        j = int(np.argmin(np.abs(self.spec.re_axis - alpha.real)))
        return float(self.values[i, j])


def check_bounds(values, kind: str) -> None:
    if kind == "Q":
        lo, hi = 0.0, 1 / np.pi
    else:
        lo, hi = -2 / np.pi, 2 / np.pi
    if values.min() < lo - _BOUND_TOL or values.max() > hi + _BOUND_TOL:
        raise PhysicsInvariantError(
            f"{kind} values [{values.min():.6g}, {values.max():.6g}] outside [{lo:.6g}, {hi:.6g}]"
        )


def _levels(state, level) -> NDArray[np.complex128]:
    """Cavity wavefunctions as rows: one per qutrit level, or a single vector."""
    if isinstance(state, CavityState):
        amps = state.amplitudes
        return amps if level is None else amps[[level]]
    vec = np.asarray(state, dtype=np.complex128)
    if vec.ndim == 1:
        return vec[None, :]
    return vec


def coherent_bras(alphas, n_max: int) -> NDArray[np.complex128]:
    """Rows ``<alpha|n>`` for each alpha, shape ``(P, n_max + 1)``."""
    alphas = np.ravel(np.asarray(alphas, dtype=np.complex128))
    n = np.arange(n_max + 1)
    with np.errstate(divide="ignore"):
        powers = np.power(alphas.conj()[:, None], n[None, :])
    return powers * np.exp(-np.abs(alphas)[:, None] ** 2 / 2 - 0.5 * gammaln(n + 1))


def husimi_q(state, spec: GridSpec, per_spin: bool = False, level: int | None = None):
    """Q function of a cavity state, tracing out the qutrit.

    With ``per_spin`` a dict ``{"up": grid, "down": grid}`` of weighted
    branch Q functions is returned; their sum plus the f branch is the total.
    """
    rows = _levels(state, level)
    bras = coherent_bras(spec.alphas, rows.shape[1] - 1)
    branch = np.abs(bras @ rows.T) ** 2 / np.pi  # (P, levels)
    shape = (spec.n_im, spec.n_re)
    if per_spin:
        if rows.shape[0] < 2:
            raise ValueError("per_spin needs a full CavityState")
        return {
            name: PhaseSpaceGrid(spec, branch[:, i].reshape(shape), "Q")
            for i, name in enumerate(("up", "down"))
        }
    return PhaseSpaceGrid(spec, branch.sum(axis=1).reshape(shape), "Q")


def displacement_matrix(alpha: complex, n_out: int, n_in: int) -> NDArray[np.complex128]:
    """Exact ``<m|D(alpha)|n>`` for ``m < n_out``, ``n < n_in``.

    Uses the associated-Laguerre closed form with a log-space prefactor, so
    large ``m`` does not overflow.
    """
    alpha = complex(alpha)
    x = abs(alpha) ** 2
    m = np.arange(n_out)[:, None]
    n = np.arange(n_in)[None, :]
    lo, hi = np.minimum(m, n), np.maximum(m, n)
    d = hi - lo
    if alpha == 0:
        return np.eye(n_out, n_in, dtype=np.complex128)
    log_pref = 0.5 * (gammaln(lo + 1) - gammaln(hi + 1)) + d * np.log(abs(alpha)) - x / 2
    lag = eval_genlaguerre(lo, d, x)
    # phase: alpha^(m-n) for m >= n, (-alpha*)^(n-m) otherwise
    ang = np.angle(alpha)
    phase = np.where(m >= n, np.exp(1j * d * ang), np.exp(1j * d * (np.pi - ang)))
    return np.exp(log_pref) * lag * phase


def _n_out(n_eff: float, alpha: complex) -> int:
    r = np.sqrt(max(n_eff, 0.0)) + abs(alpha)
    return int(np.ceil(r * r + 8 * r + 10))


def wigner_point(rows, alpha: complex, tol: float = 1e-8) -> float:
    """Displaced-parity Wigner value at one point for level rows ``(L, N+1)``."""
    n_in = rows.shape[1]
    weights = np.sum(np.abs(rows) ** 2, axis=0)
    n_eff = float(weights @ np.arange(n_in)) / max(weights.sum(), 1e-300)
    n_out = max(_n_out(n_eff, alpha), n_in)
    disp = displacement_matrix(-alpha, n_out, n_in) @ rows.T
    probs = np.abs(disp) ** 2
    leak = float(np.sum(weights) - np.sum(probs))
    if leak > tol:
        raise TruncationError(f"displacement by {alpha:.3g} leaks {leak:.3g} beyond n={n_out}")
    parity = np.where(np.arange(n_out) % 2 == 0, 1.0, -1.0)
    return float(parity @ probs.sum(axis=1)) / np.pi


def wigner_kernel_point(rows, alpha: complex) -> float:
    """``W(alpha) = Tr[rho D(2 alpha) P] / pi`` in the truncated space."""
    n_in = rows.shape[1]
    d2 = displacement_matrix(2 * alpha, n_in, n_in)
    parity = np.where(np.arange(n_in) % 2 == 0, 1.0, -1.0)
    val = np.einsum("lm,mn,n,ln->", rows.conj(), d2, parity, rows)
    return float(val.real) / np.pi


def wigner(state, spec: GridSpec, level: int | None = None, method: str = "parity", tol: float = 1e-8):
    """Wigner function of a cavity state over a grid.

    For a :class:`CavityState` the qutrit is traced out unless ``level``
    picks one branch.  ``method="parity"`` displaces into a larger Fock
    space and measures parity, checking leakage; ``method="kernel"`` uses
    ``D(2 alpha) P`` within the truncation.
    """
    rows = _levels(state, level)
    flat = spec.alphas.ravel()
    if method == "parity":
        vals = [wigner_point(rows, a, tol) for a in flat]
    elif method == "kernel":
        vals = [wigner_kernel_point(rows, a) for a in flat]
    else:
        raise ValueError(f"unknown Wigner method {method!r}")
    return PhaseSpaceGrid(spec, np.reshape(vals, (spec.n_im, spec.n_re)), "W")


def shot_sigma(p, shots: int, kind: str = "W"):
    """Binomial standard error of the Q or W estimate."""
    scale = 2 / np.pi if kind == "W" else 1 / np.pi
    return scale * np.sqrt(np.clip(p * (1 - p), 0.0, None) / shots)


def success_probability(values, kind: str):
    return (1 + np.pi * np.asarray(values)) / 2 if kind == "W" else np.pi * np.asarray(values)


def sample_tomography(grid: PhaseSpaceGrid, shots: int, seed: int) -> PhaseSpaceGrid:
    """Binomial shot-noise realization of ``grid``.

    Point ``i`` (row-major) draws from ``default_rng([seed, i])`` so the
    result does not depend on evaluation order.  ``sigma`` is computed from
    the estimated success probability.
    """
    if shots < 1:
        raise ValueError("shots must be >= 1")
    p = success_probability(grid.values, grid.kind).ravel()
    if p.min() < -_BOUND_TOL or p.max() > 1 + _BOUND_TOL:
        raise PhysicsInvariantError("success probability outside [0, 1]")
    p = np.clip(p, 0.0, 1.0)
    counts = np.array(
        [np.random.default_rng([seed, i]).binomial(shots, pi) for i, pi in enumerate(p)],
        dtype=np.float64,
    )
    p_hat = counts / shots
    est = (2 * p_hat - 1) / np.pi if grid.kind == "W" else p_hat / np.pi
    shape = grid.values.shape
    return replace(
        grid,
        values=est.reshape(shape),
        shots=int(shots),
        seed=int(seed),
        sigma=shot_sigma(p_hat, shots, grid.kind).reshape(shape),
    )
