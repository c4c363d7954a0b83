"""Observables extracted from walker states, cavity states and tomography grids."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray
from scipy.interpolate import RectBivariateSpline
from scipy.optimize import curve_fit

from .bands import wrap
from .cavity import DEFAULT_BETA, F_LEVEL, TRANSFER_SIGN, CavityState, lattice_frame
from .errors import FitError
from .lattice import DOWN, UP, WalkerState
from .phasespace import PhaseSpaceGrid, coherent_bras

POP_SUM_TOL = 0.02
FIT_MAX_RMS = 0.05  # residual gate, relative to the peak-to-peak of the cut


@dataclass(frozen=True)
class PopulationTable:
    """``p[s, x]`` with ``s`` in (up, down)."""

    p: NDArray[np.float64]

    def __post_init__(self):
        p = np.array(self.p, dtype=np.float64, copy=True)
        if p.ndim != 2 or p.shape[0] != 2:
            raise ValueError(f"population table must be (2, M), got {p.shape}")
        if p.min() < 0:
            raise ValueError("negative population")
        if abs(p.sum() - 1.0) > POP_SUM_TOL:
            raise ValueError(f"populations sum to {p.sum():.4f}")
        p.setflags(write=False)
        object.__setattr__(self, "p", p)

    @property
    def sites(self) -> int:
        return self.p.shape[1]

    def site_totals(self) -> NDArray[np.float64]:
        return self.p.sum(axis=0)


def lattice_populations(
    source,
    sites: int | None = None,
    beta: complex = DEFAULT_BETA,
    method: str = "frame",
) -> PopulationTable:
    """Populations ``P(x, s)`` on the ring.

    For a :class:`WalkerState` these are ``|amplitude|^2``.  For a
    :class:`CavityState` each spin branch is expanded in the coherent-state
    lattice ``|beta e^{2 pi i x / M}>``: ``method="frame"`` solves for the
    expansion coefficients by least squares (exact when the state lies in
    the lattice span), ``method="q_peaks"`` reads ``pi Q`` at the lattice
    centres.  Both are normalized over sites and spins.
    """
    if isinstance(source, WalkerState):
        return PopulationTable(source.populations())
    if not isinstance(source, CavityState):
        raise TypeError(f"unsupported source {type(source).__name__}")
    if sites is None:
        raise ValueError("sites is required for cavity input")
    rows = source.amplitudes[[UP, DOWN]]
    if method == "frame":
        frame = lattice_frame(beta, sites, source.n_max)
        coef, *_ = np.linalg.lstsq(frame, rows.T, rcond=None)
        p = np.abs(coef.T) ** 2
    elif method == "q_peaks":
        centers = beta * np.exp(2j * np.pi * np.arange(sites) / sites)
        p = (np.abs(coherent_bras(centers, source.n_max) @ rows.T) ** 2).T
    else:
        raise ValueError(f"unknown population method {method!r}")
    return PopulationTable(p / p.sum())


def population_fidelity(p: PopulationTable, p_th: PopulationTable, form: str = "entry") -> float:
    """Bhattacharyya overlap of two population tables.

    ``form="entry"`` sums ``sqrt(P P_th)`` over every (spin, site) entry,
    which is one exactly when the tables agree. ``form="site"`` puts the
    spin sum under the root, ``sum_x sqrt(sum_s P(x,s) P_th(x,s))``; that
    variant drops below one for identical tables whenever a site holds both
    spins, so it is kept only for comparison.
    """
    if p.p.shape != p_th.p.shape:
        raise ValueError(f"shape mismatch {p.p.shape} vs {p_th.p.shape}")
    if form == "entry":
        return float(np.sum(np.sqrt(p.p * p_th.p)))
    if form == "site":
        return float(np.sum(np.sqrt(np.sum(p.p * p_th.p, axis=0))))
    raise ValueError(f"unknown form {form!r}")


def wigner_state_fidelity(w_target: PhaseSpaceGrid, w_measured: PhaseSpaceGrid) -> float:
    """Overlap ``4 pi int W_t W_m d^2 alpha``.

    The factor makes a pure state's fidelity with itself one for Wigner
    functions normalized to ``W_vac(0) = 1/pi``.
    """
    if w_target.spec != w_measured.spec:
        raise ValueError("grids differ")
    if w_target.kind != "W" or w_measured.kind != "W":
        raise ValueError("fidelity needs two Wigner grids")
    return float(4 * np.pi * np.sum(w_target.values * w_measured.values) * w_target.spec.cell_area)


# -- fringe fitting ------------------------------------------------------------


@dataclass(frozen=True)
class Cut:
    """Straight cut through the midpoint of blobs ``a`` and ``b``, perpendicular to ``b - a``."""

    a: complex
    b: complex
    length: float = 2.5
    points: int = 201

    @property
    def direction(self) -> complex:
        sep = complex(self.b) - complex(self.a)
        if sep == 0:
            raise ValueError("cut endpoints coincide")
        return 1j * sep / abs(sep)

    @property
    def s(self) -> NDArray[np.float64]:
        return np.linspace(-self.length / 2, self.length / 2, self.points)

    @property
    def alphas(self) -> NDArray[np.complex128]:
        mid = (complex(self.a) + complex(self.b)) / 2
        return mid + self.s * self.direction

    @property
    def frequency(self) -> float:
        """Fringe angular frequency along the cut, ``2 |b - a|``."""
        return 2 * abs(complex(self.b) - complex(self.a))

    @property
    def reference_phase(self) -> float:
        """Phase offset ``-Im(b a*)`` of the interference term at the midpoint."""
        return -float((complex(self.b) * complex(self.a).conjugate()).imag)


def sample_cut(grid: PhaseSpaceGrid, cut: Cut) -> NDArray[np.float64]:
    """Bicubic-spline interpolation of the grid along the cut."""
    spec = grid.spec
    spline = RectBivariateSpline(spec.im_axis, spec.re_axis, grid.values, kx=3, ky=3)
    al = cut.alphas
    lo_re, hi_re = spec.re_axis[[0, -1]]
    lo_im, hi_im = spec.im_axis[[0, -1]]
    if al.real.min() < lo_re or al.real.max() > hi_re or al.imag.min() < lo_im or al.imag.max() > hi_im:
        raise ValueError("cut leaves the grid")
    return spline.ev(al.imag, al.real)


def _fringe_model(s, offset, bump, amplitude, center, width, freq, phase):
    env = np.exp(-((s - center) ** 2) / (2 * width**2))
    return offset + env * (bump + amplitude * np.cos(freq * s + phase))


@dataclass(frozen=True)
class FringeFit:
    phase: float  # fitted cos phase at s = 0, wrapped
    relative_phase: float  # phi in |0> - e^{i phi}|b>, wrapped
    amplitude: float
    offset: float
    frequency: float
    center: float
    width: float
    rms_residual: float

    def as_dict(self) -> dict:
        return {k: float(v) for k, v in self.__dict__.items()}


def fft_initial_guess(s, y, pad: int = 16) -> tuple[float, float]:
    """``(angular frequency, phase)`` of the dominant non-DC FFT peak."""
    y = y - np.mean(y)
    n = len(y) * pad
    spec = np.fft.rfft(y, n)
    ds = s[1] - s[0]
    freqs = 2 * np.pi * np.fft.rfftfreq(n, ds)
    power = np.abs(spec) ** 2
    power[0] = 0.0
    i = int(np.argmax(power))
    if i == 0 or power[i] < 1e-30:
        raise FitError("no dominant fringe frequency")
    # phase referenced to s[0]; shift to s = 0
    phase = float(np.angle(spec[i]) - freqs[i] * s[0])
    return float(freqs[i]), wrap(phase)


def extract_fringe_phase(grid: PhaseSpaceGrid, cut: Cut, max_rms: float = FIT_MAX_RMS) -> FringeFit:
    """Fit ``c + G(s) (B + A cos(w s + p))`` along ``cut``; ``G`` Gaussian.

    ``max_rms`` bounds the residual relative to the peak-to-peak range of
    the cut.  The relative phase assumes the cavity state
    ``|a> - e^{i phi} |b>``.
    """
    if grid.kind != "W":
        raise ValueError("fringe fitting needs a Wigner grid")
    s = cut.s
    y = sample_cut(grid, cut)
    span = float(np.ptp(y))
    if span <= 0:
        raise FitError("flat cut")
    freq0, phase0 = fft_initial_guess(s, y)
    p0 = [float(np.median(y[[0, -1]])), 0.0, span / 2, 0.0, 0.5, freq0, phase0]
    lower = [-np.inf, -np.inf, 0.0, s[0], 1e-3, 0.0, -4 * np.pi]
    upper = [np.inf, np.inf, np.inf, s[-1], 10 * (s[-1] - s[0]), 4 * freq0 + 1, 4 * np.pi]
    try:
        popt, _ = curve_fit(_fringe_model, s, y, p0=p0, bounds=(lower, upper), maxfev=20000)
    except RuntimeError as exc:
        raise FitError(f"fringe fit did not converge: {exc}") from exc
    resid = y - _fringe_model(s, *popt)
    rms = float(np.sqrt(np.mean(resid**2)))
    if rms > max_rms * span:
        raise FitError(f"fringe fit residual {rms:.3g} exceeds {max_rms} x {span:.3g}")
    offset, _, amp, center, width, freq, phase = popt
    phase = wrap(phase)
    return FringeFit(
        phase=phase,
        relative_phase=wrap(cut.reference_phase + np.pi - phase),
        amplitude=float(amp),
        offset=float(offset),
        frequency=float(freq),
        center=float(center),
        width=float(width),
        rms_residual=rms,
    )


def berry_phase_difference(
    w_trivial: PhaseSpaceGrid, w_topological: PhaseSpaceGrid, cut: Cut, max_rms: float = FIT_MAX_RMS
) -> float:
    """Wrapped difference of the two relative phases (topological minus trivial)."""
    triv = extract_fringe_phase(w_trivial, cut, max_rms)
    topo = extract_fringe_phase(w_topological, cut, max_rms)
    return wrap(topo.relative_phase - triv.relative_phase)


def direct_relative_phase(state: CavityState, beta: complex | None = None) -> float:
    """Relative phase ``phi`` of ``|0> - e^{i phi} |beta>`` read from amplitudes.

    ``state`` is the walked cat before disentangling; the sign picked up by
    the vacuum component in :func:`~qwtopo.cavity.disentangle_f` is included.  No tomography is
    involved, which makes this a cross-check for the fringe fit.
    """
    beta = state.beta_ref if beta is None else beta
    ref = state.amplitudes[F_LEVEL, 0]
    if abs(ref) < 1e-12:
        raise ValueError("state has no f-level reference component")
    bra = coherent_bras([beta], state.n_max)[0]
    c = complex(bra @ state.amplitudes[UP]) / (TRANSFER_SIGN * ref)
    return wrap(np.angle(c) + np.pi)
