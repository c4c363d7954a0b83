import numpy as np
import pytest
from scipy.linalg import expm

from oracles import REFERENCE_WALKS, SX, SY, SZ, k_unitary, quad_mean_energy, trace_bloch_vector, trace_energy
from qwtopo.bands import (
    PAULI,
    band_gaps,
    band_scan,
    berry_phase,
    bloch_vectors,
    bz_grid,
    chiral_axis,
    closed_form_energy,
    dynamical_phase,
    effective_hamiltonian,
    kspace_eigensystem,
    kspace_unitary,
    variant_bloch_vector,
    variant_energy,
    refocus_step_search,
    topology_summary,
    winding_angle,
    winding_number,
    wrap,
)
from qwtopo.errors import ChiralSymmetryError, GapClosedError, SamplingError

PI = np.pi


def test_unitary_no_coin_is_translation():
    for k in (0.0, 0.3, 2.1):
        u = kspace_unitary(k, 0.0, 0.0)
        assert np.allclose(u, np.diag([np.exp(2j * k), np.exp(-2j * k)]), atol=1e-15)


def test_unitary_matches_oracle_and_is_unitary():
    rng = np.random.default_rng(0)
    for _ in range(1000):
        k, t1, t2 = rng.uniform(-PI, PI, 3)
        u = kspace_unitary(k, t1, t2)
        assert np.allclose(u.conj().T @ u, np.eye(2), atol=1e-14)
        assert np.allclose(u, k_unitary(k, t1, t2), atol=1e-14)


def test_unitary_bloch_shift_is_k_shift():
    assert np.allclose(kspace_unitary(0.4, 1.0, 2.0, 0.3), kspace_unitary(0.7, 1.0, 2.0), atol=1e-15)


def test_unitary_vectorized_shape():
    assert kspace_unitary(np.zeros(5), 1.0, 2.0).shape == (5, 2, 2)


def test_k0_eigenphase_is_half_angle_sum():
    # at k = 0 the step is R(theta1 + theta2), so eps = (theta1 + theta2)/2
    t1, t2 = REFERENCE_WALKS["U0"]
    eps, _, _ = kspace_eigensystem([0.0], t1, t2)
    assert abs(eps[0] - PI / 2) < 1e-12


def test_effective_hamiltonian_examples():
    t1, t2 = REFERENCE_WALKS["U0"]
    assert abs(effective_hamiltonian(0.0, t1, t2).energy - PI / 2) < 1e-12
    # cos 2k = 0 leaves cos eps = -sin(pi/8) sin(3pi/8)
    expected = np.arccos(-np.sin(PI / 8) * np.sin(3 * PI / 8))
    assert abs(effective_hamiltonian(PI / 4, t1, t2).energy - expected) < 1e-12
    assert abs(expected - (PI - 1.2094292028881888)) < 1e-12


def test_matrix_log_reproduces_unitary():
    rng = np.random.default_rng(1)
    for _ in range(1000):
        k, t1, t2 = rng.uniform(-PI, PI, 3)
        try:
            bp = effective_hamiltonian(k, t1, t2)
        except GapClosedError:
            continue
        assert 0 <= bp.energy <= PI
        assert abs(np.linalg.norm(bp.n) - 1) < 1e-12
        assert np.allclose(expm(-1j * bp.hamiltonian()), kspace_unitary(k, t1, t2), atol=1e-12)
        pair = np.stack([bp.upper, bp.lower])
        assert np.allclose(pair.conj() @ pair.T, np.eye(2), atol=1e-12)


def test_bloch_vector_matches_trace_oracle():
    rng = np.random.default_rng(2)
    ks = rng.uniform(0, PI, 50)
    for t1, t2 in REFERENCE_WALKS.values():
        _, n = bloch_vectors(ks, t1, t2)
        ref = np.array([trace_bloch_vector(k, t1, t2) for k in ks])
        assert np.allclose(n, ref, atol=1e-12)


def test_gap_closing_flagged():
    with pytest.raises(GapClosedError):
        effective_hamiltonian(PI / 2, PI / 2, PI / 2)


def test_closed_form_matches_matrix_log():
    ks = np.linspace(-PI, PI, 1001)
    rng = np.random.default_rng(3)
    for _ in range(20):
        t1, t2 = rng.uniform(0, 2 * PI, 2)
        try:
            eps, _, _ = kspace_eigensystem(ks, t1, t2)
        except GapClosedError:
            continue
        assert np.max(np.abs(eps - closed_form_energy(ks, t1, t2))) < 1e-10


def test_closed_form_examples():
    ks = np.linspace(0, PI / 2, 50)
    assert np.allclose(closed_form_energy(ks, 0, 0), 2 * ks, atol=1e-7)
    assert abs(closed_form_energy(0.0, PI / 4, 3 * PI / 4) - PI / 2) < 1e-15
    ks = np.random.default_rng(4).uniform(-5, 5, 100)
    assert np.allclose(closed_form_energy(ks + PI, 1.1, 0.4), closed_form_energy(ks, 1.1, 0.4), atol=1e-12)


def test_variant_energy_is_shifted_mirror():
    # the alternative form equals pi - eps(k + pi/2): a different branch
    ks = np.linspace(0, PI, 333)
    for t1, t2 in REFERENCE_WALKS.values():
        assert np.allclose(variant_energy(ks, t1, t2), PI - closed_form_energy(ks + PI / 2, t1, t2), atol=1e-12)
        assert not np.allclose(variant_energy(ks, t1, t2), closed_form_energy(ks, t1, t2), atol=1e-3)


def test_variant_bloch_components_have_identical_y_z():
    ks = np.linspace(0.1, 3.0, 20)
    t1, t2 = REFERENCE_WALKS["U1"]
    variant = variant_bloch_vector(ks, t1, t2)
    assert np.allclose(variant[:, 1], variant[:, 2])
    _, n = bloch_vectors(ks, t1, t2)
    # the matrix log is ground truth; the variant y and z rows cannot both match
    assert not np.allclose(variant, n, atol=1e-3)


def test_spectra_of_pair_identical():
    ks = bz_grid(1024)
    for a, b in (("U0", "U1"), ("U0p", "U1p")):
        ea, _, _ = kspace_eigensystem(ks, *REFERENCE_WALKS[a])
        eb, _, _ = kspace_eigensystem(ks, *REFERENCE_WALKS[b])
        assert np.max(np.abs(ea - eb)) < 1e-12


def test_energy_matches_trace_oracle():
    for t1, t2 in REFERENCE_WALKS.values():
        for k in np.linspace(0, PI, 17):
            assert abs(closed_form_energy(k, t1, t2) - trace_energy(k, t1, t2)) < 1e-12


# -- chiral axis -----------------------------------------------------------------------


@pytest.mark.parametrize("name", list(REFERENCE_WALKS))
def test_chiral_axis_planarity(name):
    t1, t2 = REFERENCE_WALKS[name]
    ax = chiral_axis(t1, t2)
    assert abs(np.linalg.norm(ax.vector) - 1) < 1e-12
    _, n = bloch_vectors(bz_grid(997), t1, t2)
    assert np.max(np.abs(n @ ax.vector)) < 1e-9


def test_chiral_axis_depends_on_first_coin_only():
    # the coin applied first is theta2
    a = chiral_axis(0.9, 0.6).vector
    b = chiral_axis(2.1, 0.6).vector
    assert np.allclose(a, b, atol=1e-10)
    assert np.allclose(a, [0, np.cos(0.3), np.sin(0.3)], atol=1e-10)
    assert not np.allclose(chiral_axis(0.9, 1.4).vector, a, atol=1e-3)


def test_chiral_axis_pi_case():
    # first-applied angle pi gives the axis along z
    assert np.allclose(chiral_axis(0.7, PI).vector, [0, 0, 1], atol=1e-10)


def test_chiral_axis_reports_candidate_matches():
    ax = chiral_axis(*REFERENCE_WALKS["U0"])
    assert set(ax.matches) == {"yz(theta1)", "xz(theta1)", "yz(theta2)", "xz(theta2)"}
    assert not any(ax.matches.values())


def test_chiral_axis_needs_samples():
    with pytest.raises(ValueError):
        chiral_axis(1.0, 2.0, samples=8)


def test_chiral_hamiltonian_relation():
    # Gamma = A.sigma anticommutes with H = eps n.sigma since A.n = 0
    t1, t2 = REFERENCE_WALKS["U1"]
    gamma = np.einsum("i,ijk->jk", chiral_axis(t1, t2).vector, PAULI)
    for k in np.linspace(0.05, 3.0, 11):
        h = effective_hamiltonian(k, t1, t2).hamiltonian()
        assert np.allclose(gamma @ h @ gamma.conj().T, -h, atol=1e-12)


def test_non_planar_rejected(monkeypatch):
    import qwtopo.bands as b

    ks = bz_grid(64)
    cloud = np.stack([np.cos(ks), np.sin(ks), 0.3 * np.sin(3 * ks)], axis=1)
    monkeypatch.setattr(b, "bloch_vectors", lambda k, *a, **kw: (None, cloud))
    with pytest.raises(ChiralSymmetryError):
        b.chiral_axis(1.0, 2.0)


def test_single_direction_rejected(monkeypatch):
    import qwtopo.bands as b

    line = np.tile([0.0, 0.0, 1.0], (64, 1))
    monkeypatch.setattr(b, "bloch_vectors", lambda k, *a, **kw: (None, line))
    with pytest.raises(ChiralSymmetryError):
        b.chiral_axis(1.0, 2.0)


# -- winding and Berry phase ---------------------------------------------------------------


@pytest.mark.parametrize("name,w", [("U0", 0), ("U1", 1), ("U0p", 0), ("U1p", 1)])
def test_winding(name, w):
    t1, t2 = REFERENCE_WALKS[name]
    assert abs(winding_number(t1, t2)) == w
    assert abs(winding_angle(t1, t2) - winding_number(t1, t2)) < 0.01


def test_winding_sample_floor():
    with pytest.raises(ValueError):
        winding_number(1.0, 2.0, samples=32)


def test_winding_gap_closed():
    with pytest.raises(GapClosedError):
        winding_number(PI / 2, PI / 2)


def test_winding_residual_check(monkeypatch):
    import qwtopo.bands as b

    monkeypatch.setattr(b, "winding_angle", lambda *a, **k: 0.7)
    with pytest.raises(SamplingError):
        b.winding_number(1.0, 2.0)


@pytest.mark.parametrize("name,target", [("U0", 0.0), ("U1", PI), ("U0p", 0.0), ("U1p", PI)])
def test_berry_phase(name, target):
    t1, t2 = REFERENCE_WALKS[name]
    for band in (+1, -1):
        assert abs(wrap(berry_phase(t1, t2, band) - target)) < 1e-3


def test_berry_phase_gauge_invariant():
    t1, t2 = REFERENCE_WALKS["U1p"]
    from qwtopo import bands

    ks = bz_grid(256)
    _, up, _ = kspace_eigensystem(ks, t1, t2)
    phases = np.exp(1j * np.random.default_rng(5).uniform(0, 2 * PI, 256))
    u = up * phases[:, None]
    links = np.einsum("ka,ka->k", u.conj(), np.roll(u, -1, axis=0))
    assert abs(wrap(-np.angle(np.prod(links)) - bands.berry_phase(t1, t2))) < 1e-12


# -- dynamical phase ----------------------------------------------------------------------


def test_dynamical_phase_zero_steps():
    assert dynamical_phase(1.0, 2.0, 0).value == 0.0


def test_dynamical_phase_linear():
    a = dynamical_phase(PI / 4, 3 * PI / 4, 7).value
    b = dynamical_phase(PI / 4, 3 * PI / 4, 14).value
    assert b == 2 * a


@pytest.mark.parametrize("name", list(REFERENCE_WALKS))
def test_dynamical_phase_matches_quad(name):
    t1, t2 = REFERENCE_WALKS[name]
    val = dynamical_phase(t1, t2, 1).value
    assert abs(val - quad_mean_energy(t1, t2)) < 1e-8 * val


def test_dynamical_phase_needs_points():
    with pytest.raises(ValueError):
        dynamical_phase(1.0, 2.0, 3, points=100)


def test_refocus_search():
    t1, t2 = REFERENCE_WALKS["U1"]
    rows = refocus_step_search(t1, t2, 12)
    assert len(rows) == 12
    assert sorted(n for n, _ in rows) == list(range(1, 13))
    assert all(-PI <= r <= PI for _, r in rows)
    assert 10 in [n for n, _ in rows[:2]]
    with pytest.raises(ValueError):
        refocus_step_search(t1, t2, 0)


# -- summaries ---------------------------------------------------------------------------------


def test_topology_summary_consistent():
    for t1, t2 in REFERENCE_WALKS.values():
        s = topology_summary(t1, t2)
        assert s.gapped
        for phase in (s.berry_upper, s.berry_lower):
            assert abs(wrap(phase - PI * s.winding)) < 1e-3
        assert s.gap0 > 0.1 and s.gap_pi > 0.1


def test_topology_summary_gap_closed():
    s = topology_summary(PI / 2, PI / 2)
    assert s.winding is None and not s.gapped
    assert s.gap_pi < 1e-9


def test_band_gaps():
    g0, gpi = band_gaps(*REFERENCE_WALKS["U0"])
    assert abs(g0 - PI / 2) < 1e-12  # eps(0) = pi/2 is the minimum
    assert abs(gpi - PI / 4) < 1e-6


def test_band_scan_nan_at_closing():
    ks, eps, n = band_scan(PI / 2, PI / 2, 256)
    assert np.isnan(n).any()
    assert not np.isnan(eps).any()
    assert np.all(np.isfinite(n[~np.isnan(n[:, 0])]))


def test_pauli_basis():
    assert np.allclose(PAULI, np.stack([SX, SY, SZ]))
