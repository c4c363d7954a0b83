"""Independent reference implementations used only by the tests.

Nothing here imports the package; each oracle is built from a different
formulation (dense Kronecker matrices, scalar quadrature, closed-form
coherent-state algebra).
"""

import numpy as np
from scipy.integrate import quad
from scipy.linalg import expm

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)

PI = np.pi
REFERENCE_WALKS = {
    "U0": (3 * PI / 4, PI / 4),
    "U1": (PI / 4, 3 * PI / 4),
    "U0p": (0.64 * PI, 0.28 * PI),
    "U1p": (0.28 * PI, 0.64 * PI),
}


# -- dense lattice oracle ----------------------------------------------------------
# basis index: spin * M + x


def dense_coin(theta, m):
    return np.kron(expm(1j * theta / 2 * SX), np.eye(m))


def dense_z(dk, m):
    return np.kron(expm(1j * dk * SZ), np.eye(m))


def dense_translation(m):
    shift_right = np.roll(np.eye(m), 1, axis=0)  # |x> -> |x+1>
    up = np.diag([1.0, 0.0])
    down = np.diag([0.0, 1.0])
    return np.kron(up, shift_right) + np.kron(down, shift_right.T)


def dense_step(theta1, theta2, m, shifts=(0.0, 0.0)):
    t = dense_translation(m)
    first, second = shifts
    return t @ dense_z(second, m) @ dense_coin(theta1, m) @ t @ dense_z(first, m) @ dense_coin(theta2, m)


def dense_schedule(steps, mode, dk_total=PI):
    if mode == "off":
        return [(0.0, 0.0)] * steps
    dk = dk_total / steps
    if mode == "constant":
        return [(n * dk, n * dk) for n in range(steps)]
    return [(n * dk, (n + 0.5) * dk) for n in range(steps)]


def dense_trajectory(theta1, theta2, m, steps, mode="off", psi0=None):
    if psi0 is None:
        psi0 = np.zeros(2 * m, dtype=complex)
        psi0[0] = 1.0
    out = [psi0]
    for shifts in dense_schedule(steps, mode):
        out.append(dense_step(theta1, theta2, m, shifts) @ out[-1])
    return out


# -- band oracles ----------------------------------------------------------------------


def k_unitary(k, theta1, theta2):
    z = expm(1j * k * SZ)
    return z @ expm(1j * theta1 / 2 * SX) @ z @ expm(1j * theta2 / 2 * SX)


def trace_energy(k, theta1, theta2):
    """eps from cos eps = Re Tr U / 2 (U in SU(2))."""
    return np.arccos(np.clip(np.trace(k_unitary(k, theta1, theta2)).real / 2, -1, 1))


def trace_bloch_vector(k, theta1, theta2):
    """U = cos eps - i sin eps n.sigma  =>  n_j = i Tr(sigma_j U) / (2 sin eps)."""
    u = k_unitary(k, theta1, theta2)
    eps = trace_energy(k, theta1, theta2)
    return np.array([(1j * np.trace(s @ u)).real for s in (SX, SY, SZ)]) / (2 * np.sin(eps))


def quad_mean_energy(theta1, theta2):
    val, _ = quad(lambda k: trace_energy(k, theta1, theta2), 0, PI, limit=200, epsabs=1e-13, epsrel=1e-13)
    return val / PI


# -- cavity / phase-space oracles ---------------------------------------------------


def coherent_overlap(a, b):
    """<a|b> for coherent states."""
    return np.exp(-abs(a) ** 2 / 2 - abs(b) ** 2 / 2 + np.conj(a) * b)


def _parity_element(gamma, beta, alpha):
    """<gamma| D(alpha) P D(-alpha) |beta> by coherent-state algebra."""
    # D(-alpha)|beta> = exp((-alpha beta* + alpha* beta)/2) |beta - alpha>
    c1 = np.exp((-alpha * np.conj(beta) + np.conj(alpha) * beta) / 2)
    # parity flips the amplitude
    v = alpha - beta
    # D(alpha)|v> = exp((alpha v* - alpha* v)/2) |alpha + v>
    c2 = np.exp((alpha * np.conj(v) - np.conj(alpha) * v) / 2)
    return c1 * c2 * coherent_overlap(gamma, alpha + v)


def wigner_superposition(coeffs, centers, alpha):
    """W(alpha) = <psi|D P D^dag|psi>/pi for psi = sum c_i |a_i> (normalized here)."""
    coeffs = np.asarray(coeffs, dtype=complex)
    gram = np.array([[coherent_overlap(a, b) for b in centers] for a in centers])
    norm = np.real(np.conj(coeffs) @ gram @ coeffs)
    total = 0j
    for ci, ai in zip(coeffs, centers):
        for cj, aj in zip(coeffs, centers):
            total += np.conj(ci) * cj * _parity_element(ai, aj, alpha)
    return float(np.real(total) / norm / PI)


def wigner_fock1(alpha):
    """Fock |1>, W normalized so W_vac(0) = 1/pi."""
    r2 = abs(alpha) ** 2
    return (4 * r2 - 1) * np.exp(-2 * r2) / PI
