"""Small fixed-size complex linear algebra kernels.

Everything here works on plain numpy arrays of shape (2,), (3,), (2, 2) or
(3, 3) with dtype complex128. No general n x n machinery: the scan loops only
ever need these sizes, and fixed shapes keep them allocation-light.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

TAU = 2.0 * np.pi

# Relative threshold below which tr^2 - 4 det is treated as zero and the
# 2x2 eigenproblem reported as degenerate.
DEGENERATE_TOL = 1e-12


def branch_sqrt(a: complex) -> complex:
    """Square root with the argument taken in [0, 2pi).

    Writing a = |a| e^{i theta} with theta in [0, 2pi), returns
    sqrt(|a|) e^{i theta/2}, so the image always lies in the closed upper
    half-plane (argument in [0, pi)).
    """
    a = complex(a)
    if a == 0:
        return 0j
    theta = np.angle(a)
    if theta < 0.0:
        theta += TAU
    return np.sqrt(abs(a)) * np.exp(0.5j * theta)


@dataclass(frozen=True)
class Eig2:
    """Eigenpairs of a 2x2 matrix under the [0, 2pi) square-root branch."""

    zeta_plus: complex
    zeta_minus: complex
    v_plus: np.ndarray
    v_minus: np.ndarray
    degenerate: bool


def _eigenvector(m: np.ndarray, zeta: complex, scale: float) -> np.ndarray | None:
    # Kernel of (m - zeta I); both candidate rows are tried and the better
    # conditioned one kept.
    c1 = np.array([m[0, 1], zeta - m[0, 0]], dtype=complex)
    c2 = np.array([zeta - m[1, 1], m[1, 0]], dtype=complex)
    v = c1 if np.linalg.norm(c1) >= np.linalg.norm(c2) else c2
    n = np.linalg.norm(v)
    if n <= 1e-14 * max(1.0, scale):
        return None
    return v / n


def eig2(m: np.ndarray) -> Eig2:
    """Eigenvalues and unit eigenvectors of a 2x2 complex matrix.

    zeta_plus and zeta_minus use the + and - branch of
    (tr +/- branch_sqrt(tr^2 - 4 det)) / 2. A (numerically) repeated
    eigenvalue sets the degenerate flag; a defective matrix then reports the
    single eigendirection for both vectors.
    """
    tr = m[0, 0] + m[1, 1]
    det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
    disc = tr * tr - 4.0 * det
    scale = max(1.0, abs(tr) ** 2)
    degenerate = abs(disc) <= DEGENERATE_TOL * scale
    s = branch_sqrt(disc)
    zp = 0.5 * (tr + s)
    zm = 0.5 * (tr - s)
    vp = _eigenvector(m, zp, float(np.abs(m).max()))
    vm = _eigenvector(m, zm, float(np.abs(m).max()))
    if vp is None and vm is None:
        # m is (close to) a multiple of the identity: any orthonormal pair.
        vp = np.array([1.0, 0.0], dtype=complex)
        vm = np.array([0.0, 1.0], dtype=complex)
        degenerate = True
    elif vp is None:
        vp = vm
        degenerate = True
    elif vm is None:
        vm = vp
        degenerate = True
    return Eig2(zp, zm, vp, vm, degenerate)


def mat3_is_unitary(c: np.ndarray, tol: float) -> bool:
    """True iff the max-norm of C^dagger C - I is at most tol."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    c = np.asarray(c, dtype=complex)
    return bool(np.abs(c.conj().T @ c - np.eye(3)).max() <= tol)


def cross2(u: np.ndarray, v: np.ndarray) -> complex:
    """Cross product on C^2: [u1 u2] x [v1 v2] = u1 v2 - u2 v1."""
    return u[0] * v[1] - u[1] * v[0]


def phase_fix(v: np.ndarray, tol: float = 1e-14) -> np.ndarray:
    """Rotate a vector's global phase so its first non-negligible entry is real positive."""
    mx = float(np.abs(v).max(initial=0.0))
    if mx == 0.0:
        return v
    for entry in v.flat:
        if abs(entry) > tol * mx:
            return v * (entry.conjugate() / abs(entry))
    return v
