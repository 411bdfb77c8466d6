import numpy as np
import pytest

from qw3.coin import CoinMatrix

THETAS = (np.pi / 12, 3 * np.pi / 12, 7 * np.pi / 12, 11 * np.pi / 12)


def random_unitary(rng: np.random.Generator) -> np.ndarray:
    """Haar-ish random 3x3 unitary via QR with phase-fixed diagonal."""
    z = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    q, r = np.linalg.qr(z)
    return q @ np.diag(r.diagonal() / np.abs(r.diagonal()))


def random_coin(rng: np.random.Generator) -> CoinMatrix:
    """Random unitary coin satisfying the non-degeneracy constraints."""
    while True:
        m = random_unitary(rng)
        if max(abs(abs(m[0, 2])), abs(abs(m[1, 1])), abs(abs(m[2, 0]))) < 1 - 1e-6:
            return CoinMatrix(m)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240817)
