import numpy as np
import pytest

from qw3.coin import (
    field_homogeneous,
    field_one_defect,
    field_two_phase,
    make_fourier,
    make_grover,
    phase_scale,
)
from qw3.evolution import apply_u
from qw3.linalg import TAU
from qw3.spectral import (
    asymptotic_spectrum,
    build_eigenvector,
    chi,
    find_roots,
    lambda0_adjudicate,
    lambda0_set,
    operator_residual,
)
from qw3.transfer import a_zero, transfer_at

from conftest import THETAS, random_coin

OMEGA = np.exp(2j * np.pi / 3)
FOURIER_DELTA = -1j  # determinant of the 3-point DFT coin


def sample_valid(rng, coin):
    while True:
        lam = rng.uniform(0, TAU)
        if not a_zero(coin, lam):
            return lam


def test_decay_rate_product_has_unit_modulus(rng):
    for _ in range(1000):
        c = random_coin(rng)
        lam = sample_valid(rng, c)
        spectrum = asymptotic_spectrum(c, lam)
        assert abs(abs(spectrum.zeta_less * spectrum.zeta_greater) - 1.0) <= 1e-10
        assert abs(spectrum.zeta_less) <= abs(spectrum.zeta_greater) + 1e-12


def test_outside_arcs_both_rates_on_unit_circle(rng):
    count = 0
    for _ in range(2000):
        c = random_coin(rng)
        lam = sample_valid(rng, c)
        spectrum = asymptotic_spectrum(c, lam)
        if not spectrum.in_lambda:
            count += 1
            assert abs(abs(spectrum.zeta_less) - 1.0) <= 1e-8
            assert abs(abs(spectrum.zeta_greater) - 1.0) <= 1e-8
    assert count > 50  # the sample actually exercised the branch


def test_eigenpair_certification_inside_arcs(rng):
    seen = 0
    while seen < 1000:
        c = random_coin(rng)
        lam = sample_valid(rng, c)
        spectrum = asymptotic_spectrum(c, lam)
        if not spectrum.in_lambda:
            continue
        seen += 1
        t = transfer_at(c, lam).matrix
        assert np.linalg.norm(t @ spectrum.v_less - spectrum.zeta_less * spectrum.v_less) <= 1e-9
        assert (
            np.linalg.norm(t @ spectrum.v_greater - spectrum.zeta_greater * spectrum.v_greater)
            <= 1e-9
        )


def test_asymptotic_spectrum_rejects_degenerate_phase():
    with pytest.raises(ValueError, match="adjudicated separately"):
        asymptotic_spectrum(make_grover(), 0.0)


def test_fourier_arcs_form_finite_union():
    # tabulated |tr| - 2 changes sign finitely often: three arcs for this coin
    coin = make_fourier()
    n = 10_000
    inside = []
    for i in range(n):
        data = transfer_at(coin, i * TAU / n)
        if data.zero_flag:
            inside.append(inside[-1] if inside else False)
            continue
        tr = data.matrix[0, 0] + data.matrix[1, 1]
        inside.append(abs(tr) > 2.0)
    changes = sum(1 for i in range(n) if inside[i] != inside[(i + 1) % n])
    assert changes == 6
    assert any(inside) and not all(inside)


def test_chi_homogeneous_never_vanishes_on_arcs():
    field = field_homogeneous(make_fourier())
    guards = lambda0_set(field)
    floor = np.inf
    hits = 0
    for i in range(2000):
        s = chi(field, i * TAU / 2000, guards)
        if s.value is not None and s.in_lambda:
            hits += 1
            floor = min(floor, abs(s.value))
    assert hits > 100
    assert floor > 1e-2  # no roots anywhere near acceptance threshold


def test_chi_flags_outside_arcs():
    field = field_homogeneous(make_fourier())
    s = chi(field, 0.0)
    assert not s.in_lambda and s.value is None


def test_chi_near_guard_flag():
    field = field_homogeneous(make_fourier())
    lam0 = lambda0_set(field)[0]
    assert chi(field, lam0 + 5e-7).near_lambda0
    assert not chi(field, lam0 + 5e-3).near_lambda0


def test_find_roots_one_defect_counts_and_certificates():
    field = field_one_defect(make_fourier(), phase_scale(make_fourier(), np.pi / 12))
    scan = find_roots(field, grid_n=4000, refine_tol=1e-12)
    assert len(scan.records) == 3
    assert scan.diagnostics == []
    guards = lambda0_set(field)
    for r in scan.records:
        assert r.source == "chi-root"
        assert r.chi_residual <= 1e-8
        assert r.op_residual <= 1e-8
        assert abs(r.zeta_right) <= 1.0 - 1e-6
        assert abs(r.zeta_left) >= 1.0 + 1e-6
        # local-minimum certificate
        for off in (-1e-11, 1e-11):
            bumped = chi(field, r.lam + off, guards)
            assert abs(bumped.value) > r.chi_residual
        # records are sorted
    lams = [r.lam for r in scan.records]
    assert lams == sorted(lams)


def test_find_roots_validates_arguments():
    field = field_homogeneous(make_fourier())
    with pytest.raises(ValueError, match="grid_n"):
        find_roots(field, grid_n=100)
    with pytest.raises(ValueError, match="refine_tol"):
        find_roots(field, refine_tol=0.0)


def test_lambda0_sets_fourier_models():
    # one coin contributes the angle of conj(w) e^{i Delta}, the phase-shifted
    # one adds theta; one-defect and two-phase fields share the same pair
    for theta in THETAS:
        shifted = phase_scale(make_fourier(), theta)
        base_angle = np.angle(np.conj(OMEGA) * FOURIER_DELTA) % TAU
        expected = sorted(
            [base_angle, (base_angle + theta) % TAU]
        )
        for field in (
            field_one_defect(make_fourier(), shifted),
            field_two_phase(make_fourier(), shifted),
        ):
            got = lambda0_set(field)
            assert len(got) == 2
            assert max(abs(g - e) for g, e in zip(got, expected)) < 1e-12


def test_lambda0_adjudicate_fourier_models_empty():
    for theta in THETAS:
        shifted = phase_scale(make_fourier(), theta)
        assert lambda0_adjudicate(field_one_defect(make_fourier(), shifted)) == []
        assert lambda0_adjudicate(field_two_phase(make_fourier(), shifted)) == []


def test_lambda0_adjudicate_homogeneous_grover():
    records = lambda0_adjudicate(field_homogeneous(make_grover()))
    assert len(records) == 1
    r = records[0]
    assert r.source == "lambda0-compact"
    assert abs(np.exp(1j * r.lam) - 1.0) < 1e-12
    assert r.op_residual <= 1e-8
    assert r.zeta_left == 0 and r.zeta_right == 0  # compactly supported
    # the eigenvector occupies finitely many sites
    occupied = np.nonzero(r.eigvec.site_norms() > 1e-12)[0]
    assert len(occupied) <= 3


def test_lambda0_adjudicate_homogeneous_fourier_empty():
    assert lambda0_adjudicate(field_homogeneous(make_fourier())) == []


def test_build_eigenvector_properties():
    field = field_one_defect(make_fourier(), phase_scale(make_fourier(), 3 * np.pi / 12))
    record = find_roots(field, grid_n=2000).records[0]
    psi = record.eigvec
    assert abs(psi.norm() - 1.0) < 1e-10
    # geometric tails: consecutive site-norm ratios approach the decay rates
    norms = psi.site_norms()
    xs = np.arange(psi.lo, psi.hi + 1)
    right = (xs > field.x_plus + 2) & (norms > 1e-9)
    ratios = norms[1:][right[1:]] / norms[:-1][right[1:]]
    assert np.abs(ratios - abs(record.zeta_right)).max() < 1e-6
    left = (xs < field.x_minus - 2) & (norms > 1e-9)
    ratios_l = norms[1:][left[:-1]] / norms[:-1][left[:-1]]
    assert np.abs(ratios_l - abs(record.zeta_left)).max() < 1e-6


def test_build_eigenvector_window_too_small():
    field = field_one_defect(make_fourier(), phase_scale(make_fourier(), 3 * np.pi / 12))
    lam = find_roots(field, grid_n=2000).records[0].lam
    with pytest.raises(ValueError, match="window.*too small"):
        build_eigenvector(field, lam, window=(-2, 2))


def test_build_eigenvector_rejects_phase_outside_arcs():
    field = field_homogeneous(make_fourier())
    with pytest.raises(ValueError, match="outside the allowed arcs"):
        build_eigenvector(field, 0.0)


def test_eigenvector_satisfies_eigen_equation():
    # independent certification through the direct simulator
    field = field_two_phase(make_fourier(), phase_scale(make_fourier(), 11 * np.pi / 12))
    scan = find_roots(field, grid_n=4000)
    assert len(scan.records) == 3
    for r in scan.records:
        psi = r.eigvec
        stepped = apply_u(field, psi)
        target = np.exp(1j * r.lam) * psi.amps
        assert np.linalg.norm(stepped.amps - target) <= 1e-8


def test_operator_residual_matches_apply_u():
    field = field_homogeneous(make_grover())
    r = lambda0_adjudicate(field)[0]
    assert operator_residual(field, r.lam, r.eigvec) == r.op_residual


def test_lambda0_interior_compact_chain():
    # two adjacent defect sites whose transfer matrices degenerate at the same
    # phase support an eigenvector pinched between them, even though the bulk
    # coin admits no compact tails there
    from qw3.coin import CoinField

    field = CoinField(make_fourier(), make_fourier(), -1, 1,
                      (make_grover(), make_grover()))
    records = lambda0_adjudicate(field)
    assert len(records) == 1
    r = records[0]
    assert abs(np.exp(1j * r.lam) - 1.0) < 1e-12
    assert r.op_residual <= 1e-8
    occupied = np.nonzero(r.eigvec.site_norms() > 1e-12)[0]
    assert len(occupied) <= 3


def _dense_walk_operator(field, half_width):
    n = 2 * half_width + 1
    coin_block = np.zeros((3 * n, 3 * n), dtype=complex)
    for i, x in enumerate(range(-half_width, half_width + 1)):
        coin_block[3 * i : 3 * i + 3, 3 * i : 3 * i + 3] = field.lookup(x).mat
    shift = np.zeros((3 * n, 3 * n))
    for i in range(n):
        if i + 1 < n:
            shift[3 * i, 3 * (i + 1)] = 1.0
        shift[3 * i + 1, 3 * i + 1] = 1.0
        if i >= 1:
            shift[3 * i + 2, 3 * (i - 1) + 2] = 1.0
    return shift @ coin_block


def _dense_point_spectrum(field, half_width):
    """Localized eigenphases of the truncated operator (brute-force oracle)."""
    vals, vecs = np.linalg.eig(_dense_walk_operator(field, half_width))
    angles = []
    for j in range(len(vals)):
        if abs(abs(vals[j]) - 1.0) > 1e-8:
            continue
        v = vecs[:, j] / np.linalg.norm(vecs[:, j])
        if max(np.abs(v[:3]).max(), np.abs(v[-3:]).max()) > 1e-7:
            continue  # touches the truncation boundary
        angles.append(float(np.angle(vals[j]) % TAU))
    angles.sort()
    merged = []
    for a in angles:
        if not merged or min(abs(a - merged[-1]), TAU - abs(a - merged[-1])) > 1e-6:
            merged.append(a)
    return merged


def test_roots_match_dense_diagonalization():
    # full point spectrum against an oracle that knows nothing about the
    # transfer reduction: dense diagonalization of the truncated operator
    field = field_one_defect(make_fourier(), phase_scale(make_fourier(), 3 * np.pi / 12))
    mine = sorted(
        [r.lam for r in find_roots(field).records]
        + [r.lam for r in lambda0_adjudicate(field)]
    )
    brute = _dense_point_spectrum(field, 60)
    assert len(mine) == len(brute) == 4
    assert max(abs(a - b) for a, b in zip(mine, brute)) < 1e-9


def test_mixed_field_matches_dense_diagonalization():
    # same cross-check on the field with an interior compact chain: the
    # degenerate-phase record and all scan roots appear in the dense spectrum
    from qw3.coin import CoinField

    field = CoinField(make_fourier(), make_fourier(), -1, 1,
                      (make_grover(), make_grover()))
    mine = sorted(
        [r.lam for r in find_roots(field).records]
        + [r.lam for r in lambda0_adjudicate(field)]
    )
    brute = _dense_point_spectrum(field, 60)
    assert len(mine) == len(brute) == 5
    assert max(abs(a - b) for a, b in zip(mine, brute)) < 1e-6
