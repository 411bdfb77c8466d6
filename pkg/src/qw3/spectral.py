"""Point-spectrum analysis: allowed arcs, the chi matching function, root
scanning with refinement, and reconstruction of localized eigenvectors.

An eigenphase candidate lam admits a square-summable eigenvector iff the
reduced state can decay on both half-lines and the interior transfer chain
connects the two decaying directions. chi(lam) measures the mismatch: it is
the cross product of the left-growing direction propagated through the window
against the right-decaying direction, and its zeros on the allowed arcs are
exactly the eigenphases. The finitely many phases where a transfer matrix
cannot be built are adjudicated separately through their rank-one constraint
chains.
"""

from __future__ import annotations

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .coin import CoinField, CoinMatrix
from .evolution import StateVector, apply_u
from .linalg import TAU, cross2, eig2, phase_fix
from .transfer import (
    ReducedState,
    a_zero,
    compact_support_condition,
    iota_inverse,
    lambda0_angle,
    transfer_at,
    zero_case_vectors,
)

log = logging.getLogger(__name__)

# |tr| must exceed 2 by this margin before a phase counts as inside the
# allowed arcs; the boundary band has measure zero and carries no roots.
TR_TOL = 1e-9

# A refined |chi| minimum at or below this value is accepted as a root.
CHI_ACCEPT = 1e-8

# Scan guard radius around the degenerate phases (transfer matrix blows up
# as its leading coefficient vanishes, poisoning refinement).
LAMBDA0_GUARD = 1e-6

# Certification threshold for ||U psi - e^{i lam} psi|| of accepted records.
RESIDUAL_TOL = 1e-8

# Accepted decay rates must be bounded away from the unit circle.
DECAY_MARGIN = 1e-6

# Two unit vectors are considered parallel when |cross| is below this.
PARALLEL_TOL = 1e-10

_GOLDEN_MAX_ITER = 200
_TAIL_CUTOFF = 1e-12


def _angle_dist(a: float, b: float) -> float:
    d = abs(a - b) % TAU
    return min(d, TAU - d)


@dataclass(frozen=True)
class AsymptoticSpectrum:
    """Spectral data of one coin's transfer matrix at one phase.

    zeta_less / zeta_greater are the eigenvalues with modulus <= 1 and >= 1
    (their product has unit modulus); in_lambda reports |tr| > 2 + TR_TOL,
    the open condition under which the moduli split strictly and decaying
    tails exist.
    """

    zeta_less: complex
    zeta_greater: complex
    v_less: np.ndarray
    v_greater: np.ndarray
    in_lambda: bool


def asymptotic_spectrum(coin: CoinMatrix, lam: float) -> AsymptoticSpectrum:
    """Eigen-decomposition of the transfer matrix of a homogeneous region."""
    data = transfer_at(coin, lam)
    if data.zero_flag:
        raise ValueError(
            f"transfer matrix degenerates at lam={lam!r}; this phase belongs to "
            "the exceptional set and must be adjudicated separately"
        )
    t = data.matrix
    tr = t[0, 0] + t[1, 1]
    pairs = eig2(t)
    # |tr| > 2 with unit |det| already rules out a repeated eigenvalue; the
    # explicit check keeps a defective pair out of the arcs regardless
    in_lambda = bool(abs(tr) > 2.0 + TR_TOL) and not pairs.degenerate
    if abs(pairs.zeta_plus) <= abs(pairs.zeta_minus):
        return AsymptoticSpectrum(
            pairs.zeta_plus, pairs.zeta_minus, pairs.v_plus, pairs.v_minus, in_lambda
        )
    return AsymptoticSpectrum(
        pairs.zeta_minus, pairs.zeta_plus, pairs.v_minus, pairs.v_plus, in_lambda
    )


def lambda0_set(field: CoinField) -> list[float]:
    """Sorted degenerate phases of all distinct coins (deduplicated)."""
    angles: list[float] = []
    for coin in field.distinct_coins():
        ang = lambda0_angle(coin)
        if ang is None:
            continue
        if not any(_angle_dist(ang, seen) <= 1e-12 for seen in angles):
            angles.append(ang)
    return sorted(angles)


@dataclass(frozen=True)
class ChiSample:
    """chi evaluated at one phase, with validity flags.

    value is None when a transfer matrix in the chain cannot be built (which
    only happens in the immediate vicinity of a degenerate phase).
    """

    lam: float
    value: complex | None
    in_lambda: bool
    near_lambda0: bool


def chi(
    field: CoinField, lam: float, lambda0_angles: list[float] | None = None
) -> ChiSample:
    """Boundary-matching function whose zeros on the allowed arcs are eigenphases.

    chi(lam) = (T_{x_plus} ... T_{x_minus} v_greater(-inf)) x v_less(+inf),
    the ordered transfer product over the window applied to the left tail's
    growing eigendirection, crossed against the right tail's decaying one.
    """
    if lambda0_angles is None:
        lambda0_angles = lambda0_set(field)
    near = any(_angle_dist(lam, g) < LAMBDA0_GUARD for g in lambda0_angles)
    if a_zero(field.c_minus, lam) or a_zero(field.c_plus, lam):
        return ChiSample(lam, None, False, True)
    spec_minus = asymptotic_spectrum(field.c_minus, lam)
    spec_plus = asymptotic_spectrum(field.c_plus, lam)
    in_lambda = spec_minus.in_lambda and spec_plus.in_lambda
    if not in_lambda:
        return ChiSample(lam, None, False, near)
    v = spec_minus.v_greater
    for x in range(field.x_minus, field.x_plus + 1):
        data = transfer_at(field.lookup(x), lam)
        if data.zero_flag:
            return ChiSample(lam, None, in_lambda, True)
        v = data.matrix @ v
    return ChiSample(lam, cross2(v, spec_plus.v_less), in_lambda, near)


@dataclass(frozen=True)
class EigenvalueRecord:
    """One certified point-spectrum member e^{i lam} with its eigenvector.

    zeta_right is the geometric decay rate for x >= x_plus and zeta_left the
    growth rate governing the left tail; both are 0 for purely compact
    (finitely supported) eigenvectors. chi_residual is |chi| at the refined
    root (0 for records found by the degenerate-phase adjudication, where chi
    is not defined). op_residual is ||U psi - e^{i lam} psi|| with U applied
    by the direct simulator.
    """

    lam: float
    chi_residual: float
    zeta_left: complex
    zeta_right: complex
    eigvec: StateVector
    op_residual: float
    source: str  # "chi-root" or "lambda0-compact"


@dataclass
class RootScan:
    """Outcome of a root scan: certified records plus non-fatal diagnostics."""

    records: list[EigenvalueRecord]
    diagnostics: list[dict]


def operator_residual(field: CoinField, lam: float, psi: StateVector) -> float:
    """||U psi - e^{i lam} psi|| / ||psi||, U applied by the direct simulator."""
    pad = 2
    lo, hi = psi.lo - pad, psi.hi + pad
    amps = np.zeros((hi - lo + 1, 3), dtype=complex)
    amps[pad : pad + psi.amps.shape[0]] = psi.amps
    embedded = StateVector(lo, hi, amps)
    stepped = apply_u(field, embedded)
    diff = stepped.amps - np.exp(1j * lam) * amps
    return float(np.linalg.norm(diff) / np.linalg.norm(amps))


def _canonical(psi: StateVector) -> StateVector:
    # anchor the global phase on a non-negligible entry, not a decayed tail
    unit = psi.normalized()
    amps = phase_fix(unit.amps.reshape(-1), tol=1e-6).reshape(-1, 3)
    return StateVector(unit.lo, unit.hi, amps)


def _tail_lengths(rate_left: float, rate_right: float) -> tuple[int, int]:
    # Sites needed before a geometric tail drops below _TAIL_CUTOFF.
    def count(rate: float) -> int:
        if rate <= 0.0 or rate >= 1.0 - 1e-12:
            return 100_000
        return int(np.ceil(np.log(_TAIL_CUTOFF) / np.log(rate)))

    return max(5, min(count(rate_left), 100_000)), max(5, min(count(rate_right), 100_000))


def build_eigenvector(
    field: CoinField, lam: float, window: tuple[int, int] | None = None
) -> StateVector:
    """Reconstruct the (unit, phase-fixed) eigenvector for an eigenphase lam.

    The reduced state is the left tail's growing eigendirection, decayed
    geometrically for x <= x_minus, pushed through the window by the transfer
    chain, and continued with the right decay rate for x >= x_plus; it is then
    lifted back to three components. Raises if the supplied window cannot hold
    the tails down to the 1e-12 cutoff.
    """
    spec_minus = asymptotic_spectrum(field.c_minus, lam)
    spec_plus = asymptotic_spectrum(field.c_plus, lam)
    if not (spec_minus.in_lambda and spec_plus.in_lambda):
        raise ValueError(f"lam={lam!r} lies outside the allowed arcs")
    zg = spec_minus.zeta_greater
    zl = spec_plus.zeta_less
    m_left, m_right = _tail_lengths(1.0 / abs(zg), abs(zl))
    lo, hi = field.x_minus - m_left, field.x_plus + m_right
    if window is not None:
        if window[0] > lo or window[1] < hi:
            raise ValueError(
                f"window {window} too small: tails need [{lo}, {hi}] "
                f"(m_left={m_left}, m_right={m_right})"
            )
        lo, hi = window
    values = np.zeros((hi - lo + 1, 2), dtype=complex)
    v = spec_minus.v_greater.copy()
    values[field.x_minus - lo] = v
    for x in range(field.x_minus, field.x_plus):
        v = transfer_at(field.lookup(x), lam).matrix @ v
        values[x + 1 - lo] = v
    anchor_right = values[field.x_plus - lo].copy()
    for j in range(1, hi - field.x_plus + 1):
        values[field.x_plus + j - lo] = (zl**j) * anchor_right
    anchor_left = values[field.x_minus - lo].copy()
    for j in range(1, field.x_minus - lo + 1):
        values[field.x_minus - j - lo] = (zg ** (-j)) * anchor_left
    reduced = ReducedState(lo, hi, values)
    return _canonical(iota_inverse(reduced, field, lam))


def _golden_min(f, a: float, b: float, tol: float) -> tuple[float, float, bool]:
    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    c = b - (b - a) * invphi
    d = a + (b - a) * invphi
    fc, fd = f(c), f(d)
    for _ in range(_GOLDEN_MAX_ITER):
        if b - a <= tol:
            x = 0.5 * (a + b)
            return x, f(x), True
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - (b - a) * invphi
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + (b - a) * invphi
            fd = f(d)
    x = 0.5 * (a + b)
    return x, f(x), False


def grid_samples(field: CoinField, grid_n: int) -> list[ChiSample]:
    """chi on the uniform grid over [0, 2pi), parallelized per QW3_THREADS."""
    guards = lambda0_set(field)
    lams = np.arange(grid_n) * (TAU / grid_n)
    return _grid_samples(field, lams, guards)


def _grid_samples(
    field: CoinField, lams: np.ndarray, guards: list[float]
) -> list[ChiSample]:
    workers = int(os.environ.get("QW3_THREADS", "1") or "1")
    if workers <= 1 or len(lams) < 256:
        return [chi(field, float(l), guards) for l in lams]
    chunks = np.array_split(np.arange(len(lams)), 4 * workers)
    out: list[ChiSample | None] = [None] * len(lams)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        def work(idx: np.ndarray) -> list[tuple[int, ChiSample]]:
            return [(int(i), chi(field, float(lams[i]), guards)) for i in idx]

        for batch in pool.map(work, chunks):
            for i, sample in batch:
                out[i] = sample
    return out  # type: ignore[return-value]


def _make_record(
    field: CoinField, lam: float, chi_abs: float, diagnostics: list[dict]
) -> EigenvalueRecord | None:
    spec_minus = asymptotic_spectrum(field.c_minus, lam)
    spec_plus = asymptotic_spectrum(field.c_plus, lam)
    zl, zg = spec_plus.zeta_less, spec_minus.zeta_greater
    if abs(zl) > 1.0 - DECAY_MARGIN or abs(zg) < 1.0 + DECAY_MARGIN:
        diagnostics.append(
            {"kind": "marginal-decay", "lambda": lam,
             "zeta_right_abs": abs(zl), "zeta_left_abs": abs(zg)}
        )
        return None
    psi = build_eigenvector(field, lam)
    residual = operator_residual(field, lam, psi)
    if residual > RESIDUAL_TOL:
        diagnostics.append(
            {"kind": "residual-violation", "lambda": lam, "op_residual": residual}
        )
        return None
    return EigenvalueRecord(lam, chi_abs, zg, zl, psi, residual, "chi-root")


def find_roots(
    field: CoinField, grid_n: int = 4000, refine_tol: float = 1e-12
) -> RootScan:
    """Locate all eigenphases on the allowed arcs by scanning |chi|.

    Samples chi on a uniform grid over [0, 2pi) restricted to the allowed
    arcs (excluding a guard around the degenerate phases), brackets each local
    minimum of |chi|^2, narrows it by golden-section search to width
    refine_tol, and accepts the minimizer as a root iff |chi| <= CHI_ACCEPT
    there. Each accepted root is certified by reconstructing its eigenvector
    and checking the one-step residual against the direct simulator.
    """
    if grid_n < 1000:
        raise ValueError("grid_n must be at least 1000")
    if refine_tol <= 0:
        raise ValueError("refine_tol must be positive")
    guards = lambda0_set(field)
    lams = np.arange(grid_n) * (TAU / grid_n)
    samples = _grid_samples(field, lams, guards)
    ok = np.array(
        [s.value is not None and s.in_lambda and not s.near_lambda0 for s in samples]
    )
    y = np.array(
        [abs(s.value) ** 2 if ok[i] else np.inf for i, s in enumerate(samples)]
    )

    def objective(t: float) -> float:
        sample = chi(field, t % TAU, guards)
        if sample.value is None or not sample.in_lambda:
            return np.inf
        return abs(sample.value) ** 2

    diagnostics: list[dict] = []
    found: list[tuple[float, float]] = []
    h = TAU / grid_n
    for i in range(grid_n):
        prev_i, next_i = (i - 1) % grid_n, (i + 1) % grid_n
        if not (ok[prev_i] and ok[i] and ok[next_i]):
            continue
        if not (y[i] <= y[prev_i] and y[i] <= y[next_i]):
            continue
        x, fx, converged = _golden_min(objective, lams[i] - h, lams[i] + h, refine_tol)
        if not converged:
            diagnostics.append({"kind": "refine-nonconverged", "lambda": x % TAU})
            continue
        if np.sqrt(fx) <= CHI_ACCEPT:
            found.append((x % TAU, float(np.sqrt(fx))))
            # a simple root has |chi| growing linearly off the minimum; an
            # anomalously small slope would hint at a tangential (double) zero
            delta = max(1e-7, 10.0 * refine_tol)
            slope = (np.sqrt(objective(x + delta)) + np.sqrt(objective(x - delta))) / (
                2.0 * delta
            )
            if slope < 1e-3:
                diagnostics.append(
                    {"kind": "shallow-root", "lambda": x % TAU, "slope": float(slope)}
                )

    found.sort()
    records: list[EigenvalueRecord] = []
    for lam, chi_abs in found:
        if records and _angle_dist(lam, records[-1].lam) <= 1e-9:
            continue
        record = _make_record(field, lam, chi_abs, diagnostics)
        if record is not None:
            records.append(record)
    return RootScan(records, diagnostics)


# --- adjudication of the degenerate phases ---------------------------------


def _right_tail(field: CoinField, lam: float) -> tuple[np.ndarray | None, str, complex]:
    """Admissible direction of the reduced state at x_plus, seen from the right.

    Returns (direction or None, "compact"|"geometric", decay rate). None means
    only the zero tail is square-summable.
    """
    coin = field.c_plus
    if a_zero(coin, lam):
        left_vec, _ = zero_case_vectors(coin)
        return (left_vec if np.linalg.norm(left_vec) > 0 else None), "compact", 0j
    spectrum = asymptotic_spectrum(coin, lam)
    if not spectrum.in_lambda:
        return None, "geometric", 0j
    return spectrum.v_less, "geometric", spectrum.zeta_less


def _left_tail(field: CoinField, lam: float) -> tuple[np.ndarray | None, str, complex]:
    """Admissible direction at x_minus, seen from the left."""
    coin = field.c_minus
    if a_zero(coin, lam):
        _, right_vec = zero_case_vectors(coin)
        return (right_vec if np.linalg.norm(right_vec) > 0 else None), "compact", 0j
    spectrum = asymptotic_spectrum(coin, lam)
    if not spectrum.in_lambda:
        return None, "geometric", 0j
    return spectrum.v_greater, "geometric", spectrum.zeta_greater


def _propagate(field: CoinField, lam: float, start: np.ndarray, x_from: int, x_to: int):
    """Apply the transfer chain over sites [x_from, x_to); None on a degenerate hit."""
    values = [start]
    v = start
    for x in range(x_from, x_to):
        data = transfer_at(field.lookup(x), lam)
        if data.zero_flag:
            return None
        v = data.matrix @ v
        values.append(v)
    return values


def _segment_solutions(field: CoinField, lam: float) -> list[tuple[int, list[np.ndarray]]]:
    """Nonzero solutions of the rank-one constraint chain at a degenerate phase.

    The window splits into segments at the sites whose transfer matrix cannot
    be built. Each segment is anchored on a one-dimensional subspace at its
    left end (the boundary tail direction, or the rank-one direction handed
    over by the break on its left) and must land, after the transfer chain, on
    the subspace required at its right end. Every viable segment yields an
    independent eigenvector; segments are returned as (start position, values).
    """
    xm, xp = field.x_minus, field.x_plus
    v_left, _, _ = _left_tail(field, lam)
    v_right, _, _ = _right_tail(field, lam)
    breaks = [x for x in range(xm, xp) if a_zero(field.lookup(x), lam)]

    segments: list[tuple[int, np.ndarray | None, int, np.ndarray | None]] = []
    start, anchor = xm, v_left
    for b in breaks:
        end_dir, next_anchor = zero_case_vectors(field.lookup(b))
        segments.append((start, anchor,
                         b, end_dir if np.linalg.norm(end_dir) > 0 else None))
        start = b + 1
        anchor = next_anchor if np.linalg.norm(next_anchor) > 0 else None
    segments.append((start, anchor, xp, v_right))

    solutions: list[tuple[int, list[np.ndarray]]] = []
    for start, anchor, end, end_dir in segments:
        if anchor is None or end_dir is None:
            continue
        values = _propagate(field, lam, anchor, start, end)
        if values is None:
            continue
        final = values[-1]
        n = np.linalg.norm(final)
        if n == 0.0 or abs(cross2(final / n, end_dir)) > PARALLEL_TOL:
            continue
        solutions.append((start, values))
    return solutions


def lambda0_adjudicate(field: CoinField) -> list[EigenvalueRecord]:
    """Decide, for each degenerate phase, whether it carries an eigenvalue.

    At such a phase the transfer recursion is replaced by rank-one constraints
    wherever it degenerates. Three mechanisms can produce a square-summable
    solution: a compactly supported bump inside an asymptotic region whose
    coin admits compact tails, a viable constraint-chain segment through the
    window, or a combination anchored on a geometrically decaying tail. Each
    phase that admits one yields a certified record; phases that admit none
    are dropped.
    """
    records: list[EigenvalueRecord] = []
    for lam in lambda0_set(field):
        solution = _lambda0_solution(field, lam)
        if solution is None:
            continue
        reduced, rate_left, rate_right = solution
        psi = _canonical(iota_inverse(reduced, field, lam))
        residual = operator_residual(field, lam, psi)
        if residual > RESIDUAL_TOL:
            log.warning("degenerate-phase candidate at lam=%.12f rejected: "
                        "residual %.3e", lam, residual)
            continue
        records.append(
            EigenvalueRecord(
                lam, 0.0, rate_left, rate_right, psi, residual, "lambda0-compact"
            )
        )
    return records


def _lambda0_solution(
    field: CoinField, lam: float
) -> tuple[ReducedState, complex, complex] | None:
    """A nonzero square-summable reduced state at a degenerate phase, or None.

    Returns the state together with the left/right decay rates actually used
    (0 on a side where the constructed solution is compactly supported).
    """
    xm, xp = field.x_minus, field.x_plus

    # Compact bump strictly inside an asymptotic region: possible only when
    # that region's coin pins both neighbouring constraints to one direction.
    if a_zero(field.c_plus, lam) and compact_support_condition(field.c_plus):
        direction, _ = zero_case_vectors(field.c_plus)
        if np.linalg.norm(direction) > 0:
            return ReducedState(xp + 1, xp + 1, direction[None, :]), 0j, 0j
    if a_zero(field.c_minus, lam) and compact_support_condition(field.c_minus):
        direction, _ = zero_case_vectors(field.c_minus)
        if np.linalg.norm(direction) > 0:
            return ReducedState(xm - 1, xm - 1, direction[None, :]), 0j, 0j

    solutions = _segment_solutions(field, lam)
    if not solutions:
        return None
    if len(solutions) > 1:
        log.info("degenerate phase lam=%.12f admits %d independent constraint-chain "
                 "solutions; building the leftmost", lam, len(solutions))
    start, values = solutions[0]
    end = start + len(values) - 1

    _, kind_left, rate_left = _left_tail(field, lam)
    _, kind_right, rate_right = _right_tail(field, lam)
    m_left = m_right = 0
    if not (start == xm and kind_left == "geometric" and np.linalg.norm(values[0]) > 0):
        rate_left = 0j
    if not (end == xp and kind_right == "geometric" and np.linalg.norm(values[-1]) > 0):
        rate_right = 0j
    if rate_left:
        m_left, _ = _tail_lengths(1.0 / abs(rate_left), 1.0)
    if rate_right:
        _, m_right = _tail_lengths(1.0, abs(rate_right))

    lo, hi = start - m_left, end + m_right
    grid = np.zeros((hi - lo + 1, 2), dtype=complex)
    for i, v in enumerate(values):
        grid[start - lo + i] = v
    for j in range(1, m_right + 1):
        grid[end - lo + j] = (rate_right**j) * values[-1]
    for j in range(1, m_left + 1):
        grid[start - lo - j] = (rate_left ** (-j)) * values[0]
    return ReducedState(lo, hi, grid), rate_left, rate_right
