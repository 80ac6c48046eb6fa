"""Switch-count upper bounds and the exponential-polynomial zero-counting oracle.

Two bounds per channel: the spectral-support bound (one less than the number
of eigenvalue groups the channel projects onto) and the sign-variation bound
on threshold-shifted partial coefficient sums. The shift matters: the
comparison signal crosses beta * v_i, not zero, so the constant term of the
exponential polynomial carries the threshold. Both the at-threshold and the
sup-over-thresholds variants are exposed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .costate import group_coefficients
from .errors import ContractError
from .graph import SpectralDecomposition


@dataclass(frozen=True)
class ChannelSwitchBounds:
    channel: int
    general: int
    linear_at_threshold: int | None
    linear_sup: int
    threshold_shift: float | None


@dataclass(frozen=True)
class SwitchBoundReport:
    channels: tuple[ChannelSwitchBounds, ...]


def bound_general(sd: SpectralDecomposition, b: np.ndarray, proj_tol: float | None = None) -> int:
    """Spectral-support switch bound: max(0, G - 1) over groups where b projects above tolerance."""
    bv = np.asarray(b, dtype=np.float64)
    if proj_tol is None:
        proj_tol = 1e-10 * max(1.0, float(np.linalg.norm(bv)))
    proj = sd.vectors.T @ bv
    count = sum(
        1 for grp in sd.groups if float(np.linalg.norm(proj[list(grp)])) > proj_tol
    )
    return max(0, count - 1)


def _sign_variations(values: np.ndarray, tol: float) -> int:
    """Strict sign alternations, skipping entries within tolerance of zero."""
    signs = [1 if v > tol else -1 for v in values if abs(v) > tol]
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def bound_linear(sd: SpectralDecomposition, p: np.ndarray, b: np.ndarray, shift) -> int:
    """Sign-variation switch bound for the linear objective with costate p.

    The sequence is the running sum of the group coefficients ordered by
    increasing rate, with the threshold ``shift`` subtracted (it enters the
    constant term, hence every partial sum). ``shift`` is a level s >= 0, or
    the string "sup" to maximize over all levels: the variation count is
    piecewise constant in s with breakpoints at the partial-sum values, so
    it suffices to test s = 0, the midpoints between consecutive distinct
    partial sums, and one point beyond the largest.
    """
    _, coeffs = group_coefficients(sd, np.asarray(p, dtype=np.float64), np.asarray(b, dtype=np.float64))
    ctol = 1e-12 * max(
        1.0, float(np.linalg.norm(p)) * float(np.linalg.norm(b))
    )
    coeffs = np.where(np.abs(coeffs) <= ctol, 0.0, coeffs)
    partial = np.cumsum(coeffs)
    stol = 1e-12 * max(1.0, float(np.sum(np.abs(coeffs))))

    if isinstance(shift, str):
        if shift != "sup":
            raise ContractError(f"shift must be a nonnegative level or 'sup', got {shift!r}")
        vals = np.unique(partial)
        candidates = [0.0]
        candidates.extend(
            0.5 * (lo + hi) for lo, hi in zip(vals[:-1], vals[1:]) if 0.5 * (lo + hi) >= 0.0
        )
        beyond = float(vals[-1]) + max(1.0, abs(float(vals[-1])))
        if beyond >= 0.0:
            candidates.append(beyond)
        return max(_sign_variations(partial - s, stol) for s in candidates)

    s = float(shift)
    if s < 0.0:
        raise ContractError(f"threshold shift must be nonnegative, got {s}")
    return _sign_variations(partial - s, stol)


def _eval_exp_poly(rates: np.ndarray, coeffs: np.ndarray, ts: np.ndarray) -> np.ndarray:
    return np.exp(np.multiply.outer(ts, rates)) @ coeffs


def _bisect_root(f, lo: float, hi: float, flo: float, tol: float) -> float:
    for _ in range(200):
        if hi - lo <= tol:
            break
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if fm == 0.0:
            return mid
        if (fm > 0.0) == (flo > 0.0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def count_exp_poly_zeros(
    rates, coeffs, window: tuple[float, float], resolution: int = 4096
) -> int:
    """Numerically count zeros of f(t) = sum_g d_g exp(rate_g t) on a window.

    Sign changes on a uniform grid are refined by bisection to 1e-12 of the
    window width. Tangential (even-order) zeros are hunted via sign changes
    of f' and counted with multiplicity 2 when the extremum value sits at
    zero within tolerance. This is the brute-force oracle that the
    zero-counting lemmas are tested against, so it stays independent of the
    sign-variation machinery above.
    """
    rates = np.asarray(rates, dtype=np.float64)
    coeffs = np.asarray(coeffs, dtype=np.float64)
    if rates.shape != coeffs.shape or rates.ndim != 1:
        raise ContractError("rates and coeffs must be 1-d arrays of equal length")
    if not np.any(coeffs):
        raise ContractError("all coefficients are zero; the zero count is undefined")
    t_lo, t_hi = float(window[0]), float(window[1])
    if not (np.isfinite(t_lo) and np.isfinite(t_hi) and t_lo < t_hi):
        raise ContractError(f"window must be a finite increasing pair, got {window}")
    if resolution < 2:
        raise ContractError("resolution must be at least 2 points")

    ts = np.linspace(t_lo, t_hi, resolution)
    vals = _eval_exp_poly(rates, coeffs, ts)
    ztol = 1e-12 * max(1.0, float(np.max(np.abs(vals))))
    ttol = 1e-12 * max(1.0, t_hi - t_lo)

    f = lambda t: float(_eval_exp_poly(rates, coeffs, np.array([t]))[0])

    nz = np.flatnonzero(np.abs(vals) > ztol)
    roots: list[float] = []
    for a_idx, b_idx in zip(nz[:-1], nz[1:]):
        if (vals[a_idx] > 0.0) != (vals[b_idx] > 0.0):
            root = _bisect_root(f, ts[a_idx], ts[b_idx], vals[a_idx], ttol)
            # Refinement also dedupes: chatter around one zero collapses here.
            if not roots or root - roots[-1] > ttol:
                roots.append(root)
    count = len(roots)

    # Tangential zeros: bracket extrema via f' and test the extremum value.
    dcoeffs = coeffs * rates
    if np.any(dcoeffs):
        dvals = _eval_exp_poly(rates, dcoeffs, ts)
        df = lambda t: float(_eval_exp_poly(rates, dcoeffs, np.array([t]))[0])
        dnz = np.flatnonzero(np.abs(dvals) > 0.0)
        for a_idx, b_idx in zip(dnz[:-1], dnz[1:]):
            if (dvals[a_idx] > 0.0) != (dvals[b_idx] > 0.0):
                t_star = _bisect_root(df, ts[a_idx], ts[b_idx], dvals[a_idx], ttol)
                # Only an even-order zero if f does not change sign there.
                fa, fb = f(ts[a_idx]), f(ts[b_idx])
                if (
                    abs(f(t_star)) <= ztol
                    and abs(fa) > ztol
                    and abs(fb) > ztol
                    and (fa > 0.0) == (fb > 0.0)
                ):
                    count += 2
    return count


def switch_bound_report(
    sd: SpectralDecomposition,
    channels,
    p: np.ndarray,
    beta_star: float | None = None,
) -> SwitchBoundReport:
    """Assemble both bounds per channel; threshold-shift bounds need beta_star."""
    rows = []
    for k, ch in enumerate(channels, start=1):
        shift = None
        at_threshold = None
        if beta_star is not None:
            shift = beta_star * ch.max_cost_rate / ch.u_max
            at_threshold = bound_linear(sd, p, ch.b, shift)
        rows.append(
            ChannelSwitchBounds(
                channel=k,
                general=bound_general(sd, ch.b),
                linear_at_threshold=at_threshold,
                linear_sup=bound_linear(sd, p, ch.b, "sup"),
                threshold_shift=shift,
            )
        )
    return SwitchBoundReport(channels=tuple(rows))
