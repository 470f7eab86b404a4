"""Haar wavelet denoising of trajectory coordinate series.

Positions are decomposed into approximation and detail coefficients,
the details are soft-thresholded at the universal level sigma*sqrt(2 ln N)
with a median-based noise estimate, and the series is reconstructed.
Velocities are then recomputed from the smoothed positions so the
kinematics stay consistent.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .types import KinematicState, VehicleTrack

log = logging.getLogger(__name__)

_SQRT2 = math.sqrt(2.0)
#: Gaussian consistency factor for the median absolute deviation
_MAD_FACTOR = 0.6745

DEFAULT_LEVELS = 3


@dataclass
class WaveletDecomposition:
    levels: int
    approximation: np.ndarray
    details: list[np.ndarray]  # finest level first
    original_length: int
    level_lengths: list[int]  # input length at each analysis step


def dwt_forward(series, levels: int) -> WaveletDecomposition:
    """Multi-level Haar analysis; odd lengths are padded by edge repetition."""
    x = np.asarray(series, dtype=float)
    if levels < 1:
        raise ValueError("levels must be >= 1")
    if x.ndim != 1 or len(x) < 2 ** levels:
        raise ValueError(
            f"series of length {len(x)} too short for {levels} levels")
    details: list[np.ndarray] = []
    level_lengths: list[int] = []
    approx = x
    for _ in range(levels):
        level_lengths.append(len(approx))
        if len(approx) % 2:
            approx = np.append(approx, approx[-1])
        a = approx[0::2]
        b = approx[1::2]
        details.append((a - b) / _SQRT2)
        approx = (a + b) / _SQRT2
    return WaveletDecomposition(
        levels=levels,
        approximation=approx,
        details=details,
        original_length=len(x),
        level_lengths=level_lengths,
    )


def dwt_inverse(decomp: WaveletDecomposition) -> np.ndarray:
    approx = decomp.approximation
    for detail, length in zip(reversed(decomp.details),
                              reversed(decomp.level_lengths)):
        out = np.empty(2 * len(approx))
        out[0::2] = (approx + detail) / _SQRT2
        out[1::2] = (approx - detail) / _SQRT2
        approx = out[:length]
    return approx


def universal_threshold(decomp: WaveletDecomposition) -> float:
    finest = decomp.details[0]
    sigma = float(np.median(np.abs(finest))) / _MAD_FACTOR
    return sigma * math.sqrt(2.0 * math.log(max(decomp.original_length, 2)))


def soft_threshold(coeffs: np.ndarray, lam: float) -> np.ndarray:
    return np.sign(coeffs) * np.maximum(np.abs(coeffs) - lam, 0.0)


def threshold_details(decomp: WaveletDecomposition,
                      rule: str = "universal_soft") -> WaveletDecomposition:
    """Suppress noise in the detail coefficients; approximation untouched."""
    if rule != "universal_soft":
        raise ValueError(f"unknown threshold rule: {rule}")
    lam = universal_threshold(decomp)
    return WaveletDecomposition(
        levels=decomp.levels,
        approximation=decomp.approximation.copy(),
        details=[soft_threshold(d, lam) for d in decomp.details],
        original_length=decomp.original_length,
        level_lengths=list(decomp.level_lengths),
    )


def denoise_series(series, levels: int) -> np.ndarray:
    """Threshold in the wavelet domain around a linear trend.

    The Haar basis has a single vanishing moment, so the motion trend of a
    travelling vehicle would otherwise leak into the detail coefficients
    and be distorted by the threshold; removing the least-squares line
    first leaves the details carrying only noise and manoeuvre detail.
    """
    x = np.asarray(series, dtype=float)
    i = np.arange(len(x))
    slope, intercept = np.polyfit(i, x, 1) if len(x) > 1 else (0.0, x[0])
    trend = slope * i + intercept
    residual = x - trend
    return trend + dwt_inverse(threshold_details(dwt_forward(residual, levels)))


def _central_diff(values: np.ndarray, frame_rate: float) -> np.ndarray:
    v = np.empty_like(values)
    if len(values) == 1:
        v[:] = 0.0
        return v
    v[1:-1] = (values[2:] - values[:-2]) * frame_rate / 2.0
    v[0] = (values[1] - values[0]) * frame_rate
    v[-1] = (values[-1] - values[-2]) * frame_rate
    return v


def denoise_track(track: VehicleTrack, levels: int = DEFAULT_LEVELS,
                  frame_rate: float = 25.0) -> VehicleTrack:
    """Denoise x(t) and y(t) of one track; too-short tracks pass through."""
    n = len(track.states)
    if n < 2 ** levels:
        log.warning("track %d: %d states too short for %d-level denoising, "
                    "returned unchanged", track.id, n, levels)
        return track
    xs = np.array([s.x for s in track.states])
    ys = np.array([s.y for s in track.states])
    xd = denoise_series(xs, levels)
    yd = denoise_series(ys, levels)
    vx = _central_diff(xd, frame_rate)
    vy = _central_diff(yd, frame_rate)
    states = [
        KinematicState(frame=s.frame, x=float(xd[i]), y=float(yd[i]),
                       vx=float(vx[i]), vy=float(vy[i]), heading=s.heading,
                       lane_id=s.lane_id)
        for i, s in enumerate(track.states)
    ]
    return VehicleTrack(id=track.id, vclass=track.vclass, length=track.length,
                        width=track.width, states=states)
