"""Exact fractional Gaussian noise and fractional Brownian motion sampling.

Uses circulant embedding (Davies-Harte): the Toeplitz autocovariance matrix
of fGN is embedded in a circulant of twice the size, whose eigenvalues are
the FFT of its first row.  Sampling then costs one inverse FFT per draw and
is exact: the output is a Gaussian vector with the true fGN covariance, not
an approximation.

The embedding size is rounded up to the next power of two; the extra samples
are discarded.  This keeps the transform on fast sizes and lets a single
cached plan serve every request of at most that length (the leading ``n``
coordinates of a longer exact fGN vector are themselves exact fGN).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "NonEmbeddableError",
    "FgnPlan",
    "FbmPath",
    "autocovariance",
    "build_plan",
    "sample_fgn",
    "sample_fgn_batch",
    "sample_path",
]

# Eigenvalues of the embedding are nonnegative in exact arithmetic for any
# Hurst index in (0,1); values below -EPS_EIG therefore indicate a bug rather
# than floating-point noise.
EPS_EIG = 1e-10

# Max tolerated imaginary residue when taking the FFT of the (real, symmetric)
# circulant row.
_IMAG_TOL = 1e-9


class NonEmbeddableError(ValueError):
    """Circulant embedding produced a significantly negative eigenvalue."""


def _check_hurst(h: float) -> float:
    h = float(h)
    if not 0.0 < h < 1.0:
        raise ValueError(f"Hurst index must lie in the open interval (0, 1), got {h}")
    return h


def autocovariance(h: float, lag):
    """Autocovariance gamma(lag) of unit-variance fGN with Hurst index ``h``.

    gamma(k) = 0.5 * (|k+1|^{2H} - 2|k|^{2H} + |k-1|^{2H}); gamma(0) = 1.
    ``lag`` may be a nonnegative integer or an array of them.
    """
    h = _check_hurst(h)
    k = np.asarray(lag, dtype=float)
    if np.any(k < 0):
        raise ValueError("lag must be nonnegative")
    two_h = 2.0 * h
    g = 0.5 * (np.abs(k + 1) ** two_h - 2.0 * np.abs(k) ** two_h + np.abs(k - 1) ** two_h)
    if np.isscalar(lag) or np.ndim(lag) == 0:
        return float(g)
    return g


@dataclass(frozen=True)
class FgnPlan:
    """Precomputed circulant spectrum for sampling length-``n`` fGN.

    ``n_fft`` is the power-of-two embedding half-size (>= n); ``spectrum``
    holds the 2*n_fft eigenvalues of the circulant embedding, clamped to be
    nonnegative.  Immutable; safe to share across concurrent samplers.
    """

    n: int
    h: float
    n_fft: int
    spectrum: np.ndarray


def build_plan(n: int, h: float) -> FgnPlan:
    """Precompute the circulant eigenvalues for length-``n`` fGN sampling.

    The first circulant row is (g(0), ..., g(m-1), g(m), g(m-1), ..., g(1))
    with m = n rounded up to a power of two; its FFT gives the spectrum.

    Raises NonEmbeddableError if any eigenvalue falls below -EPS_EIG; small
    negative values from floating-point noise are clamped to zero.
    """
    h = _check_hurst(h)
    n = int(n)
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    m = 1 << (n - 1).bit_length()
    gamma = autocovariance(h, np.arange(m + 1))
    row = np.concatenate([gamma, gamma[m - 1:0:-1]])
    dft = np.fft.fft(row)
    imag_residue = float(np.max(np.abs(dft.imag)))
    if imag_residue > _IMAG_TOL:
        raise NonEmbeddableError(
            f"spectrum not real: imaginary residue {imag_residue:.3e} for n={n}, h={h}"
        )
    spectrum = dft.real
    smallest = float(spectrum.min())
    if smallest < -EPS_EIG:
        raise NonEmbeddableError(
            f"negative circulant eigenvalue {smallest:.3e} for n={n}, h={h}"
        )
    spectrum = np.where(spectrum < 0.0, 0.0, spectrum)
    spectrum.setflags(write=False)
    return FgnPlan(n=n, h=h, n_fft=m, spectrum=spectrum)


# Rows per inverse-FFT call; larger batches fall off the FFT's fast path.
_BATCH_ELEMENTS = 1 << 21


def _sample_chunk(plan: FgnPlan, count: int, rng, out: np.ndarray) -> None:
    m = plan.n_fft
    scale = np.sqrt(plan.spectrum[: m + 1] * (2.0 * m))
    z = np.empty((count, m + 1), dtype=np.complex128)
    z[:, 0] = rng.standard_normal(count)
    z[:, m] = rng.standard_normal(count)
    if m > 1:
        re = rng.standard_normal((count, m - 1))
        im = rng.standard_normal((count, m - 1))
        z[:, 1:m] = (re + 1j * im) * np.sqrt(0.5)
    out[:] = np.fft.irfft(scale * z, n=2 * m, axis=1)[:, : plan.n]


def sample_fgn_batch(plan: FgnPlan, count: int, rng) -> np.ndarray:
    """Draw ``count`` independent fGN vectors of length ``plan.n``, as rows.

    Per draw: build Hermitian-symmetric complex Gaussians (real DC and
    Nyquist components, interior components (u + iv)/sqrt(2)), scale each
    frequency by sqrt(eigenvalue * 2*n_fft), inverse-transform, and keep the
    first ``n`` real coordinates.  Large requests are processed in
    fixed-size chunks (this fixes the rng draw order, so results depend
    only on the stream state, not on the total requested).
    """
    if count < 0:
        raise ValueError("count must be nonnegative")
    rows = max(1, _BATCH_ELEMENTS // (2 * plan.n_fft))
    out = np.empty((count, plan.n))
    for a in range(0, count, rows):
        b = min(a + rows, count)
        _sample_chunk(plan, b - a, rng, out[a:b])
    return out


def sample_fgn(plan: FgnPlan, rng) -> np.ndarray:
    """Draw one exact fGN vector of length ``plan.n`` from ``rng``."""
    return sample_fgn_batch(plan, 1, rng)[0]


@dataclass(frozen=True)
class FbmPath:
    """A discrete fBM trajectory: positions are the running sum of increments."""

    start_pos: float
    increments: np.ndarray
    positions: np.ndarray


def sample_path(plan: FgnPlan, start_pos: float, rng) -> FbmPath:
    """Sample an fBM path of ``plan.n`` unit-time steps from ``start_pos``."""
    increments = sample_fgn(plan, rng)
    positions = np.empty(plan.n + 1)
    positions[0] = start_pos
    np.cumsum(increments, out=positions[1:])
    positions[1:] += start_pos
    return FbmPath(start_pos=float(start_pos), increments=increments, positions=positions)
