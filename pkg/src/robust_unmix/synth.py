"""Synthetic scene generation with heterogeneous per-band noise.

Scenes are built the block-mosaic way: a ``z^2 x z^2`` pixel image is
tiled with ``z x z`` blocks, each block filled with one library
endmember, the per-endmember abundance maps are smoothed with a
normalized ``(z+1) x (z+1)`` box filter (replicate edges, so the
abundance simplex is preserved), and any pixel still purer than the
purity threshold is replaced by an equal two-endmember mixture. Noise is
zero-mean Gaussian, i.i.d. per band, with each band's SNR drawn from a
normal distribution so noise intensity varies across bands.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.ndimage import uniform_filter

from .errors import BadConfig, ShapeMismatch
from .model import Abundances, Endmembers, SpectraMatrix, as_matrix

__all__ = [
    "SceneSpec",
    "Scene",
    "builtin_endmember_library",
    "generate_scene",
    "add_band_noise",
    "snr_db",
    "noise_variance_for_snr",
]

_LIBRARY_BANDS = 200

# (weight, center, width) triples of Gaussian bumps plus a flat offset;
# six smooth, well-separated reflectance-like signatures on [0, 1].
_LIBRARY_RECIPE = (
    (((0.90, 0.20, 0.08), (0.50, 0.55, 0.15)), 0.08),
    (((0.80, 0.45, 0.06), (0.60, 0.80, 0.10)), 0.10),
    (((0.95, 0.70, 0.12), (0.30, 0.15, 0.05)), 0.05),
    (((0.70, 0.30, 0.20), (0.40, 0.90, 0.05)), 0.12),
    (((0.85, 0.10, 0.04), (0.50, 0.60, 0.07), (0.30, 0.85, 0.05)), 0.06),
    (((0.60, 0.50, 0.25), (0.35, 0.05, 0.03)), 0.15),
)


def builtin_endmember_library(k: int = 6) -> Endmembers:
    """Fixture library of ``k <= 6`` smooth spectra over 200 bands."""
    if not 1 <= int(k) <= len(_LIBRARY_RECIPE):
        raise BadConfig(f"builtin library has {len(_LIBRARY_RECIPE)} endmembers, asked for {k}")
    t = np.linspace(0.0, 1.0, _LIBRARY_BANDS)
    cols = []
    for bumps, offset in _LIBRARY_RECIPE[: int(k)]:
        col = np.full_like(t, offset)
        for amp, center, width in bumps:
            col = col + amp * np.exp(-((t - center) ** 2) / (2.0 * width * width))
        cols.append(col)
    return Endmembers(np.stack(cols, axis=1))


@dataclass(frozen=True)
class SceneSpec:
    """Parameters of one synthetic scene (``n_pixels = z**4``)."""

    endmember_library: Endmembers
    mean_snr_db: float = 30.0
    snr_std_db: float = 5.0
    z: int = 8
    purity_threshold: float = 0.8
    seed: int = 0

    def __post_init__(self):
        lib = self.endmember_library
        if not isinstance(lib, Endmembers):
            object.__setattr__(self, "endmember_library", Endmembers(as_matrix(lib)))
            lib = self.endmember_library
        if int(self.z) < 2:
            raise BadConfig(f"block size z must be >= 2, got {self.z}")
        if lib.n_endmembers < 2:
            raise BadConfig("scene needs at least 2 endmembers")
        if not 0.0 < float(self.purity_threshold) <= 1.0:
            raise BadConfig(f"purity_threshold must be in (0, 1], got {self.purity_threshold}")
        if float(self.snr_std_db) < 0:
            raise BadConfig(f"snr_std_db must be >= 0, got {self.snr_std_db}")


@dataclass(frozen=True)
class Scene:
    """A generated scene with its ground truth."""

    spec: SceneSpec
    clean: SpectraMatrix
    noisy: SpectraMatrix
    endmembers: Endmembers
    abundances: Abundances
    band_snr_db: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.band_snr_db, dtype=np.float64)
        arr.setflags(write=False)
        object.__setattr__(self, "band_snr_db", arr)


def snr_db(signal, noise) -> float:
    """Signal-to-noise ratio in dB: ``10 log10(mean(y^2) / mean(n^2))``."""
    signal, noise = np.asarray(signal, float), np.asarray(noise, float)
    return float(10.0 * np.log10(np.mean(signal**2) / np.mean(noise**2)))


def noise_variance_for_snr(signal, target_snr_db: float) -> float:
    """Zero-mean Gaussian variance realizing a target SNR for ``signal``."""
    signal = np.asarray(signal, float)
    return float(np.mean(signal**2) / (10.0 ** (float(target_snr_db) / 10.0)))


def add_band_noise(Y_clean, mean_snr_db: float, snr_std_db: float, seed: int):
    """Add per-band Gaussian noise with band SNRs drawn from a normal law.

    For each band the target SNR is sampled from
    ``Normal(mean_snr_db, snr_std_db^2)`` and the noise variance set from
    the band's own mean squared value. Negative noisy entries are clipped
    to zero since every solver requires nonnegative data. Band noise
    streams are derived from per-band child seeds, so generation is
    deterministic regardless of evaluation order.

    Returns ``(Y_noisy, band_snr_db)`` with the sampled per-band targets.
    """
    Yc = as_matrix(Y_clean)
    if Yc.ndim != 2:
        raise ShapeMismatch("Y_clean must be 2-d")
    d, n = Yc.shape
    streams = np.random.SeedSequence(int(seed)).spawn(d + 1)
    snr_rng = np.random.default_rng(streams[0])
    band_snr = snr_rng.normal(float(mean_snr_db), float(snr_std_db), size=d)
    noisy = np.empty_like(Yc)
    for di in range(d):
        var = noise_variance_for_snr(Yc[di], band_snr[di])
        rng = np.random.default_rng(streams[di + 1])
        noisy[di] = Yc[di] + rng.normal(0.0, np.sqrt(var), size=n)
    np.clip(noisy, 0.0, None, out=noisy)
    return SpectraMatrix(noisy), band_snr


def generate_scene(spec: SceneSpec) -> Scene:
    """Build a scene from ``spec``; bit-reproducible for equal specs."""
    lib = spec.endmember_library
    k, z = lib.n_endmembers, int(spec.z)
    side = z * z
    layout_stream, noise_stream = np.random.SeedSequence(int(spec.seed)).spawn(2)
    rng = np.random.default_rng(layout_stream)

    # One endmember per z x z block, as one-hot abundance maps.
    block_of = rng.integers(0, k, size=(z, z))
    maps = np.zeros((k, side, side))
    for bi in range(z):
        for bj in range(z):
            maps[block_of[bi, bj], bi * z : (bi + 1) * z, bj * z : (bj + 1) * z] = 1.0

    # Box smoothing preserves the per-pixel simplex: the kernel sums to
    # one and replicate padding filters the all-ones sum to all ones.
    for ki in range(k):
        maps[ki] = uniform_filter(maps[ki], size=z + 1, mode="nearest")
    W = maps.reshape(k, side * side)

    # Replace still-pure pixels by an equal mix of the dominant endmember
    # and one other, drawn uniformly.
    dominant = W.argmax(axis=0)
    for pix in np.nonzero(W.max(axis=0) > spec.purity_threshold)[0]:
        partner = int(rng.integers(0, k - 1))
        if partner >= dominant[pix]:
            partner += 1
        W[:, pix] = 0.0
        W[dominant[pix], pix] = 0.5
        W[partner, pix] = 0.5

    clean = lib.data @ W
    noisy, band_snr = add_band_noise(
        clean, spec.mean_snr_db, spec.snr_std_db,
        int(noise_stream.generate_state(1)[0]),
    )
    return Scene(
        spec=spec,
        clean=SpectraMatrix(clean),
        noisy=noisy,
        endmembers=lib,
        abundances=Abundances(W),
        band_snr_db=band_snr,
    )
