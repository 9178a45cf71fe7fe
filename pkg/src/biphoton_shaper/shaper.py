"""Single-photon spectral transfer functions.

A programmable shaper modulates each photon's spectrum with a complex
transfer function M(omega), |M| <= 1.  Transfer functions are built either
from basis coefficients (projective-measurement form) or as the two-path
interferometer response, and can be quantized onto a pixelated modulator.
"""

from dataclasses import dataclass, field

import numpy as np

from .bases import BasisSet
from .errors import GridError, MappingError
from .spectral_field import SpectralGrid

PHYSICALITY_TOL = 1e-12


@dataclass
class TransferSpec:
    """Coefficients of a transfer function in a given basis.

    amplitudes |u_j| in [0, 1], phases in rad (stored mod 2*pi), one pair per
    basis function; ``side`` tags which photon the modulation acts on.
    """

    basis: BasisSet
    amplitudes: np.ndarray
    phases: np.ndarray
    side: str = "idler"

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=float)
        self.phases = np.mod(np.asarray(self.phases, dtype=float), 2 * np.pi)
        if self.amplitudes.shape != (self.basis.d,) or self.phases.shape != (self.basis.d,):
            raise ValueError("need one amplitude and phase per basis function")
        if np.any(self.amplitudes < 0) or np.any(self.amplitudes > 1):
            raise ValueError("amplitudes must lie in [0, 1]")
        if self.side not in ("idler", "signal"):
            raise ValueError(f"unknown side {self.side!r}")


@dataclass
class TransferFunction:
    """Complex modulation samples M(omega) on a grid axis, max |M| <= 1."""

    grid: SpectralGrid
    values: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values)
        if self.values.shape != (self.grid.n_points,):
            raise GridError("transfer function does not match the grid axis")
        peak = float(np.max(np.abs(self.values)))
        if peak > 1.0 + PHYSICALITY_TOL:
            raise ValueError(f"transfer function exceeds unit modulus: max |M| = {peak}")

    def scaled(self, factor: float) -> "TransferFunction":
        """A copy scaled by ``factor`` (must stay physical)."""
        meta = dict(self.metadata)
        meta["extra_scale"] = meta.get("extra_scale", 1.0) * factor
        return TransferFunction(self.grid, self.values * factor, metadata=meta)


@dataclass(frozen=True)
class SlmModel:
    """Pixelated modulator: pixel count and geometry (um), plus an affine
    frequency-to-position map (um per rad/fs, offset um).  Without an explicit
    map the grid window is stretched across the full pixel array.
    """

    n_pixels: int = 640
    pixel_width: float = 100.0
    gap: float = 3.0
    mapping: tuple | None = None

    def __post_init__(self):
        if self.n_pixels < 1:
            raise ValueError("need at least one pixel")
        if self.pixel_width <= 0 or self.gap < 0:
            raise ValueError("pixel width must be positive, gap non-negative")

    @property
    def pitch(self) -> float:
        return self.pixel_width + self.gap

    @property
    def extent(self) -> float:
        """Total transverse aperture [um] (no trailing gap)."""
        return self.n_pixels * self.pitch - self.gap

    def positions(self, grid: SpectralGrid) -> np.ndarray:
        """Transverse position [um] of every grid sample."""
        ax = grid.axis()
        if self.mapping is not None:
            slope, offset = self.mapping
            return slope * ax + offset
        return (ax - ax[0]) / (ax[-1] - ax[0]) * self.extent


def _physical(values: np.ndarray, grid: SpectralGrid, metadata: dict) -> TransferFunction:
    """Wrap samples as a TransferFunction, rescaling globally to unit peak if needed.

    A global rescale (never clipping) preserves all projection ratios; the
    factor applied is recorded in metadata["normalization_factor"].
    """
    peak = float(np.max(np.abs(values)))
    factor = 1.0
    if peak > 1.0:
        factor = 1.0 / peak
        values = values * factor
    metadata = dict(metadata)
    metadata["normalization_factor"] = factor
    return TransferFunction(grid=grid, values=values, metadata=metadata)


def transfer_from_coefficients(spec: TransferSpec) -> TransferFunction:
    """M(omega) = sum_j |u_j| exp(i*phi_j) conj(f_j(omega)), made physical.

    If the raw superposition exceeds unit modulus it is rescaled globally by
    1/max|M|, which leaves every projection ratio intact.
    """
    coeff = spec.amplitudes * np.exp(1j * spec.phases)
    values = coeff @ spec.basis.functions.conj()
    return _physical(values, spec.basis.grid, {
        "source": "coefficients",
        "basis_kind": spec.basis.kind,
        "side": spec.side,
        "amplitudes": spec.amplitudes.copy(),
        "phases": spec.phases.copy(),
    })


def franson_transfer(transmission: float, reflection: float, delta_t10: float,
                     phi: float, grid: SpectralGrid) -> TransferFunction:
    """Two-path interferometer response M(omega) = T + R exp(i(omega*dt + phi)).

    T and R are the short/long-path amplitude coefficients, T + R <= 1;
    delta_t10 is the long-short delay in fs.
    """
    if transmission < 0 or reflection < 0:
        raise ValueError("transmission and reflection must be non-negative")
    if transmission + reflection > 1.0 + PHYSICALITY_TOL:
        raise ValueError("amplitude coefficients must satisfy T + R <= 1")
    ax = grid.axis()
    values = transmission + reflection * np.exp(1j * (ax * delta_t10 + phi))
    return _physical(values, grid, {
        "source": "franson",
        "transmission": transmission,
        "reflection": reflection,
        "delta_t10": delta_t10,
        "phi": phi,
    })


def pixelate(m: TransferFunction, slm: SlmModel) -> TransferFunction:
    """Quantize a transfer function onto the modulator's pixel geometry.

    Every sample inside a pixel is replaced by the pixel's mean value; samples
    falling into inter-pixel gaps are set to zero (opaque gaps).  Samples the
    mapping leaves outside the aperture are opaque too, and more than 10% of
    them is treated as a configuration error.

    When one grid cell spans at least a full pixel pitch the gap comb cannot
    be point-sampled without aliasing; such cells are cell-averaged instead:
    the sample is kept and attenuated by the transmitting fill fraction.
    """
    pos = slm.positions(m.grid)
    inside = (pos >= 0.0) & (pos <= slm.extent)
    unmapped = 1.0 - inside.mean()
    if unmapped > 0.10:
        raise MappingError(
            f"{unmapped:.0%} of the spectral axis falls outside the modulator aperture"
        )

    meta = dict(m.metadata)
    meta["pixelated"] = True
    meta["unmapped_fraction"] = float(unmapped)

    cell = abs(pos[-1] - pos[0]) / (len(pos) - 1)
    if cell >= slm.pitch:
        fill = slm.pixel_width / slm.pitch
        values = np.where(inside, m.values * fill, 0.0)
        meta["pixel_sampling"] = "cell_averaged"
        return TransferFunction(grid=m.grid, values=values, metadata=meta)

    pixel_index = np.floor_divide(pos, slm.pitch).astype(int)
    pixel_index = np.clip(pixel_index, 0, slm.n_pixels - 1)
    offset = pos - pixel_index * slm.pitch
    # closed pixel intervals, so the aperture-edge sample stays in the last pixel
    in_pixel = inside & (offset <= slm.pixel_width + 1e-12 * slm.pitch)

    values = np.zeros_like(m.values, dtype=complex)
    idx = pixel_index[in_pixel]
    sums = np.zeros(slm.n_pixels, dtype=complex)
    counts = np.zeros(slm.n_pixels, dtype=float)
    np.add.at(sums, idx, m.values[in_pixel])
    np.add.at(counts, idx, 1.0)
    means = np.divide(sums, counts, out=np.zeros_like(sums), where=counts > 0)
    values[in_pixel] = means[idx]
    return TransferFunction(grid=m.grid, values=values, metadata=meta)


def combined_modulation(m_i: TransferFunction, m_s: TransferFunction) -> np.ndarray:
    """Two-photon modulation M(w_i, w_s) = M_i(w_i) * M_s(w_s) as an outer product."""
    if not m_i.grid.same_axis(m_s.grid):
        raise GridError("idler and signal transfer functions live on different grids")
    return np.outer(m_i.values, m_s.values)
