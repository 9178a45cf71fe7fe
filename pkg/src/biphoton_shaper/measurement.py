"""Coincidence detection and discrete-state projections.

The upconversion detector measures S = |integral of Gamma * M_i * M_s|^2,
which for transfer functions built from an orthonormal basis equals the
projection probability of the discretized two-photon state.  This module
evaluates both routes, runs phase-ladder fringe scans, synthesizes Poissonian
count records, and computes equalizing filter amplitudes.
"""

from dataclasses import dataclass, field

import numpy as np

from .bases import BasisSet
from .errors import BasisError, GridError
from .shaper import TransferFunction, TransferSpec, transfer_from_coefficients
from .spectral_field import JointAmplitude


@dataclass
class QuditState:
    """Discretized two-photon state: d x d coefficients over a basis pair.

    The captured weight sum(|c|^2) is at most 1; the deficit is the part of
    the continuous amplitude outside the span of the basis pair.
    """

    coefficients: np.ndarray
    basis_idler: BasisSet | None = None
    basis_signal: BasisSet | None = None
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.coefficients = np.asarray(self.coefficients, dtype=complex)
        if self.coefficients.ndim != 2 or self.coefficients.shape[0] != self.coefficients.shape[1]:
            raise ValueError("coefficients must be a square matrix")
        w = self.captured_weight
        if w > 1.0 + 1e-9:
            raise ValueError(f"state weight {w} exceeds 1; basis is not orthonormal?")

    @property
    def d(self) -> int:
        return self.coefficients.shape[0]

    @property
    def captured_weight(self) -> float:
        return float(np.sum(np.abs(self.coefficients) ** 2))

    @property
    def truncation_weight(self) -> float:
        """Weight of the amplitude outside the basis span (>= 0 up to rounding)."""
        return 1.0 - self.captured_weight


def max_entangled_state(d: int, phi0: float = 0.0) -> QuditState:
    """Maximally entangled diagonal state c = diag(exp(i*l*phi0))/sqrt(d)."""
    c = np.diag(np.exp(1j * phi0 * np.arange(d))) / np.sqrt(d)
    return QuditState(coefficients=c, metadata={"ideal": True, "phi0": phi0})


def gamma_model_state(gamma1: float, gamma2: float, phi0: float = 0.0) -> QuditState:
    """Two-level model state interpolating product -> maximally entangled.

    c00 = 1, c01 = c10 = gamma1*exp(i*phi0/2), c11 = gamma2*exp(i*phi0),
    normalized.  gamma1 weights the single-photon and gamma2 the two-photon
    interference contribution.
    """
    c = np.array([
        [1.0, gamma1 * np.exp(1j * phi0 / 2)],
        [gamma1 * np.exp(1j * phi0 / 2), gamma2 * np.exp(1j * phi0)],
    ])
    c /= np.sqrt(1.0 + 2.0 * gamma1**2 + gamma2**2)
    return QuditState(coefficients=c, metadata={"gamma1": gamma1, "gamma2": gamma2,
                                                "phi0": phi0})


@dataclass
class FringeScan:
    """Signal versus projection phase, normalized to unit mean."""

    phi: np.ndarray
    values: np.ndarray
    route: str              # "state_space" | "full_field"
    d: int
    basis_kind: str
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.phi = np.asarray(self.phi, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.phi.shape != self.values.shape or self.phi.ndim != 1:
            raise ValueError("phi and values must be matching 1-d arrays")
        if np.any(np.diff(self.phi) <= 0):
            raise ValueError("phi samples must be strictly increasing")
        if np.any(self.values < -1e-12):
            raise ValueError("fringe values must be non-negative")
        self.values = np.maximum(self.values, 0.0)


@dataclass
class CountRecord:
    """Synthetic coincidence counts: gross and background draws per phase point."""

    phi: np.ndarray
    gross: np.ndarray
    background: np.ndarray
    duration: float          # seconds per point
    seed: int
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.phi = np.asarray(self.phi, dtype=float)
        self.gross = np.asarray(self.gross)
        self.background = np.asarray(self.background)
        for counts in (self.gross, self.background):
            if not np.issubdtype(counts.dtype, np.integer) or np.any(counts < 0):
                raise ValueError("counts must be non-negative integers")

    def net(self) -> np.ndarray:
        return self.gross.astype(float) - self.background.astype(float)


def coincidence_signal(amp: JointAmplitude, m_i: TransferFunction,
                       m_s: TransferFunction) -> float:
    """Detected upconversion signal |sum Gamma * M_i * M_s * weights|^2.

    Trapezoid-weighted double integral over the shared grid; deterministic.
    """
    if not (amp.grid.same_axis(m_i.grid) and amp.grid.same_axis(m_s.grid)):
        raise GridError("amplitude and transfer functions must share one grid")
    w = amp.grid.weights()
    integral = (w * m_i.values) @ amp.values @ (w * m_s.values)
    return float(np.abs(integral) ** 2)


def project_state(amp: JointAmplitude, basis_i: BasisSet, basis_s: BasisSet) -> QuditState:
    """Coefficients c_jk = integral conj(f_j) conj(f_k) Gamma over the grid."""
    if not (amp.grid.same_axis(basis_i.grid) and amp.grid.same_axis(basis_s.grid)):
        raise GridError("amplitude and bases must share one grid")
    w = amp.grid.weights()
    fi = basis_i.functions.conj() * w
    fs = basis_s.functions.conj() * w
    c = fi @ amp.values @ fs.T
    return QuditState(coefficients=c, basis_idler=basis_i, basis_signal=basis_s)


def projection_probability(state: QuditState, u_i, u_s) -> float:
    """Probability |sum_jk u_i[j] u_s[k] c_jk|^2 of a product projection."""
    u_i = np.asarray(u_i)
    u_s = np.asarray(u_s)
    if u_i.shape != (state.d,) or u_s.shape != (state.d,):
        raise ValueError("projection vectors must have the state's dimension")
    if np.any(np.abs(u_i) > 1 + 1e-12) or np.any(np.abs(u_s) > 1 + 1e-12):
        raise ValueError("projection coefficients must have modulus <= 1")
    return float(np.abs(u_i @ state.coefficients @ u_s) ** 2)


def _ladder(d: int, phi: float, amplitudes=None) -> np.ndarray:
    """Unit-norm projection vector with per-level phases j*phi."""
    a = np.ones(d) if amplitudes is None else np.asarray(amplitudes, dtype=float)
    norm = np.linalg.norm(a)
    if norm == 0:
        raise ValueError("projection amplitudes must not all vanish")
    return a * np.exp(1j * phi * np.arange(d)) / norm


def _scan_amplitude_scale(spec: TransferSpec) -> float:
    """Factor making the transfer physical for every phase setting at once."""
    envelope = spec.amplitudes @ np.abs(spec.basis.functions)
    worst = float(envelope.max())
    return min(1.0, 1.0 / worst) if worst > 0 else 1.0


def fringe_scan(source, phi, amplitudes_i=None, amplitudes_s=None) -> FringeScan:
    """Phase-ladder interference scan, both photons at the same phase.

    ``source`` is either a QuditState (state-space route: projection onto the
    phase ladder exp(i*j*phi)) or a tuple (JointAmplitude, TransferSpec,
    TransferSpec) (full-field route: transfer functions rebuilt at each phase
    and fed to the coincidence integral).  Values are normalized to unit mean;
    metadata reports the weight truncated by the discretization.
    """
    phi = np.asarray(phi, dtype=float)
    if len(phi) < 2:
        raise ValueError("need at least two phase samples")
    span = phi[-1] - phi[0]
    step = span / (len(phi) - 1)
    if span + step < np.pi * (1 - 1e-9):
        raise ValueError("phase grid must cover at least one fringe period (pi)")
    if isinstance(source, QuditState):
        state = source
        d = state.d
        values = np.array([
            projection_probability(
                state,
                _ladder(d, p, amplitudes_i),
                _ladder(d, p, amplitudes_s),
            )
            for p in phi
        ])
        kind = state.basis_idler.kind if state.basis_idler is not None else "synthetic"
        meta = {"truncation_weight": state.truncation_weight}
        route = "state_space"
    else:
        amp, spec_i, spec_s = source
        d = spec_i.basis.d
        if spec_s.basis.d != d:
            raise BasisError("idler and signal bases must share the dimension")
        # One common physicality rescale for the whole scan: the worst-case
        # modulus over all phase settings is bounded by sum_j |u_j| |f_j|.
        # A per-point rescale would distort the fringe for overlapping bases.
        scale_i = _scan_amplitude_scale(spec_i)
        scale_s = _scan_amplitude_scale(spec_s)
        ladder = np.arange(d)
        values = np.empty(phi.shape)
        for n, p in enumerate(phi):
            m_i = transfer_from_coefficients(
                TransferSpec(spec_i.basis, spec_i.amplitudes * scale_i,
                             spec_i.phases + ladder * p, side="idler"))
            m_s = transfer_from_coefficients(
                TransferSpec(spec_s.basis, spec_s.amplitudes * scale_s,
                             spec_s.phases + ladder * p, side="signal"))
            values[n] = coincidence_signal(amp, m_i, m_s)
        kind = spec_i.basis.kind
        state = project_state(amp, spec_i.basis, spec_s.basis)
        meta = {"truncation_weight": state.truncation_weight,
                "common_amplitude_scale": (scale_i, scale_s)}
        route = "full_field"

    mean = values.mean()
    if mean > 0:
        values = values / mean
    return FringeScan(phi=phi, values=values, route=route, d=d, basis_kind=kind,
                      metadata=meta)


def synthesize_counts(scan: FringeScan, peak_rate: float, background_rate: float,
                      duration_s: float, seed: int) -> CountRecord:
    """Poissonian count record for a fringe scan.

    The scan is rescaled so its maximum corresponds to ``peak_rate`` [Hz];
    every point draws gross counts at (signal + background) * duration and an
    independent background-only measurement of the same duration.  Fixed seed
    gives identical records.
    """
    if peak_rate < 0 or background_rate < 0:
        raise ValueError("rates must be non-negative")
    if duration_s < 0:
        raise ValueError("duration must be non-negative")
    rng = np.random.default_rng(seed)
    peak = scan.values.max()
    signal_rate = peak_rate * scan.values / peak if peak > 0 else np.zeros_like(scan.values)
    gross = rng.poisson((signal_rate + background_rate) * duration_s)
    background = rng.poisson(background_rate * duration_s, size=scan.values.shape)
    return CountRecord(phi=scan.phi.copy(), gross=gross, background=background,
                       duration=duration_s, seed=seed,
                       metadata={"peak_rate": peak_rate, "background_rate": background_rate,
                                 "d": scan.d, "basis_kind": scan.basis_kind})


def procrustean_amplitudes(signals) -> np.ndarray:
    """Filter amplitudes that equalize single-projection signals.

    |u_k| = (S_min / S_k)^(1/4), so re-measured signals |u_k|^4 * S_k all equal
    the smallest one and max |u_k| = 1.
    """
    s = np.asarray(signals, dtype=float)
    if s.ndim != 1 or len(s) < 1:
        raise ValueError("need a 1-d list of signals")
    if np.any(s <= 0):
        raise BasisError("degenerate bin: all single-projection signals must be positive")
    return (s.min() / s) ** 0.25
