"""Synthesis of dechirped FMCW beat signals: target echoes, mutual
interference passed through the receiver low-pass filter, and calibrated
noise/interference mixing.

All signals are complex baseband vectors on the sample grid t_n = n / f_s,
n = 0 .. N_t - 1 with N_t = round(T_sw * f_s). A sweep decomposes exactly as

    samples = clean + interference + noise

and that identity holds bitwise by construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DataError

C_LIGHT = 3.0e8  # m/s

# Sub-stream tag so noise draws never alias the parameter-sampling stream.
_NOISE_STREAM = 1


@dataclass(frozen=True)
class RadarConfig:
    """Victim radar parameters.

    ``lpf_cutoff_hz`` is the one-sided bandwidth of the receiver low-pass
    filter applied after dechirping; it defaults to half the sampling
    frequency. The chirp rate must equal bandwidth / sweep duration.
    """

    center_frequency_hz: float
    sweep_duration_s: float
    bandwidth_hz: float
    chirp_rate_hz_per_s: float
    sampling_frequency_hz: float
    lpf_cutoff_hz: float | None = None

    def __post_init__(self):
        if min(self.center_frequency_hz, self.sweep_duration_s,
               self.bandwidth_hz, self.chirp_rate_hz_per_s,
               self.sampling_frequency_hz) <= 0:
            raise ConfigError("radar parameters must be positive")
        expected = self.bandwidth_hz / self.sweep_duration_s
        if abs(self.chirp_rate_hz_per_s - expected) > 1e-9 * expected:
            raise ConfigError(
                f"chirp rate {self.chirp_rate_hz_per_s} != bandwidth/sweep "
                f"duration {expected}")
        if self.lpf_cutoff_hz is None:
            object.__setattr__(self, "lpf_cutoff_hz",
                               self.sampling_frequency_hz / 2.0)
        if self.lpf_cutoff_hz <= 0 or self.lpf_cutoff_hz > self.sampling_frequency_hz / 2.0:
            raise ConfigError("lpf_cutoff_hz must lie in (0, f_s/2]")

    @property
    def n_samples(self) -> int:
        return int(round(self.sweep_duration_s * self.sampling_frequency_hz))

    @property
    def max_range_m(self) -> float:
        """Largest target distance whose beat frequency passes the LPF."""
        return C_LIGHT * self.lpf_cutoff_hz / (2.0 * self.chirp_rate_hz_per_s)

    def time_grid(self) -> np.ndarray:
        return np.arange(self.n_samples) / self.sampling_frequency_hz


@dataclass(frozen=True)
class TargetParams:
    """One point scatterer. Distance maps to the round-trip delay
    2*distance/c; a positive radial velocity (receding) makes the delay
    drift linearly within the sweep."""

    distance_m: float
    amplitude: float
    phase_rad: float = 0.0
    velocity_m_per_s: float = 0.0

    def __post_init__(self):
        if self.distance_m <= 0:
            raise ConfigError("target distance must be positive")
        if self.amplitude < 0:
            raise ConfigError("target amplitude must be >= 0")


@dataclass(frozen=True)
class InterferenceParams:
    """One interfering chirp, described relative to the victim sweep.

    ``delay_s`` is the start time of the interferer relative to the victim
    sweep start (may be negative). The chirp rate may take any value in
    (-2K, 2K) except exactly K: an interferer with the victim's own slope
    produces target-like horizontal lines and is out of scope.
    """

    amplitude: float
    chirp_rate_hz_per_s: float
    duration_s: float
    delay_s: float
    center_frequency_hz: float

    def validate(self, config: RadarConfig) -> None:
        k = config.chirp_rate_hz_per_s
        if not 0 < self.duration_s <= config.sweep_duration_s:
            raise ConfigError("interferer duration must lie in (0, T_sw]")
        if not -2 * k < self.chirp_rate_hz_per_s < 2 * k:
            raise ConfigError("interferer chirp rate must lie in (-2K, 2K)")
        if self.chirp_rate_hz_per_s == k:
            raise ConfigError("same-slope interference is not supported")
        if self.amplitude < 0:
            raise ConfigError("interferer amplitude must be >= 0")


@dataclass(frozen=True)
class SceneSpec:
    """Full description of one synthetic scene; together with a
    RadarConfig it determines the emitted sweep bitwise."""

    targets: tuple[TargetParams, ...]
    interferers: tuple[InterferenceParams, ...]
    snr_db: float
    sinr_db: float
    seed: int


@dataclass
class SweepSignal:
    """One synthesized sweep with its provenance.

    ``realized_snr_db`` / ``realized_sinr_db`` are measured on the emitted
    vectors; they are None for zero-target scenes where the ratios are
    undefined. ``interference_support`` lists [start, end) sample index
    pairs where the dechirped interference passes the LPF.
    """

    samples: np.ndarray
    clean: np.ndarray
    interference: np.ndarray
    noise: np.ndarray
    spec: SceneSpec
    realized_snr_db: float | None = None
    realized_sinr_db: float | None = None
    interference_scale: float = 1.0
    interference_support: list[tuple[int, int]] = field(default_factory=list)


def synthesize_clean(config: RadarConfig, targets: list[TargetParams] | tuple) -> np.ndarray:
    """Sum of target beat signals on the sample grid.

    Each target contributes
        sigma * exp(j*phase) * exp(j*2*pi*(-f_c*tau - K*tau*t + K*tau^2/2))
    with tau(t) = 2*(distance + velocity*t)/c, so the beat tone sits at
    -K*tau (negative frequency for a positive victim slope).
    """
    t = config.time_grid()
    out = np.zeros(config.n_samples, dtype=np.complex128)
    fc = config.center_frequency_hz
    k = config.chirp_rate_hz_per_s
    for tgt in targets:
        tau = 2.0 * tgt.distance_m / C_LIGHT + 2.0 * tgt.velocity_m_per_s * t / C_LIGHT
        phase = 2.0 * np.pi * (-fc * tau - k * tau * t + 0.5 * k * tau * tau)
        out += tgt.amplitude * np.exp(1j * (phase + tgt.phase_rad))
    return out


def _dechirped_freq_line(config: RadarConfig, itf: InterferenceParams) -> tuple[float, float]:
    """Instantaneous frequency of the dechirped interferer as a line
    a*t + b (valid while the interferer is active)."""
    a = itf.chirp_rate_hz_per_s - config.chirp_rate_hz_per_s
    b = (itf.center_frequency_hz - config.center_frequency_hz
         - itf.chirp_rate_hz_per_s * itf.delay_s)
    return a, b


def interference_support(config: RadarConfig, itf: InterferenceParams) -> tuple[int, int] | None:
    """Sample index range [start, end) where the dechirped interferer
    falls inside the LPF passband, or None when it never does."""
    itf.validate(config)
    a, b = _dechirped_freq_line(config, itf)
    t0 = max(0.0, itf.delay_s)
    t1 = min(config.sweep_duration_s, itf.delay_s + itf.duration_s)
    if t1 <= t0:
        return None
    cut = config.lpf_cutoff_hz
    lo, hi = sorted(((-cut - b) / a, (cut - b) / a))
    lo, hi = max(lo, t0), min(hi, t1)
    if hi <= lo:
        return None
    fs = config.sampling_frequency_hz
    start = max(0, int(math.ceil(lo * fs)))
    end = min(config.n_samples, int(math.floor(hi * fs)) + 1)
    return (start, end) if end > start else None


def synthesize_interference(config: RadarConfig, itf: InterferenceParams) -> np.ndarray:
    """Dechirped interference after the ideal receiver LPF.

    The product of the victim's conjugate reference chirp with the active
    interferer is synthesized on an internally oversampled grid (rate high
    enough that the pre-filter instantaneous frequency never aliases), the
    ideal LPF is applied as a hard frequency-domain mask at the cutoff,
    and the result is decimated back to the sample grid.
    """
    itf.validate(config)
    n = config.n_samples
    fs = config.sampling_frequency_hz
    t0 = max(0.0, itf.delay_s)
    t1 = min(config.sweep_duration_s, itf.delay_s + itf.duration_s)
    if t1 <= t0 or itf.amplitude == 0.0:
        return np.zeros(n, dtype=np.complex128)

    a, b = _dechirped_freq_line(config, itf)
    max_f = max(abs(a * t0 + b), abs(a * t1 + b))
    ratio = max(1, int(math.ceil(2.2 * max_f / fs)))
    fs_hi = fs * ratio
    t = np.arange(n * ratio) / fs_hi

    active = (t >= itf.delay_s) & (t < itf.delay_s + itf.duration_s)
    td = t - itf.delay_s
    phase = 2.0 * np.pi * (
        itf.center_frequency_hz * td
        + 0.5 * itf.chirp_rate_hz_per_s * td * td
        - config.center_frequency_hz * t
        - 0.5 * config.chirp_rate_hz_per_s * t * t)
    x = np.where(active, itf.amplitude * np.exp(1j * phase), 0.0 + 0.0j)

    spectrum = np.fft.fft(x)
    freqs = np.fft.fftfreq(x.size, d=1.0 / fs_hi)
    spectrum[np.abs(freqs) > config.lpf_cutoff_hz] = 0.0
    return np.fft.ifft(spectrum)[::ratio]


def calibrate_and_mix(clean: np.ndarray,
                      interferences: list[np.ndarray],
                      snr_db: float,
                      sinr_db: float,
                      rng: np.random.Generator,
                      spec: SceneSpec | None = None,
                      support: list[tuple[int, int]] | None = None) -> SweepSignal:
    """Mix clean signal, interference and noise at requested SNR / SINR.

    Complex white Gaussian noise is drawn with per-sample power
    P_n = P_s * 10^(-snr/10). The summed interference is then rescaled by a
    single real factor chosen so that the total error energy versus the
    clean signal (including the interference/noise cross term) matches the
    requested SINR exactly. When the noise alone already exceeds the error
    budget the interference scale is 0 and the achieved SINR is recorded.
    """
    energy_s = float(np.sum(np.abs(clean) ** 2))
    if energy_s == 0.0:
        raise DataError("degenerate scene: clean signal is all-zero but "
                        "SNR/SINR scaling was requested")
    n = clean.size
    power_n = (energy_s / n) * 10.0 ** (-snr_db / 10.0)
    sigma = math.sqrt(power_n / 2.0)
    noise = sigma * (rng.standard_normal(n) + 1j * rng.standard_normal(n))

    total_itf = np.zeros(n, dtype=np.complex128)
    for part in interferences:
        total_itf = total_itf + part

    energy_n = float(np.sum(np.abs(noise) ** 2))
    energy_f = float(np.sum(np.abs(total_itf) ** 2))
    energy_err_target = energy_s * 10.0 ** (-sinr_db / 10.0)
    cross = 2.0 * float(np.real(np.vdot(noise, total_itf)))

    if energy_f == 0.0 or energy_err_target <= energy_n:
        scale = 0.0
    else:
        # solve ||a*f + n||^2 = E_target for the nonnegative root
        disc = cross * cross - 4.0 * energy_f * (energy_n - energy_err_target)
        scale = max(0.0, (-cross + math.sqrt(disc)) / (2.0 * energy_f))

    interference = scale * total_itf
    samples = clean + interference + noise
    energy_err = float(np.sum(np.abs(interference + noise) ** 2))

    if spec is None:
        spec = SceneSpec((), (), snr_db, sinr_db, 0)
    return SweepSignal(
        samples=samples, clean=clean, interference=interference, noise=noise,
        spec=spec,
        realized_snr_db=10.0 * math.log10(energy_s / energy_n),
        realized_sinr_db=10.0 * math.log10(energy_s / energy_err),
        interference_scale=scale,
        interference_support=list(support) if support else [])


@dataclass(frozen=True)
class SceneRanges:
    """Sampling ranges for random scenes. Defaults match the full-scale
    generation profile; scaled-down presets may narrow them (e.g. a larger
    minimum distance so target tones stay clear of the DC bin)."""

    max_targets: int = 20
    distance_min_m: float = 8.0
    amplitude_max: float = 3.0
    velocity_max_m_per_s: float = 80.0 / 3.6
    snr_db_choices: tuple[float, ...] = (-20.0, -15.0, -10.0, -5.0, 0.0,
                                         5.0, 10.0, 15.0, 20.0)
    sinr_db_range: tuple[float, float] = (-40.0, 20.0)
    max_interferers: int = 20
    interferer_amplitude_max: float = 3.0
    noise_floor_power: float = 1.0  # absolute noise power for zero-target scenes


def sample_scene(rng: np.random.Generator,
                 config: RadarConfig,
                 ranges: SceneRanges | None = None) -> SceneSpec:
    """Draw one random scene.

    Target count U{0..max}, interferer count U{1..max}; distances uniform
    up to the LPF-limited maximum range; interferer chirp rates uniform in
    (-2K, 2K); SNR from the discrete 5 dB grid, SINR uniform in [-40, 20].
    The draw order is fixed so a seeded generator reproduces the scene.
    """
    r = ranges or SceneRanges()
    k = config.chirp_rate_hz_per_s
    t_sw = config.sweep_duration_s
    d_max = config.max_range_m

    targets = []
    for _ in range(int(rng.integers(0, r.max_targets + 1))):
        targets.append(TargetParams(
            distance_m=float(rng.uniform(r.distance_min_m, d_max)),
            amplitude=float(rng.uniform(0.0, r.amplitude_max)),
            phase_rad=float(rng.uniform(0.0, 2.0 * np.pi)),
            velocity_m_per_s=float(rng.uniform(0.0, r.velocity_max_m_per_s))))

    interferers = []
    for _ in range(int(rng.integers(1, r.max_interferers + 1))):
        rate = k
        while rate == k:
            rate = float(rng.uniform(-2.0 * k, 2.0 * k))
        duration = 0.0
        while duration == 0.0:
            duration = float(rng.uniform(0.0, t_sw))
        interferers.append(InterferenceParams(
            amplitude=float(rng.uniform(0.0, r.interferer_amplitude_max)),
            chirp_rate_hz_per_s=rate,
            duration_s=duration,
            delay_s=float(rng.uniform(-t_sw / 2.0, t_sw / 2.0)),
            center_frequency_hz=config.center_frequency_hz))

    snr = float(rng.choice(np.asarray(r.snr_db_choices)))
    sinr = float(rng.uniform(*r.sinr_db_range))
    seed = int(rng.integers(0, 2 ** 63))
    return SceneSpec(tuple(targets), tuple(interferers), snr, sinr, seed)


def synthesize_scene(config: RadarConfig,
                     scene: SceneSpec,
                     noise_floor_power: float = 1.0) -> SweepSignal:
    """Render a SceneSpec into a SweepSignal (pure given its inputs).

    Scenes with at least one target are calibrated to the requested
    SNR/SINR. Zero-target scenes have no signal power reference, so noise
    is drawn at the configured absolute floor, the interference keeps its
    natural amplitude, and both realized ratios are recorded as None.
    """
    clean = synthesize_clean(config, scene.targets)
    parts = [synthesize_interference(config, itf) for itf in scene.interferers]
    support = []
    for itf in scene.interferers:
        span = interference_support(config, itf)
        if span is not None:
            support.append(span)
    rng = np.random.default_rng([scene.seed, _NOISE_STREAM])

    if np.any(clean):
        return calibrate_and_mix(clean, parts, scene.snr_db, scene.sinr_db,
                                 rng, spec=scene, support=support)

    n = config.n_samples
    sigma = math.sqrt(noise_floor_power / 2.0)
    noise = sigma * (rng.standard_normal(n) + 1j * rng.standard_normal(n))
    interference = np.zeros(n, dtype=np.complex128)
    for part in parts:
        interference = interference + part
    samples = clean + interference + noise
    return SweepSignal(samples=samples, clean=clean, interference=interference,
                       noise=noise, spec=scene, interference_support=support)


def generate_dataset(config: RadarConfig,
                     count: int,
                     dataset_seed: int,
                     ranges: SceneRanges | None = None) -> list[SweepSignal]:
    """Sample and synthesize ``count`` scenes.

    Scene i uses an independent generator seeded with dataset_seed XOR i,
    so generation is order-independent and could run data-parallel.
    """
    r = ranges or SceneRanges()
    sweeps = []
    for i in range(count):
        rng = np.random.default_rng(dataset_seed ^ i)
        scene = sample_scene(rng, config, r)
        sweeps.append(synthesize_scene(config, scene, r.noise_floor_power))
    return sweeps
