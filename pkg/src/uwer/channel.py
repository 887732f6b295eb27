"""Non-stationary MIMO CSI stream generator and learning-task packaging.

The channel is a sum of exponentially-decaying multipath taps.  Each tap
carries an N_r x N_t matrix of white complex gains that evolve in time as a
first-order autoregressive process whose coefficient rho = J0(2 pi f_D dt)
reproduces the temporal correlation of isotropic (Clarke/Jakes) scattering at
the configured Doppler.  Taps are converted to per-tone frequency responses
and spatially colored with Kronecker square-root factors built from the same
J0 law across the arrays.

A stream of snapshots is cut into equal contiguous "environments", one per
configured UE speed; every boundary re-derives rho and re-draws the tap gains
from a fresh sub-seed, emulating an abrupt trajectory change.  Sliding
windows over the stream give the one-step-ahead regression tensors, with real
and imaginary parts stacked on a leading axis.

Dataset files use the little-endian "UWER1" layout: magic ``UWERDS01``,
six u32 header fields (N_w, T, N_t, N_rb, N_r, env_count), f64 norm_scale,
u16 env ids, then the x and y tensors as contiguous float32.  A JSON sidecar
(same path + ``.json``) stores the generating config.
"""

from __future__ import annotations

import dataclasses
import json
import math
import struct
from dataclasses import dataclass, field

import numpy as np

from .mathcore import Rng, bessel_j0, mat_sqrt_psd

SPEED_OF_LIGHT = 299792458.0

MAGIC = b"UWERDS01"
_HEADER = struct.Struct("<6Id")  # N_w, T, N_t, N_rb, N_r, env_count, norm_scale


class DatasetFormatError(Exception):
    pass


@dataclass
class ChannelConfig:
    carrier_hz: float = 5e9
    bandwidth_hz: float = 100e6
    n_tx: int = 8
    n_rx: int = 2
    n_rb: int = 18
    subcarrier_spacing_hz: float = 30e3  # informational
    sample_interval_s: float = 1e-3
    n_paths: int = 12
    tap_spacing_s: float = 30e-9
    rms_delay_spread_s: float = 100e-9
    antenna_spacing_wavelengths: float = 0.5
    lookback: int = 32
    n_samples: int = 8000
    env_speeds_kmh: list = field(default_factory=lambda: [30.0, 60.0, 90.0, 120.0])
    seed: int = 0

    def validate(self):
        if self.n_paths < 1:
            raise ValueError("n_paths must be >= 1")
        if self.lookback < 1:
            raise ValueError("lookback must be >= 1")
        if self.n_samples <= self.lookback:
            raise ValueError("n_samples must exceed lookback")
        if not self.env_speeds_kmh or any(v <= 0 for v in self.env_speeds_kmh):
            raise ValueError("env_speeds_kmh must be non-empty and all > 0")
        for name in ("carrier_hz", "bandwidth_hz", "sample_interval_s",
                     "tap_spacing_s", "rms_delay_spread_s",
                     "antenna_spacing_wavelengths"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be > 0")
        for name in ("n_tx", "n_rx", "n_rb"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        return self

    def doppler_hz(self, speed_kmh: float) -> float:
        return (speed_kmh / 3.6) * self.carrier_hz / SPEED_OF_LIGHT

    @property
    def in_dim(self) -> int:
        return 2 * self.n_tx * self.n_rb * self.n_rx

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ChannelConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise ValueError(f"unknown config field(s): {sorted(unknown)}")
        return cls(**d)


@dataclass
class MultipathState:
    """Per-path powers/delays and the white AR-evolving gain matrices."""

    powers: np.ndarray   # [L], sums to 1
    delays: np.ndarray   # [L] seconds
    gains: np.ndarray    # [L, N_r, N_t] complex128
    rho: float

    def validate(self):
        if abs(float(self.powers.sum()) - 1.0) >= 1e-12:
            raise ValueError("path powers must sum to 1")
        if not -1.0 <= self.rho <= 1.0:
            raise ValueError("rho must lie in [-1, 1]")
        return self


def jakes_rho(f_doppler_hz: float, dt_s: float) -> float:
    """AR(1) coefficient J0(2 pi f_D dt) for the given Doppler and spacing."""
    if f_doppler_hz < 0:
        raise ValueError("Doppler frequency must be >= 0")
    if dt_s <= 0:
        raise ValueError("sample interval must be > 0")
    return bessel_j0(2.0 * math.pi * f_doppler_hz * dt_s)


def exp_pdp(n_paths: int, tap_spacing_s: float, tau_rms_s: float):
    """Exponential power delay profile, normalized to unit total power."""
    if n_paths < 1 or tap_spacing_s <= 0 or tau_rms_s <= 0:
        raise ValueError("exp_pdp arguments must be positive")
    delays = np.arange(n_paths, dtype=np.float64) * tap_spacing_s
    powers = np.exp(-delays / tau_rms_s)
    powers /= powers.sum()
    return powers, delays


def spatial_roots(config: ChannelConfig):
    """PSD square roots of the RX and TX Toeplitz correlation matrices.

    Entry (i, j) is J0(2 pi d |i - j|) with d the element spacing in
    wavelengths, the isotropic-scattering spatial correlation for a ULA.
    """
    d = config.antenna_spacing_wavelengths

    def toeplitz_root(n):
        vals = np.array([bessel_j0(2.0 * math.pi * d * k) for k in range(n)])
        idx = np.abs(np.subtract.outer(np.arange(n), np.arange(n)))
        return mat_sqrt_psd(vals[idx].astype(np.complex128))

    return toeplitz_root(config.n_rx), toeplitz_root(config.n_tx)


def init_multipath(config: ChannelConfig, rho: float, rng: Rng) -> MultipathState:
    """Fresh tap state with gains drawn from CN(0, p_l) per entry."""
    powers, delays = exp_pdp(config.n_paths, config.tap_spacing_s,
                             config.rms_delay_spread_s)
    n = config.n_paths * config.n_rx * config.n_tx
    white = rng.cgaussians(n).reshape(config.n_paths, config.n_rx, config.n_tx)
    gains = white * np.sqrt(powers)[:, None, None]
    return MultipathState(powers=powers, delays=delays, gains=gains, rho=rho)


def ar1_step(state: MultipathState, rng: Rng) -> MultipathState:
    """One AR(1) update g <- rho g + sqrt(1 - rho^2) w, w ~ CN(0, p_l).

    Stationary per-entry variance p_l is preserved for any rho in [-1, 1].
    Always consumes the same number of draws, so seeded streams replay.
    """
    L, nr, nt = state.gains.shape
    white = rng.cgaussians(L * nr * nt).reshape(L, nr, nt)
    w = white * np.sqrt(state.powers)[:, None, None]
    rho = state.rho
    gains = rho * state.gains + math.sqrt(max(0.0, 1.0 - rho * rho)) * w
    return MultipathState(powers=state.powers, delays=state.delays,
                          gains=gains, rho=rho)


def tone_offsets_hz(config: ChannelConfig) -> np.ndarray:
    """Band-centered uniform tone grid: f_k = (k - (N_rb-1)/2) * (BW / N_rb)."""
    k = np.arange(config.n_rb, dtype=np.float64)
    return (k - (config.n_rb - 1) / 2.0) * (config.bandwidth_hz / config.n_rb)


def _response_stack(gains_stack, delays, rx_half, tx_half, tones):
    """Frequency responses for a stack of gain states.

    gains_stack [S, L, N_r, N_t] -> H [S, N_rb, N_r, N_t] where
    H_k = R_rx^{1/2} (sum_l G_l e^{-j 2 pi f_k tau_l}) R_tx^{1/2}.
    """
    phasor = np.exp(-2j * np.pi * np.outer(tones, delays))  # [N_rb, L]
    flat = np.einsum("kl,slmn->skmn", phasor, gains_stack)
    return rx_half[None, None] @ flat @ tx_half[None, None]


def freq_response(state: MultipathState, rx_half, tx_half, tones) -> np.ndarray:
    """Per-tone MIMO response for one snapshot, shape [N_rb, N_r, N_t]."""
    return _response_stack(state.gains[None], state.delays, rx_half, tx_half,
                           np.asarray(tones, dtype=np.float64))[0]


def _stack_reim(h: np.ndarray) -> np.ndarray:
    """[.., N_rb, N_r, N_t] complex -> [.., 2, N_t, N_rb, N_r] float."""
    reordered = np.moveaxis(h, (-3, -2, -1), (-2, -1, -3))  # -> [.., N_t, N_rb, N_r]
    return np.stack([reordered.real, reordered.imag], axis=-4)


@dataclass
class CsiDataset:
    """Windowed one-step-ahead prediction tensors over the snapshot stream.

    ``frames`` holds the normalized float32 snapshots [N, 2, N_t, N_rb, N_r];
    ``x`` is a zero-copy strided view [N_w, T, 2, N_t, N_rb, N_r] onto it and
    ``y`` is ``frames[T:]``, so window i's target is bit-identical to window
    i+1's last input frame.
    """

    frames: np.ndarray
    env_id: np.ndarray       # [N_w] int, environment of the target snapshot
    norm_scale: float
    config: ChannelConfig

    @property
    def lookback(self) -> int:
        return self.config.lookback

    @property
    def n_windows(self) -> int:
        return self.frames.shape[0] - self.config.lookback

    @property
    def n_envs(self) -> int:
        return int(self.env_id.max()) + 1 if self.env_id.size else 0

    @property
    def x(self) -> np.ndarray:
        t = self.config.lookback
        win = np.lib.stride_tricks.sliding_window_view(self.frames, t, axis=0)
        return np.moveaxis(win[: self.n_windows], -1, 1)

    @property
    def y(self) -> np.ndarray:
        return self.frames[self.config.lookback:]

    @property
    def in_dim(self) -> int:
        return self.config.in_dim

    def batch_x(self, idx) -> np.ndarray:
        """Gather windows as float64 [B, T, in_dim] model inputs."""
        idx = np.asarray(idx)
        t = self.config.lookback
        offs = idx[:, None] + np.arange(t)[None, :]
        return self.frames[offs].reshape(len(idx), t, -1).astype(np.float64)

    def batch_y(self, idx) -> np.ndarray:
        idx = np.asarray(idx)
        return self.frames[idx + self.config.lookback].reshape(len(idx), -1).astype(np.float64)

    def env_windows(self, env: int) -> np.ndarray:
        return np.nonzero(self.env_id == env)[0]


def env_segments(n_samples: int, n_envs: int):
    """Equal contiguous snapshot segments [start, stop) per environment."""
    bounds = [n_samples * s // n_envs for s in range(n_envs + 1)]
    return [(bounds[s], bounds[s + 1]) for s in range(n_envs)]


def generate_dataset(config: ChannelConfig) -> CsiDataset:
    """Simulate the full snapshot stream and cut it into training windows.

    Snapshots accumulate in float64 and are stored as float32 after one
    global scaling that makes the mean per-complex-entry power unity.  Each
    environment draws from its own named sub-seed, so inserting or removing
    environments does not disturb the others.
    """
    config.validate()
    rx_half, tx_half = spatial_roots(config)
    tones = tone_offsets_hz(config)
    n = config.n_samples
    speeds = config.env_speeds_kmh
    segments = env_segments(n, len(speeds))

    h_all = np.empty((n, config.n_rb, config.n_rx, config.n_tx), dtype=np.complex128)
    env_of_snapshot = np.empty(n, dtype=np.int64)
    master = Rng(config.seed)
    for s, (start, stop) in enumerate(segments):
        env_rng = master.split(f"env/{s}")
        rho = jakes_rho(config.doppler_hz(speeds[s]), config.sample_interval_s)
        state = init_multipath(config, rho, env_rng)
        gains_seq = np.empty((stop - start,) + state.gains.shape, dtype=np.complex128)
        gains_seq[0] = state.gains
        for t in range(1, stop - start):
            state = ar1_step(state, env_rng)
            gains_seq[t] = state.gains
        h_all[start:stop] = _response_stack(gains_seq, state.delays,
                                            rx_half, tx_half, tones)
        env_of_snapshot[start:stop] = s

    mean_power = float(np.mean(np.abs(h_all) ** 2))
    norm_scale = 1.0 / math.sqrt(mean_power)
    frames = _stack_reim(h_all * norm_scale).astype(np.float32)

    t = config.lookback
    return CsiDataset(frames=frames,
                      env_id=env_of_snapshot[t:].copy(),
                      norm_scale=norm_scale,
                      config=config)


# ---------------------------------------------------------------------------
# UWER1 file format
# ---------------------------------------------------------------------------


def save_dataset(ds: CsiDataset, path, chunk_windows: int = 256):
    """Write the UWER1 file plus its JSON config sidecar.

    The x tensor is streamed window-by-window from the frame store so the
    (much larger) windowed copy never has to exist in memory.
    """
    cfg = ds.config
    n_w = ds.n_windows
    t = cfg.lookback
    path = str(path)
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(_HEADER.pack(n_w, t, cfg.n_tx, cfg.n_rb, cfg.n_rx,
                             len(cfg.env_speeds_kmh), ds.norm_scale))
        f.write(ds.env_id.astype("<u2").tobytes())
        for i0 in range(0, n_w, chunk_windows):
            i1 = min(i0 + chunk_windows, n_w)
            offs = np.arange(i0, i1)[:, None] + np.arange(t)[None, :]
            f.write(np.ascontiguousarray(ds.frames[offs], dtype="<f4").tobytes())
        f.write(np.ascontiguousarray(ds.y, dtype="<f4").tobytes())
    with open(path + ".json", "w") as f:
        json.dump(cfg.to_dict(), f, indent=2, sort_keys=True)
        f.write("\n")


def load_dataset(path) -> CsiDataset:
    """Read a UWER1 file back into a CsiDataset.

    The frame store is reconstructed from the first window plus the target
    stream, which the format guarantees to be a contiguous snapshot history;
    the x windows of the returned dataset are therefore views, not a second
    copy of the file payload.
    """
    path = str(path)
    with open(path + ".json") as f:
        config = ChannelConfig.from_dict(json.load(f))
    with open(path, "rb") as f:
        raw = f.read()
    if raw[:8] != MAGIC:
        raise DatasetFormatError(f"{path}: bad magic, not a UWER1 file")
    n_w, t, n_tx, n_rb, n_rx, env_count, norm_scale = _HEADER.unpack_from(raw, 8)
    if (t, n_tx, n_rb, n_rx) != (config.lookback, config.n_tx, config.n_rb, config.n_rx):
        raise DatasetFormatError(f"{path}: header dims disagree with sidecar config")
    off = 8 + _HEADER.size
    env_id = np.frombuffer(raw, dtype="<u2", count=n_w, offset=off).astype(np.int64)
    off += 2 * n_w
    frame_elems = 2 * n_tx * n_rb * n_rx
    x_elems = n_w * t * frame_elems
    y_elems = n_w * frame_elems
    expected = off + 4 * (x_elems + y_elems)
    if len(raw) != expected:
        raise DatasetFormatError(f"{path}: size {len(raw)} != expected {expected}")
    x = np.frombuffer(raw, dtype="<f4", count=x_elems, offset=off)
    x = x.reshape(n_w, t, 2, n_tx, n_rb, n_rx)
    off += 4 * x_elems
    y = np.frombuffer(raw, dtype="<f4", count=y_elems, offset=off)
    y = y.reshape(n_w, 2, n_tx, n_rb, n_rx)
    frames = np.concatenate([x[0], y], axis=0)
    ds = CsiDataset(frames=frames, env_id=env_id, norm_scale=norm_scale,
                    config=config)
    if not (np.array_equal(ds.x[-1], x[-1]) and np.array_equal(ds.x[n_w // 2], x[n_w // 2])):
        raise DatasetFormatError(f"{path}: window payload is not a sliding view "
                                 "of a single snapshot stream")
    return ds
