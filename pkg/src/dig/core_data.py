"""Observed multivariate series, windowing and histogram statistics.

The observed process is a ``T x c`` array sampled at a fixed rate. Windows of
``L1`` samples are summarised by per-channel histograms (concatenated into one
vector of length ``Nb * c``), and the histogram sequence is summarised locally
by a mean and covariance over ``L2`` neighbouring windows.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np


@dataclass
class MultivariateSeries:
    values: np.ndarray
    sample_rate_hz: float
    labels: Optional[np.ndarray] = None
    name: str = "series"
    channel_names: Optional[list] = None

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim == 1:
            values = values[:, None]
        if values.ndim != 2 or values.shape[0] < 1 or values.shape[1] < 1:
            raise ValueError(f"values must be a non-empty T x c matrix, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("values contain non-finite entries")
        if not self.sample_rate_hz > 0:
            raise ValueError(f"sample_rate_hz must be positive, got {self.sample_rate_hz}")
        self.values = values
        if self.labels is not None:
            self.labels = np.asarray(self.labels)
        if self.channel_names is None:
            self.channel_names = [f"ch{i}" for i in range(values.shape[1])]
        elif len(self.channel_names) != values.shape[1]:
            raise ValueError("channel_names length does not match channel count")

    @property
    def n_samples(self) -> int:
        return self.values.shape[0]

    @property
    def n_channels(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class WindowSpec:
    length: int
    stride: int

    def __post_init__(self):
        if self.length < 1:
            raise ValueError(f"window length must be positive, got {self.length}")
        if self.stride < 1:
            raise ValueError(f"window stride must be positive, got {self.stride}")

    def count(self, n_samples: int) -> int:
        if self.length > n_samples:
            raise ValueError(f"window length {self.length} exceeds series length {n_samples}")
        return (n_samples - self.length) // self.stride + 1

    def starts(self, n_samples: int) -> np.ndarray:
        return np.arange(self.count(n_samples)) * self.stride

    def centers(self, n_samples: int) -> np.ndarray:
        """Window centre positions in samples (start + L1/2)."""
        return self.starts(n_samples) + self.length / 2.0


@dataclass
class HistogramSequence:
    histograms: np.ndarray
    bin_edges: list
    n_bins: int

    @property
    def n_windows(self) -> int:
        return self.histograms.shape[0]

    @property
    def n_channels(self) -> int:
        return len(self.bin_edges)


@dataclass
class LocalStats:
    mean_hist: np.ndarray
    cov: np.ndarray
    window_index: int
    # scaled deviations with cov == factor.T @ factor; lets distances work in the low-rank space
    factor: Optional[np.ndarray] = None


# -- preprocessing -----------------------------------------------------------


def bandpass_fir(sample_rate_hz: float, low_hz: float, high_hz: float,
                 transition_hz: float = 2.0) -> np.ndarray:
    """Linear-phase windowed-sinc band-pass taps.

    Built as the difference of two Hamming-windowed low-pass filters, each
    normalised to unit DC gain, so the band-pass has exactly zero DC gain.
    The tap count is odd and large enough that the Hamming transition width
    (about ``3.3 * fs / ntaps``) does not exceed ``transition_hz``.
    """
    ntaps = int(math.ceil(3.3 * sample_rate_hz / transition_hz))
    ntaps += 1 - ntaps % 2
    n = np.arange(ntaps) - (ntaps - 1) / 2
    window = np.hamming(ntaps)

    def lowpass(cutoff):
        h = np.sinc(2 * cutoff / sample_rate_hz * n) * window
        return h / h.sum()

    return lowpass(high_hz) - lowpass(low_hz)


def fir_response(taps: np.ndarray, freq_hz: float, sample_rate_hz: float) -> float:
    """Magnitude of the frequency response of ``taps`` at ``freq_hz``."""
    n = np.arange(len(taps)) - (len(taps) - 1) / 2
    return float(abs(np.sum(taps * np.exp(-2j * np.pi * freq_hz / sample_rate_hz * n))))


def preprocess_bandpass_downsample(series: MultivariateSeries, low_hz: float, high_hz: float,
                                   target_rate_hz: float) -> MultivariateSeries:
    """Zero-phase band-pass each channel, then decimate to ``target_rate_hz``.

    The symmetric FIR is applied centred (``mode='same'``), so no phase shift
    is introduced. Samples within half a filter length of either end carry
    edge effects.
    """
    fs = series.sample_rate_hz
    if not 0 < low_hz < high_hz < fs / 2:
        raise ValueError(f"need 0 < low_hz < high_hz < Nyquist ({fs / 2} Hz), "
                         f"got low={low_hz}, high={high_hz}")
    if high_hz >= target_rate_hz / 2:
        raise ValueError(f"high cutoff {high_hz} Hz is above the target Nyquist {target_rate_hz / 2} Hz")
    ratio = fs / target_rate_hz
    factor = int(round(ratio))
    if factor < 1 or abs(ratio - factor) > 1e-9:
        raise ValueError(f"target rate {target_rate_hz} Hz does not divide {fs} Hz evenly")
    taps = bandpass_fir(fs, low_hz, high_hz)
    filtered = np.column_stack([np.convolve(series.values[:, j], taps, mode="same")
                                for j in range(series.n_channels)])
    labels = series.labels[::factor] if series.labels is not None and len(series.labels) == series.n_samples \
        else series.labels
    return MultivariateSeries(filtered[::factor], target_rate_hz, labels=labels,
                              name=series.name, channel_names=list(series.channel_names))


# -- windowing and histograms ------------------------------------------------


def slice_windows(series: MultivariateSeries, spec: WindowSpec) -> list:
    """Contiguous windows; window ``i`` covers ``[i*stride, i*stride + L1)``."""
    return [series.values[s:s + spec.length] for s in spec.starts(series.n_samples)]


def window_labels(labels: Sequence, spec: WindowSpec, n_samples: int) -> np.ndarray:
    """Per-window labels: passthrough for per-window input, majority vote for per-sample."""
    labels = np.asarray(labels)
    n_windows = spec.count(n_samples)
    if len(labels) == n_windows and len(labels) != n_samples:
        return labels
    if len(labels) != n_samples:
        raise ValueError(f"label count {len(labels)} matches neither samples ({n_samples}) "
                         f"nor windows ({n_windows})")
    out = []
    for s in spec.starts(n_samples):
        out.append(Counter(labels[s:s + spec.length].tolist()).most_common(1)[0][0])
    return np.asarray(out)


def global_edges(values: np.ndarray, n_bins: int) -> list:
    edges = []
    for j in range(values.shape[1]):
        lo, hi = float(values[:, j].min()), float(values[:, j].max())
        if not hi > lo:
            raise ValueError(f"channel {j} is constant; pass explicit bin edges")
        edges.append(np.linspace(lo, hi, n_bins + 1))
    return edges


def _bin_counts(x: np.ndarray, edges: np.ndarray) -> np.ndarray:
    nb = len(edges) - 1
    # right-closed last bin, values outside the edges fall in the outer bins
    idx = np.searchsorted(edges, x, side="right") - 1
    idx = np.clip(idx, 0, nb - 1)
    return np.bincount(idx, minlength=nb).astype(float)


def estimate_histograms(windows: Sequence[np.ndarray], n_bins: int, edges_mode: str = "global-minmax",
                        edges: Optional[Sequence] = None,
                        series_values: Optional[np.ndarray] = None) -> HistogramSequence:
    """Normalised per-channel histograms of each window, concatenated.

    With ``edges_mode='global-minmax'`` the bins of channel ``j`` span that
    channel's min/max over ``series_values`` (default: all windows stacked).
    With ``'explicit'`` the given ``edges`` are used; out-of-range samples are
    counted in the outermost bins.
    """
    if n_bins < 2:
        raise ValueError(f"need at least 2 bins, got {n_bins}")
    if len(windows) == 0:
        raise ValueError("no windows")
    windows = [np.asarray(w, dtype=float).reshape(len(w), -1) for w in windows]
    c = windows[0].shape[1]
    if edges_mode == "global-minmax":
        ref = series_values if series_values is not None else np.vstack(windows)
        edges = global_edges(np.asarray(ref, dtype=float).reshape(-1, c), n_bins)
    elif edges_mode == "explicit":
        if edges is None:
            raise ValueError("explicit edges_mode requires edges")
        edges = [np.asarray(e, dtype=float) for e in edges]
        if len(edges) == 1 and c > 1:
            edges = edges * c
        if len(edges) != c:
            raise ValueError(f"expected edges for {c} channels, got {len(edges)}")
        for j, e in enumerate(edges):
            if len(e) != n_bins + 1 or np.any(np.diff(e) <= 0):
                raise ValueError(f"edges for channel {j} must be {n_bins + 1} strictly increasing values")
    else:
        raise ValueError(f"unknown edges_mode {edges_mode!r}")

    hists = np.empty((len(windows), n_bins * c))
    for i, w in enumerate(windows):
        for j in range(c):
            counts = _bin_counts(w[:, j], edges[j])
            hists[i, j * n_bins:(j + 1) * n_bins] = counts / counts.sum()
    return HistogramSequence(hists, edges, n_bins)


def local_window(t: int, n: int, l2: int) -> slice:
    """Index range of the ``L2`` window centred at ``t``, truncated at the ends."""
    lo = t - l2 // 2
    return slice(max(lo, 0), min(lo + l2, n))


def local_histogram_stats(hists: HistogramSequence, l2: int) -> list:
    """Local mean and sample covariance of the histograms around each window."""
    h = hists.histograms
    n = h.shape[0]
    if l2 < 2:
        raise ValueError(f"L2 must be at least 2, got {l2}")
    if l2 > n:
        raise ValueError(f"L2={l2} exceeds the number of windows {n}")
    out = []
    for t in range(n):
        block = h[local_window(t, n, l2)]
        mean = block.mean(axis=0)
        dev = block - mean
        factor = dev / np.sqrt(max(len(block) - 1, 1))
        cov = factor.T @ factor
        out.append(LocalStats(mean, 0.5 * (cov + cov.T), t, factor))
    return out
