"""Objective evaluation: WER/CER, mel-cepstral distortion, STOI and grouped reports."""

from __future__ import annotations

import csv
import io
import json
import math
import unicodedata
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from swarakit import dsp, kernels
from swarakit.audio_io import AudioBuffer, resample
from swarakit.errors import (
    CoeffMismatch,
    EmptyReference,
    LengthMismatch,
    MissingMetric,
    RateMismatch,
    SignalTooShort,
)


@dataclass(frozen=True)
class EditCounts:
    substitutions: int
    insertions: int
    deletions: int

    @property
    def total(self) -> int:
        return self.substitutions + self.insertions + self.deletions


def _intern(ref: Sequence, hyp: Sequence) -> tuple[np.ndarray, np.ndarray]:
    table: dict = {}
    r = [table.setdefault(t, len(table)) for t in ref]
    h = [table.setdefault(t, len(table)) for t in hyp]
    return np.asarray(r, dtype=np.int64), np.asarray(h, dtype=np.int64)


def edit_distance(ref: Sequence, hyp: Sequence) -> EditCounts:
    """Levenshtein alignment counts; backtrace prefers substitution, then insertion."""
    r, h = _intern(ref, hyp)
    return EditCounts(*kernels.edit_ops(r, h))


def normalize_text(text: str) -> str:
    """Lowercase, drop Unicode punctuation, collapse whitespace."""
    kept = "".join(" " if unicodedata.category(ch).startswith("P") else ch for ch in text.lower())
    return " ".join(kept.split())


def tokenize(text: str, tokenizer: str = "word") -> list[str]:
    norm = normalize_text(text)
    if tokenizer == "word":
        return norm.split()
    if tokenizer == "char":
        return [ch for ch in norm if not ch.isspace()]
    raise ValueError(f"tokenizer must be 'word' or 'char', got {tokenizer!r}")


def wer(ref: str, hyp: str, tokenizer: str = "word") -> float:
    ref_tokens = tokenize(ref, tokenizer)
    if not ref_tokens:
        raise EmptyReference("reference has no tokens after normalization")
    return edit_distance(ref_tokens, tokenize(hyp, tokenizer)).total / len(ref_tokens)


def relative_improvement(baseline: float, system: float) -> float:
    """Fractional reduction from ``baseline`` to ``system`` (e.g. WER)."""
    if baseline == 0:
        raise ValueError("baseline must be nonzero")
    return (baseline - system) / baseline


# --------------------------------------------------------------------------
# alignment and MCD

def dtw_align(cost) -> tuple[np.ndarray, float]:
    """Minimum-cost monotone alignment path and its summed cost. Ties prefer the diagonal."""
    c = np.asarray(cost, dtype=np.float64)
    if c.ndim != 2 or c.shape[0] < 1 or c.shape[1] < 1:
        raise ValueError(f"cost must be a non-empty 2-D matrix, got shape {c.shape}")
    if not np.all(np.isfinite(c)) or np.any(c < 0):
        raise ValueError("costs must be finite and non-negative")
    return kernels.dtw_path(c)


MCD_SCALE = 10.0 / math.log(10.0) * math.sqrt(2.0)


def _pairwise(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    diff = a[:, None, :] - b[None, :, :]
    return np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))


def mcd(ref: dsp.MelCepstra, syn: dsp.MelCepstra, use_dtw: bool = True) -> float:
    """Mel-cepstral distortion in dB over coefficients 1..C-1, averaged over aligned frames."""
    if ref.n_coeffs != syn.n_coeffs or ref.coeffs.shape[1] != syn.coeffs.shape[1]:
        raise CoeffMismatch(f"{ref.coeffs.shape[1]} vs {syn.coeffs.shape[1]} coefficients")
    a = np.asarray(ref.coeffs, dtype=np.float64)[:, 1:]
    b = np.asarray(syn.coeffs, dtype=np.float64)[:, 1:]
    if use_dtw:
        path, _ = dtw_align(_pairwise(a, b))
        d = a[path[:, 0]] - b[path[:, 1]]
    else:
        if a.shape[0] != b.shape[0]:
            raise LengthMismatch(f"{a.shape[0]} vs {b.shape[0]} frames (use DTW for unequal lengths)")
        d = a - b
    return float(MCD_SCALE * np.mean(np.sqrt(np.sum(d * d, axis=1))))


# --------------------------------------------------------------------------
# STOI

STOI_FS = 10000
STOI_FRAME = 256
STOI_NFFT = 512
STOI_BANDS = 15
STOI_MIN_FREQ = 150.0
STOI_SEGMENT = 30  # frames, 384 ms
STOI_BETA_DB = -15.0
STOI_DYN_RANGE_DB = 40.0
_EPS = np.finfo(np.float64).eps


def _third_octave_matrix() -> np.ndarray:
    f = np.linspace(0, STOI_FS, STOI_NFFT + 1)[: STOI_NFFT // 2 + 1]
    k = np.arange(STOI_BANDS)
    lo = STOI_MIN_FREQ * 2.0 ** ((2 * k - 1) / 6.0)
    hi = STOI_MIN_FREQ * 2.0 ** ((2 * k + 1) / 6.0)
    obm = np.zeros((STOI_BANDS, f.size))
    for i in range(STOI_BANDS):
        a = int(np.argmin((f - lo[i]) ** 2))
        b = int(np.argmin((f - hi[i]) ** 2))
        obm[i, a:b] = 1.0
    return obm


def _stoi_window() -> np.ndarray:
    return np.hanning(STOI_FRAME + 2)[1:-1]


def _frame_starts(n: int) -> range:
    return range(0, n - STOI_FRAME, STOI_FRAME // 2)


def _remove_silent_frames(x: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    w = _stoi_window()
    hop = STOI_FRAME // 2
    starts = list(_frame_starts(len(x)))
    xf = np.array([w * x[s:s + STOI_FRAME] for s in starts])
    yf = np.array([w * y[s:s + STOI_FRAME] for s in starts])
    energy = 20.0 * np.log10(np.linalg.norm(xf, axis=1) + _EPS)
    keep = (np.max(energy) - STOI_DYN_RANGE_DB - energy) < 0
    xf, yf = xf[keep], yf[keep]
    n = (xf.shape[0] - 1) * hop + STOI_FRAME
    xs, ys = np.zeros(n), np.zeros(n)
    for i in range(xf.shape[0]):
        xs[i * hop:i * hop + STOI_FRAME] += xf[i]
        ys[i * hop:i * hop + STOI_FRAME] += yf[i]
    return xs, ys


def _band_envelopes(x: np.ndarray, obm: np.ndarray) -> np.ndarray:
    w = _stoi_window()
    fr = np.array([w * x[s:s + STOI_FRAME] for s in _frame_starts(len(x))])
    spec = np.fft.rfft(fr, n=STOI_NFFT, axis=1)
    return np.sqrt(obm @ (np.abs(spec) ** 2).T)  # (bands, frames)


def stoi(clean: AudioBuffer, degraded: AudioBuffer) -> float:
    """Short-time objective intelligibility, clamped to [0, 1]."""
    if clean.sample_rate != degraded.sample_rate:
        raise RateMismatch(f"{clean.sample_rate} Hz vs {degraded.sample_rate} Hz")
    n = min(len(clean), len(degraded))
    if n < clean.sample_rate:
        raise SignalTooShort(f"STOI needs at least 1 s of audio, got {n / clean.sample_rate:.3f} s")
    x = resample(AudioBuffer(clean.samples[:n], clean.sample_rate), STOI_FS).samples.astype(np.float64)
    y = resample(AudioBuffer(degraded.samples[:n], degraded.sample_rate), STOI_FS).samples.astype(np.float64)
    x, y = _remove_silent_frames(x, y)
    obm = _third_octave_matrix()
    xb, yb = _band_envelopes(x, obm), _band_envelopes(y, obm)
    if xb.shape[1] < STOI_SEGMENT:
        raise SignalTooShort("not enough non-silent audio for one 384 ms STOI segment")

    clip = 10.0 ** (-STOI_BETA_DB / 20.0)
    scores = []
    for m in range(STOI_SEGMENT, xb.shape[1] + 1):
        xs = xb[:, m - STOI_SEGMENT:m]
        ys = yb[:, m - STOI_SEGMENT:m]
        scale = np.linalg.norm(xs, axis=1, keepdims=True) / (np.linalg.norm(ys, axis=1, keepdims=True) + _EPS)
        yp = np.minimum(ys * scale, xs * (1.0 + clip))
        xc = xs - xs.mean(axis=1, keepdims=True)
        yc = yp - yp.mean(axis=1, keepdims=True)
        xc /= np.linalg.norm(xc, axis=1, keepdims=True) + _EPS
        yc /= np.linalg.norm(yc, axis=1, keepdims=True) + _EPS
        scores.append(np.sum(xc * yc) / STOI_BANDS)
    return float(np.clip(np.mean(scores), 0.0, 1.0))


# --------------------------------------------------------------------------
# per-utterance features and grouped reports

QUALITY_METRICS = ("wer", "mcd_db", "stoi")
FEATURE_METRICS = ("mean_spectral_centroid", "mfcc_std", "mean_zcr", "mean_energy", "duration_s")
REPORT_METRICS = QUALITY_METRICS + FEATURE_METRICS
GROUP_COLUMNS = ("language", "emotion", "n_utts")


def signal_features(buf: AudioBuffer) -> dict[str, float]:
    spec = dsp.stft(buf)
    cep = dsp.mfcc(dsp.mel_spectrogram(spec))
    return {
        "mean_spectral_centroid": float(np.mean(dsp.spectral_centroid(spec))),
        # spread of each coefficient over time, averaged over coefficients
        "mfcc_std": float(np.mean(np.std(cep.coeffs, axis=0))),
        "mean_zcr": float(np.mean(dsp.zero_crossing_rate(buf))),
        "mean_energy": float(np.mean(dsp.rms_energy(buf))),
        "duration_s": buf.duration_seconds,
    }


def utterance_metrics(ref_text: str, hyp_text: str, ref_buf: AudioBuffer, hyp_buf: AudioBuffer,
                      tokenizer: str = "word") -> dict[str, float]:
    """All report metrics for one reference/hypothesis pair; features describe the hypothesis audio."""
    out = {
        "wer": wer(ref_text, hyp_text, tokenizer),
        "mcd_db": mcd(dsp.mfcc_from_audio(ref_buf), dsp.mfcc_from_audio(hyp_buf), use_dtw=True),
        "stoi": stoi(ref_buf, hyp_buf),
    }
    out.update(signal_features(hyp_buf))
    return out


@dataclass(frozen=True)
class ReportRow:
    language: str
    emotion: str
    n_utts: int
    values: Mapping[str, float] = field(default_factory=dict)


@dataclass(frozen=True)
class EvalReport:
    rows: tuple[ReportRow, ...]
    columns: tuple[str, ...]  # metric columns, in output order

    @property
    def header(self) -> tuple[str, ...]:
        return GROUP_COLUMNS + self.columns


def build_report(records, metrics: Mapping[str, Mapping[str, float]],
                 extra_columns: Sequence[str] = ()) -> EvalReport:
    """Mean of every metric per (language, emotion), rows in lexicographic group order.

    ``records`` need ``id``, ``language`` and ``emotion``; ``metrics`` maps
    record id to its metric values. ``extra_columns`` (e.g. externally
    supplied PESQ or MOS) are appended after the fixed columns.
    """
    columns = REPORT_METRICS + tuple(c for c in extra_columns if c not in REPORT_METRICS)
    groups: dict[tuple[str, str], list[Mapping[str, float]]] = {}
    for rec in records:
        vals = metrics.get(rec.id)
        for col in columns:
            if vals is None or col not in vals:
                raise MissingMetric(rec.id, col)
        groups.setdefault((rec.language, str(rec.emotion)), []).append(vals)
    rows = []
    for (lang, emo) in sorted(groups):
        members = groups[(lang, emo)]
        means = {col: math.fsum(float(v[col]) for v in members) / len(members) for col in columns}
        rows.append(ReportRow(lang, emo, len(members), means))
    return EvalReport(tuple(rows), columns)


def _fmt(value) -> str:
    return repr(float(value)) if isinstance(value, (float, np.floating)) else str(value)


def report_csv(report: EvalReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(report.header)
    for row in report.rows:
        w.writerow([row.language, row.emotion, row.n_utts] + [_fmt(row.values[c]) for c in report.columns])
    return buf.getvalue()


def report_long_csv(report: EvalReport) -> str:
    """One line per (group, metric): language, emotion, metric, value."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("language", "emotion", "metric", "value"))
    for row in report.rows:
        for col in report.columns:
            w.writerow((row.language, row.emotion, col, _fmt(row.values[col])))
    return buf.getvalue()


def report_json(report: EvalReport) -> str:
    doc = {
        "columns": list(report.header),
        "rows": [
            {"language": r.language, "emotion": r.emotion, "n_utts": r.n_utts,
             **{c: r.values[c] for c in report.columns}}
            for r in report.rows
        ],
    }
    return json.dumps(doc, ensure_ascii=False, indent=2) + "\n"
