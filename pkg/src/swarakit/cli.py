"""Command-line entry point: ``swarakit <command> ...``.

Exit codes: 0 success, 1 data error, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from swarakit import __version__, codec, dsp, metrics, recipes, tagging, translit
from swarakit.audio_io import AudioBuffer, peak_normalize, read_wav, resample, write_wav
from swarakit.corpus import add_noise
from swarakit.describe import default_template, describe_corpus, load_template
from swarakit.errors import DimensionMismatch, MissingMetric, SwaraError
from swarakit.manifest import (
    UtteranceRecord,
    load_manifest,
    resolve_audio,
    script_consistent,
    validate_pairing,
    write_manifest,
)
from swarakit.tagging import EmotionLabel

EXIT_OK, EXIT_DATA, EXIT_USAGE = 0, 1, 2
CODES_FORMAT = "swarakit-codes"


class UsageError(Exception):
    pass


def _err(msg: str) -> None:
    print(f"error: {msg}", file=sys.stderr)


def _warn(msg: str) -> None:
    print(f"warning: {msg}", file=sys.stderr)


def _pmap(fn: Callable, items: Sequence, jobs: int) -> list:
    """Ordered map; results come back in input order for any ``jobs``."""
    if jobs <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(jobs) as pool:
        return list(pool.map(fn, items))


def _capture(fn: Callable) -> Callable:
    """Wrap ``fn`` so per-item failures come back as values instead of raising."""
    def run(item):
        try:
            return fn(item), None
        except (SwaraError, ValueError, OSError) as exc:
            return None, exc
    return run


def _report_diagnostics(rec_id: str, diags, strict: bool) -> bool:
    for d in diags:
        (_err if strict else _warn)(f"{rec_id}: {d.code}: {d.message}")
    return strict and bool(diags)


def _load_audio(manifest_path: Path, rec: UtteranceRecord) -> AudioBuffer:
    return read_wav(resolve_audio(manifest_path.parent.resolve(), rec.audio_path))


# --------------------------------------------------------------------------
# ingest

def _infer_language(text: str) -> str:
    scripts = {s.script for s in translit.segment_scripts(text)}
    if {"latin", "devanagari"} <= scripts:
        return "mixed"
    return "hindi" if "devanagari" in scripts else "english"


def _read_sidecar(wav: Path) -> dict:
    js, txt = wav.with_suffix(".json"), wav.with_suffix(".txt")
    if js.is_file():
        doc = json.loads(js.read_text(encoding="utf-8"))
        if not isinstance(doc, dict) or not isinstance(doc.get("transcription"), str):
            raise SwaraError(f"{js.name}: sidecar needs a 'transcription' string")
    elif txt.is_file():
        doc = {"transcription": txt.read_text(encoding="utf-8").strip()}
    else:
        raise SwaraError(f"no sidecar transcript ({js.name} or {txt.name})")
    text = doc["transcription"]
    if not text.strip():
        raise SwaraError("sidecar transcript is empty")
    return {
        "transcription": text,
        "language": doc.get("language") or _infer_language(text),
        "emotion": doc.get("emotion") or EmotionLabel.DEFAULT.value,
        "speaker": doc.get("speaker") or "",
    }


def cmd_ingest(args) -> int:
    in_dir, out_dir = Path(args.in_dir), Path(args.out_dir)
    if not in_dir.is_dir():
        raise UsageError(f"input directory {in_dir} does not exist")
    audio_dir = out_dir / "audio"
    audio_dir.mkdir(parents=True, exist_ok=True)
    wavs = sorted(p for p in in_dir.iterdir() if p.suffix.lower() == ".wav")

    def one(wav: Path):
        meta = _read_sidecar(wav)
        rec = UtteranceRecord.from_json({"id": wav.stem, "audio_path": f"audio/{wav.stem}.wav", **meta})
        if not script_consistent(rec):
            raise SwaraError(f"transcription script does not match language {rec.language!r}")
        buf = peak_normalize(resample(read_wav(wav), args.rate), args.peak)
        write_wav(buf, audio_dir / f"{wav.stem}.wav")
        return rec, validate_pairing(rec, buf)

    records, failed = [], 0
    for wav, (res, exc) in zip(wavs, _pmap(_capture(one), wavs, args.jobs)):
        if exc is not None:
            _err(f"{wav.name}: {exc}")
            failed += 1
            continue
        rec, diags = res
        if _report_diagnostics(rec.id, diags, args.strict):
            failed += 1
            continue
        records.append(rec)
    write_manifest(records, out_dir / "manifest.jsonl")
    print(f"ingested {len(records)} of {len(wavs)} files into {out_dir / 'manifest.jsonl'}")
    return EXIT_DATA if failed else EXIT_OK


# --------------------------------------------------------------------------
# tag / describe

def cmd_tag(args) -> int:
    if args.bin_edges is not None:
        try:
            edges = tagging.load_bin_edges(args.bin_edges)
        except (OSError, ValueError, KeyError) as exc:
            raise UsageError(f"cannot load bin edges {args.bin_edges}: {exc}") from None
    else:
        edges = tagging.default_bin_edges()
    path = Path(args.manifest)
    records = load_manifest(path)

    def one(rec: UtteranceRecord):
        buf = _load_audio(path, rec)
        return tagging.tag_utterance(rec, buf, edges), validate_pairing(rec, buf)

    out, failed = [], 0
    for rec, (res, exc) in zip(records, _pmap(_capture(one), records, args.jobs)):
        if exc is not None:
            _err(f"{rec.id}: {type(exc).__name__}: {exc}")
            failed += 1
            continue
        tags, diags = res
        if _report_diagnostics(rec.id, diags, args.strict):
            failed += 1
            continue
        out.append(dataclasses.replace(rec, tags=tags))
    if failed:
        _err(f"{failed} record(s) failed; manifest not written")
        return EXIT_DATA
    write_manifest(out, args.output or path)
    for rec in out:
        labels = ", ".join(f"{k}={rec.tags.labels[k]}" for k in sorted(rec.tags.labels))
        print(f"{rec.id}\t{labels}")
    return EXIT_OK


def cmd_describe(args) -> int:
    template = load_template(args.template) if args.template else default_template()
    path = Path(args.manifest)
    records = load_manifest(path)
    out = describe_corpus(records, template, base_seed=args.seed, speaker=args.speaker)
    write_manifest(out, args.output or path)
    for rec in out:
        print(f"{rec.id}\t{rec.description}")
    return EXIT_OK


# --------------------------------------------------------------------------
# translit

def cmd_translit(args) -> int:
    scheme = translit.load_scheme(args.scheme) if args.scheme else translit.default_scheme()
    if args.file:
        text = Path(args.file).read_text(encoding="utf-8")
    elif args.text is not None:
        text = args.text
    else:
        raise UsageError("give TEXT or --file")

    if args.segment:
        for span in translit.segment_scripts(text):
            print(f"{span.script}\t{span.start}\t{span.end}\t{span.text}")
        return EXIT_OK
    if args.phonemes:
        print(translit.count_phonemes(text, args.language, scheme))
        return EXIT_OK
    if args.roundtrip:
        words = text.split()
        ok = 0
        for w in words:
            back = translit.latin_to_deva(translit.deva_to_latin(w, scheme), scheme)
            if back == w:
                ok += 1
            else:
                print(f"mismatch\t{w}\t{back}")
        pct = 100.0 * ok / len(words) if words else 100.0
        print(f"round-trip identity: {ok}/{len(words)} ({pct:.1f}%)")
        return EXIT_OK if ok == len(words) else EXIT_DATA
    if args.to_deva:
        result = "\n".join(translit.latin_to_deva(line, scheme) for line in text.split("\n"))
    else:
        result = "\n".join(translit.deva_to_latin(line, scheme) for line in text.split("\n"))
    if args.output:
        Path(args.output).write_text(result if result.endswith("\n") else result + "\n", encoding="utf-8")
    else:
        print(result.rstrip("\n"))
    return EXIT_OK


# --------------------------------------------------------------------------
# codec

def log_mel_frames(buf: AudioBuffer) -> np.ndarray:
    return dsp.log_mel(dsp.mel_spectrogram(dsp.stft(buf)))


def _manifest_frames(path: Path, jobs: int) -> tuple[list[UtteranceRecord], list[np.ndarray]]:
    records = load_manifest(path)
    feats = _pmap(lambda rec: log_mel_frames(_load_audio(path, rec)), records, jobs)
    return records, feats


def cmd_codec_train(args) -> int:
    _, feats = _manifest_frames(Path(args.manifest), args.jobs)
    frames = np.concatenate(feats) if feats else np.zeros((0, dsp.N_MELS))
    cb = codec.train_rvq(frames, args.levels, args.k, args.max_iters, seed=args.seed, jobs=args.jobs)
    codec.save_codebook(cb, args.output)
    mse = codec.residual_mse(frames, cb)
    stats = codec.codebook_stats(codec.encode(frames, cb), cb)
    print(f"trained on {frames.shape[0]} frames of dimension {frames.shape[1]}")
    for level, (m, st) in enumerate(zip(mse, stats), start=1):
        print(f"level {level}: residual_mse={m:.6f} perplexity={st.perplexity:.3f} dead_codes={st.dead_codes}")
    return EXIT_OK


def _write_codes(path: Path, cb: codec.RvqCodebook, items: Iterable[tuple[str, np.ndarray]]) -> None:
    header = {"format": CODES_FORMAT, "version": 1, "dim": cb.dim, "levels": cb.n_levels,
              "codebook_size": cb.codebook_size}
    lines = [json.dumps(header)]
    lines += [json.dumps({"id": rid, "codes": codes.tolist()}) for rid, codes in items]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _read_codes(path: Path) -> tuple[dict, list[tuple[str, np.ndarray]]]:
    lines = [ln for ln in path.read_text(encoding="utf-8").splitlines() if ln.strip()]
    if not lines:
        raise SwaraError(f"{path}: empty codes file")
    header = json.loads(lines[0])
    if header.get("format") != CODES_FORMAT:
        raise SwaraError(f"{path}: not a codes file")
    items = []
    for ln in lines[1:]:
        doc = json.loads(ln)
        items.append((doc["id"], np.asarray(doc["codes"], dtype=np.int64).reshape(-1, header["levels"])))
    return header, items


def cmd_codec_encode(args) -> int:
    cb = codec.load_codebook(args.codebook)
    records, feats = _manifest_frames(Path(args.manifest), args.jobs)
    items = [(rec.id, codec.encode(f, cb).codes) for rec, f in zip(records, feats)]
    _write_codes(Path(args.output), cb, items)
    print(f"encoded {len(items)} utterances, {sum(c.shape[0] for _, c in items)} frames")
    return EXIT_OK


def cmd_codec_decode(args) -> int:
    cb = codec.load_codebook(args.codebook)
    header, items = _read_codes(Path(args.codes))
    if header["dim"] != cb.dim or header["levels"] != cb.n_levels:
        raise DimensionMismatch(
            f"codes were made for dim={header['dim']}, levels={header['levels']}; "
            f"codebook has dim={cb.dim}, levels={cb.n_levels}"
        )
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    for rid, codes in items:
        np.save(out / f"{rid}.npy", codec.decode(codec.CodeSequence(codes), cb, args.levels_used))
    print(f"decoded {len(items)} utterances into {out}")
    return EXIT_OK


def cmd_codec_roundtrip(args) -> int:
    cb = codec.load_codebook(args.codebook)
    records, feats = _manifest_frames(Path(args.manifest), args.jobs)
    ref = [dsp.MelCepstra(dsp.cepstra_from_log_mel(f), dsp.N_MFCC) for f in feats]
    codes = [codec.encode(f, cb) for f in feats]
    for used in range(1, cb.n_levels + 1):
        vals = []
        for r, c in zip(ref, codes):
            syn = dsp.MelCepstra(dsp.cepstra_from_log_mel(codec.decode(c, cb, used)), dsp.N_MFCC)
            vals.append(metrics.mcd(r, syn, use_dtw=False))
        print(f"levels={used} mean_mcd_db={np.mean(vals):.4f}")
    return EXIT_OK


# --------------------------------------------------------------------------
# eval / degrade / recipe

def _read_external(path: Path) -> tuple[dict[str, dict[str, float]], list[str]]:
    with path.open(encoding="utf-8", newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows or "id" not in rows[0]:
        raise SwaraError(f"{path}: external metrics CSV needs an 'id' column")
    cols = [c for c in rows[0] if c != "id"]
    return {r["id"]: {c: float(r[c]) for c in cols if r[c] not in ("", None)} for r in rows}, cols


def cmd_eval(args) -> int:
    ref_path = Path(args.ref_manifest)
    refs = load_manifest(ref_path)
    hyp_texts: dict[str, str] = {}
    hyp_audio: dict[str, Path] = {}
    if args.hyp_audio_dir:
        d = Path(args.hyp_audio_dir)
        for rec in refs:
            wav = d / f"{rec.id}.wav"
            if wav.is_file():
                hyp_audio[rec.id] = wav
                txt = wav.with_suffix(".txt")
                if txt.is_file():
                    hyp_texts[rec.id] = txt.read_text(encoding="utf-8").strip()
    else:
        hyp_path = Path(args.hyp_manifest)
        for rec in load_manifest(hyp_path):
            hyp_audio[rec.id] = resolve_audio(hyp_path.parent.resolve(), rec.audio_path)
            hyp_texts[rec.id] = rec.transcription
    ref_ids = {r.id for r in refs}
    missing = sorted(ref_ids - set(hyp_audio))
    extra = sorted(set(hyp_audio) - ref_ids)
    if missing or extra:
        if missing:
            _err(f"ids missing from hypothesis: {', '.join(missing)}")
        if extra:
            _err(f"ids missing from reference: {', '.join(extra)}")
        return EXIT_DATA

    def one(rec: UtteranceRecord):
        ref_buf = _load_audio(ref_path, rec)
        hyp_buf = resample(read_wav(hyp_audio[rec.id]), ref_buf.sample_rate)
        if rec.id not in hyp_texts:
            raise MissingMetric(rec.id, "wer")
        return metrics.utterance_metrics(rec.transcription, hyp_texts[rec.id], ref_buf, hyp_buf, args.tokenizer)

    per_utt: dict[str, dict[str, float]] = {}
    failed = 0
    for rec, (res, exc) in zip(refs, _pmap(_capture(one), refs, args.jobs)):
        if exc is not None:
            _err(f"{rec.id}: {type(exc).__name__}: {exc}")
            failed += 1
        else:
            per_utt[rec.id] = res
    if failed:
        return EXIT_DATA

    extra_cols: list[str] = []
    if args.external:
        ext, extra_cols = _read_external(Path(args.external))
        for rid, vals in ext.items():
            if rid in per_utt:
                per_utt[rid].update(vals)
    report = metrics.build_report(refs, per_utt, extra_cols)

    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    cols = metrics.REPORT_METRICS + tuple(c for c in extra_cols if c not in metrics.REPORT_METRICS)
    with (out / "utterances.csv").open("w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("id", "language", "emotion") + cols)
        for rec in refs:
            w.writerow([rec.id, rec.language, str(rec.emotion)] + [repr(float(per_utt[rec.id][c])) for c in cols])
    (out / "report.csv").write_text(metrics.report_csv(report), encoding="utf-8")
    (out / "report_long.csv").write_text(metrics.report_long_csv(report), encoding="utf-8")
    (out / "report.json").write_text(metrics.report_json(report), encoding="utf-8")
    sys.stdout.write(metrics.report_csv(report))
    return EXIT_OK


def cmd_degrade(args) -> int:
    path = Path(args.manifest)
    records = load_manifest(path)
    out = Path(args.output)
    (out / "audio").mkdir(parents=True, exist_ok=True)
    new = []
    for i, rec in enumerate(records):
        noisy = add_noise(_load_audio(path, rec), args.snr, seed=args.seed + i)
        write_wav(noisy, out / "audio" / f"{rec.id}.wav")
        new.append(dataclasses.replace(rec, audio_path=f"audio/{rec.id}.wav", tags=None, description=None))
    write_manifest(new, out / "manifest.jsonl")
    print(f"wrote {len(new)} degraded utterances at {args.snr:g} dB SNR to {out}")
    return EXIT_OK


def cmd_recipe(args) -> int:
    text = recipes.recipe_json(args.stage)
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


# --------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    def global_flags(defaults: bool) -> argparse.ArgumentParser:
        # subcommands repeat the global flags without defaults so a value given
        # before the subcommand is not overwritten
        p = argparse.ArgumentParser(add_help=False)
        kw = {} if defaults else {"default": argparse.SUPPRESS}
        p.add_argument("--jobs", type=int, help="worker threads (outputs do not depend on it)",
                       **(kw or {"default": 1}))
        p.add_argument("--seed", type=int, **(kw or {"default": 0}))
        p.add_argument("--strict", action="store_true", help="treat pairing diagnostics as errors", **kw)
        return p

    common = global_flags(defaults=False)
    ap = argparse.ArgumentParser(prog="swarakit", description="Speech-corpus curation and evaluation toolkit.",
                                 parents=[global_flags(defaults=True)])
    ap.add_argument("--version", action="version", version=f"swarakit {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", parents=[common], help="resample/normalize WAVs and write a manifest")
    p.add_argument("in_dir")
    p.add_argument("out_dir")
    p.add_argument("--rate", type=int, default=44100)
    p.add_argument("--peak", type=float, default=1.0)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("tag", parents=[common], help="compute feature tags and labels")
    p.add_argument("manifest")
    p.add_argument("--bin-edges", default=None)
    p.add_argument("-o", "--output", default=None, help="output manifest (default: overwrite input)")
    p.set_defaults(func=cmd_tag)

    p = sub.add_parser("describe", parents=[common], help="render natural-language descriptions")
    p.add_argument("manifest")
    p.add_argument("--template", default=None)
    p.add_argument("--speaker", default=None, help="force one speaker name for every record")
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=cmd_describe)

    p = sub.add_parser("translit", parents=[common], help="Devanagari <-> Latin transliteration")
    p.add_argument("text", nargs="?")
    p.add_argument("--file")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--to-latin", action="store_true", help="Devanagari to Latin (default)")
    g.add_argument("--to-deva", action="store_true", help="Latin to Devanagari")
    g.add_argument("--segment", action="store_true", help="print script spans")
    g.add_argument("--roundtrip", action="store_true", help="check Devanagari round-trip identity per word")
    g.add_argument("--phonemes", action="store_true", help="print the phoneme count")
    p.add_argument("--language", default="mixed", choices=("hindi", "english", "mixed"))
    p.add_argument("--scheme")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_translit)

    p = sub.add_parser("codec", parents=[common], help="RVQ codebooks over log-mel frames")
    csub = p.add_subparsers(dest="action", required=True)
    c = csub.add_parser("train", parents=[common])
    c.add_argument("manifest")
    c.add_argument("-o", "--output", required=True)
    c.add_argument("--levels", type=int, default=codec.DEFAULT_LEVELS)
    c.add_argument("--k", type=int, default=codec.DEFAULT_K)
    c.add_argument("--max-iters", type=int, default=codec.DEFAULT_MAX_ITERS)
    c.set_defaults(func=cmd_codec_train)
    c = csub.add_parser("encode", parents=[common])
    c.add_argument("manifest")
    c.add_argument("--codebook", required=True)
    c.add_argument("-o", "--output", required=True)
    c.set_defaults(func=cmd_codec_encode)
    c = csub.add_parser("decode", parents=[common])
    c.add_argument("codes")
    c.add_argument("--codebook", required=True)
    c.add_argument("--levels-used", type=int, default=None)
    c.add_argument("-o", "--output", required=True, help="directory for <id>.npy feature matrices")
    c.set_defaults(func=cmd_codec_decode)
    c = csub.add_parser("roundtrip", parents=[common], help="MCD of decoded frames per number of levels")
    c.add_argument("manifest")
    c.add_argument("--codebook", required=True)
    c.set_defaults(func=cmd_codec_roundtrip)

    p = sub.add_parser("eval", parents=[common], help="score hypotheses against references")
    p.add_argument("ref_manifest")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--hyp-manifest")
    src.add_argument("--hyp-audio-dir", help="directory of <id>.wav (+ optional <id>.txt transcripts)")
    p.add_argument("-o", "--output", required=True, help="report directory")
    p.add_argument("--tokenizer", choices=("word", "char"), default="word")
    p.add_argument("--external", help="CSV of extra per-utterance columns (id, pesq, mos, ...)")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("degrade", parents=[common], help="write noise-corrupted copies of a manifest")
    p.add_argument("manifest")
    p.add_argument("--snr", type=float, required=True)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_degrade)

    p = sub.add_parser("recipe", parents=[common], help="emit a fine-tuning recipe config")
    p.add_argument("stage")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_recipe)
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.jobs < 1:
        _err("--jobs must be >= 1")
        return EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as exc:
        _err(str(exc))
        return EXIT_USAGE
    except SwaraError as exc:
        _err(f"{type(exc).__name__}: {exc}")
        return EXIT_DATA
    except (OSError, ValueError) as exc:
        _err(str(exc))
        return EXIT_DATA


if __name__ == "__main__":
    raise SystemExit(main())
