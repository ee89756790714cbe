from __future__ import annotations

import numpy as np
import pytest

from swarakit.audio_io import AudioBuffer
from swarakit.cli import main
from swarakit.corpus import minicorpus_dir


def sine(freq: float, fs: int, seconds: float, amp: float = 0.5) -> AudioBuffer:
    t = np.arange(int(round(seconds * fs))) / fs
    return AudioBuffer((amp * np.sin(2 * np.pi * freq * t)).astype(np.float32), fs)


@pytest.fixture(scope="session")
def ingested(tmp_path_factory):
    """The bundled mini-corpus ingested and tagged once per session."""
    out = tmp_path_factory.mktemp("corpus")
    assert main(["ingest", str(minicorpus_dir()), str(out)]) == 0
    assert main(["tag", str(out / "manifest.jsonl")]) == 0
    return out / "manifest.jsonl"


ACCEPTANCE: dict[int, tuple[bool, str]] = {}


@pytest.fixture
def criterion(request):
    """Record one acceptance criterion's outcome for the end-of-run summary."""
    import time
    from contextlib import contextmanager

    @contextmanager
    def run(number: int, title: str, budget_s: float | None = None):
        t0 = time.perf_counter()
        ok, note = False, ""
        try:
            yield
            elapsed = time.perf_counter() - t0
            ok = budget_s is None or elapsed < budget_s
            note = f"{elapsed:.1f} s" + (f" (budget {budget_s:g} s)" if budget_s else "")
            assert ok, f"criterion {number} took {elapsed:.1f} s, budget {budget_s} s"
        except BaseException as exc:
            if not note:
                note = f"{type(exc).__name__}: {str(exc).splitlines()[0] if str(exc) else ''}"
            raise
        finally:
            ACCEPTANCE[number] = (ok, f"{title} [{note}]")
            print(f"{'PASS' if ok else 'FAIL'} criterion {number}: {title} [{note}]")

    return run


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        ok, text = ACCEPTANCE[number]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} criterion {number}: {text}")
