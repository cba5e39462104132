import time

import pytest

from memonn.memristor import surrogate
from memonn.onn import GROUP_CIRCUITS, GROUP_I0, WaveformGroup
from memonn.phasenet import OutputWaveform
from memonn.ppv import PulseSpec, extract_prc, fit_fourier, prc_to_ppv
from memonn.transient import prepare_oscillator

# Lines collected by the acceptance suite, echoed in the terminal summary.
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)


@pytest.fixture
def record():
    """Print and keep one acceptance line; returns the verdict for asserting."""

    def put(num: int, ok: bool, detail: str) -> bool:
        line = f"criterion {num}: {'PASS' if ok else 'FAIL'} {detail}"
        print(line)
        ACCEPTANCE_LINES.append(line)
        return ok

    return put


class Timed:
    """A value together with the wall-clock seconds it took to build."""

    def __init__(self, fn, *args, **kw):
        t = time.perf_counter()
        self.value = fn(*args, **kw)
        self.seconds = time.perf_counter() - t


@pytest.fixture(scope="session")
def mp():
    return surrogate()


@pytest.fixture(scope="session")
def osc_timed(mp):
    cache = {}

    def get(group):
        if group not in cache:
            cache[group] = Timed(prepare_oscillator, GROUP_CIRCUITS[group], mp)
        return cache[group]

    return get


@pytest.fixture(scope="session")
def prc_timed(osc_timed):
    cache = {}

    def get(group, b=1e-3, k_periods=20):
        key = (group, b, k_periods)
        if key not in cache:
            osc = osc_timed(group).value
            cache[key] = Timed(extract_prc, osc, PulseSpec(b), 64, k_periods)
        return cache[key]

    return get


@pytest.fixture(scope="session")
def group_model(osc_timed, prc_timed):
    cache = {}

    def get(group):
        if group not in cache:
            osc = osc_timed(group).value
            fit = fit_fourier(prc_to_ppv(prc_timed(group).value), 10)
            cache[group] = WaveformGroup(group, fit, OutputWaveform.from_cycle(osc.cycle),
                                         GROUP_I0[group])
        return cache[group]

    return get
