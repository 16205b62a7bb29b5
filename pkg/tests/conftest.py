import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from mqpgsim import AlphabetSpec, DeviceSpec, Experiment, ExperimentConfig, Layout

settings.register_profile(
    "default", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

PRIMES = (3, 5, 7)


def table1_experiment(kind: str, d: int, ffb: bool = False, **kw) -> Experiment:
    spacing = 0.5 if (ffb and d == 5) else 0.63
    alph = AlphabetSpec.table1("frequency_bins" if ffb else kind, d, center=194.0, ffb=ffb)
    layout = Layout.FFB if ffb else Layout.STANDARD
    return Experiment(ExperimentConfig(alph, DeviceSpec.uniform(d, spacing), layout, **kw))


@pytest.fixture(scope="session")
def ffb3():
    return table1_experiment("frequency_bins", 3, ffb=True)


@pytest.fixture(scope="session")
def freqbins3():
    return table1_experiment("frequency_bins", 3)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


# one summary line per acceptance criterion
_ACCEPTANCE: dict[int, tuple[str, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, title): acceptance criterion")


def pytest_runtest_makereport(item, call):
    m = item.get_closest_marker("acceptance")
    if m is None or call.when != "call":
        return
    n, title = m.args
    ok = call.excinfo is None
    _ACCEPTANCE[n] = ("PASS" if ok else "FAIL", title)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_ACCEPTANCE):
        status, title = _ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n}: {status}  {title}")
