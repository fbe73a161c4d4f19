import numpy as np
import pytest
from hypothesis import settings

from brainsym.image_core import GrayImage
from brainsym.phantom import Lesion, PhantomSpec, render_phantom

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

AXIS_X = 127.5
LESION_SPEC = PhantomSpec(noise=4.0, seed=2, lesion=Lesion(AXIS_X + 40, 127.5, 12, 60))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def clean_phantom():
    return render_phantom(PhantomSpec())


@pytest.fixture(scope="session")
def lesion_phantom():
    return render_phantom(LESION_SPEC)


@pytest.fixture(scope="session")
def bowed_phantom():
    return render_phantom(PhantomSpec(bow=6.0))


def vertical_step(width=16, height=16, low=0, high=255):
    arr = np.full((height, width), low, dtype=np.uint8)
    arr[:, width // 2:] = high
    return GrayImage(arr)


def mirror_symmetric(rng, width, height):
    """Random image equal to its own left-right mirror."""
    arr = rng.integers(0, 256, size=(height, width), dtype=np.uint8)
    half = (width + 1) // 2
    arr[:, width - half:] = arr[:, :half][:, ::-1]
    return GrayImage(arr)


# acceptance reporting: one PASS/FAIL line per criterion-marked test
_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(label): acceptance criterion label")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    label = marker.args[0]
    if rep.failed or (rep.when == "call" and rep.passed and label not in _CRITERIA):
        _CRITERIA[label] = "FAIL" if rep.failed else "PASS"
    elif rep.when == "setup" and rep.skipped:
        _CRITERIA[label] = "SKIP"


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for label in sorted(_CRITERIA, key=lambda s: int(s.split()[0][2:])):
        terminalreporter.write_line(f"{_CRITERIA[label]}  {label}")
