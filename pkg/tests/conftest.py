import numpy as np
import pytest

from fastk_sgd.data import write_idx

_CRITERIA = []
_NOTES = []


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(label): acceptance criterion reported in the terminal summary")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        _CRITERIA.append((marker.args[0], rep.passed))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for label, ok in _CRITERIA:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {label}")
    for line in _NOTES:
        terminalreporter.write_line(f"  note: {line}")


@pytest.fixture
def report():
    """Append a line to the acceptance summary."""
    return _NOTES.append


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def digits_idx(tmp_path_factory):
    """80 handwritten digits upsampled to 28x28 and written as an IDX pair."""
    from sklearn.datasets import load_digits

    dg = load_digits()
    imgs = np.pad(np.kron(dg.images[:80], np.ones((3, 3))), ((0, 0), (2, 2), (2, 2)))
    imgs = np.round(imgs * 255 / 16).astype(np.uint8)
    d = tmp_path_factory.mktemp("digits")
    images, labels = d / "images.idx3", d / "labels.idx1"
    write_idx(images, labels, imgs, dg.target[:80])
    return images, labels
