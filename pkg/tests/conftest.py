import os
import sys
from pathlib import Path

import pytest

TESTS = Path(__file__).parent
DATA = TESTS / "data"
sys.path.insert(0, str(TESTS))

ACCEPTANCE_LINES = []


def mnist_paths():
    """Full MNIST training files if BIAS_GAUGE_MNIST_DIR points at them, else the bundled subset."""
    root = os.environ.get("BIAS_GAUGE_MNIST_DIR")
    if root:
        root = Path(root)
        for suffix in ("", ".gz"):
            img = root / f"train-images-idx3-ubyte{suffix}"
            lab = root / f"train-labels-idx1-ubyte{suffix}"
            if img.exists() and lab.exists():
                return img, lab, "full"
    return DATA / "mnist5k-images-idx3-ubyte.gz", DATA / "mnist5k-labels-idx1-ubyte.gz", "subset"


@pytest.fixture(scope="session")
def mnist():
    from bias_gauge.ingest import read_idx

    img, lab, which = mnist_paths()
    return read_idx(img, lab, "unit"), which


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
