from pathlib import Path

import numpy as np
import pytest

from nnct import ContingencyTable, LabeledPointSet, ingest

DATA_DIR = Path(__file__).parent / "data"

# Frozen reference fixtures: 2x2 tables with their digraph statistics.
SWAMP_COUNTS = [[157, 54], [52, 131]]
SWAMP_Q, SWAMP_R = 270, 236
SWAMP_Q_ADJ, SWAMP_R_ADJ = 249.68, 244.95

ARTI_COUNTS = [[30, 20], [19, 31]]
ARTI_Q, ARTI_R = 70, 60
ARTI_Q_ADJ, ARTI_R_ADJ = 63.37, 62.17


@pytest.fixture
def swamp_table():
    return ContingencyTable.from_counts(SWAMP_COUNTS)


@pytest.fixture
def artificial_table():
    return ContingencyTable.from_counts(ARTI_COUNTS)


@pytest.fixture(scope="session")
def artificial_points() -> LabeledPointSet:
    """100-point two-class configuration whose NNCT is [[30,20],[19,31]]
    with Q=70, R=60 (frozen; see tests/data/artificial_100.csv)."""
    return ingest(str(DATA_DIR / "artificial_100.csv"))


def random_point_set(rng: np.random.Generator, n: int, n1: int | None = None) -> LabeledPointSet:
    """Random CSR instance with both classes nonempty."""
    if n1 is None:
        n1 = int(rng.integers(2, n - 1))
    labels = np.repeat([1, 2], [n1, n - n1])
    return LabeledPointSet(rng.random((n, 2)), labels)
