import numpy as np
import pytest
from hypothesis import strategies as st

from disagree_audit.domain import AuditRecord, GroupPartition, LabelSpace


def records_from_pairs(pairs):
    """``pairs`` of (group, y, z) -> fully observed records."""
    return [AuditRecord(m, y, int(y != z), z, f"r{i}") for i, (m, y, z) in enumerate(pairs)]


@st.composite
def observed_datasets(draw, max_k=6, max_m=4, min_n=1, max_n=60):
    """(labels, groups, records) with intrinsic labels; every group non-empty."""
    K = draw(st.integers(2, max_k))
    M = draw(st.integers(2, max_m))
    pairs = []
    for m in range(M):
        n = draw(st.integers(min_n, max_n))
        ys = draw(st.lists(st.integers(0, K - 1), min_size=n, max_size=n))
        zs = draw(st.lists(st.integers(0, K - 1), min_size=n, max_size=n))
        pairs += [(m, y, z) for y, z in zip(ys, zs)]
    return LabelSpace(K), GroupPartition.numbered(M), records_from_pairs(pairs)


def random_dataset(rng: np.random.Generator, K: int, M: int, n_per_group):
    pairs = []
    for m in range(M):
        n = n_per_group if isinstance(n_per_group, int) else int(rng.integers(*n_per_group))
        ys = rng.integers(0, K, n)
        # bias towards agreement so diagonal-heavy joints also get exercised
        agree = rng.random(n) < rng.random()
        zs = np.where(agree, ys, rng.integers(0, K, n))
        pairs += [(m, int(y), int(z)) for y, z in zip(ys, zs)]
    return LabelSpace(K), GroupPartition.numbered(M), records_from_pairs(pairs)


@pytest.fixture
def binary_two_groups():
    return LabelSpace(2, ("no", "yes")), GroupPartition(("A", "B"))


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def acceptance_log():
    return ACCEPTANCE_LINES.append


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
