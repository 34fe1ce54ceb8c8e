import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from resp_screen.synthcorpus import CorpusSpec, generate_corpus  # noqa: E402

_ACCEPTANCE = []


@pytest.fixture
def record():
    """Record an acceptance outcome for the end-of-run summary, then assert it."""

    def _record(criterion, passed, detail):
        _ACCEPTANCE.append((criterion, bool(passed), detail))
        assert passed, f"criterion {criterion} failed: {detail}"

    return _record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for criterion, passed, detail in sorted(_ACCEPTANCE, key=lambda r: r[0]):
        terminalreporter.write_line(f"[{'PASS' if passed else 'FAIL'}] criterion {criterion:>2}: {detail}")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def small_corpus(tmp_path_factory):
    """20-file separable corpus with its manifest and 5-fold split."""
    root = tmp_path_factory.mktemp("small_corpus")
    manifest, split = generate_corpus(CorpusSpec(n_neg=10, n_pos=10, separability=1.0, seed=5), root)
    return root, manifest, split
