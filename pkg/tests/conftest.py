import sys

import numpy as np
import pytest

from causal_ssl.data import sample_split
from causal_ssl.synth import generate, preset


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def split_instance(name, seed, n_l=10, n_u=200):
    """Labelled/unlabelled parts of one fresh preset draw, as fit_* tuples."""
    r = np.random.default_rng(seed)
    ds = generate(preset(name), n_l + n_u, r)
    sp = sample_split(ds, n_l, n_u, r)
    L, U = ds.subset(sp.labelled_idx), ds.subset(sp.unlabelled_idx)
    return (L.causes, L.labels, L.effects), (U.causes, U.effects), U.labels


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "LINES", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
