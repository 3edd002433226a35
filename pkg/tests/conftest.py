import numpy as np
import pytest

from avwc.channels import AVC, AVWC, Alphabet, trash_avc


def random_kernels(rng, n_s, n_x, n_y, sparsity=0.0):
    k = rng.dirichlet(np.ones(n_y), size=(n_s, n_x))
    if sparsity:
        k = np.where(rng.random(k.shape) < sparsity, 0.0, k)
        empty = k.sum(-1) == 0
        k[empty, 0] = 1.0
        k /= k.sum(-1, keepdims=True)
    return k


def random_avc(rng, n_x, n_s, n_y, sparsity=0.0) -> AVC:
    return AVC(Alphabet.of_size(n_x, "x"), Alphabet.of_size(n_y, "y"), Alphabet.of_size(n_s, "s"),
               random_kernels(rng, n_s, n_x, n_y, sparsity))


def with_trash(avc: AVC, n_z: int = 2) -> AVWC:
    return AVWC(avc, trash_avc(avc.input, avc.states, n_z))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
