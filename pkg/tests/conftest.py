import numpy as np
import pytest

from treedict.toy import toy_dataset

_CRITERIA = []


def paper_ids(*ids):
    """Convert the 1-based patch numbers of the worked example to row indices."""
    return [i - 1 for i in ids]


def as_paper_sets(nodes):
    return [sorted(int(i) + 1 for i in n.indices) for n in nodes]


@pytest.fixture
def toy():
    return toy_dataset()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def criterion():
    """Record one acceptance criterion outcome for the terminal summary."""

    def record(number, passed, detail=""):
        _CRITERIA.append((number, bool(passed), detail))
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number, passed, detail in sorted(_CRITERIA, key=lambda c: c[0]):
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"criterion {number:2d}: {status}  {detail}")


def exact_recovery_condition(D, support):
    """max over inactive atoms of ||pinv(D_support) d||_1; below 1 OMP must recover ``support``."""
    pinv = np.linalg.pinv(D[:, list(support)])
    rest = [k for k in range(D.shape[1]) if k not in set(support)]
    return float(np.max(np.abs(pinv @ D[:, rest]).sum(axis=0)))


def erc_instance(rng, n=10, K=20, S=2, max_tries=1000):
    """Random unit-norm dictionary and S-sparse synthetic sample satisfying the ERC."""
    for _ in range(max_tries):
        D = rng.standard_normal((n, K))
        D /= np.linalg.norm(D, axis=0)
        support = sorted(rng.choice(K, S, replace=False).tolist())
        if exact_recovery_condition(D, support) < 1:
            x0 = np.zeros(K)
            x0[support] = rng.uniform(1, 2, S) * rng.choice([-1, 1], S)
            return D, support, x0
    raise RuntimeError("no instance satisfies the exact recovery condition")
