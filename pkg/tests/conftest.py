import numpy as np
import pytest

from dascof import _backend


def cn(rng, *shape):
    """Circularly symmetric complex Gaussian samples with unit variance."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def brute_sigma2(h, snr, box):
    """Minimum of a^H (I/snr + h h^H)^-1 a over a nonzero box of Gaussian integers.

    Independent of the package: the quadratic form is built by a dense
    matrix inverse rather than the rank-one closed form.
    """
    h = np.asarray(h, dtype=complex)
    K = h.size
    M = np.linalg.inv(np.eye(K) / snr + np.outer(h, h.conj()))
    vals = np.arange(-box, box + 1)
    g = np.array(np.meshgrid(*([vals] * (2 * K)), indexing="ij")).reshape(2 * K, -1).T
    A = g[:, :K] + 1j * g[:, K:]
    A = A[np.any(A != 0, axis=1)]
    q = np.einsum("ni,ij,nj->n", A.conj(), M, A).real
    i = int(np.argmin(q))
    return float(q[i]), A[i]


@pytest.fixture(params=sorted(_backend.BACKENDS))
def backend(request):
    """Run the test once per available kernel backend."""
    with _backend.using(request.param):
        yield request.param


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


_VERDICTS = pytest.StashKey[list]()


@pytest.fixture
def verdict(request):
    """Record a PASS/FAIL line for an acceptance criterion.

    The line is printed immediately and repeated in the terminal summary so
    it is visible without ``-s``.
    """
    lines = request.config.stash.setdefault(_VERDICTS, [])

    def record(number, ok, detail):
        line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        print(line)
        lines.append(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_VERDICTS, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
