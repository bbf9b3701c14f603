import numpy as np
import pytest


def dense_columns(code):
    """Codewords as dense vectors on the full tensor product (finite local dims only)."""
    dims = code.local_dims
    n = int(np.prod(dims))
    V = np.zeros((n, code.d_L), dtype=complex)
    for x, col in enumerate(code.columns):
        idx = np.ravel_multi_index(col.labels.T, dims)
        V[idx, x] = col.amps
    return V


def dense_reduced(code, alpha, x, xp):
    """Reduced operator tr_{rest} |psi_x><psi_x'| by reshaping, kept on the full local space of alpha."""
    V = dense_columns(code)
    dims = code.local_dims
    rest = [i for i in range(code.n_sub) if i not in alpha]
    px = V[:, x].reshape(dims)
    py = V[:, xp].reshape(dims)
    px = np.transpose(px, list(alpha) + rest).reshape(int(np.prod([dims[i] for i in alpha])), -1)
    py = np.transpose(py, list(alpha) + rest).reshape(px.shape[0], -1)
    return px @ py.conj().T


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = next((m for name, m in sys.modules.items() if name.endswith("test_acceptance")), None)
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(results):
        terminalreporter.write_line(results[n])
