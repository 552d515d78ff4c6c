import numpy as np
import pytest

from entrosep import observables as obs

ACCEPTANCE_LINES = []


@pytest.fixture
def acceptance():
    """Record one pass/fail line per acceptance criterion."""

    def record(number, name, ok, detail=""):
        ACCEPTANCE_LINES.append(f"[{'PASS' if ok else 'FAIL'}] {number:>2}. {name}  {detail}")
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture(scope="session")
def bell():
    return obs.bell_basis_2().vectors


def ket(*amps):
    v = np.array(amps, dtype=complex)
    return v / np.linalg.norm(v)


def basis_ket(index, dim=4):
    v = np.zeros(dim, dtype=complex)
    v[index] = 1
    return v


def brute_partial_transpose_b(m, dA, dB):
    """Element-by-element partial transpose on B (oracle for the reshape version)."""
    out = np.zeros_like(m)
    for i in range(dA):
        for j in range(dB):
            for k in range(dA):
                for l in range(dB):
                    out[i * dB + l, k * dB + j] = m[i * dB + j, k * dB + l]
    return out


def brute_probabilities(observable, rho):
    """Tr(P rho) with P built from the dense observable matrix by eigendecomposition."""
    m = observable.matrix()
    w, v = np.linalg.eigh(m)
    probs = {}
    for val, vec in zip(np.round(w, 6), v.T):
        probs[val] = probs.get(val, 0.0) + float(np.real(vec.conj() @ rho @ vec))
    return np.array([probs[k] for k in sorted(probs)])
