import warnings

import pytest

from qgrd import build_instance, word_length


@pytest.fixture(scope="session")
def su():
    return build_instance({"kind": "su_q_2", "q": 0.5})


@pytest.fixture(scope="session")
def su_len(su):
    return word_length(su, radius=40)


@pytest.fixture(scope="session")
def su1():
    return build_instance({"kind": "su_q_2", "q": 1.0})


@pytest.fixture(scope="session")
def z():
    return build_instance({"kind": "z_d", "d": 1})


@pytest.fixture(scope="session")
def z_len(z):
    return word_length(z, radius=200)


@pytest.fixture(scope="session")
def z2():
    return build_instance({"kind": "z_d", "d": 2})


@pytest.fixture(scope="session")
def f2():
    return build_instance({"kind": "free_group", "k": 2})


@pytest.fixture(scope="session")
def f2_len(f2):
    return word_length(f2, radius=6)


@pytest.fixture(scope="session")
def o3():
    return build_instance({"kind": "o_n_plus", "N": 3})


@pytest.fixture(scope="session")
def o3_len(o3):
    return word_length(o3, radius=40)


@pytest.fixture(autouse=True)
def _quiet_closure_warnings():
    with warnings.catch_warnings():
        warnings.simplefilter("default")
        yield


_ACCEPTANCE = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_ACCEPTANCE] = []


@pytest.fixture
def acceptance(request):
    """Record one PASS/FAIL line for an acceptance criterion."""
    lines = request.config.stash[_ACCEPTANCE]

    def record(number, ok, detail):
        line = f"[criterion {number:2d}] {'PASS' if ok else 'FAIL'}  {detail}"
        lines.append((number, line))
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_ACCEPTANCE, [])
    if lines:
        terminalreporter.write_sep("=", "acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)
