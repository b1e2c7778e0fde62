import numpy as np
import pytest

from gptcorners import builtin_curve, compute_gpts, factors_from_gamma, gamma_from_gpt


def run_pipeline(curve, order, **kw):
    mesh, system, table = compute_gpts(curve, order, **kw)
    gamma = gamma_from_gpt(table)
    return {"curve": curve, "mesh": mesh, "system": system, "gpt": table, "gamma": gamma,
            "factors": factors_from_gamma(gamma)}


@pytest.fixture(scope="session")
def triangle():
    return builtin_curve("reflected_equilateral_triangle")


@pytest.fixture(scope="session")
def cap():
    return builtin_curve("cap_shaped")


@pytest.fixture(scope="session")
def ellipse():
    return builtin_curve("ellipse", [2.0, 1.0])


@pytest.fixture(scope="session")
def triangle_run(triangle):
    # order 22 gives sigma_1..sigma_21
    return run_pipeline(triangle, 22)


@pytest.fixture(scope="session")
def cap_run(cap):
    return run_pipeline(cap, 29)


@pytest.fixture(scope="session")
def ellipse_run(ellipse):
    return run_pipeline(ellipse, 16)


@pytest.fixture
def rng():
    return np.random.default_rng(20241019)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[n])
