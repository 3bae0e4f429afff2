import pytest

from zakeri.bubbles import BubbleTree
from zakeri.dynamics import QuadraticMap
from zakeri.model import ModelTrees
from zakeri.rotation import parse_rotation
from zakeri.siegel import build_model


@pytest.fixture(scope="session")
def golden():
    return parse_rotation("golden")


@pytest.fixture(scope="session")
def quad(golden):
    return QuadraticMap(golden)


@pytest.fixture(scope="session")
def q_model(quad, golden):
    return build_model(quad, golden)


@pytest.fixture(scope="session")
def q_tree(quad, q_model):
    tree = BubbleTree(quad, q_model)
    tree.build(6)
    return tree


@pytest.fixture(scope="session")
def model_trees(golden, q_tree):
    return ModelTrees(golden, max_gen=6, q_tree=q_tree)


ACCEPTANCE = {}


def pytest_runtest_makereport(item, call):
    crit = item.get_closest_marker("criterion")
    if crit is None or call.when != "call":
        return
    n, label = crit.args
    ACCEPTANCE[n] = ("FAIL" if call.excinfo else "PASS", label, item.user_properties)


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, label): acceptance criterion")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        status, label, props = ACCEPTANCE[n]
        detail = ", ".join(f"{k}={v}" for k, v in props)
        terminalreporter.write_line(f"{status} criterion {n:2d}: {label}" + (f" ({detail})" if detail else ""))
