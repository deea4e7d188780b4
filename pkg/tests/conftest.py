import pytest

from mcnd_bounds.instance import Arc, Commodity, Instance, Node, Path


def single_arc_instance(demands, q=100, fixed=1.0):
    """Commodities 0 -> 1 that either cross one capacitated arc or take a free direct arc."""
    nodes = [Node(0), Node(1)]
    arcs = [Arc(0, 0, 1, q, fixed, 0.0), Arc(1, 0, 1, q, 0.0, 0.0, direct=True)]
    comms = [Commodity(k, 0, 1, d) for k, d in enumerate(demands)]
    paths = []
    for k in range(len(demands)):
        paths.append(Path(len(paths), k, (0,)))
        paths.append(Path(len(paths), k, (1,)))
    return Instance(nodes, arcs, comms, paths, name="single-arc")


@pytest.fixture
def make_single_arc():
    return single_arc_instance


_VERDICTS: list[str] = []


class _Criterion:
    def __init__(self, name):
        self.name = name
        self.detail = ""

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        if exc_type is None:
            line = f"PASS  {self.name}: {self.detail}"
        else:
            line = f"FAIL  {self.name}: {self.detail or ''} {exc_type.__name__}: {exc}".replace("\n", " ")
        print(line)
        _VERDICTS.append(line)
        return False


@pytest.fixture
def criterion():
    """``with criterion("name") as c: ...`` records one acceptance verdict."""
    return _Criterion


def pytest_terminal_summary(terminalreporter):
    if _VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in _VERDICTS:
            terminalreporter.write_line(line)
