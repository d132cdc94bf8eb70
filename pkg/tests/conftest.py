import pytest

from endgraph import core, enddegree, families

# every region built while the tests run, for the |edge boundary| >= |vertex boundary| sweep
REGIONS: list = []


def _recording(fn):
    def wrapper(*args, **kwargs):
        reg = fn(*args, **kwargs)
        REGIONS.append((len(reg.edge_boundary), len(reg.vertex_boundary)))
        return reg

    return wrapper


@pytest.fixture(autouse=True, scope="session")
def _record_regions():
    original = core.make_region
    patched = _recording(original)
    for mod in (core, enddegree, families):
        mod.make_region = patched
    yield
    for mod in (core, enddegree, families):
        mod.make_region = original


def pytest_terminal_summary(terminalreporter):
    bad = [r for r in REGIONS if r[0] < r[1]]
    terminalreporter.write_line(
        f"region sweep: {len(REGIONS)} regions built, {len(bad)} with |edge boundary| < |vertex boundary|"
    )


def pytest_sessionfinish(session, exitstatus):
    # regions built after the acceptance sweep ran are checked here
    if any(r[0] < r[1] for r in REGIONS) and exitstatus == 0:
        session.exitstatus = 1
