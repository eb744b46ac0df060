import numpy as np
import pytest

from fbcsf import geometry as g
from fbcsf import flow as flow_mod


@pytest.fixture(scope="session")
def disk():
    return g.ConvexDomain.disk(1.0)


@pytest.fixture(scope="session")
def ellipse():
    return g.ConvexDomain.ellipse(2.0, 1.0)


@pytest.fixture(scope="session")
def egg():
    # strictly convex, a single mirror symmetry broken by the sin 3w term
    return g.ConvexDomain([1.0, 0.0, 0.2], [0.0, 0.0, 0.0, 0.1])


@pytest.fixture(scope="session")
def ndisk(disk):
    return g.normalize(disk, g.find_diameters(disk)[0])


@pytest.fixture(scope="session")
def negg(egg):
    return g.normalize(egg, g.find_diameters(egg)[0])


@pytest.fixture(scope="session")
def nellipse_minor(ellipse):
    return g.normalize(ellipse, g.find_diameters(ellipse)[1])


# ---------------------------------------------------------------------------
# shared flow runs.  Keyed by (domain, rho, n_nodes); computed once per
# session on first request so the expensive trajectories are paid for once.

_RUN_SPECS = {
    "disk_r03_n100": ("disk", 0.3, 100),
    "disk_r03_n200": ("disk", 0.3, 200),
    "disk_r015_n100": ("disk", 0.15, 100),
    "disk_r01_n200": ("disk", 0.1, 200),
    "disk_r01_n400": ("disk", 0.1, 400),
    "egg_r01_n200": ("egg", 0.1, 200),
}


@pytest.fixture(scope="session")
def runs(ndisk, negg):
    doms = {"disk": ndisk, "egg": negg}
    cache = {}

    def get(name):
        if name not in cache:
            dom_key, rho, n = _RUN_SPECS[name]
            cfg = flow_mod.SolverConfig(n_nodes=n, dt_safety=0.8)
            cache[name] = flow_mod.old_but_not_ancient(doms[dom_key], rho, cfg)
        return cache[name]

    return get


@pytest.fixture(scope="session")
def disk_sweep(ndisk):
    cfg = flow_mod.SolverConfig(n_nodes=200, dt_safety=0.8)
    return flow_mod.ancient_sweep(ndisk, [0.2, 0.1, 0.05], cfg)


# ---------------------------------------------------------------------------
# acceptance reporting: tests register one line per criterion and the
# terminal summary prints them all, PASS or FAIL, after the run.

ACCEPTANCE_RESULTS = {}


@pytest.fixture(scope="session")
def acceptance_log():
    return ACCEPTANCE_RESULTS


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_RESULTS):
        ok, detail = ACCEPTANCE_RESULTS[key]
        status = "PASS" if ok else "FAIL"
        terminalreporter.write_line(f"{key}: {status}  [{detail}]")
