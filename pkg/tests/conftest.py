import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from jacobs_ladder import (  # noqa: E402
    build_ladder_table,
    make_bessel_generator,
    make_cn_generator,
    make_hardy_z_generator,
    make_sn_generator,
)

T_MAX = 1e4


@pytest.fixture(scope="session")
def table():
    return build_ladder_table(T_MAX)


@pytest.fixture(scope="session")
def hardy_gen():
    return make_hardy_z_generator()


@pytest.fixture(scope="session")
def families(hardy_gen):
    return {
        "sn": make_sn_generator(0.5),
        "cn": make_cn_generator(0.5),
        "bessel": make_bessel_generator(0.0),
        "z": hardy_gen,
    }


@pytest.fixture(scope="session")
def cells_2000(families):
    return {name: G.cell_near(2000.0) for name, G in families.items()}


@pytest.fixture(scope="session")
def reports_2000(table, families, cells_2000):
    from jacobs_ladder import verify_cell

    return {name: verify_cell(table, families[name], cells_2000[name]) for name in families}


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
