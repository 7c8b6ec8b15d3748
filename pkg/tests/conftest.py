import os
from pathlib import Path

import numpy as np
import pytest

from nbldpc.codes import parse_alist
from nbldpc.gf import FieldSpec
from nbldpc.lut import BuildConfig, run_density_evolution

PKG_ROOT = Path(__file__).resolve().parent.parent

# one line per acceptance criterion, echoed after the test run so they are
# visible without -s
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
TOY_ALIST = PKG_ROOT / "src" / "nbldpc" / "codes" / "toy_gf4_n12.alist"

SMALL_CARDS = dict(
    t_chan=32, t_mult=48, t_conv=64, t_prod=48, t_var=64, conv_inner=48, var_inner=48
)


@pytest.fixture(scope="session")
def gf2():
    return FieldSpec.for_m(1)


@pytest.fixture(scope="session")
def gf4():
    return FieldSpec.for_m(2)


@pytest.fixture(scope="session")
def gf8():
    return FieldSpec.for_m(3)


@pytest.fixture(scope="session")
def toy_code(gf4):
    return parse_alist(TOY_ALIST.read_text(), gf4)


@pytest.fixture(scope="session")
def small_blueprint(gf4):
    """Reduced-cardinality blueprint shared by the decoder-level tests.

    Same structure as the full design (d_v=3, d_c=6, weights 1..3), just
    cheap enough to build once per test session.
    """
    cfg = BuildConfig(
        gf4,
        3,
        6,
        [1, 2, 3],
        rate=0.5,
        design_ebn0_db=1.5,
        i_max=6,
        w=5,
        n_fine=600,
        cardinalities=dict(SMALL_CARDS),
        seed=1,
    )
    return run_density_evolution(cfg)
