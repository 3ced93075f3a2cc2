import random
from importlib import resources

import pytest
from hypothesis import strategies as st

from multisite.soc_model import AteSpec, ModuleSpec, SocDescription, parse_soc
from multisite.wrapper import test_time


@pytest.fixture(scope="session")
def d695():
    text = resources.files("multisite.data").joinpath("d695.soc").read_text(encoding="utf-8")
    return parse_soc(text)


@pytest.fixture(scope="session")
def d695_path():
    return str(resources.files("multisite.data").joinpath("d695.soc"))


def random_tiny_soc(rng: random.Random) -> SocDescription:
    """At most 4 modules, 3 scan chains of length <= 20, 20 patterns, 8 wrapper cells."""
    mods = []
    for i in range(rng.randint(1, 4)):
        scan = tuple(rng.randint(1, 20) for _ in range(rng.randint(0, 3)))
        ins, outs, bid = rng.randint(0, 3), rng.randint(0, 3), rng.randint(0, 1)
        if not scan and ins + outs + bid == 0:
            ins = 1
        mods.append(ModuleSpec(f"m{i}", ins, outs, bid, scan, rng.randint(1, 20)))
    return SocDescription("tiny", tuple(mods))


def random_tiny_instance(seed: int) -> tuple[SocDescription, AteSpec]:
    rng = random.Random(seed)
    soc = random_tiny_soc(rng)
    N = rng.choice([4, 6, 8, 10, 12])
    hardest = max(test_time(m, 1) for m in soc.modules)
    total = sum(test_time(m, 1) for m in soc.modules)
    V = rng.randint(max(1, hardest // 3), total)
    return soc, AteSpec(N, V)


@st.composite
def modules(draw, max_chains=5, max_len=40, max_cells=8, name="m"):
    scan = tuple(draw(st.lists(st.integers(1, max_len), max_size=max_chains)))
    ins = draw(st.integers(0, max_cells))
    outs = draw(st.integers(0, max_cells - ins))
    bid = draw(st.integers(0, (max_cells - ins - outs) // 2))
    if not scan and ins + outs + bid == 0:
        ins = 1
    return ModuleSpec(name, ins, outs, bid, scan, draw(st.integers(1, 30)))


@st.composite
def socs(draw, max_modules=4, **kw):
    count = draw(st.integers(1, max_modules))
    return SocDescription("h", tuple(draw(modules(name=f"m{i}", **kw)) for i in range(count)))


# -- acceptance summary -----------------------------------------------------

ACCEPTANCE: dict[int, tuple[bool, str, str]] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker and rep.when == "call":
        number, title = marker.args
        ACCEPTANCE[number] = (rep.passed, title, getattr(item, "detail", ""))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for number in sorted(ACCEPTANCE):
        passed, title, detail = ACCEPTANCE[number]
        line = f"{'PASS' if passed else 'FAIL'}  criterion {number}: {title}"
        terminalreporter.write_line(line + (f"  [{detail}]" if detail else ""))
