import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from multisite.soc_model import (
    AteSpec,
    ModuleSpec,
    SocDescription,
    SocFormatError,
    import_itc02,
    parse_soc,
    render_soc,
    validate_soc,
)

from conftest import modules, socs

DOC_A = """
# one module
Soc tiny
Module A
  Inputs 2
  Outputs 2
  Bidirs 0
  ScanChains 3 : 8 6 4
  Patterns 10
"""


def test_parse_single_module():
    soc = parse_soc(DOC_A)
    assert soc.name == "tiny"
    assert soc.modules == (ModuleSpec("A", 2, 2, 0, (8, 6, 4), 10),)


def test_parse_ignores_layout_and_comments():
    flat = "Soc tiny Module A Inputs 2 Outputs 2 # trailing\nBidirs 0 ScanChains 3: 8 6 4 Patterns 10"
    assert parse_soc(flat) == parse_soc(DOC_A)


def test_missing_io_keywords_default_to_zero():
    soc = parse_soc("Soc s\nModule m\nScanChains 1 : 5\nPatterns 2\n")
    assert soc.modules[0] == ModuleSpec("m", 0, 0, 0, (5,), 2)


@pytest.mark.parametrize("text", ["", "   \n# only a comment\n", "Soc lonely\n"])
def test_empty_document(text):
    with pytest.raises(SocFormatError, match="no modules"):
        parse_soc(text)


def test_scan_arity_too_few():
    with pytest.raises(SocFormatError, match="declares 2 chains") as exc:
        parse_soc("Soc s\nModule m\nScanChains 2: 5\nPatterns 1\n")
    assert exc.value.line == 3


def test_scan_arity_too_many():
    with pytest.raises(SocFormatError, match="more lengths"):
        parse_soc("Soc s\nModule m\nScanChains 1 : 5 6\nPatterns 1\n")


def test_duplicate_module():
    text = "Soc s\nModule m\nInputs 1\nPatterns 1\nModule m\nInputs 1\nPatterns 1\n"
    with pytest.raises(SocFormatError, match="duplicate") as exc:
        parse_soc(text)
    assert exc.value.line == 5


def test_negative_count():
    with pytest.raises(SocFormatError, match="negative"):
        parse_soc("Soc s\nModule m\nInputs -3\nPatterns 1\n")


@pytest.mark.parametrize(
    "text, msg",
    [
        ("Module m\nPatterns 1\n", "must start with 'Soc"),
        ("Soc s\nInputs 3\n", "outside of a Module"),
        ("Soc s\nModule m\nWidgets 3\nPatterns 1\n", "unknown keyword"),
        ("Soc s\nModule m\nInputs x\nPatterns 1\n", "expected integer"),
        ("Soc s\nModule m\nInputs 1\n", "missing Patterns"),
        ("Soc s\nModule m\nPatterns 0\nInputs 1\n", "patterns must be >= 1"),
        ("Soc s\nModule m\nPatterns 4\n", "nothing to access"),
        ("Soc s\nModule m\nScanChains 1 5\nPatterns 1\n", "expected ':'"),
    ],
)
def test_syntax_errors(text, msg):
    with pytest.raises(SocFormatError, match=msg):
        parse_soc(text)


def test_bidirs_count_on_both_sides():
    m = ModuleSpec("m", inputs=3, outputs=1, bidirs=2, scan_lengths=(4,), patterns=1)
    assert (m.in_cells, m.out_cells) == (5, 3)


def test_ate_validation():
    with pytest.raises(ValueError):
        AteSpec(1, 100)
    with pytest.raises(ValueError):
        AteSpec(4, 100, freq=0)
    with pytest.raises(ValueError):
        AteSpec(4, 100, index_time=-1)


def test_d695_fixture(d695):
    assert len(d695.modules) == 10
    assert sum(m.scan_cells for m in d695.modules) == 6384
    assert parse_soc(render_soc(d695)) == d695


@settings(max_examples=200)
@given(socs())
def test_render_round_trip(soc):
    assert parse_soc(render_soc(soc)) == soc


ITC02_SAMPLE = """
SocName toy
TotalModules 3
Module 0 Level 0 Inputs 4 Outputs 4 Bidirs 0 ScanChains 0 :
Module 0 TotalTests 0
Module 1 Level 1 Name core1 Inputs 3 Outputs 2 Bidirs 1 ScanChains 2 : 10 9
Module 1 TotalTests 2
Module 1 Test 1 ScanUse 1 TamUse 1 Patterns 40
Module 1 Test 2 ScanUse 0 TamUse 1 Patterns 5
Module 2 Level 1 Inputs 8 Outputs 8 Bidirs 0 ScanChains 0 :
Module 2 TotalTests 1
Module 2 Test 1 ScanUse 0 TamUse 0 Patterns 100
"""


def test_itc02_import_sums_external_tests_and_drops_bist():
    soc = import_itc02(ITC02_SAMPLE)
    assert soc.name == "toy"
    assert soc.modules == (ModuleSpec("m1_core1", 3, 2, 1, (10, 9), 45),)


# -- validation --------------------------------------------------------------

SINGLE = ModuleSpec("x", scan_lengths=(10,), patterns=5)


def test_validate_boundary():
    ok = validate_soc(SocDescription("s", (SINGLE,)), AteSpec(2, 65))
    assert ok.feasible and ok.modules[0].test_time == 65 and ok.modules[0].k_min == 2
    bad = validate_soc(SocDescription("s", (SINGLE,)), AteSpec(2, 64))
    assert not bad.feasible and bad.failing == ["x"]


def test_validate_conjunction():
    other = ModuleSpec("y", inputs=2, outputs=2, scan_lengths=(8, 6, 4), patterns=10)
    rep = validate_soc(SocDescription("s", (SINGLE, other)), AteSpec(8, 130))
    assert rep.feasible


@settings(max_examples=100, deadline=None)
@given(socs(), st.integers(2, 16), st.integers(1, 400), st.integers(0, 8), st.integers(0, 200))
def test_validate_monotone(soc, N, V, dN, dV):
    small = validate_soc(soc, AteSpec(N, V))
    big = validate_soc(soc, AteSpec(N + dN, V + dV))
    for a, b in zip(small.modules, big.modules):
        assert b.feasible or not a.feasible
