"""SOC and ATE data model, plus the native ``.soc`` text format.

The native format is keyword driven and line oriented::

    # comment
    Soc d695
    Module s838
      Inputs 34
      Outputs 1
      Bidirs 0
      ScanChains 1 : 32
      Patterns 75

Keywords may share a line; only the token order matters.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterator


class SocFormatError(ValueError):
    """Malformed SOC document or invalid SOC contents."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


@dataclass(frozen=True)
class ModuleSpec:
    name: str
    inputs: int = 0
    outputs: int = 0
    bidirs: int = 0
    scan_lengths: tuple[int, ...] = ()
    patterns: int = 1

    def __post_init__(self):
        object.__setattr__(self, "scan_lengths", tuple(self.scan_lengths))
        for label in ("inputs", "outputs", "bidirs"):
            if getattr(self, label) < 0:
                raise SocFormatError(f"module {self.name}: negative {label}")
        if any(length <= 0 for length in self.scan_lengths):
            raise SocFormatError(f"module {self.name}: scan chain lengths must be positive")
        if self.patterns < 1:
            raise SocFormatError(f"module {self.name}: patterns must be >= 1")
        if self.inputs + self.outputs + self.bidirs + len(self.scan_lengths) < 1:
            raise SocFormatError(f"module {self.name}: nothing to access")

    @property
    def scan_chains(self) -> int:
        return len(self.scan_lengths)

    @property
    def scan_cells(self) -> int:
        return sum(self.scan_lengths)

    @property
    def in_cells(self) -> int:
        """Wrapper input cells; a bidir counts on both sides."""
        return self.inputs + self.bidirs

    @property
    def out_cells(self) -> int:
        return self.outputs + self.bidirs

    @property
    def test_bits(self) -> int:
        """Stimulus plus response bits over the whole test."""
        return self.patterns * (2 * self.scan_cells + self.in_cells + self.out_cells)


@dataclass(frozen=True)
class SocDescription:
    name: str
    modules: tuple[ModuleSpec, ...]

    def __post_init__(self):
        object.__setattr__(self, "modules", tuple(self.modules))
        if not self.modules:
            raise SocFormatError(f"SOC {self.name}: no modules")
        seen = set()
        for m in self.modules:
            if m.name in seen:
                raise SocFormatError(f"SOC {self.name}: duplicate module name {m.name!r}")
            seen.add(m.name)

    def module(self, name: str) -> ModuleSpec:
        for m in self.modules:
            if m.name == name:
                return m
        raise KeyError(name)


@dataclass(frozen=True)
class AteSpec:
    """The fixed test cell. Defaults: 5 MHz test clock, 0.7 s index, 10 ms contact test."""

    channels: int
    depth: int
    freq: float = 5e6
    index_time: float = 0.7
    contact_time: float = 0.01

    def __post_init__(self):
        if self.channels < 2:
            raise ValueError("ATE needs at least 2 channels")
        if self.depth < 1:
            raise ValueError("vector memory depth must be positive")
        if not self.freq > 0:
            raise ValueError("test clock frequency must be positive")
        if self.index_time < 0 or self.contact_time < 0:
            raise ValueError("times must be non-negative")


# -- native format ----------------------------------------------------------

_INT_KEYS = {"Inputs": "inputs", "Outputs": "outputs", "Bidirs": "bidirs", "Patterns": "patterns"}
_INT_RE = re.compile(r"[+-]?\d+\Z")


def _tokens(text: str) -> Iterator[tuple[str, int]]:
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].replace(":", " : ")
        for tok in line.split():
            yield tok, lineno


class _TokenStream:
    def __init__(self, text: str):
        self._toks = list(_tokens(text))
        self._pos = 0

    def peek(self) -> tuple[str, int] | None:
        return self._toks[self._pos] if self._pos < len(self._toks) else None

    def next(self, what: str) -> tuple[str, int]:
        if self._pos >= len(self._toks):
            last = self._toks[-1][1] if self._toks else 1
            raise SocFormatError(f"unexpected end of document, expected {what}", last)
        tok = self._toks[self._pos]
        self._pos += 1
        return tok

    def int(self, what: str) -> int:
        tok, line = self.next(what)
        if not _INT_RE.match(tok):
            raise SocFormatError(f"expected integer for {what}, got {tok!r}", line)
        value = int(tok)
        if value < 0:
            raise SocFormatError(f"negative count for {what}: {value}", line)
        return value


def parse_soc(text: str) -> SocDescription:
    """Parse a native SOC document."""
    ts = _TokenStream(text)
    if ts.peek() is None:
        raise SocFormatError("no modules", 1)
    tok, line = ts.next("Soc")
    if tok != "Soc":
        raise SocFormatError(f"document must start with 'Soc <name>', got {tok!r}", line)
    soc_name, _ = ts.next("SOC name")

    modules: list[ModuleSpec] = []
    names: set[str] = set()
    current: dict | None = None
    current_line = 0

    def close():
        if current is None:
            return
        if "patterns" not in current:
            raise SocFormatError(f"module {current['name']}: missing Patterns", current_line)
        try:
            modules.append(ModuleSpec(**current))
        except SocFormatError as exc:
            raise SocFormatError(str(exc), current_line) from None

    while ts.peek() is not None:
        tok, line = ts.next("keyword")
        if tok == "Module":
            close()
            name, nline = ts.next("module name")
            if name in names:
                raise SocFormatError(f"duplicate module name {name!r}", nline)
            names.add(name)
            current, current_line = {"name": name}, line
            continue
        if current is None:
            raise SocFormatError(f"{tok!r} outside of a Module block", line)
        if tok in _INT_KEYS:
            current[_INT_KEYS[tok]] = ts.int(tok)
        elif tok == "ScanChains":
            count = ts.int("ScanChains")
            colon, cline = ts.next("':'")
            if colon != ":":
                raise SocFormatError(f"expected ':' after ScanChains count, got {colon!r}", cline)
            lengths = []
            while len(lengths) < count:
                nxt = ts.peek()
                if nxt is None or not _INT_RE.match(nxt[0]):
                    raise SocFormatError(
                        f"ScanChains declares {count} chains but lists {len(lengths)} lengths", line
                    )
                lengths.append(ts.int("scan chain length"))
            nxt = ts.peek()
            if nxt is not None and _INT_RE.match(nxt[0]):
                raise SocFormatError(
                    f"ScanChains declares {count} chains but lists more lengths", nxt[1]
                )
            current["scan_lengths"] = tuple(lengths)
        else:
            raise SocFormatError(f"unknown keyword {tok!r}", line)
    close()
    if not modules:
        raise SocFormatError("no modules", current_line or 1)
    return SocDescription(soc_name, tuple(modules))


def render_soc(soc: SocDescription) -> str:
    """Canonical native rendering; ``parse_soc(render_soc(s)) == s``."""
    out = [f"Soc {soc.name}"]
    for m in soc.modules:
        lengths = " ".join(str(x) for x in m.scan_lengths)
        out += [
            f"Module {m.name}",
            f"  Inputs {m.inputs}",
            f"  Outputs {m.outputs}",
            f"  Bidirs {m.bidirs}",
            f"  ScanChains {m.scan_chains} : {lengths}".rstrip(),
            f"  Patterns {m.patterns}",
        ]
    return "\n".join(out) + "\n"


def load_soc(path) -> SocDescription:
    with open(path, encoding="utf-8") as fh:
        return parse_soc(fh.read())


# -- ITC'02 import ----------------------------------------------------------

def import_itc02(text: str) -> SocDescription:
    """Convert an ITC'02 benchmark ``.soc`` file to a flat SocDescription.

    Hierarchy is flattened. Per module, the patterns of all tests that use
    the TAM are summed; BIST-only tests (``TamUse 0``) are dropped, and so
    are modules left with no external test.
    """
    soc_name = "soc"
    mods: dict[str, dict] = {}
    order: list[str] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        toks = raw.split("#", 1)[0].replace(":", " : ").split()
        if not toks:
            continue
        if toks[0] == "SocName" and len(toks) > 1:
            soc_name = toks[1]
            continue
        if toks[0] != "Module" or len(toks) < 2:
            continue
        mid = toks[1]
        if mid not in mods:
            mods[mid] = {"name": mid, "patterns": 0}
            order.append(mid)
        rec = mods[mid]
        rest = toks[2:]
        if "Test" in rest:
            kv = _pairs(rest[rest.index("Test") + 2:])
            if kv.get("TamUse", "1") != "0":
                rec["patterns"] += int(kv.get("Patterns", "0"))
            continue
        i = 0
        while i < len(rest):
            key = rest[i]
            if key == "Name" and i + 1 < len(rest):
                rec["label"] = rest[i + 1]
                i += 2
            elif key in ("Inputs", "Outputs", "Bidirs") and i + 1 < len(rest):
                rec[key.lower()] = int(rest[i + 1])
                i += 2
            elif key == "ScanChains" and i + 1 < len(rest):
                count = int(rest[i + 1])
                j = i + 2
                if j < len(rest) and rest[j] == ":":
                    j += 1
                lengths = [int(x) for x in rest[j:j + count]]
                if len(lengths) != count:
                    raise SocFormatError(f"module {mid}: ScanChains arity mismatch", lineno)
                rec["scan_lengths"] = tuple(lengths)
                i = j + count
            else:
                i += 1
    modules = []
    for mid in order:
        rec = dict(mods[mid])
        if rec["patterns"] < 1:
            continue
        label = rec.pop("label", None)
        rec["name"] = f"m{mid}_{label}" if label else f"m{mid}"
        try:
            modules.append(ModuleSpec(**rec))
        except SocFormatError:
            continue
    return SocDescription(soc_name, tuple(modules))


def _pairs(toks: list[str]) -> dict[str, str]:
    return {toks[i]: toks[i + 1] for i in range(0, len(toks) - 1, 2)}


# -- feasibility screen -----------------------------------------------------

@dataclass(frozen=True)
class ModuleCheck:
    name: str
    feasible: bool
    k_min: int | None
    test_time: int | None


@dataclass(frozen=True)
class ValidationReport:
    modules: tuple[ModuleCheck, ...] = field(default_factory=tuple)

    @property
    def feasible(self) -> bool:
        return all(c.feasible for c in self.modules)

    @property
    def failing(self) -> list[str]:
        return [c.name for c in self.modules if not c.feasible]


def validate_soc(soc: SocDescription, ate: AteSpec) -> ValidationReport:
    """Check every module fits in the vector memory at some TAM width <= N/2."""
    from .wrapper import min_channels, best_test_time

    checks = []
    for m in soc.modules:
        k = min_channels(m, ate)
        t = best_test_time(m, k // 2) if k is not None else None
        checks.append(ModuleCheck(m.name, k is not None, k, t))
    return ValidationReport(tuple(checks))
