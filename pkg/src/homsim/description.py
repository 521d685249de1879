"""Plain-text description of the interferometer setup.

Grammar::

    file    := stmt*
    stmt    := grid | arm | bs | collect | model
    grid    := "grid" INT number ["k0" INT INT] ";"
    arm     := "arm" ("signal" | "idler") "{" element* "}"
    element := "mirror" ";" | "phase_step" number ";"
             | "phase_file" path ";" | "delay" number ";"
    bs      := "bs" number ";"                      (transmittance T)
    collect := "collect" ("a" | "b") ("+k0" | "-k0" | "(" INT "," INT ")") [number] ";"
    model   := "model" key number [number] ";"

Numbers are floats or multiples/fractions of ``pi`` (``pi``, ``-pi/2``,
``2pi/3``, ``0.5*pi``). Comments run from ``#`` to the end of the line.
Model keys: ``mu``, ``coherence_length`` (m), ``filter`` (centre wavelength
and FWHM bandwidth, m), ``accidental_rate``, ``pair_rate``,
``integration_time``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .coincidence import ImperfectionModel
from .elements import (
    DEFAULT_COHERENCE,
    CoherenceModel,
    coherence_from_filter,
    pixel_mask,
    step_mask,
)
from .interferometer import Circuit, CollectionMode, Delay, Mirror, Phase
from .state import BiphotonState, MomentumGrid, MomentumLabel, spdc_state

_FLOAT = r"(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?"
_FLOAT_RE = re.compile(rf"[+-]?{_FLOAT}")
_PI_RE = re.compile(rf"([+-]?)(?:({_FLOAT})\*?)?pi(?:/({_FLOAT}))?")
_INT_RE = re.compile(r"[+-]?\d+")

MODEL_KEYS = {
    "mu": 1,
    "coherence_length": 1,
    "filter": 2,
    "accidental_rate": 1,
    "pair_rate": 1,
    "integration_time": 1,
}


def parse_number(text: str) -> float:
    """Float literal or a ``pi`` expression such as ``-3pi/4``."""
    if _FLOAT_RE.fullmatch(text):
        return float(text)
    m = _PI_RE.fullmatch(text)
    if m is None:
        raise ValueError(f"not a number: {text!r}")
    sign, mult, div = m.groups()
    if div is not None and float(div) == 0:
        raise ValueError(f"division by zero in {text!r}")
    value = np.pi * (float(mult) if mult else 1.0) / (float(div) if div else 1.0)
    return -value if sign == "-" else value


class SetupError(ValueError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.message = message
        self.line = line
        self.column = column


@dataclass(frozen=True)
class ElementSpec:
    kind: str  # mirror | phase_step | phase_file | delay
    value: float | str | None = None


@dataclass(frozen=True)
class CollectSpec:
    port: str
    center: str | tuple[int, int]  # "+k0", "-k0" or explicit (ix, iy)
    width: float = 0.0


@dataclass(frozen=True)
class CircuitDescription:
    n: int = 3
    k_max: float = 1.0
    k0: tuple[int, int] = (1, 0)
    signal: tuple[ElementSpec, ...] = ()
    idler: tuple[ElementSpec, ...] = ()
    T: float = 0.5
    collect: tuple[CollectSpec, ...] = ()
    model: dict = field(default_factory=dict)


@dataclass
class _Token:
    kind: str  # word | string | punct | eof
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    line, col, i = 1, 1, 0
    while i < len(text):
        ch = text[i]
        if ch == "\n":
            line, col, i = line + 1, 1, i + 1
        elif ch.isspace():
            col, i = col + 1, i + 1
        elif ch == "#":
            while i < len(text) and text[i] != "\n":
                i += 1
        elif ch in "{};(),":
            tokens.append(_Token("punct", ch, line, col))
            col, i = col + 1, i + 1
        elif ch == '"':
            j = text.find('"', i + 1)
            if j < 0 or "\n" in text[i:j]:
                raise SetupError("unterminated string", line, col)
            tokens.append(_Token("string", text[i + 1:j], line, col))
            col, i = col + (j - i + 1), j + 1
        else:
            j = i
            while j < len(text) and not text[j].isspace() and text[j] not in '{};(),#"':
                j += 1
            tokens.append(_Token("word", text[i:j], line, col))
            col, i = col + (j - i), j
    tokens.append(_Token("eof", "", line, col))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def next(self) -> _Token:
        tok = self.tokens[self.pos]
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def error(self, message: str, tok: _Token | None = None):
        tok = tok or self.peek()
        raise SetupError(message, tok.line, tok.col)

    def expect(self, text: str) -> _Token:
        tok = self.next()
        if tok.text != text or tok.kind not in ("punct", "word"):
            self.error(f"expected {text!r}, found {tok.text or 'end of file'!r}", tok)
        return tok

    def word(self, what: str) -> _Token:
        tok = self.next()
        if tok.kind != "word":
            self.error(f"expected {what}, found {tok.text or 'end of file'!r}", tok)
        return tok

    def number(self, what: str = "number") -> float:
        tok = self.word(what)
        try:
            return parse_number(tok.text)
        except ValueError:
            self.error(f"expected {what}, found {tok.text!r}", tok)

    def integer(self, what: str = "integer") -> int:
        tok = self.word(what)
        if not _INT_RE.fullmatch(tok.text):
            self.error(f"expected {what}, found {tok.text!r}", tok)
        return int(tok.text)

    def parse(self) -> CircuitDescription:
        grid = None
        arms: dict[str, tuple] = {}
        bs = None
        collect = []
        model: dict = {}
        while self.peek().kind != "eof":
            tok = self.word("statement keyword")
            kw = tok.text
            if kw == "grid":
                if grid is not None:
                    self.error("duplicate grid statement", tok)
                grid = self.parse_grid(tok)
            elif kw == "arm":
                name_tok = self.word("arm name")
                if name_tok.text not in ("signal", "idler"):
                    self.error(f"unknown arm {name_tok.text!r}; expected signal or idler", name_tok)
                if name_tok.text in arms:
                    self.error(f"duplicate arm {name_tok.text!r}", name_tok)
                arms[name_tok.text] = self.parse_arm()
            elif kw == "bs":
                if bs is not None:
                    self.error("duplicate bs statement", tok)
                num_tok = self.peek()
                bs = self.number("beamsplitter transmittance")
                if not 0.0 < bs < 1.0:
                    self.error(f"beamsplitter transmittance must lie in (0, 1), got {bs}", num_tok)
                self.expect(";")
            elif kw == "collect":
                collect.append(self.parse_collect())
            elif kw == "model":
                key_tok = self.word("model key")
                if key_tok.text not in MODEL_KEYS:
                    self.error(f"unknown model key {key_tok.text!r}", key_tok)
                if key_tok.text in model:
                    self.error(f"duplicate model key {key_tok.text!r}", key_tok)
                values = tuple(self.number() for _ in range(MODEL_KEYS[key_tok.text]))
                model[key_tok.text] = values if len(values) > 1 else values[0]
                self.expect(";")
            else:
                self.error(f"unknown keyword {kw!r}", tok)
        end = self.peek()
        if not arms:
            self.error("missing arm blocks", end)
        for name in ("signal", "idler"):
            if name not in arms:
                self.error(f"missing arm block {name!r}", end)
        if bs is None:
            self.error("missing bs statement", end)
        if len(collect) < 2:
            self.error("at least two collect statements are required", end)
        n, k_max, k0 = grid or (3, 1.0, (1, 0))
        return CircuitDescription(n, k_max, k0, arms["signal"], arms["idler"], bs,
                                  tuple(collect), model)

    def parse_grid(self, tok):
        n_tok = self.peek()
        n = self.integer("grid size")
        if n < 3 or n % 2 == 0:
            self.error(f"grid size must be odd and >= 3, got {n}", n_tok)
        k_tok = self.peek()
        k_max = self.number("k_max")
        if k_max <= 0:
            self.error("k_max must be positive", k_tok)
        k0 = (1, 0)
        if self.peek().text == "k0":
            self.next()
            k0_tok = self.peek()
            k0 = (self.integer("k0 x index"), self.integer("k0 y index"))
            if k0 == (0, 0):
                self.error("k0 must not be the origin", k0_tok)
            h = (n - 1) // 2
            if abs(k0[0]) > h or abs(k0[1]) > h:
                self.error(f"k0 {k0} lies outside the {n}x{n} grid", k0_tok)
        self.expect(";")
        return n, k_max, k0

    def parse_arm(self) -> tuple[ElementSpec, ...]:
        self.expect("{")
        elements = []
        while self.peek().text != "}":
            tok = self.word("element")
            if tok.text == "mirror":
                elements.append(ElementSpec("mirror"))
            elif tok.text in ("phase_step", "delay"):
                elements.append(ElementSpec(tok.text, self.number()))
            elif tok.text == "phase_file":
                path_tok = self.next()
                if path_tok.kind not in ("word", "string"):
                    self.error("expected a file path", path_tok)
                elements.append(ElementSpec("phase_file", path_tok.text))
            else:
                self.error(f"unknown element {tok.text!r}", tok)
            self.expect(";")
        self.expect("}")
        return tuple(elements)

    def parse_collect(self) -> CollectSpec:
        port_tok = self.word("port")
        if port_tok.text not in ("a", "b"):
            self.error(f"unknown port {port_tok.text!r}; expected a or b", port_tok)
        tok = self.peek()
        if tok.text == "(":
            self.next()
            ix = self.integer()
            self.expect(",")
            iy = self.integer()
            self.expect(")")
            center = (ix, iy)
            if center == (0, 0):
                self.error("collection window centred on k = 0 (self-paired mode)", tok)
        elif tok.text in ("+k0", "-k0"):
            self.next()
            center = tok.text
        else:
            self.error(f"expected +k0, -k0 or (ix, iy), found {tok.text or 'end of file'!r}", tok)
        width = 0.0
        if self.peek().text != ";":
            w_tok = self.peek()
            width = self.number("window width")
            if width < 0:
                self.error("window width must be non-negative", w_tok)
        self.expect(";")
        return CollectSpec(port_tok.text, center, width)


def parse_setup(text: str) -> CircuitDescription:
    return _Parser(text).parse()


def _fmt(x: float) -> str:
    return repr(float(x))


def pretty_print(desc: CircuitDescription) -> str:
    lines = [f"grid {desc.n} {_fmt(desc.k_max)} k0 {desc.k0[0]} {desc.k0[1]};"]
    for name in ("signal", "idler"):
        lines.append(f"arm {name} {{")
        for el in getattr(desc, name):
            if el.kind == "mirror":
                lines.append("  mirror;")
            elif el.kind == "phase_file":
                lines.append(f'  phase_file "{el.value}";')
            else:
                lines.append(f"  {el.kind} {_fmt(el.value)};")
        lines.append("}")
    lines.append(f"bs {_fmt(desc.T)};")
    for c in desc.collect:
        center = c.center if isinstance(c.center, str) else f"({c.center[0]}, {c.center[1]})"
        lines.append(f"collect {c.port} {center} {_fmt(c.width)};")
    for key, value in desc.model.items():
        values = value if isinstance(value, tuple) else (value,)
        lines.append(f"model {key} " + " ".join(_fmt(v) for v in values) + ";")
    return "\n".join(lines) + "\n"


DEFAULT_SETUP = """\
# Two mirrors per arm, a step phase mask and delay line on the idler,
# a balanced beamsplitter and fibres on opposite sides of the beam.
grid 3 1.0 k0 1 0;
arm signal { mirror; mirror; }
arm idler { mirror; mirror; phase_step pi; delay 0; }
bs 0.5;
collect a +k0;
collect b -k0;
"""


@dataclass(frozen=True)
class Experiment:
    """Everything needed to simulate a parsed setup."""

    grid: MomentumGrid
    k0: MomentumLabel
    circuit: Circuit
    model: ImperfectionModel
    coherence: CoherenceModel
    source: BiphotonState


def load_phase_file(path, grid: MomentumGrid):
    """Whitespace-separated radians, n rows by n columns; row r holds iy = r - h."""
    values = np.loadtxt(path, dtype=float, ndmin=2)
    if values.shape != (grid.n, grid.n):
        raise ValueError(f"{path}: expected a {grid.n}x{grid.n} matrix, got {values.shape}")
    return pixel_mask(values, grid)


def build_experiment(desc: CircuitDescription, base_dir=".") -> Experiment:
    grid = MomentumGrid(desc.n, desc.k_max)
    k0 = MomentumLabel(*desc.k0)

    def element(spec: ElementSpec):
        if spec.kind == "mirror":
            return Mirror()
        if spec.kind == "delay":
            return Delay(spec.value)
        if spec.kind == "phase_step":
            return Phase(step_mask(spec.value, grid))
        return Phase(load_phase_file(Path(base_dir) / spec.value, grid))

    m = desc.model
    if "coherence_length" in m:
        coherence = CoherenceModel(m["coherence_length"])
    elif "filter" in m:
        coherence = coherence_from_filter(*m["filter"])
    else:
        coherence = DEFAULT_COHERENCE
    modes = []
    for c in desc.collect:
        center = {"+k0": k0, "-k0": -k0}.get(c.center, c.center)
        modes.append(CollectionMode(c.port, center, c.width))
    mu = m.get("mu", 1.0)
    circuit = Circuit(
        signal_arm=tuple(element(e) for e in desc.signal),
        idler_arm=tuple(element(e) for e in desc.idler),
        T=desc.T,
        collection=tuple(modes),
        coherence=coherence,
        overlap=mu,
    )
    model = ImperfectionModel(
        T=desc.T,
        mu=mu,
        accidental_rate=m.get("accidental_rate", 0.0),
        pair_rate=m.get("pair_rate", 1e4),
        integration_time=m.get("integration_time", 1.0),
    )
    return Experiment(grid, k0, circuit, model, coherence, spdc_state(grid))
