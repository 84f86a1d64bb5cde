"""Line-oriented analysis scripts.

::

    load <name> = image "<path>" | volume "<path>"
    neighborhood moore | vonneumann | extended <k>
    spacing <s0> <s1> [<s2>]
    metric graph | euclidean | chessboard | cityblock
    let <ident> = <formula>
    save mask "<path>" <ident>
    save overlay "<path>" base=<attr> <ident>:<#RRGGBB> ...
    print stats <ident>

``#`` starts a comment when it begins a line or follows whitespace. A ``let``
body may use earlier ``let`` names as if they were atoms; they are replaced
by their formulas, so bare identifiers must be bound names.
"""

from __future__ import annotations

import re
import shlex
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import TextIO

from .checker import CheckError, Checker
from .formula import Formula, FormulaSyntaxError, KEYWORDS, parse_formula, validate
from .grid import METRICS, LoadError, Model, ModelError, NeighborhoodSpec, VoxelGrid
from . import imgio

EXIT_OK, EXIT_SCRIPT, EXIT_IO = 0, 1, 2
_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


class ScriptError(Exception):
    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        where = ""
        if line is not None:
            where = f"line {line}" + (f", column {column}" if column is not None else "") + ": "
        super().__init__(where + message)
        self.line = line
        self.column = column


@dataclass
class Load:
    name: str
    path: str
    kind: str
    line: int = 0


@dataclass
class Neighborhood:
    preset: str
    k: int = 1
    line: int = 0


@dataclass
class Spacing:
    values: tuple[float, ...]
    line: int = 0


@dataclass
class Metric:
    kind: str
    line: int = 0


@dataclass
class Let:
    name: str
    formula: Formula
    text: str = ""
    line: int = 0


@dataclass
class SaveMask:
    path: str
    name: str
    line: int = 0


@dataclass
class SaveOverlay:
    path: str
    base: str
    layers: list[tuple[str, tuple[int, int, int]]]
    line: int = 0


@dataclass
class PrintStats:
    name: str
    line: int = 0


@dataclass
class Script:
    statements: list = field(default_factory=list)


def _strip_comment(line: str) -> str:
    quoted = False
    for i, ch in enumerate(line):
        if ch == '"':
            quoted = not quoted
        elif ch == "#" and not quoted and (i == 0 or line[i - 1].isspace()):
            return line[:i]
    return line


def _ident(text, lineno, what="name"):
    if not _IDENT.match(text) or text in KEYWORDS:
        raise ScriptError(f"invalid {what} {text!r}", lineno)
    return text


def _split(rest: str, lineno: int) -> list[str]:
    try:
        return shlex.split(rest, comments=False, posix=True)
    except ValueError as exc:
        raise ScriptError(str(exc), lineno) from None


def parse_script(text: str) -> Script:
    script = Script()
    bindings: dict[str, Formula] = {}
    loaded = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw).strip()
        if not line:
            continue
        keyword, _, rest = line.partition(" ")
        rest = rest.strip()
        if keyword == "load":
            m = re.fullmatch(r'(\w+)\s*=\s*(image|volume)\s+"([^"]*)"', rest)
            if not m:
                raise ScriptError('expected: load <name> = image|volume "<path>"', lineno)
            if loaded:
                raise ScriptError("only one model may be loaded per script", lineno)
            loaded = True
            script.statements.append(Load(_ident(m[1], lineno), m[3], m[2], lineno))
        elif keyword == "neighborhood":
            parts = rest.split()
            if parts[:1] in (["moore"], ["vonneumann"]) and len(parts) == 1:
                script.statements.append(Neighborhood(parts[0], 1, lineno))
            elif len(parts) == 2 and parts[0] == "extended" and parts[1].isdigit() and int(parts[1]) >= 1:
                script.statements.append(Neighborhood("extended", int(parts[1]), lineno))
            else:
                raise ScriptError("expected: neighborhood moore | vonneumann | extended <k>", lineno)
        elif keyword == "spacing":
            try:
                values = tuple(float(v) for v in rest.split())
            except ValueError:
                raise ScriptError("spacing values must be numbers", lineno) from None
            if not values or any(not v > 0 for v in values):
                raise ScriptError("spacing needs positive values", lineno)
            script.statements.append(Spacing(values, lineno))
        elif keyword == "metric":
            if rest not in METRICS:
                raise ScriptError(f"expected: metric {' | '.join(METRICS)}", lineno)
            script.statements.append(Metric(rest, lineno))
        elif keyword == "let":
            m = re.fullmatch(r"(\w+)\s*=(.*)", rest, re.S)
            if not m:
                raise ScriptError("expected: let <name> = <formula>", lineno)
            if not loaded:
                raise ScriptError("'let' before any 'load'", lineno)
            name = _ident(m[1], lineno)
            body = m[2]
            offset = raw.index(body) if body in raw else 0
            try:
                f = parse_formula(body, bindings, strict=True)
            except FormulaSyntaxError as exc:
                msg = str(exc).rsplit(" (line", 1)[0]
                raise ScriptError(msg, lineno, offset + exc.column) from None
            bindings[name] = f
            script.statements.append(Let(name, f, body.strip(), lineno))
        elif keyword == "save":
            kind, _, rest = rest.partition(" ")
            parts = _split(rest, lineno)
            if kind == "mask":
                if len(parts) != 2:
                    raise ScriptError('expected: save mask "<path>" <name>', lineno)
                _need_bound(parts[1], bindings, lineno)
                script.statements.append(SaveMask(parts[0], parts[1], lineno))
            elif kind == "overlay":
                if len(parts) < 2 or not parts[1].startswith("base="):
                    raise ScriptError('expected: save overlay "<path>" base=<attr> <name>:<#RRGGBB> ...', lineno)
                base = _ident(parts[1][5:], lineno, "attribute")
                layers = []
                for item in parts[2:]:
                    name, sep, color = item.partition(":")
                    if not sep:
                        raise ScriptError(f"overlay layer {item!r} must read <name>:<#RRGGBB>", lineno)
                    _need_bound(name, bindings, lineno)
                    try:
                        layers.append((name, imgio.parse_color(color)))
                    except ValueError as exc:
                        raise ScriptError(str(exc), lineno) from None
                script.statements.append(SaveOverlay(parts[0], base, layers, lineno))
            else:
                raise ScriptError(f"unknown save kind {kind!r}", lineno)
        elif keyword == "print":
            parts = rest.split()
            if len(parts) != 2 or parts[0] != "stats":
                raise ScriptError("expected: print stats <name>", lineno)
            _need_bound(parts[1], bindings, lineno)
            script.statements.append(PrintStats(parts[1], lineno))
        else:
            raise ScriptError(f"unknown statement {keyword!r}", lineno)
    return script


def _need_bound(name, bindings, lineno):
    if name not in bindings:
        raise ScriptError(f"name {name!r} used before 'let'", lineno)


class _Run:
    def __init__(self, base_dir: Path, verbose: bool, out: TextIO):
        self.base_dir = base_dir
        self.verbose = verbose
        self.out = out
        self.grid: VoxelGrid | None = None
        self.preset = ("moore", 1)
        self.spacing = None
        self.metric = "graph"
        self.checker: Checker | None = None
        self.lets: dict[str, Formula] = {}

    def path(self, p: str) -> Path:
        p = Path(p)
        return p if p.is_absolute() else self.base_dir / p

    def model_changed(self):
        self.checker = None

    def get_checker(self, line) -> Checker:
        if self.checker is None:
            if self.grid is None:
                raise ScriptError("no model loaded", line)
            grid = self.grid
            try:
                if self.spacing is not None:
                    grid = grid.with_spacing(self.spacing)
                nb = NeighborhoodSpec.preset(self.preset[0], grid.ndim, self.preset[1])
                self.checker = Checker(Model(grid, nb, self.metric))
            except ModelError as exc:
                raise ScriptError(str(exc), line) from None
        return self.checker

    def mask(self, name, line):
        return self.get_checker(line).check(self.lets[name])

    def execute(self, st):
        if isinstance(st, Load):
            path = self.path(st.path)
            grid = imgio.load_volume(path) if st.kind == "volume" else imgio.load_image2d(path)
            attrs = dict(grid.attributes)
            attrs.update({f"{st.name}_{k}": v for k, v in grid.attributes.items()})
            self.grid = VoxelGrid(grid.dims, grid.spacing, attrs)
            self.model_changed()
        elif isinstance(st, Neighborhood):
            self.preset = (st.preset, st.k)
            self.model_changed()
        elif isinstance(st, Spacing):
            self.spacing = st.values
            self.model_changed()
        elif isinstance(st, Metric):
            self.metric = st.kind
            self.model_changed()
        elif isinstance(st, Let):
            checker = self.get_checker(st.line)
            errors = validate(st.formula, checker.grid)
            if errors:
                raise ScriptError("; ".join(errors), st.line)
            t0 = time.perf_counter()
            try:
                mask = checker.check(st.formula)
            except CheckError as exc:
                raise ScriptError(str(exc), st.line) from None
            elapsed = time.perf_counter() - t0
            self.lets[st.name] = st.formula
            if self.verbose:
                n = int(mask.sum())
                print(f"let {st.name}: {n} points ({100.0 * n / mask.size:.4f}%) in {elapsed:.4f} s",
                      file=self.out)
        elif isinstance(st, SaveMask):
            mask = self.mask(st.name, st.line)
            path = self.path(st.path)
            imgio.ensure_parent(path)
            try:
                imgio.save_mask(path, mask)
            except ModelError as exc:
                raise ScriptError(str(exc), st.line) from None
        elif isinstance(st, SaveOverlay):
            checker = self.get_checker(st.line)
            if st.base not in checker.grid.attributes:
                raise ScriptError(f"unknown attribute {st.base}", st.line)
            layers = [(self.mask(name, st.line), color) for name, color in st.layers]
            path = self.path(st.path)
            imgio.ensure_parent(path)
            try:
                imgio.save_overlay(path, checker.grid, imgio.OverlaySpec(st.base, layers))
            except ModelError as exc:
                raise ScriptError(str(exc), st.line) from None
        elif isinstance(st, PrintStats):
            mask = self.mask(st.name, st.line)
            n = int(mask.sum())
            print(f"{st.name}: {n} points, {100.0 * n / mask.size:.4f}%", file=self.out)


def run_script(script: Script, base_dir=".", verbose: bool = False,
               out: TextIO | None = None, err: TextIO | None = None) -> int:
    """Execute statements in order; the first failure aborts.

    Returns 0 on success, 1 on a script error and 2 on an I/O error.
    """
    out = out or sys.stdout
    err = err or sys.stderr
    run = _Run(Path(base_dir), verbose, out)
    for st in script.statements:
        try:
            run.execute(st)
        except ScriptError as exc:
            print(f"error: {exc}", file=err)
            return EXIT_SCRIPT
        except (LoadError, OSError) as exc:
            print(f"error: line {st.line}: {exc}", file=err)
            return EXIT_IO
    return EXIT_OK


def run_file(path, verbose: bool = False, out: TextIO | None = None,
             err: TextIO | None = None) -> int:
    err = err or sys.stderr
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        print(f"error: cannot read script {path}: {exc}", file=err)
        return EXIT_IO
    try:
        script = parse_script(text)
    except ScriptError as exc:
        print(f"error: {path}: {exc}", file=err)
        return EXIT_SCRIPT
    return run_script(script, path.parent, verbose, out, err)
