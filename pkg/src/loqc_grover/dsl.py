"""Line-oriented circuit description files (``.lqc``).

One statement per line; ``#`` starts a comment.  A circuit file looks like::

    name coincidence-cnot
    qubits c t
    rail c
    rail t
    rail cx_vc
    wp t -67.5 180
    bs c cx_vc H sqrt(1/3) thick=A
    pbs c t
    detect d_w cx_vc expect=0
    accept coincidence c t

Statements: ``name``, ``rail``, ``photon``, ``source pdc``, ``qubits``,
``wp``, ``pd``, ``bs``, ``pbs``, ``detect``, ``contract`` and ``accept``.
Numbers may be written as small arithmetic expressions (``sqrt(1/3)``,
``-180/8``); the original text is kept so a document serializes back to
what was read.  A file with a ``qubits`` line describes a two-qubit gate:
the qubit photons are supplied by the caller and only ancilla photons are
declared.
"""

from __future__ import annotations

import ast
import math
import operator
import re
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from .circuit import Circuit, Detector
from .elements import Beamsplitter, PhaseDelay, PolarizingBeamsplitter, Waveplate
from .errors import ParseError, RegistryError, ValidationError
from .gates import CNOT, CSIGN, GateBlueprint

ETA_CONVENTIONS = ("amplitude", "intensity")
KEYWORDS = (
    "name",
    "rail",
    "photon",
    "source",
    "qubits",
    "wp",
    "pd",
    "bs",
    "pbs",
    "detect",
    "contract",
    "accept",
)
CONTRACT_GATES = {"csign": CSIGN, "cnot": CNOT}
_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_.\-]*\Z")
_TOKEN = re.compile(r"\S+")


# -- numeric expressions -----------------------------------------------------

_BINOPS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
    ast.Pow: operator.pow,
}
_UNARY = {ast.USub: operator.neg, ast.UAdd: operator.pos}
_FUNCS = {"sqrt": math.sqrt, "cos": math.cos, "sin": math.sin, "acos": math.acos}
_CONSTS = {"pi": math.pi}


def evaluate(text: str) -> float:
    """Value of a restricted arithmetic expression (numbers, + - * / **, sqrt, pi)."""

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and type(node.value) in (int, float):
            return float(node.value)
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.UnaryOp) and type(node.op) in _UNARY:
            return _UNARY[type(node.op)](ev(node.operand))
        if isinstance(node, ast.Name) and node.id in _CONSTS:
            return _CONSTS[node.id]
        if (
            isinstance(node, ast.Call)
            and isinstance(node.func, ast.Name)
            and node.func.id in _FUNCS
            and len(node.args) == 1
            and not node.keywords
        ):
            return _FUNCS[node.func.id](ev(node.args[0]))
        raise ValueError("unsupported expression")

    try:
        value = ev(ast.parse(text, mode="eval"))
    except (SyntaxError, ValueError, ZeroDivisionError, OverflowError, TypeError):
        raise ValueError(f"not a number: {text!r}") from None
    if isinstance(value, complex) or not math.isfinite(value):
        raise ValueError(f"not a finite real number: {text!r}")
    return float(value)


# -- document model ----------------------------------------------------------


@dataclass(frozen=True)
class Number:
    text: str
    value: float

    @classmethod
    def of(cls, value: float) -> "Number":
        value = float(value)
        text = repr(value)
        if text.endswith(".0"):
            text = text[:-2]
        return cls(text, value)


Arg = Union[str, Number]


@dataclass(frozen=True)
class Statement:
    """One line: keyword, positional arguments, ``key=value`` options, comment.

    Blank and comment-only lines have an empty keyword.
    """

    keyword: str
    args: tuple[Arg, ...] = ()
    options: tuple[tuple[str, Arg], ...] = ()
    comment: Optional[str] = None
    line: int = field(default=0, compare=False)

    def option(self, key: str, default=None):
        return dict(self.options).get(key, default)

    def render(self) -> str:
        parts = [self.keyword] if self.keyword else []
        parts += [a.text if isinstance(a, Number) else a for a in self.args]
        parts += [f"{k}={v.text if isinstance(v, Number) else v}" for k, v in self.options]
        body = " ".join(parts)
        if self.comment is None:
            return body
        if not body:
            return f"#{self.comment}"
        return f"{body}  #{self.comment}"


@dataclass(frozen=True)
class CircuitDocument:
    statements: tuple[Statement, ...]
    eta_convention: str = "amplitude"

    def find(self, keyword: str) -> list[Statement]:
        return [s for s in self.statements if s.keyword == keyword]

    @property
    def name(self) -> str:
        found = self.find("name")
        return found[0].args[0] if found else ""

    @property
    def qubits(self) -> Optional[tuple[str, str]]:
        found = self.find("qubits")
        return tuple(found[0].args) if found else None

    @property
    def is_gate(self) -> bool:
        return self.qubits is not None


def serialize(doc: CircuitDocument) -> str:
    return "".join(s.render() + "\n" for s in doc.statements)


# -- parser ------------------------------------------------------------------


class _Line:
    def __init__(self, number: int, text: str):
        self.number = number
        self.comment = None
        hash_at = text.find("#")
        if hash_at >= 0:
            self.comment = text[hash_at + 1 :]
            text = text[:hash_at]
        self.tokens = [(m.group(), m.start() + 1) for m in _TOKEN.finditer(text)]
        self.end = len(text.rstrip()) + 1

    def fail(self, message: str, index: Optional[int] = None):
        column = self.tokens[index][1] if index is not None and index < len(self.tokens) else self.end
        raise ParseError(message, self.number, column)


class _Parser:
    def __init__(self, eta_convention: str):
        if eta_convention not in ETA_CONVENTIONS:
            raise ValueError(f"eta convention must be one of {ETA_CONVENTIONS}")
        self.eta_convention = eta_convention
        self.rails: dict[str, int] = {}
        self.detector_names: set[str] = set()
        self.detected: dict[tuple[str, Optional[str]], int] = {}
        self.seen: dict[str, int] = {}

    # token helpers
    def _ident(self, ln: _Line, i: int, what: str) -> str:
        tok = ln.tokens[i][0]
        if not _IDENT.match(tok):
            ln.fail(f"invalid {what} name {tok!r}", i)
        return tok

    def _rail(self, ln: _Line, i: int) -> str:
        tok = self._ident(ln, i, "rail")
        if tok not in self.rails:
            ln.fail(f"rail {tok!r} used before it is declared", i)
        return tok

    def _number(self, ln: _Line, i: int) -> Number:
        tok = ln.tokens[i][0]
        try:
            return Number(tok, evaluate(tok))
        except ValueError as exc:
            ln.fail(str(exc), i)

    def _choice(self, ln: _Line, i: int, allowed, what: str) -> str:
        tok = ln.tokens[i][0]
        if tok not in allowed:
            ln.fail(f"{what} must be one of {'|'.join(allowed)}, got {tok!r}", i)
        return tok

    def _split(self, ln: _Line, allowed_options):
        """Positional tokens (indices) and options; options must come last."""
        positional, options = [], {}
        for i, (tok, _) in enumerate(ln.tokens[1:], start=1):
            if "=" in tok:
                key, _, value = tok.partition("=")
                if key not in allowed_options:
                    ln.fail(f"unknown option {key!r}", i)
                if key in options:
                    ln.fail(f"option {key!r} given twice", i)
                options[key] = (value, i)
            else:
                if options:
                    ln.fail("positional argument after an option", i)
                positional.append(i)
        return positional, options

    def _arity(self, ln: _Line, positional, lo: int, hi: Optional[int] = None, usage: str = ""):
        hi = lo if hi is None else hi
        if not lo <= len(positional) <= hi:
            kw = ln.tokens[0][0]
            index = positional[hi] if len(positional) > hi else None
            ln.fail(f"'{kw}' takes {usage}", index)

    def _once(self, ln: _Line, keyword: str):
        if keyword in self.seen:
            ln.fail(f"'{keyword}' already given on line {self.seen[keyword]}", 0)
        self.seen[keyword] = ln.number

    # statements
    def statement(self, ln: _Line) -> Statement:
        if not ln.tokens:
            return Statement("", comment=ln.comment, line=ln.number)
        kw = ln.tokens[0][0]
        if kw not in KEYWORDS:
            ln.fail(f"unknown keyword {kw!r}", 0)
        handler = getattr(self, f"_do_{kw}")
        args, options = handler(ln)
        return Statement(kw, tuple(args), tuple(options), ln.comment, ln.number)

    def _do_name(self, ln):
        pos, _ = self._split(ln, ())
        self._arity(ln, pos, 1, usage="one name")
        self._once(ln, "name")
        return [ln.tokens[pos[0]][0]], []

    def _do_rail(self, ln):
        pos, _ = self._split(ln, ())
        self._arity(ln, pos, 1, usage="one rail name")
        name = self._ident(ln, pos[0], "rail")
        if name in self.rails:
            ln.fail(f"redefinition of rail {name!r} (first declared on line {self.rails[name]})", pos[0])
        self.rails[name] = ln.number
        return [name], []

    def _do_photon(self, ln):
        pos, _ = self._split(ln, ())
        self._arity(ln, pos, 2, usage="a rail and a polarization H|V")
        pol = self._choice(ln, pos[1], ("H", "V"), "polarization")
        return [self._rail(ln, pos[0]), pol], []

    def _do_source(self, ln):
        pos, _ = self._split(ln, ())
        self._arity(ln, pos, 3, usage="'pdc' and two rails")
        kind = self._choice(ln, pos[0], ("pdc",), "source type")
        a, b = self._rail(ln, pos[1]), self._rail(ln, pos[2])
        if a == b:
            ln.fail("a pair source needs two distinct rails", pos[2])
        return [kind, a, b], []

    def _do_qubits(self, ln):
        pos, _ = self._split(ln, ())
        self._arity(ln, pos, 2, usage="a control and a target rail")
        self._once(ln, "qubits")
        c, t = self._ident(ln, pos[0], "rail"), self._ident(ln, pos[1], "rail")
        if c == t:
            ln.fail("control and target must differ", pos[1])
        return [c, t], []

    def _do_wp(self, ln):
        pos, _ = self._split(ln, ())
        self._arity(ln, pos, 3, usage="a rail, alpha and phi in degrees")
        alpha, phi = self._number(ln, pos[1]), self._number(ln, pos[2])
        return [self._rail(ln, pos[0]), alpha, phi], []

    def _do_pd(self, ln):
        pos, _ = self._split(ln, ())
        self._arity(ln, pos, 2, usage="a rail and a delay in degrees")
        theta = self._number(ln, pos[1])
        return [self._rail(ln, pos[0]), theta], []

    def _do_bs(self, ln):
        pos, opts = self._split(ln, ("thick",))
        self._arity(ln, pos, 4, usage="two rails, H|V|both and a reflectivity, then thick=A|B")
        pol = self._choice(ln, pos[2], ("H", "V", "both"), "polarization")
        r = self._number(ln, pos[3])
        if not 0.0 <= r.value <= 1.0:
            shown = r.text if r.text == Number.of(r.value).text else f"{r.text} = {r.value:.6g}"
            ln.fail(f"reflectivity {shown} outside [0, 1]", pos[3])
        if "thick" not in opts:
            ln.fail("missing thick=A|B", None)
        thick, ti = opts["thick"]
        if thick not in ("A", "B"):
            ln.fail(f"thick must be A or B, got {thick!r}", ti)
        a, b = self._rail(ln, pos[0]), self._rail(ln, pos[1])
        if a == b:
            ln.fail("a beamsplitter needs two distinct rails", pos[1])
        return [a, b, pol, r], [("thick", thick)]

    def _do_pbs(self, ln):
        pos, _ = self._split(ln, ())
        self._arity(ln, pos, 2, usage="two rails")
        a, b = self._rail(ln, pos[0]), self._rail(ln, pos[1])
        if a == b:
            ln.fail("a PBS needs two distinct rails", pos[1])
        return [a, b], []

    def _do_detect(self, ln):
        pos, opts = self._split(ln, ("expect",))
        self._arity(ln, pos, 2, 3, usage="a name, a rail and optionally H|V, then expect=<int|any>")
        name = self._ident(ln, pos[0], "detector")
        if name in self.detector_names:
            ln.fail(f"redefinition of detector {name!r}", pos[0])
        pol = None
        if len(pos) == 3:
            pol = self._choice(ln, pos[2], ("H", "V"), "polarization")
        if "expect" not in opts:
            ln.fail("missing expect=<int|any>", None)
        expect, ei = opts["expect"]
        if expect != "any" and not (expect.isdigit() and expect.isascii()):
            ln.fail(f"expect must be a non-negative integer or 'any', got {expect!r}", ei)
        rail = self._rail(ln, pos[1])
        for p in ((pol,) if pol else ("H", "V")):
            for key in ((rail, p), (rail, None)):
                if key in self.detected:
                    ln.fail(f"rail {rail!r} is already read by the detector on line {self.detected[key]}", pos[1])
        self.detected[(rail, pol)] = ln.number
        self.detector_names.add(name)
        args = [name, rail] + ([pol] if pol else [])
        return args, [("expect", expect)]

    def _do_contract(self, ln):
        pos, opts = self._split(ln, ("phase",))
        self._arity(ln, pos, 2, usage="csign|cnot and an amplitude")
        self._once(ln, "contract")
        gate = self._choice(ln, pos[0], tuple(CONTRACT_GATES), "contract gate")
        scale = self._number(ln, pos[1])
        options = []
        if "phase" in opts:
            phase, pi = opts["phase"]
            if phase not in ("exact", "global"):
                ln.fail(f"phase must be exact or global, got {phase!r}", pi)
            options.append(("phase", phase))
        return [gate, scale], options

    def _do_accept(self, ln):
        pos, _ = self._split(ln, ())
        if not pos:
            ln.fail("'accept' takes 'heralds' or 'coincidence <railA> <railB>'", None)
        mode = self._choice(ln, pos[0], ("coincidence", "heralds"), "acceptance")
        self._once(ln, "accept")
        if mode == "heralds":
            self._arity(ln, pos, 1, usage="no rails after 'heralds'")
            return [mode], []
        self._arity(ln, pos, 3, usage="'coincidence' and two rails")
        a, b = self._rail(ln, pos[1]), self._rail(ln, pos[2])
        if a == b:
            ln.fail("coincidence needs two distinct rails", pos[2])
        return [mode, a, b], []


def parse(text: str, *, eta_convention: str = "amplitude") -> CircuitDocument:
    """Parse and check a circuit description.

    With ``eta_convention="intensity"`` beamsplitter values are read as
    intensity reflectivities and converted to amplitudes (r = sqrt(eta)) on
    conversion to a circuit; the document keeps the text as written.
    """
    if text.startswith("\ufeff"):
        text = text[1:]
    parser = _Parser(eta_convention)
    lines = text.splitlines()
    statements = [parser.statement(_Line(k, raw)) for k, raw in enumerate(lines, start=1)]
    doc = CircuitDocument(tuple(statements), eta_convention)
    _check_document(doc)
    return doc


def _fail_at(stmt: Optional[Statement], message: str):
    raise ParseError(message, stmt.line if stmt else 1, 1)


def _check_document(doc: CircuitDocument):
    qubits = doc.find("qubits")
    if qubits:
        for rail in qubits[0].args:
            if rail not in {s.args[0] for s in doc.find("rail")}:
                _fail_at(qubits[0], f"qubit rail {rail!r} is never declared")
        if doc.find("source"):
            _fail_at(doc.find("source")[0], "gate files cannot declare sources")
        for s in doc.find("photon"):
            if s.args[0] in qubits[0].args:
                _fail_at(s, "gate files declare ancilla photons only; qubit photons are inputs")
    elif doc.find("contract"):
        _fail_at(doc.find("contract")[0], "'contract' needs a 'qubits' declaration")
    try:
        if doc.is_gate:
            to_blueprint(doc)
        else:
            to_circuit(doc)
    except (ValidationError, RegistryError) as exc:
        accept = doc.find("accept")
        _fail_at(accept[0] if accept else None, str(exc))


# -- conversions -------------------------------------------------------------


def _reflectivity(value: float, convention: str) -> float:
    return math.sqrt(value) if convention == "intensity" else value


def _elements(doc: CircuitDocument) -> tuple:
    out = []
    for s in doc.statements:
        if s.keyword == "wp":
            out.append(Waveplate(s.args[0], s.args[1].value, s.args[2].value))
        elif s.keyword == "pd":
            out.append(PhaseDelay(s.args[0], s.args[1].value))
        elif s.keyword == "bs":
            r = _reflectivity(s.args[3].value, doc.eta_convention)
            out.append(Beamsplitter(s.args[0], s.args[1], r, s.option("thick"), s.args[2]))
        elif s.keyword == "pbs":
            out.append(PolarizingBeamsplitter(s.args[0], s.args[1]))
    return tuple(out)


def _detectors(doc: CircuitDocument) -> tuple[Detector, ...]:
    out = []
    for s in doc.find("detect"):
        pol = s.args[2] if len(s.args) == 3 else None
        expect = s.option("expect")
        out.append(Detector(s.args[0], s.args[1], pol, None if expect == "any" else int(expect)))
    return tuple(out)


def _acceptance(doc: CircuitDocument):
    accept = doc.find("accept")
    if not accept or accept[0].args[0] == "heralds":
        return None
    return tuple(accept[0].args[1:])


def to_circuit(doc: CircuitDocument) -> Circuit:
    return Circuit(
        rails=tuple(s.args[0] for s in doc.find("rail")),
        photons=tuple(tuple(s.args) for s in doc.find("photon")),
        elements=_elements(doc),
        detectors=_detectors(doc),
        coincidence=_acceptance(doc),
        pdc_sources=tuple(tuple(s.args[1:]) for s in doc.find("source")),
        qubits=doc.qubits,
        name=doc.name,
    )


def _contract_target(doc: CircuitDocument):
    found = doc.find("contract")
    if not found:
        return None, True
    s = found[0]
    target = s.args[1].value * CONTRACT_GATES[s.args[0]]
    return target, s.option("phase", "exact") == "global"


def to_blueprint(doc: CircuitDocument) -> GateBlueprint:
    if not doc.is_gate:
        raise ValueError("document has no 'qubits' declaration")
    control, target_rail = doc.qubits
    circuit = to_circuit(doc)
    for d in circuit.detectors:
        if d.rail in (control, target_rail):
            raise ValidationError(f"detector {d.name!r} reads a qubit rail; gates herald on ancillas")
        if d.expect is None:
            raise ValidationError(f"herald {d.name!r} needs an expected count")
    coincidence = _acceptance(doc)
    if coincidence is not None and set(coincidence) != {control, target_rail}:
        raise ValidationError("coincidence acceptance must name the two qubit rails")
    target, up_to_phase = _contract_target(doc)
    return GateBlueprint(
        name=doc.name,
        control=control,
        target_rail=target_rail,
        ancilla_rails=tuple(r for r in circuit.rails if r not in (control, target_rail)),
        elements=circuit.elements,
        ancilla_photons=circuit.photons,
        heralds=circuit.detectors,
        acceptance="coincidence" if coincidence else "heralds",
        target=target,
        up_to_phase=up_to_phase,
    )


def _element_statement(el) -> Statement:
    if isinstance(el, Waveplate):
        return Statement("wp", (el.rail, Number.of(el.alpha), Number.of(el.phi)))
    if isinstance(el, PhaseDelay):
        return Statement("pd", (el.rail, Number.of(el.theta)))
    if isinstance(el, Beamsplitter):
        return Statement(
            "bs", (el.rail_a, el.rail_b, el.pol, Number.of(el.r)), (("thick", el.thick_side),)
        )
    if isinstance(el, PolarizingBeamsplitter):
        return Statement("pbs", (el.rail_a, el.rail_b))
    raise TypeError(f"not an optical element: {el!r}")


def _detector_statement(d: Detector) -> Statement:
    args = (d.name, d.rail) + ((d.pol,) if d.pol else ())
    return Statement("detect", args, (("expect", "any" if d.expect is None else str(d.expect)),))


def _comment_lines(comments) -> list[Statement]:
    return [Statement("", comment=f" {c}" if c else "") for c in comments]


def document_from_circuit(circuit: Circuit, comments=()) -> CircuitDocument:
    st = _comment_lines(comments)
    if circuit.name:
        st.append(Statement("name", (circuit.name,)))
    if circuit.qubits:
        st.append(Statement("qubits", tuple(circuit.qubits)))
    st += [Statement("rail", (r,)) for r in circuit.rails]
    st += [Statement("photon", tuple(p)) for p in circuit.photons]
    st += [Statement("source", ("pdc",) + tuple(p)) for p in circuit.pdc_sources]
    st += [_element_statement(el) for el in circuit.elements]
    st += [_detector_statement(d) for d in circuit.detectors]
    if circuit.coincidence:
        st.append(Statement("accept", ("coincidence",) + tuple(circuit.coincidence)))
    else:
        st.append(Statement("accept", ("heralds",)))
    return CircuitDocument(tuple(st))


def _contract_statement(bp: GateBlueprint) -> Optional[Statement]:
    if bp.target is None:
        return None
    for gate, unit in CONTRACT_GATES.items():
        k = np.flatnonzero(np.abs(unit.ravel()) > 0)[0]
        scale = bp.target.ravel()[k]
        if abs(scale.imag) < 1e-15 and np.allclose(bp.target, scale.real * unit, atol=1e-15):
            options = (("phase", "global"),) if bp.up_to_phase else ()
            return Statement("contract", (gate, Number.of(scale.real)), options)
    raise ValueError(f"{bp.name}: target is not a multiple of CSIGN or CNOT")


def document_from_blueprint(bp: GateBlueprint, comments=()) -> CircuitDocument:
    st = _comment_lines(comments)
    st.append(Statement("name", (bp.name,)))
    st.append(Statement("qubits", (bp.control, bp.target_rail)))
    contract = _contract_statement(bp)
    if contract is not None:
        st.append(contract)
    st += [Statement("rail", (r,)) for r in bp.rails]
    st += [Statement("photon", tuple(p)) for p in bp.ancilla_photons]
    st += [_element_statement(el) for el in bp.elements]
    st += [_detector_statement(d) for d in bp.heralds]
    if bp.acceptance == "coincidence":
        st.append(Statement("accept", ("coincidence", bp.control, bp.target_rail)))
    else:
        st.append(Statement("accept", ("heralds",)))
    return CircuitDocument(tuple(st))


def load(path, *, eta_convention: str = "amplitude") -> CircuitDocument:
    with open(path, encoding="utf-8", newline=None) as fh:
        return parse(fh.read(), eta_convention=eta_convention)
