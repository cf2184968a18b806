"""The shipped ``.lqc`` example files, regenerated from the gate and circuit builders.

``python -m loqc_grover.corpus`` rewrites ``circuits/`` in place; the test
suite checks the files on disk still match.
"""

from __future__ import annotations

import dataclasses
import math
import sys
from importlib import resources
from pathlib import Path

from . import dsl
from .circuit import Circuit, Detector
from .elements import Beamsplitter
from .gates import (
    build_coincidence_cnot,
    build_coincidence_csign,
    build_scalable_cnot,
    build_scalable_csign,
)
from .grover import build_optical_grover

# Readable spellings for the constants that appear as reflectivities.
_NAMED = (
    "1/3",
    "sqrt(1/3)",
    "sqrt(1/2)",
    "5-3*sqrt(2)",
    "(3-sqrt(2))/7",
    "sqrt(5-3*sqrt(2))",
    "sqrt((3-sqrt(2))/7)",
)
_BY_VALUE = {dsl.evaluate(text): text for text in _NAMED}
_BY_VALUE.update({-value: f"-({text})" for value, text in list(_BY_VALUE.items())})


def _pretty(doc: dsl.CircuitDocument) -> dsl.CircuitDocument:
    def fix(arg):
        if isinstance(arg, dsl.Number) and arg.value in _BY_VALUE:
            return dsl.Number(_BY_VALUE[arg.value], arg.value)
        return arg

    statements = []
    for s in doc.statements:
        if s.keyword in ("bs", "contract"):
            s = dataclasses.replace(s, args=tuple(fix(a) for a in s.args))
        statements.append(s)
    return dataclasses.replace(doc, statements=tuple(statements))


def _hom() -> Circuit:
    return Circuit(
        rails=("a", "b"),
        photons=(("a", "H"), ("b", "H")),
        elements=(Beamsplitter("a", "b", math.sqrt(0.5), "B", "H"),),
        detectors=(Detector("d_a", "a", None, None), Detector("d_b", "b", None, None)),
        name="hong-ou-mandel",
    )


def _gate(builder, comment):
    return lambda: _pretty(dsl.document_from_blueprint(builder(), comments=comment))


def _grover(variant, marked, comment):
    return lambda: _pretty(
        dsl.document_from_circuit(build_optical_grover(variant, marked), comments=comment)
    )


SHIPPED = {
    "hong_ou_mandel.lqc": lambda: _pretty(
        dsl.document_from_circuit(
            _hom(), comments=["Two H photons on a 50:50 beamsplitter: they always leave together."]
        )
    ),
    "coincidence_csign.lqc": _gate(
        build_coincidence_csign,
        ["Coincidence-basis CSIGN: three 1/3 beamsplitters, works 1 time in 9."],
    ),
    "coincidence_cnot.lqc": _gate(
        build_coincidence_cnot, ["Coincidence-basis CNOT: R on the target around the CSIGN."]
    ),
    "scalable_csign.lqc": _gate(
        build_scalable_csign,
        ["Heralded CSIGN with two V ancillas; heralds read 0, 1, 1.", "Success (11-6*sqrt(2))/49."],
    ),
    "scalable_cnot.lqc": _gate(build_scalable_cnot, ["Heralded CNOT."]),
    "grover_full_10.lqc": _grover(
        "full", "10", ["Four-element Grover search, marked item 10, heralded oracle."]
    ),
    "grover_bell_10.lqc": _grover(
        "bell", "10", ["Grover search from an entangled pair, marked item 10."]
    ),
    "grover_two_scalable_10.lqc": _grover(
        "two_scalable", "10", ["Grover search with two heralded gates, marked item 10."]
    ),
}


def shipped_directory():
    return resources.files("loqc_grover") / "circuits"


def shipped_text(name: str) -> str:
    return (shipped_directory() / name).read_text(encoding="utf-8")


def expected_text(name: str) -> str:
    return dsl.serialize(SHIPPED[name]())


def regenerate(directory) -> list[Path]:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    for name in SHIPPED:
        path = directory / name
        path.write_text(expected_text(name), encoding="utf-8")
        written.append(path)
    return written


if __name__ == "__main__":
    target = sys.argv[1] if len(sys.argv) > 1 else str(shipped_directory())
    for path in regenerate(target):
        print(path)
