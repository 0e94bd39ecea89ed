"""The 17-column static complexity vector and its CSV form."""

from __future__ import annotations

import csv
import io
import math
import re
from dataclasses import dataclass

from .cfg import summarize_program
from .halstead import count_tokens, parse

# CSV column name, attribute name, python type
COLUMNS: tuple[tuple[str, str, type], ...] = (
    ("M", "cyclomatic", int),
    ("M_d", "cyclomatic_density", float),
    ("B", "bugs", float),
    ("D", "difficulty", float),
    ("E", "effort", float),
    ("c_l", "logical_lines", int),
    ("T", "time", float),
    ("eta", "vocabulary", int),
    ("V", "volume", float),
    ("eta1", "distinct_operators", int),
    ("n1", "total_operators", int),
    ("eta2", "distinct_operands", int),
    ("n2", "total_operands", int),
    ("params", "params", int),
    ("sloc", "sloc", int),
    ("physical", "physical", int),
    ("M_s", "maintainability", float),
)
FEATURE_NAMES: tuple[str, ...] = tuple(c[0] for c in COLUMNS)

_LINE_BREAK = re.compile(r"\r\n|[\n\r\u2028\u2029]")


@dataclass(frozen=True)
class FeatureVector:
    cyclomatic: int
    cyclomatic_density: float
    bugs: float
    difficulty: float
    effort: float
    logical_lines: int
    time: float
    vocabulary: int
    volume: float
    distinct_operators: int
    total_operators: int
    distinct_operands: int
    total_operands: int
    params: int
    sloc: int
    physical: int
    maintainability: float

    def as_row(self) -> list:
        return [getattr(self, attr) for _, attr, _ in COLUMNS]

    def as_dict(self) -> dict:
        return {name: getattr(self, attr) for name, attr, _ in COLUMNS}

    @classmethod
    def from_row(cls, values) -> "FeatureVector":
        if len(values) != len(COLUMNS):
            raise ValueError(f"expected {len(COLUMNS)} values, got {len(values)}")
        kwargs = {}
        for (name, attr, typ), raw in zip(COLUMNS, values):
            kwargs[attr] = _coerce(raw, typ)
        return cls(**kwargs)


def _coerce(raw, typ):
    if typ is int:
        if isinstance(raw, str):
            return int(raw)
        if float(raw) != int(raw):
            raise ValueError(f"non-integer count {raw!r}")
        return int(raw)
    return float(raw)


def _ln(x: float) -> float:
    return math.log(x) if x > 0 else 0.0


def halstead_measures(eta1: int, eta2: int, n1: int, n2: int) -> dict:
    vocabulary = eta1 + eta2
    length = n1 + n2
    volume = length * math.log2(vocabulary) if vocabulary > 0 else 0.0
    difficulty = (eta1 / 2) * (n2 / eta2) if eta2 > 0 else 0.0
    effort = difficulty * volume
    return {
        "vocabulary": vocabulary,
        "volume": volume,
        "difficulty": difficulty,
        "effort": effort,
        "time": effort / 18,
        "bugs": effort ** (2 / 3) / 3000,
    }


def maintainability(volume: float, cyclomatic: float, logical_lines: float) -> float:
    """Maintainability on a 0-100 scale; ``ln`` of a non-positive argument counts as 0."""
    raw = 171 - 5.2 * _ln(volume) - 0.23 * cyclomatic - 16.2 * _ln(logical_lines)
    return min(100.0, max(0.0, 100 * raw / 171))


def line_counts(source: str) -> tuple[int, int]:
    """Return ``(sloc, physical)``."""
    if not source:
        return 0, 0
    lines = _LINE_BREAK.split(source)
    if lines and lines[-1] == "":
        lines.pop()
    return sum(1 for line in lines if line.strip()), len(lines)


def compute_features(source: str) -> FeatureVector:
    program = parse(source)
    operators, operands = count_tokens(program.tokens)
    eta1, eta2 = len(operators), len(operands)
    n1, n2 = sum(operators.values()), sum(operands.values())
    h = halstead_measures(eta1, eta2, n1, n2)
    cfg = summarize_program(program)
    m = cfg.cyclomatic
    c_l = cfg.logical_lines
    sloc, physical = line_counts(source)
    return FeatureVector(
        cyclomatic=m,
        cyclomatic_density=100 * m / c_l if c_l > 0 else 0.0,
        bugs=h["bugs"],
        difficulty=h["difficulty"],
        effort=h["effort"],
        logical_lines=c_l,
        time=h["time"],
        vocabulary=h["vocabulary"],
        volume=h["volume"],
        distinct_operators=eta1,
        total_operators=n1,
        distinct_operands=eta2,
        total_operands=n2,
        params=cfg.params,
        sloc=sloc,
        physical=physical,
        maintainability=maintainability(h["volume"], m, c_l),
    )


# CSV

def _quote(label: str) -> str:
    if label == "" or any(ch in label for ch in ',"\r\n') or label != label.strip():
        return '"' + label.replace('"', '""') + '"'
    return label


def _fmt(value) -> str:
    return repr(value) if isinstance(value, float) else str(value)


def export_feature_matrix(vectors) -> str:
    """Render ``[(label, FeatureVector), ...]`` as CSV text (header + one row each)."""
    vectors = list(vectors)
    if not vectors:
        raise ValueError("export_feature_matrix needs at least one vector")
    out = [",".join(FEATURE_NAMES + ("label",))]
    for label, vec in vectors:
        if "\x00" in label:
            raise ValueError("labels may not contain NUL")
        out.append(",".join([_fmt(v) for v in vec.as_row()] + [_quote(label)]))
    return "\n".join(out) + "\n"


def read_feature_matrix(text: str) -> list[tuple[str, FeatureVector]]:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows:
        raise ValueError("empty feature matrix")
    header = rows[0]
    try:
        idx = [header.index(name) for name in FEATURE_NAMES]
    except ValueError as exc:
        raise ValueError(f"feature matrix header is missing a column: {exc}") from None
    label_idx = header.index("label") if "label" in header else None
    result = []
    for row in rows[1:]:
        if not row:
            continue
        vec = FeatureVector.from_row([row[i] for i in idx])
        result.append((row[label_idx] if label_idx is not None else "", vec))
    return result

