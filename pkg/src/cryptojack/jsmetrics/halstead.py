"""Operator/operand accounting for Halstead measures.

Token classification table
--------------------------

Every lexical token produced by the tokenizer falls in exactly one row:

==============================  ===========  ======================================
token                           role         notes
==============================  ===========  ======================================
``(`` ``[`` ``{``               operator     counted once per pair as ``()``, ``[]``,
                                             ``{}``; the closing token is ignored
``)`` ``]`` ``}``               ignored      closes a pair already counted
``;``                           ignored      statement terminator
other punctuators               operator     ``=`` ``+`` ``.`` ``,`` ``?`` ``:``
                                             ``=>`` ``&&`` ``++`` ...
keywords except ``this``        operator     ``var`` ``if`` ``return`` ``typeof``
                                             ``new`` ``function`` ...
``this``                        operand
identifiers                     operand      includes property names after ``.``
numeric/string/regex literals   operand      distinguished by their source text
``true`` ``false`` ``null``     operand
template chunks                 operand
==============================  ===========  ======================================

Distinctness is decided on the token text, so ``"a"`` and ``'a'`` are two
operands.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

import esprima

from ..errors import ParseError

_PAIRS = {"(": "()", "[": "[]", "{": "{}"}
_IGNORED = {")", "]", "}", ";"}
_OPERAND_TYPES = {
    "Identifier",
    "Numeric",
    "String",
    "Boolean",
    "Null",
    "RegularExpression",
    "Template",
}


@dataclass(frozen=True)
class TokenAccounting:
    distinct_operators: int
    distinct_operands: int
    total_operators: int
    total_operands: int

    @property
    def vocabulary(self) -> int:
        return self.distinct_operators + self.distinct_operands

    @property
    def length(self) -> int:
        return self.total_operators + self.total_operands


def classify_token(kind: str, text: str) -> tuple[str, str] | None:
    """Return ``("operator"|"operand", symbol)`` or ``None`` for ignored tokens."""
    if kind == "Punctuator":
        if text in _IGNORED:
            return None
        return "operator", _PAIRS.get(text, text)
    if kind == "Keyword":
        if text == "this":
            return "operand", text
        return "operator", text
    if kind in _OPERAND_TYPES:
        return "operand", text
    raise ParseError(f"unclassified token type {kind!r}")


def parse(source: str):
    """Parse a script, returning the esprima ``Program`` with ``.tokens`` attached."""
    try:
        return esprima.parseScript(source, {"tokens": True})
    except esprima.Error as exc:
        raise ParseError(exc.message, exc.lineNumber, exc.column) from None
    except RecursionError:
        raise ParseError("nesting too deep") from None


def count_tokens(tokens) -> tuple[Counter, Counter]:
    operators: Counter = Counter()
    operands: Counter = Counter()
    for tok in tokens:
        role = classify_token(tok.type, tok.value)
        if role is None:
            continue
        (operators if role[0] == "operator" else operands)[role[1]] += 1
    return operators, operands


def tokenize_and_count(source: str) -> TokenAccounting:
    operators, operands = count_tokens(parse(source).tokens)
    return TokenAccounting(
        distinct_operators=len(operators),
        distinct_operands=len(operands),
        total_operators=sum(operators.values()),
        total_operands=sum(operands.values()),
    )
