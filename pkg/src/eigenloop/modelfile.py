"""Text format for user-defined polynomial matrix Hamiltonians.

Example::

    name two-level
    dim 2; params 2
    H[1][1] = Q1
    H[1][2] = Q2          # off-diagonal
    H[2][2] = -1.0*Q1

Statements are separated by ``;`` or newlines and ``#`` comments run to the
end of the line.  Indices are 1-based.  Entries left out are zero.  A
lower-triangle entry ``H[j][i]`` (``j > i``) is only accepted as a restatement
of ``H[i][j]``; a conflicting pair raises :class:`AsymmetryError`.
"""

import re

from .errors import AsymmetryError, DimensionMismatch, ModelParseError
from .models import HamiltonianModel
from .polynomial import Polynomial

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<comment>\#[^\n]*)
  | (?P<sep>[;\n])
  | (?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<var>Q(?P<varidx>\d+)(?![A-Za-z0-9_]))
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*(?:-[A-Za-z0-9_]+)*)
  | (?P<op>[\[\]=+\-*^])
    """,
    re.VERBOSE,
)


class _Token:
    __slots__ = ("kind", "text", "line", "col")

    def __init__(self, kind, text, line, col):
        self.kind = kind
        self.text = text
        self.line = line
        self.col = col

    def __repr__(self):
        return f"<{self.kind} {self.text!r} @{self.line}:{self.col}>"


def _tokenize(src):
    tokens = []
    pos = 0
    line, line_start = 1, 0
    while pos < len(src):
        m = _TOKEN_RE.match(src, pos)
        if m is None:
            raise ModelParseError(f"unexpected character {src[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        if kind == "varidx":
            kind = "var"
        col = pos - line_start + 1
        if kind == "sep":
            tokens.append(_Token("sep", m.group(), line, col))
            if m.group() == "\n":
                line += 1
                line_start = m.end()
        elif kind not in ("ws", "comment"):
            tokens.append(_Token(kind, m.group(), line, col))
        pos = m.end()
    tokens.append(_Token("eof", "", line, pos - line_start + 1))
    return tokens


class _Parser:
    def __init__(self, src):
        self.toks = _tokenize(src)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def next(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, kind, text=None):
        tok = self.next()
        if tok.kind != kind or (text is not None and tok.text != text):
            want = repr(text) if text is not None else kind
            got = repr(tok.text) if tok.text else tok.kind
            raise ModelParseError(f"expected {want}, got {got}", tok.line, tok.col)
        return tok

    def integer(self):
        tok = self.expect("number")
        if not tok.text.isdigit():
            raise ModelParseError(f"expected an integer, got {tok.text!r}", tok.line, tok.col)
        return int(tok.text), tok

    def end_of_statement(self):
        tok = self.peek()
        if tok.kind not in ("sep", "eof"):
            raise ModelParseError(f"unexpected {tok.text!r} after statement", tok.line, tok.col)

    def statements(self):
        while True:
            tok = self.peek()
            if tok.kind == "eof":
                return
            if tok.kind == "sep":
                self.next()
                continue
            yield self.statement()
            self.end_of_statement()

    def statement(self):
        tok = self.expect("ident")
        if tok.text in ("dim", "params"):
            value, vtok = self.integer()
            return (tok.text, value, vtok)
        if tok.text == "name":
            return ("name", self.expect("ident").text, tok)
        if tok.text == "H":
            self.expect("op", "[")
            i, _ = self.integer()
            self.expect("op", "]")
            self.expect("op", "[")
            j, _ = self.integer()
            self.expect("op", "]")
            self.expect("op", "=")
            return ("entry", (i, j, self.polynomial()), tok)
        raise ModelParseError(f"unknown statement {tok.text!r}", tok.line, tok.col)

    def polynomial(self):
        """List of terms ``(coeff, [(var_index, exponent, token), ...])``."""
        terms = []
        sign = 1.0
        tok = self.peek()
        if tok.kind == "op" and tok.text in "+-":
            self.next()
            sign = -1.0 if tok.text == "-" else 1.0
        terms.append(self.term(sign))
        while True:
            tok = self.peek()
            if tok.kind == "op" and tok.text in "+-":
                self.next()
                terms.append(self.term(-1.0 if tok.text == "-" else 1.0))
            else:
                return terms

    def term(self, coeff):
        factors = []
        coeff *= self.factor(factors)
        while self.peek().kind == "op" and self.peek().text == "*":
            self.next()
            coeff *= self.factor(factors)
        return coeff, factors

    def factor(self, factors):
        tok = self.next()
        if tok.kind == "number":
            return float(tok.text)
        if tok.kind == "var":
            idx = int(tok.text[1:])
            if idx < 1:
                raise ModelParseError("parameters are numbered from Q1", tok.line, tok.col)
            exp = 1
            if self.peek().kind == "op" and self.peek().text == "^":
                self.next()
                exp, _ = self.integer()
            factors.append((idx, exp, tok))
            return 1.0
        got = repr(tok.text) if tok.text else tok.kind
        raise ModelParseError(f"expected a number or Q<k>, got {got}", tok.line, tok.col)


def parse_model(src: str) -> HamiltonianModel:
    """Parse model-definition text into a :class:`HamiltonianModel`."""
    p = _Parser(src)
    name, dim, params = "model", None, None
    raw_entries = []
    for kind, value, tok in p.statements():
        if kind == "name":
            name = value
        elif kind == "dim":
            if value < 1:
                raise ModelParseError("dim must be positive", tok.line, tok.col)
            dim = value
        elif kind == "params":
            if value < 1:
                raise ModelParseError("params must be positive", tok.line, tok.col)
            params = value
        else:
            raw_entries.append((value, tok))

    max_index = max((max(i, j) for (i, j, _), _ in raw_entries), default=0)
    max_var = max(
        (idx for (_, _, terms), _ in raw_entries for _, factors in terms for idx, _, _ in factors),
        default=0,
    )
    if dim is None:
        if not raw_entries:
            raise ModelParseError("empty model needs a 'dim' header", 1, 1)
        dim = max_index
    if params is None:
        params = max(max_var, 1)

    upper = {}
    lower = {}
    for (i, j, terms), tok in raw_entries:
        if not (1 <= i <= dim and 1 <= j <= dim):
            raise DimensionMismatch(f"entry H[{i}][{j}] outside a {dim}x{dim} matrix", tok.line, tok.col)
        table = {}
        for coeff, factors in terms:
            exps = [0] * params
            for k, e, vtok in factors:
                if k > params:
                    raise DimensionMismatch(f"Q{k} exceeds params {params}", vtok.line, vtok.col)
                exps[k - 1] += e
            table[tuple(exps)] = table.get(tuple(exps), 0.0) + coeff
        poly = Polynomial(params, table)
        key = (min(i, j) - 1, max(i, j) - 1)
        target = upper if i <= j else lower
        if key in target:
            raise ModelParseError(f"duplicate entry H[{i}][{j}]", tok.line, tok.col)
        target[key] = (poly, tok)

    entries = {k: v[0] for k, v in upper.items()}
    for key, (poly, tok) in lower.items():
        if key in entries and entries[key] != poly:
            i, j = key
            raise AsymmetryError(
                f"H[{j + 1}][{i + 1}] contradicts H[{i + 1}][{j + 1}]", tok.line, tok.col
            )
        entries.setdefault(key, poly)
    entries = {k: v for k, v in entries.items() if not v.is_zero()}
    return HamiltonianModel(name=name, n=dim, d=params, entries=entries)


def format_model(model: HamiltonianModel) -> str:
    """Canonical text for ``model``; ``parse_model`` inverts it exactly."""
    lines = []
    if re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*(?:-[A-Za-z0-9_]+)*", model.name or ""):
        lines.append(f"name {model.name}")
    lines.append(f"dim {model.n}")
    lines.append(f"params {model.d}")
    for (i, j), poly in sorted(model.entries.items()):
        if not poly.is_zero():
            lines.append(f"H[{i + 1}][{j + 1}] = {poly.format()}")
    return "\n".join(lines) + "\n"


def load_model(path) -> HamiltonianModel:
    with open(path, encoding="utf-8") as fh:
        return parse_model(fh.read())
