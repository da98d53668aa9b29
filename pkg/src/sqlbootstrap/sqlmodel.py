"""Normalized model of the SQL subset the toolkit generates and evaluates.

Supported shape: a SELECT list of columns and aggregates, FROM with optional
aliases, WHERE as boolean combinations of ``column op literal`` (AND binds
tighter than OR, parentheses allowed), optional GROUP BY and ORDER BY.
Parsing normalizes (keywords uppercased, identifiers lowercased, string
literals double-quoted, single spacing) and decomposes the query into the
five clause-component sets every matching metric is defined over.
"""

from __future__ import annotations

from dataclasses import dataclass

COMPONENTS = ("SELECT", "FROM", "WHERE", "GROUP_BY", "ORDER_BY")

_AGGREGATES = {"COUNT", "MIN", "MAX", "AVG", "SUM"}
_KEYWORDS = {"SELECT", "FROM", "WHERE", "GROUP", "ORDER", "BY", "AND", "OR", "AS",
             "LIKE", "ASC", "DESC"} | _AGGREGATES
_COMPARE_OPS = {"=", "<", ">", "<=", ">="}


class SqlParseError(Exception):
    """Raised for text outside the supported subset; evaluation treats it as a non-match."""


@dataclass(frozen=True)
class SqlQuery:
    raw: str
    tokens: tuple[str, ...]
    components: dict[str, frozenset[str]]

    @property
    def normalized(self) -> str:
        return " ".join(self.tokens)


def equal_exact(a: SqlQuery, b: SqlQuery) -> bool:
    """Whole-query equivalence: identical normalized token sequences."""
    return a.tokens == b.tokens


def equal_no_order(a: SqlQuery, b: SqlQuery) -> bool:
    """Order-insensitive equivalence: all five component sets equal as sets."""
    return all(a.components[c] == b.components[c] for c in COMPONENTS)


# --- lexer ---------------------------------------------------------------

def _lex(text: str) -> list[str]:
    tokens: list[str] = []
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
        elif ch in "'\"":
            end = text.find(ch, i + 1)
            if end < 0:
                raise SqlParseError(f"unbalanced quote starting at position {i}")
            tokens.append('"' + text[i + 1:end] + '"')
            i = end + 1
        elif text[i:i + 2] in ("<=", ">="):
            tokens.append(text[i:i + 2])
            i += 2
        elif ch in "=<>(),*":
            tokens.append(ch)
            i += 1
        elif ch == "$":
            j = i + 1
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            if j == i + 1:
                raise SqlParseError("dangling '$' placeholder")
            tokens.append(text[i:j].lower())
            i = j
        elif ch.isalnum() or ch in "_.":
            j = i
            while j < n and (text[j].isalnum() or text[j] in "_."):
                j += 1
            tokens.append(text[i:j])
            i = j
        else:
            raise SqlParseError(f"unsupported character {ch!r} at position {i}")
    return tokens


# --- boolean expression AST ----------------------------------------------

@dataclass(frozen=True)
class _Cmp:
    column: str
    op: str
    literal: str

    def render(self) -> list[str]:
        return [self.column, self.op, self.literal]


@dataclass(frozen=True)
class _Bool:
    op: str  # "AND" | "OR"
    children: tuple


def _render_expr(node, parenthesize_or: bool = False) -> list[str]:
    if isinstance(node, _Cmp):
        return node.render()
    out: list[str] = []
    for i, child in enumerate(node.children):
        if i:
            out.append(node.op)
        needs_parens = isinstance(child, _Bool) and node.op == "AND" and child.op == "OR"
        if needs_parens:
            out.extend(["("] + _render_expr(child) + [")"])
        else:
            out.extend(_render_expr(child))
    if parenthesize_or and node.op == "OR":
        return ["("] + out + [")"]
    return out


class _Parser:
    def __init__(self, text: str):
        self.raw = text
        self.tokens = _lex(text)
        self.pos = 0

    # token helpers

    def peek(self) -> str | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def peek_kw(self) -> str | None:
        tok = self.peek()
        return tok.upper() if tok is not None else None

    def advance(self) -> str:
        tok = self.peek()
        if tok is None:
            raise SqlParseError("unexpected end of query")
        self.pos += 1
        return tok

    def expect_kw(self, keyword: str) -> None:
        tok = self.peek()
        if tok is None or tok.upper() != keyword:
            raise SqlParseError(f"expected {keyword}, found {tok!r}")
        self.pos += 1

    # grammar

    def parse(self) -> SqlQuery:
        out: list[str] = []
        comps: dict[str, set[str]] = {c: set() for c in COMPONENTS}

        self.expect_kw("SELECT")
        out.append("SELECT")
        items = [self.select_item()]
        while self.peek() == ",":
            self.advance()
            items.append(self.select_item())
        for i, item in enumerate(items):
            if i:
                out.append(",")
            out.append(item)
            comps["SELECT"].add(item)

        self.expect_kw("FROM")
        out.append("FROM")
        sources = [self.from_item()]
        while self.peek() == ",":
            self.advance()
            sources.append(self.from_item())
        for i, source in enumerate(sources):
            if i:
                out.append(",")
            out.extend(source.split(" "))
            comps["FROM"].add(source)

        if self.peek_kw() == "WHERE":
            self.advance()
            out.append("WHERE")
            expr = self.or_expr()
            out.extend(_render_expr(expr))
            conjuncts = expr.children if isinstance(expr, _Bool) and expr.op == "AND" else [expr]
            for conjunct in conjuncts:
                comps["WHERE"].add(" ".join(_render_expr(conjunct, parenthesize_or=True)))

        if self.peek_kw() == "GROUP":
            self.advance()
            self.expect_kw("BY")
            out.extend(["GROUP", "BY"])
            cols = [self.column()]
            while self.peek() == ",":
                self.advance()
                cols.append(self.column())
            for i, col in enumerate(cols):
                if i:
                    out.append(",")
                out.append(col)
                comps["GROUP_BY"].add(col)

        if self.peek_kw() == "ORDER":
            self.advance()
            self.expect_kw("BY")
            out.extend(["ORDER", "BY"])
            keys = [self.order_key()]
            while self.peek() == ",":
                self.advance()
                keys.append(self.order_key())
            for i, key in enumerate(keys):
                if i:
                    out.append(",")
                out.extend(key.split(" "))
                comps["ORDER_BY"].add(key)

        if self.peek() is not None:
            raise SqlParseError(f"unsupported construct near {self.peek()!r}")
        return SqlQuery(
            raw=self.raw,
            tokens=tuple(out),
            components={c: frozenset(v) for c, v in comps.items()},
        )

    def order_key(self) -> str:
        col = self.column()
        if self.peek_kw() in ("ASC", "DESC"):
            return f"{col} {self.advance().upper()}"
        return col

    def select_item(self) -> str:
        tok = self.peek()
        if tok is None:
            raise SqlParseError("unexpected end of query in SELECT list")
        if tok.upper() in _AGGREGATES:
            fn = self.advance().upper()
            if self.peek() != "(":
                raise SqlParseError(f"expected '(' after aggregate {fn}")
            self.advance()
            arg = "*" if self.peek() == "*" else self.column()
            if arg == "*":
                self.advance()
            if self.peek() != ")":
                raise SqlParseError(f"unbalanced parenthesis in {fn}(...)")
            self.advance()
            return f"{fn}({arg})"
        return self.column()

    def from_item(self) -> str:
        table = self.identifier("table name")
        if self.peek_kw() == "AS":
            self.advance()
            alias = self.identifier("table alias")
            return f"{table} AS {alias}"
        return table

    def or_expr(self):
        children = [self.and_expr()]
        while self.peek_kw() == "OR":
            self.advance()
            children.append(self.and_expr())
        if len(children) == 1:
            return children[0]
        flat: list = []
        for child in children:
            flat.extend(child.children if isinstance(child, _Bool) and child.op == "OR" else [child])
        return _Bool("OR", tuple(flat))

    def and_expr(self):
        children = [self.bool_primary()]
        while self.peek_kw() == "AND":
            self.advance()
            children.append(self.bool_primary())
        if len(children) == 1:
            return children[0]
        flat: list = []
        for child in children:
            flat.extend(child.children if isinstance(child, _Bool) and child.op == "AND" else [child])
        return _Bool("AND", tuple(flat))

    def bool_primary(self):
        if self.peek() == "(":
            self.advance()
            expr = self.or_expr()
            if self.peek() != ")":
                raise SqlParseError("unbalanced parenthesis in WHERE clause")
            self.advance()
            return expr
        return self.comparison()

    def comparison(self) -> _Cmp:
        column = self.column()
        tok = self.peek()
        if tok in _COMPARE_OPS:
            op = self.advance()
        elif tok is not None and tok.upper() == "LIKE":
            self.advance()
            op = "LIKE"
        else:
            raise SqlParseError(f"expected a comparison operator, found {tok!r}")
        return _Cmp(column, op, self.literal())

    def literal(self) -> str:
        tok = self.peek()
        if tok is None:
            raise SqlParseError("unexpected end of query, expected a literal")
        if tok.startswith('"') or tok.startswith("$"):
            return self.advance()
        if tok[0].isdigit():
            return self.advance()
        raise SqlParseError(f"unsupported construct near {tok!r}")

    def column(self) -> str:
        return self.identifier("column")

    def identifier(self, what: str) -> str:
        tok = self.peek()
        if tok is None:
            raise SqlParseError(f"unexpected end of query, expected a {what}")
        if tok.upper() in _KEYWORDS or not (tok[0].isalpha() or tok[0] == "_"):
            raise SqlParseError(f"unsupported construct near {tok!r}")
        self.pos += 1
        return tok.lower()


def parse_sql(text: str) -> SqlQuery:
    """Parse and normalize; raises SqlParseError outside the supported subset."""
    if not text or not text.strip():
        raise SqlParseError("empty query")
    return _Parser(text).parse()
