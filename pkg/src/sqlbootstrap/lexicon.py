"""Domain vocabulary: typed variables, their surface values, and abstract placeholders.

The lexicon file is line oriented:

    var victim : va.victim
        "oil tanker"
        "container ship"
    abstract loc

``var`` opens a concrete variable bound to a column path, followed by one
quoted value per indented line. ``abstract`` declares a placeholder variable
whose surface form is the $-prefixed name ($loc) in both utterances and SQL.
The schema manifest is a second file of ``table <name> as <alias>`` and
``col <alias>.<column>`` lines (plus optional ``rel <e1> <name> <e2>`` triples).
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path


class LexiconError(Exception):
    """Invalid lexicon or schema content; carries the offending line/column."""

    def __init__(self, message: str, line: int = 0, column: int = 0):
        self.line = line
        self.column = column
        where = f" (line {line}, column {column})" if line else ""
        super().__init__(message + where)


_NAME_RE = re.compile(r"^[a-z][a-z0-9_]*$")
_VAR_RE = re.compile(r"^var\s+(\S+)\s*:\s*(\S+)\s*$")
_ABSTRACT_RE = re.compile(r"^abstract\s+(\S+)\s*$")
_VALUE_RE = re.compile(r'^"([^"]+)"\s*$')


@dataclass(frozen=True)
class VariableDef:
    name: str
    kind: str  # "concrete" | "abstract"
    values: tuple[str, ...] = ()
    sql_binding: str | None = None

    @property
    def is_abstract(self) -> bool:
        return self.kind == "abstract"

    @property
    def surface_token(self) -> str:
        """The $-prefixed token abstract variables keep through every stage."""
        return "$" + self.name


@dataclass(frozen=True)
class Lexicon:
    variables: dict[str, VariableDef]

    def __getitem__(self, name: str) -> VariableDef:
        return self.variables[name]

    def __contains__(self, name: str) -> bool:
        return name in self.variables

    def concrete(self) -> list[VariableDef]:
        return [v for v in self.variables.values() if not v.is_abstract]

    def abstract(self) -> list[VariableDef]:
        return [v for v in self.variables.values() if v.is_abstract]

    def validate_bindings(self, schema: "SchemaManifest") -> None:
        """Every concrete variable's column path must resolve in the schema."""
        for var in self.concrete():
            if var.sql_binding and not schema.has_column(var.sql_binding):
                raise LexiconError(
                    f"variable '{var.name}' is bound to undeclared column "
                    f"'{var.sql_binding}'"
                )


def parse_lexicon(text: str, source: str = "<string>") -> Lexicon:
    variables: dict[str, VariableDef] = {}
    current: str | None = None  # name of the open concrete variable
    pending_values: list[str] = []

    def close_current():
        nonlocal current
        if current is None:
            return
        if not pending_values:
            raise LexiconError(
                f"concrete variable '{current}' declares no values", line=open_line
            )
        variables[current] = VariableDef(
            name=current,
            kind="concrete",
            values=tuple(pending_values),
            sql_binding=open_binding,
        )
        pending_values.clear()
        current = None

    open_line = 0
    open_binding: str | None = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        indented = line[0] in " \t"
        stripped = line.strip()
        if indented:
            m = _VALUE_RE.match(stripped)
            if not m:
                raise LexiconError(
                    f"expected a quoted value, got {stripped!r}",
                    line=lineno,
                    column=len(line) - len(stripped) + 1,
                )
            if current is None:
                raise LexiconError(
                    "value line outside a 'var' block"
                    + (" (abstract variables carry no values)" if variables else ""),
                    line=lineno,
                    column=1,
                )
            pending_values.append(m.group(1).lower())
            continue
        close_current()
        if m := _VAR_RE.match(stripped):
            name, binding = m.group(1), m.group(2)
            _check_name(name, lineno)
            if name in variables:
                raise LexiconError(f"duplicate variable name '{name}'", line=lineno)
            current, open_line, open_binding = name, lineno, binding
        elif m := _ABSTRACT_RE.match(stripped):
            name = m.group(1).lstrip("$")
            _check_name(name, lineno)
            if name in variables or name == current:
                raise LexiconError(f"duplicate variable name '{name}'", line=lineno)
            variables[name] = VariableDef(name=name, kind="abstract")
        else:
            raise LexiconError(
                f"unrecognized lexicon line: {stripped!r}", line=lineno, column=1
            )
    close_current()
    if not variables:
        raise LexiconError("lexicon must declare at least one variable")
    return Lexicon(variables=variables)


def _check_name(name: str, lineno: int) -> None:
    if not _NAME_RE.match(name):
        raise LexiconError(
            f"variable name {name!r} must be a lowercase identifier", line=lineno
        )


def load_lexicon(path: str | Path) -> Lexicon:
    path = Path(path)
    return parse_lexicon(path.read_text(encoding="utf-8"), source=str(path))


def serialize_lexicon(lexicon: Lexicon) -> str:
    """Round-trippable text form: parse_lexicon(serialize_lexicon(lx)) == lx."""
    lines: list[str] = []
    for var in lexicon.variables.values():
        if var.is_abstract:
            lines.append(f"abstract {var.name}")
        else:
            lines.append(f"var {var.name} : {var.sql_binding}")
            lines.extend(f'    "{value}"' for value in var.values)
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class SchemaManifest:
    tables: tuple[tuple[str, str, tuple[str, ...]], ...]  # (name, alias, columns)
    relationships: tuple[tuple[str, str, str], ...] = field(default=())

    def has_column(self, column_path: str) -> bool:
        alias, _, column = column_path.partition(".")
        for _, table_alias, columns in self.tables:
            if table_alias == alias and column in columns:
                return True
        return False

    def aliases(self) -> set[str]:
        return {alias for _, alias, _ in self.tables}


_TABLE_RE = re.compile(r"^table\s+(\S+)\s+as\s+(\S+)\s*$")
_COL_RE = re.compile(r"^col\s+(\S+)\.(\S+)\s*$")
_REL_RE = re.compile(r"^rel\s+(\S+)\s+(\S+)\s+(\S+)\s*$")


def parse_schema(text: str) -> SchemaManifest:
    tables: dict[str, tuple[str, list[str]]] = {}  # alias -> (table, columns)
    relationships: list[tuple[str, str, str]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if m := _TABLE_RE.match(line):
            name, alias = m.group(1), m.group(2)
            if alias in tables:
                raise LexiconError(f"duplicate table alias '{alias}'", line=lineno)
            tables[alias] = (name, [])
        elif m := _COL_RE.match(line):
            alias, column = m.group(1), m.group(2)
            if alias not in tables:
                raise LexiconError(
                    f"column declared for unknown alias '{alias}'", line=lineno
                )
            tables[alias][1].append(column)
        elif m := _REL_RE.match(line):
            relationships.append((m.group(1), m.group(2), m.group(3)))
        else:
            raise LexiconError(f"unrecognized schema line: {line!r}", line=lineno)
    return SchemaManifest(
        tables=tuple(
            (name, alias, tuple(columns)) for alias, (name, columns) in tables.items()
        ),
        relationships=tuple(relationships),
    )


def load_schema(path: str | Path) -> SchemaManifest:
    return parse_schema(Path(path).read_text(encoding="utf-8"))
