"""Synchronous grammar DSL and exhaustive expansion into (utterance, SQL) pairs.

One rule per line::

    Q -> "how many" $victim "have been" $incident "in" $loc "?" ||| SELECT COUNT(*) FROM incidents AS va WHERE va.victim = {victim} AND va.incident_type = {incident} AND va.location = $loc

Utterance side: quoted phrases are literal words, ``$name`` is a variable
slot (concrete or abstract, per the lexicon), uppercase bare tokens are
nonterminal refs. SQL side: ``{name}`` is a concrete slot (expanded values
are double-quoted), ``$name`` an abstract slot, uppercase non-keyword bare
tokens are nonterminal refs, everything else is a literal SQL token.

Grammars must be acyclic so exhaustive expansion terminates; the expansion
stream is deterministic (lexicographic by rule trace, then binding order).
"""

from __future__ import annotations

import hashlib
import re
import shlex
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator

from .lexicon import Lexicon

_NONTERMINAL_RE = re.compile(r"^[A-Z][A-Z0-9_]*$")
_SQL_KEYWORDS = {"SELECT", "FROM", "WHERE", "GROUP", "ORDER", "BY", "AND", "OR",
                 "AS", "LIKE", "ASC", "DESC", "COUNT", "MIN", "MAX", "AVG", "SUM"}
_SQL_TOKEN_RE = re.compile(r'"[^"]*"|\S+')


class GrammarError(Exception):
    """Malformed grammar text or a violated grammar invariant."""

    def __init__(self, message: str, line: int = 0):
        self.line = line
        super().__init__(message + (f" (line {line})" if line else ""))


@dataclass(frozen=True)
class Lit:
    text: str


@dataclass(frozen=True)
class Slot:
    var: str


@dataclass(frozen=True)
class Ref:
    name: str


Token = Lit | Slot | Ref


@dataclass(frozen=True)
class SynchronousRule:
    lhs: str
    utterance_pattern: tuple[Token, ...]
    sql_pattern: tuple[Token, ...]
    rule_id: str

    def slot_names(self) -> list[str]:
        return [t.var for t in self.utterance_pattern if isinstance(t, Slot)]

    def ref_names(self) -> list[str]:
        return [t.name for t in self.utterance_pattern if isinstance(t, Ref)]


@dataclass(frozen=True)
class Grammar:
    rules: tuple[SynchronousRule, ...]
    start: str

    def rules_for(self, nonterminal: str) -> list[SynchronousRule]:
        return [r for r in self.rules if r.lhs == nonterminal]


@dataclass(frozen=True)
class CanonicalPair:
    """One synthesized example: the utterance, its SQL, and its template identity."""

    utterance: str
    sql: str
    template_id: str          # fully abstracted utterance template
    sql_template: str
    bindings: dict[str, str]  # variable -> value, or "$name" for abstract
    rule_trace: tuple[str, ...]

    @property
    def pair_id(self) -> str:
        digest = hashlib.sha256(
            (self.utterance + "\x1f" + self.sql).encode("utf-8")
        ).hexdigest()
        return digest[:12]

    @property
    def abstract_vars(self) -> tuple[str, ...]:
        return tuple(v for v, val in self.bindings.items() if val == "$" + v)

    def to_dict(self) -> dict:
        return {
            "pair_id": self.pair_id,
            "utterance": self.utterance,
            "sql": self.sql,
            "template_id": self.template_id,
            "sql_template": self.sql_template,
            "bindings": dict(self.bindings),
            "rule_trace": list(self.rule_trace),
        }

    @classmethod
    def from_dict(cls, record: dict) -> "CanonicalPair":
        return cls(
            utterance=record["utterance"],
            sql=record["sql"],
            template_id=record["template_id"],
            sql_template=record["sql_template"],
            bindings=dict(record["bindings"]),
            rule_trace=tuple(record["rule_trace"]),
        )


def abstract_template(pair: CanonicalPair) -> str:
    """The pair's utterance with every bound concrete value replaced by {varname}.

    Stored at expansion time as the exact inverse of binding substitution, so
    the operation is idempotent and constant per rule trace.
    """
    return pair.template_id


# --- DSL parsing -----------------------------------------------------------

def parse_grammar(text: str, lexicon: Lexicon, source: str = "<string>") -> Grammar:
    rules: list[SynchronousRule] = []
    raw_rules: list[tuple[int, str, str, str]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "->" not in line:
            raise GrammarError(f"expected 'LHS -> ...' in {line!r}", line=lineno)
        lhs, _, rest = line.partition("->")
        lhs = lhs.strip()
        if not _NONTERMINAL_RE.match(lhs):
            raise GrammarError(f"rule LHS {lhs!r} must be an uppercase nonterminal", line=lineno)
        if "|||" not in rest:
            raise GrammarError("missing '|||' separating utterance and SQL sides", line=lineno)
        utt_side, _, sql_side = rest.partition("|||")
        raw_rules.append((lineno, lhs, utt_side.strip(), sql_side.strip()))

    width = max(3, len(str(len(raw_rules))))
    for index, (lineno, lhs, utt_side, sql_side) in enumerate(raw_rules):
        rule_id = f"r{index:0{width}d}"
        utterance_pattern = _parse_utterance_side(utt_side, lexicon, lineno)
        sql_pattern = _parse_sql_side(sql_side, lexicon, lineno)
        _check_synchronicity(rule_id, utterance_pattern, sql_pattern, lineno)
        rules.append(SynchronousRule(lhs, utterance_pattern, sql_pattern, rule_id))

    if not rules:
        raise GrammarError("grammar declares no rules")
    grammar = Grammar(rules=tuple(rules), start=rules[0].lhs)
    _validate_nonterminals(grammar)
    _check_acyclic(grammar)
    return grammar


def load_grammar(path: str | Path, lexicon: Lexicon) -> Grammar:
    path = Path(path)
    return parse_grammar(path.read_text(encoding="utf-8"), lexicon, source=str(path))


def _parse_utterance_side(side: str, lexicon: Lexicon, lineno: int) -> tuple[Token, ...]:
    tokens: list[Token] = []
    try:
        pieces = shlex.split(side, posix=False)
    except ValueError as exc:
        raise GrammarError(f"unbalanced quote on utterance side: {exc}", line=lineno)
    for piece in pieces:
        if piece.startswith('"') and piece.endswith('"') and len(piece) >= 2:
            tokens.extend(Lit(word) for word in piece[1:-1].lower().split())
        elif piece.startswith("$"):
            name = piece[1:].lower()
            if name not in lexicon:
                raise GrammarError(f"unknown variable '{name}'", line=lineno)
            tokens.append(Slot(name))
        elif piece.startswith("{"):
            raise GrammarError(
                f"utterance-side slots are written $name, got {piece!r}", line=lineno
            )
        elif _NONTERMINAL_RE.match(piece):
            tokens.append(Ref(piece))
        else:
            raise GrammarError(
                f"unquoted utterance literal {piece!r} (wrap words in double quotes)",
                line=lineno,
            )
    return tuple(tokens)


def _parse_sql_side(side: str, lexicon: Lexicon, lineno: int) -> tuple[Token, ...]:
    tokens: list[Token] = []
    for piece in _SQL_TOKEN_RE.findall(side):
        if piece.startswith("{") and piece.endswith("}"):
            name = piece[1:-1].lower()
            if name not in lexicon:
                raise GrammarError(f"unknown variable '{name}'", line=lineno)
            if lexicon[name].is_abstract:
                raise GrammarError(
                    f"abstract variable '{name}' is written ${name} on the SQL side",
                    line=lineno,
                )
            tokens.append(Slot(name))
        elif piece.startswith("$"):
            name = piece[1:].lower()
            if name not in lexicon:
                raise GrammarError(f"unknown variable '{name}'", line=lineno)
            if not lexicon[name].is_abstract:
                raise GrammarError(
                    f"concrete variable '{name}' is written {{{name}}} on the SQL side",
                    line=lineno,
                )
            tokens.append(Slot(name))
        elif _NONTERMINAL_RE.match(piece) and piece not in _SQL_KEYWORDS:
            tokens.append(Ref(piece))
        else:
            tokens.append(Lit(piece))
    return tuple(tokens)


def _side_multisets(pattern: tuple[Token, ...]) -> tuple[dict[str, int], dict[str, int]]:
    slots: dict[str, int] = {}
    refs: dict[str, int] = {}
    for token in pattern:
        if isinstance(token, Slot):
            slots[token.var] = slots.get(token.var, 0) + 1
        elif isinstance(token, Ref):
            refs[token.name] = refs.get(token.name, 0) + 1
    return slots, refs


def _check_synchronicity(rule_id, utterance_pattern, sql_pattern, lineno) -> None:
    u_slots, u_refs = _side_multisets(utterance_pattern)
    s_slots, s_refs = _side_multisets(sql_pattern)
    for side, slots in (("utterance", u_slots), ("SQL", s_slots)):
        repeated = [v for v, n in slots.items() if n > 1]
        if repeated:
            raise GrammarError(
                f"variable '{repeated[0]}' appears more than once on the {side} side "
                "(use distinct variable names bound to the same column)",
                line=lineno,
            )
    if u_slots != s_slots or u_refs != s_refs:
        raise GrammarError(
            "asymmetric slot multisets: utterance side has "
            f"slots {sorted(u_slots)} and refs {sorted(u_refs)}, SQL side has "
            f"slots {sorted(s_slots)} and refs {sorted(s_refs)}",
            line=lineno,
        )


def _validate_nonterminals(grammar: Grammar) -> None:
    defined = {rule.lhs for rule in grammar.rules}
    for rule in grammar.rules:
        for name in rule.ref_names():
            if name not in defined:
                raise GrammarError(
                    f"unknown nonterminal '{name}' referenced by rule {rule.rule_id}"
                )


def _check_acyclic(grammar: Grammar) -> None:
    graph: dict[str, set[str]] = {}
    for rule in grammar.rules:
        graph.setdefault(rule.lhs, set()).update(rule.ref_names())

    WHITE, GRAY, BLACK = 0, 1, 2
    color = {name: WHITE for name in graph}
    stack: list[str] = []

    def visit(node: str) -> None:
        color[node] = GRAY
        stack.append(node)
        for succ in sorted(graph.get(node, ())):
            if color.get(succ, BLACK) == GRAY:
                cycle = stack[stack.index(succ):] + [succ]
                raise GrammarError("cycle detected: " + " -> ".join(cycle))
            if color.get(succ) == WHITE:
                visit(succ)
        stack.pop()
        color[node] = BLACK

    for name in graph:
        if color[name] == WHITE:
            visit(name)


# --- expansion -------------------------------------------------------------

@dataclass(frozen=True)
class _Skeleton:
    """A fully chosen derivation with slots still unbound."""

    u_tokens: tuple[Token, ...]   # Lit / Slot only
    s_tokens: tuple[Token, ...]
    trace: tuple[str, ...]

    def variables(self) -> list[str]:
        seen: list[str] = []
        for token in self.u_tokens + self.s_tokens:
            if isinstance(token, Slot) and token.var not in seen:
                seen.append(token.var)
        return seen


class _Expander:
    def __init__(self, grammar: Grammar, lexicon: Lexicon):
        self.grammar = grammar
        self.lexicon = lexicon
        self._skeletons: dict[str, list[_Skeleton]] = {}

    def skeletons(self, symbol: str) -> list[_Skeleton]:
        if symbol in self._skeletons:
            return self._skeletons[symbol]
        out: list[_Skeleton] = []
        for rule in self.grammar.rules_for(symbol):
            out.extend(self._rule_skeletons(rule))
        self._skeletons[symbol] = out
        return out

    def _rule_skeletons(self, rule: SynchronousRule) -> Iterator[_Skeleton]:
        # Children are ordered by utterance-side appearance; the i-th occurrence
        # of a nonterminal on each side shares the same child derivation.
        u_refs: list[tuple[str, int]] = []
        occurrence: dict[str, int] = {}
        for token in rule.utterance_pattern:
            if isinstance(token, Ref):
                idx = occurrence.get(token.name, 0)
                occurrence[token.name] = idx + 1
                u_refs.append((token.name, idx))
        child_choices = [self.skeletons(name) for name, _ in u_refs]

        def combos(depth: int, chosen: list[_Skeleton]) -> Iterator[list[_Skeleton]]:
            if depth == len(child_choices):
                yield list(chosen)
                return
            for skeleton in child_choices[depth]:
                chosen.append(skeleton)
                yield from combos(depth + 1, chosen)
                chosen.pop()

        child_index = {key: i for i, key in enumerate(u_refs)}
        for chosen in combos(0, []):
            u_tokens: list[Token] = []
            s_tokens: list[Token] = []
            counters: dict[str, int] = {}
            for token in rule.utterance_pattern:
                if isinstance(token, Ref):
                    idx = counters.get(token.name, 0)
                    counters[token.name] = idx + 1
                    u_tokens.extend(chosen[child_index[(token.name, idx)]].u_tokens)
                else:
                    u_tokens.append(token)
            counters = {}
            for token in rule.sql_pattern:
                if isinstance(token, Ref):
                    idx = counters.get(token.name, 0)
                    counters[token.name] = idx + 1
                    s_tokens.extend(chosen[child_index[(token.name, idx)]].s_tokens)
                else:
                    s_tokens.append(token)
            trace: tuple[str, ...] = (rule.rule_id,)
            for skeleton in chosen:
                trace = trace + skeleton.trace
            yield _Skeleton(tuple(u_tokens), tuple(s_tokens), trace)

    def pairs(self) -> Iterator[CanonicalPair]:
        for skeleton in self.skeletons(self.grammar.start):
            yield from self._bind(skeleton)

    def _bind(self, skeleton: _Skeleton) -> Iterator[CanonicalPair]:
        variables = skeleton.variables()
        concrete = [v for v in variables if not self.lexicon[v].is_abstract]
        template_u = " ".join(self._template_token(t, sql=False) for t in skeleton.u_tokens)
        template_s = " ".join(self._template_token(t, sql=True) for t in skeleton.s_tokens)

        def assignments(depth: int, bound: dict[str, str]) -> Iterator[dict[str, str]]:
            if depth == len(concrete):
                yield dict(bound)
                return
            var = concrete[depth]
            for value in self.lexicon[var].values:
                bound[var] = value
                yield from assignments(depth + 1, bound)
                del bound[var]

        for assignment in assignments(0, {}):
            bindings = {
                v: (assignment[v] if v in assignment else "$" + v) for v in variables
            }
            utterance = " ".join(
                self._bound_token(t, assignment, sql=False) for t in skeleton.u_tokens
            )
            sql = " ".join(
                self._bound_token(t, assignment, sql=True) for t in skeleton.s_tokens
            )
            yield CanonicalPair(
                utterance=utterance,
                sql=sql,
                template_id=template_u,
                sql_template=template_s,
                bindings=bindings,
                rule_trace=skeleton.trace,
            )

    def _template_token(self, token: Token, sql: bool) -> str:
        if isinstance(token, Lit):
            return token.text
        assert isinstance(token, Slot)
        if self.lexicon[token.var].is_abstract:
            return "$" + token.var
        return '"{%s}"' % token.var if sql else "{%s}" % token.var

    def _bound_token(self, token: Token, assignment: dict[str, str], sql: bool) -> str:
        if isinstance(token, Lit):
            return token.text
        assert isinstance(token, Slot)
        if self.lexicon[token.var].is_abstract:
            return "$" + token.var
        value = assignment[token.var]
        return f'"{value}"' if sql else value


def expand(grammar: Grammar, lexicon: Lexicon) -> Iterator[CanonicalPair]:
    """Lazily yield every derivation exactly once, in deterministic order."""
    return _Expander(grammar, lexicon).pairs()


def count_expansions(grammar: Grammar, lexicon: Lexicon) -> int:
    """Number of pairs expand() yields, computed combinatorially.

    Sums, over derivation trees, the product of value-list sizes of the
    distinct concrete variables in the tree (a variable reached through two
    subtrees binds once). Exact at any magnitude: Python integers do not
    overflow.
    """
    memo: dict[str, dict[frozenset[str], int]] = {}

    def varset_counts(symbol: str) -> dict[frozenset[str], int]:
        if symbol in memo:
            return memo[symbol]
        counts: dict[frozenset[str], int] = {}
        for rule in grammar.rules_for(symbol):
            combo: dict[frozenset[str], int] = {frozenset(rule.slot_names()): 1}
            for name in rule.ref_names():
                child = varset_counts(name)
                merged: dict[frozenset[str], int] = {}
                for base_set, base_n in combo.items():
                    for child_set, child_n in child.items():
                        key = base_set | child_set
                        merged[key] = merged.get(key, 0) + base_n * child_n
                combo = merged
            for varset, n in combo.items():
                counts[varset] = counts.get(varset, 0) + n
        memo[symbol] = counts
        return counts

    total = 0
    for varset, n in varset_counts(grammar.start).items():
        product = 1
        for var in varset:
            definition = lexicon[var]
            if not definition.is_abstract:
                product *= len(definition.values)
        total += n * product
    return total
