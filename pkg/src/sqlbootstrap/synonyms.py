"""Fixed synonym inventory shared by the builtin paraphraser and the template parser.

Each group lists interchangeable surface tokens; the first member is the
canonical form used when folding. Groups deliberately avoid any word that
occurs inside a multi-word lexicon value, so folding never breaks value
anonymization.
"""

from __future__ import annotations

SYNONYM_GROUPS: tuple[tuple[str, ...], ...] = (
    ("rob", "steal", "loot"),
    ("robbed", "stolen", "looted"),
    ("attacked", "assaulted", "raided"),
    ("approached", "contacted"),
    ("weapon", "gun", "arm"),
    ("happened", "occurred"),
    ("reported", "recorded"),
    ("show", "list", "display"),
    ("ships", "vessels", "boats"),
    ("incidents", "events", "cases"),
    ("use", "employ"),
    ("used", "employed"),
)

_FOLD = {member: group[0] for group in SYNONYM_GROUPS for member in group}
_MATES = {
    member: tuple(m for m in group if m != member)
    for group in SYNONYM_GROUPS
    for member in group
}


def fold_token(token: str) -> str:
    """Map a token to its group's canonical member; identity outside the table."""
    return _FOLD.get(token, token)


def alternatives(token: str) -> tuple[str, ...]:
    """Other members of the token's synonym group, empty if none."""
    return _MATES.get(token, ())
