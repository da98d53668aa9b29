import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from sqlbootstrap import expand, load_grammar, load_lexicon, load_schema, parse_grammar, parse_lexicon

DATA_DIR = Path(__file__).resolve().parents[1] / "src" / "sqlbootstrap" / "data"

TOY_LEXICON = """\
var victim : va.victim
    "oil tanker"
    "offshore supply vessel"
    "container ship"
var incident : va.incident_type
    "robbery"
    "hijacking"
abstract loc
"""

TOY_GRAMMAR = (
    'Q -> "how many" $victim "have been" $incident "in" $loc "?" ||| '
    "SELECT COUNT(*) FROM incidents AS va WHERE va.victim = {victim} "
    "AND va.incident_type = {incident} AND va.location = $loc\n"
)


@pytest.fixture(scope="session")
def toy_lexicon():
    return parse_lexicon(TOY_LEXICON)


@pytest.fixture(scope="session")
def toy_grammar(toy_lexicon):
    return parse_grammar(TOY_GRAMMAR, toy_lexicon)


@pytest.fixture(scope="session")
def toy_pairs(toy_grammar, toy_lexicon):
    return list(expand(toy_grammar, toy_lexicon))


@pytest.fixture(scope="session")
def maritime_lexicon():
    return load_lexicon(DATA_DIR / "maritime.lexicon")


@pytest.fixture(scope="session")
def maritime_schema():
    return load_schema(DATA_DIR / "maritime.schema")


@pytest.fixture(scope="session")
def maritime_grammar(maritime_lexicon):
    return load_grammar(DATA_DIR / "maritime.grammar", maritime_lexicon)


@pytest.fixture(scope="session")
def maritime_pairs(maritime_grammar, maritime_lexicon):
    return list(expand(maritime_grammar, maritime_lexicon))
