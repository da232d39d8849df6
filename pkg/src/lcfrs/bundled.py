"""Access to the grammars shipped inside the package."""

from importlib import resources

NAMES = ("cfg_anbn", "count4", "tag_style", "itg_sep", "dual_initial_demo")


def grammar_text(name: str) -> str:
    if name not in NAMES:
        raise KeyError("no bundled grammar %r (have: %s)" % (name, ", ".join(NAMES)))
    return (
        resources.files("lcfrs")
        .joinpath("grammars/%s.lcfrs" % name)
        .read_text(encoding="utf-8")
    )


def load(name: str):
    from .grammar import parse_grammar

    return parse_grammar(grammar_text(name))
