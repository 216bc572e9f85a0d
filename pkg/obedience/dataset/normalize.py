"""
Answer normalization used for retrieval matching and correctness flags.
"""

import re

_WHITESPACE = re.compile(r"\s+")
_TERMINAL_PUNCTUATION = ".,;:!?\"'"


def normalize_answer(text: str) -> str:
    """Case-fold, trim, collapse internal whitespace and strip terminal punctuation."""
    value = _WHITESPACE.sub(" ", text.casefold()).strip()
    while value and value[-1] in _TERMINAL_PUNCTUATION:
        value = value[:-1].rstrip()
    return value
