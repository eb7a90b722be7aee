"""Porter suffix-stripping stemmer.

The classic five-step rule cascade (1980 formulation), implemented
directly from the rule tables. Within a step the longest matching suffix
is selected first and only then is its condition tested; when the
condition fails, no other rule of that step applies. Words shorter than
three letters, and tokens containing digits, pass through unchanged.
"""

from __future__ import annotations

_VOWELS = "aeiou"


def _is_consonant(word: str, i: int) -> bool:
    ch = word[i]
    if ch in _VOWELS:
        return False
    if ch == "y":
        return i == 0 or not _is_consonant(word, i - 1)
    return True


def _measure(stem: str) -> int:
    """Number of vowel-to-consonant transitions: [C](VC)^m[V]."""
    seq = []
    for i in range(len(stem)):
        c = _is_consonant(stem, i)
        if not seq or seq[-1] != c:
            seq.append(c)
    return sum(1 for i in range(len(seq) - 1) if not seq[i] and seq[i + 1])


def _has_vowel(stem: str) -> bool:
    return any(not _is_consonant(stem, i) for i in range(len(stem)))


def _ends_double_consonant(word: str) -> bool:
    return len(word) >= 2 and word[-1] == word[-2] and _is_consonant(word, len(word) - 1)


def _ends_cvc(word: str) -> bool:
    if len(word) < 3:
        return False
    n = len(word)
    return (
        _is_consonant(word, n - 3)
        and not _is_consonant(word, n - 2)
        and _is_consonant(word, n - 1)
        and word[-1] not in "wxy"
    )


def _rule_pass(word: str, rules) -> str:
    """Longest-suffix-first rule application; rules are pre-sorted."""
    for suffix, repl, cond in rules:
        if word.endswith(suffix):
            stem = word[: len(word) - len(suffix)]
            if cond is None or cond(stem):
                return stem + repl
            return word
    return word


def _m_gt0(stem: str) -> bool:
    return _measure(stem) > 0


def _m_gt1(stem: str) -> bool:
    return _measure(stem) > 1


def _sorted_rules(rules):
    return sorted(rules, key=lambda r: len(r[0]), reverse=True)


_STEP2 = _sorted_rules([
    ("ational", "ate", _m_gt0), ("tional", "tion", _m_gt0),
    ("enci", "ence", _m_gt0), ("anci", "ance", _m_gt0),
    ("izer", "ize", _m_gt0), ("abli", "able", _m_gt0),
    ("alli", "al", _m_gt0), ("entli", "ent", _m_gt0),
    ("eli", "e", _m_gt0), ("ousli", "ous", _m_gt0),
    ("ization", "ize", _m_gt0), ("ation", "ate", _m_gt0),
    ("ator", "ate", _m_gt0), ("alism", "al", _m_gt0),
    ("iveness", "ive", _m_gt0), ("fulness", "ful", _m_gt0),
    ("ousness", "ous", _m_gt0), ("aliti", "al", _m_gt0),
    ("iviti", "ive", _m_gt0), ("biliti", "ble", _m_gt0),
])

_STEP3 = _sorted_rules([
    ("icate", "ic", _m_gt0), ("ative", "", _m_gt0), ("alize", "al", _m_gt0),
    ("iciti", "ic", _m_gt0), ("ical", "ic", _m_gt0),
    ("ful", "", _m_gt0), ("ness", "", _m_gt0),
])

_STEP4 = _sorted_rules([
    ("al", "", _m_gt1), ("ance", "", _m_gt1), ("ence", "", _m_gt1),
    ("er", "", _m_gt1), ("ic", "", _m_gt1), ("able", "", _m_gt1),
    ("ible", "", _m_gt1), ("ant", "", _m_gt1), ("ement", "", _m_gt1),
    ("ment", "", _m_gt1), ("ent", "", _m_gt1),
    ("ion", "", lambda s: _m_gt1(s) and s[-1:] in ("s", "t")),
    ("ou", "", _m_gt1), ("ism", "", _m_gt1), ("ate", "", _m_gt1),
    ("iti", "", _m_gt1), ("ous", "", _m_gt1), ("ive", "", _m_gt1),
    ("ize", "", _m_gt1),
])


def _step1a(w: str) -> str:
    if w.endswith("sses"):
        return w[:-2]
    if w.endswith("ies"):
        return w[:-2]
    if w.endswith("ss"):
        return w
    if w.endswith("s"):
        return w[:-1]
    return w


def _step1b(w: str) -> str:
    if w.endswith("eed"):
        return w[:-1] if _m_gt0(w[:-3]) else w
    fired = False
    if w.endswith("ed") and _has_vowel(w[:-2]):
        w, fired = w[:-2], True
    elif w.endswith("ing") and _has_vowel(w[:-3]):
        w, fired = w[:-3], True
    if not fired:
        return w
    if w.endswith(("at", "bl", "iz")):
        return w + "e"
    if _ends_double_consonant(w) and w[-1] not in "lsz":
        return w[:-1]
    if _measure(w) == 1 and _ends_cvc(w):
        return w + "e"
    return w


def _step1c(w: str) -> str:
    if w.endswith("y") and _has_vowel(w[:-1]):
        return w[:-1] + "i"
    return w


def _step5a(w: str) -> str:
    if w.endswith("e"):
        stem = w[:-1]
        m = _measure(stem)
        if m > 1 or (m == 1 and not _ends_cvc(stem)):
            return stem
    return w


def _step5b(w: str) -> str:
    if _m_gt1(w) and _ends_double_consonant(w) and w.endswith("l"):
        return w[:-1]
    return w


def stem(word: str) -> str:
    w = word.lower()
    if len(w) <= 2 or not w.isalpha():
        return w
    w = _step1a(w)
    w = _step1b(w)
    w = _step1c(w)
    w = _rule_pass(w, _STEP2)
    w = _rule_pass(w, _STEP3)
    w = _rule_pass(w, _STEP4)
    w = _step5a(w)
    w = _step5b(w)
    return w
