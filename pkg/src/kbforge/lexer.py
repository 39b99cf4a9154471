from __future__ import annotations

from dataclasses import dataclass

from .errors import LexError

OPERATORS = [
    "<=>", "::", "..", "=>", "<=", "<-", "=<", ">=", "~=", "->",
    "=", "<", ">", "~", "!", "?", "&", "|", "+", "-", "*", "/", "%", "#",
]
PUNCT = set("{}()[],;:.")


@dataclass(frozen=True)
class Token:
    kind: str  # ident | int | float | string | op | punct | eof
    text: str
    line: int
    col: int

    def __repr__(self):
        return f"{self.kind}:{self.text}"


def _is_ident_start(c):
    return ('a' <= c <= 'z') or ('A' <= c <= 'Z')


def _is_ident_char(c):
    return _is_ident_start(c) or c.isdigit() or c in "_'"


def tokenize(text: str) -> list:
    toks = []
    i, line, col = 0, 1, 1
    n = len(text)

    def adv(k):
        nonlocal i, line, col
        for _ in range(k):
            if text[i] == "\n":
                line += 1
                col = 1
            else:
                col += 1
            i += 1

    while i < n:
        c = text[i]
        if c in " \t\r\n":
            adv(1)
            continue
        if text.startswith("//", i):
            while i < n and text[i] != "\n":
                adv(1)
            continue
        if text.startswith("/*", i):
            sl, sc = line, col
            end = text.find("*/", i + 2)
            if end < 0:
                raise LexError("unterminated block comment", sl, sc)
            adv(end + 2 - i)
            continue
        sl, sc = line, col
        if c == '"':
            j = i + 1
            buf = []
            while j < n and text[j] != '"':
                if text[j] == "\\" and j + 1 < n:
                    buf.append(text[j + 1])
                    j += 2
                    continue
                if text[j] == "\n":
                    break
                buf.append(text[j])
                j += 1
            if j >= n or text[j] != '"':
                raise LexError("unterminated string literal", sl, sc)
            adv(j + 1 - i)
            toks.append(Token("string", "".join(buf), sl, sc))
            continue
        if c.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            kind = "int"
            if j + 1 < n and text[j] == "." and text[j + 1].isdigit():
                j += 1
                while j < n and text[j].isdigit():
                    j += 1
                kind = "float"
            toks.append(Token(kind, text[i:j], sl, sc))
            adv(j - i)
            continue
        if _is_ident_start(c):
            j = i
            while j < n and _is_ident_char(text[j]):
                j += 1
            toks.append(Token("ident", text[i:j], sl, sc))
            adv(j - i)
            continue
        for op in OPERATORS:
            if text.startswith(op, i):
                toks.append(Token("op", op, sl, sc))
                adv(len(op))
                break
        else:
            if c in PUNCT:
                toks.append(Token("punct", c, sl, sc))
                adv(1)
                continue
            raise LexError(f"unexpected character {c!r}", sl, sc)
    return toks
