"""Key-value configuration files shared by the CLI and the model layer.

Schema: UTF-8 text, one ``name = value`` per line, ``#`` starts a comment
(full-line or trailing), blank lines ignored.  Unknown keys are kept so
callers can route them (model parameters vs. simulation controls).
"""

from __future__ import annotations

__all__ = ["ConfigSyntaxError", "parse_kv", "load_kv"]


class ConfigSyntaxError(ValueError):
    def __init__(self, lineno: int, line: str, reason: str):
        self.lineno = lineno
        super().__init__(f"line {lineno}: {reason}: {line!r}")


def parse_kv(text: str) -> dict:
    out: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigSyntaxError(lineno, raw, "expected 'name = value'")
        name, value = line.split("=", 1)
        name = name.strip()
        value = value.strip()
        if not name:
            raise ConfigSyntaxError(lineno, raw, "empty name")
        if not value:
            raise ConfigSyntaxError(lineno, raw, "empty value")
        out[name] = value
    return out


def load_kv(path: str) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_kv(fh.read())
