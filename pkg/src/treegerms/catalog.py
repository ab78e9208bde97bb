"""JSON catalogs of permutation groups.

A catalog is a JSON array of objects::

    {"name": "S4", "degree": 4, "generators": ["(0 1)", [1, 2, 3, 0]],
     "tags": ["2-transitive"], "points": ["1", "2", "3", "4"]}

Generators are cycle strings or image arrays on ``0..degree-1``.  The
optional ``points`` array records what each 0-indexed point stood for in the
source (e.g. ``"inf"`` for the point at infinity); it is carried into
reports but never used in computations.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources

from .errors import CatalogError, CycleSyntaxError
from .permgroup import PermGroup, as_perm, parse_generators

_FIELDS = {"name", "degree", "generators", "tags", "points"}


def _line_col(text, offset):
    line = text.count("\n", 0, offset) + 1
    column = offset - (text.rfind("\n", 0, offset) + 1) + 1
    return line, column


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    degree: int
    generators: tuple
    tags: tuple = ()
    points: tuple | None = None
    # (line, column) of each generator in the source file, when known
    locations: tuple = ()

    def group(self):
        """Build the PermGroup; diagnostics carry the source position."""
        gens = []
        for i, g in enumerate(self.generators):
            line, column = self.locations[i] if i < len(self.locations) else (None, None)
            try:
                gens.append(as_perm(g, self.degree))
            except CycleSyntaxError as exc:
                if column is not None:
                    column += 1 + exc.position  # skip the opening quote
                raise CatalogError(
                    f"entry {self.name!r}, generator {i}: {exc.message} (offset {exc.position} in {g!r})",
                    line,
                    column,
                ) from None
            except (ValueError, TypeError) as exc:
                raise CatalogError(f"entry {self.name!r}, generator {i}: {exc}", line, column) from None
            if gens[-1].degree != self.degree:
                raise CatalogError(
                    f"entry {self.name!r}, generator {i} has degree {gens[-1].degree}, expected {self.degree}",
                    line,
                    column,
                )
        return PermGroup(self.degree, gens, name=self.name)

    def as_dict(self):
        out = {"name": self.name, "degree": self.degree, "generators": list(self.generators)}
        if self.tags:
            out["tags"] = list(self.tags)
        if self.points is not None:
            out["points"] = list(self.points)
        return out


def _entry(obj, text, start, end):
    line, column = _line_col(text, start)
    if not isinstance(obj, dict):
        raise CatalogError("catalog entries must be JSON objects", line, column)
    unknown = set(obj) - _FIELDS
    if unknown:
        raise CatalogError(f"unknown field(s) {sorted(unknown)}", line, column)
    name = obj.get("name")
    if not isinstance(name, str) or not name:
        raise CatalogError("entry needs a non-empty string 'name'", line, column)
    degree = obj.get("degree")
    if not isinstance(degree, int) or isinstance(degree, bool) or degree < 1:
        raise CatalogError(f"entry {name!r}: 'degree' must be a positive integer", line, column)
    gens = obj.get("generators", [])
    if not isinstance(gens, list):
        raise CatalogError(f"entry {name!r}: 'generators' must be an array", line, column)
    locations = []
    cursor = start
    for g in gens:
        if isinstance(g, str):
            at = text.find(json.dumps(g, ensure_ascii=False), cursor, end)
            if at < 0:
                at = text.find(json.dumps(g), cursor, end)
        else:
            at = text.find("[", cursor, end)
        if at < 0:
            locations.append((line, column))
        else:
            locations.append(_line_col(text, at))
            cursor = at + 1
        if not isinstance(g, (str, list)):
            raise CatalogError(f"entry {name!r}: generators must be strings or arrays", *locations[-1])
    tags = obj.get("tags", [])
    points = obj.get("points")
    if points is not None and len(points) != degree:
        raise CatalogError(f"entry {name!r}: 'points' must list {degree} labels", line, column)
    return CatalogEntry(
        name=name,
        degree=degree,
        generators=tuple(g if isinstance(g, str) else tuple(g) for g in gens),
        tags=tuple(str(t) for t in tags),
        points=None if points is None else tuple(str(p) for p in points),
        locations=tuple(locations),
    )


def parse_catalog(text):
    """Parse catalog text into entries, keeping each entry's source position."""
    decoder = json.JSONDecoder()
    pos = len(text) - len(text.lstrip())
    if pos >= len(text) or text[pos] != "[":
        try:
            json.loads(text)
        except json.JSONDecodeError as exc:
            raise CatalogError(exc.msg, exc.lineno, exc.colno) from None
        raise CatalogError("a catalog must be a JSON array", *_line_col(text, pos))
    pos += 1
    entries = []
    names = {}

    def skip(p):
        while p < len(text) and text[p].isspace():
            p += 1
        return p

    pos = skip(pos)
    if pos < len(text) and text[pos] == "]":
        return []
    while True:
        pos = skip(pos)
        try:
            obj, end = decoder.raw_decode(text, pos)
        except json.JSONDecodeError as exc:
            raise CatalogError(exc.msg, exc.lineno, exc.colno) from None
        entry = _entry(obj, text, pos, end)
        if entry.name in names:
            raise CatalogError(
                f"duplicate name {entry.name!r} (first defined on line {names[entry.name]})",
                *_line_col(text, pos),
            )
        names[entry.name] = _line_col(text, pos)[0]
        entries.append(entry)
        pos = skip(end)
        if pos >= len(text):
            raise CatalogError("unterminated array", *_line_col(text, pos))
        if text[pos] == "]":
            break
        if text[pos] != ",":
            raise CatalogError(f"expected ',' or ']' but found {text[pos]!r}", *_line_col(text, pos))
        pos += 1
    if text[pos + 1 :].strip():
        raise CatalogError("extra data after the catalog array", *_line_col(text, pos + 1))
    return entries


def load_catalog(path):
    """Read a catalog file; ``path`` may also name a bundled fixture."""
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except FileNotFoundError:
        bundled = resources.files("treegerms").joinpath("data", str(path))
        if not bundled.is_file():
            raise
        text = bundled.read_text(encoding="utf-8")
    return parse_catalog(text)


def inline_entry(text, degree=None, name=None):
    """An entry from a ``"(0 1 2),(0 1)"`` generator string."""
    gens = parse_generators(text, degree)
    return CatalogEntry(
        name=name or text,
        degree=gens[0].degree,
        generators=tuple(str(g) for g in gens),
    )
