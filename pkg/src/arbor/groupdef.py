"""The ``.ssg`` group-definition format and projection of wreath recursions.

A definition names a constant-arity tree and a list of generators, each given
by a root permutation (cycle notation, 0-based letters) and one section word
per child.  Example::

    # first Grigorchuk group
    group grigorchuk arity 2
    gen a = perm (0 1) sections [1, 1]
    gen b = perm id sections [a, c]
    gen c = perm id sections [a, d]
    gen d = perm id sections [1, b]
    rist 1 = [d]
    flag expected_branch = true

Words are ``*``-separated generator names with optional integer exponents
(``a*b^-1``, ``a^2``); ``1`` is the empty word.  ``rist`` lines attach known
rigid-stabilizer generator words to a vertex (digit string, or dot-separated
for arities above 9).  ``flag`` lines carry expectation metadata.  Words in
products multiply right-to-left, matching the left action on the tree.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import lru_cache

from .errors import ParseError
from .permutations import Perm, format_cycles, identity_perm, parse_cycles
from .portraits import Portrait
from .trees import TreeShape, Vertex, format_vertex, parse_vertex

# a word is a sequence of (generator name, +1 | -1)
Word = tuple[tuple[str, int], ...]

_NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_GEN_LINE_RE = re.compile(
    r"^gen\s+(?P<name>\S+)\s*=\s*perm\s+(?P<perm>id|[()\d\s,]+?)\s*sections\s*\[(?P<sections>.*)\]\s*$"
)
_RIST_LINE_RE = re.compile(r"^rist\s+(?P<vertex>[\d.@]+)\s*=\s*\[(?P<words>.*)\]\s*$")
_FLAG_LINE_RE = re.compile(r"^flag\s+(?P<name>\S+)\s*=\s*(?P<value>true|false)\s*$")
_GROUP_LINE_RE = re.compile(r"^group\s+(?P<name>\S+)\s+arity\s+(?P<arity>\d+)\s*$")


def parse_word(text: str) -> Word:
    """Parse ``a*c^-1`` style words; ``1`` denotes the empty word."""
    text = text.strip()
    if text == "1":
        return ()
    if not text:
        raise ValueError("empty word (write 1 for the identity)")
    out: list[tuple[str, int]] = []
    for token in text.split("*"):
        token = token.strip()
        m = re.fullmatch(r"(?P<name>[A-Za-z_][A-Za-z0-9_]*)(\^(?P<exp>-?\d+))?", token)
        if not m:
            raise ValueError(f"malformed word token {token!r}")
        exp = int(m.group("exp")) if m.group("exp") else 1
        name = m.group("name")
        if exp == 0:
            continue
        sign = 1 if exp > 0 else -1
        out.extend([(name, sign)] * abs(exp))
    return tuple(out)


def format_word(word: Word) -> str:
    if not word:
        return "1"
    return "*".join(name if sign > 0 else f"{name}^-1" for name, sign in word)


def _split_words(body: str) -> list[str]:
    body = body.strip()
    if not body:
        return []
    return [part.strip() for part in body.split(",")]


@dataclass(frozen=True)
class GeneratorDef:
    name: str
    root_perm: Perm
    sections: tuple[Word, ...]  # one word per child


@dataclass(frozen=True)
class GroupDef:
    """A parsed wreath recursion over the constant-arity tree."""

    name: str
    arity: int
    generators: tuple[GeneratorDef, ...]
    rist_words: dict[Vertex, tuple[Word, ...]] = field(default_factory=dict)
    flags: dict[str, bool] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "_projection_cache", {})

    def generator_names(self) -> tuple[str, ...]:
        return tuple(g.name for g in self.generators)

    def generator(self, name: str) -> GeneratorDef:
        for g in self.generators:
            if g.name == name:
                return g
        raise KeyError(f"unknown generator {name!r} in group {self.name!r}")

    def shape(self, k: int) -> TreeShape:
        return _constant_shape(self.arity, k)

    def project(self, name: str, k: int) -> Portrait:
        """Depth-k portrait of a generator via structural recursion.

        Memoized per (name, depth); the cache is only ever appended to, so
        concurrent readers see value-identical results.
        """
        if k < 0:
            raise ValueError("depth must be >= 0")
        cache: dict = self._projection_cache  # type: ignore[attr-defined]
        key = (name, k)
        hit = cache.get(key)
        if hit is not None:
            return hit
        gen = self.generator(name)
        if k == 0:
            result = Portrait.identity(self.shape(0))
        else:
            sections = [self.evaluate(w, k - 1) for w in gen.sections]
            top = Portrait.from_root_perm(self.shape(1), gen.root_perm)
            from .portraits import psi_compose

            result = psi_compose(sections, top)
        cache[key] = result
        return result

    def evaluate(self, word: Word | str, k: int) -> Portrait:
        """Depth-k portrait of a word (right-to-left product of generators)."""
        if isinstance(word, str):
            word = parse_word(word)
        result = Portrait.identity(self.shape(k))
        for name, sign in word:
            factor = self.project(name, k)
            if sign < 0:
                factor = factor.inverse()
            result = result * factor
        return result

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, GroupDef)
            and self.name == other.name
            and self.arity == other.arity
            and self.generators == other.generators
            and self.rist_words == other.rist_words
            and self.flags == other.flags
        )

    def __hash__(self) -> int:
        return hash((self.name, self.arity, self.generators))


@lru_cache(maxsize=None)
def _constant_shape(arity: int, depth: int) -> TreeShape:
    return TreeShape.constant(arity, depth)


def parse_group(text: str) -> GroupDef:
    """Parse a ``.ssg`` definition; raises ParseError with a line number."""
    name = None
    arity = None
    generators: list[GeneratorDef] = []
    rist_words: dict[Vertex, tuple[Word, ...]] = {}
    flags: dict[str, bool] = {}
    pending_gens: list[tuple[int, str, str, str]] = []

    lines = text.splitlines()
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("group"):
            m = _GROUP_LINE_RE.match(line)
            if not m:
                raise ParseError("malformed group header", lineno, 1)
            if name is not None:
                raise ParseError("duplicate group header", lineno, 1)
            name = m.group("name")
            arity = int(m.group("arity"))
            if arity < 1:
                raise ParseError("arity must be >= 1", lineno, 1)
            continue
        if name is None:
            raise ParseError("group header must come first", lineno, 1)
        if line.startswith("gen"):
            m = _GEN_LINE_RE.match(line)
            if not m:
                raise ParseError("malformed gen line", lineno, 1)
            pending_gens.append((lineno, m.group("name"), m.group("perm"), m.group("sections")))
        elif line.startswith("rist"):
            m = _RIST_LINE_RE.match(line)
            if not m:
                raise ParseError("malformed rist line", lineno, 1)
            try:
                vertex = parse_vertex(m.group("vertex"))
                words = tuple(parse_word(w) for w in _split_words(m.group("words")))
            except ValueError as exc:
                raise ParseError(str(exc), lineno, 1) from exc
            if vertex in rist_words:
                raise ParseError(f"duplicate rist vertex {format_vertex(vertex)}", lineno, 1)
            rist_words[vertex] = words
        elif line.startswith("flag"):
            m = _FLAG_LINE_RE.match(line)
            if not m:
                raise ParseError("malformed flag line", lineno, 1)
            flags[m.group("name")] = m.group("value") == "true"
        else:
            raise ParseError(f"unrecognized line {line!r}", lineno, 1)

    if name is None or arity is None:
        raise ParseError("missing group header", len(lines) or 1, 1)

    declared: set[str] = set()
    for lineno, gname, _, _ in pending_gens:
        if not _NAME_RE.fullmatch(gname):
            raise ParseError(f"invalid generator name {gname!r}", lineno, 1)
        if gname in declared:
            raise ParseError(f"duplicate generator name {gname!r}", lineno, 1)
        declared.add(gname)

    for lineno, gname, perm_text, sections_text in pending_gens:
        try:
            root = parse_cycles(perm_text, arity)
        except ValueError as exc:
            raise ParseError(str(exc), lineno, 1) from exc
        section_texts = _split_words(sections_text)
        if len(section_texts) != arity:
            raise ParseError(
                f"generator {gname!r} has {len(section_texts)} sections, arity is {arity}",
                lineno,
                1,
            )
        sections = []
        for w in section_texts:
            try:
                word = parse_word(w)
            except ValueError as exc:
                raise ParseError(str(exc), lineno, 1) from exc
            for ref, _ in word:
                if ref not in declared:
                    raise ParseError(f"unknown generator {ref!r}", lineno, 1)
            sections.append(word)
        generators.append(GeneratorDef(gname, root, tuple(sections)))

    for vertex, words in rist_words.items():
        for letter in vertex:
            if not 0 <= letter < arity:
                raise ParseError(f"rist vertex {format_vertex(vertex)} has letter out of range")
        for word in words:
            for ref, _ in word:
                if ref not in declared:
                    raise ParseError(f"unknown generator {ref!r} in rist words")

    return GroupDef(name, arity, tuple(generators), rist_words, flags)


def print_group(group: GroupDef) -> str:
    """Render a GroupDef back to ``.ssg`` text (parse o print is identity)."""
    out = [f"group {group.name} arity {group.arity}"]
    for g in group.generators:
        sections = ", ".join(format_word(w) for w in g.sections)
        out.append(f"gen {g.name} = perm {format_cycles(g.root_perm)} sections [{sections}]")
    for vertex in sorted(group.rist_words, key=lambda v: (len(v), v)):
        words = ", ".join(format_word(w) for w in group.rist_words[vertex])
        out.append(f"rist {format_vertex(vertex)} = [{words}]")
    for flag in sorted(group.flags):
        out.append(f"flag {flag} = {'true' if group.flags[flag] else 'false'}")
    return "\n".join(out) + "\n"


def project(group: GroupDef, name: str, k: int) -> Portrait:
    return group.project(name, k)


def evaluate_word(group: GroupDef, word: Word | str, k: int) -> Portrait:
    return group.evaluate(word, k)
