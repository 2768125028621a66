"""Programmatic emitter for generated assembly sources."""

from __future__ import annotations

import itertools
import textwrap
from collections.abc import Iterable

INDENT = "    "


class AsmBuilder:
    """Accumulates source lines; generators share one builder per program."""

    def __init__(self) -> None:
        self._lines: list[str] = []
        self._ids = itertools.count()

    def unique(self, stem: str) -> str:
        """A label name no other call on this builder returns."""
        return f"{stem}_{next(self._ids)}"

    def label(self, name: str) -> AsmBuilder:
        self._lines.append(f"{name}:")
        return self

    def op(self, text: str) -> AsmBuilder:
        self._lines.append(INDENT + text.strip())
        return self

    def ops(self, block: str) -> AsmBuilder:
        """Add a block of lines; ``name:`` lines stay labels, the rest are indented."""
        for line in textwrap.dedent(block).strip("\n").splitlines():
            stripped = line.strip()
            if not stripped:
                continue
            if stripped.endswith(":") or stripped.startswith((";", ".")):
                self._lines.append(stripped)
            else:
                self._lines.append(INDENT + stripped)
        return self

    def comment(self, text: str) -> AsmBuilder:
        self._lines.append(f"; {text}")
        return self

    def directive(self, name: str, *args: object) -> AsmBuilder:
        rendered = ", ".join(str(a) for a in args)
        self._lines.append(f"{name} {rendered}".rstrip())
        return self

    def words(self, values: Iterable[int | str], per_line: int = 8) -> AsmBuilder:
        batch: list[str] = []
        for value in values:
            batch.append(value if isinstance(value, str) else str(value))
            if len(batch) == per_line:
                self.directive(".word", *batch)
                batch = []
        if batch:
            self.directive(".word", *batch)
        return self

    def extend(self, other: AsmBuilder) -> AsmBuilder:
        self._lines.extend(other._lines)
        return self

    def source(self) -> str:
        return "\n".join(self._lines) + "\n"

    def __len__(self) -> int:
        return len(self._lines)
