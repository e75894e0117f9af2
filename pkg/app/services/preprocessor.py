"""
Contract preprocessor built on pcpp.

Merges the source files of a contract into one translation unit. Include
targets are served from the SourceUnit, never from the disk, and every merged
line remembers the file and line it came from so frontend diagnostics point
at the original source.

pcpp follows the C rule that a macro is not re-expanded inside its own
expansion, so a self-referencing macro would leave its name in the output;
that case is reported as RecursiveMacro.
"""

from __future__ import annotations

import io
import logging
import os
import posixpath
import re
from typing import Dict, List, Optional, Tuple

from pcpp.preprocessor import Preprocessor as CPreprocessor

from app.models.program import SourceUnit
from app.services.errors import (
    RecursiveMacro,
    UnbalancedConditional,
    UnresolvedInclude,
    UnsupportedConstruct,
)


logger = logging.getLogger(__name__)

CONDITIONAL_RE = re.compile(r"^\s*#\s*(if|ifdef|ifndef|elif|else|endif)\b")


def check_conditionals(path: str, text: str) -> None:
    """Reject stray, repeated or unterminated #else/#endif lines of one file."""
    # each frame: [opening line, #else seen]
    frames: List[List] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        match = CONDITIONAL_RE.match(line)
        if not match:
            continue
        name = match.group(1)
        if name in ("if", "ifdef", "ifndef"):
            frames.append([lineno, False])
        elif not frames:
            raise UnbalancedConditional(f"#{name} without matching #if", path=path, line=lineno)
        elif name == "endif":
            frames.pop()
        elif frames[-1][1]:
            raise UnbalancedConditional(f"#{name} after #else", path=path, line=lineno)
        elif name == "else":
            frames[-1][1] = True
    if frames:
        raise UnbalancedConditional("unterminated conditional block", path=path, line=frames[-1][0])


class Preprocessor(CPreprocessor):
    """Single-use preprocessor over one SourceUnit."""

    def __init__(self, unit: SourceUnit, defines: Optional[Dict[str, str]] = None):
        super().__init__()
        self.source_unit = unit
        self._files = {path: text for path, text in unit.files}
        self._defines = dict(defines or {})
        # absolute path as pcpp opened it -> SourceUnit path
        self._origins: Dict[str, str] = {}
        self._directive = None
        # merged line -> (path, line)
        self.line_map: List[Tuple[str, int]] = []

    def run(self) -> str:
        if not self.source_unit.files:
            raise UnresolvedInclude("empty source unit")
        path, text = self.source_unit.files[0]
        check_conditionals(path, text)
        for name, value in self._defines.items():
            self.define(f"{name} {value}")
        self._origins[os.path.abspath(path)] = path
        self.parse(text if text.endswith("\n") else text + "\n", path)
        merged = self._collect()
        logger.debug("preprocessed %s: %d lines, %d macros", path, len(self.line_map), len(self.macros))
        return merged

    # -- pcpp hooks ---------------------------------------------------------

    def on_file_open(self, is_system_include, includepath):
        target = self._resolve(includepath)
        if target is None:
            raise OSError(f"{includepath} is not part of the source unit")
        check_conditionals(target, self._files[target])
        self._origins[os.path.abspath(includepath)] = target
        logger.debug("including %s", target)
        return io.StringIO(self._files[target])

    def on_include_not_found(self, is_malformed, is_system_include, curdir, includepath):
        path, line = self._position(self._directive)
        raise UnresolvedInclude(f"cannot resolve #include '{includepath}'", path=path, line=line)

    def on_directive_handle(self, directive, toks, ifpassthru, precedingtoks):
        self._directive = directive
        return super().on_directive_handle(directive, toks, ifpassthru, precedingtoks)

    def on_directive_unknown(self, directive, toks, ifpassthru, precedingtoks):
        if directive.value == "pragma":
            return True
        path, line = self._position(directive)
        raise UnsupportedConstruct(f"unsupported directive #{directive.value}", path=path, line=line)

    def on_error(self, file, line, msg):
        raise UnsupportedConstruct(msg, path=self._origin(file), line=line)

    def on_comment(self, tok):
        return False

    # -- helpers ------------------------------------------------------------

    def _resolve(self, candidate: str) -> Optional[str]:
        wanted = os.path.normpath(candidate)
        for path in self._files:
            if os.path.abspath(path) == wanted:
                return path
        for path in self._files:
            if posixpath.basename(path) == os.path.basename(wanted):
                return path
        return None

    def _origin(self, source: Optional[str]) -> str:
        if source:
            found = self._origins.get(os.path.abspath(source))
            if found is not None:
                return found
            for path in self._files:
                if posixpath.basename(path) == os.path.basename(source):
                    return path
        return self.source_unit.files[0][0]

    def _position(self, tok) -> Tuple[str, Optional[int]]:
        if tok is None:
            return self.source_unit.files[0][0], None
        return self._origin(getattr(tok, "source", None)), getattr(tok, "lineno", None)

    def _collect(self) -> str:
        """Drain pcpp's token stream into text, recording each line's origin."""
        lines: List[str] = []
        current: List[str] = []
        origin: Optional[Tuple[str, int]] = None
        last = (self.source_unit.files[0][0], 1)

        while True:
            tok = self.token()
            if tok is None:
                break
            if tok.type == self.t_ID:
                macro = self.macros.get(tok.value)
                if macro is not None and macro.arglist is None:
                    path, line = origin or self._position(tok)
                    raise RecursiveMacro(f"macro {tok.value} expands to itself", path=path, line=line)
            parts = tok.value.split("\n")
            for index, part in enumerate(parts):
                if index:
                    lines.append("".join(current).rstrip())
                    last = origin or last
                    self.line_map.append(last)
                    current, origin = [], None
                current.append(part)
            if origin is None and tok.value.strip():
                origin = self._position(tok)

        if "".join(current).strip():
            lines.append("".join(current).rstrip())
            self.line_map.append(origin or last)
        return "\n".join(lines) + "\n"


def preprocess(unit: SourceUnit, defines: Optional[Dict[str, str]] = None) -> str:
    """Merge `unit` into one directive-free translation unit."""
    return Preprocessor(unit, defines).run()
