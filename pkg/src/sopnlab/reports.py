"""Plain-text reports: ``key: value`` lines and indented ``key: |`` blocks."""

from __future__ import annotations

from dataclasses import dataclass, field


class ReportError(ValueError):
    pass


@dataclass
class Report:
    command: str
    items: list[tuple[str, str, bool]] = field(default_factory=list)
    exit_code: int = 0

    def add(self, key: str, value) -> "Report":
        text = str(value)
        if "\n" in text:
            raise ReportError(f"value of {key!r} spans lines; use block()")
        self.items.append((key, text, False))
        return self

    def block(self, key: str, text: str) -> "Report":
        self.items.append((key, text.rstrip("\n"), True))
        return self

    def get(self, key: str, default=None):
        for k, v, _ in self.items:
            if k == key:
                return v
        return default

    def render(self) -> str:
        lines = [f"report: {self.command}"]
        for key, value, is_block in self.items:
            if is_block:
                lines.append(f"{key}: |")
                lines.extend(("  " + ln).rstrip() if ln else "" for ln in value.split("\n"))
                lines.append("  .")
            else:
                lines.append(f"{key}: {value}")
        return "\n".join(lines) + "\n"


def parse_report(text: str) -> Report:
    lines = text.split("\n")
    if not lines or not lines[0].startswith("report: "):
        raise ReportError("not a report: first line must be 'report: COMMAND'")
    rep = Report(lines[0][len("report: "):].strip())
    i = 1
    while i < len(lines):
        line = lines[i]
        i += 1
        if not line:
            continue
        key, sep, value = line.partition(": ")
        if not sep:
            raise ReportError(f"line {i}: expected 'key: value'")
        if value == "|":
            body = []
            while i < len(lines) and lines[i] != "  .":
                ln = lines[i]
                if ln and not ln.startswith("  "):
                    raise ReportError(f"line {i + 1}: block line must be indented")
                body.append(ln[2:])
                i += 1
            if i >= len(lines):
                raise ReportError(f"block {key!r} is not terminated")
            i += 1
            rep.block(key, "\n".join(body))
        else:
            rep.add(key, value)
    return rep
