"""Line-oriented cycle trace.

One record per event: ``cycle tid pc opcode event [cause] [cycles]``.
"""

from __future__ import annotations

from typing import TextIO


class TraceWriter:
    def __init__(self, stream: TextIO):
        self.stream = stream
        self.records = 0

    def record(
        self,
        cycle: int,
        tid: int,
        pc: int,
        opcode: str,
        event: str,
        cause: str | None = None,
        cycles: int | None = None,
    ) -> None:
        parts = [str(cycle), str(tid), f"{pc:08x}", opcode, event]
        if cause is not None:
            parts.append(cause)
        if cycles is not None:
            parts.append(str(cycles))
        self.stream.write(" ".join(parts) + "\n")
        self.records += 1


def parse_trace_line(line: str) -> dict[str, object]:
    """Inverse of TraceWriter.record for a single line."""
    fields = line.split()
    record: dict[str, object] = {
        "cycle": int(fields[0]),
        "tid": int(fields[1]),
        "pc": int(fields[2], 16),
        "opcode": fields[3],
        "event": fields[4],
    }
    if len(fields) > 5:
        record["cause"] = fields[5]
    if len(fields) > 6:
        record["cycles"] = int(fields[6])
    return record
