import json
import os
import stat

import pytest

from twinsim.utils.atomic_writer import AtomicFileWriter


def test_write_text_creates_parents(tmp_path):
    target = tmp_path / "a" / "b" / "out.s"
    AtomicFileWriter.write(target, "halt\n")
    assert target.read_text() == "halt\n"


def test_write_bytes_replaces(tmp_path):
    target = tmp_path / "img.bin"
    target.write_bytes(b"old contents")
    AtomicFileWriter.write_bytes(target, b"\x00\x01")
    assert target.read_bytes() == b"\x00\x01"
    assert [p.name for p in tmp_path.iterdir()] == ["img.bin"]


def test_json_is_sorted_with_trailing_newline(tmp_path):
    target = tmp_path / "stats.json"
    AtomicFileWriter.write_json(target, {"b": 1, "a": [1, 2]})
    text = target.read_text()
    assert text.endswith("}\n")
    assert text.index('"a"') < text.index('"b"')
    assert json.loads(text) == {"a": [1, 2], "b": 1}


@pytest.mark.skipif(os.name != "posix", reason="mode bits")
def test_keeps_existing_mode(tmp_path):
    target = tmp_path / "run.sh"
    target.write_text("x")
    target.chmod(0o640)
    AtomicFileWriter.write(target, "y")
    assert stat.S_IMODE(target.stat().st_mode) == 0o640


def test_failed_write_leaves_no_temp_file(tmp_path, monkeypatch):
    target = tmp_path / "out.json"

    def boom(*_args):
        raise OSError("disk full")

    monkeypatch.setattr(os, "replace", boom)
    with pytest.raises(OSError, match="disk full"):
        AtomicFileWriter.write(target, "data")
    assert list(tmp_path.iterdir()) == []
