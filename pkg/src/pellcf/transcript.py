"""JSON-lines persistence for expansion transcripts.

Layout: one header object, one object per record (full or thin), one
cursor object.  Every number is a decimal string, keys are emitted in
a fixed order, and separators carry no whitespace, so a transcript's
bytes are a pure function of its content.  Resuming rewrites the file
atomically rather than appending, because the header's step count and
the cursor both change.
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile

from .errors import TranscriptFormatError
from .poly import Poly
from .surd import FORMAT_VERSION, StepRecord, ThinRecord, Transcript, resume

_STEP_FIELDS = ("a", "P", "Q", "p", "q", "R", "S")
_CURSOR_FIELDS = ("P", "Q", "p", "q", "p_prev", "q_prev")


def _dump(obj: dict) -> str:
    return json.dumps(obj, separators=(",", ":"))


def _header_line(tr: Transcript) -> str:
    meta = tr.meta
    return _dump({
        "format": "pellcf.transcript",
        "version": meta.get("version", FORMAT_VERSION),
        "D": tr.D.to_json(),
        "steps": meta["steps"],
        "thin_window": meta.get("thin_window"),
        "pins": list(meta.get("pins", [])),
    })


def _record_line(rec) -> str:
    if rec.thin:
        return _dump({
            "type": "thin",
            "n": rec.n,
            "deg_a": rec.deg_a,
            "degrees": {k: rec.degrees[k] for k in _STEP_FIELDS},
            "heights": {k: rec.heights[k] for k in _STEP_FIELDS},
            "affine_heights": {k: rec.affine_heights[k] for k in _STEP_FIELDS},
            "hashes": {k: rec.hashes[k] for k in _STEP_FIELDS},
        })
    out = {"type": "step", "n": rec.n}
    for k in _STEP_FIELDS:
        out[k] = getattr(rec, k).to_json()
    return _dump(out)


def _cursor_line(tr: Transcript) -> str:
    out = {"type": "cursor", "n": tr.cursor["n"]}
    for k in _CURSOR_FIELDS:
        out[k] = tr.cursor[k].to_json()
    return _dump(out)


def transcript_lines(tr: Transcript):
    yield _header_line(tr)
    for rec in tr.records:
        yield _record_line(rec)
    yield _cursor_line(tr)


def write_transcript(tr: Transcript, path: str) -> None:
    """Write atomically: a crash never leaves a half-written transcript."""
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".pellcf-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            for line in transcript_lines(tr):
                fh.write(line)
                fh.write("\n")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def load_transcript(path: str) -> Transcript:
    with open(path, encoding="utf-8") as fh:
        lines = [ln for ln in (raw.strip() for raw in fh) if ln]
    if not lines:
        raise TranscriptFormatError(f"{path}: empty transcript")
    header = json.loads(lines[0])
    if header.get("format") != "pellcf.transcript":
        raise TranscriptFormatError(f"{path}: not a transcript file")
    if header.get("version") != FORMAT_VERSION:
        raise TranscriptFormatError(
            f"{path}: format version {header.get('version')} is not supported"
        )
    D = Poly.from_json(header["D"])
    steps = header["steps"]
    records = []
    cursor = None
    for ln in lines[1:]:
        obj = json.loads(ln)
        kind = obj.get("type")
        if kind == "step":
            records.append(StepRecord(
                n=obj["n"],
                **{k: Poly.from_json(obj[k]) for k in _STEP_FIELDS},
            ))
        elif kind == "thin":
            records.append(ThinRecord(
                n=obj["n"],
                deg_a=obj["deg_a"],
                degrees=obj["degrees"],
                heights=obj["heights"],
                affine_heights=obj["affine_heights"],
                hashes=obj["hashes"],
            ))
        elif kind == "cursor":
            cursor = {"n": obj["n"]}
            for k in _CURSOR_FIELDS:
                cursor[k] = Poly.from_json(obj[k])
        else:
            raise TranscriptFormatError(f"{path}: unknown record type {kind!r}")
    if cursor is None:
        raise TranscriptFormatError(f"{path}: missing cursor line")
    if len(records) != steps + 1 or cursor["n"] != steps:
        raise TranscriptFormatError(
            f"{path}: header says {steps} steps but records/cursor disagree"
        )
    for i, rec in enumerate(records):
        if rec.n != i:
            raise TranscriptFormatError(f"{path}: record order broken at index {i}")
    meta = {
        "version": header["version"],
        "steps": steps,
        "thin_window": header.get("thin_window"),
        "pins": header.get("pins", []),
    }
    return Transcript(D=D, records=records, cursor=cursor, meta=meta)


def resume_file(path: str, extra: int) -> Transcript:
    """Extend the transcript at `path` by `extra` steps, rewriting in place."""
    tr = load_transcript(path)
    ext = resume(tr, extra)
    write_transcript(ext, path)
    return ext


def file_sha256(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()
