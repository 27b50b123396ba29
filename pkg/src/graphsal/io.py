from __future__ import annotations

import csv
import os
import tempfile
from pathlib import Path

from .molgraph import MolecularGraph, SmilesError, parse_smiles, write_smiles


class DatasetError(ValueError):
    pass


def atomic_write(path, data: str | bytes):
    """Write via a temporary file in the same directory, then rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    mode = "wb" if isinstance(data, bytes) else "w"
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, mode, **({} if mode == "wb" else {"encoding": "utf-8", "newline": ""})) as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def read_dataset(path, task: str = "binary") -> list[tuple[MolecularGraph, float, str]]:
    """Rows of a ``smiles,label`` CSV as ``(graph, label, smiles)``."""
    out = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise DatasetError(f"{path}: empty file") from None
        for col in ("smiles", "label"):
            if col not in header:
                raise DatasetError(f"{path}: missing required column {col!r}")
        si, li = header.index("smiles"), header.index("label")
        for row in reader:
            line = reader.line_num
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) <= max(si, li):
                raise DatasetError(f"{path}:{line}: expected {len(header)} fields, got {len(row)}")
            smiles, raw = row[si].strip(), row[li].strip()
            try:
                graph = parse_smiles(smiles)
            except SmilesError as exc:
                raise DatasetError(f"{path}:{line}: bad SMILES {smiles!r}: {exc}") from exc
            try:
                label = float(raw)
            except ValueError:
                raise DatasetError(f"{path}:{line}: label {raw!r} is not a number") from None
            if task == "binary":
                if label not in (0.0, 1.0):
                    raise DatasetError(f"{path}:{line}: binary label must be 0 or 1, got {raw!r}")
                label = int(label)
            out.append((graph, label, smiles))
    if not out:
        raise DatasetError(f"{path}: no data rows")
    return out


def dataset_csv(rows) -> str:
    """``rows`` of ``(graph, label)``; SMILES are written from the graphs."""
    lines = ["smiles,label"]
    for graph, label in rows:
        text = label if isinstance(label, int) else repr(float(label))
        lines.append(f"{write_smiles(graph)},{text}")
    return "\n".join(lines) + "\n"
