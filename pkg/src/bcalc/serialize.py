"""JSON (de)serialization and the file-backed workspace.

Every value type carries its own ``to_jsonable``/``from_jsonable``; this
module adds schema sniffing so CLI arguments can be plain files of any
supported kind, and a Workspace that loads a directory of named objects.
"""
from __future__ import annotations

import json
from pathlib import Path

from .boperators import BDiffOp, FullCalcDescriptor, ModelKernel
from .errors import SchemaError
from .geometry import BMapDescriptor, FaceLattice
from .indexsets import IndexEntry, IndexFamily, IndexSet
from .rationals import ComplexRational, as_fraction


def parse_object(data):
    """Detect the schema of a decoded JSON object and build the value."""
    if isinstance(data, list):
        return _parse_entry_list(data)
    if not isinstance(data, dict):
        raise SchemaError(f"cannot interpret {type(data).__name__} as a known object")
    if "generators" in data:
        return IndexSet.from_jsonable(data)
    if "assignment" in data:
        return IndexFamily.from_jsonable(data)
    if "e" in data and "source" in data:
        return BMapDescriptor.from_jsonable(data)
    if "bhs" in data:
        return FaceLattice.from_jsonable(data)
    if "coeffs" in data:
        return BDiffOp.from_jsonable(data)
    if "E_lb" in data:
        return FullCalcDescriptor.from_jsonable(data)
    if "terms" in data and data.get("terms") is not None and (
        not data["terms"] or "side" in data["terms"][0]
    ):
        return ModelKernel.from_jsonable(data)
    if "entries" in data:
        return _parse_entry_list(data["entries"])
    raise SchemaError(f"unrecognized object with keys {sorted(data)}")


def _parse_entry_list(items):
    entries = []
    for item in items:
        if isinstance(item, dict):
            entries.append(
                IndexEntry(
                    ComplexRational(as_fraction(item["re"]), as_fraction(item.get("im", 0))),
                    int(item["p"]),
                )
            )
        else:
            z, p = item[0], item[-1]
            im = item[1] if len(item) == 3 else 0
            entries.append(IndexEntry(ComplexRational.of(z, im), int(p)))
    return tuple(entries)


def load_object(path):
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: invalid JSON ({exc})") from exc
    return parse_object(data)


def load_typed(path, kind):
    obj = load_object(path)
    if not isinstance(obj, kind):
        raise SchemaError(
            f"{path}: expected {kind.__name__}, found {type(obj).__name__}"
        )
    return obj


class Workspace:
    """Named store of calculus objects loaded from a directory of JSON files.

    File stems are the names; they must be unique (guaranteed within one
    directory by the filesystem).
    """

    def __init__(self, objects=None):
        self.objects = dict(objects or {})

    @classmethod
    def load_dir(cls, directory) -> "Workspace":
        directory = Path(directory)
        objects = {}
        for path in sorted(directory.glob("*.json")):
            objects[path.stem] = load_object(path)
        return cls(objects)

    def __getitem__(self, name: str):
        try:
            return self.objects[name]
        except KeyError:
            raise KeyError(f"no object named {name!r} in workspace") from None

    def names(self):
        return tuple(sorted(self.objects))
