"""Binary model files.

Length-prefixed little-endian format with the ASCII magic ``BCRF1``:
template set, training transform (provenance only), label alphabet, the
feature dictionary, and one unscaled float64 weight per feature id.
"""

from __future__ import annotations

import struct

import numpy as np

from .chain_crf import ChainModel
from .features import FeatureIndex, Template, TemplateSet
from .transforms import TransformSpec

MAGIC = b"BCRF1"
FORMAT_VERSION = 1


class ModelFormatError(ValueError):
    pass


def _write_str(fh, s: str) -> None:
    data = s.encode("utf-8")
    fh.write(struct.pack("<I", len(data)))
    fh.write(data)


class _Reader:
    def __init__(self, fh):
        self.fh = fh

    def read(self, n: int) -> bytes:
        data = self.fh.read(n)
        if len(data) != n:
            raise ModelFormatError("truncated model file")
        return data

    def unpack(self, fmt: str):
        return struct.unpack(fmt, self.read(struct.calcsize(fmt)))

    def read_str(self) -> str:
        (n,) = self.unpack("<I")
        return self.read(n).decode("utf-8")


def save_model(path, model: ChainModel, transform: TransformSpec) -> None:
    """Write the model with its scale folded into the weights."""
    index = model.index
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<H", FORMAT_VERSION))

        _write_str(fh, index.templates.name)
        fh.write(struct.pack("<H", len(index.templates.templates)))
        for template in index.templates.templates:
            fh.write(struct.pack("<B", len(template)))
            for col, off in template:
                fh.write(struct.pack("<Bb", 0 if col == "w" else 1, off))

        _write_str(fh, transform.kind)
        fh.write(struct.pack("<d", transform.hyper))
        if transform.table_resolution is None:
            fh.write(struct.pack("<BId", 0, 0, 0.0))
        else:
            fh.write(struct.pack("<BId", 1, transform.table_resolution, transform.table_range))

        fh.write(struct.pack("<I", len(index.labels)))
        for label in index.labels:
            _write_str(fh, label)

        fh.write(struct.pack("<Q", len(index._state)))
        for attr, (labs, fids) in index._state.items():
            _write_str(fh, attr)
            fh.write(struct.pack("<H", len(labs)))
            for lab, fid in zip(labs, fids):
                fh.write(struct.pack("<IQ", int(lab), int(fid)))

        fh.write(struct.pack("<Q", index.num_features))
        fh.write(np.ascontiguousarray(model.effective(), dtype="<f8").tobytes())


def load_model(path) -> tuple[ChainModel, TransformSpec]:
    with open(path, "rb") as fh:
        r = _Reader(fh)
        if r.read(len(MAGIC)) != MAGIC:
            raise ModelFormatError("not a model file (bad magic)")
        (version,) = r.unpack("<H")
        if version != FORMAT_VERSION:
            raise ModelFormatError(f"unsupported model format version {version}")

        name = r.read_str()
        (n_templates,) = r.unpack("<H")
        templates: list[Template] = []
        for _ in range(n_templates):
            (k,) = r.unpack("<B")
            items = []
            for _ in range(k):
                col, off = r.unpack("<Bb")
                items.append(("w" if col == 0 else "p", off))
            templates.append(tuple(items))
        template_set = TemplateSet(name, tuple(templates))

        kind = r.read_str()
        (hyper,) = r.unpack("<d")
        has_table, resolution, table_range = r.unpack("<BId")
        if has_table:
            spec = TransformSpec(kind, hyper, resolution, table_range)
        else:
            spec = TransformSpec(kind, hyper)

        (n_labels,) = r.unpack("<I")
        labels = tuple(r.read_str() for _ in range(n_labels))

        (n_attrs,) = r.unpack("<Q")
        state = {}
        for _ in range(n_attrs):
            attr = r.read_str()
            (k,) = r.unpack("<H")
            labs = np.empty(k, dtype=np.int32)
            fids = np.empty(k, dtype=np.int64)
            for j in range(k):
                lab, fid = r.unpack("<IQ")
                labs[j] = lab
                fids[j] = fid
            state[attr] = (labs, fids)

        (num_features,) = r.unpack("<Q")
        raw = r.read(num_features * 8)
        weights = np.frombuffer(raw, dtype="<f8").astype(np.float64)

    index = FeatureIndex(labels, template_set, state, num_features)
    return ChainModel(index, weights, 1.0), spec


def export_text(path, model: ChainModel) -> None:
    """Dump ``feature<TAB>weight`` lines, ordered by feature id."""
    weights = model.effective()
    names = sorted(model.index.feature_names())
    with open(path, "w", encoding="utf-8") as fh:
        for fid, name in names:
            fh.write(f"{name}\t{weights[fid]:.17g}\n")
