"""Binary container for trained models.

Layout (all integers little-endian):

    magic   4 bytes  b"GBVQ"
    version u32
    count   u32                       number of sections
    then per section:
        name_len u16, name utf-8
        dtype    u8   0=f64 1=f32 2=i64 3=i32 4=u8 5=json
        ndim     u8   0 for json payloads
        shape    u32 x ndim
        size     u64  payload byte length
        payload  size bytes
        crc      u32  zlib.crc32 of the payload

Numeric parameters are stored as float64 so a round trip reproduces bitwise
identical predictions.  JSON sections are canonical (sorted keys, compact
separators), which makes serialization deterministic end to end.
"""

from __future__ import annotations

import json
import struct
import zlib

import numpy as np

from .config import RunConfig
from .errors import FormatError, VersionError
from .feature_selection import KINDS, FeatureSelector
from .pipeline import FORMAT_VERSION, TrainedModel
from .regression import GbdtModel, RegressionTree
from .representations import (
    SpatialPipeline,
    SpatioColorPipeline,
    SpatioTemporalPipeline,
    TemporalPipeline,
)
from .transforms import PcaBasis, SaabKernel

__all__ = ["serialize", "deserialize", "save_model", "load_model"]

MAGIC = b"GBVQ"

_DTYPE_TAGS = {"<f8": 0, "<f4": 1, "<i8": 2, "<i4": 3, "|u1": 4}
_TAG_DTYPES = {0: "<f8", 1: "<f4", 2: "<i8", 3: "<i4", 4: "|u1"}
_JSON_TAG = 5


# ---------------------------------------------------------------------------
# Low-level section framing

class _Writer:
    def __init__(self):
        self.parts: list[bytes] = []
        self.count = 0

    def _section(self, name: str, tag: int, shape: tuple[int, ...],
                 payload: bytes) -> None:
        name_b = name.encode("utf-8")
        head = struct.pack("<H", len(name_b)) + name_b
        head += struct.pack("<BB", tag, len(shape))
        head += struct.pack(f"<{len(shape)}I", *shape) if shape else b""
        head += struct.pack("<Q", len(payload))
        self.parts.append(head + payload + struct.pack("<I", zlib.crc32(payload)))
        self.count += 1

    def array(self, name: str, values: np.ndarray, dtype: str = "<f8") -> None:
        arr = np.ascontiguousarray(np.asarray(values), dtype=dtype)
        self._section(name, _DTYPE_TAGS[dtype], arr.shape, arr.tobytes())

    def json(self, name: str, obj) -> None:
        payload = json.dumps(obj, sort_keys=True,
                             separators=(",", ":")).encode("utf-8")
        self._section(name, _JSON_TAG, (), payload)

    def finish(self, version: int) -> bytes:
        head = MAGIC + struct.pack("<II", version, self.count)
        return head + b"".join(self.parts)


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int, what: str) -> bytes:
        if self.pos + n > len(self.data):
            raise FormatError(
                f"truncated while reading {what} "
                f"({n} bytes needed, {len(self.data) - self.pos} left)",
                offset=self.pos)
        chunk = self.data[self.pos:self.pos + n]
        self.pos += n
        return chunk

    def unpack(self, fmt: str, what: str):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt), what))

    def section(self):
        (name_len,) = self.unpack("<H", "section name length")
        name = self.take(name_len, "section name").decode("utf-8")
        tag, ndim = self.unpack("<BB", f"section {name} header")
        shape = self.unpack(f"<{ndim}I", f"section {name} shape") if ndim else ()
        (size,) = self.unpack("<Q", f"section {name} payload size")
        payload = self.take(size, f"section {name} payload")
        crc_offset = self.pos
        (crc,) = self.unpack("<I", f"section {name} checksum")
        if crc != zlib.crc32(payload):
            raise FormatError(f"checksum mismatch in section {name}",
                              offset=crc_offset)
        if tag == _JSON_TAG:
            return name, json.loads(payload.decode("utf-8"))
        if tag not in _TAG_DTYPES:
            raise FormatError(f"unknown dtype tag {tag} in section {name}",
                              offset=crc_offset)
        arr = np.frombuffer(payload, dtype=_TAG_DTYPES[tag]).reshape(shape)
        return name, arr.copy()


def _read_sections(data: bytes) -> dict:
    reader = _Reader(data)
    magic = reader.take(4, "magic")
    if magic != MAGIC:
        raise FormatError(f"bad magic {magic!r}, expected {MAGIC!r}", offset=0)
    version, count = reader.unpack("<II", "header")
    if version != FORMAT_VERSION:
        raise VersionError(
            f"unsupported format version {version}, expected {FORMAT_VERSION}",
            offset=4)
    sections = {}
    for _ in range(count):
        name, value = reader.section()
        if name in sections:
            raise FormatError(f"duplicate section {name}", offset=reader.pos)
        sections[name] = value
    if reader.pos != len(data):
        raise FormatError(
            f"{len(data) - reader.pos} trailing bytes after last section",
            offset=reader.pos)
    return sections


# ---------------------------------------------------------------------------
# Model <-> sections

def _kernel_info(kernel: SaabKernel) -> dict:
    return {
        "patch_shape": list(kernel.patch_shape),
        "stride": list(kernel.stride),
        "in_channels": kernel.in_channels,
        "num_ac": kernel.num_ac,
    }


def _write_kernel(writer: _Writer, prefix: str, kernel: SaabKernel) -> None:
    writer.array(f"{prefix}.basis", kernel.ac_basis)
    writer.array(f"{prefix}.variance", kernel.ac_variance)


def _write_kernel_list(writer: _Writer, prefix: str,
                       kernels: list[SaabKernel]) -> None:
    # Per-channel kernels share one geometry, so they stack cleanly.
    writer.array(f"{prefix}.basis", np.stack([k.ac_basis for k in kernels]))
    writer.array(f"{prefix}.variance",
                 np.stack([k.ac_variance for k in kernels]))


def _write_pca_list(writer: _Writer, prefix: str,
                    bases: list[PcaBasis]) -> None:
    writer.array(f"{prefix}.mean", np.stack([b.mean for b in bases]))
    writer.array(f"{prefix}.components",
                 np.stack([b.components for b in bases]))
    writer.array(f"{prefix}.variance",
                 np.stack([b.explained_variance for b in bases]))


def _read_kernel(sections: dict, prefix: str, info: dict) -> SaabKernel:
    return SaabKernel(
        patch_shape=tuple(info["patch_shape"]),
        stride=tuple(info["stride"]),
        in_channels=int(info["in_channels"]),
        num_ac=int(info["num_ac"]),
        ac_basis=sections[f"{prefix}.basis"],
        ac_variance=sections[f"{prefix}.variance"],
    )


def _read_kernel_list(sections: dict, prefix: str,
                      infos: list[dict]) -> list[SaabKernel]:
    basis = sections[f"{prefix}.basis"]
    variance = sections[f"{prefix}.variance"]
    return [SaabKernel(patch_shape=tuple(info["patch_shape"]),
                       stride=tuple(info["stride"]),
                       in_channels=int(info["in_channels"]),
                       num_ac=int(info["num_ac"]),
                       ac_basis=basis[i].copy(),
                       ac_variance=variance[i].copy())
            for i, info in enumerate(infos)]


def _read_pca_list(sections: dict, prefix: str) -> list[PcaBasis]:
    mean = sections[f"{prefix}.mean"]
    components = sections[f"{prefix}.components"]
    variance = sections[f"{prefix}.variance"]
    return [PcaBasis(mean=mean[i].copy(), components=components[i].copy(),
                     explained_variance=variance[i].copy())
            for i in range(mean.shape[0])]


def serialize(model: TrainedModel) -> bytes:
    """Encode a trained model as one self-validating byte string."""
    writer = _Writer()
    writer.json("config", model.config.to_dict())
    writer.json("metadata", model.metadata)

    structure = {
        "spatial": {
            "pca_n": model.spatial.pca_n,
            "input_size": model.spatial.input_size,
            "dim": model.spatial.dim,
            "hop1": _kernel_info(model.spatial.hop1),
            "hop2": [_kernel_info(k) for k in model.spatial.hop2],
        },
        "spatio_color": {
            "pca_n_low": model.spatio_color.pca_n_low,
            "pca_n_high": model.spatio_color.pca_n_high,
            "input_size": model.spatio_color.input_size,
            "dim": model.spatio_color.dim,
            "hop1": _kernel_info(model.spatio_color.hop1),
            "hop2": [_kernel_info(k) for k in model.spatio_color.hop2],
        },
        "temporal": {
            "sub_video_len": model.temporal.sub_video_len,
            "block_size": model.temporal.block_size,
            "search_range": model.temporal.search_range,
            "sig_threshold": model.temporal.sig_threshold,
            "dim": model.temporal.dim,
            "has_spectral": model.temporal.spectral is not None,
        },
        "spatio_temporal": {
            "pca_n_low": model.spatio_temporal.pca_n_low,
            "pca_n_high": model.spatio_temporal.pca_n_high,
            "input_dims": list(model.spatio_temporal.input_dims),
            "dim": model.spatio_temporal.dim,
            "hop1": _kernel_info(model.spatio_temporal.hop1),
            "hop2": [_kernel_info(k) for k in model.spatio_temporal.hop2],
        },
        "gbdt": {
            "learning_rate": float(model.gbdt.learning_rate),
            "base_score": float(model.gbdt.base_score),
            "feature_dim": int(model.gbdt.feature_dim),
            "num_trees": model.gbdt.num_trees,
        },
    }
    writer.json("structure", structure)

    _write_kernel(writer, "spatial.hop1", model.spatial.hop1)
    _write_kernel_list(writer, "spatial.hop2", model.spatial.hop2)
    _write_pca_list(writer, "spatial.mid", model.spatial.mid_pca)

    _write_kernel(writer, "color.hop1", model.spatio_color.hop1)
    _write_kernel_list(writer, "color.hop2", model.spatio_color.hop2)
    _write_pca_list(writer, "color.low", model.spatio_color.low_pca)
    _write_pca_list(writer, "color.high", model.spatio_color.high_pca)

    if model.temporal.spectral is not None:
        _write_pca_list(writer, "temporal.spectral", [model.temporal.spectral])

    _write_kernel(writer, "st.hop1", model.spatio_temporal.hop1)
    _write_kernel_list(writer, "st.hop2", model.spatio_temporal.hop2)
    _write_pca_list(writer, "st.low", model.spatio_temporal.low_pca)
    _write_pca_list(writer, "st.high", model.spatio_temporal.high_pca)

    for kind in KINDS:
        writer.array(f"select.{kind}", model.selector.selected[kind],
                     dtype="<i8")

    trees = model.gbdt.trees
    offsets = np.zeros(len(trees) + 1, dtype=np.int64)
    for i, tree in enumerate(trees):
        offsets[i + 1] = offsets[i] + tree.num_nodes
    def _concat(attr, dtype):
        if not trees:
            return np.zeros(0, dtype=dtype)
        return np.concatenate([getattr(t, attr) for t in trees])
    writer.array("gbdt.offsets", offsets, dtype="<i8")
    writer.array("gbdt.feature", _concat("feature", np.int32), dtype="<i4")
    writer.array("gbdt.threshold", _concat("threshold", np.float64))
    writer.array("gbdt.left", _concat("left", np.int32), dtype="<i4")
    writer.array("gbdt.right", _concat("right", np.int32), dtype="<i4")
    writer.array("gbdt.value", _concat("value", np.float64))
    writer.array("gbdt.val_rmse",
                 np.asarray(model.gbdt.val_rmse_history, dtype=np.float64))

    return writer.finish(model.format_version)


def deserialize(data: bytes) -> TrainedModel:
    """Decode bytes produced by `serialize`, validating framing and checksums."""
    sections = _read_sections(data)
    try:
        structure = sections["structure"]
        config = RunConfig.from_dict(sections["config"])
        metadata = sections["metadata"]

        s = structure["spatial"]
        spatial = SpatialPipeline(
            hop1=_read_kernel(sections, "spatial.hop1", s["hop1"]),
            hop2=_read_kernel_list(sections, "spatial.hop2", s["hop2"]),
            mid_pca=_read_pca_list(sections, "spatial.mid"),
            pca_n=int(s["pca_n"]), input_size=int(s["input_size"]),
            dim=int(s["dim"]))

        c = structure["spatio_color"]
        spatio_color = SpatioColorPipeline(
            hop1=_read_kernel(sections, "color.hop1", c["hop1"]),
            hop2=_read_kernel_list(sections, "color.hop2", c["hop2"]),
            low_pca=_read_pca_list(sections, "color.low"),
            high_pca=_read_pca_list(sections, "color.high"),
            pca_n_low=int(c["pca_n_low"]), pca_n_high=int(c["pca_n_high"]),
            input_size=int(c["input_size"]), dim=int(c["dim"]))

        t = structure["temporal"]
        spectral = None
        if t["has_spectral"]:
            spectral = _read_pca_list(sections, "temporal.spectral")[0]
        temporal = TemporalPipeline(
            sub_video_len=int(t["sub_video_len"]),
            block_size=int(t["block_size"]),
            search_range=int(t["search_range"]),
            sig_threshold=float(t["sig_threshold"]),
            spectral=spectral, dim=int(t["dim"]))

        st = structure["spatio_temporal"]
        spatio_temporal = SpatioTemporalPipeline(
            hop1=_read_kernel(sections, "st.hop1", st["hop1"]),
            hop2=_read_kernel_list(sections, "st.hop2", st["hop2"]),
            low_pca=_read_pca_list(sections, "st.low"),
            high_pca=_read_pca_list(sections, "st.high"),
            pca_n_low=int(st["pca_n_low"]), pca_n_high=int(st["pca_n_high"]),
            input_dims=tuple(st["input_dims"]), dim=int(st["dim"]))

        selector = FeatureSelector(
            selected={kind: sections[f"select.{kind}"] for kind in KINDS})

        g = structure["gbdt"]
        offsets = sections["gbdt.offsets"]
        trees = []
        for i in range(int(g["num_trees"])):
            lo, hi = int(offsets[i]), int(offsets[i + 1])
            trees.append(RegressionTree(
                feature=sections["gbdt.feature"][lo:hi].copy(),
                threshold=sections["gbdt.threshold"][lo:hi].copy(),
                left=sections["gbdt.left"][lo:hi].copy(),
                right=sections["gbdt.right"][lo:hi].copy(),
                value=sections["gbdt.value"][lo:hi].copy()))
        gbdt = GbdtModel(trees=trees, learning_rate=float(g["learning_rate"]),
                         base_score=float(g["base_score"]),
                         feature_dim=int(g["feature_dim"]),
                         val_rmse_history=sections["gbdt.val_rmse"].tolist())
    except KeyError as missing:
        raise FormatError(f"missing section or field {missing}") from None

    return TrainedModel(
        format_version=FORMAT_VERSION, config=config, spatial=spatial,
        spatio_color=spatio_color, temporal=temporal,
        spatio_temporal=spatio_temporal, selector=selector, gbdt=gbdt,
        metadata=metadata)


def save_model(model: TrainedModel, path) -> int:
    data = serialize(model)
    with open(path, "wb") as fh:
        fh.write(data)
    return len(data)


def load_model(path) -> TrainedModel:
    with open(path, "rb") as fh:
        return deserialize(fh.read())
