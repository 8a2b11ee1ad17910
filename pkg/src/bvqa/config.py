"""Run configuration: defaults, flat key=value config files, validation.

Every key has a default; a config file only overrides.  Unknown keys are
rejected so typos fail loudly instead of silently running defaults.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, fields
from pathlib import Path

from .errors import ConfigError

_KIND_KEYS = {
    "spatial": "select_spatial",
    "spatio_color": "select_spatio_color",
    "temporal": "select_temporal",
    "spatio_temporal": "select_spatio_temporal",
}


@dataclass
class RunConfig:
    # cropping
    sub_video_len: int = 30
    sub_image_size: int = 320
    sub_images_per_frame: int = 6
    sub_cube_dims: tuple[int, int, int] = (96, 96, 15)
    crop_seed: int = 0
    # motion
    mv_block_size: int = 16
    mv_search_range: int = 8
    mv_sig_threshold: float = 1.0
    # representations
    pca_per_channel_n: int = 8
    temporal_spectral_enabled: bool = False
    temporal_spectral_n: int = 64
    fit_min_samples: int = 1000
    fit_max_patches: int = 100000
    # feature selection
    rft_partitions: int = 16
    select_spatial: int = 220
    select_spatio_color: int = 200
    select_temporal: int = 140
    select_spatio_temporal: int = 240
    # regression
    gbdt_max_depth: int = 5
    gbdt_subsample: float = 0.6
    gbdt_max_trees: int = 2000
    gbdt_learning_rate: float = 0.05
    gbdt_patience: int = 50
    gbdt_min_samples_leaf: int = 5
    # evaluation protocol
    test_fraction: float = 0.2
    val_fraction: float = 0.1
    threads: int = 0  # 0 = all available cores

    def select_counts(self) -> dict[str, int]:
        return {kind: getattr(self, key) for kind, key in _KIND_KEYS.items()}

    def validate(self) -> None:
        if self.sub_video_len < 2:
            raise ConfigError("sub_video_len must be >= 2")
        if self.sub_image_size < 8 or self.sub_image_size % 8:
            raise ConfigError("sub_image_size must be a positive multiple of 8")
        if self.sub_images_per_frame < 1:
            raise ConfigError("sub_images_per_frame must be >= 1")
        h, w, t = self.sub_cube_dims
        if h < 1 or w < 1 or t < 1:
            raise ConfigError(f"bad sub_cube_dims {self.sub_cube_dims}")
        if h > self.sub_image_size or w > self.sub_image_size or t > self.sub_video_len:
            raise ConfigError("sub_cube_dims exceed the cube geometry")
        if self.mv_block_size < 1 or self.sub_image_size % self.mv_block_size:
            raise ConfigError("mv_block_size must divide sub_image_size")
        if self.mv_search_range < 0:
            raise ConfigError("mv_search_range must be >= 0")
        if self.pca_per_channel_n < 1:
            raise ConfigError("pca_per_channel_n must be >= 1")
        if self.temporal_spectral_n < 1:
            raise ConfigError("temporal_spectral_n must be >= 1")
        if self.fit_min_samples < 2:
            raise ConfigError("fit_min_samples must be >= 2")
        if self.fit_max_patches < 1000:
            raise ConfigError("fit_max_patches must be >= 1000")
        if self.rft_partitions < 1:
            raise ConfigError("rft_partitions must be >= 1")
        for key in _KIND_KEYS.values():
            if getattr(self, key) < 1:
                raise ConfigError(f"{key} must be >= 1")
        if not 0.0 < self.gbdt_subsample <= 1.0:
            raise ConfigError("gbdt_subsample must be in (0, 1]")
        if self.gbdt_max_depth < 1 or self.gbdt_max_trees < 1:
            raise ConfigError("gbdt_max_depth and gbdt_max_trees must be >= 1")
        if self.gbdt_learning_rate <= 0:
            raise ConfigError("gbdt_learning_rate must be > 0")
        if self.gbdt_patience < 1 or self.gbdt_min_samples_leaf < 1:
            raise ConfigError("gbdt_patience and gbdt_min_samples_leaf must be >= 1")
        if not 0.0 < self.test_fraction < 1.0:
            raise ConfigError("test_fraction must be in (0, 1)")
        if not 0.0 < self.val_fraction < 1.0:
            raise ConfigError("val_fraction must be in (0, 1)")
        if self.threads < 0:
            raise ConfigError("threads must be >= 0")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["sub_cube_dims"] = list(self.sub_cube_dims)
        return d

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        kwargs = dict(data)
        if "sub_cube_dims" in kwargs:
            dims = kwargs["sub_cube_dims"]
            if len(dims) != 3:
                raise ConfigError(f"sub_cube_dims needs 3 values, got {dims}")
            kwargs["sub_cube_dims"] = tuple(int(v) for v in dims)
        cfg = cls(**kwargs)
        cfg.validate()
        return cfg

    @classmethod
    def from_file(cls, path) -> "RunConfig":
        """Parse a flat ``key=value`` file; '#' starts a comment line."""
        path = Path(path)
        if not path.exists():
            raise FileNotFoundError(f"config file not found: {path}")
        types = {f.name: f.type for f in fields(cls)}
        data: dict = {}
        for line_num, line in enumerate(path.read_text().splitlines(), start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise ConfigError(f"line {line_num}: expected key=value, got {line!r}")
            key, value = key.strip(), value.strip()
            if key not in types:
                raise ConfigError(f"line {line_num}: unknown config key {key!r}")
            try:
                data[key] = _parse_value(key, value)
            except ValueError as exc:
                raise ConfigError(f"line {line_num}: {exc}") from None
        return cls.from_dict(data)


def _parse_value(key: str, value: str):
    if key == "sub_cube_dims":
        parts = [p for p in value.replace(" ", "").split(",") if p]
        if len(parts) != 3:
            raise ValueError(f"sub_cube_dims needs 3 comma-separated ints: {value!r}")
        return tuple(int(p) for p in parts)
    if key == "temporal_spectral_enabled":
        lowered = value.lower()
        if lowered in ("true", "1", "yes", "on"):
            return True
        if lowered in ("false", "0", "no", "off"):
            return False
        raise ValueError(f"expected a boolean for {key}, got {value!r}")
    if key in ("mv_sig_threshold", "gbdt_subsample", "gbdt_learning_rate",
               "test_fraction", "val_fraction"):
        return float(value)
    return int(value)
