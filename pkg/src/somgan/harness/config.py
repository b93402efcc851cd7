"""Experiment configuration: one TOML file fully determines a run.

Sections: [objects], [imaging], [model], [train], [eval].  Unknown sections
or keys are rejected.  Two hashes derive from the validated config: the full
config hash (embedded in every artifact a run produces) and the data hash
over the dataset-determining parts ([objects] + [imaging]), which ties
datasets to the runs that consume them without invalidating a dataset when
only training or evaluation settings change.
"""
import ast
import dataclasses
import hashlib
import json
from dataclasses import dataclass, field

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from ..errors import ConfigError


@dataclass
class ObjectsSection:
    family: str = "lumpy"              # lumpy | clustered
    dims: int = 2
    size: object = 64                  # per-axis int or list
    count: int = 5000
    mean_count: float = 80.0
    amplitude: float = 1.0
    width: float = 2.5
    mean_cluster_count: float = 10.0
    mean_blobs_per_cluster: float = 8.0
    cluster_spread: float = 4.0
    normalize: bool = True
    seed: int = 1000

    def __post_init__(self):
        if self.family not in ("lumpy", "clustered"):
            raise ConfigError(f"objects.family must be lumpy or clustered, got {self.family!r}")
        if self.dims not in (2, 3):
            raise ConfigError(f"objects.dims must be 2 or 3, got {self.dims}")
        if self.count < 1:
            raise ConfigError("objects.count must be positive")

    @property
    def shape(self):
        size = self.size
        if isinstance(size, (list, tuple)):
            shape = tuple(int(s) for s in size)
        else:
            shape = (int(size),) * self.dims
        if len(shape) != self.dims:
            raise ConfigError(f"objects.size {self.size} does not match dims {self.dims}")
        return shape


@dataclass
class ImagingSection:
    noise_std: float = 0.3

    def __post_init__(self):
        if self.noise_std < 0:
            raise ConfigError("imaging.noise_std must be >= 0")


@dataclass
class ModelSection:
    arch: str = "progressive"          # plain | progressive | styled
    latent_dim: int = 64
    base_channels: int = 32
    max_channels: int = 128
    mapping_depth: int = 4
    noise_scale_init: float = 0.1
    pixelnorm: bool = True
    minibatch_stddev: bool = True
    equalized_lr: bool = True
    padding_mode: str = "circular"

    def __post_init__(self):
        if self.arch not in ("plain", "progressive", "styled"):
            raise ConfigError(f"model.arch must be plain/progressive/styled, got {self.arch!r}")


@dataclass
class TrainSection:
    modes: list = field(default_factory=lambda: ["ambient"])
    loss: str = "logistic"
    batch_size: object = 16
    images_per_stage: int = 48_000
    fade_fraction: float = 0.5
    total_images: int = 0
    lr_g: float = 1e-3
    lr_d: float = 1e-3
    adam_beta1: float = 0.0
    adam_beta2: float = 0.99
    r1_gamma: float = 10.0
    r1_interval: int = 16
    gp_weight: float = 10.0
    ema_decay: float = 0.0
    seed: int = 7
    log_interval: int = 50
    checkpoint_interval: int = 0

    def __post_init__(self):
        if isinstance(self.modes, str):
            self.modes = [self.modes]
        for m in self.modes:
            if m not in ("ambient", "baseline"):
                raise ConfigError(f"train.modes entries must be ambient/baseline, got {m!r}")
        if not self.modes:
            raise ConfigError("train.modes must name at least one mode")


@dataclass
class EvalSection:
    n_samples: int = 5000
    fid_extractor: str = "pixel16"
    axes: list = field(default_factory=lambda: ["axial", "coronal", "sagittal"])
    signal_radius: float = 2.0
    signal_amplitude: float = 0.0      # <= 0: calibrate to snr_target at simulate time
    snr_target: float = 2.0
    task_noise_std: float = 0.1
    roi_side: int = 8
    snr_samples: int = 5000
    highband_frac: float = 0.75
    seed: int = 99

    def __post_init__(self):
        if self.n_samples < 2:
            raise ConfigError("eval.n_samples must be >= 2")
        if self.task_noise_std < 0:
            raise ConfigError("eval.task_noise_std must be >= 0")


_SECTIONS = {
    "objects": ObjectsSection,
    "imaging": ImagingSection,
    "model": ModelSection,
    "train": TrainSection,
    "eval": EvalSection,
}


@dataclass
class ExperimentConfig:
    name: str = "experiment"
    objects: ObjectsSection = field(default_factory=ObjectsSection)
    imaging: ImagingSection = field(default_factory=ImagingSection)
    model: ModelSection = field(default_factory=ModelSection)
    train: TrainSection = field(default_factory=TrainSection)
    eval: EvalSection = field(default_factory=EvalSection)

    @property
    def final_stage(self):
        side = self.objects.shape[0]
        stage = (side // 4).bit_length() - 1
        if 4 * 2**stage != side or len(set(self.objects.shape)) != 1:
            raise ConfigError(
                f"field shape {self.objects.shape} must be cubic with side 4*2^k")
        return stage

    def to_dict(self):
        return {"name": self.name,
                **{k: dataclasses.asdict(getattr(self, k)) for k in _SECTIONS}}


def _build_section(cls, data, section):
    fields = {f.name for f in dataclasses.fields(cls)}
    unknown = set(data) - fields
    if unknown:
        raise ConfigError(f"unknown keys in [{section}]: {sorted(unknown)}")
    try:
        return cls(**data)
    except TypeError as exc:
        raise ConfigError(f"invalid [{section}] section: {exc}") from exc


def config_from_dict(data: dict) -> ExperimentConfig:
    data = dict(data)
    name = data.pop("name", "experiment")
    unknown = set(data) - set(_SECTIONS)
    if unknown:
        raise ConfigError(f"unknown config sections: {sorted(unknown)}")
    sections = {key: _build_section(cls, data.get(key, {}), key)
                for key, cls in _SECTIONS.items()}
    return ExperimentConfig(name=name, **sections)


def load_config(path) -> ExperimentConfig:
    try:
        with open(path, "rb") as f:
            raw = tomllib.load(f)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc
    return config_from_dict(raw)


def apply_overrides(cfg: ExperimentConfig, overrides) -> ExperimentConfig:
    """Apply 'section.key=value' strings on top of a loaded config."""
    data = cfg.to_dict()
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not of the form section.key=value")
        key, _, raw = item.partition("=")
        try:
            value = ast.literal_eval(raw)
        except (ValueError, SyntaxError):
            value = raw
        if "." in key:
            section, _, name = key.partition(".")
            if section not in _SECTIONS:
                raise ConfigError(f"override targets unknown section {section!r}")
            data[section][name] = value
        elif key == "name":
            data["name"] = str(value)
        else:
            raise ConfigError(f"override key {key!r} must be name or section.key")
    return config_from_dict(data)


def _canonical(data) -> bytes:
    return json.dumps(data, sort_keys=True, separators=(",", ":")).encode()


def config_hash(cfg: ExperimentConfig) -> str:
    return hashlib.sha256(_canonical(cfg.to_dict())).hexdigest()[:16]


def data_hash(cfg: ExperimentConfig) -> str:
    d = cfg.to_dict()
    return hashlib.sha256(_canonical({"objects": d["objects"],
                                      "imaging": d["imaging"]})).hexdigest()[:16]
