"""Dataset persistence: one payload file per domain plus a JSON manifest.

Payloads are concatenated samples, C-order, little-endian: float32 for
object and reconstruction fields, interleaved real/imag float32 pairs for
measurements (the memory layout of complex64).  Manifests record shape,
dtype, normalization, full generator parameters, seeds, the payload SHA-256
and the config/data hashes; loaders verify sizes, hashes and the manifest
major version.  Writes are atomic (temp file + rename).
"""
import hashlib
import json
import os
import tempfile

import numpy as np

from ..errors import ConfigError, DataIntegrityError
from ..evaluation import ROISpec, snr_study
from ..imaging import ImagingConfig, measure, reconstruct
from ..objects import (
    KERNEL_BACKEND,
    ClusteredLumpyParams,
    LumpyParams,
    SignalSpec,
    sample_ensemble,
)
from .config import ExperimentConfig, config_hash, data_hash

MANIFEST_VERSION = "1.0"

_DTYPES = {
    "float32": np.dtype("<f4"),
    "complex-as-float32-pairs": np.dtype("<c8"),
}


def _atomic_write_bytes(path, data: bytes):
    fd, tmp = tempfile.mkstemp(dir=os.path.dirname(os.path.abspath(path)))
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def payload_name(domain):
    return f"{domain}.bin"


def manifest_name(domain):
    return f"{domain}.manifest.json"


def object_params_from_config(cfg: ExperimentConfig):
    o = cfg.objects
    if o.family == "lumpy":
        return LumpyParams(field_shape=o.shape, mean_count=o.mean_count,
                           amplitude=o.amplitude, width=o.width)
    return ClusteredLumpyParams(field_shape=o.shape,
                                mean_cluster_count=o.mean_cluster_count,
                                mean_blobs_per_cluster=o.mean_blobs_per_cluster,
                                cluster_spread=o.cluster_spread,
                                amplitude=o.amplitude, width=o.width)


def write_domain(out_dir, domain, payload: np.ndarray, manifest: dict):
    if payload.dtype == np.float32:
        dtype_tag = "float32"
    elif payload.dtype == np.complex64:
        dtype_tag = "complex-as-float32-pairs"
    else:
        raise ConfigError(f"unsupported payload dtype {payload.dtype}")
    raw = np.ascontiguousarray(payload.astype(_DTYPES[dtype_tag], copy=False)).tobytes()
    manifest = dict(manifest)
    manifest.update({
        "manifest_version": MANIFEST_VERSION,
        "domain": domain,
        "dims": payload.ndim - 1,
        "shape": list(payload.shape[1:]),
        "count": payload.shape[0],
        "dtype": dtype_tag,
        "endianness": "little",
        "content_hash": hashlib.sha256(raw).hexdigest(),
    })
    _atomic_write_bytes(os.path.join(out_dir, payload_name(domain)), raw)
    _atomic_write_bytes(os.path.join(out_dir, manifest_name(domain)),
                        json.dumps(manifest, indent=1, sort_keys=True).encode())
    return manifest


def read_manifest(dataset_dir, domain) -> dict:
    path = os.path.join(dataset_dir, manifest_name(domain))
    if not os.path.exists(path):
        raise DataIntegrityError(f"manifest not found: {path}")
    with open(path, "rb") as f:
        try:
            manifest = json.load(f)
        except json.JSONDecodeError as exc:
            raise DataIntegrityError(f"unreadable manifest {path}: {exc}") from exc
    version = str(manifest.get("manifest_version", ""))
    if version.split(".")[0] != MANIFEST_VERSION.split(".")[0]:
        raise DataIntegrityError(
            f"unsupported manifest major version {version!r} in {path}")
    return manifest


def load_domain(dataset_dir, domain, verify=True):
    """Returns (array, manifest); checks byte size and, if verify, the hash."""
    manifest = read_manifest(dataset_dir, domain)
    path = os.path.join(dataset_dir, payload_name(domain))
    if not os.path.exists(path):
        raise DataIntegrityError(f"payload not found: {path}")
    dtype = _DTYPES.get(manifest["dtype"])
    if dtype is None:
        raise DataIntegrityError(f"unknown payload dtype {manifest['dtype']!r}")
    shape = (manifest["count"], *manifest["shape"])
    expected = int(np.prod(shape)) * dtype.itemsize
    actual = os.path.getsize(path)
    if actual != expected:
        raise DataIntegrityError(
            f"payload {path} holds {actual} bytes, manifest implies {expected}")
    with open(path, "rb") as f:
        raw = f.read()
    if verify:
        digest = hashlib.sha256(raw).hexdigest()
        if digest != manifest["content_hash"]:
            raise DataIntegrityError(f"payload hash mismatch for {path}")
    return np.frombuffer(raw, dtype=dtype).reshape(shape), manifest


def default_signal_spec(cfg: ExperimentConfig, amplitude) -> SignalSpec:
    center = tuple(s // 2 for s in cfg.objects.shape)
    return SignalSpec(center=center, radius=cfg.eval.signal_radius, amplitude=amplitude)


def default_roi(cfg: ExperimentConfig) -> ROISpec:
    center = tuple(s // 2 for s in cfg.objects.shape)
    return ROISpec(center=center, side=cfg.eval.roi_side)


def calibrate_signal_amplitude(objects: np.ndarray, cfg: ExperimentConfig) -> float:
    """Scale the unit-amplitude signal so the ground-truth task SNR hits the target.

    SNR_HO is exactly linear in the signal amplitude for a fixed covariance,
    so one study at amplitude 1 suffices.
    """
    if cfg.eval.signal_amplitude > 0:
        return float(cfg.eval.signal_amplitude)
    subset = objects[: min(len(objects), 2000)].astype(np.float64)
    draws = max(1, int(np.ceil(4000 / len(subset))))
    study = snr_study(subset, default_signal_spec(cfg, 1.0), cfg.eval.task_noise_std,
                      default_roi(cfg), np.random.default_rng(
                          np.random.SeedSequence([cfg.objects.seed, 2])),
                      draws_per_object=draws)
    return float(cfg.eval.snr_target / study.snr)


def simulate_dataset(cfg: ExperimentConfig, out_dir) -> dict:
    """Simulate objects, measurements and reference reconstructions.

    Reconstructions are computed from the float32-quantized measurements, so
    a training loader that reconstructs the stored measurements reproduces
    the recons payload bit for bit.
    """
    os.makedirs(out_dir, exist_ok=True)
    params = object_params_from_config(cfg)
    raw = sample_ensemble(params, cfg.objects.count, seed=cfg.objects.seed)

    if cfg.objects.normalize:
        lo, hi = float(raw.min()), float(raw.max())
        scale = 1.0 / (hi - lo) if hi > lo else 1.0
        offset = -lo * scale
    else:
        scale, offset = 1.0, 0.0
    objects = (raw * np.float32(scale) + np.float32(offset)).astype(np.float32)

    imaging_cfg = ImagingConfig(dims=cfg.objects.dims, noise_std=cfg.imaging.noise_std)
    noise_rng = np.random.default_rng(np.random.SeedSequence([cfg.objects.seed, 1]))
    measurements = measure(objects.astype(np.float64), imaging_cfg, noise_rng)
    measurements = measurements.astype(np.complex64)
    recons = reconstruct(measurements, dims=cfg.objects.dims).astype(np.float32)

    amplitude = calibrate_signal_amplitude(objects, cfg)
    base = {
        "normalization": {"scale": scale, "offset": offset},
        "generator_params": {"objects": cfg.to_dict()["objects"],
                             "imaging": cfg.to_dict()["imaging"]},
        "seed": cfg.objects.seed,
        "config_hash": config_hash(cfg),
        "data_hash": data_hash(cfg),
        "kernel_backend": KERNEL_BACKEND,
        "eval_defaults": {
            "signal_amplitude": amplitude,
            "signal_radius": cfg.eval.signal_radius,
            "task_noise_std": cfg.eval.task_noise_std,
            "roi_side": cfg.eval.roi_side,
            "snr_target": cfg.eval.snr_target,
        },
        "links": {d: payload_name(d) for d in ("objects", "measurements", "recons")},
    }
    manifests = {
        "objects": write_domain(out_dir, "objects", objects, base),
        "measurements": write_domain(out_dir, "measurements", measurements, base),
        "recons": write_domain(out_dir, "recons", recons, base),
    }
    return manifests
