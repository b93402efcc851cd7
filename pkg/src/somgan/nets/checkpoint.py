"""Checkpointing: a torch parameter blob plus a portable JSON sidecar.

The sidecar fully describes how to rebuild the networks (mode, dims, latent
width, stage/alpha, channel schedule, step, config hash) and is validated
before the blob is opened.  Blobs are written atomically.
"""
import json
import os
import tempfile

import torch

from ..errors import DataIntegrityError
from .progressive import ProgressiveDiscriminator, ProgressiveGenerator
from .styled import StyledGenerator

SIDECAR_VERSION = 1

_REQUIRED = ("sidecar_version", "mode", "dims", "latent_dim", "stage", "alpha",
             "base_channels", "max_channels", "max_stage", "step", "config_hash")


def _atomic_write(path, data: bytes):
    fd, tmp = tempfile.mkstemp(dir=os.path.dirname(os.path.abspath(path)) or ".")
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def sidecar_path(checkpoint_path):
    return os.fspath(checkpoint_path) + ".json"


def generator_metadata(gen):
    meta = {
        "mode": gen.mode,
        "dims": gen.dims,
        "latent_dim": gen.latent_dim,
        "stage": gen.stage,
        "alpha": float(gen.alpha),
        "base_channels": gen.base_channels,
        "max_channels": gen.max_channels,
        "max_stage": gen.max_stage,
        "padding_mode": gen.padding_mode,
        "equalized_lr": gen.equalized_lr,
    }
    if gen.mode == "styled":
        meta["mapping_depth"] = gen.mapping_depth
        meta["noise_scale_init"] = gen.noise_scale_init
    else:
        meta["pixelnorm"] = gen.pixelnorm
    return meta


def save_checkpoint(path, gen, disc=None, step=0, config_hash="", extra_state=None,
                    extra_meta=None):
    sidecar = {"sidecar_version": SIDECAR_VERSION, "step": int(step),
               "config_hash": config_hash}
    sidecar.update(generator_metadata(gen))
    if extra_meta:
        sidecar.update(extra_meta)
    blob = {"generator": gen.state_dict()}
    if disc is not None:
        blob["discriminator"] = disc.state_dict()
        sidecar["disc_minibatch_stddev"] = disc.minibatch_stddev
    if extra_state:
        blob.update(extra_state)

    buf = tempfile.SpooledTemporaryFile()
    torch.save(blob, buf)
    buf.seek(0)
    _atomic_write(path, buf.read())
    _atomic_write(sidecar_path(path), json.dumps(sidecar, indent=1, sort_keys=True).encode())
    return sidecar


def read_sidecar(path):
    sp = sidecar_path(path)
    if not os.path.exists(sp):
        raise DataIntegrityError(f"checkpoint sidecar missing: {sp}")
    with open(sp, "rb") as f:
        try:
            sidecar = json.load(f)
        except json.JSONDecodeError as exc:
            raise DataIntegrityError(f"unreadable checkpoint sidecar {sp}: {exc}") from exc
    missing = [k for k in _REQUIRED if k not in sidecar]
    if missing:
        raise DataIntegrityError(f"checkpoint sidecar {sp} missing fields: {missing}")
    if sidecar["sidecar_version"] != SIDECAR_VERSION:
        raise DataIntegrityError(
            f"unsupported checkpoint sidecar version {sidecar['sidecar_version']}")
    return sidecar


def build_generator(sidecar):
    kwargs = dict(dims=sidecar["dims"], latent_dim=sidecar["latent_dim"],
                  max_stage=sidecar["max_stage"],
                  base_channels=sidecar["base_channels"],
                  max_channels=sidecar["max_channels"],
                  padding_mode=sidecar["padding_mode"],
                  equalized_lr=sidecar["equalized_lr"])
    if sidecar["mode"] == "styled":
        gen = StyledGenerator(mapping_depth=sidecar["mapping_depth"],
                              noise_scale_init=sidecar["noise_scale_init"], **kwargs)
    else:
        gen = ProgressiveGenerator(pixelnorm=sidecar["pixelnorm"],
                                   start_stage=sidecar["stage"], **kwargs)
        gen.mode = sidecar["mode"]
    gen.alpha = sidecar["alpha"]
    return gen


def build_discriminator(sidecar):
    start = sidecar["stage"] if sidecar["mode"] != "styled" else sidecar["max_stage"]
    disc = ProgressiveDiscriminator(
        dims=sidecar["dims"], max_stage=sidecar["max_stage"],
        base_channels=sidecar["base_channels"], max_channels=sidecar["max_channels"],
        minibatch_stddev=sidecar.get("disc_minibatch_stddev", True),
        padding_mode=sidecar["padding_mode"], equalized_lr=sidecar["equalized_lr"],
        start_stage=start)
    disc.alpha = sidecar["alpha"]
    return disc


def load_checkpoint(path, with_discriminator=False, expect_config_hash=None):
    """Validate the sidecar, rebuild the networks, then load the blob."""
    sidecar = read_sidecar(path)
    if expect_config_hash is not None and sidecar["config_hash"] != expect_config_hash:
        raise DataIntegrityError(
            f"checkpoint config hash {sidecar['config_hash']!r} does not match "
            f"expected {expect_config_hash!r}")
    blob = torch.load(path, map_location="cpu", weights_only=True)
    gen = build_generator(sidecar)
    gen.load_state_dict(blob["generator"])
    gen.eval()
    result = {"generator": gen, "sidecar": sidecar, "blob": blob}
    if with_discriminator:
        if "discriminator" not in blob:
            raise DataIntegrityError(f"checkpoint {path} holds no discriminator state")
        disc = build_discriminator(sidecar)
        disc.load_state_dict(blob["discriminator"])
        result["discriminator"] = disc
    return result
