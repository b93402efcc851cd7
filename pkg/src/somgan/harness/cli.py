"""Command-line interface.

Subcommands: simulate, train, sample, eval-fid, eval-snr, style-mix, and
pipeline (train every configured mode, then evaluate).  Every option
shadows a config key via repeatable --override section.key=value flags;
option values win over file values, and the merged effective config is
archived with each run.  SOMGAN_RUN_ROOT sets the default output root.

Exit codes: 0 success, 2 config error, 3 data-integrity error,
4 numerical failure.
"""
import json
import os
import sys

import click
import numpy as np

from ..errors import ConfigError, DataIntegrityError, NumericalError, ParameterError
from ..evaluation import get_extractor, slice_fid
from ..nets import load_checkpoint, sample_fields
from ..training import train as run_train
from . import gridviz
from .config import apply_overrides, config_hash, load_config
from .dataset import (
    default_roi,
    default_signal_spec,
    load_domain,
    simulate_dataset,
)
from .pipeline import evaluate_run, run_pipeline, train_config_from


def _run_root():
    return os.environ.get("SOMGAN_RUN_ROOT", "runs")


def _load(config_path, overrides):
    cfg = load_config(config_path)
    return apply_overrides(cfg, overrides) if overrides else cfg


@click.group()
def cli():
    """Learn stochastic object models from noisy imaging measurements."""


config_opt = click.option("--config", "-c", "config_path", required=True,
                          type=click.Path(), help="experiment config (TOML)")
override_opt = click.option("--override", "-o", "overrides", multiple=True,
                            metavar="SECTION.KEY=VALUE",
                            help="override a config value (repeatable)")


@cli.command()
@config_opt
@override_opt
@click.option("--out", type=click.Path(), required=True, help="dataset directory")
def simulate(config_path, overrides, out):
    """Simulate an object/measurement/reconstruction dataset."""
    cfg = _load(config_path, overrides)
    manifests = simulate_dataset(cfg, out)
    click.echo(json.dumps({d: m["content_hash"] for d, m in manifests.items()},
                          indent=1, sort_keys=True))


@cli.command()
@config_opt
@override_opt
@click.option("--data", type=click.Path(), required=True, help="dataset directory")
@click.option("--out", type=click.Path(), default=None, help="run directory")
@click.option("--mode", type=click.Choice(["ambient", "baseline"]), default=None,
              help="train a single mode (default: first configured mode)")
@click.option("--resume", type=click.Path(), default=None, help="checkpoint to resume")
def train(config_path, overrides, data, out, mode, resume):
    """Train one adversarial model on an existing dataset."""
    cfg = _load(config_path, overrides)
    from .pipeline import check_dataset_matches

    check_dataset_matches(cfg, data)
    mode = mode or cfg.train.modes[0]
    out = out or os.path.join(_run_root(), f"{cfg.name}-{mode}")
    os.makedirs(out, exist_ok=True)
    with open(os.path.join(out, "effective_config.json"), "w") as f:
        json.dump({"config": cfg.to_dict(), "config_hash": config_hash(cfg)},
                  f, indent=1, sort_keys=True)
    tcfg = train_config_from(cfg, mode)
    domain = "measurements" if mode == "ambient" else "recons"
    payload, _ = load_domain(data, domain)
    result = run_train(payload, tcfg, out, resume=resume)
    click.echo(f"checkpoint: {result.checkpoint_path}")
    click.echo(f"metrics: {result.metrics_path}")


@cli.command()
@config_opt
@override_opt
@click.option("--data", type=click.Path(), required=True)
@click.option("--out", type=click.Path(), default=None, help="run directory")
@click.option("--max-steps", type=int, default=None, hidden=True)
def pipeline(config_path, overrides, data, out, max_steps):
    """Train every configured mode on a dataset, then evaluate and report."""
    cfg = _load(config_path, overrides)
    out = out or os.path.join(_run_root(), cfg.name)
    report = run_pipeline(cfg, data, out, max_steps=max_steps)
    click.echo(json.dumps(report["rows"], indent=1, sort_keys=True))
    click.echo(f"report: {os.path.join(out, 'report.json')}")


@cli.command()
@click.option("--checkpoint", type=click.Path(), required=True)
@click.option("--n", type=int, default=16, help="number of samples")
@click.option("--seed", type=int, default=0)
@click.option("--out", type=click.Path(), required=True, help=".npy output path")
@click.option("--png", type=click.Path(), default=None, help="optional preview grid")
def sample(checkpoint, n, seed, out, png):
    """Draw object samples from a trained generator."""
    gen = load_checkpoint(checkpoint)["generator"]
    fields = sample_fields(gen, n, seed=seed)
    np.save(out, fields)
    click.echo(f"samples: {out} shape={fields.shape}")
    if png:
        side = int(np.ceil(np.sqrt(n)))
        tiles = fields[:, None] if fields.ndim == 3 else fields[:, fields.shape[1] // 2][:, None]
        padded = np.zeros((side * side, *tiles.shape[2:]), dtype=np.float32)
        padded[:n] = tiles[:, 0]
        grid = padded.reshape(side, side, *tiles.shape[2:])
        canvas, _ = gridviz.render_grid(grid)
        from PIL import Image

        Image.fromarray(canvas, mode="L").save(png)
        click.echo(f"preview: {png}")


def _model_ensemble(checkpoint, samples, n, seed):
    if (checkpoint is None) == (samples is None):
        raise ConfigError("provide exactly one of --checkpoint or --samples")
    if checkpoint is not None:
        gen = load_checkpoint(checkpoint)["generator"]
        return sample_fields(gen, n, seed=seed), f"checkpoint:{checkpoint}"
    return np.load(samples)[:n].astype(np.float32), f"file:{samples}"


@cli.command("eval-fid")
@config_opt
@override_opt
@click.option("--data", type=click.Path(), required=True, help="dataset directory")
@click.option("--checkpoint", type=click.Path(), default=None)
@click.option("--samples", type=click.Path(), default=None, help=".npy ensemble")
@click.option("--axis", default=None, help="sagittal|coronal|axial (3-d data)")
@click.option("--out", type=click.Path(), default=None, help="report JSON path")
def eval_fid(config_path, overrides, data, checkpoint, samples, axis, out):
    """Slice-FID of a model ensemble against the clean ground-truth objects."""
    cfg = _load(config_path, overrides)
    objects, _ = load_domain(data, "objects")
    ens, source = _model_ensemble(checkpoint, samples, cfg.eval.n_samples, cfg.eval.seed + 1)
    gt = objects[: cfg.eval.n_samples].astype(np.float32)
    extractor = get_extractor(cfg.eval.fid_extractor)
    axes = [axis] if axis else (list(cfg.eval.axes) if cfg.objects.dims == 3 else ["slice"])
    values = {ax: float(slice_fid(ens, gt, axis=None if ax == "slice" else ax,
                                  extractor=extractor)) for ax in axes}
    record = {
        "metric": "slice-fid",
        "axis": values,
        "extractor": extractor.name,
        "ensemble_ids": {"a": source, "b": f"dataset:{data}:objects"},
        "sample_counts": {"a": int(len(ens)), "b": int(len(gt))},
        "ridge_eps": 0.0,
        "value": values[axes[0]] if len(axes) == 1 else values,
        "seed": cfg.eval.seed,
    }
    _emit(record, out)


@cli.command("eval-snr")
@config_opt
@override_opt
@click.option("--data", type=click.Path(), required=True)
@click.option("--checkpoint", type=click.Path(), default=None)
@click.option("--samples", type=click.Path(), default=None)
def eval_snr(config_path, overrides, data, checkpoint, samples):
    """Hotelling SNR of the ground truth and (optionally) a model ensemble."""
    cfg = _load(config_path, overrides)
    objects, manifest = load_domain(data, "objects")
    defaults = manifest["eval_defaults"]
    sig = default_signal_spec(cfg, defaults["signal_amplitude"])
    roi = default_roi(cfg)

    from ..evaluation import snr_study

    def study_of(ens, tag):
        draws = max(1, int(np.ceil(cfg.eval.snr_samples / len(ens))))
        rng = np.random.default_rng(np.random.SeedSequence([cfg.eval.seed, tag]))
        return snr_study(ens.astype(np.float64), sig, defaults["task_noise_std"],
                         roi, rng, draws_per_object=draws)

    gt = objects[: cfg.eval.n_samples].astype(np.float32)
    records = []
    study = study_of(gt, 0)
    records.append({"metric": "hotelling-snr", "axis": None, "extractor": None,
                    "ensemble_ids": {"a": f"dataset:{data}:objects"},
                    "sample_counts": {"a": study.covariance.n_samples},
                    "ridge_eps": study.covariance.ridge_eps,
                    "value": study.snr, "seed": cfg.eval.seed})
    if checkpoint or samples:
        ens, source = _model_ensemble(checkpoint, samples, cfg.eval.n_samples,
                                      cfg.eval.seed + 1)
        study = study_of(ens, 1)
        records.append({"metric": "hotelling-snr", "axis": None, "extractor": None,
                        "ensemble_ids": {"a": source},
                        "sample_counts": {"a": study.covariance.n_samples},
                        "ridge_eps": study.covariance.ridge_eps,
                        "value": study.snr, "seed": cfg.eval.seed})
    _emit(records, None)


@cli.command("style-mix")
@click.option("--checkpoint", type=click.Path(), required=True)
@click.option("--latents", type=int, default=8)
@click.option("--noise", type=int, default=4)
@click.option("--seed", type=int, default=0)
@click.option("--out", type=click.Path(), required=True, help="grid PNG path")
def style_mix(checkpoint, latents, noise, seed, out):
    """Same-style rows with varying noise maps: grid PNG + raw fields."""
    fields = gridviz.style_mix_grid(checkpoint, latents, noise, out, seed=seed)
    within, between = gridviz.within_between_correlation(fields)
    click.echo(json.dumps({"grid": os.fspath(out), "within_row_corr": within,
                           "between_row_corr": between}, indent=1))


@cli.command("eval-report")
@config_opt
@override_opt
@click.option("--data", type=click.Path(), required=True)
@click.option("--run", type=click.Path(), required=True, help="existing run directory")
def eval_report(config_path, overrides, data, run):
    """Regenerate a run's report from its stored checkpoints (no retraining)."""
    cfg = _load(config_path, overrides)
    report = evaluate_run(cfg, data, run)
    click.echo(json.dumps(report["rows"], indent=1, sort_keys=True))


def _emit(record, out):
    text = json.dumps(record, indent=1, sort_keys=True)
    if out:
        with open(out, "w") as f:
            f.write(text)
    click.echo(text)


def main():
    try:
        cli.main(standalone_mode=False)
    except click.exceptions.Abort:
        sys.exit(1)
    except click.ClickException as exc:
        exc.show()
        sys.exit(2)
    except (ConfigError, ParameterError) as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(2)
    except DataIntegrityError as exc:
        click.echo(f"data integrity error: {exc}", err=True)
        sys.exit(3)
    except NumericalError as exc:
        click.echo(f"numerical failure: {exc}", err=True)
        sys.exit(4)


if __name__ == "__main__":
    main()
