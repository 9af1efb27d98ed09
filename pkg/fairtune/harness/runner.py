import asyncio
import json
import logging
from pathlib import Path

from fairtune.data.csv_io import load_csv_dataset, write_csv_dataset
from fairtune.data.dataset import cell_counts
from fairtune.errors import ConfigurationError, EmptySelectionError, FairtuneError
from fairtune.harness.config import JTT, SWEEP_AXES
from fairtune.harness.jobs import DATASET_FILES, RunJob, build_data, load_data
from fairtune.harness.pool import run_jobs
from fairtune.harness.report import aggregate_outcomes, write_report
from fairtune.masks.selection import smg_mask
from fairtune.masks.serialize import save_mask
from fairtune.metrics.fairness import evaluate
from fairtune.net.serialize import load_model
from fairtune.seeding import fingerprint
from fairtune.training.config import Strategy
from fairtune.training.strategies import selection_snapshots


logger = logging.getLogger("fairtune")

BASE_POINT = "base"

LAYER_FREEZE_STRATEGIES = (Strategy.BLOCK_FREEZE, Strategy.BLOCK_UPDATE)

AXIS_STRATEGIES = {
    "layer_freeze": LAYER_FREEZE_STRATEGIES,
    "random_ratio": (Strategy.RANDOM_FINETUNE,),
}


def _write_json(path, payload):
    try:
        path.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n", encoding="utf-8")
    except OSError as err:
        raise FairtuneError(f"cannot write {path}: {err}") from err
    return path


def _mkdir(path):
    try:
        path.mkdir(parents=True, exist_ok=True)
    except OSError as err:
        raise FairtuneError(f"cannot create {path}: {err}") from err
    return path


def cmd_gen_data(config, out_path):
    """Write D_R, D_S1, D_S2 and the test set as CSV plus manifest.json"""
    out_path = _mkdir(Path(out_path))
    data = build_data(config)
    datasets = {}
    for name, filename in DATASET_FILES.items():
        dataset = getattr(data, name)
        write_csv_dataset(dataset, out_path / filename)
        datasets[name] = {
            "file": filename,
            "rows": len(dataset),
            "cells": {f"y{y}s{s}": n for (y, s), n in cell_counts(dataset).items()},
            "fingerprint": dataset.spec_fingerprint,
        }
    manifest = {
        "config_hash": config.config_hash(),
        "real_spec": config.real_spec.to_dict(),
        "data_seed": config.data_seed,
        "datasets": datasets,
    }
    _write_json(out_path / "manifest.json", manifest)
    logger.info(f"wrote {len(datasets)} datasets to {out_path}")
    return manifest


def _data_key(config):
    payload = {
        "real_spec": config.real_spec.to_dict(),
        "shift_magnitude": config.shift_magnitude,
        "s1_bias_ratio": config.s1_bias_ratio,
        "syn_ratio": config.syn_ratio,
        "real_fraction": config.real_fraction,
        "pool_per_cell": config.pool_per_cell,
        "test_per_cell": config.test_per_cell,
        "data_seed": config.data_seed,
    }
    if config.s1_bias_ratio == JTT:
        payload["arch"] = config.arch.to_dict()
    return fingerprint(payload)


def _jobs(points, strategies, config, output_dir, data_dir=None):
    """points: (label, value, point config) triples"""
    cache = {}
    jobs = []
    for label, value, point_config in points:
        point_config.validate()
        if data_dir is not None:
            if data_dir not in cache:
                cache[data_dir] = load_data(data_dir)
            data = cache[data_dir]
        else:
            key = _data_key(point_config)
            if key not in cache:
                cache[key] = build_data(point_config)
            data = cache[key]
        for strategy in strategies:
            for seed in config.seeds:
                jobs.append(RunJob(
                    point=label,
                    value=value,
                    strategy=Strategy(strategy),
                    seed=seed,
                    config=point_config,
                    data=data,
                    output_dir=output_dir,
                ))
    return jobs


def _execute(jobs, config):
    return asyncio.run(run_jobs(
        jobs,
        workers=config.workers,
        timeout=config.run_timeout,
        routing=config.routing,
    ))


def cmd_run(config, data_dir=None):
    """Every (strategy, seed) pair of the config on one data point"""
    output_dir = _mkdir(Path(config.output_dir))
    jobs = _jobs(
        [(BASE_POINT, None, config)], config.strategies, config, output_dir, data_dir
    )
    logger.info(
        f"running {len(config.strategies)} strategies over "\
        f"{len(config.seeds)} seeds into {output_dir}"
    )
    report = aggregate_outcomes("run", _execute(jobs, config), config.config_hash())
    write_report(report, output_dir, "summary.csv")
    return report


def _label(value):
    return f"{value:g}" if isinstance(value, float) else str(value)


def sweep_points(config, axis, values=None):
    if axis not in SWEEP_AXES:
        raise ConfigurationError(f"unknown sweep axis '{axis}', expected one of {SWEEP_AXES}")
    if axis == "layer_freeze":
        values = tuple(range(config.arch.num_blocks)) if values is None else tuple(values)
    elif values is None:
        values = tuple(config.sweeps.get(axis, ()))
    if not values:
        raise ConfigurationError(f"sweep axis '{axis}' has no values")

    points = []
    for value in values:
        if axis == "topk":
            point = config.replace(k=int(value), k_fraction=None)
        elif axis == "bias_ratio":
            point = config.replace(s1_bias_ratio=float(value))
        elif axis == "syn_amount":
            point = config.replace(syn_ratio=float(value))
        elif axis == "real_amount":
            point = config.replace(real_fraction=float(value))
        elif axis == "random_ratio":
            point = config.replace(random_fraction=float(value))
        else:
            point = config.replace(block=int(value))
        points.append((f"{axis}-{_label(value)}", value, point))
    return points


def cmd_sweep(config, axis, values=None):
    """One report row per (axis value, strategy) plus sweep_<axis>.csv"""
    points = sweep_points(config, axis, values)
    strategies = AXIS_STRATEGIES.get(axis, config.strategies)
    output_dir = _mkdir(Path(config.output_dir) / "sweeps" / axis)
    jobs = _jobs(points, strategies, config, output_dir)
    logger.info(f"sweeping {axis} over {len(points)} points, {len(jobs)} runs")
    report = aggregate_outcomes(axis, _execute(jobs, config), config.config_hash())
    if axis == "random_ratio":
        ## random selection keeps its best ratio
        best = report.best_row()
        if best is not None:
            report.best = best.point
            logger.info(
                f"best random ratio {best.value}: eo={best.means['eo']:.4f} "\
                f"acc={best.means['acc']:.4f}"
            )
    write_report(report, output_dir, f"sweep_{axis}.csv")
    return report


def cmd_eval(model_path, data_path, out_path=None):
    """Re-score a serialized model on a CSV dataset"""
    model = load_model(model_path)
    dataset = load_csv_dataset(data_path)
    report = evaluate(model, dataset)
    if out_path is not None:
        _write_json(Path(out_path), report.to_record())
    return report


def cmd_mask(model_path, d_r_path, d_s1_path, d_s2_path, k, criterion, out_path=None):
    """Selective mask for a serialized model from three CSV datasets"""
    model = load_model(model_path)
    d_r, d_s1, d_s2 = (
        load_csv_dataset(path) for path in (d_r_path, d_s1_path, d_s2_path)
    )
    mask = smg_mask(*selection_snapshots(model, d_r, d_s1, d_s2), k, criterion)
    if mask.count == 0:
        raise EmptySelectionError(k)
    logger.info(f"generated {mask}")
    if out_path is not None:
        save_mask(mask, out_path)
    return mask
