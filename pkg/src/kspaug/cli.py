"""Command-line surface: simulate | augment | validate-noise | recon | metrics.

Every command is a deterministic function of the config plus seed:
per-slice work is dispatched to a bounded worker pool, results are
written in a fixed order, and reruns produce byte-identical outputs for
any worker count.
"""

from __future__ import annotations

import argparse
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import dataio, phantom
from .acquisition import UndersamplingMask, apply_mask, make_random_mask, rss
from .config import ConfigError, RunConfig, config_help_text, load_config
from .fourier import ifft2c
from .grid import center_crop
from .metrics import cross_coil_covariance, nmse, psnr, ssim, validate_noise
from .pipeline import (
    AugmentConfig,
    augment_coil_images,
    materialize_naive_pair,
    materialize_object_pair,
    materialize_pair,
    naive_coil_images,
    object_coil_images,
    augmented_shape,
    _sample_for_slice,
    slice_rngs,
    volume_mask_rng,
)
from .recon import tv_reconstruct, zero_filled
from .transforms import TransformSpec

__all__ = ["main", "cmd_simulate", "cmd_augment", "cmd_validate_noise", "cmd_recon", "cmd_metrics", "replay_record"]


def _pool_map(fn, tasks, workers: int):
    """Ordered map over tasks; pool size never changes the result."""
    if workers <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, tasks))


def _mask_record(mask: UndersamplingMask) -> dict:
    return {
        "width": mask.width,
        "columns": [int(c) for c in mask.column_indices()],
        "acceleration": mask.acceleration,
        "center_fraction": mask.center_fraction,
    }


def _mask_from_record(rec: dict) -> UndersamplingMask:
    selected = np.zeros(int(rec["width"]), dtype=bool)
    selected[np.asarray(rec["columns"], dtype=int)] = True
    return UndersamplingMask(selected, int(rec["acceleration"]), float(rec["center_fraction"]))


def _pair_filenames(epoch: int, volume: int, slice_idx: int) -> tuple:
    stem = f"ep{epoch:03d}_vol{volume:04d}_sl{slice_idx:03d}"
    return f"{stem}.kspace", f"{stem}.target"


def cmd_simulate(cfg: RunConfig) -> int:
    meta = phantom.synth_dataset(
        cfg.dataset_dir,
        cfg.sim_volumes,
        cfg.sim_slices,
        cfg.sim_height,
        cfg.sim_width,
        cfg.sim_coils,
        cfg.sim_sigma,
        cfg.seed,
    )
    n = meta.volumes * meta.slices_per_volume
    print(
        f"simulate: wrote {n} slices ({meta.volumes} volumes x {meta.slices_per_volume}, "
        f"{meta.coils} coils, {meta.height}x{meta.width}, sigma={meta.sigma}) to {cfg.dataset_dir}"
    )
    return 0


def _build_pair(cfg: RunConfig, acfg: AugmentConfig, meta, k, epoch, volume, slice_idx):
    spec, mask_stream = _sample_for_slice(acfg, epoch, cfg.seed, volume, slice_idx)
    if cfg.mask_per_volume:
        mask_stream = volume_mask_rng(cfg.seed, volume)
    if cfg.mode == "mraugment":
        width = augmented_shape(spec, meta.height, meta.width)[1]
        mask = make_random_mask(width, acfg.acceleration, acfg.center_fraction, mask_stream)
        return materialize_pair(k, spec, mask, acfg.crop_h, acfg.crop_w, acfg.interp())
    maps = phantom.volume_maps(meta.height, meta.width, meta.coils, meta.seed, volume)
    if cfg.mode == "naive":
        width = augmented_shape(spec, acfg.crop_h, acfg.crop_w)[1]
        mask = make_random_mask(width, acfg.acceleration, acfg.center_fraction, mask_stream)
        return materialize_naive_pair(k, maps, spec, mask, acfg.crop_h, acfg.crop_w, acfg.interp())
    if cfg.mode == "object-level":
        mask = make_random_mask(meta.width, acfg.acceleration, acfg.center_fraction, mask_stream)
        return materialize_object_pair(k, maps, spec, mask, acfg.crop_h, acfg.crop_w, acfg.interp())
    raise ConfigError(f"mode: unknown value {cfg.mode!r}")


def cmd_augment(cfg: RunConfig) -> int:
    meta = dataio.DatasetMeta.load(cfg.dataset_dir)
    acfg = cfg.to_augment_config()
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    tasks = [(e, v, s) for e in cfg.epochs() for v, s in meta.slice_ids()]

    def run_one(task):
        epoch, volume, slice_idx = task
        k = dataio.read_complex(
            Path(cfg.dataset_dir) / dataio.slice_filename(volume, slice_idx),
            meta.coils,
            meta.height,
            meta.width,
        )
        pair = _build_pair(cfg, acfg, meta, k, epoch, volume, slice_idx)
        k_name, t_name = _pair_filenames(epoch, volume, slice_idx)
        record = {
            "epoch": epoch,
            "volume": volume,
            "slice": slice_idx,
            "spec": pair.spec.to_json(),
            "mask": _mask_record(pair.mask),
            "kspace_file": k_name,
            "kspace_shape": list(pair.kspace.shape),
            "target_file": t_name,
        }
        return record, pair

    results = _pool_map(run_one, tasks, cfg.workers)
    records = []
    for record, pair in results:
        dataio.write_complex(out / record["kspace_file"], pair.kspace)
        dataio.write_real(out / record["target_file"], pair.target)
        records.append(record)
    dataio.write_manifest(out / dataio.MANIFEST_NAME, records)
    dataio.write_json(
        out / dataio.META_NAME,
        {
            "kind": "augmented-run",
            "mode": cfg.mode,
            "seed": cfg.seed,
            "dataset_dir": str(cfg.dataset_dir),
            "crop_h": acfg.crop_h,
            "crop_w": acfg.crop_w,
            "upsample": acfg.upsample,
            "acceleration": acfg.acceleration,
            "center_fraction": acfg.center_fraction,
            "pairs": len(records),
        },
    )
    n_empty = sum(1 for r in records if not r["spec"]["transforms"])
    print(f"augment[{cfg.mode}]: wrote {len(records)} pairs to {cfg.output_dir} ({n_empty} unaugmented)")
    return 0


def replay_record(dataset_dir, run_meta: dict, record: dict):
    """Rebuild one pair purely from its manifest record (bit-exact)."""
    meta = dataio.DatasetMeta.load(dataset_dir)
    k = dataio.read_complex(
        Path(dataset_dir) / dataio.slice_filename(record["volume"], record["slice"]),
        meta.coils,
        meta.height,
        meta.width,
    )
    spec = TransformSpec.from_json(record["spec"])
    mask = _mask_from_record(record["mask"])
    crop_h, crop_w = run_meta["crop_h"], run_meta["crop_w"]
    interp = None
    if run_meta.get("upsample"):
        from .transforms import InterpConfig

        interp = InterpConfig(run_meta["upsample"])
    mode = run_meta["mode"]
    if mode == "mraugment":
        return materialize_pair(k, spec, mask, crop_h, crop_w, interp)
    maps = phantom.volume_maps(meta.height, meta.width, meta.coils, meta.seed, record["volume"])
    if mode == "naive":
        return materialize_naive_pair(k, maps, spec, mask, crop_h, crop_w, interp)
    return materialize_object_pair(k, maps, spec, mask, crop_h, crop_w, interp)


def cmd_validate_noise(cfg: RunConfig) -> int:
    meta = dataio.DatasetMeta.load(cfg.dataset_dir)
    if meta.kind != "phantom-dataset":
        raise ConfigError("dataset_dir: noise validation needs a synthetic dataset (known clean twin)")
    acfg = cfg.to_augment_config()
    epoch = cfg.epoch_start

    def residual(task):
        volume, slice_idx = task
        k_noisy = dataio.read_complex(
            Path(cfg.dataset_dir) / dataio.slice_filename(volume, slice_idx),
            meta.coils,
            meta.height,
            meta.width,
        )
        k_clean = phantom.clean_slice_kspace(
            meta.height, meta.width, meta.coils, meta.seed, volume, slice_idx
        )
        if cfg.mode == "mraugment":
            noisy, _ = augment_coil_images(
                k_noisy, acfg, epoch, cfg.seed, volume_id=volume, slice_id=slice_idx
            )
            clean, _ = augment_coil_images(
                k_clean, acfg, epoch, cfg.seed, volume_id=volume, slice_id=slice_idx
            )
        else:
            maps = phantom.volume_maps(meta.height, meta.width, meta.coils, meta.seed, volume)
            spec, _ = _sample_for_slice(acfg, epoch, cfg.seed, volume, slice_idx)
            if cfg.mode == "naive":
                noisy, _ = naive_coil_images(k_noisy, maps, spec, acfg.crop_h, acfg.crop_w, acfg.interp())
                clean, _ = naive_coil_images(k_clean, maps, spec, acfg.crop_h, acfg.crop_w, acfg.interp())
            else:
                noisy = object_coil_images(k_noisy, maps, spec, acfg.interp())
                clean = object_coil_images(k_clean, maps, spec, acfg.interp())
        return noisy - clean

    tasks = list(meta.slice_ids())
    residuals = _pool_map(residual, tasks, cfg.workers)
    samples = np.concatenate([r.ravel() for r in residuals])
    report = validate_noise(samples)
    cov = cross_coil_covariance(residuals)
    coupled = cov.max_offdiag_score() >= 5.0
    passed = report.passed and not coupled

    out = {
        "mode": cfg.mode,
        "epoch": epoch,
        "slices": len(tasks),
        "noise": report.to_json(),
        "cross_coil": cov.to_json(),
        "cross_coil_coupled": coupled,
        "passed": passed,
    }
    dataio.write_json(Path(cfg.report_file), out)
    verdict = "PASS" if passed else "FAIL"
    print(
        f"validate-noise[{cfg.mode}]: {verdict} "
        f"(n={report.n}, ks_p={report.ks_p:.4g}, corr={report.corr:.4g}, "
        f"var_ratio={max(report.var_real, report.var_imag) / max(min(report.var_real, report.var_imag), 1e-300):.4f}, "
        f"max_offdiag={cov.max_offdiag_score():.2f} SE)"
    )
    for name, ok in report.checks.items():
        print(f"  {name}: {'ok' if ok else 'violated'}")
    print(f"  cross_coil_independence: {'ok' if not coupled else 'violated'}")
    return 0


def _recon_tasks_dataset(cfg: RunConfig, meta):
    return [
        {
            "epoch": cfg.epoch_start,
            "volume": volume,
            "slice": slice_idx,
            "kspace_file": dataio.slice_filename(volume, slice_idx),
        }
        for volume, slice_idx in meta.slice_ids()
    ]


def cmd_recon(cfg: RunConfig) -> int:
    source = Path(cfg.recon_input or cfg.dataset_dir)
    recon_dir = Path(cfg.recon_dir)
    recon_dir.mkdir(parents=True, exist_ok=True)
    acfg = cfg.to_augment_config()
    methods = ("zero-filled", "tv") if cfg.recon_method == "both" else (cfg.recon_method,)

    run_mode = (source / dataio.MANIFEST_NAME).exists()
    if run_mode:
        run_meta = dataio.read_json(source / dataio.META_NAME)
        dataset_dir = run_meta["dataset_dir"]
        meta = dataio.DatasetMeta.load(dataset_dir)
        records = dataio.read_manifest(source / dataio.MANIFEST_NAME)
        crop_h, crop_w = run_meta["crop_h"], run_meta["crop_w"]
    else:
        meta = dataio.DatasetMeta.load(source)
        records = _recon_tasks_dataset(cfg, meta)
        crop_h, crop_w = acfg.crop_h, acfg.crop_w

    def run_one(rec):
        volume, slice_idx, epoch = rec["volume"], rec["slice"], rec["epoch"]
        if run_mode:
            mask = _mask_from_record(rec["mask"])
            k = dataio.read_complex(source / rec["kspace_file"], *rec["kspace_shape"])
            k_masked = k
        else:
            k = dataio.read_complex(
                source / rec["kspace_file"], meta.coils, meta.height, meta.width
            )
            if cfg.mask_per_volume:
                mask_stream = volume_mask_rng(cfg.seed, volume)
            else:
                mask_stream = slice_rngs(cfg.seed, volume, slice_idx, epoch)[2]
            mask = make_random_mask(meta.width, acfg.acceleration, acfg.center_fraction, mask_stream)
            k_masked = apply_mask(k, mask)
        outputs = []
        for method in methods:
            if method == "zero-filled":
                img = zero_filled(k_masked, mask, crop_h, crop_w)
            else:
                img = tv_reconstruct(
                    k_masked,
                    mask,
                    cfg.tv_lambda,
                    cfg.tv_iters,
                    cfg.tv_step,
                    crop_h=crop_h,
                    crop_w=crop_w,
                )
            name = f"{method}_ep{epoch:03d}_vol{volume:04d}_sl{slice_idx:03d}.img"
            outputs.append(
                {
                    "method": method,
                    "epoch": epoch,
                    "volume": volume,
                    "slice": slice_idx,
                    "file": name,
                    "mask_columns": int(mask.selected.sum()),
                }
            )
            outputs[-1]["_img"] = img
        return outputs

    results = _pool_map(run_one, records, cfg.workers)
    entries = []
    for outputs in results:
        for entry in outputs:
            img = entry.pop("_img")
            dataio.write_real(recon_dir / entry["file"], img)
            entries.append(entry)
    dataio.write_json(
        recon_dir / dataio.META_NAME,
        {
            "kind": "recon",
            "source": str(source),
            "source_kind": "run" if run_mode else "dataset",
            "crop_h": crop_h,
            "crop_w": crop_w,
            "entries": entries,
        },
    )
    print(f"recon: wrote {len(entries)} images ({' + '.join(methods)}) to {cfg.recon_dir}")
    return 0


def _target_for(cfg: RunConfig, recon_meta: dict, entry: dict):
    source = Path(recon_meta["source"])
    if recon_meta["source_kind"] == "run":
        crop_h, crop_w = recon_meta["crop_h"], recon_meta["crop_w"]
        name = _pair_filenames(entry["epoch"], entry["volume"], entry["slice"])[1]
        return dataio.read_real(source / name, crop_h, crop_w)
    meta = dataio.DatasetMeta.load(source)
    k = dataio.read_complex(
        source / dataio.slice_filename(entry["volume"], entry["slice"]),
        meta.coils,
        meta.height,
        meta.width,
    )
    return center_crop(rss(ifft2c(k)), recon_meta["crop_h"], recon_meta["crop_w"])


def cmd_metrics(cfg: RunConfig) -> int:
    recon_dir = Path(cfg.recon_dir)
    recon_meta = dataio.read_json(recon_dir / dataio.META_NAME)
    crop_h, crop_w = recon_meta["crop_h"], recon_meta["crop_w"]
    entries = recon_meta["entries"]

    targets = {}
    for entry in entries:
        key = (entry["epoch"], entry["volume"], entry["slice"])
        if key not in targets:
            targets[key] = _target_for(cfg, recon_meta, entry)
    # data range convention: maximum of the reference volume
    vol_range = {}
    for (epoch, volume, slice_idx), target in targets.items():
        vol_range[volume] = max(vol_range.get(volume, 0.0), float(target.max()))

    rows = []
    for entry in entries:
        key = (entry["epoch"], entry["volume"], entry["slice"])
        target = targets[key]
        img = dataio.read_real(recon_dir / entry["file"], crop_h, crop_w)
        rng = vol_range[entry["volume"]]
        rows.append(
            {
                "method": entry["method"],
                "epoch": entry["epoch"],
                "volume": entry["volume"],
                "slice": entry["slice"],
                "ssim": ssim(img, target, rng),
                "psnr": psnr(img, target, rng),
                "nmse": nmse(img, target),
            }
        )

    lines = ["method,epoch,volume,slice,ssim,psnr,nmse"]
    for r in rows:
        lines.append(
            f"{r['method']},{r['epoch']},{r['volume']},{r['slice']},"
            f"{r['ssim']:.6f},{r['psnr']:.6f},{r['nmse']:.8f}"
        )
    for method in sorted({r["method"] for r in rows}):
        sel = [r for r in rows if r["method"] == method]
        mean = lambda key: sum(r[key] for r in sel) / len(sel)  # noqa: E731
        lines.append(
            f"{method},aggregate,,,{mean('ssim'):.6f},{mean('psnr'):.6f},{mean('nmse'):.8f}"
        )
        print(
            f"metrics[{method}]: ssim={mean('ssim'):.4f} psnr={mean('psnr'):.2f} nmse={mean('nmse'):.5f}"
            f" over {len(sel)} slice(s)"
        )
    Path(cfg.metrics_file).write_text("\n".join(lines) + "\n")
    return 0


_COMMANDS = {
    "simulate": cmd_simulate,
    "augment": cmd_augment,
    "validate-noise": cmd_validate_noise,
    "recon": cmd_recon,
    "metrics": cmd_metrics,
}


def _parse_epochs(text: str) -> tuple:
    if ".." in text:
        a, b = text.split("..", 1)
        return int(a), int(b)
    return int(text), int(text)


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    if "--help-config" in argv:
        print(config_help_text())
        return 0

    parser = argparse.ArgumentParser(
        prog="kspaug",
        description="Accelerated-MRI simulation, noise-faithful augmentation, and validation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", default=None, help="flat JSON config file")
        p.add_argument("--seed", type=int, default=None, help="override the global seed (u64)")
        p.add_argument("--workers", type=int, default=None, help="worker pool size")
        p.add_argument("--help-config", action="store_true", help="print the config schema and exit")
        if name == "augment":
            p.add_argument("--mode", choices=("mraugment", "naive", "object-level"), default=None)
            p.add_argument("--epochs", default=None, help="epoch range A..B (inclusive)")
        if name == "validate-noise":
            p.add_argument("--mode", choices=("mraugment", "naive", "object-level"), default=None)
        if name == "recon":
            p.add_argument("--input", default=None, help="dataset or augmented-run directory")
    args = parser.parse_args(argv)

    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.workers is not None:
        overrides["workers"] = args.workers
    if getattr(args, "mode", None) is not None:
        overrides["mode"] = args.mode
    if getattr(args, "input", None) is not None:
        overrides["recon_input"] = args.input
    if getattr(args, "epochs", None) is not None:
        try:
            overrides["epoch_start"], overrides["epoch_end"] = _parse_epochs(args.epochs)
        except ValueError:
            print("error: --epochs expects A..B with integer endpoints", file=sys.stderr)
            return 2

    try:
        cfg = load_config(args.config, overrides)
        return _COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: missing file: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
