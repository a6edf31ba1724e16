"""Batch execution of a manifest: one trace per (arm, seed) plus a summary."""
from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .engine import run
from .manifest import RunManifest, load_data
from .reports import summarize, write_summary, write_trace

log = logging.getLogger(__name__)


def _replicate(manifest: RunManifest, arm: str, seed: int, data, base_dir: Path):
    trace = run(manifest.config_for(arm, seed), data)
    write_trace(base_dir / manifest.trace_path(arm, seed), trace)
    return (arm, seed), trace


def run_experiment(manifest: RunManifest, base_dir=None, jobs: int = 1) -> dict:
    """Run every arm for every seed and persist traces, summary and a manifest snapshot.

    Relative paths in the manifest resolve against ``base_dir``. Each
    replication owns its generator, so ``jobs > 1`` yields identical files.

    Returns:
        mapping with keys ``traces`` (dict of (arm, seed) -> path), ``summary``
        and ``manifest``.
    """
    base_dir = Path(base_dir) if base_dir is not None else Path(".")
    data = load_data(manifest.data, base_dir)
    out_dir = base_dir / manifest.output_dir
    out_dir.mkdir(parents=True, exist_ok=True)
    jobs_list = [(arm, seed) for arm in manifest.arms for seed in manifest.seeds]
    log.info("running %d replications of %r", len(jobs_list), manifest.name)
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(_replicate, manifest, arm, seed, data, base_dir) for arm, seed in jobs_list]
            traces = dict(f.result() for f in futures)
    else:
        traces = dict(_replicate(manifest, arm, seed, data, base_dir) for arm, seed in jobs_list)
    # single writer for the summary, after all replications finished
    summary_path = base_dir / manifest.summary_path
    write_summary(summary_path, summarize(traces, manifest.targets))
    manifest_path = out_dir / "manifest.json"
    manifest_path.write_text(manifest.snapshot())
    return {
        "traces": {key: base_dir / manifest.trace_path(*key) for key in traces},
        "summary": summary_path,
        "manifest": manifest_path,
    }
