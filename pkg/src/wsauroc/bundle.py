"""On-disk experiment bundles: one CSV per frame plus a JSON manifest.

The manifest is written last, so its presence marks a complete bundle.
"""

from __future__ import annotations

import hashlib
import io
import json
from pathlib import Path

import numpy as np

from .io import atomic_write_text
from .synth import ExperimentBundle, ExperimentDesign, FaultType, FrameRecord, SynthConfig, make_experiment

MANIFEST = "manifest.json"


class BundleError(ValueError):
    pass


def frame_csv(frame: np.ndarray, sample_rate: float) -> str:
    n = frame.shape[1]
    t = np.arange(n) / sample_rate
    buf = io.StringIO()
    header = "t," + ",".join(f"ch{c}" for c in range(frame.shape[0]))
    np.savetxt(buf, np.column_stack([t, frame.T]), delimiter=",", fmt="%.17g", header=header, comments="")
    return buf.getvalue()


def _design_dict(design: ExperimentDesign) -> dict:
    return {
        "train": design.train,
        "val": design.val,
        "test_normal": design.test_normal,
        "per_level": design.per_level,
        "severities": {
            t.value: {"quantities": list(levels), "unit": unit}
            for t, (levels, unit) in design.severities.items()
        },
    }


def _design_from_dict(data: dict) -> ExperimentDesign:
    return ExperimentDesign(
        train=data["train"],
        val=data["val"],
        test_normal=data["test_normal"],
        per_level=data["per_level"],
        severities={
            FaultType(k): (tuple(v["quantities"]), v["unit"]) for k, v in data["severities"].items()
        },
    )


def write_bundle(bundle: ExperimentBundle, out_dir) -> Path:
    out_dir = Path(out_dir)
    (out_dir / "frames").mkdir(parents=True, exist_ok=True)
    cfg = bundle.config
    entries = []
    for rec, frame in zip(bundle.records, bundle.frames):
        rel = f"frames/frame_{rec.index:05d}.csv"
        text = frame_csv(frame, cfg.sample_rate)
        atomic_write_text(out_dir / rel, text)
        entries.append({
            "file": rel,
            "sha256": hashlib.sha256(text.encode("utf-8")).hexdigest(),
            "index": rec.index,
            "split": rec.split,
            "fault_type": rec.fault_type.value if rec.fault_type else None,
            "severity_index": rec.severity_index,
            "severity_quantity": rec.severity_quantity,
        })
    manifest = {
        "seed": int(cfg.seed),
        "config": cfg.to_dict(),
        "effective_frequencies": {
            "rotation": cfg.effective_rotation,
            "bpfi": cfg.effective_bpfi,
            "bpfo": cfg.effective_bpfo,
            "bin_width": cfg.bin_width,
        },
        "design": _design_dict(bundle.design),
        "quantity_maps": {
            t.value: {"quantities": list(bundle.quantity_map(t).quantities), "unit": bundle.quantity_map(t).unit}
            for t in bundle.fault_types
        },
        "frames": entries,
    }
    atomic_write_text(out_dir / MANIFEST, json.dumps(manifest, indent=2) + "\n")
    return out_dir / MANIFEST


def synth_bundle(config: SynthConfig, design: ExperimentDesign, out_dir) -> Path:
    return write_bundle(make_experiment(config, design), out_dir)


def read_bundle(bundle_dir, verify: bool = True) -> ExperimentBundle:
    bundle_dir = Path(bundle_dir)
    try:
        manifest = json.loads((bundle_dir / MANIFEST).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise BundleError(f"{bundle_dir}: no {MANIFEST}; not a complete bundle") from None
    except json.JSONDecodeError as exc:
        raise BundleError(f"{bundle_dir / MANIFEST}: invalid JSON ({exc})") from None
    try:
        config = SynthConfig.from_dict(manifest["config"])
        design = _design_from_dict(manifest["design"])
        entries = manifest["frames"]
    except (KeyError, TypeError, ValueError) as exc:
        raise BundleError(f"{bundle_dir / MANIFEST}: malformed manifest ({exc})") from None
    records, frames = [], []
    for entry in entries:
        path = bundle_dir / entry["file"]
        try:
            text = path.read_text(encoding="utf-8")
        except FileNotFoundError:
            raise BundleError(f"missing frame file {path}") from None
        if verify and hashlib.sha256(text.encode("utf-8")).hexdigest() != entry["sha256"]:
            raise BundleError(f"checksum mismatch for {path}")
        data = np.loadtxt(io.StringIO(text), delimiter=",", skiprows=1, ndmin=2)
        frames.append(data[:, 1:].T.copy())
        fault = entry["fault_type"]
        records.append(FrameRecord(
            index=entry["index"],
            split=entry["split"],
            fault_type=FaultType(fault) if fault else None,
            severity_index=entry["severity_index"],
            severity_quantity=entry["severity_quantity"],
        ))
    return ExperimentBundle(config, design, records, frames)
