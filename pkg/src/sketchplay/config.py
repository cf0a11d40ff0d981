"""Pipeline configuration shared by the CLI and the service.

One loader, one set of defaults, so batch runs and service exports are
byte-identical for the same inputs.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional, Tuple

from .errors import MalformedRecord


@dataclass(frozen=True)
class GestureBinding:
    """Attach a recorded gesture stroke to a segmented object."""

    path: str                      # trajectory JSONL (2D stroke or keypoint records)
    object_index: Optional[int] = None
    object_id: Optional[str] = None
    m_hand: Optional[float] = None
    alpha: Optional[float] = None
    keypoint_index: Optional[int] = None  # for 21-keypoint streams


@dataclass(frozen=True)
class PriorsConfig:
    width: int = 256
    height: int = 256
    stride: int = 8            # render every Nth simulation frame
    edge_threshold: float = 0.05


@dataclass(frozen=True)
class PipelineConfig:
    canvas_path: Optional[str] = None
    bindings: Tuple[GestureBinding, ...] = ()
    prompts: Tuple[Tuple[int, str], ...] = ()  # (object_index, prompt text)
    output_dir: str = "out"
    material_table_path: Optional[str] = None
    backend: str = "rule"      # rule | remote
    m_hand: float = 0.4
    dt: float = 1.0 / 240.0
    duration: float = 2.0
    gravity: Tuple[float, float, float] = (0.0, 0.0, -9.81)
    solver_iterations: int = 8
    release_window: float = 0.1
    beautify_epsilon: float = 0.0
    temporal_gap: float = 0.5
    spatial_gap_fraction: float = 0.15
    thickness: Optional[float] = None  # None: 0.2 * min bbox side per object
    fit_primitives: bool = True
    priors: PriorsConfig = field(default_factory=PriorsConfig)
    sim_sync_threshold: float = 10.0   # service: simulate inline up to this duration

    def validate(self) -> None:
        if self.backend not in ("rule", "remote"):
            raise MalformedRecord(f"backend must be rule|remote, got {self.backend!r}")
        if self.m_hand <= 0:
            raise MalformedRecord(f"m_hand must be positive, got {self.m_hand}")
        if not 0 < self.dt <= 1.0 / 60.0:
            raise MalformedRecord(f"dt must be in (0, 1/60], got {self.dt}")
        if self.duration <= 0:
            raise MalformedRecord(f"duration must be positive, got {self.duration}")
        if self.thickness is not None and self.thickness <= 0:
            raise MalformedRecord(f"thickness must be positive, got {self.thickness}")
        if self.canvas_path is not None and not Path(self.canvas_path).exists():
            raise MalformedRecord(f"canvas file not found: {self.canvas_path}")
        for b in self.bindings:
            if not Path(b.path).exists():
                raise MalformedRecord(f"gesture file not found: {b.path}")
            if b.object_index is None and b.object_id is None:
                raise MalformedRecord("binding needs object_index or object_id")
        if self.material_table_path is not None and not Path(self.material_table_path).exists():
            raise MalformedRecord(f"material table not found: {self.material_table_path}")


def load_config(path: str, base_dir: Optional[str] = None) -> PipelineConfig:
    """Read a config JSON; relative input paths resolve against the file."""
    p = Path(path)
    try:
        raw = json.loads(p.read_text())
    except FileNotFoundError:
        raise MalformedRecord(f"config file not found: {path}")
    except json.JSONDecodeError as exc:
        raise MalformedRecord(f"config is not valid JSON: {exc}")
    root = Path(base_dir) if base_dir else p.parent

    def resolve(value: Optional[str]) -> Optional[str]:
        if value is None:
            return None
        q = Path(value)
        return str(q if q.is_absolute() else root / q)

    bindings = tuple(
        GestureBinding(
            path=resolve(b["path"]),
            object_index=b.get("object_index"),
            object_id=b.get("object_id"),
            m_hand=b.get("m_hand"),
            alpha=b.get("alpha"),
            keypoint_index=b.get("keypoint_index"),
        )
        for b in raw.get("bindings", [])
    )
    priors_raw = raw.get("priors", {})
    cfg = PipelineConfig(
        canvas_path=resolve(raw.get("canvas")),
        bindings=bindings,
        prompts=tuple((int(i), str(t)) for i, t in raw.get("prompts", [])),
        output_dir=raw.get("output_dir", "out"),
        material_table_path=resolve(raw.get("material_table")),
        backend=raw.get("backend", "rule"),
        m_hand=float(raw.get("m_hand", 0.4)),
        dt=float(raw.get("dt", 1.0 / 240.0)),
        duration=float(raw.get("duration", 2.0)),
        gravity=tuple(raw.get("gravity", (0.0, 0.0, -9.81))),
        solver_iterations=int(raw.get("solver_iterations", 8)),
        release_window=float(raw.get("release_window", 0.1)),
        beautify_epsilon=float(raw.get("beautify_epsilon", 0.0)),
        temporal_gap=float(raw.get("temporal_gap", 0.5)),
        spatial_gap_fraction=float(raw.get("spatial_gap_fraction", 0.15)),
        thickness=raw.get("thickness"),
        fit_primitives=bool(raw.get("fit_primitives", True)),
        priors=PriorsConfig(
            width=int(priors_raw.get("width", 256)),
            height=int(priors_raw.get("height", 256)),
            stride=int(priors_raw.get("stride", 8)),
            edge_threshold=float(priors_raw.get("edge_threshold", 0.05)),
        ),
        sim_sync_threshold=float(raw.get("sim_sync_threshold", 10.0)),
    )
    return cfg


def override(cfg: PipelineConfig, **kw) -> PipelineConfig:
    return replace(cfg, **{k: v for k, v in kw.items() if v is not None})
