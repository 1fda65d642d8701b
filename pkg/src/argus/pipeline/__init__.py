"""Manifest-driven orchestration, metrics, publication and reporting."""

from argus.pipeline.manifest import (
    CoverageTarget,
    PipelineManifest,
    PublishConfig,
    StepConfig,
    load_manifest,
    load_manifest_file,
)
from argus.pipeline.metrics import MetricsReport, metrics_path, metrics_report
from argus.pipeline.publish import LICENSES, publish, verify_bundle
from argus.pipeline.report import write_report
from argus.pipeline.run import run
from argus.pipeline.steps import apply_step

__all__ = [
    "CoverageTarget",
    "LICENSES",
    "MetricsReport",
    "PipelineManifest",
    "PublishConfig",
    "StepConfig",
    "apply_step",
    "load_manifest",
    "load_manifest_file",
    "metrics_path",
    "metrics_report",
    "publish",
    "run",
    "verify_bundle",
    "write_report",
]
