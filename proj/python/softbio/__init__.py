"""Person retrieval from semantic descriptions in calibrated surveillance video."""

import json

from ._core import (
    Camera,
    Error,
    GeometryError,
    ParseError,
    backproject_ground,
    decode_mask,
    distort,
    encode_mask,
    estimate_height,
    fit_height_bias,
    iou,
    load_calibration,
    look_down_camera,
    parse_calibration,
    project,
    synthesize,
    undistort,
)
from ._core import _Service

__all__ = [
    "Camera",
    "Error",
    "GeometryError",
    "ParseError",
    "Service",
    "backproject_ground",
    "decode_mask",
    "distort",
    "encode_mask",
    "estimate_height",
    "fit_height_bias",
    "iou",
    "load_calibration",
    "look_down_camera",
    "parse_calibration",
    "project",
    "synthesize",
    "undistort",
]


class Service:
    """A loaded dataset with its retrieval engine."""

    def __init__(self, dataset_root, config_path=None):
        self._impl = _Service(str(dataset_root), str(config_path) if config_path else "")

    @property
    def sequence_ids(self):
        return self._impl.sequence_ids()

    def retrieve(self, sequence_id, description):
        """Per-frame outcomes for `description` (a dict or JSON text)."""
        if not isinstance(description, str):
            description = json.dumps(description)
        return json.loads(self._impl.retrieve(sequence_id, description))

    def evaluate(self):
        return json.loads(self._impl.evaluate())

    def request(self, method, path, body=""):
        """Routes one HTTP-style request; returns (status, parsed body)."""
        if not isinstance(body, str):
            body = json.dumps(body)
        status, content_type, text = self._impl.request(method, path, body)
        if content_type.startswith("application/json") and text:
            return status, json.loads(text)
        return status, text
