"""Wire format of external twins: one JSON object per line over stdin/stdout.

    -> {"cmd":"init","x0":[...]}              <- {"ok":true} | {"error":"..."}
    -> {"cmd":"step","a":<int>,"raw":[...]}   <- {"x":[...]} | {"error":"..."}
    -> {"cmd":"reset"}                        <- {"ok":true}
"""

import json
import math
from typing import Any, Dict, Optional, Union

from ..errors import ProtocolError

# Field tables per frame kind, in the same shape as tool parameter specs
FRAMES: Dict[str, Dict[str, Dict[str, Any]]] = {
    "init": {
        "cmd": {"type": "string", "required": True},
        "x0": {"type": "vector", "required": True, "dim": "x0"},
    },
    "step": {
        "cmd": {"type": "string", "required": True},
        "a": {"type": "int", "required": True},
        "raw": {"type": "vector", "required": False},
    },
    "reset": {
        "cmd": {"type": "string", "required": True},
    },
    "ok": {
        "ok": {"type": "bool", "required": True},
    },
    "observation": {
        "x": {"type": "vector", "required": True, "dim": "x"},
    },
    "error": {
        "error": {"type": "string", "required": True},
    },
}


def frame_kind(message: Dict[str, Any]) -> str:
    if "cmd" in message:
        cmd = message["cmd"]
        if cmd not in ("init", "step", "reset"):
            raise ProtocolError(f"unknown command {cmd!r}")
        return cmd
    for kind in ("ok", "error"):
        if kind in message:
            return kind
    if "x" in message:
        return "observation"
    raise ProtocolError(f"unrecognized frame with fields {sorted(message)}")


def _check_value(name: str, value: Any, spec: Dict[str, Any], dims: Dict[str, Optional[int]]):
    kind = spec["type"]
    if kind == "string":
        ok = isinstance(value, str)
    elif kind == "bool":
        ok = isinstance(value, bool)
    elif kind == "int":
        ok = isinstance(value, int) and not isinstance(value, bool)
    else:
        ok = isinstance(value, list) and all(
            isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v) for v in value
        )
    if not ok:
        raise ProtocolError(f"field '{name}' must be a {kind}, got {value!r}")
    expected = dims.get(spec.get("dim", ""))
    if expected is not None and len(value) != expected:
        raise ProtocolError(f"field '{name}' has length {len(value)}, expected {expected}")


def validate_frame(message: Any, x0_dim: Optional[int] = None, x_dim: Optional[int] = None) -> str:
    """Check one decoded frame; returns its kind"""
    if not isinstance(message, dict):
        raise ProtocolError("frame must be a JSON object")
    kind = frame_kind(message)
    fields = FRAMES[kind]
    unknown = sorted(set(message) - set(fields))
    if unknown:
        raise ProtocolError(f"unknown fields {unknown} in {kind} frame")
    dims = {"x0": x0_dim, "x": x_dim}
    for name, spec in fields.items():
        if name not in message:
            if spec["required"]:
                raise ProtocolError(f"missing field '{name}' in {kind} frame")
            continue
        _check_value(name, message[name], spec, dims)
    return kind


def encode_frame(message: Dict[str, Any], x0_dim: Optional[int] = None, x_dim: Optional[int] = None) -> bytes:
    validate_frame(message, x0_dim, x_dim)
    return (json.dumps(message, separators=(",", ":")) + "\n").encode("utf-8")


def decode_frame(line: Union[bytes, str], x0_dim: Optional[int] = None,
                 x_dim: Optional[int] = None) -> Dict[str, Any]:
    """Decode exactly one frame from one line"""
    if isinstance(line, bytes):
        try:
            text = line.decode("utf-8")
        except UnicodeDecodeError as e:
            raise ProtocolError("frame is not valid UTF-8", e.start)
    else:
        text = line
    if text.endswith("\n"):
        text = text[:-1]
    if "\n" in text:
        raise ProtocolError("frame spans several lines", len(text[:text.index("\n")].encode("utf-8")))

    start = len(text) - len(text.lstrip())
    try:
        message, end = json.JSONDecoder().raw_decode(text, start)
    except json.JSONDecodeError as e:
        raise ProtocolError(f"malformed frame: {e.msg}", len(text[:e.pos].encode("utf-8")))
    if text[end:].strip():
        offset = end + len(text[end:]) - len(text[end:].lstrip())
        raise ProtocolError("trailing data after frame", len(text[:offset].encode("utf-8")))
    validate_frame(message, x0_dim, x_dim)
    return message


def protocol_roundtrip(message: Dict[str, Any]) -> Dict[str, Any]:
    return decode_frame(encode_frame(message))
