"""Twin sessions, twin datasets and twin data generation"""

from .session import TwinSession, TwinFactory
from .dataset import TwinDataset, dump_twin_dataset, load_twin_dataset, tag_name
from .builtin import BuiltinTwinFactory, builtin_twin, MODES
from .protocol import decode_frame, encode_frame, protocol_roundtrip, validate_frame
from .external import SubprocessTwinFactory, TwinProcess
from .generator import generate_twin_dataset

__all__ = [
    "TwinSession",
    "TwinFactory",
    "TwinDataset",
    "dump_twin_dataset",
    "load_twin_dataset",
    "tag_name",
    "BuiltinTwinFactory",
    "builtin_twin",
    "MODES",
    "decode_frame",
    "encode_frame",
    "protocol_roundtrip",
    "validate_frame",
    "SubprocessTwinFactory",
    "TwinProcess",
    "generate_twin_dataset",
]
