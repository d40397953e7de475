"""Embedding-table exporter for scene-graph evaluation pipelines."""

from .encoders import (
    EncoderUnavailable,
    HashImageEncoder,
    HashTextEncoder,
    image_encoder,
    pinned_models,
    text_encoder,
)
from .export import (
    ExportError,
    FrameSpec,
    export_frame_embeddings,
    export_text_embeddings,
    read_frame_specs,
    read_text_keys,
    write_embedding_file,
)

__version__ = "0.1.0"
