"""Offline encoder adapter producing SEMB embedding files for the semaug pipeline."""

__version__ = "0.1.0"

from .encoders import EncoderLoadError, load_encoders
from .extract import ExtractError, ExtractJob, extract_embeddings, middle_indices
from .semb_writer import write_semb
