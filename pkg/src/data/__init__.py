"""
Image corpora: folder loading, image I/O and the synthetic generator.
"""

from .loader import (
    ImageRecord,
    ImageCorpus,
    FolderLoader,
    load_image,
    load_images,
    save_image,
    resize_image,
    to_uint8,
    list_image_files,
)
from .synthetic import SyntheticCorpus, generate_image, create_corpus, load_or_generate

__all__ = [
    "ImageRecord",
    "ImageCorpus",
    "FolderLoader",
    "load_image",
    "load_images",
    "save_image",
    "resize_image",
    "to_uint8",
    "list_image_files",
    "SyntheticCorpus",
    "generate_image",
    "create_corpus",
    "load_or_generate",
]
