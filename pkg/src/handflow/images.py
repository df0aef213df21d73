"""PNG image I/O on (H, W, 3) uint8 arrays."""

from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image as PILImage


def load_image(path: str | Path) -> np.ndarray:
    with PILImage.open(path) as im:
        return np.asarray(im.convert("RGB"), dtype=np.uint8)


def save_image(img: np.ndarray, path: str | Path) -> None:
    img = np.asarray(img, dtype=np.uint8)
    if img.ndim != 3 or img.shape[2] != 3:
        raise ValueError(f"expected (H, W, 3) RGB8 array, got {img.shape}")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    PILImage.fromarray(img, mode="RGB").save(path, format="PNG")
