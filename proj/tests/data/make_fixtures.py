"""Regenerates the PNG fixtures in this directory from scikit-image sample data.

Sources (all public domain or CC0 in scikit-image's data package):
astronaut (NASA), chelsea, coffee, rocket (NASA), hubble_deep_field (NASA).
"""
import os

import numpy as np
from PIL import Image
from skimage import data

HERE = os.path.dirname(os.path.abspath(__file__))

CROPS = {
    "astronaut": (data.astronaut, (20, 150, 220, 350)),   # face
    "chelsea": (data.chelsea, (40, 80, 280, 320)),
    "coffee": (data.coffee, (60, 150, 340, 430)),
    "rocket": (data.rocket, (60, 200, 260, 400)),
    "hubble": (data.hubble_deep_field, (0, 0, 400, 400)),
    "astronaut_suit": (data.astronaut, (250, 120, 450, 320)),
}

for name, (loader, (top, left, bottom, right)) in CROPS.items():
    img = np.asarray(loader())[top:bottom, left:right, :3]
    pil = Image.fromarray(img)
    for size in (32, 64, 128):
        pil.resize((size, size), Image.LANCZOS).save(
            os.path.join(HERE, f"{name}_{size}.png"))
