"""Software rendering of compiled models."""

from ctrlforge.rendering.image_io import write_png
from ctrlforge.rendering.image_io import write_ppm
from ctrlforge.rendering.rasterizer import render
