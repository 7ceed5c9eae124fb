"""Image file export: binary PPM (P6) and minimal zlib-compressed PNG."""

import struct
import zlib

import numpy as np


def write_ppm(path, rgb):
  rgb = _as_rgb(rgb)
  height, width, _ = rgb.shape
  with open(path, 'wb') as f:
    f.write(f'P6\n{width} {height}\n255\n'.encode('ascii'))
    f.write(rgb.tobytes())


def write_png(path, rgb):
  rgb = _as_rgb(rgb)
  height, width, _ = rgb.shape
  raw = b''.join(b'\x00' + rgb[row].tobytes() for row in range(height))
  with open(path, 'wb') as f:
    f.write(b'\x89PNG\r\n\x1a\n')
    f.write(_chunk(b'IHDR', struct.pack('>IIBBBBB', width, height, 8, 2,
                                        0, 0, 0)))
    f.write(_chunk(b'IDAT', zlib.compress(raw, 9)))
    f.write(_chunk(b'IEND', b''))


def _chunk(kind, payload):
  return (struct.pack('>I', len(payload)) + kind + payload
          + struct.pack('>I', zlib.crc32(kind + payload) & 0xffffffff))


def _as_rgb(rgb):
  rgb = np.asarray(rgb)
  if rgb.ndim == 2:  # depth or segmentation: normalize to grayscale
    finite = rgb[np.isfinite(rgb)]
    lo = float(finite.min()) if finite.size else 0.0
    hi = float(finite.max()) if finite.size else 1.0
    scale = 255.0 / (hi - lo) if hi > lo else 0.0
    gray = ((rgb - lo) * scale).astype(np.uint8)
    rgb = np.stack([gray] * 3, axis=-1)
  if rgb.dtype != np.uint8:
    rgb = np.clip(rgb, 0, 255).astype(np.uint8)
  return np.ascontiguousarray(rgb)
