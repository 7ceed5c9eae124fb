"""Z-buffered software rasterization of geom primitive meshes.

Rendering is deterministic: fixed tessellation, no multisampling, flat
shading per triangle with two-sided lighting from the model's lights (or a
headlight when the model has none).
"""

import math

import numpy as np

from ctrlforge import errors
from ctrlforge.engine import inertia as inertia_lib
from ctrlforge.rendering import meshes

BACKGROUND_RGB = np.array([38, 40, 46], dtype=np.uint8)
AMBIENT = 0.35
NEAR_CLIP = 1e-3

# Default free camera, framed to the model extent.
DEFAULT_AZIMUTH = 90.0
DEFAULT_ELEVATION = -30.0
DEFAULT_FOVY = 45.0


def render(model, derived, height=240, width=320, camera_id=None,
           mode='rgb'):
  if height < 1 or width < 1:
    raise errors.Error('render size must be at least 1x1')
  if mode not in ('rgb', 'depth', 'segmentation'):
    raise errors.Error(f"unknown render mode '{mode}'")
  eye, rot, fovy = _camera(model, derived, camera_id)

  color = np.empty((height, width, 3), dtype=np.float32)
  color[:] = BACKGROUND_RGB / 255.0
  zbuf = np.full((height, width), np.inf, dtype=np.float64)
  seg = np.full((height, width), -1, dtype=np.int32)

  focal = 0.5 * height / math.tan(math.radians(fovy) / 2.0)
  cx, cy = 0.5 * width, 0.5 * height
  lights = _light_directions(model, derived)

  for g in range(model.ngeom):
    rgba = derived.geom_rgba[g]
    if rgba[3] <= 0.0:
      continue
    verts, faces, parity = meshes.geom_mesh(model.geom_type[g],
                                            model.geom_size[g])
    world = verts @ derived.geom_xmat[g].T + derived.geom_xpos[g]
    cam = (world - eye) @ rot.T
    checker = model.geom_checker[g]
    base_colors = _face_colors(rgba, faces, parity, checker)
    _raster_geom(cam, faces, base_colors, g, focal, cx, cy,
                 color, zbuf, seg, lights, rot)

  if mode == 'segmentation':
    return seg
  if mode == 'depth':
    depth = zbuf.astype(np.float32)
    depth[~np.isfinite(depth)] = 0.0
    return depth
  return (np.clip(color, 0.0, 1.0) * 255.0 + 0.5).astype(np.uint8)


def _face_colors(rgba, faces, parity, checker):
  if checker is not None and parity is not None:
    rgb1, rgb2 = checker
    colors = np.where(parity[:, None] == 0, rgb1[None, :], rgb2[None, :])
    return colors
  return np.broadcast_to(np.asarray(rgba[:3]), (len(faces), 3))


def _raster_geom(cam, faces, base_colors, geom_index, focal, cx, cy,
                 color, zbuf, seg, lights, rot):
  height, width = zbuf.shape
  tri = cam[faces]                                  # (m, 3, 3)
  in_front = (tri[:, :, 2] < -NEAR_CLIP).all(axis=1)
  if not in_front.any():
    return
  tri = tri[in_front]
  colors = base_colors[in_front]
  # Flat shading in camera space with two-sided normals.
  e1 = tri[:, 1] - tri[:, 0]
  e2 = tri[:, 2] - tri[:, 0]
  normals = np.cross(e1, e2)
  norm = np.linalg.norm(normals, axis=1)
  valid = norm > 1e-12
  tri, colors, normals, norm = (tri[valid], colors[valid], normals[valid],
                                norm[valid])
  if not len(tri):
    return
  normals = normals / norm[:, None]
  centroid = tri.mean(axis=1)
  # Flip normals toward the camera (two-sided shading). Camera looks
  # along -z from the origin of camera space.
  toward = -(centroid)
  flip = (normals * toward).sum(axis=1) < 0
  normals[flip] = -normals[flip]
  shade = np.full(len(tri), AMBIENT)
  for light_dir in lights:
    l_cam = rot @ (-light_dir)     # direction from surface toward light
    lambert = np.clip(normals @ l_cam, 0.0, 1.0)
    shade += (1.0 - AMBIENT) * lambert / len(lights)
  lit = np.clip(colors * np.clip(shade, 0.0, 1.0)[:, None], 0.0, 1.0)

  inv_z = -1.0 / tri[:, :, 2]                       # (m, 3), positive
  px = cx + focal * tri[:, :, 0] * inv_z
  py = cy - focal * tri[:, :, 1] * inv_z

  for t in range(len(tri)):
    x0, x1, x2 = px[t]
    y0, y1, y2 = py[t]
    min_x = max(int(math.floor(min(x0, x1, x2))), 0)
    max_x = min(int(math.ceil(max(x0, x1, x2))), width - 1)
    min_y = max(int(math.floor(min(y0, y1, y2))), 0)
    max_y = min(int(math.ceil(max(y0, y1, y2))), height - 1)
    if min_x > max_x or min_y > max_y:
      continue
    area = (x1 - x0) * (y2 - y0) - (x2 - x0) * (y1 - y0)
    if abs(area) < 1e-12:
      continue
    xs = np.arange(min_x, max_x + 1) + 0.5
    ys = np.arange(min_y, max_y + 1) + 0.5
    gx, gy = np.meshgrid(xs, ys)
    w0 = ((x1 - gx) * (y2 - gy) - (x2 - gx) * (y1 - gy)) / area
    w1 = ((x2 - gx) * (y0 - gy) - (x0 - gx) * (y2 - gy)) / area
    w2 = 1.0 - w0 - w1
    inside = (w0 >= 0) & (w1 >= 0) & (w2 >= -1e-9)
    if not inside.any():
      continue
    # Perspective-correct depth from linear interpolation of 1/z.
    interp_inv_z = (w0 * inv_z[t, 0] + w1 * inv_z[t, 1] + w2 * inv_z[t, 2])
    with np.errstate(divide='ignore'):
      depth = 1.0 / interp_inv_z
    zslice = zbuf[min_y:max_y + 1, min_x:max_x + 1]
    closer = inside & (depth < zslice)
    if not closer.any():
      continue
    zslice[closer] = depth[closer]
    seg[min_y:max_y + 1, min_x:max_x + 1][closer] = geom_index
    color[min_y:max_y + 1, min_x:max_x + 1][closer] = lit[t]


def _light_directions(model, derived):
  """Unit directions each light shines along, in world coordinates."""
  dirs = []
  for i in range(model.nlight):
    b = model.light_body[i]
    d = derived.xmat[b] @ model.light_dir[i]
    n = np.linalg.norm(d)
    if n > 0:
      dirs.append(d / n)
  if not dirs:
    dirs.append(np.array([0.0, 0.0, -1.0]))
  return dirs


def _camera(model, derived, camera_id):
  """Returns (eye, world-to-camera rotation, fovy degrees)."""
  if camera_id is None or camera_id == -1:
    return _default_camera(model, derived)
  if isinstance(camera_id, str):
    camera_id = model.name2id(camera_id, 'camera')
  if not 0 <= camera_id < model.ncam:
    raise errors.UnknownNameError(f'camera index {camera_id} out of range')
  b = model.cam_body[camera_id]
  eye = derived.xpos[b] + derived.xmat[b] @ model.cam_pos[camera_id]
  from ctrlforge.engine import rotations
  cam_mat = derived.xmat[b] @ rotations.quat_to_mat(
      model.cam_quat[camera_id])
  # Camera frame: x right, y up, looking along -z. World-to-camera is the
  # transpose of the camera's world orientation.
  return eye, cam_mat.T, float(model.cam_fovy[camera_id])


def _default_camera(model, derived):
  center, radius = _bounding_sphere(model, derived)
  az = math.radians(DEFAULT_AZIMUTH)
  el = math.radians(DEFAULT_ELEVATION)
  forward = np.array([math.cos(el) * math.cos(az),
                      math.cos(el) * math.sin(az),
                      math.sin(el)])
  distance = 2.4 * radius / math.tan(math.radians(DEFAULT_FOVY) / 2.0)
  eye = center - distance * forward
  z_axis = -forward                       # camera looks along -z
  x_axis = np.cross(np.array([0.0, 0.0, 1.0]), z_axis)
  n = np.linalg.norm(x_axis)
  if n < 1e-9:
    x_axis = np.array([1.0, 0.0, 0.0])
  else:
    x_axis = x_axis / n
  y_axis = np.cross(z_axis, x_axis)
  rot = np.stack([x_axis, y_axis, z_axis])   # rows: world-to-camera
  return eye, rot, DEFAULT_FOVY


def _bounding_sphere(model, derived):
  if model.ngeom == 0:
    return np.zeros(3), 1.0
  centers = []
  radii = []
  for g in range(model.ngeom):
    if model.geom_type[g] == inertia_lib.GEOM_PLANE:
      continue  # planes would dominate the framing
    centers.append(derived.geom_xpos[g])
    radii.append(float(np.max(model.geom_size[g])))
  if not centers:
    centers = [derived.geom_xpos[g] for g in range(model.ngeom)]
    radii = [1.0] * len(centers)
  centers = np.asarray(centers)
  center = 0.5 * (centers.min(axis=0) + centers.max(axis=0))
  spread = np.linalg.norm(centers - center, axis=1) + np.asarray(radii)
  return center, max(float(spread.max()), 1e-2)
