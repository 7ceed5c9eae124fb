"""Websocket backend for the browser viewer.

Runs one simulation loop and one connection handler per client,
communicating through queues. The protocol is versioned JSON:

  server -> client:
    {"v": 1, "type": "hello", "model": ..., "geoms": [...], "camera": ...}
    {"v": 1, "type": "frame", "time": t, "step": i, "reward": r,
     "paused": bool, "geoms": [[x, y, z, qw, qx, qy, qz], ...],
     "rgba": [[r, g, b, a], ...]}
  client -> server:
    {"v": 1, "type": "pause" | "resume" | "step" | "reset"}
    {"v": 1, "type": "perturb", "body": id, "force": [fx, fy, fz],
     "point": [px, py, pz], "duration": substeps}

Frames are sent latest-wins: a slow client drops frames, never stalls the
simulation. A session that sends no messages leaves the trajectory
identical to a headless run with the same seed.
"""

import asyncio
import contextlib
import json

import numpy as np

from ctrlforge import suite
from ctrlforge.engine import inertia

PROTOCOL_VERSION = 1


def _policy_fn(name, action_spec, random_state):
  if name == 'zero':
    return lambda ts: np.zeros(action_spec.shape)
  if name == 'random':
    def policy(ts):
      del ts
      if action_spec.bounded:
        return random_state.uniform(action_spec.minimum,
                                    action_spec.maximum, action_spec.shape)
      return random_state.standard_normal(action_spec.shape)
    return policy
  raise ValueError(f"unknown policy '{name}'")


class ViewerServer:
  """Streams one environment's frames and accepts transport/perturbation
  messages."""

  def __init__(self, domain, task, policy='zero', seed=0, port=8765,
               frame_rate=None):
    self._env = suite.load(domain, task, seed=seed)
    self._policy = _policy_fn(policy, self._env.action_spec(),
                              np.random.RandomState(seed))
    self._task_id = f'{domain}:{task}'
    self._port = port
    self._paused = False
    self._step_once = False
    self._do_reset = False
    self._perturbations = []
    self._clients = set()
    self._timestep = None
    self._step_index = 0
    # Pace frames at the control rate by default, capped for sanity.
    control_dt = self._env.task.control_timestep
    if frame_rate:
      self._frame_dt = 1.0 / frame_rate
    else:
      self._frame_dt = max(control_dt, 1.0 / 120.0)

  @property
  def port(self):
    return self._port

  def hello_message(self):
    model = self._env.physics.model
    geoms = []
    for g in range(model.ngeom):
      geoms.append({
          'id': g,
          'name': model.id2name(g, 'geom'),
          'kind': inertia.GEOM_TYPE_NAMES[int(model.geom_type[g])],
          'size': model.geom_size[g].tolist(),
          'rgba': model.geom_rgba[g].tolist(),
          'body': int(model.geom_body[g]),
      })
    bodies = [model.id2name(b, 'body') for b in range(model.nbody)]
    return {
        'v': PROTOCOL_VERSION,
        'type': 'hello',
        'model': self._task_id,
        'nq': model.nq,
        'nv': model.nv,
        'geoms': geoms,
        'bodies': bodies,
        'body_mass': [float(m) for m in model.body_mass],
        'camera': {'azimuth': 90.0, 'elevation': -30.0, 'distance': None},
    }

  def frame_message(self):
    physics = self._env.physics
    data = physics.data
    poses = np.concatenate(
        [data.geom_xpos, _geom_quats(physics)], axis=1)
    reward = None
    if self._timestep is not None and self._timestep.reward is not None:
      reward = float(self._timestep.reward)
    return {
        'v': PROTOCOL_VERSION,
        'type': 'frame',
        'time': float(physics.time()),
        'step': self._step_index,
        'reward': reward,
        'paused': self._paused,
        'geoms': np.round(poses, 6).tolist(),
        'rgba': np.round(physics.data.geom_rgba, 4).tolist(),
    }

  # -- simulation loop ------------------------------------------------------

  async def _sim_loop(self):
    self._timestep = self._env.reset()
    self._step_index = 0
    self._broadcast(self.frame_message())
    while True:
      advanced = False
      if self._do_reset:
        self._timestep = self._env.reset()
        self._step_index = 0
        self._do_reset = False
        advanced = True
      elif not self._paused or self._step_once:
        for body, force, point, duration in self._perturbations:
          self._env.physics.apply_force(body, force, point, duration)
        self._perturbations.clear()
        action = self._policy(self._timestep)
        self._timestep = self._env.step(action)
        self._step_index = 0 if self._timestep.first() \
            else self._step_index + 1
        self._step_once = False
        advanced = True
      if advanced or self._paused:
        self._broadcast(self.frame_message())
      await asyncio.sleep(self._frame_dt)

  def _broadcast(self, message):
    payload = json.dumps(message)
    for queue in self._clients:
      # Latest-wins: drop the stale frame if the client lags.
      if queue.full():
        with contextlib.suppress(asyncio.QueueEmpty):
          queue.get_nowait()
      queue.put_nowait(payload)

  # -- protocol -------------------------------------------------------------

  def handle_message(self, raw):
    message = json.loads(raw)
    kind = message.get('type')
    if kind == 'pause':
      self._paused = True
    elif kind == 'resume':
      self._paused = False
    elif kind == 'step':
      self._step_once = True
    elif kind == 'reset':
      self._do_reset = True
    elif kind == 'perturb':
      body = int(message['body'])
      force = [float(v) for v in message['force']]
      point = message.get('point')
      if point is not None:
        point = [float(v) for v in point]
      duration = int(message.get('duration', 1))
      self._perturbations.append((body, force, point, duration))
    else:
      raise ValueError(f"unknown message type '{kind}'")

  async def _client_handler(self, websocket):
    queue = asyncio.Queue(maxsize=2)
    self._clients.add(queue)
    try:
      await websocket.send(json.dumps(self.hello_message()))

      async def sender():
        while True:
          await websocket.send(await queue.get())

      send_task = asyncio.create_task(sender())
      try:
        async for raw in websocket:
          try:
            self.handle_message(raw)
          except (ValueError, KeyError) as e:
            await websocket.send(json.dumps(
                {'v': PROTOCOL_VERSION, 'type': 'error', 'error': str(e)}))
      finally:
        send_task.cancel()
        with contextlib.suppress(asyncio.CancelledError):
          await send_task
    finally:
      self._clients.discard(queue)

  async def serve_forever(self, ready_event=None):
    import websockets
    async with websockets.serve(self._client_handler, 'localhost',
                                self._port) as server:
      if self._port == 0:
        self._port = server.sockets[0].getsockname()[1]
      if ready_event is not None:
        ready_event.set()
      await self._sim_loop()

  def run(self):
    asyncio.run(self.serve_forever())


def _geom_quats(physics):
  from ctrlforge.engine import rotations
  mats = physics.data.geom_xmat
  return np.stack([rotations.mat_to_quat(m) for m in mats]) \
      if len(mats) else np.zeros((0, 4))
