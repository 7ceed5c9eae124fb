"""Viewer backend: websocket protocol, transport controls, perturbation."""

import asyncio
import json

import numpy as np
import pytest

from ctrlforge import suite
from ctrlforge.server import ViewerServer

websockets = pytest.importorskip('websockets')


async def _with_server(coro_fn, **server_kwargs):
  server = ViewerServer('pendulum', 'swingup', **server_kwargs)
  ready = asyncio.Event()
  task = asyncio.create_task(server.serve_forever(ready))
  try:
    await asyncio.wait_for(ready.wait(), 10)
    import websockets as ws
    async with ws.connect(f'ws://localhost:{server.port}') as client:
      return await coro_fn(server, client)
  finally:
    task.cancel()
    try:
      await task
    except asyncio.CancelledError:
      pass


def run(coro_fn, **kwargs):
  return asyncio.run(_with_server(coro_fn, **kwargs))


async def recv_json(client, timeout=5):
  return json.loads(await asyncio.wait_for(client.recv(), timeout))


async def next_frame(client, timeout=5):
  while True:
    message = await recv_json(client, timeout)
    if message['type'] == 'frame':
      return message


class TestProtocol:

  def test_hello_lists_model_contents(self):
    async def scenario(server, client):
      hello = await recv_json(client)
      return hello

    hello = run(scenario, port=0, seed=0)
    assert hello['type'] == 'hello' and hello['v'] == 1
    env = suite.load('pendulum', 'swingup', seed=0)
    assert len(hello['geoms']) == env.physics.model.ngeom
    assert hello['nq'] == env.physics.model.nq
    kinds = {g['kind'] for g in hello['geoms']}
    assert 'capsule' in kinds

  def test_streams_frames_with_unit_quaternions(self):
    async def scenario(server, client):
      await recv_json(client)            # hello
      frames = [await next_frame(client) for _ in range(10)]
      return frames

    frames = run(scenario, port=0, seed=0, frame_rate=200)
    times = [f['time'] for f in frames]
    assert times == sorted(times)
    for frame in frames:
      for pose in frame['geoms']:
        quat = np.array(pose[3:])
        assert np.linalg.norm(quat) == pytest.approx(1.0, abs=1e-4)

  def test_pause_freezes_time_and_step_advances_once(self):
    async def scenario(server, client):
      await recv_json(client)
      await client.send(json.dumps({'v': 1, 'type': 'pause'}))
      await asyncio.sleep(0.1)
      first = await next_frame(client)
      second = await next_frame(client)
      assert second['time'] == first['time']
      assert second['paused']
      await client.send(json.dumps({'v': 1, 'type': 'step'}))
      control_dt = 0.02
      deadline = asyncio.get_event_loop().time() + 5
      while True:
        frame = await next_frame(client)
        if frame['time'] > first['time']:
          break
        assert asyncio.get_event_loop().time() < deadline
      assert frame['time'] == pytest.approx(first['time'] + control_dt,
                                            abs=1e-9)
      return True

    assert run(scenario, port=0, seed=0, frame_rate=200)

  def test_reset_restarts_episode(self):
    async def scenario(server, client):
      await recv_json(client)
      for _ in range(5):
        await next_frame(client)
      await client.send(json.dumps({'v': 1, 'type': 'reset'}))
      deadline = asyncio.get_event_loop().time() + 5
      while True:
        frame = await next_frame(client)
        if frame['time'] == 0.0 and frame['step'] == 0:
          return True
        assert asyncio.get_event_loop().time() < deadline

    assert run(scenario, port=0, seed=0, frame_rate=200)

  def test_perturb_while_paused_queued_until_resume(self):
    async def scenario(server, client):
      await recv_json(client)
      await client.send(json.dumps({'v': 1, 'type': 'pause'}))
      await asyncio.sleep(0.1)
      frozen = await next_frame(client)
      await client.send(json.dumps({
          'v': 1, 'type': 'perturb', 'body': 1,
          'force': [150.0, 0.0, 0.0], 'point': [0.0, 0.0, 0.25],
          'duration': 30}))
      # While paused the perturbation must not advance or alter anything.
      for _ in range(4):
        frame = await next_frame(client)
        assert frame['time'] == frozen['time']
        assert frame['geoms'] == frozen['geoms']
      assert server._perturbations          # still queued
      await client.send(json.dumps({'v': 1, 'type': 'resume'}))
      deadline = asyncio.get_event_loop().time() + 5
      while server._perturbations:          # handed to the physics
        await asyncio.sleep(0.01)
        if asyncio.get_event_loop().time() > deadline:
          raise AssertionError('perturbation never applied after resume')
      moved = await next_frame(client)
      while moved['time'] == frozen['time']:
        moved = await next_frame(client)
      assert moved['time'] > frozen['time']
      return True

    assert run(scenario, port=0, seed=0, policy='zero', frame_rate=200)

  def test_unknown_message_reports_error(self):
    async def scenario(server, client):
      await recv_json(client)
      await client.send(json.dumps({'v': 1, 'type': 'warp'}))
      deadline = asyncio.get_event_loop().time() + 5
      while True:
        message = await recv_json(client)
        if message['type'] == 'error':
          return message
        assert asyncio.get_event_loop().time() < deadline

    message = run(scenario, port=0, seed=0, frame_rate=200)
    assert 'warp' in message['error']


class TestTrajectoryEquivalence:

  @staticmethod
  def headless_qpos_stream(n_steps, seed):
    env = suite.load('pendulum', 'swingup', seed=seed)
    policy_rng = np.random.RandomState(seed)
    spec = env.action_spec()
    env.reset()
    stream = [env.physics.data.qpos.copy()]
    for _ in range(n_steps):
      env.step(policy_rng.uniform(spec.minimum, spec.maximum, spec.shape))
      stream.append(env.physics.data.qpos.copy())
    return np.array(stream)

  def test_message_free_session_matches_headless(self):
    async def scenario(server, client):
      await recv_json(client)
      frames = []
      while len(frames) < 8:
        frame = await next_frame(client)
        if not frames or frame['step'] != frames[-1]['step']:
          frames.append(frame)
      return frames

    frames = run(scenario, port=0, seed=21, policy='random',
                 frame_rate=500)
    headless_env = suite.load('pendulum', 'swingup', seed=21)
    policy_rng = np.random.RandomState(21)
    spec = headless_env.action_spec()
    headless_env.reset()
    streamed = {f['step']: f['geoms'] for f in frames}
    for step in range(max(streamed) + 1):
      if step in streamed:
        expected = np.round(np.concatenate(
            [headless_env.physics.data.geom_xpos,
             _quats(headless_env.physics)], axis=1), 6)
        np.testing.assert_array_equal(np.array(streamed[step]), expected)
      headless_env.step(policy_rng.uniform(spec.minimum, spec.maximum,
                                           spec.shape))

  def test_perturbation_changes_trajectory(self):
    async def scenario(server, client):
      await recv_json(client)
      first = await next_frame(client)
      await client.send(json.dumps({
          'v': 1, 'type': 'perturb', 'body': 1,
          'force': [120.0, 0.0, 0.0], 'point': [0.0, 0.0, 0.25],
          'duration': 40}))
      frames = [await next_frame(client) for _ in range(30)]
      return first, frames

    first, frames = run(scenario, port=0, seed=21, policy='zero',
                        frame_rate=500)
    # Replay the same steps without the perturbation.
    env = suite.load('pendulum', 'swingup', seed=21)
    env.reset()
    diverged = False
    for frame in frames:
      while env._step_count < frame['step']:
        env.step(np.zeros(1))
      expected = np.round(np.concatenate(
          [env.physics.data.geom_xpos, _quats(env.physics)], axis=1), 6)
      if not np.array_equal(np.array(frame['geoms']), expected):
        diverged = True
        break
    assert diverged


def _quats(physics):
  from ctrlforge.engine import rotations
  return np.stack([rotations.mat_to_quat(m)
                   for m in physics.data.geom_xmat])
