"""Command-line surface: list, run, render, bench, lqr-solve, serve,
model validate/print.

Every subcommand exits 0 on success and 1 with a one-line diagnostic on
error. `--json` outputs are stable across runs for fixed inputs.
"""

import argparse
import json
import os
import sys
import time

import numpy as np

from ctrlforge import errors
from ctrlforge import mjcf
from ctrlforge import suite
from ctrlforge.engine import compiler
from ctrlforge.physics import Physics
from ctrlforge.rendering import image_io
from ctrlforge.suite import lqr as lqr_lib
from ctrlforge.suite import riccati

DEFAULT_SEED = 0


def main(argv=None):
  parser = _build_parser()
  args = parser.parse_args(argv)
  try:
    return args.func(args) or 0
  except errors.Error as e:
    print(f'error: {e}', file=sys.stderr)
    return 1
  except (ValueError, OSError) as e:
    print(f'error: {e}', file=sys.stderr)
    return 1


def _build_parser():
  parser = argparse.ArgumentParser(
      prog='ctrlforge',
      description='Physics-based reinforcement-learning environments.')
  sub = parser.add_subparsers(required=True)

  p = sub.add_parser('list', help='list registered tasks')
  p.add_argument('--tag', default='all',
                 choices=['benchmarking', 'extra', 'all'])
  p.add_argument('--json', action='store_true')
  p.set_defaults(func=_cmd_list)

  p = sub.add_parser('run', help='run episodes with a scripted policy')
  p.add_argument('task_id', help='task as domain:task')
  p.add_argument('--episodes', type=int, default=1)
  p.add_argument('--seed', type=int, default=DEFAULT_SEED)
  p.add_argument('--policy', default='random',
                 choices=['random', 'zero', 'lqr-optimal'])
  p.add_argument('--json', action='store_true')
  p.set_defaults(func=_cmd_run)

  p = sub.add_parser('render', help='render frames to image files')
  p.add_argument('task_id')
  p.add_argument('--frames', type=int, default=1)
  p.add_argument('--out', default='frames')
  p.add_argument('--camera', default=None)
  p.add_argument('--size', default='320x240')
  p.add_argument('--mode', default='rgb',
                 choices=['rgb', 'depth', 'segmentation'])
  p.add_argument('--format', default='png', choices=['png', 'ppm'])
  p.add_argument('--seed', type=int, default=DEFAULT_SEED)
  p.set_defaults(func=_cmd_render)

  p = sub.add_parser('bench', help='measure simulation throughput')
  p.add_argument('task_id')
  p.add_argument('--steps', type=int, default=1000)
  p.add_argument('--seed', type=int, default=DEFAULT_SEED)
  p.add_argument('--json', action='store_true')
  p.set_defaults(func=_cmd_bench)

  p = sub.add_parser('lqr-solve', help='solve the mass-chain LQR problem')
  p.add_argument('--n', type=int, required=True, help='number of masses')
  p.add_argument('--m', type=int, required=True,
                 help='number of actuated masses')
  p.add_argument('--tol', type=float, default=1e-12)
  p.add_argument('--unit', action='store_true',
                 help='solve the canonical unit system (A=I, B=[I;0], '
                      'Q=I, R=I) instead of the mass chain')
  p.add_argument('--json', action='store_true')
  p.set_defaults(func=_cmd_lqr_solve)

  p = sub.add_parser('serve', help='serve the browser viewer backend')
  p.add_argument('task_id')
  p.add_argument('--port', type=int, default=8765)
  p.add_argument('--policy', default='zero', choices=['random', 'zero'])
  p.add_argument('--seed', type=int, default=DEFAULT_SEED)
  p.set_defaults(func=_cmd_serve)

  p = sub.add_parser('model', help='model file utilities')
  model_sub = p.add_subparsers(required=True)
  v = model_sub.add_parser('validate', help='parse and compile a model file')
  v.add_argument('file')
  v.set_defaults(func=_cmd_model_validate)
  pr = model_sub.add_parser('print', help='parse and reserialize a model')
  pr.add_argument('file')
  pr.set_defaults(func=_cmd_model_print)

  return parser


def _parse_task_id(task_id):
  domain, sep, task = task_id.partition(':')
  if not sep or not domain or not task:
    raise errors.Error(f"task id must be domain:task, got '{task_id}'")
  return domain, task


def _cmd_list(args):
  rows = []
  for entry in suite.entries(args.tag):
    rows.append({
        'task': f'{entry.domain}:{entry.task}',
        'dim_state': entry.dims[0],
        'dim_action': entry.dims[1],
        'dim_obs': entry.dims[2],
        'tags': sorted(entry.tags),
    })
  if args.json:
    print(json.dumps(rows, indent=2))
    return
  width = max(len(r['task']) for r in rows) + 2
  print(f"{'task':{width}s} {'dims (S,A,O)':14s} tags")
  for r in rows:
    dims = f"({r['dim_state']},{r['dim_action']},{r['dim_obs']})"
    print(f"{r['task']:{width}s} {dims:14s} {','.join(r['tags'])}")


def _make_policy(name, env, seed):
  spec = env.action_spec()
  rng = np.random.RandomState(seed)
  if name == 'zero':
    return lambda ts: np.zeros(spec.shape)
  if name == 'random':
    def random_policy(ts):
      del ts
      if spec.bounded:
        return rng.uniform(spec.minimum, spec.maximum, spec.shape)
      return rng.standard_normal(spec.shape)
    return random_policy
  if name == 'lqr-optimal':
    task = env.task
    if not isinstance(task, lqr_lib.Lqr):
      raise errors.Error('--policy lqr-optimal is only valid for lqr tasks')
    gain = lqr_lib.solve(task.lqr_spec).gain

    def lqr_policy(ts):
      x = np.concatenate([ts.observation['position'],
                          ts.observation['velocity']])
      return -gain @ x
    return lqr_policy
  raise errors.Error(f"unknown policy '{name}'")


def _cmd_run(args):
  domain, task = _parse_task_id(args.task_id)
  env = suite.load(domain, task, seed=args.seed)
  policy = _make_policy(args.policy, env, args.seed)
  episodes = []
  start = time.perf_counter()
  total_steps = 0
  for _ in range(args.episodes):
    timestep = env.reset()
    episode_return = 0.0
    steps = 0
    final_discount = None
    while not timestep.last():
      timestep = env.step(policy(timestep))
      episode_return += timestep.reward
      final_discount = timestep.discount
      steps += 1
    total_steps += steps
    episodes.append({'return': episode_return, 'steps': steps,
                     'final_discount': final_discount})
  elapsed = time.perf_counter() - start
  report = {
      'task': args.task_id,
      'policy': args.policy,
      'seed': args.seed,
      'episodes': episodes,
      'steps_per_second': round(total_steps / elapsed, 1),
  }
  if args.json:
    print(json.dumps(report, indent=2))
  else:
    for i, ep in enumerate(episodes):
      print(f"episode {i}: return={ep['return']:.3f} steps={ep['steps']} "
            f"final_discount={ep['final_discount']}")
    print(f"{report['steps_per_second']} steps/s")


def _cmd_render(args):
  domain, task = _parse_task_id(args.task_id)
  try:
    width, height = (int(v) for v in args.size.lower().split('x'))
  except ValueError:
    raise errors.Error(f"--size must look like 320x240, got '{args.size}'")
  env = suite.load(domain, task, seed=args.seed)
  policy = _make_policy('random', env, args.seed)
  camera = args.camera
  if camera is not None and camera.lstrip('-').isdigit():
    camera = int(camera)
  os.makedirs(args.out, exist_ok=True)
  timestep = env.reset()
  written = []
  for i in range(args.frames):
    image = env.physics.render(height=height, width=width,
                               camera_id=camera, mode=args.mode)
    path = os.path.join(args.out, f'frame_{i:04d}.{args.format}')
    if args.format == 'ppm':
      image_io.write_ppm(path, image)
    else:
      image_io.write_png(path, image)
    written.append(path)
    if i + 1 < args.frames:
      timestep = env.step(policy(timestep))
  for path in written:
    print(path)


def _cmd_bench(args):
  domain, task = _parse_task_id(args.task_id)
  env = suite.load(domain, task, seed=args.seed)
  policy = _make_policy('random', env, args.seed)
  timestep = env.reset()
  policy_step = policy(timestep)
  env.step(policy_step)    # warm up (JIT compilation etc.)
  timestep = env.reset()
  start = time.perf_counter()
  for _ in range(args.steps):
    timestep = env.step(policy(timestep))
    if timestep.last():
      timestep = env.reset()
  elapsed = time.perf_counter() - start
  rate = args.steps / elapsed
  if args.json:
    print(json.dumps({'task': args.task_id, 'steps': args.steps,
                      'steps_per_second': round(rate, 1)}))
  else:
    print(f'{args.task_id}: {rate:.1f} control steps/s '
          f'({args.steps} steps in {elapsed:.2f}s)')


def _cmd_lqr_solve(args):
  if args.m > args.n:
    raise errors.Error(f'need m <= n, got n={args.n}, m={args.m}')
  if args.m < 1 or args.n < 1:
    raise errors.Error('need n >= 1 and m >= 1')
  if args.unit:
    a = np.eye(args.n)
    b = np.eye(args.n)[:, :args.m]
    q, r = np.eye(args.n), np.eye(args.m)
    solution = riccati.solve_dare(a, b, q, r, tol=args.tol)
    check = riccati.dare_residual(solution, a, b, q, r)
  else:
    spec = lqr_lib.make_spec(args.n, args.m)
    solution = lqr_lib.solve(spec, tol=args.tol)
    check = riccati.dare_residual(solution, spec.a, spec.b, spec.q,
                                  spec.r)
  if args.json:
    print(json.dumps({
        'n': args.n, 'm': args.m,
        'P': solution.value_matrix.tolist(),
        'K': solution.gain.tolist(),
        'iterations': solution.iterations,
        'residual': solution.residual,
        'dare_residual': check,
    }, indent=2))
  else:
    np.set_printoptions(precision=6, suppress=True)
    print(f'converged in {solution.iterations} iterations, '
          f'residual {solution.residual:.2e} (DARE defect {check:.2e})')
    print('P ='); print(solution.value_matrix)
    print('K ='); print(solution.gain)


def _cmd_serve(args):
  from ctrlforge import server
  domain, task = _parse_task_id(args.task_id)
  viewer = server.ViewerServer(domain, task, policy=args.policy,
                               seed=args.seed, port=args.port)
  print(f'serving {args.task_id} on ws://localhost:{args.port} '
        f'(policy={args.policy}, seed={args.seed})')
  viewer.run()


def _cmd_model_validate(args):
  model = mjcf.parse_file(args.file)
  compiled = compiler.compile_model(model)
  physics = Physics(compiled)
  del physics
  print(f'{args.file}: OK ({compiled.nbody - 1} bodies, {compiled.njnt} '
        f'joints, {compiled.ngeom} geoms, {compiled.nu} actuators)')


def _cmd_model_print(args):
  model = mjcf.parse_file(args.file)
  sys.stdout.write(model.to_xml_string())


if __name__ == '__main__':
  sys.exit(main())
