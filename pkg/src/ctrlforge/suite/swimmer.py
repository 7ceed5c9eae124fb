"""Procedurally generated k-link planar swimmer in a viscous fluid.

The swimmer propels itself through anisotropic quadratic drag on its body
segments (sideways drag far exceeds lengthwise drag, as for slender
bodies at high Reynolds number). Reward is 1 with the nose inside the
target and falls off smoothly with distance as a Lorentzian.

The planar free base is modelled as slide-x + slide-y + yaw-hinge on the
head link; the k-1 inter-link joints are torque-actuated.
"""

import numpy as np

from ctrlforge import composer
from ctrlforge import mjcf
from ctrlforge.rl import rewards
from ctrlforge.suite import base

_LINK_LENGTH = 0.1
_LINK_RADIUS = 0.008
_TARGET_SIZE = 0.04
_FLUID_DENSITY = 3000.0
_JOINT_DAMPING = 2e-4
_GEAR = 3e-3


def build_model(n_links):
  if n_links < 2:
    raise ValueError(f'need at least 2 links, got {n_links}')
  model = mjcf.RootElement(model='swimmer')
  model.compiler.angle = 'radian'
  model.option.timestep = base.DEFAULT_PHYSICS_TIMESTEP
  model.option.integrator = 'rk4'
  model.option.gravity = [0, 0, 0]    # horizontal plane, top view
  model.option.density = _FLUID_DENSITY
  model.worldbody.add('light', name='top', pos=[0, 0, 2])
  model.worldbody.add('camera', name='overhead', pos=[0, 0, 2.2], fovy=60)
  model.worldbody.add('geom', name='target', type='sphere',
                      size=[_TARGET_SIZE], pos=[0.6, 0, 0], density=0,
                      rgba=[0.9, 0.2, 0.2, 0.8])
  head = model.worldbody.add('body', name='link_1')
  head.add('joint', name='root_x', type='slide', axis=[1, 0, 0])
  head.add('joint', name='root_y', type='slide', axis=[0, 1, 0])
  head.add('joint', name='root_yaw', type='hinge', axis=[0, 0, 1])
  head.add('geom', name='link_1', type='capsule',
           fromto=[0, 0, 0, -_LINK_LENGTH, 0, 0], size=[_LINK_RADIUS],
           rgba=[0.3, 0.5, 0.9, 1])
  head.add('site', name='nose', pos=[0.005, 0, 0], size=[0.004])
  bodies = [head]
  joints = []
  parent = head
  for i in range(2, n_links + 1):
    link = parent.add('body', name=f'link_{i}', pos=[-_LINK_LENGTH, 0, 0])
    joint = link.add('joint', name=f'joint_{i - 1}', type='hinge',
                     axis=[0, 0, 1], damping=_JOINT_DAMPING,
                     limited='true', range=[-1.5, 1.5])
    link.add('geom', name=f'link_{i}', type='capsule',
             fromto=[0, 0, 0, -_LINK_LENGTH, 0, 0], size=[_LINK_RADIUS],
             rgba=[0.3, 0.5, 0.9, 1])
    bodies.append(link)
    joints.append(joint)
    parent = link
  for i, joint in enumerate(joints):
    model.actuator.add('motor', name=f'motor_{i + 1}', joint=joint,
                       gear=_GEAR, ctrlrange=[-1, 1])
  return model, bodies, joints


class Swimmer(base.SuiteTask):

  def __init__(self, n_links=6, visualize_reward=False):
    model, bodies, joints = build_model(n_links)
    super().__init__(model, visualize_reward)
    self._n_links = n_links
    self._bodies = bodies
    self._joints = joints
    self._head = bodies[0]
    self._nose = model.find('site', 'nose')
    self._target = model.find('geom', 'target')
    self.register_reward_geoms([self._target])
    self._observables = {
        'joints': composer.Generic(self._joint_angles, enabled=True),
        'to_target': composer.Generic(self._nose_to_target, enabled=True),
        'body_velocities': composer.Generic(self._body_velocities,
                                            enabled=True),
    }

  @property
  def task_observables(self):
    return self._observables

  def _joint_angles(self, physics):
    return np.array([float(physics.bind(j).qpos) for j in self._joints])

  def _nose_to_target(self, physics):
    delta = (physics.bind(self._target).xpos
             - physics.bind(self._nose).xpos)
    head_mat = physics.bind(self._head).xmat
    return (head_mat.T @ delta)[:2].copy()

  def _body_velocities(self, physics):
    """Planar (vx, vy, yaw rate) of each link in its local frame."""
    spatial = physics.body_spatial_velocities()
    xpos = physics.data.xpos
    xmat = physics.data.xmat
    out = np.zeros(3 * self._n_links)
    for i, body in enumerate(self._bodies):
      index = physics.model.element_index(body)[1]
      omega, v_origin = spatial[index, :3], spatial[index, 3:]
      v_point = v_origin + np.cross(omega, xpos[index])
      local_v = xmat[index].T @ v_point
      out[3 * i:3 * i + 2] = local_v[:2]
      out[3 * i + 2] = omega[2]
    return out

  def initialize_episode(self, physics, random_state):
    super().initialize_episode(physics, random_state)
    for joint in self._joints:
      physics.bind(joint).qpos = random_state.uniform(-0.4, 0.4)
    angle = random_state.uniform(0, 2 * np.pi)
    radius = random_state.uniform(0.3, 0.8)
    physics.bind(self._target).pos = np.array(
        [radius * np.cos(angle), radius * np.sin(angle), 0.0])
    physics.forward()

  def compute_reward(self, physics):
    distance = float(np.linalg.norm(self._nose_to_target(physics)))
    swimmer_length = self._n_links * _LINK_LENGTH
    return rewards.tolerance(distance, bounds=(0, _TARGET_SIZE),
                             margin=5 * swimmer_length,
                             sigmoid='long_tail')
