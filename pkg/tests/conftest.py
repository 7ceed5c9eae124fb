"""Shared fixtures and model builders for the test suite."""

import numpy as np
import pytest

from ctrlforge import mjcf

# The swinging box-and-sphere demo model used throughout the facade and
# kinematics tests: one hinged body carrying a box and an offset sphere.
SWING_XML = """
<mujoco model="swing_demo">
  <worldbody>
    <light name="top" pos="0 0 1"/>
    <body name="box_and_sphere" euler="0 0 -30">
      <joint name="swing" type="hinge" axis="1 -1 0" pos="-.2 -.2 -.2"/>
      <geom name="red_box" type="box" size=".2 .2 .2" rgba="1 0 0 1"/>
      <geom name="green_sphere" pos=".2 .2 .2" size=".1" rgba="0 1 0 1"/>
    </body>
  </worldbody>
</mujoco>
"""


def build_double_pendulum(damping=0.0, timestep=1e-3, integrator='rk4'):
  model = mjcf.RootElement(model='double_pendulum')
  model.compiler.angle = 'radian'
  model.option.timestep = timestep
  model.option.integrator = integrator
  upper = model.worldbody.add('body', name='upper')
  upper.add('joint', name='shoulder', type='hinge', axis=[0, 1, 0],
            damping=damping)
  upper.add('geom', name='arm1', type='capsule',
            fromto=[0, 0, 0, 0, 0, -0.5], size=[0.04])
  lower = upper.add('body', name='lower', pos=[0, 0, -0.5])
  lower.add('joint', name='elbow', type='hinge', axis=[0, 1, 0],
            damping=damping)
  lower.add('geom', name='arm2', type='capsule',
            fromto=[0, 0, 0, 0, 0, -0.5], size=[0.04])
  return model


def build_random_tree(rng, n_joints, slide_prob=0.3):
  """Random kinematic tree of hinge/slide joints with box geoms."""
  model = mjcf.RootElement(model='random_tree')
  model.compiler.angle = 'radian'
  bodies = []
  parent = model.worldbody
  for i in range(n_joints):
    body = parent.add('body', name=f'b{i}',
                      pos=rng.uniform(-0.5, 0.5, 3),
                      euler=rng.uniform(-1.0, 1.0, 3))
    kind = 'slide' if rng.rand() < slide_prob else 'hinge'
    body.add('joint', name=f'j{i}', type=kind,
             axis=rng.uniform(-1, 1, 3) + [0, 0, 1e-3],
             pos=rng.uniform(-0.2, 0.2, 3))
    body.add('geom', name=f'g{i}', type='box',
             size=rng.uniform(0.02, 0.2, 3), pos=rng.uniform(-0.2, 0.2, 3),
             euler=rng.uniform(-1.0, 1.0, 3))
    bodies.append(body)
    parent = bodies[rng.randint(len(bodies))]
  return model


@pytest.fixture
def swing_physics():
  from ctrlforge.physics import Physics
  return Physics.from_xml_string(SWING_XML)


@pytest.fixture
def rng():
  return np.random.RandomState(42)
