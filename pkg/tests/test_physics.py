"""Simulation facade: step ordering, reset semantics, named indexing,
binding."""

import math

import numpy as np
import pytest

from ctrlforge import errors
from ctrlforge import mjcf
from ctrlforge.physics import Physics

import conftest

ACTUATED_XML = """
<mujoco model="actuated">
  <option gravity="0 0 0"/>
  <worldbody>
    <body name="b1">
      <joint name="j1" type="hinge" axis="0 1 0"/>
      <geom name="g1" size=".05" mass="1"/>
      <body name="b2" pos="0 0 -.3">
        <joint name="j2" type="slide" axis="1 0 0"/>
        <geom name="g2" size=".05" mass="1"/>
      </body>
    </body>
  </worldbody>
  <actuator>
    <motor name="m1" joint="j1" gear="2"/>
    <motor name="m2" joint="j2" gear="1"/>
  </actuator>
  <sensor>
    <jointpos name="p1" joint="j1"/>
    <jointvel name="v1" joint="j1"/>
  </sensor>
</mujoco>
"""


class TestConstruction:

  def test_from_swing_model(self, swing_physics):
    assert swing_physics.model.nq == 1
    np.testing.assert_allclose(swing_physics.data.geom_xpos[1],
                               [0.273, 0.0732, 0.2], atol=5e-4)

  def test_composition_spans_attached_models(self):
    from test_mjcf import make_creature
    arena = mjcf.RootElement(model='arena')
    arena.worldbody.add('geom', name='floor', type='plane',
                        size=[2, 2, 0.1])
    creature = make_creature(3)
    arena.worldbody.attach(creature)
    physics = Physics.from_model(arena)
    assert physics.model.njnt == 6
    assert physics.model.nu == 6
    assert physics.model.name2id('creature/leg/hip', 'joint') >= 0

  def test_invalid_model_errors(self):
    bad = ('<mujoco><worldbody><body name="b"><joint name="j"/>'
           '</body></worldbody></mujoco>')
    with pytest.raises(errors.CompileError, match="'j'"):
      Physics.from_xml_string(bad)

  def test_data_attributes_cannot_be_rebound(self, swing_physics):
    with pytest.raises(AttributeError, match='assign into the array'):
      swing_physics.data.qpos = np.zeros(1)
    swing_physics.data.qpos[:] = [0.3]    # in-place write is fine


class TestResetContext:

  def test_set_state_inside_context(self, swing_physics):
    with swing_physics.reset_context():
      swing_physics.named.data.qpos['swing'] = np.pi
    assert swing_physics.named.data.geom_xpos[
        'green_sphere', 'z'] == pytest.approx(-0.6, abs=5e-4)

  def test_empty_mutator_gives_default_state(self, swing_physics):
    swing_physics.data.qpos[:] = 2.0
    swing_physics.step()
    with swing_physics.reset_context():
      pass
    assert swing_physics.data.qpos[0] == 0.0
    assert swing_physics.time() == 0.0

  def test_exception_leaves_consistent_state(self, swing_physics):
    with pytest.raises(ValueError):
      with swing_physics.reset_context():
        swing_physics.data.qpos[:] = np.zeros(5)   # wrong length
    # a full forward pass ran on exit; rendering and stepping still work
    swing_physics.step()

  def test_forward_pass_on_exit_fills_acceleration(self):
    physics = Physics.from_xml_string(ACTUATED_XML)
    with physics.reset_context():
      physics.data.qpos[:] = [math.pi / 2, 0.0]
    assert np.isfinite(physics.data.qacc).all()
    assert physics.data.sensordata[0] == pytest.approx(math.pi / 2)


class TestStepOrdering:

  def test_position_sensors_read_new_state(self):
    physics = Physics.from_xml_string(ACTUATED_XML)
    with physics.reset_context():
      physics.data.qvel[:] = [1.0, 0.0]
    qpos_before = physics.data.qpos[0]
    physics.step()
    # jointpos sensor reflects the post-step configuration exactly
    assert physics.data.sensordata[0] == physics.data.qpos[0]
    assert physics.data.qpos[0] != qpos_before

  def test_acceleration_refers_to_last_transition(self):
    physics = Physics.from_xml_string(ACTUATED_XML)
    physics.set_control([1.0, 0.0])
    physics.forward()
    qacc_at_start = physics.data.qacc.copy()
    physics.step()
    # qacc still describes the transition that was just completed (the
    # forces evaluated at the pre-step state), not the new state.
    np.testing.assert_allclose(physics.data.qacc, qacc_at_start,
                               rtol=1e-12)

  def test_time_advances_by_substeps(self, swing_physics):
    h = swing_physics.timestep()
    swing_physics.step(5)
    assert swing_physics.time() == pytest.approx(5 * h)

  def test_render_tracks_current_state(self, swing_physics):
    def centroid(seg, geom_id):
      ys, xs = np.nonzero(seg == geom_id)
      return np.array([xs.mean(), ys.mean()])

    with swing_physics.reset_context():
      swing_physics.data.qvel[:] = [6.0]
    first = centroid(swing_physics.render(96, 128, mode='segmentation'), 1)
    swing_physics.step(200)
    second = centroid(swing_physics.render(96, 128, mode='segmentation'), 1)
    assert np.linalg.norm(second - first) > 2.0


class TestNamedViews:

  def test_named_write_then_fk(self, swing_physics):
    with swing_physics.reset_context():
      swing_physics.named.data.qpos['swing'] = np.pi
    out = swing_physics.named.data.geom_xpos['green_sphere', ['z']]
    assert out.shape == (1,)
    assert out[0] == pytest.approx(-0.6, abs=5e-4)

  def test_named_equals_indexed(self, swing_physics):
    named = swing_physics.named.data.geom_xpos
    np.testing.assert_array_equal(named['red_box'],
                                  swing_physics.data.geom_xpos[0])
    np.testing.assert_array_equal(named[['red_box', 'green_sphere']],
                                  swing_physics.data.geom_xpos[[0, 1]])

  def test_named_write_visible_through_array(self, swing_physics):
    swing_physics.named.data.qvel['swing'] = 3.5
    assert swing_physics.data.qvel[0] == 3.5

  def test_unknown_name_raises(self, swing_physics):
    with pytest.raises(errors.UnknownNameError, match='nonexistent'):
      swing_physics.named.data.qpos['nonexistent']

  def test_property_equivalence_random_models(self, rng):
    for _ in range(5):
      model = conftest.build_random_tree(rng, rng.randint(1, 5))
      physics = Physics.from_model(model)
      physics.data.qpos[:] = rng.uniform(-1, 1, physics.model.nq)
      physics.forward()
      for i, name in enumerate(physics.model.names('joint')):
        assert physics.named.data.qpos[name] == physics.data.qpos[i]
        value = rng.randn()
        physics.named.data.qpos[name] = value
        assert physics.data.qpos[i] == value


class TestIdName:

  def test_paper_example(self, swing_physics):
    assert swing_physics.model.id2name(0, 'geom') == 'red_box'

  def test_inverse_property(self, swing_physics):
    model = swing_physics.model
    for namespace in ('body', 'joint', 'geom'):
      for i, name in enumerate(model.names(namespace)):
        assert model.name2id(model.id2name(i, namespace), namespace) == i

  def test_unknown_name(self, swing_physics):
    with pytest.raises(errors.UnknownNameError):
      swing_physics.model.name2id('nope', 'geom')
    with pytest.raises(errors.UnknownNameError):
      swing_physics.model.id2name(99, 'geom')


class TestBinding:

  def test_ctrl_write_equals_direct(self):
    model = mjcf.parse_string(ACTUATED_XML)
    physics = Physics.from_model(model)
    actuators = model.find_all('actuator')
    physics.bind(actuators).ctrl = [0.3, -0.2]
    np.testing.assert_array_equal(physics.data.ctrl, [0.3, -0.2])

  def test_vectorized_xpos_read(self):
    model = mjcf.parse_string(ACTUATED_XML)
    physics = Physics.from_model(model)
    geoms = model.find_all('geom')
    xpos = physics.bind(geoms).xpos
    assert xpos.shape == (2, 3)
    np.testing.assert_array_equal(xpos[:, 0],
                                  physics.data.geom_xpos[:, 0])

  def test_single_element_binding(self):
    model = mjcf.parse_string(ACTUATED_XML)
    physics = Physics.from_model(model)
    geom = model.find('geom', 'g2')
    assert physics.bind(geom).xpos.shape == (3,)
    physics.bind(geom).rgba = [0, 1, 0, 1]
    index = physics.model.name2id('g2', 'geom')
    np.testing.assert_array_equal(physics.data.geom_rgba[index],
                                  [0, 1, 0, 1])

  def test_empty_binding(self):
    model = mjcf.parse_string(ACTUATED_XML)
    physics = Physics.from_model(model)
    assert len(physics.bind([]).ctrl) == 0

  def test_mixed_namespaces_rejected(self):
    model = mjcf.parse_string(ACTUATED_XML)
    physics = Physics.from_model(model)
    with pytest.raises(errors.Error, match='one namespace'):
      physics.bind([model.find('geom', 'g1'), model.find('joint', 'j1')])

  def test_stale_element_rejected(self):
    model = mjcf.parse_string(ACTUATED_XML)
    physics = Physics.from_model(model)
    other = mjcf.RootElement()
    geom = other.worldbody.add('geom', name='x', size=[0.1])
    with pytest.raises(errors.UnknownNameError):
      physics.bind(geom)

  def test_joint_state_binding(self):
    model = mjcf.parse_string(ACTUATED_XML)
    physics = Physics.from_model(model)
    joint = model.find('joint', 'j1')
    physics.bind(joint).qpos = 0.8
    assert physics.data.qpos[0] == 0.8
    assert physics.bind(joint).qpos == 0.8

  def test_sensordata_binding_keeps_axis(self):
    model = mjcf.parse_string(ACTUATED_XML)
    physics = Physics.from_model(model)
    sensor = model.find('sensor', 'p1')
    assert physics.bind(sensor).sensordata.shape == (1,)


class TestDeterminismAndForces:

  def test_step_bitwise_deterministic(self, swing_physics):
    results = []
    for _ in range(2):
      with swing_physics.reset_context():
        swing_physics.data.qpos[:] = [0.9]
        swing_physics.data.qvel[:] = [-0.6]
      swing_physics.step(7)
      results.append(swing_physics.data.qpos.copy())
    assert (results[0] == results[1]).all()

  def test_apply_force_changes_trajectory(self, swing_physics):
    with swing_physics.reset_context():
      pass
    swing_physics.step(10)
    baseline = swing_physics.data.qpos.copy()
    with swing_physics.reset_context():
      pass
    swing_physics.apply_force('box_and_sphere', [50.0, 0, 0],
                              point=[0.2, 0.2, 0.2], duration=5)
    swing_physics.step(10)
    assert abs(swing_physics.data.qpos[0] - baseline[0]) > 1e-6

  def test_set_control_validates_shape(self):
    physics = Physics.from_xml_string(ACTUATED_XML)
    with pytest.raises(errors.Error, match='shape'):
      physics.set_control([1.0])
