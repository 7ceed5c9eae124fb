"""Reduced-coordinate rigid-body dynamics engine."""

from ctrlforge.engine.compiler import compile_model
from ctrlforge.engine.dynamics import actuation_forces
from ctrlforge.engine.dynamics import bias_forces
from ctrlforge.engine.dynamics import dynamics_stage
from ctrlforge.engine.dynamics import energy
from ctrlforge.engine.dynamics import fluid_drag
from ctrlforge.engine.dynamics import inverse_dynamics
from ctrlforge.engine.dynamics import mass_matrix
from ctrlforge.engine.dynamics import passive_forces
from ctrlforge.engine.dynamics import position_stage
from ctrlforge.engine.dynamics import qacc_at
from ctrlforge.engine.inertia import geom_inertia
from ctrlforge.engine.integrators import step
from ctrlforge.engine.model import CompiledModel
from ctrlforge.engine.model import DerivedData
from ctrlforge.engine.model import SimState
from ctrlforge.engine.rotations import euler_to_quat
from ctrlforge.engine.rotations import mat_to_quat
from ctrlforge.engine.rotations import quat_mul
from ctrlforge.engine.rotations import quat_normalize
from ctrlforge.engine.rotations import quat_rotate
from ctrlforge.engine.rotations import quat_to_mat
