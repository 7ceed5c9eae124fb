"""Task composition: entities, observables, variations, environments."""

from ctrlforge.composer import distributions
from ctrlforge.composer import noises
from ctrlforge.composer import variation
from ctrlforge.composer.entity import Entity
from ctrlforge.composer.entity import ModelWrapperEntity
from ctrlforge.composer.entity import Observables
from ctrlforge.composer.entity import observable
from ctrlforge.composer.environment import Environment
from ctrlforge.composer.observation import Generic
from ctrlforge.composer.observation import MJCFFeature
from ctrlforge.composer.observation import Observable
from ctrlforge.composer.task import Task
