"""ctrlforge: physics-based reinforcement-learning environments.

Subpackages:
  mjcf      - object model for the XML scene description language
  engine    - reduced-coordinate rigid-body dynamics and integrators
  physics   - simulation facade with named indexing and rendering
  rl        - environment API, reward shaping, wrappers
  composer  - task composition: entities, observables, variations
  suite     - benchmark domains and the LQR solver
"""

__version__ = '0.1.0'
