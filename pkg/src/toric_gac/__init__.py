"""Mass-action reaction networks, toric differential inclusions, and
zero-separating curves, with experiment drivers for persistence and
global-attractor checks.

Layout: `network` (digraph model and .crn files), `dynamics` (fields,
banded rate schedules, integrator), `equilibria` (tree constants, balanced
states, Lyapunov certificates), `geometry` (cones and arrangements),
`embedding` (inclusion certificates and sampled verification), `surfaces`
(2-species separating curves), `experiments` (config-driven drivers),
`corpus` (bundled networks), `cli` (the `toric-gac` command).
"""

__version__ = "0.1.0"
