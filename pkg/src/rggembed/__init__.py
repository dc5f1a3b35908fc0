"""Embedding bounded-degree spanning trees into random geometric graphs.

The package has one module per stage of the pipeline:

- :mod:`rggembed.geometry`  -- threshold radii, tessellation, transit balls
- :mod:`rggembed.rgg`       -- point sampling, cell-list graph, colouring
- :mod:`rggembed.trees`     -- tree type and generators
- :mod:`rggembed.decompose` -- centroid splitting into comparable subtrees
- :mod:`rggembed.embed`     -- the two-step embedding algorithm + validator
- :mod:`rggembed.harness`   -- seeded experiments (sweeps, diameters, ...)
- :mod:`rggembed.cli`       -- command-line front end for the harness
"""

from .geometry import (
    ThresholdParams,
    Tessellation,
    TransitBalls,
    BallSystem,
    GeometryInfeasible,
    critical_radius,
    epsilon_param,
    simulation_epsilon,
    choose_odd_s,
    build_tessellation,
    transit_balls,
)
from .rgg import (
    PointSet,
    ColorAssignment,
    GeometricGraph,
    Box,
    BallRegion,
    HopDiameter,
    sample_points,
    color_points,
    build_graph,
    hop_diameter,
    count_in_region,
)
from .trees import (
    Tree,
    height_h,
    truncated_regular_tree,
    uniform_random_tree,
    random_bounded_degree_tree,
    path_tree,
    star_tree,
    tree_stats,
)
from .decompose import (
    Decomposition,
    weighted_centroid,
    split_tree,
    compute_levels,
)
from .embed import (
    Embedding,
    EventAReport,
    FailureInfo,
    check_event_a,
    embed_tree,
    verify_embedding,
    greedy_line_embed,
)

__version__ = "0.1.0"
