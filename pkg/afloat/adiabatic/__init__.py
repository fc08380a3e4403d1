from .paths import ParameterPath, PathSegment, builtin_path, \
    path_from_spec, sample_path, reversed_path, path_length, \
    invariant_crossings, BUILTIN_PATHS
from .sphere import BlochTrajectory, bloch_trajectory, berry_phase, \
    solid_angle, self_intersections, loop_count, OpenTrajectoryError, \
    ReferencePointError
from .energy import delta_e_fast, delta_e_slow, adiabatic_check
from .report import AdiabaticReport, analyze_path
