"""
This defines the tolerances and default thresholds used by the system.
Values can be named by what they bound, as in 'zero_tol_rel', or by the
operation that uses them, as in 'intersect_max_iter'.
Each one can be overridden with an environment variable named
CONCEPTSIG_<NAME IN UPPER CASE>, e.g. CONCEPTSIG_DEFAULT_EPSILON=1e-5.
"""
import os

from exceptions import MalformedInput


def _override(name: str, default: float) -> float:
    """Read CONCEPTSIG_<NAME> from the environment, falling back to the default."""
    key = f"CONCEPTSIG_{name.upper()}"
    raw = os.environ.get(key)
    if raw is None:
        return default
    try:
        value = type(default)(raw)
    except ValueError:
        raise MalformedInput(f"can not parse {raw!r}", source=key)
    return value


# Eigenvalues at or below max(zero_tol_abs, zero_tol_rel * largest) count as zero.
zero_tol_abs = _override("zero_tol_abs", 1e-10)
zero_tol_rel = _override("zero_tol_rel", 1e-10)
default_epsilon = _override("default_epsilon", 1e-6)

symmetry_tol = _override("symmetry_tol", 1e-12)
psd_tol = _override("psd_tol", 1e-10)
projector_tol = _override("projector_tol", 1e-8)

intersect_tol = _override("intersect_tol", 1e-10)
intersect_max_iter = _override("intersect_max_iter", 10000)
dedup_threshold = _override("dedup_threshold", 1e-3)
subset_tol = _override("subset_tol", 1e-6)
rounding_warn_low = _override("rounding_warn_low", 0.2)
rounding_warn_high = _override("rounding_warn_high", 0.8)

level2_epsilon = _override("level2_epsilon", 1e-4)
level2_projection_dim = _override("level2_projection_dim", 40)

c_jl = _override("c_jl", 8.0)
basis_size_cap = _override("basis_size_cap", 5000)

buffer_size = _override("buffer_size", 64)
fan_in = _override("fan_in", 8)
match_threshold = _override("match_threshold", 0.9)
admit_threshold = _override("admit_threshold", 0.8)
layer_count = _override("layer_count", 2)

mlp_units = _override("mlp_units", 100000)
calibration_tol = _override("calibration_tol", 1e-6)
