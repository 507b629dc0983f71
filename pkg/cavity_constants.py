"""Constants, reference data and experiment presets for the spinning-cavity simulator."""
import math

# Generator limits
MAX_BALL_REFINEMENT = 3       # 1280 * 8**3 tets
MAX_CYLINDER_REFINEMENT = 4
BALL_BASE_SUBDIVISIONS = 2

# Solver defaults
DEFAULT_TIME_STEP = 0.01
DEFAULT_THETA = 0.5
DEFAULT_RELAXATION = 0.5
DEFAULT_SUBITER_TOLERANCE = 1e-8
DEFAULT_MAX_SUBITERS = 100
DEFAULT_PECLET_LIMIT = 100.0

# Analysis defaults
TC_RATIO = 0.1
FINAL_WINDOW_FRACTION = 0.1
STATIONARITY_TOLERANCE = 0.01
ENERGY_STEP_TOLERANCE = 1e-8
MOMENTUM_DRIFT_TOLERANCE = 0.01

# Inertia eigenvalues (A, B, C) of the published experiments
ASYMMETRIC_INERTIA = (5.54, 6.73, 6.76)
SYMMETRIC_INERTIA = (4.99, 4.99, 5.54)

# Published time to reach equilibrium: nu -> (t_c, p, q, r) at t_c
REFERENCE_TC = {
    0.1: (50.8, -0.4018, 0.4558, 4.8682),
    0.05: (63.3, 0.4908, -0.568, 4.7584),
    0.02: (75.2, -0.4887, -0.4171, -4.5768),
    0.01: (99.8, 0.6319, 0.4658, -4.3192),
}
REFERENCE_TC_EXPONENT = -0.305
FLIP_OVER_WINDOW = (0.0325, 0.0375)
FLIP_OVER_OMEGA = (6.2697, 0.4109, 0.0)

# Printed inequality sides of the initial-data experiments
PRINTED_SIDES = {
    'large_rotation_left': 9.6860,
    'large_rotation_right': 0.1310,
    'symmetric_right': 6.0786,
    'symmetric_energy': 341.6,
}

# Inputs of the initial-data experiments as published (inputs rounded to two decimals)
INITIAL_DATA_CASES = {
    'large_rotation': {
        'moments': ASYMMETRIC_INERTIA,
        'omega': (4.44, 3.14, 3.14),
        'energy': 0.0,
        'printed': {'major_spin': (PRINTED_SIDES['large_rotation_left'], PRINTED_SIDES['large_rotation_right'])},
    },
    'small_rotation': {
        'moments': ASYMMETRIC_INERTIA,
        'omega': (0.444, 0.314, 3.14),
        'energy': 0.0,
        'printed': {},
    },
    'symmetric_energetic': {
        'moments': SYMMETRIC_INERTIA,
        'omega': (4.44, 3.14, 3.14),
        'energy': PRINTED_SIDES['symmetric_energy'],
        'printed': {'axial_spin': (PRINTED_SIDES['symmetric_energy'], PRINTED_SIDES['symmetric_right'])},
    },
}


def tilted_omega(theta: float, phi: float, magnitude: float = 2.0 * math.pi) -> list:
    """Angular velocity magnitude*[cos(theta), cos(phi) sin(theta), sin(phi) sin(theta)]."""
    return [
        magnitude * math.cos(theta),
        magnitude * math.cos(phi) * math.sin(theta),
        magnitude * math.sin(phi) * math.sin(theta),
    ]


# Semi-axes of the ellipsoidal liquid used to reach the published eigenvalues
CALIBRATED_ELLIPSOID = (1.2, 1.0, 0.8)
SYMMETRIC_ELLIPSOID = (1.0, 1.0, 0.8)

PRESETS = {
    'spherical': {
        'kind': 'run',
        'mesh': {'shape': {'kind': 'ellipsoid', 'semi_axes': [1.0, 1.0, 1.0]}, 'refinement': 0},
        'liquid': {'density': 1.0, 'viscosity': 0.1},
        'body': {'inertia': {'mode': 'target_total', 'values': [3.0, 3.0, 3.0]}},
        'initial': {'omega': [0.0, 0.0, 1.0], 'v_mode': 'zero'},
        'solver': {'time_step': 0.05, 'final_time': 1.0},
    },
    'tilted': {
        'kind': 'run',
        'mesh': {'shape': {'kind': 'ellipsoid', 'semi_axes': list(CALIBRATED_ELLIPSOID)}, 'refinement': 0},
        'liquid': {'density': 1.0, 'viscosity': 0.1},
        'body': {'inertia': {'mode': 'target_total', 'values': list(ASYMMETRIC_INERTIA)}},
        'initial': {'angles': {'theta': math.pi / 48, 'phi': 0.0}, 'v_mode': 'zero'},
        'solver': {'time_step': 0.01, 'final_time': 80.0},
    },
    'large-rotation': {
        'kind': 'run',
        'mesh': {'shape': {'kind': 'ellipsoid', 'semi_axes': list(CALIBRATED_ELLIPSOID)}, 'refinement': 0},
        'liquid': {'density': 1.0, 'viscosity': 0.1},
        'body': {'inertia': {'mode': 'target_total', 'values': list(ASYMMETRIC_INERTIA)}},
        'initial': {'omega': [4.44, 3.14, 3.14], 'v_mode': 'zero'},
        'solver': {'time_step': 0.01, 'final_time': 80.0},
    },
    'small-rotation': {
        'kind': 'run',
        'mesh': {'shape': {'kind': 'ellipsoid', 'semi_axes': list(CALIBRATED_ELLIPSOID)}, 'refinement': 0},
        'liquid': {'density': 1.0, 'viscosity': 0.1},
        'body': {'inertia': {'mode': 'target_total', 'values': list(ASYMMETRIC_INERTIA)}},
        'initial': {'omega': [0.444, 0.314, 3.14], 'v_mode': 'zero'},
        'solver': {'time_step': 0.01, 'final_time': 80.0},
    },
    'symmetric': {
        'kind': 'run',
        'mesh': {'shape': {'kind': 'ellipsoid', 'semi_axes': list(SYMMETRIC_ELLIPSOID)}, 'refinement': 0},
        'liquid': {'density': 1.0, 'viscosity': 0.1},
        'body': {'inertia': {'mode': 'target_total', 'values': list(SYMMETRIC_INERTIA)}},
        'initial': {'omega': [4.44, 3.14, 3.14], 'v_mode': 'radial_profile'},
        'solver': {'time_step': 0.01, 'final_time': 80.0},
    },
    'flip-sweep': {
        'kind': 'flip-over',
        'mesh': {'shape': {'kind': 'ellipsoid', 'semi_axes': list(CALIBRATED_ELLIPSOID)}, 'refinement': 0},
        'liquid': {'density': 1.0, 'viscosity': 0.1},
        'body': {'inertia': {'mode': 'target_total', 'values': list(ASYMMETRIC_INERTIA)}},
        'initial': {'omega': list(FLIP_OVER_OMEGA), 'v_mode': 'zero'},
        'solver': {'time_step': 0.01, 'final_time': 80.0},
        'sweep': {'viscosities': [0.05, 0.04, 0.035, 0.03, 0.02]},
    },
}
