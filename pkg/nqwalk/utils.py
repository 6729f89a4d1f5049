import math
import re

import numpy

IDENTITY = numpy.eye(2, dtype=numpy.complex128)
SIGMA_1 = numpy.array([[0, 1], [1, 0]], dtype=numpy.complex128)
SIGMA_2 = numpy.array([[0, -1j], [1j, 0]], dtype=numpy.complex128)
SIGMA_3 = numpy.array([[1, 0], [0, -1]], dtype=numpy.complex128)
PAULI = {"x": SIGMA_1, "y": SIGMA_2, "z": SIGMA_3}

# Representation in which the stationary soliton profiles are real
SOLITON_BETA = SIGMA_3
SOLITON_ALPHA = -SIGMA_2

# Empirical stability limit of boosted solitons on the walk, in units of c
STABLE_VELOCITY_FRACTION = 0.8

SCENARIOS = [
    "stationary",
    "collision",
    "diffusion",
    "bloch-sweep",
    "g-sweep",
    "theta-sweep",
    "g-theta-surface",
    "dispersion-check",
]

# Bloch angles (theta_b, phi_b) of the two coin states |up> +- i|down>
COIN_STATES = {
    "phi_plus": (math.pi / 2, math.pi / 2),
    "phi_minus": (math.pi / 2, 3 * math.pi / 2),
}

default_config = {
    "walk": {"theta": math.pi / 4, "kind": "scalar", "g": 1.0},
    "lattice": None,
    "steps": 200,
    "solitons": None,
    "coin_state": {"theta_b": math.pi / 2, "phi_b": math.pi / 2, "charge": 1.0},
    "bloch_grid": {"theta_spacing": 0.04, "phi_spacing": 0.04},
    "g_grid": {"start": 0.0, "stop": 2.0, "num": 21},
    "theta_grid": {"start": 0.0, "stop": math.pi, "num": 21},
    "dispersion_grid": {"p_points": 100, "theta_points": 100},
    "observables": {
        "localization_radius": None,
        "peak_min_separation": 4,
        "peak_threshold": 0.1,
    },
    "snapshot_stride": None,
    "output": None,
    "workers": 1,
    "chunk_size": 256,
}

# Default collision offset x0, in sites. At the default drift of about 0.22
# sites per step the solitons meet near step 93 of 200.
DEFAULT_COLLISION_OFFSET = 20.0

# Scalar bilinear read by the gate when a configuration does not name one
SCALAR_BILINEAR_DEFAULTS = {"stationary": "dirac", "collision": "dirac"}
DEFAULT_SCALAR_BILINEAR = "intensity"

_ANGLE_PATTERN = re.compile(
    r"^\s*(?P<sign>[+-]?)\s*(?:(?P<num>\d+(?:\.\d*)?)\s*\*?\s*)?pi"
    r"(?:\s*/\s*(?P<den>\d+(?:\.\d*)?))?\s*$"
)


def parse_angle(value, name="angle"):
    """Return an angle in radians from a number or a string such as "3*pi/4"."""
    if isinstance(value, bool):
        raise TypeError(f"Type of {name} must be float or str.")
    if isinstance(value, (int, float)):
        return float(value)
    if not isinstance(value, str):
        raise TypeError(f"Type of {name} must be float or str.")
    match = _ANGLE_PATTERN.match(value)
    if match is None:
        try:
            return float(value)
        except ValueError:
            raise ValueError(f'Could not parse {name} "{value}".')
    angle = math.pi
    if match.group("num"):
        angle *= float(match.group("num"))
    if match.group("den"):
        angle /= float(match.group("den"))
    if match.group("sign") == "-":
        angle = -angle
    return angle


def bloch_spinor(theta_b, phi_b, charge=1.0):
    """Coin state sqrt(charge) * [cos(theta_b/2), sin(theta_b/2) e^{i phi_b}]."""
    scale = math.sqrt(charge)
    return (
        complex(scale * math.cos(theta_b / 2)),
        complex(scale * math.sin(theta_b / 2) * numpy.exp(1j * phi_b)),
    )


def named_spinor(name, charge=1.0):
    """phi_plus or phi_minus as sqrt(charge / 2) (1, +-i).

    Both components share one magnitude, so swapping u and v maps one state
    onto i times the other without rounding.
    """
    if name not in COIN_STATES:
        raise ValueError(
            f"Invalid coin state {name}. Must be one of [{', '.join(COIN_STATES)}]."
        )
    scale = math.sqrt(charge / 2)
    sign = 1.0 if name == "phi_plus" else -1.0
    return complex(scale), complex(0.0, sign * scale)
