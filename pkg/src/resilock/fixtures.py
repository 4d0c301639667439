"""Embedded numerical fixtures: the ADMIRE fighter-jet models and three
hand-built 2-resilient sign matrices.

Angles are radians throughout.
"""
import numpy as np

DEG = np.pi / 180.0

# Simplified linearized ADMIRE dynamics; state is (roll, pitch, yaw) rate in rad/s.
ADMIRE_A = np.array([
    [-0.997, 0.0, 0.618],
    [0.0, -0.506, 0.0],
    [-0.094, 0.0, -0.213],
])

ADMIRE_BBAR = np.array([
    [0.0, -4.242, 4.242, 1.487],
    [1.653, -1.274, -1.274, 0.002],
    [0.0, -0.281, 0.281, -0.882],
])

ADMIRE_LABELS = ("canard", "right elevon", "left elevon", "rudder")

ADMIRE_RANGES = np.array([
    [-25.0 * DEG, 55.0 * DEG],
    [-30.0 * DEG, 30.0 * DEG],
    [-30.0 * DEG, 30.0 * DEG],
    [-30.0 * DEG, 30.0 * DEG],
])

ADMIRE_X0 = np.array([1.0, 1.0, 1.0])
ADMIRE_TARGET_RADIUS = 0.1

# LQR gain printed for Q = I, R = I with the canard uncontrolled; rows are
# (right elevon, left elevon, rudder).
ADMIRE_LQR_K = np.array([
    [-0.5825, -0.5358, -0.1659],
    [0.5826, -0.5360, 0.1653],
    [0.2198, 0.0007, -0.7564],
])

# Driftless (V_t, q, r) model at Mach 0.75, 3000 m. One row per actuator;
# the afterburner row is already scaled to 20 % of the thrust command.
ADMIRE_DRIFTLESS_BBAR_T = np.array([
    [-2.7, 7.1, -1.9],
    [-2.7, 7.1, 1.9],
    [-1.0, -7.7, -1.1],
    [-1.8, -13.0, -3.0],
    [-1.8, -13.0, 3.0],
    [-1.0, -7.7, 1.1],
    [-1.9, 0.0, -11.0],
    [-0.8, -0.5, 0.0],
    [-4.3, -0.7, 0.0],
    [1.2, 0.0, 0.0],
    [-71.0, 1.2, -710.0],
    [-113.0, -882.0, 0.0],
])

ADMIRE_DRIFTLESS_LABELS = (
    "right canard",
    "left canard",
    "right outboard elevon",
    "right inboard elevon",
    "left inboard elevon",
    "left outboard elevon",
    "rudder",
    "leading edge flaps",
    "landing gear",
    "afterburner",
    "yaw thrust vectoring",
    "pitch thrust vectoring",
)

THRUST_VECTORING_COLUMNS = (10, 11)


def _signs(text: str) -> np.ndarray:
    rows = [[int(v) for v in line.split()] for line in text.strip().splitlines()]
    return np.array(rows, dtype=float)


SIGN_6X24 = _signs("""
 1  1  1  1  1 -1 -1 -1 -1 -1  1  1  1  1  1  1  1  1 -1 -1 -1  1 -1  1
 1 -1  1  1  1 -1  1  1  1  1 -1 -1  1  1  1  1  1 -1  1 -1  1 -1  1  1
 1  1  1  1  1  1 -1  1  1  1 -1  1 -1 -1 -1  1 -1  1 -1  1 -1 -1  1  1
 1  1 -1  1  1  1  1 -1  1  1  1  1 -1  1  1 -1 -1 -1  1 -1 -1  1  1 -1
 1  1  1 -1  1  1  1  1 -1  1  1 -1  1 -1  1  1 -1 -1 -1  1  1  1 -1 -1
 1  1  1  1 -1  1  1  1  1 -1  1  1  1  1 -1 -1  1  1  1  1  1 -1 -1 -1
""")

# Printed transposed (one row per actuator).
SIGN_8X32 = _signs("""
 1  1  1  1  1  1  1  1
 1  1  1  1  1  1  1 -1
 1  1  1  1  1  1 -1  1
 1  1  1  1  1  1 -1 -1
 1  1  1  1 -1 -1  1  1
 1  1 -1 -1  1  1  1  1
-1 -1  1  1  1  1  1  1
 1  1  1  1 -1 -1  1 -1
 1  1 -1 -1  1  1  1 -1
-1 -1  1  1  1  1  1 -1
 1  1  1  1 -1 -1 -1  1
 1  1 -1 -1  1  1 -1  1
-1 -1  1  1  1  1 -1  1
 1 -1  1 -1  1 -1  1  1
 1 -1 -1  1  1 -1  1  1
-1  1  1 -1  1 -1  1  1
-1  1 -1  1  1 -1  1  1
 1 -1 -1  1 -1  1  1  1
 1 -1  1 -1 -1  1  1  1
-1  1 -1  1 -1  1  1  1
-1  1  1 -1 -1  1  1  1
 1  1  1  1 -1 -1 -1 -1
 1  1 -1 -1  1  1 -1 -1
 1 -1 -1  1  1 -1  1 -1
 1 -1  1 -1  1 -1  1 -1
 1 -1 -1  1 -1  1  1 -1
 1 -1  1 -1 -1  1  1 -1
 1 -1 -1  1 -1  1 -1  1
 1 -1 -1  1  1 -1 -1  1
 1 -1  1 -1  1 -1 -1  1
 1 -1  1 -1 -1  1 -1  1
 1  1 -1 -1 -1 -1  1  1
""").T

SIGN_12X46 = _signs("""
 1  1  1  1  1  1  1  1  1  1  1  1
-1  1  1 -1  1  1  1 -1 -1  1 -1  1
-1 -1  1  1 -1  1  1  1 -1 -1 -1 -1
-1  1 -1  1  1 -1  1  1 -1  1 -1  1
-1 -1  1 -1  1  1 -1  1 -1 -1 -1 -1
-1 -1 -1  1 -1  1  1 -1 -1 -1 -1 -1
-1 -1 -1 -1  1 -1  1  1 -1 -1 -1 -1
-1  1 -1 -1 -1  1 -1  1 -1  1 -1  1
-1  1  1 -1 -1 -1  1 -1 -1  1 -1  1
-1  1  1  1 -1 -1 -1  1 -1  1 -1  1
-1 -1  1  1  1 -1 -1 -1 -1 -1 -1 -1
-1  1 -1  1  1  1 -1 -1 -1  1 -1  1
 1  1  1  1  1  1  1  1 -1 -1  1  1
-1  1  1 -1  1  1  1 -1  1 -1 -1  1
-1 -1  1  1 -1  1  1  1  1  1 -1 -1
-1  1 -1  1  1 -1  1  1  1 -1 -1  1
-1 -1  1 -1  1  1 -1  1  1  1 -1 -1
-1 -1 -1  1 -1  1  1 -1  1  1 -1 -1
-1 -1 -1 -1  1 -1  1  1  1  1 -1 -1
-1  1 -1 -1 -1  1 -1  1  1 -1 -1  1
-1  1  1 -1 -1 -1  1 -1  1 -1 -1  1
-1  1  1  1 -1 -1 -1  1  1 -1 -1  1
-1 -1  1  1  1 -1 -1 -1  1  1 -1 -1
-1  1 -1  1  1  1 -1 -1  1 -1 -1  1
 1  1  1  1  1  1  1  1  1  1 -1 -1
-1  1  1 -1  1  1  1 -1 -1  1  1 -1
-1 -1  1  1 -1  1  1  1 -1 -1  1  1
-1  1 -1  1  1 -1  1  1 -1  1  1 -1
-1 -1  1 -1  1  1 -1  1 -1 -1  1  1
-1 -1 -1  1 -1  1  1 -1 -1 -1  1  1
-1 -1 -1 -1  1 -1  1  1 -1 -1  1  1
-1  1 -1 -1 -1  1 -1  1 -1  1  1 -1
-1  1  1 -1 -1 -1  1 -1 -1  1  1 -1
-1  1  1  1 -1 -1 -1  1 -1  1  1 -1
-1 -1  1  1  1 -1 -1 -1 -1 -1  1  1
-1  1 -1  1  1  1 -1 -1 -1  1  1 -1
 1  1  1  1  1  1  1  1 -1 -1 -1 -1
-1  1  1 -1  1  1  1 -1  1 -1  1 -1
-1 -1  1  1 -1  1  1  1  1  1  1  1
-1  1 -1  1  1 -1  1  1  1 -1  1 -1
-1 -1  1 -1  1  1 -1  1  1  1  1  1
-1 -1 -1  1 -1  1  1 -1  1  1  1  1
-1 -1 -1 -1  1 -1  1  1  1  1  1  1
-1  1 -1 -1 -1  1 -1  1  1 -1  1 -1
-1  1  1 -1 -1 -1  1 -1  1 -1  1 -1
-1  1  1  1 -1 -1 -1  1  1 -1  1 -1
""").T

SIGN_FIXTURES = {
    "6x24": SIGN_6X24,
    "8x32": SIGN_8X32,
    "12x46": SIGN_12X46,
}

# 2 x 10 two-row sign layout with five positive and five negative entries
# in its second row.
SIGN_2X10 = np.array([
    [1.0] * 10,
    [1.0] * 5 + [-1.0] * 5,
])
