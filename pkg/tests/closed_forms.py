"""Independent closed-form oracles for the test suite.

Everything here is derived from the parametric description of the
surfaces (principal curvature profiles plus the axisymmetric surface
Laplacian), not from the jet machinery under test.  The spheroid
constants were computed symbolically; scripts/derive_reference_values.py
reproduces them.
"""

import numpy as np


def torus_curvatures(R, r, theta):
    """Principal curvatures (tube, azimuthal) with outward normal."""
    s = np.sin(theta)
    h2 = s / (R + r * s)
    return 1.0 / r + 0.0 * s, h2


def torus_lap_lb(R, r, theta):
    """Laplace-Beltrami of M = -(h1 + h2) on the torus."""
    s = np.sin(theta)
    return R * (r + R * s) / (r ** 2 * (R + r * s) ** 3)


def torus_lap_sd(R, r, theta):
    """Full Laplacian of M under the signed-distance extension."""
    s = np.sin(theta)
    return -R * (R ** 2 + R * r * s - r ** 2) / (r ** 3 * (R + r * s) ** 3)


def torus_split_residual(R, r, theta):
    """lapM - lapLB - d_n(M^2/2 - S2) = -2 (h1 + h2)(h1 - h2)^2."""
    h1, h2 = torus_curvatures(R, r, theta)
    return -2.0 * (h1 + h2) * (h1 - h2) ** 2


def spheroid_curvatures(a, b, t):
    """Principal curvatures (meridian, parallel) at rho = a cos t, z = b sin t."""
    w = np.sqrt(a ** 2 * np.sin(t) ** 2 + b ** 2 * np.cos(t) ** 2)
    return a * b / w ** 3, b / (a * w)


# lap M of the spheroid at poles and equator, per extension policy.
# Symbolic values; keys are (a, b).
SPHEROID_LAP = {
    (1.0, 2.0): {
        "pole": {"lb": 48.0, "sd": 48.0, "gn": 54.0},
        "equator": {"lb": -21.0 / 64.0, "sd": -33.0 / 32.0, "gn": -81.0 / 64.0},
    },
    (2.0, 1.0): {
        "pole": {"lb": -3.0 / 8.0, "sd": -3.0 / 8.0, "gn": -9.0 / 8.0},
        "equator": {"lb": 39.0 / 2.0, "sd": 111.0 / 8.0, "gn": 171.0 / 8.0},
    },
}


def circle_fields(a):
    """M, S2, lapM, lapLB, vg for a circle of radius a in the plane."""
    return {
        "M": -1.0 / a,
        "S2": 1.0 / a ** 2,
        "lapM": -1.0 / a ** 3,
        "lapLB_M": 0.0,
        "vg_geom": -0.5 / a ** 2,
    }


def sphere_fields(a):
    return {
        "M": -2.0 / a,
        "S2": 2.0 / a ** 2,
        "lapM": 0.0,
        "lapLB_M": 0.0,
        "vg_geom": 0.0,
    }


def richardson_partial(fun, point, alpha, h):
    """Central-difference partial derivative with one Richardson step.

    fun maps an (N,) point to a scalar; alpha is a multi-index.  Used as
    the independent derivative oracle against jet coefficients.
    """
    point = np.asarray(point, dtype=float)

    def fd(step):
        value = _tensor_stencil(fun, point, alpha, step)
        return value

    d1 = fd(h)
    d2 = fd(h / 2.0)
    return (4.0 * d2 - d1) / 3.0


_STENCILS = {
    1: ((-1, -0.5), (1, 0.5)),
    2: ((-1, 1.0), (0, -2.0), (1, 1.0)),
    3: ((-2, -0.5), (-1, 1.0), (1, -1.0), (2, 0.5)),
    4: ((-2, 1.0), (-1, -4.0), (0, 6.0), (1, -4.0), (2, 1.0)),
}


def _tensor_stencil(fun, point, alpha, h):
    import itertools

    axes = [(i, k) for i, k in enumerate(alpha) if k > 0]
    total = 0.0
    grids = [_STENCILS[k] for _, k in axes]
    for combo in itertools.product(*grids) if grids else [()]:
        shifted = point.copy()
        weight = 1.0
        for (axis, _), (offset, w) in zip(axes, combo):
            shifted[axis] += offset * h
            weight *= w
        total += weight * fun(shifted)
    return total / h ** sum(alpha)
