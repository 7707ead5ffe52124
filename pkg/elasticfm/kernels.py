"""
Free-space kernels of the 2D time-harmonic Navier equation.

With r = |x - y| and d = (x - y)/r the Green tensor reduces to

    Π(x, y) = φ1(r) I + φ2(r) d d^T,

    φ1 = i/(4μ) H0(ks r) - i/(4ω²) (ks H1(ks r) - kp H1(kp r)) / r
    φ2 = -i/(4ω²) (ks² H0(ks r) - kp² H0(kp r) - 2 (ks H1(ks r) - kp H1(kp r)) / r)

which follows from ∇∇^T f(r) = f'' d d^T + (f'/r)(I - d d^T) applied to
f = (i/4) H0(k r). All functions broadcast over leading point dimensions.
"""
import numpy as np

from elasticfm.errors import CoincidentPointError, DomainError
from elasticfm.geometry import ElasticMedium
from elasticfm.specfun import hankel1

COINCIDENT_TOLERANCE = 1e-14


def _separation(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    diff = x - y
    r = np.linalg.norm(diff, axis=-1)
    scale = np.maximum(1.0, np.maximum(np.linalg.norm(x, axis=-1), np.linalg.norm(y, axis=-1)))
    if np.any(r < COINCIDENT_TOLERANCE * scale):
        raise CoincidentPointError("Kernel evaluated at coincident source and observation points")
    return diff, r


def helmholtz_phi(k: float, x, y):
    """Φ_k(x, y) = (i/4) H0^(1)(k|x - y|)."""
    _, r = _separation(x, y)
    return 0.25j * hankel1(0, k * r)


def navier_green(medium: ElasticMedium, x, y) -> np.ndarray:
    """Π(x, y), shape (..., 2, 2)."""
    diff, r = _separation(x, y)
    kp, ks, omega = medium.kp, medium.ks, medium.omega
    h0p, h1p = hankel1(0, kp * r), hankel1(1, kp * r)
    h0s, h1s = hankel1(0, ks * r), hankel1(1, ks * r)

    first_order = (ks * h1s - kp * h1p) / r
    phi1 = 0.25j / medium.mu * h0s - 0.25j / omega**2 * first_order
    phi2 = -0.25j / omega**2 * (ks**2 * h0s - kp**2 * h0p - 2 * first_order)

    d = diff / r[..., None]
    dd = d[..., :, None] * d[..., None, :]
    return phi1[..., None, None] * np.eye(2) + phi2[..., None, None] * dd


def _check_polarization(a) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if a.shape[-1] != 2 or not np.allclose(np.linalg.norm(a, axis=-1), 1.0):
        raise DomainError(f"Polarization must be a unit 2-vector, got {a!r}")
    return a


def point_source(medium: ElasticMedium, x, y, a) -> np.ndarray:
    """Incident field Π(x, y) a, shape (..., 2)."""
    a = _check_polarization(a)
    return navier_green(medium, x, y) @ a


def polarization(alpha: float) -> np.ndarray:
    """a = (cos α, sin α)."""
    return np.array([np.cos(alpha), np.sin(alpha)])


def test_functions(medium: ElasticMedium, receivers, zs, a) -> np.ndarray:
    """Stacked conj(Π(x_i, z)) a for many sampling points, shape (len(zs), 2 * len(receivers)).

    Receiver-major, component-minor within each receiver.
    """
    a = _check_polarization(a)
    receivers = np.atleast_2d(np.asarray(receivers, dtype=float))
    zs = np.atleast_2d(np.asarray(zs, dtype=float))
    radius = np.min(np.linalg.norm(receivers, axis=-1))
    if np.any(np.linalg.norm(zs, axis=-1) >= radius):
        raise DomainError(f"Sampling points must lie strictly inside the measurement circle R = {radius}")
    green = navier_green(medium, receivers[None, :, :], zs[:, None, :])
    return np.conj(green @ a).reshape(len(zs), -1)


def test_function(medium: ElasticMedium, receivers, z, a) -> np.ndarray:
    """φ_z^a sampled on the receivers, length 2 * m2."""
    return test_functions(medium, receivers, np.atleast_2d(z), a)[0]


# keep pytest from collecting the test-function helpers as tests
test_function.__test__ = False  # type: ignore[attr-defined]
test_functions.__test__ = False  # type: ignore[attr-defined]
