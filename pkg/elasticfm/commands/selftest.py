import logging
from typing import Callable, List, Tuple

import numpy as np
import rich.console
import rich.table

from elasticfm.factorization import f_sharp, incident_fields
from elasticfm.forward import MFSSolver, disk_series
from elasticfm.geometry import MeasurementCircle, disk_boundary, make_medium
from elasticfm.kernels import navier_green, point_source, polarization, test_functions
from elasticfm.oti import assemble_oti
from elasticfm.specfun import bessel_j, bessel_j_deriv, bessel_y, bessel_y_deriv, hankel1
from elasticfm.utils import EXIT_NUMERICAL, PipelineException

Check = Tuple[str, float, float]


def _relative(a, b) -> float:
    return float(np.linalg.norm(np.asarray(a) - np.asarray(b)) / np.linalg.norm(b))


def _reference_setup():
    return make_medium(2.0, 1.0, 10.0), MeasurementCircle(4.0, 64)


def check_special_functions() -> List[Check]:
    x = np.linspace(1.0, 200, 400)
    n = np.arange(0, 129, 8)[:, None]
    wronskian = bessel_j(n, x) * bessel_y_deriv(n, x) - bessel_j_deriv(n, x) * bessel_y(n, x)
    return [
        ("J_0(1)", abs(bessel_j(0, 1.0) - 0.7651976866), 1e-10),
        ("H_0(1)", abs(hankel1(0, 1.0) - (0.7651976866 + 0.0882569642j)), 1e-10),
        ("H_{-n} = (-1)^n H_n", _relative(hankel1(-7, 3.0), -hankel1(7, 3.0)), 1e-14),
        ("Wronskian, n ≤ 128", float(np.max(np.abs(wronskian * np.pi * x / 2 - 1))), 1e-8),
    ]


def check_green_symmetry() -> List[Check]:
    medium, _ = _reference_setup()
    rng = np.random.default_rng(0)
    x, y = rng.uniform(-3, 3, (2, 100, 2))
    forward = navier_green(medium, x, y)
    backward = np.swapaxes(navier_green(medium, y, x), -1, -2)
    return [("Π(x,y) = Π(y,x)^T", float(np.max(np.abs(forward - backward))), 1e-12)]


def check_disk_oracle() -> List[Check]:
    medium, circle = _reference_setup()
    # 8 sources, both polarizations
    fields = [f for j, f in enumerate(incident_fields(medium, circle)) if (j // 2) % 8 == 0]
    mfs = MFSSolver(medium, [disk_boundary((0.0, 0.0), 1.0)], exclusion=circle.points)
    coefficients = mfs.solve_batch(fields)
    approximate = mfs.field_matrix(circle.points) @ coefficients
    exact = np.stack(
        [disk_series(medium, 1.0, f).evaluate(circle.points).reshape(-1) for f in fields],
        axis=-1,
    )
    return [("MFS vs disk series", _relative(approximate, exact), 1e-6)]


def check_oti_point_source() -> List[Check]:
    medium, circle = _reference_setup()
    T = assemble_oti(medium, 31, circle).matrix
    rng = np.random.default_rng(1)
    radius = rng.uniform(0.5, 2.0, 20)
    angle = rng.uniform(0, 2 * np.pi, 20)
    worst = 0.0
    for z, theta in zip(np.stack([radius * np.cos(angle), radius * np.sin(angle)], -1), angle):
        a = polarization(theta)
        outgoing = point_source(medium, circle.points, z, a).reshape(-1)
        incoming = test_functions(medium, circle.points, z, a)[0]
        worst = max(worst, _relative(T @ outgoing, incoming))
    return [("T Π(·,z)a = conj(Π(·,z))a", worst, 1e-2)]


def check_f_sharp() -> List[Check]:
    rng = np.random.default_rng(2)
    B = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
    psd = B @ B.conj().T
    identity = np.eye(6)
    antisymmetric = np.kron(np.eye(3), np.array([[0.0, 1.0], [-1.0, 0.0]]))
    return [
        ("F♯(P) = P for P ⪰ 0", _relative(f_sharp(identity, psd)[0], psd), 1e-12),
        ("F♯(iI) = I", _relative(f_sharp(identity, 1j * identity)[0], identity), 1e-12),
        ("F♯(A) = I for A = -A^T", _relative(f_sharp(identity, antisymmetric)[0], identity), 1e-12),
    ]


CHECKS: List[Tuple[str, Callable[[], List[Check]]]] = [
    ("special functions", check_special_functions),
    ("Green tensor", check_green_symmetry),
    ("forward solver", check_disk_oracle),
    ("OtI operator", check_oti_point_source),
    ("F♯ transform", check_f_sharp),
]


def unitarity_defect() -> float:
    """‖T T^H - I‖_2 of the weighted OtI matrix, reported but never asserted."""
    medium, circle = _reference_setup()
    T = assemble_oti(medium, 31, circle).matrix
    return float(np.linalg.norm(T @ T.conj().T - np.eye(len(T)), 2))


def selftest() -> None:
    """
    Run the fast invariant suites in-process.

    Covers the special-function identities, Green tensor symmetry, the MFS solver against
    the disk series, the OtI point-source mapping and the analytic F♯ examples.
    Exits with code 4 if any check fails.
    """
    table = rich.table.Table("Suite", "Check", "Error", "Tolerance", "Result")
    failures = 0
    for suite, run in CHECKS:
        logging.info(f"Checking {suite}...")
        for name, error, tolerance in run():
            passed = error <= tolerance
            failures += not passed
            table.add_row(
                suite,
                name,
                f"{error:.2e}",
                f"{tolerance:.0e}",
                "[green]ok[/]" if passed else "[red]FAILED[/]",
            )
    rich.console.Console(stderr=True).print(table)
    logging.info(f"Diagnostic: ‖T T^H - I‖ = {unitarity_defect():.3e} (not unitary off n = 0)")

    if failures:
        logging.error(f"{failures} check(s) failed.")
        raise PipelineException(f"{failures} self-test check(s) failed", EXIT_NUMERICAL)
    logging.done("All self-test checks passed.")  # type: ignore
