"""Smoke test for the alexandrov_py extension.

Build and install it first:

    pip install maturin
    pip install --no-build-isolation -e crates/py
    python python/smoke_test.py
"""

import json
import math

import alexandrov_py as ax


def close(a, b, tol=1e-12):
    assert abs(a - b) <= tol * max(1.0, abs(b)), (a, b)


def main():
    close(ax.sn(1.0, math.pi / 2), 1.0)
    close(ax.cs(-1.0, 1.0), math.cosh(1.0))
    close(ax.model_side(0.0, 3.0, 4.0, math.pi / 2), 5.0)
    close(ax.comparison_angle(0.0, 1.0, 1.0, 1.0, "q"), math.pi / 3)
    close(ax.sigma(0.0, 2.0, 0.3, 1.0), 0.3)
    assert ax.sigma(1.0, 2.0, 0.5, 2 * math.pi) == math.inf
    assert ax.tau(-1.0, 3.0, 0.4, 1.0) >= ax.sigma(-1.0, 3.0, 0.4, 1.0)

    cone = ax.Space.euclidean_cone(1.5 * math.pi)
    x, y = cone.point(1.0, 0.0), cone.point(1.0, math.pi)
    close(cone.dist(x, y), math.sqrt(2.0))
    mid = cone.geodesic_point(x, y, 0.5)
    close(cone.dist(x, mid), cone.dist(x, y) / 2, 1e-10)
    close(cone.ball_volume(cone.point(0.0, 0.0), 1.0), 0.75 * math.pi, 1e-8)

    sphere = ax.Space.spherical_cone(2 * math.pi)
    close(sphere.max_radius, math.pi)
    try:
        ax.Space.euclidean_cone(-1.0)
    except ValueError:
        pass
    else:
        raise AssertionError("negative cone angle accepted")

    diags = ax.validate_config(json.dumps({"schema_version": 1, "experiment": "fill"}))
    assert [f for f, _ in diags] == ["seed"], diags

    report = ax.run_experiment(json.dumps({"schema_version": 1, "experiment": "bound"}))
    assert report["pass"] is True, report["checks"]
    print("smoke test ok:", len(report["checks"]), "bound checks pass")


if __name__ == "__main__":
    main()
