"""Smoke test for the ckn extension module."""

import json
import math

import ckn


def close(x, y, tol):
    return abs(x - y) <= tol * max(abs(y), 1.0)


def main():
    p = ckn.Params([1.0, 0.0], 0.0, 0.5)
    assert (p.monomial_dim, p.regime) == (3.0, "Symmetric")
    assert close(p.p, 3.0, 1e-15) and close(p.n, 6.0, 1e-15) and close(p.alpha, 0.25, 1e-15)
    assert max(p.identity_residuals()) <= 1e-12

    c = p.constants()
    assert close(c["z"], 128.0 / 15.0, 1e-12)
    assert close(p.optimizer_ratio(), c["c_opt"], 1e-6)
    assert close(p.optimizer_ratio(2.0, 3.0), c["c_opt"], 1e-6)
    assert p.euler_lagrange_residual([0.3, 0.4]) <= 1e-8

    classical = ckn.Params([0.0, 0.0, 0.0], 0.0, 0.0)
    z = 2.0 * math.pi**2
    assert close(classical.constants()["c_opt"], 4.0 / (3.0 * z ** (2.0 / 3.0)), 1e-14)

    assert close(p.sphere_first_eigenvalue(), 2.0, 1e-6)
    det = p.detector()
    assert det["verdict"] == "Stable" and det["agrees_with_fs"]
    broken = ckn.Params([1.0, 0.0], -0.5, -0.5).detector()
    assert broken["verdict"] == "Unstable"

    rows = ckn.phase_scan([1.0, 0.0], (-1.0, 0.4), (0.0, 0.9), steps=(4, 4))
    assert len(rows) == 16 and all(r["agree"] is not False for r in rows)

    l1, lp2, equal = ckn.weyl_check([0.0, 2.0, 0.0, 0.0], 3.0)
    assert equal and close(l1, lp2, 1e-15)
    l1, lp2, equal = ckn.weyl_check([1.0, 2.0], 3.0)
    assert not equal and lp2 < l1

    try:
        ckn.Params([1.0, 0.0], 0.0, 1.0)
    except ValueError as e:
        assert "Hardy" in str(e)
    else:
        raise AssertionError("Hardy endpoint accepted")

    cfg = json.dumps({"d": 2, "A": [1, 0], "a": 0, "b": 0.5})
    first = ckn.report(cfg, samples=50)
    assert first == ckn.report(cfg, samples=50)
    doc = json.loads(first)
    assert doc["pass"] and doc["schema"] == "ckn-report/1"

    print("smoke test passed")


if __name__ == "__main__":
    main()
