"""Smoke test for the myopic_netcode extension module.

Build and install first, e.g. `maturin develop -m crates/python/Cargo.toml`.
"""

import json

import myopic_netcode as mn


def main():
    f4 = mn.Field(2, 2)
    assert f4.q == 4
    assert f4.mul(2, 2) == 3 and f4.mul(2, f4.inv(2)) == 1
    assert f4.rank([[1, 2, 3], [2, 3, 1]]) == 1

    assert mn.gaussian_coeff(4, 2, 2) == 35
    assert mn.gaussian_coeff(20, 10, 3) > 2**64

    f2 = mn.Field(2)
    a = mn.Subspace(f2, 4, [[1, 0, 0, 0], [0, 1, 0, 0]])
    b = mn.Subspace(f2, 4, [[1, 0, 0, 0], [0, 0, 1, 0]])
    assert mn.injection_distance(a, b) == 1 and a.intersection_dim(b) == 1
    assert len(mn.grassmannian(f2, 4, 2)) == 35

    book = mn.Codebook.random(f2, 4, 2, 35, distinct=True, seed=1)
    for m in (0, 17, 34):
        assert book.decode(mn.Subspace(f2, 4, book.encode(m)), 0) == m
    again = mn.Codebook.from_json(book.to_json())
    assert again.encode(5) == book.encode(5)

    assert mn.Topology.named("butterfly").min_cut() == 2
    assert mn.min_cut(mn.Topology.named("parallel:5")) == 5
    custom = mn.Topology(4, [(0, 1), (0, 2), (1, 3), (2, 3), (1, 2)], 0, 3)
    assert custom.min_cut() == 2

    assert mn.classify_regime(4, z_ro=1, z_wo=1) == "Weak"
    assert mn.classify_regime(3, z_ro=1, z_wo=1) == "Strong"
    assert mn.capacity(6, 1, 1, 1) == 4 and mn.secrecy_capacity(6, 1, 1, 1) == 2
    rows = mn.capacity_table([3, 4], [(1, 1, 0)])
    assert [r[4] for r in rows] == ["Strong", "Weak"]
    assert mn.compatible_probability(6, 3, 1, 2) == (1553, 25947)

    config = {
        "field": {"p": 2},
        "topology": "parallel:2",
        "coding": "identity",
        "codebook": {"n": 8, "m": 4, "mode": "distinct"},
        "power": {"z_ro": 0, "z_wo": 0, "z_rw": 1},
        "assignment": {"read_write": [0]},
        "strategy": "symmetrization",
        "trials": 200,
        "seed": 6,
    }
    report = json.loads(mn.run_experiment(json.dumps(config)))
    summary = report["cases"][0]["summary"]
    assert summary["regime"] == "Strong" and summary["error_probability"] >= 0.5
    assert mn.run_experiment(json.dumps(config)) == mn.run_experiment(json.dumps(config))

    code = mn.CosetCode(2, 2, 3, 1)
    assert code.parity_check() == [[1, 1, 1], [0, 1, 2]]
    word = code.encode([3, 1], seed=9)
    assert code.decode(word) == [3, 1]
    assert code.leakage([0])["perfect"] and not code.leakage([1, 2])["perfect"]
    assert code.secure_against_all(1)

    try:
        mn.Field(6)
    except ValueError:
        pass
    else:
        raise AssertionError("GF(6) should be rejected")

    print(f"myopic_netcode {mn.__version__}: smoke test passed")


if __name__ == "__main__":
    main()
