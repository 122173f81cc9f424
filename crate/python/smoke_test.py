"""Smoke test for the ddos_elm extension module.

Build and install first:  maturin develop -m crates/py/Cargo.toml --release
Then run:                 python python/smoke_test.py
"""

import math
import os
import tempfile

import ddos_elm


def close(a, b, tol=1e-8):
    return abs(a - b) <= tol * max(1.0, abs(b))


def matmul(a, b):
    return [[sum(x * y for x, y in zip(row, col)) for col in zip(*b)] for row in a]


def check_numerics():
    a = [[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]]
    p = ddos_elm.pinv(a)
    apa = matmul(matmul(a, p), a)
    assert all(close(x, y) for r1, r2 in zip(apa, a) for x, y in zip(r1, r2))
    x = ddos_elm.lstsq(a, [[1.0], [2.0], [3.0]])
    assert len(x) == 2 and len(x[0]) == 1
    u, s, vt = ddos_elm.svd(a)
    assert len(s) == 2 and s[0] >= s[1] >= 0.0
    print("numerics ok: singular values", [round(v, 6) for v in s])


def check_metrics():
    cm = ddos_elm.confusion([0, 0, 1, 1], [0, 1, 1, 1])
    assert cm == {"tp": 2, "fp": 1, "tn": 1, "fn": 0}
    assert ddos_elm.auc_roc([0, 1], [0.2, 0.9]) == 1.0
    assert ddos_elm.auc_roc([0, 1, 0, 1], [0.5] * 4) == 0.5
    report = ddos_elm.evaluate([0, 0, 1, 1], [0.1, 0.6, 0.7, 0.9])
    assert report["accuracy"] == 0.75 and report["auc_roc"] == 1.0
    print("metrics ok")


def check_library_pipeline():
    rows, labels, categories, names = ddos_elm.generate_synthetic(n_benign=300, n_attack=300)
    assert len(rows) == 600 and len(names) == 12 and set(labels) == {0, 1}
    kept, corr = ddos_elm.select_features(rows, labels)
    assert kept and len(corr) == 12
    train, test = ddos_elm.split_indices(labels, 0.8, 42)
    assert sorted(train + test) == list(range(600))
    folds = ddos_elm.kfold_indices(labels, 5, 42)
    assert len(folds) == 5

    selected = [[r[j] for j in kept] for r in rows]
    scaled, means, stds = ddos_elm.zscore([selected[i] for i in train])
    col = [r[0] for r in scaled]
    assert abs(sum(col) / len(col)) < 1e-12
    test_x = [[(r[j] - means[j]) / stds[j] for j in range(len(kept))] for r in (selected[i] for i in test)]
    model = ddos_elm.Elm(hidden_nodes=32, activation="tanh", seed=1).fit(scaled, [labels[i] for i in train])
    report = ddos_elm.evaluate([labels[i] for i in test], model.score(test_x))
    assert report["accuracy"] >= 0.95, report
    print(f"elm ok: {model!r}, held-out accuracy {report['accuracy']:.4f}")

    board = ddos_elm.grid_search(scaled, [labels[i] for i in train], hidden_nodes=[8, 16], activations=["tanh", "rbf"], folds=3)
    assert len(board) == 4 and board[0]["mean"] >= board[-1]["mean"]
    print("grid ok: best", board[0]["hidden_nodes"], board[0]["activation"], round(board[0]["mean"], 4))


def check_file_pipeline():
    with tempfile.TemporaryDirectory() as d:
        csv = os.path.join(d, "flows.csv")
        path = os.path.join(d, "m.model")
        ddos_elm.generate_synthetic(path=csv)
        model, report = ddos_elm.train(csv, model_path=path, hidden_nodes=64)
        assert report["accuracy"] >= 0.95 and report["auc_roc"] >= 0.97, report
        loaded = ddos_elm.Model.load(path)
        assert loaded.dataset_fingerprint == model.dataset_fingerprint
        _, predictions = loaded.evaluate(csv)
        with open(csv) as f:
            verdicts = loaded.score_lines(f.read().splitlines())
        assert [(o, s, l) for o, s, l in verdicts] == predictions
        bad = loaded.score_lines(["1,2"])
        assert bad[0][1] is None
        print(f"file pipeline ok: {loaded!r}, accuracy {report['accuracy']:.4f}, {len(verdicts)} verdicts")

        try:
            ddos_elm.Model.load(csv)
        except ddos_elm.DataError as e:
            print("DataError raised as expected:", str(e)[:60])
        else:
            raise AssertionError("loading a CSV as a model should fail")
        assert issubclass(ddos_elm.DataError, ValueError)
        assert issubclass(ddos_elm.NumericError, ArithmeticError)


if __name__ == "__main__":
    check_numerics()
    check_metrics()
    check_library_pipeline()
    check_file_pipeline()
    print("smoke test passed")
