"""Smoke tests for the python bindings against the build-tree extension."""

import math
import sys

import vrtc


def test_version_and_names():
    assert vrtc.__version__ == "1.0.0"
    names = vrtc.feature_names()
    assert len(names) == 23
    assert names[0] == "NoPDL"
    assert names[-1] == "CC"


def test_pearson_cc():
    d = [1.0, 2.0, 3.0, 4.0]
    assert abs(vrtc.pearson_cc(d, d) - 1.0) < 1e-12
    assert abs(vrtc.pearson_cc(d, [4.0, 3.0, 2.0, 1.0]) + 1.0) < 1e-12
    assert vrtc.pearson_cc(d, [5.0, 5.0, 5.0, 5.0]) == 0.0
    # python-side cross-check of the definition
    u = [2.0, 1.0, 4.0, 3.0]
    md, mu = sum(d) / 4, sum(u) / 4
    num = sum((a - md) * (b - mu) for a, b in zip(d, u))
    den = math.sqrt(sum((a - md) ** 2 for a in d) * sum((b - mu) ** 2 for b in u))
    assert abs(vrtc.pearson_cc(d, u) - num / den) < 1e-12


def test_extract_train_predict(tmp_path):
    trace = tmp_path / "trace.csv"
    rows = ["timestamp_us,direction,size_bytes,src_ip,src_port,dst_ip,dst_port,protocol"]
    for i in range(200):
        rows.append(f"{i * 2500},DL,1400,10.0.0.1,5000,10.0.0.2,6000,UDP")
        rows.append(f"{i * 2500 + 1000},UL,200,10.0.0.2,6000,10.0.0.1,5000,UDP")
    trace.write_text("\n".join(rows) + "\n")

    x, labels = vrtc.extract_dataset(str(trace), omega_ms=100, subsamples=10, label=1)
    assert len(x) == 5
    assert all(len(r) == 23 for r in x)
    assert labels == [1] * 5

    # tiny separable training set: class by first feature
    train_x = [[float(i), 0.0] for i in range(10)] + [[float(i) + 100.0, 0.0] for i in range(10)]
    train_y = [0] * 10 + [1] * 10
    model = vrtc.train(train_x, train_y, family="dt", max_depth=3)
    assert model.startswith("vrtc-model v1")
    assert vrtc.predict(model, [[2.0, 0.0], [150.0, 0.0]]) == [0, 1]


def test_simulate():
    out = vrtc.simulate(200.0, scheduler="fifo", duration_s=2.0, warmup_s=0.5, seed=9)
    pri = vrtc.simulate(200.0, scheduler="priority", duration_s=2.0, warmup_s=0.5, seed=9)
    assert out["vr"]["count"] > 0 and out["bg"]["count"] > 0
    assert out["vr"]["p99_ms"] > 0
    assert pri["priority_active"] and not out["priority_active"]


def test_errors():
    try:
        vrtc.pearson_cc([1.0], [1.0, 2.0])
    except vrtc.VrtcContractError:
        pass
    else:
        raise AssertionError("length mismatch accepted")
    try:
        vrtc.extract_dataset("/nonexistent/trace.csv")
    except vrtc.VrtcIoError:
        pass
    else:
        raise AssertionError("missing file accepted")


if __name__ == "__main__":
    import pytest

    sys.exit(pytest.main([__file__, "-q"]))
