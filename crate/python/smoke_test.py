"""Smoke test for the pycimbench extension.

Build and install first:
    cd crates/python && maturin develop --release
or
    pip install --no-build-isolation ./crates/python
"""

import math
import tempfile

import pycimbench


def main():
    names = pycimbench.device_names()
    assert "FeFET" in names and "EpiRAM" in names, names

    ltp, ltd = pycimbench.update_curve(3.0, 64)
    assert len(ltp) == 65 and len(ltd) == 65
    assert math.isclose(ltp[0], 1e-6) and math.isclose(ltp[-1], 1e-4)
    assert all(b > a for a, b in zip(ltp, ltp[1:]))

    u = pycimbench.memory_utilization("vgg8", 128, 128)
    assert 0.0 < u <= 1.0

    config = """
device = "FeFET"
[schedule]
epochs = 2
batch_size = 10
[dataset]
train_samples = 40
test_samples = 20
"""
    with tempfile.TemporaryDirectory() as out:
        a = pycimbench.run(config=config, seed=5, output_dir=out + "/a")
        b = pycimbench.run(config=config, seed=5, output_dir=out + "/b")
    assert [r["epoch"] for r in a] == [1, 2]
    assert a == b, "same seed must reproduce"
    for r in a:
        assert 0.0 <= r["accuracy"] <= 1.0
        assert r["peak_latency"] <= r["latency"]
        assert r["peak_energy"] <= r["energy"]

    try:
        pycimbench.run(device="NoSuchDevice", epochs=1)
    except ValueError as e:
        assert "config" in str(e)
    else:
        raise AssertionError("unknown device accepted")

    print(f"ok: {len(names)} devices, vgg8 utilization {u:.4f}, "
          f"final accuracy {a[-1]['accuracy']:.3f}")


if __name__ == "__main__":
    main()
