"""Quick end-to-end check of the `hofm` Python module.

Build and install first:

    pip install maturin
    maturin build --release -m crates/py/Cargo.toml -o dist
    pip install dist/hofm-*.whl

then run `python python/smoke_test.py`.
"""

import json
import math
import os
import tempfile

import hofm


def close(a, b, tol):
    return abs(a - b) <= tol


def main():
    assert close(hofm.bessel_j(1, 2.0), 0.576724807756873, 1e-13)
    row = hofm.bessel_row(30, 4.0)
    assert close(row[0] + 2 * sum(row[2::2]), 1.0, 1e-12)

    table = hofm.Wavetable()
    assert len(table) == 1025 and table.period == 1024

    acc = hofm.PhaseAccumulator(48000.0)
    inc = acc.increment(480.0)
    for _ in range(100):
        acc.tick(table, 1.0, inc)
    assert acc.phase == (100 * inc) % 2**32

    op = hofm.Operator(48000.0)
    assert op.tick(1.0, 500.0) == (1.0, 500.0)

    # Three-operator stack against second-order PM.
    fs, n = 96000.0, 192 * 16
    fm = hofm.render_stack([(3.0, 500.0), (2.0, 500.0), (1.0, 500.0)], fs, n)
    pm = hofm.render_pm(500.0, [500.0, 500.0], [3.0, 2.0], fs, n)
    a = dict(hofm.measure_spectrum(fm, fs, 500.0))
    b = dict(hofm.measure_spectrum(pm, fs, 500.0))
    for k in range(0, 21):
        f = 500.0 * k
        la = 20 * math.log10(max(a[f], 1e-3))
        lb = 20 * math.log10(max(b[f], 1e-3))
        assert abs(la - lb) < 1.0, (f, la, lb)

    lines = dict(hofm.predict_second_order(500.0, 500.0, 500.0, 3.0, 2.0))
    assert abs(abs(lines[1000.0]) - b[1000.0]) < 1e-2

    naive = hofm.render_stack([(3.0, 500.0), (2.0, 500.0), (1.0, 500.0)], 48000.0, 48000, naive=True)
    offset, offending = hofm.detect_carrier_drift(naive, 48000.0, 500.0, 1.0)
    assert offset >= 5.0 and offending

    fb = hofm.render_feedback_pm(1.0, 500.0, 1.0, 96000.0, 192 * 16)
    slope = hofm.fit_spectral_slope(fb, 96000.0, 500.0, 1, 10)
    assert -9.0 <= slope <= -3.0, slope

    patch = {"topology": "fm-feedback", "operators": [{"amp": 1, "freqHz": 500}], "duration": 0.1}
    y = hofm.render_patch(json.dumps(patch))
    assert len(y) == 4800

    try:
        hofm.render_feedback_fm(1.0, 500.0, 50.0, 48000.0, 100)
    except RuntimeError:
        pass
    else:
        raise AssertionError("expected the feedback loop to diverge")

    with tempfile.TemporaryDirectory() as d:
        path = os.path.join(d, "x.wav")
        assert hofm.write_wav(path, [0.0, 0.5, 2.0], 48000) == 1
        assert os.path.getsize(path) == 44 + 6

    print("hofm smoke test passed")


if __name__ == "__main__":
    main()
