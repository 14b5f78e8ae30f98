"""Smoke test for the hypspec extension module.

Uses an installed `hypspec` if there is one, otherwise the library built by
`cargo build --release -p hypspec-python --features extension-module`.
"""

import math
import pathlib
import shutil
import sys
import tempfile

try:
    import hypspec
except ImportError:
    root = pathlib.Path(__file__).resolve().parent.parent
    built = root / "target" / "release" / "libhypspec.so"
    if not built.exists():
        sys.exit(f"build the extension first: {built} not found")
    tmp = pathlib.Path(tempfile.mkdtemp())
    shutil.copy(built, tmp / "hypspec.so")
    sys.path.insert(0, str(tmp))
    import hypspec


def main():
    pants = hypspec.Group.pants()
    assert pants.signature == (0, 3)
    spectrum = pants.spectrum(4.0)
    length, rotation, mult, witness = spectrum.entries[0]
    assert abs(length - 2 * math.acosh(3)) < 1e-10 and mult == 3, spectrum.entries[0]

    again = hypspec.Spectrum.from_json(spectrum.to_json())
    assert again.to_json() == spectrum.to_json()
    assert spectrum.compare(again)["agreeUpTo"] == spectrum.cutoff

    g = hypspec.Group.genus2(2.0, 0.7)
    assert hypspec.Group.from_json(g.to_json()).signature == (2, 0)
    w = [1, 2, -1, -2]
    assert abs(g.trace(w)[0] - g.trace(g.involution_image(w))[0]) < 1e-9

    d = pants.diagram(0.2)
    assert d.complete and any(abs(diam - 1) < 1e-9 for _, diam in d.balls)
    assert all(line["pairwiseTangent"] for line in d.lines())

    assert abs(hypspec.logarithmic_integral(math.exp(2)) - 3.9090706) < 1e-6
    assert hypspec.core_length_estimate(math.sqrt(2 * math.pi))[0] == 1.0
    assert hypspec.farey_distance((0, 1), (1, 0)) == 1
    assert hypspec.stable_translation_length([[2, 1], [1, 1]], n_max=8)["final"] == 1.0

    try:
        hypspec.farey_distance((2, 4), (1, 0))
    except hypspec.HypspecError as e:
        assert "InvalidSlope" in str(e)
    else:
        raise AssertionError("non-coprime slope accepted")

    try:
        pants.spectrum(12.0, budget=10)
    except hypspec.BudgetError:
        pass
    else:
        raise AssertionError("budget not enforced")

    passed, line = hypspec.run_criterion(6)
    assert passed, line
    print("smoke test ok")


if __name__ == "__main__":
    main()
