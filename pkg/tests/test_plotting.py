import matplotlib.pyplot as plt
import pytest

from screenlab.experiments import epsilon_grid, get_scenario, run_sweep
from screenlab.kernels import Triangular
from screenlab.plotting import plot_fcond, plot_sweep, save_figure
from screenlab.spectral import fcond_profile


@pytest.fixture(scope="module")
def sweep():
    return run_sweep(get_scenario("fig1-triangular"), epsilon_grid({"k_min": 2, "k_max": 8}))


def test_svg_reproducible(sweep, tmp_path):
    a, b = tmp_path / "a.svg", tmp_path / "b.svg"
    plot_sweep(sweep, a)
    plot_sweep(sweep, b)
    text = a.read_text()
    assert "<dc:date>" not in text
    assert a.read_bytes() == b.read_bytes()


def test_png(sweep, tmp_path):
    p = plot_sweep(sweep, tmp_path / "a.PNG")
    assert p.read_bytes()[:4] == b"\x89PNG"


def test_fcond_plot(tmp_path):
    prof = fcond_profile(Triangular(), 1.0, [1.0, 5.0, 10.0, 50.0])
    path = plot_fcond(prof, tmp_path / "f.svg", title="triangular")
    assert "triangular" in path.read_text()


def test_bad_extension(tmp_path):
    fig = plt.figure()
    with pytest.raises(ValueError):
        save_figure(fig, tmp_path / "a.pdf")
    plt.close(fig)
    assert not (tmp_path / "a.pdf").exists()
