import json

import numpy as np
import pytest

from lfmacro.core import CenterPolicy, coded_fill, make_lightfield, noise_texture
from lfmacro.errors import FormatError
from lfmacro.io import (
    encode_png,
    read_lightfield,
    read_lightfield_with_policy,
    read_png,
    view_filename,
    write_lightfield,
    write_png,
)


@pytest.mark.parametrize("dtype", [np.uint8, np.uint16])
@pytest.mark.parametrize("channels", [1, 3])
def test_png_round_trip(tmp_path, dtype, channels, rng):
    img = noise_texture((5, 7, channels), rng=rng, dtype=dtype)
    write_png(tmp_path / "a.png", img)
    back = read_png(tmp_path / "a.png")
    assert back.dtype == dtype
    assert np.array_equal(back, img)


def test_png_deterministic(rng):
    img = noise_texture((9, 9, 3), rng=rng)
    assert encode_png(img) == encode_png(img.copy())


def test_png_rejects_float():
    with pytest.raises(FormatError):
        encode_png(np.zeros((2, 2)))


@pytest.mark.parametrize("form", ["views", "lenslet"])
@pytest.mark.parametrize("channels, dtype", [(1, np.uint16), (3, np.uint8)])
def test_lightfield_round_trip(tmp_path, form, channels, dtype):
    lf = make_lightfield(3, 2, 4, 5, channels,
                         fill=lambda u, v, x, y, c: (coded_fill(u, v, x, y) + c) % 250, dtype=dtype)
    write_lightfield(lf, tmp_path / "lf", form=form)
    assert read_lightfield(tmp_path / "lf") == lf
    meta = json.loads((tmp_path / "lf" / "meta.json").read_text())
    assert meta == {"angular_rows": 3, "angular_cols": 2, "height": 4, "width": 5,
                    "channels": channels, "bit_depth": 8 * np.dtype(dtype).itemsize}
    if form == "views":
        assert (tmp_path / "lf" / view_filename(2, 1)).name == "view_02_01.png"
        assert (tmp_path / "lf" / "view_02_01.png").exists()
    else:
        assert (tmp_path / "lf" / "lenslet.png").exists()


def test_center_policy_in_meta(tmp_path):
    lf = make_lightfield(3, 3, 2, 2, 1)
    write_lightfield(lf, tmp_path / "lf", policy=CenterPolicy(0, 2))
    _, policy = read_lightfield_with_policy(tmp_path / "lf")
    assert policy == CenterPolicy(0, 2)


def test_missing_view(tmp_path):
    write_lightfield(make_lightfield(2, 2, 2, 2, 1), tmp_path / "lf")
    (tmp_path / "lf" / "view_01_01.png").unlink()
    with pytest.raises(FormatError, match="missing view"):
        read_lightfield(tmp_path / "lf")


def test_bad_meta(tmp_path):
    d = tmp_path / "lf"
    d.mkdir()
    with pytest.raises(FormatError):
        read_lightfield(d)
    (d / "meta.json").write_text('{"angular_rows": 1}')
    with pytest.raises(FormatError, match="missing keys"):
        read_lightfield(d)
    (d / "meta.json").write_text(json.dumps({"angular_rows": 1, "angular_cols": 1, "height": 1,
                                            "width": 1, "channels": 1, "bit_depth": 12}))
    with pytest.raises(FormatError, match="bit_depth"):
        read_lightfield(d)


def test_bit_depth_mismatch(tmp_path):
    write_lightfield(make_lightfield(1, 1, 2, 2, 1, dtype=np.uint8), tmp_path / "lf")
    meta_path = tmp_path / "lf" / "meta.json"
    meta = json.loads(meta_path.read_text())
    meta["bit_depth"] = 16
    meta_path.write_text(json.dumps(meta))
    with pytest.raises(FormatError, match="16-bit"):
        read_lightfield(tmp_path / "lf")


def test_float_lightfield_not_writable(tmp_path):
    lf = make_lightfield(1, 1, 2, 2, 1, dtype=np.float64)
    with pytest.raises(FormatError):
        write_lightfield(lf, tmp_path / "lf")
