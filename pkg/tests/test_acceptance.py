"""Acceptance suite: one group of tests per numbered criterion.

Run with ``pytest tests/test_acceptance.py -v``; the terminal summary lists
one ``[PASS]`` / ``[FAIL]`` line per criterion.
"""

import filecmp
import json
from collections import Counter

import numpy as np
import pytest

from corpus import build_corpus
from oracles import macropixel_oracle, macs_by_enumeration, placements

from lfmacro.cli import main
from lfmacro.core import CenterPolicy, LightField4D, noise_texture, required_texture_shape, synth_planar
from lfmacro.costmodel import RESNET_STEM, ConvLayerSpec, conv_out_dims, layer_macs, pipeline_cost
from lfmacro.dataset import CATEGORIES, scan_corpus, split_by_variation
from lfmacro.disparity import block_match_disparity, epi_slope
from lfmacro.errors import GeometryError
from lfmacro.io import write_lightfield
from lfmacro.representations import (
    build_macropixel,
    center_view,
    extract_epi,
    from_lenslet,
    macropixel_shape,
    to_lenslet,
)

criterion = pytest.mark.criterion
SEED = 20240611


def _random_samples(rng, shape):
    kind = rng.integers(3)
    if kind == 0:
        return rng.integers(0, 256, size=shape, dtype=np.uint8)
    if kind == 1:
        return rng.integers(0, 65536, size=shape, dtype=np.uint16)
    return rng.random(shape).astype(np.float32)


def _instances(n, seed):
    """Random light fields with a k, centre and size policy drawn per instance."""
    rng = np.random.default_rng(seed)
    out = []
    for i in range(n):
        U, V = (int(a) for a in rng.integers(1, 8, size=2))
        k = int(rng.integers(1, min(U, V) + 1))
        H, W = (int(a) for a in rng.integers(k, 21, size=2))
        C = int(rng.choice([1, 3]))
        center = None
        if rng.random() < 0.3:
            center = (int(rng.integers(U)), int(rng.integers(V)))
        policy = ("crop", "pad")[i % 2]
        lf = LightField4D.from_array(_random_samples(rng, (U, V, H, W, C)))
        out.append((lf, k, center, policy))
    return out


INSTANCES = _instances(240, SEED)


def _ids(instances):
    return [f"{lf.shape[:4]}-k{k}-{p}" for lf, k, _, p in instances]


# -- 1 ----------------------------------------------------------------------

@criterion(1, "macro-pixel output equals brute-force oracle (>= 200 instances, both policies)")
def test_c1_macropixel_oracle_equivalence():
    assert len(INSTANCES) >= 200
    assert {p for *_, p in INSTANCES} == {"crop", "pad"}
    mismatches = []
    for lf, k, center, size_policy in INSTANCES:
        policy = CenterPolicy(*center) if center else CenterPolicy()
        resolved = policy.resolve(*lf.angular_shape)
        image = build_macropixel(lf, k, policy, size_policy)
        expected, origin = macropixel_oracle(lf.samples, k, resolved, size_policy)
        got = [[tuple(px) for px in row] for row in image.pixels.tolist()]
        want = [[tuple(px.item() for px in cell) for cell in row] for row in expected]
        if got != want or image.window_origin != origin or image.pixels.dtype != lf.dtype:
            mismatches.append((lf.shape, k, center, size_policy))
    assert mismatches == []


# -- 2 ----------------------------------------------------------------------

@criterion(2, "k=1 output bitwise equals the center view")
def test_c2_identity_case():
    for lf, _, center, size_policy in INSTANCES:
        policy = CenterPolicy(*center) if center else CenterPolicy()
        image = build_macropixel(lf, 1, policy, size_policy)
        expected = center_view(lf, policy)
        assert image.pixels.dtype == expected.dtype
        assert image.pixels.tobytes() == expected.tobytes()
        assert image.pixels.shape == expected.shape


# -- 3 ----------------------------------------------------------------------

@criterion(3, "pixel budget: crop loses < k per axis, pad keeps H x W")
def test_c3_pixel_budget_property():
    for lf, k, center, _ in INSTANCES:
        H, W = lf.spatial_shape
        policy = CenterPolicy(*center) if center else CenterPolicy()
        Hc, Wc = build_macropixel(lf, k, policy, "crop").pixels.shape[:2]
        assert 0 <= H - Hc < k and 0 <= W - Wc < k
        assert Hc % k == 0 and Wc % k == 0
        assert build_macropixel(lf, k, policy, "pad").pixels.shape[:2] == (H, W)


@criterion(3, "pixel budget: crop loses < k per axis, pad keeps H x W")
@pytest.mark.parametrize("k, dims", [(1, (625, 434)), (2, (624, 434)), (3, (624, 432)),
                                     (4, (624, 432)), (5, (625, 430)), (6, (624, 432))])
def test_c3_decoded_view_dims(k, dims):
    # independent floor arithmetic first, then the library
    assert ((625 // k) * k, (434 // k) * k) == dims
    assert macropixel_shape(625, 434, k, "crop") == dims
    assert macropixel_shape(625, 434, k, "pad") == (625, 434)


@criterion(3, "pixel budget: crop loses < k per axis, pad keeps H x W")
def test_c3_decoded_view_dims_built():
    lf = LightField4D.from_array(np.zeros((6, 6, 625, 434, 1), dtype=np.uint8))
    for k in range(1, 7):
        shape = build_macropixel(lf, k).pixels.shape
        assert shape == macropixel_shape(625, 434, k, "crop") + (1,)


# -- 4 ----------------------------------------------------------------------

@criterion(4, "lenslet round-trip is the bitwise identity (>= 100 instances)")
def test_c4_lenslet_round_trip():
    rng = np.random.default_rng(SEED + 4)
    for _ in range(120):
        U, V, H, W = (int(a) for a in rng.integers(1, 9, size=4))
        C = int(rng.choice([1, 3]))
        lf = LightField4D.from_array(_random_samples(rng, (U, V, H, W, C)))
        mosaic = to_lenslet(lf)
        assert mosaic.pixels.shape == (H * U, W * V, C)
        back = from_lenslet(mosaic)
        assert back.samples.dtype == lf.samples.dtype
        assert back.samples.tobytes() == lf.samples.tobytes()
        assert back.shape == lf.shape


# -- 5 ----------------------------------------------------------------------

@criterion(5, "EPI slope within 0.1 of d for d in -3..3")
@pytest.mark.parametrize("views", [5, 7])
@pytest.mark.parametrize("orientation", ["horizontal", "vertical"])
@pytest.mark.parametrize("d", range(-3, 4))
def test_c5_epi_slope_recovery(d, orientation, views):
    H = W = 48
    tex = noise_texture(required_texture_shape(views, views, H, W, d), rng=SEED + d + 10 * views)
    lf = synth_planar(views, views, H, W, tex, d)
    mid = views // 2
    slope, _ = epi_slope(extract_epi(lf, orientation, H // 2, mid))
    assert abs(slope - d) <= 0.1


# -- 6 ----------------------------------------------------------------------

@criterion(6, "block matching: >= 95% interior pixels exact, textureless gives zero confidence")
@pytest.mark.parametrize("target", [(2, 3), (3, 2), (2, 1)])
@pytest.mark.parametrize("d", range(-2, 3))
def test_c6_disparity_recovery(d, target):
    U = V = 5
    H = W = 40
    radius, d_range = 2, (-2, 2)
    tex = noise_texture(required_texture_shape(U, V, H, W, d), rng=SEED + 31 * d)
    lf = synth_planar(U, V, H, W, tex, d)
    dmap = block_match_disparity(lf, (2, 2), target, d_range, radius)
    # with the target on the -v side the measured shift is -d
    expected = d if target[0] > 2 or target[1] > 2 else -d
    # interior: every candidate block lies inside both views
    m = radius + max(abs(r) for r in d_range)
    interior = dmap.values[m:H - m, m:W - m]
    assert (interior == expected).mean() >= 0.95


@criterion(6, "block matching: >= 95% interior pixels exact, textureless gives zero confidence")
@pytest.mark.parametrize("dtype", [np.uint8, np.uint16, np.float32])
def test_c6_textureless_zero_confidence(dtype):
    lf = LightField4D.from_array(np.full((3, 3, 20, 20, 1), 0.5 if dtype == np.float32 else 77,
                                         dtype=dtype))
    for target in [(1, 2), (0, 1)]:
        dmap = block_match_disparity(lf, (1, 1), target, (-2, 2), 2)
        assert np.all(dmap.confidence == 0)


# -- 7 ----------------------------------------------------------------------

@criterion(7, "conv output dims equal brute-force placement counts; 625x434 K7 S2 -> 310x214")
def test_c7_conv_grid():
    checked = 0
    for n in range(1, 33):
        for K in range(1, 10):
            for S in range(1, 5):
                for P in range(0, 5):
                    expected = placements(n, K, S, P)
                    spec = ConvLayerSpec(1, 1, K, stride=S, padding=P)
                    if expected == 0:
                        with pytest.raises(GeometryError):
                            conv_out_dims(n, n, spec)
                        continue
                    assert conv_out_dims(n, n + 1, spec) == (expected, placements(n + 1, K, S, P))
                    assert layer_macs(n, n, ConvLayerSpec(2, 3, K, S, P)) == \
                        macs_by_enumeration(n, n, 2, 3, K, S, P)
                    checked += 1
    assert checked > 1000


@criterion(7, "conv output dims equal brute-force placement counts; 625x434 K7 S2 -> 310x214")
def test_c7_decoded_view_stem():
    assert (placements(625, 7, 2, 0), placements(434, 7, 2, 0)) == (310, 214)
    assert conv_out_dims(625, 434, ConvLayerSpec(3, 64, 7, stride=2, padding=0)) == (310, 214)
    assert pipeline_cost((625, 434, 3), RESNET_STEM).layers[0].out_h == 310


# -- 8 ----------------------------------------------------------------------

@criterion(8, "cost report depends only on input dims, not on k")
@pytest.mark.parametrize("size_policy, H, W", [("pad", 37, 29), ("crop", 60, 60)])
def test_c8_cost_invariance(size_policy, H, W):
    rng = np.random.default_rng(SEED + 8)
    lf = LightField4D.from_array(rng.integers(0, 256, size=(5, 5, H, W, 3), dtype=np.uint8))
    reports = set()
    for k in range(1, 6):
        image = build_macropixel(lf, k, size_policy=size_policy).pixels
        reports.add(pipeline_cost(image.shape, RESNET_STEM).to_json())
    assert len(reports) == 1
    assert reports == {pipeline_cost((H, W, 3), RESNET_STEM).to_json()}


# -- 9 ----------------------------------------------------------------------

@pytest.fixture(scope="module")
def lffd_manifest(tmp_path_factory):
    root = tmp_path_factory.mktemp("lffd")
    build_corpus(root, subjects=50, sessions=(1, 2), images=False)
    return scan_corpus(root)


@criterion(9, "LFFD-shaped fixture: 4000 records, |test| = 500, |train| = 3500, partition")
@pytest.mark.parametrize("held_out", CATEGORIES)
def test_c9_dataset_protocol(lffd_manifest, held_out):
    # fixture as stated: 50 subjects x 2 sessions x 20 images, 5 per category
    per_session = Counter((r.subject, r.session) for r in lffd_manifest.records)
    assert len(per_session) == 100 and set(per_session.values()) == {20}
    split = split_by_variation(lffd_manifest, held_out)
    train = {r.path for r in split.records if r.split == "train"}
    test = {r.path for r in split.records if r.split == "test"}
    everything = {r.path for r in split.records}
    results = {
        "total == 4000": len(split.records) == 4000,
        "|test| == 500": len(test) == 500,
        "|train| == 3500": len(train) == 3500,
        "partition": not (train & test) and (train | test) == everything
                     and len(everything) == len(split.records),
    }
    observed = f"total={len(split.records)} test={len(test)} train={len(train)}"
    assert all(results.values()), f"{observed}; failed: {[k for k, ok in results.items() if not ok]}"


# -- 10 ---------------------------------------------------------------------

def _same_tree(a, b):
    names_a = sorted(p.relative_to(a) for p in a.rglob("*") if p.is_file())
    names_b = sorted(p.relative_to(b) for p in b.rglob("*") if p.is_file())
    assert names_a == names_b and names_a
    for rel in names_a:
        assert filecmp.cmp(a / rel, b / rel, shallow=False), rel


@pytest.fixture(scope="module")
def cli_inputs(tmp_path_factory):
    base = tmp_path_factory.mktemp("cli_in")
    rng = np.random.default_rng(SEED + 10)
    lf = LightField4D.from_array(rng.integers(0, 65536, size=(5, 5, 24, 20, 3), dtype=np.uint16))
    write_lightfield(lf, base / "lf")
    (base / "layers.json").write_text(json.dumps([s.__dict__ for s in RESNET_STEM]))
    build_corpus(base / "corpus", subjects=4,
                 counts={"expression": 2, "pose": 1, "illumination": 2, "occlusion": 1})
    return base


def _cli_runs(base):
    lf = str(base / "lf")
    corpus = str(base / "corpus")
    return {
        "view": lambda o: ["view", lf, f"{o}/v.png", "--view", "1,3"],
        "macropixel": lambda o: ["macropixel", lf, f"{o}/m.png", "--k", "4", "--size-policy", "pad",
                                 "--metadata", f"{o}/m.json"],
        "epi": lambda o: ["epi", lf, f"{o}/e.png", "--orientation", "h",
                          "--fixed-spatial", "5", "--fixed-angular", "2"],
        "lenslet": lambda o: ["lenslet", lf, f"{o}/mosaic"],
        "delenslet": lambda o: ["delenslet", lf, f"{o}/views"],
        "disparity": lambda o: ["disparity", lf, f"{o}/d.png", "--target", "2,0", "--range", "-2,2",
                                "--confidence", f"{o}/c.png"],
        "cost": lambda o: ["cost", "--layers", str(base / "layers.json"), "--input", "625,434,3",
                           "--output", f"{o}/cost.json"],
        "synth": lambda o: ["synth", f"{o}/synth", "--disparity", "-1", "--texture", "noise",
                            "--dims", "3,5,16,16", "--seed", "9"],
        "dataset scan": lambda o: ["dataset", "scan", corpus, "--output", f"{o}/all.csv"],
    }


@criterion(10, "every CLI subcommand is byte-for-byte deterministic")
@pytest.mark.parametrize("name", ["view", "macropixel", "epi", "lenslet", "delenslet",
                                  "disparity", "cost", "synth", "dataset scan"])
def test_c10_cli_determinism(cli_inputs, tmp_path, name):
    argv = _cli_runs(cli_inputs)[name]
    for run in ("a", "b"):
        (tmp_path / run).mkdir()
        assert main(argv(tmp_path / run)) == 0
    _same_tree(tmp_path / "a", tmp_path / "b")


@criterion(10, "every CLI subcommand is byte-for-byte deterministic")
def test_c10_dataset_split_and_export_with_jobs(cli_inputs, tmp_path):
    corpus = str(cli_inputs / "corpus")
    assert main(["dataset", "scan", corpus, "--output", str(tmp_path / "all.csv")]) == 0
    for run in ("a", "b"):
        out = tmp_path / run
        assert main(["dataset", "split", str(tmp_path / "all.csv"), "--held-out", "illumination",
                     "--output", str(out / "split.csv")]) == 0
    _same_tree(tmp_path / "a", tmp_path / "b")
    exports = {}
    for run, jobs in (("x1", "1"), ("x4a", "4"), ("x4b", "4"), ("x3", "3")):
        out = tmp_path / run
        exports[run] = out
        assert main(["dataset", "export", str(tmp_path / "a" / "split.csv"), "--root", corpus,
                     "--out-dir", str(out), "--k", "3", "--jobs", jobs]) == 0
    for run in ("x4a", "x4b", "x3"):
        _same_tree(exports["x1"], exports[run])
