import csv
import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from givenstour.data import (
    TORUS_MAJOR,
    TORUS_MINOR,
    Dataset,
    background_samples,
    export_path,
    export_projection_geometry,
    export_trace,
    generate_sine,
    generate_sine_in_noise,
    generate_two_factor,
    load_csv,
    pca,
    projection_geometry,
    read_frame,
    read_path,
    standardize,
    write_csv,
    write_frame,
)
from givenstour.errors import DataFormatError, DegenerateInputError, InvalidInputError
from givenstour.geodesic import geodesic_full_path
from givenstour.givens import givens_full_path
from givenstour.indexes import splines_index
from givenstour.linalg import is_orthonormal
from givenstour.tour import TourConfig, grand_tour


def write_text(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


def torus_distance(points):
    # distance of each point from the torus surface with radii (R, r)
    ring = np.hypot(points[:, 0], points[:, 1]) - TORUS_MAJOR
    return np.abs(np.hypot(ring, points[:, 2]) - TORUS_MINOR)


class TestDataset:
    def test_shape_properties(self):
        D = Dataset(np.zeros((3, 2)), ["a", "b"])
        assert (D.n, D.p) == (3, 2)

    @pytest.mark.parametrize(
        "values,names",
        [
            (np.zeros((3, 2)), ["a", "a"]),
            (np.zeros((3, 2)), ["a"]),
            (np.array([[np.nan, 1.0], [0.0, 1.0]]), ["a", "b"]),
            (np.zeros((1, 2)), ["a", "b"]),
        ],
    )
    def test_invalid(self, values, names):
        with pytest.raises(InvalidInputError):
            Dataset(values, names)


class TestLoadCsv:
    def test_hand_written(self, tmp_path):
        path = write_text(tmp_path, "d.csv", "a,b\n1,2.5\n-3,4e-1\n0.125,6\n")
        D = load_csv(path)
        assert D.column_names == ["a", "b"]
        np.testing.assert_array_equal(D.values, [[1, 2.5], [-3, 0.4], [0.125, 6]])

    def test_na_named(self, tmp_path):
        path = write_text(tmp_path, "d.csv", "a,b\n1,2\n3,NA\n")
        with pytest.raises(DataFormatError) as err:
            load_csv(path)
        assert "row 2" in str(err.value) and "'b'" in str(err.value)

    def test_all_missing_listed(self, tmp_path):
        path = write_text(tmp_path, "d.csv", "a,b\n,2\n3,nan\n")
        message = str(pytest.raises(DataFormatError, load_csv, path).value)
        assert "row 1" in message and "row 2" in message

    def test_non_numeric_located(self, tmp_path):
        path = write_text(tmp_path, "d.csv", "a,b\n1,2\n3,x\n")
        with pytest.raises(DataFormatError) as err:
            load_csv(path)
        assert err.value.row == 2 and err.value.column == "b"

    def test_ragged_row(self, tmp_path):
        path = write_text(tmp_path, "d.csv", "a,b\n1,2\n3\n")
        with pytest.raises(DataFormatError):
            load_csv(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(DataFormatError):
            load_csv(tmp_path / "nope.csv")

    def test_negate(self, tmp_path):
        path = write_text(tmp_path, "d.csv", "a,b\n1,2\n3,4\n")
        np.testing.assert_array_equal(load_csv(path, negate=["b"]).values, [[1, -2], [3, -4]])
        with pytest.raises(InvalidInputError):
            load_csv(path, negate=["c"])

    def test_round_trip(self, tmp_path, rng):
        D = Dataset(rng.normal(size=(20, 3)) * 10.0 ** rng.integers(-5, 5, (20, 3)), ["x", "y", "z"])
        write_csv(D, tmp_path / "r.csv")
        back = load_csv(tmp_path / "r.csv")
        np.testing.assert_array_equal(back.values, D.values)
        assert back.column_names == D.column_names


class TestStandardize:
    def test_constant_shift(self):
        D = Dataset(np.column_stack([np.arange(10.0) + 1e6, np.arange(10.0) ** 2]), ["a", "b"])
        Z = standardize(D).values
        assert np.max(np.abs(Z.mean(axis=0))) <= 1e-12
        assert np.max(np.abs(Z.std(axis=0, ddof=1) - 1)) <= 1e-12

    def test_idempotent(self, rng):
        Z = standardize(Dataset(rng.normal(3, 5, size=(50, 4)), list("abcd")))
        np.testing.assert_allclose(standardize(Z).values, Z.values, atol=1e-12)

    def test_zero_variance_named(self):
        D = Dataset(np.column_stack([np.arange(5.0), np.ones(5)]), ["ok", "flat"])
        with pytest.raises(DegenerateInputError, match="flat"):
            standardize(D)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.floats(-1e3, 1e3), st.floats(0.01, 1e3))
    def test_moments(self, seed, loc, scale):
        X = np.random.default_rng(seed).normal(loc, scale, size=(30, 3))
        Z = standardize(Dataset(X, ["a", "b", "c"])).values
        assert np.max(np.abs(Z.mean(axis=0))) <= 1e-12
        assert np.max(np.abs(Z.std(axis=0, ddof=1) - 1)) <= 1e-12


class TestPca:
    def test_diagonal_covariance(self):
        X = np.random.default_rng(0).normal(size=(10_000, 2)) * [2.0, 1.0]
        res = pca(Dataset(X, ["a", "b"]))
        assert abs(abs(res.rotation[0, 0]) - 1) < 0.01
        assert abs(res.variances[0] / res.variances[1] - 4) < 0.2

    def test_invariants(self, rng):
        X = rng.normal(size=(40, 5)) @ rng.normal(size=(5, 5))
        res = pca(Dataset(X, list("abcde")))
        assert is_orthonormal(res.rotation, 1e-9)
        assert np.all(np.diff(res.variances) <= 0) and np.all(res.variances >= 0)
        assert abs(res.cumulative_proportion[-1] - 1) <= 1e-10
        assert abs(res.variances.sum() - X.var(axis=0, ddof=1).sum()) <= 1e-10 * X.var(axis=0).sum()
        np.testing.assert_allclose(res.scores.var(axis=0, ddof=1), res.variances, rtol=1e-10, atol=1e-12)
        np.testing.assert_allclose(res.scores, (X - X.mean(axis=0)) @ res.rotation)

    def test_fewer_rows_than_columns(self, rng):
        res = pca(Dataset(rng.normal(size=(3, 5)), list("abcde")))
        assert res.rotation.shape == (5, 5)
        assert is_orthonormal(res.rotation, 1e-9)


class TestGenerators:
    def test_sine_index(self):
        assert splines_index(generate_sine().values) >= 0.95

    def test_sine_in_noise_normal_columns(self):
        D = generate_sine_in_noise(n=1000)
        assert D.p == 4
        for k in (0, 1):
            assert abs(stats.skew(D.values[:, k])) < 0.3

    def test_structure_only_in_last_pair(self):
        X = generate_sine_in_noise().values
        assert splines_index(X[:, [2, 3]]) > 0.9
        assert splines_index(X[:, [0, 1]]) < 0.2

    @pytest.mark.parametrize("gen", [generate_sine, generate_sine_in_noise, generate_two_factor])
    def test_deterministic(self, gen):
        np.testing.assert_array_equal(gen(seed=4).values, gen(seed=4).values)
        assert not np.array_equal(gen(seed=4).values, gen(seed=5).values)

    def test_two_factor_shape(self):
        D = generate_two_factor()
        assert (D.n, D.p) == (152, 6)

    def test_small_n(self):
        with pytest.raises(InvalidInputError):
            generate_sine(n=5)


class TestFrames:
    def test_round_trip(self, tmp_path, frame_pair):
        F, _ = frame_pair(5, 2)
        write_frame(tmp_path / "f.csv", F)
        np.testing.assert_array_equal(read_frame(tmp_path / "f.csv"), F)

    @pytest.mark.parametrize("text", ["", "1,a\n", "1,2\n3\n", "inf,0\n"])
    def test_malformed(self, tmp_path, text):
        with pytest.raises(DataFormatError):
            read_frame(write_text(tmp_path, "f.csv", text))


class TestExportPath:
    @pytest.mark.parametrize("fmt", ["csv", "json"])
    def test_round_trip(self, tmp_path, frame_pair, fmt):
        Fa, Fz = frame_pair(6, 2)
        path = givens_full_path(Fa, Fz, 5)
        file = export_path(path, tmp_path / f"p.{fmt}")
        np.testing.assert_array_equal(read_path(file), path.frames)

    def test_single_frame(self, tmp_path):
        Fa = np.eye(4)[:, :2]
        path = givens_full_path(Fa, Fa, 3)
        file = export_path(path, tmp_path / "p.csv")
        rows = list(csv.reader(file.open()))
        assert rows[0] == ["step", "row", "col", "value"]
        assert len(rows) - 1 == 4 * 2
        assert {r[0] for r in rows[1:]} == {"0"}

    def test_csv_ordering(self, tmp_path):
        frames = np.arange(12.0).reshape(2, 3, 2)
        file = export_path(frames, tmp_path / "p.csv")
        rows = list(csv.reader(file.open()))[1:]
        assert rows[:3] == [["0", "0", "0", "0"], ["0", "0", "1", "1"], ["0", "1", "0", "2"]]

    def test_json_schema(self, tmp_path):
        frames = np.arange(12.0).reshape(2, 3, 2)
        data = json.loads(export_path(frames, tmp_path / "p.json").read_text())
        assert data == frames.tolist()

    @pytest.mark.parametrize(
        "text",
        ["a,b,c,d\n0,0,0,1\n", "step,row,col,value\n", "step,row,col,value\n0,0,0,x\n",
         "step,row,col,value\n0,0,0,1\n0,1,0,1\n1,0,0,1\n", "step,row,col,value\n0,0,0,1\n0,0,0,2\n"],
    )
    def test_invalid_csv(self, tmp_path, text):
        with pytest.raises(DataFormatError):
            read_path(write_text(tmp_path, "p.csv", text))

    def test_invalid_json(self, tmp_path):
        with pytest.raises(DataFormatError):
            read_path(write_text(tmp_path, "p.json", "[[1,2],[3]]"))

    def test_unknown_format(self, tmp_path):
        with pytest.raises(InvalidInputError):
            export_path(np.zeros((1, 2, 1)), tmp_path / "p.xml")

    def test_deterministic(self, tmp_path, frame_pair):
        Fa, Fz = frame_pair(4, 1)
        path = givens_full_path(Fa, Fz, 4)
        a = export_path(path, tmp_path / "a.csv").read_bytes()
        b = export_path(path, tmp_path / "b.csv").read_bytes()
        assert a == b


def test_export_trace(tmp_path):
    trace = grand_tour(TourConfig(search="grand", max_targets=2, seed=1), 4, 2)
    rows = list(csv.reader(export_trace(trace, tmp_path / "t.csv").open()))
    assert rows[0] == ["step_id", "target_id", "event", "index_value"]
    assert len(rows) - 1 == len(trace.records)
    assert rows[1][2] == "interpolation" and rows[1][3] == ""


class TestGeometry:
    def test_sphere_points_unit(self, frame_pair):
        Fa, Fz = frame_pair(3, 1)
        pts = projection_geometry(givens_full_path(Fa, Fz, 10))
        np.testing.assert_allclose(np.linalg.norm(pts, axis=1), 1.0, atol=1e-12)

    def test_torus_points_on_surface(self, frame_pair):
        Fa, Fz = frame_pair(3, 2)
        pts = projection_geometry(givens_full_path(Fa, Fz, 10))
        assert np.max(torus_distance(pts)) <= 1e-12

    def test_antipode_endpoints(self):
        Fa = np.array([[0.0], [0.0], [1.0]])
        giv = projection_geometry(givens_full_path(Fa, -Fa, 20))
        geo = projection_geometry(geodesic_full_path(Fa, -Fa, 20))
        np.testing.assert_allclose(giv[-1], [0, 0, -1], atol=1e-12)
        np.testing.assert_allclose(geo[-1], [0, 0, 1], atol=1e-12)

    @pytest.mark.parametrize("d", [1, 2])
    def test_background_on_surface(self, d):
        pts = background_samples(d, 300, seed=2)
        if d == 1:
            assert np.max(np.abs(np.linalg.norm(pts, axis=1) - 1)) <= 1e-12
        else:
            assert np.max(torus_distance(pts)) <= 1e-12

    def test_unsupported(self, frame_pair):
        Fa, Fz = frame_pair(4, 2)
        with pytest.raises(InvalidInputError):
            projection_geometry(givens_full_path(Fa, Fz, 2))
        with pytest.raises(InvalidInputError):
            background_samples(3, 5)

    def test_export(self, tmp_path, frame_pair):
        Fa, Fz = frame_pair(3, 1)
        paths = {"givens": givens_full_path(Fa, Fz, 4), "geodesic": geodesic_full_path(Fa, Fz, 4)}
        file = export_projection_geometry(paths, tmp_path / "g.csv", n_background=7)
        rows = list(csv.reader(file.open()))
        assert rows[0] == ["label", "kind", "step", "x", "y", "z"]
        labels = [r[0] for r in rows[1:]]
        assert labels.count("givens") == 5 and labels.count("geodesic") == 5
        assert labels.count("background") == 7

    def test_export_mixed_dimensions(self, tmp_path, frame_pair):
        a = givens_full_path(*frame_pair(3, 1), 2)
        b = givens_full_path(*frame_pair(3, 2), 2)
        with pytest.raises(InvalidInputError):
            export_projection_geometry({"a": a, "b": b}, tmp_path / "g.csv")
