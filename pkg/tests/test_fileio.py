import hashlib
import json

import numpy as np
import pytest

from invsets import Band, Domain, Field, IndexSet
from invsets.errors import ValidationError
from invsets.fileio import (load_config, read_band_csv, read_design_csv,
                            read_field_csv, read_json, read_maxstat_csv,
                            read_samples_csv, sha256_file, write_band_csv,
                            write_design_csv, write_field_csv,
                            write_indexset_csv, write_json, write_manifest,
                            write_maxstat_csv, write_samples_csv)
from invsets.regression import DesignMatrix


def dom1d(n=5):
    return Domain(np.linspace(0.0, 1.0, n))


def dom2d():
    g = np.linspace(0.0, 1.0, 3)
    g1, g2 = np.meshgrid(g, g, indexing="ij")
    return Domain(np.column_stack([g1.ravel(), g2.ravel()]))


# ----------------------------------------------------------- roundtrips

def test_field_roundtrip_bitwise(tmp_path):
    rng = np.random.default_rng(0)
    field = Field(dom1d(), rng.standard_normal(5))
    p = tmp_path / "f.csv"
    write_field_csv(p, field)
    back = read_field_csv(p)
    assert np.array_equal(back.values, field.values)
    assert back.domain.equals(field.domain)
    # writing the read-back field gives identical bytes
    p2 = tmp_path / "f2.csv"
    write_field_csv(p2, back)
    assert p.read_bytes() == p2.read_bytes()


def test_field_roundtrip_2d_and_labels(tmp_path):
    rng = np.random.default_rng(1)
    field = Field(dom2d(), rng.standard_normal(9))
    p = tmp_path / "f2d.csv"
    write_field_csv(p, field)
    back = read_field_csv(p)
    assert back.domain.equals(field.domain)
    assert back.domain.axis_names == ("s1", "s2")

    labelled = Domain.from_labels(("a", "b", "c"))
    field_l = Field(labelled, np.array([1.5, -2.25, 0.125]))
    pl = tmp_path / "fl.csv"
    write_field_csv(pl, field_l)
    back_l = read_field_csv(pl)
    assert back_l.domain.labels == ("a", "b", "c")
    assert np.array_equal(back_l.values, field_l.values)
    header = pl.read_text().splitlines()[0]
    assert header.endswith("label,value")


def test_band_roundtrip(tmp_path):
    rng = np.random.default_rng(2)
    dom = dom1d(7)
    est = rng.standard_normal(7)
    sd = np.abs(rng.standard_normal(7)) + 0.1
    band = Band(dom, est - sd, est + sd, 0.1)
    p = tmp_path / "band.csv"
    write_band_csv(p, band, est, sd)
    header = p.read_text().splitlines()[0]
    assert header == "s,estimate,sd,lower,upper"
    back, est2, sd2 = read_band_csv(p, alpha=0.1)
    assert np.array_equal(back.lower, band.lower)
    assert np.array_equal(back.upper, band.upper)
    assert np.array_equal(est2, est) and np.array_equal(sd2, sd)
    assert back.alpha == 0.1


def test_samples_roundtrip(tmp_path):
    rng = np.random.default_rng(3)
    dom = dom1d(4)
    mat = rng.standard_normal((6, 4))
    p = tmp_path / "s.csv"
    write_samples_csv(p, mat, dom)
    back = read_samples_csv(p)
    assert np.array_equal(back, mat)
    assert p.read_text().splitlines()[0] == ",".join(dom.point_names())


def test_design_roundtrip(tmp_path):
    rng = np.random.default_rng(4)
    X = rng.standard_normal((8, 3))
    y = rng.standard_normal(8)
    d = DesignMatrix(X, ("const", "x1", "x2"))
    p = tmp_path / "d.csv"
    write_design_csv(p, d, y)
    back, y2 = read_design_csv(p, response="y")
    assert np.array_equal(back.X, X) and np.array_equal(y2, y)
    assert back.labels == ("const", "x1", "x2")
    # without a response name the y column stays in the matrix
    full, none = read_design_csv(p)
    assert none is None and full.X.shape == (8, 4)
    # response column in the middle is split out correctly
    p2 = tmp_path / "d2.csv"
    write_design_csv(p2, DesignMatrix(X, ("const", "y", "x2")))
    mid, ymid = read_design_csv(p2, response="y")
    assert np.array_equal(ymid, X[:, 1])
    assert mid.labels == ("const", "x2")


def test_maxstat_roundtrip(tmp_path):
    vals = np.array([0.5, 1.25, 3.0])
    p = tmp_path / "m.csv"
    write_maxstat_csv(p, vals)
    assert np.array_equal(read_maxstat_csv(p), vals)
    assert p.read_text() == "max_stat\n0.5\n1.25\n3.0\n"


def test_indexset_csv(tmp_path):
    dom = dom1d(4)
    inner = IndexSet(dom, np.array([False, True, False, False]))
    outer = IndexSet(dom, np.array([True, True, False, True]))
    p = tmp_path / "sets.csv"
    write_indexset_csv(p, {"inner": inner, "outer": outer}, dom)
    lines = p.read_text().splitlines()
    assert lines[0].endswith("inner,outer")
    cols = [ln.split(",")[-2:] for ln in lines[1:]]
    assert cols == [["0", "1"], ["1", "1"], ["0", "0"], ["0", "1"]]
    with pytest.raises(ValidationError):
        write_indexset_csv(p, {"x": IndexSet(dom1d(3), np.ones(3, bool))}, dom)


def test_lf_only_line_endings(tmp_path):
    p = tmp_path / "f.csv"
    write_field_csv(p, Field(dom1d(3), np.zeros(3)))
    raw = p.read_bytes()
    assert b"\r" not in raw
    assert raw.endswith(b"\n")


# ------------------------------------------------------------- errors

def test_read_errors(tmp_path):
    with pytest.raises(ValidationError):
        read_field_csv(tmp_path / "missing.csv")
    bad = tmp_path / "bad.csv"
    bad.write_text("s,value\n0.0,oops\n")
    with pytest.raises(ValidationError):
        read_field_csv(bad)
    wrong = tmp_path / "wrong.csv"
    wrong.write_text("s,notvalue\n0.0,1.0\n")
    with pytest.raises(ValidationError):
        read_field_csv(wrong)
    empty = tmp_path / "empty.csv"
    empty.write_text("")
    with pytest.raises(ValidationError):
        read_field_csv(empty)
    ragged = tmp_path / "ragged.csv"
    ragged.write_text("p0,p1\n1.0,2.0\n3.0\n")
    with pytest.raises(ValidationError):
        read_samples_csv(ragged)
    nohdr = tmp_path / "m.csv"
    nohdr.write_text("stat\n1.0\n")
    with pytest.raises(ValidationError):
        read_maxstat_csv(nohdr)


# ---------------------------------------------------------- json/toml

def test_write_json_deterministic(tmp_path):
    p = tmp_path / "a.json"
    write_json(p, {"b": 2, "a": [1, 2]})
    text = p.read_text()
    assert text == '{\n  "a": [\n    1,\n    2\n  ],\n  "b": 2\n}\n'
    assert read_json(p) == {"a": [1, 2], "b": 2}
    with pytest.raises(ValidationError):
        read_json(tmp_path / "missing.json")
    broken = tmp_path / "broken.json"
    broken.write_text("{nope")
    with pytest.raises(ValidationError):
        read_json(broken)


def test_load_config(tmp_path):
    t = tmp_path / "c.toml"
    t.write_text('seed = 3\n[gen]\nscenario = "dense1d"\nn = 10\n')
    doc = load_config(t)
    assert doc == {"seed": 3, "gen": {"scenario": "dense1d", "n": 10}}
    j = tmp_path / "c.json"
    j.write_text('{"seed": 4}')
    assert load_config(j) == {"seed": 4}
    bad = tmp_path / "bad.toml"
    bad.write_text("= nope")
    with pytest.raises(ValidationError):
        load_config(bad)
    arr = tmp_path / "arr.json"
    arr.write_text("[1, 2]")
    with pytest.raises(ValidationError):
        load_config(arr)
    with pytest.raises(ValidationError):
        load_config(tmp_path / "nope.toml")


# ------------------------------------------------------------ manifest

def test_sha256_file(tmp_path):
    p = tmp_path / "x.bin"
    p.write_bytes(b"hello")
    assert sha256_file(p) == hashlib.sha256(b"hello").hexdigest()


def test_write_manifest(tmp_path):
    src = tmp_path / "in.csv"
    src.write_text("a\n1\n")
    out = tmp_path / "out.csv"
    out.write_text("b\n2\n")
    path = write_manifest(tmp_path, "scb", {"alpha": 0.05}, [src], [out],
                          "2026-01-01T00:00:00Z", "2026-01-01T00:00:05Z", 5.0)
    doc = json.loads(path.read_text())
    assert path.name == "manifest.json"
    assert doc["command"] == "scb"
    assert doc["params"] == {"alpha": 0.05}
    assert doc["inputs"] == {str(src): sha256_file(src)}
    assert doc["outputs"] == {"out.csv": sha256_file(out)}
    assert doc["runtime_seconds"] == 5.0
    assert doc["package"] == "invsets"
