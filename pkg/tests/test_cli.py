import csv
import io
import json

import jsonschema
import pytest

from linlam import cli
from linlam import series as S
from linlam import stats as ST
from linlam.cli import run_command


def ok(argv):
    code, out = run_command(argv)
    assert code == 0, (argv, code, out)
    return out


def rows(text):
    return list(csv.reader(io.StringIO(text)))


def valid(text):
    doc = json.loads(text)
    jsonschema.validate(doc, cli.load_schema())
    return doc


class TestCount:
    def test_closed_8(self):
        assert ok(["count", "--class", "linear-closed", "--size", "8"]).strip() == "60"

    def test_range_csv(self):
        r = rows(ok(["count", "--class", "linear_closed", "--size-min", "2", "--size-max", "8", "--format", "csv"]))
        assert r[0] == ["class", "n", "count"]
        assert [x[2] for x in r[1:] if x[1] in ("2", "5", "8")] == ["1", "5", "60"]

    def test_json_envelope(self):
        doc = valid(ok(["count", "--class", "linear_closed", "--size", "5", "--format", "json"]))
        assert doc["command"] == "count" and doc["results"][0]["count"] == 5

    def test_unknown_class(self):
        assert run_command(["count", "--class", "bogus", "--size", "3"])[0] == cli.EXIT_USAGE

    def test_bound(self):
        assert run_command(["count", "--class", "linear_closed", "--size", "900"])[0] == cli.EXIT_BOUND


class TestEnumerate:
    def test_csv(self):
        r = rows(ok(["enumerate", "--class", "linear_closed", "--size", "5", "--format", "csv"]))
        assert r[0] == ["n", "index", "object"] and len(r) == 6

    def test_jsonl(self):
        lines = ok(["enumerate", "--class", "linear_closed", "--size", "8"]).splitlines()
        assert len(lines) == 60 and json.loads(lines[0])["class"] == "linear_closed"

    def test_json(self):
        valid(ok(["enumerate", "--class", "maps_13_rooted", "--size", "3", "--format", "json"]))

    def test_workers_agree(self):
        a = ok(["enumerate", "--class", "linear_open", "--size", "6"])
        assert a == ok(["enumerate", "--class", "linear_open", "--size", "6", "--workers", "2"])

    def test_bad_workers(self):
        assert run_command(["enumerate", "--class", "linear_open", "--size", "3", "--workers", "0"])[0] == 2

    def test_empty_csv_is_header_only(self):
        assert rows(ok(["enumerate", "--class", "linear_closed", "--size", "3", "--format", "csv"])) == [
            ["n", "index", "object"]]

    def test_output_file(self, tmp_path):
        p = tmp_path / "out.jsonl"
        assert ok(["enumerate", "--class", "linear_closed", "--size", "5", "-o", str(p)]) == ""
        assert len(p.read_text().splitlines()) == 5

    def test_io_error(self, tmp_path):
        bad = tmp_path / "missing" / "out.csv"
        assert run_command(["enumerate", "--class", "linear_closed", "--size", "5", "-o", str(bad)])[0] == 4


class TestBiject:
    @pytest.mark.parametrize("which,term", [("tau", r"\x.x"), ("slide", r"\a.\b.b a"), ("psi", r"\a.\b.a b"),
                                            ("rooting", r"\a.\b.b a"), ("b1", r"\a.x0 a")])
    def test_roundtrips(self, which, term):
        doc = valid(ok(["biject", "--which", which, "--term", term, "--format", "json"]))
        assert all(r["roundtrip"] for r in doc["results"])

    def test_factor(self):
        doc = valid(ok(["biject", "--which", "factor", "--term", r"\a.[] a", "--format", "json"]))
        assert doc["results"][0]["roundtrip"]

    def test_slide_identity_rejected(self):
        assert run_command(["biject", "--which", "slide", "--term", r"\x.x"])[0] == 2

    def test_parse_error(self):
        assert run_command(["biject", "--which", "tau", "--term", r"\x."])[0] == 2

    def test_tau_from_map(self):
        doc = json.loads(ok(["biject", "--which", "tau", "--term", r"\a.\b.b a", "--format", "json"]))
        m = json.dumps(doc["results"][0]["output"])
        back = json.loads(ok(["biject", "--which", "tau", "--direction", "backward", "--map", m, "--format", "json"]))
        assert back["results"][0]["output"] == "λa.λb.b a"


class TestSeries:
    def test_tsub_header(self):
        r = rows(ok(["series", "--which", "Tsub", "--order", "6", "--order2", "3"]))
        assert r[0] == ["n", "k", "count"]
        assert ["5", "0", "2"] in r and ["5", "2", "1"] in r

    def test_univariate(self):
        r = rows(ok(["series", "--which", "B", "--order", "9"]))
        assert ["8", "0", "20"] in r

    def test_decimal(self):
        r = rows(ok(["series", "--which", "A", "--order", "4", "--decimal"]))
        assert "value" in r[0]

    def test_json(self):
        valid(ok(["series", "--which", "T", "--order", "6", "--order2", "6", "--format", "json"]))

    def test_bound(self):
        assert run_command(["series", "--which", "T", "--order", "5000", "--order2", "4"])[0] == 3

    def test_unknown(self):
        assert run_command(["series", "--which", "nope", "--order", "5"])[0] == 2


class TestSymbolic:
    def test_w1(self):
        assert "-f^3*v^2*z - f*z^2 + f^2" in ok(["symbolic", "--N", "1"])

    def test_invariants(self):
        doc = json.loads(ok(["symbolic", "--N", "3", "--report", "invariants", "--format", "json"]))
        assert doc["ok"]

    def test_balanced(self):
        ok(["symbolic", "--N", "2", "--report", "balanced", "--format", "csv"])

    def test_bound(self):
        assert run_command(["symbolic", "--N", "40"])[0] == 3


class TestStats:
    ARGS = ["stats", "--distribution", "identity", "--size-min", "2", "--size-max", "100"]

    def test_density_deterministic(self):
        a = ok(self.ARGS)
        assert a == ok(self.ARGS)
        r = rows(a)
        assert r[0] == ["n", "k", "count", "probability"]
        assert r[1] == ["2", "1", "1", "1"]
        for n in (5, 50, 98):
            p = sum(float(x[3]) for x in r[1:] if x[0] == str(n))
            assert p == pytest.approx(1.0)

    def test_output_bytes_match_emit_table(self, tmp_path):
        p = tmp_path / "d.csv"
        ok(["stats", "--distribution", "bridges", "--size-min", "5", "--size-max", "11", "--step", "3",
            "-o", str(p)])
        tables = [ST.bridge_distribution(n) for n in (5, 8, 11)]
        assert p.read_bytes() == cli.emit_table(tables)

    def test_empty_header_only(self):
        r = rows(ok(["stats", "--distribution", "identity", "--size-min", "3", "--size-max", "4"]))
        assert r == [["n", "k", "count", "probability"]]

    def test_figure(self, tmp_path):
        fig = tmp_path / "f.png"
        ok(self.ARGS[:3] + ["--size-min", "20", "--size-max", "41", "--step", "3", "--figure", str(fig)])
        assert fig.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"

    def test_trend(self, tmp_path):
        fig = tmp_path / "t.png"
        doc = json.loads(ok(["stats", "--target", "growth_constant", "--format", "json", "--figure", str(fig)]))
        assert doc["ok"] and fig.exists()

    def test_trend_defaults_to_json(self):
        assert json.loads(ok(["stats", "--target", "growth_constant"]))["command"] == "stats"

    def test_saddle(self):
        r = rows(ok(["stats", "--saddle", "involutions", "--size-min", "10", "--size-max", "12"]))
        assert r[0] == ["formula", "n", "aux", "asymptotic", "exact", "relative_error"]
        assert r[2][3] == "0"

    def test_bound(self):
        assert run_command(["stats", "--distribution", "bridges", "--size", "900"])[0] == 3

    def test_mode_required(self):
        assert run_command(["stats", "--size", "5"])[0] == 2


class TestVerify:
    def test_bijections(self):
        code, out = run_command(["verify", "--suite", "bijections", "--size-max", "9"])
        assert code == 0 and out.startswith("bijections: pass")

    def test_json(self):
        doc = valid(ok(["verify", "--suite", "counting", "--format", "json"]))
        assert doc["ok"] and "seconds" not in json.dumps(doc)

    def test_size_bound(self):
        assert run_command(["verify", "--suite", "bijections", "--size-max", "40"])[0] == 3

    def test_unknown_suite(self):
        assert run_command(["verify", "--suite", "nope"])[0] == 2


def test_emit_series():
    out = cli.emit_table(S.series_catalog("T", 4, 3)).decode()
    assert rows(out) == [["n", "k", "count"], ["1", "1", "1"], ["2", "0", "1"], ["3", "2", "1"]]


def test_version():
    code, out = run_command(["--version"])
    assert code == 0 and out.startswith("linlam ")
