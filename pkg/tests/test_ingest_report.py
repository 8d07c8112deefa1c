import json
import math

import numpy as np
import pytest

from potselect.bayesopt import BoConfig, select_threshold
from potselect.errors import EmptyDataError, FormatError
from potselect.fit import ExcessSet, fit_gpd
from potselect.gpd import GpdParams, gpd_sample
from potselect.ingest import ingest, parse_text
from potselect.report import TRACE_COLUMNS, FitReport, TraceRow, fmt, write_trace


class TestIngest:
    def test_bare_numbers(self):
        s = parse_text("1.0\n2.5\n3.1\n")
        np.testing.assert_array_equal(s.values, [1.0, 2.5, 3.1])

    def test_column_by_name_and_index(self):
        text = "date,precip_mm,flag\n2000-01-01,1.5,a\n2000-01-02,,b\n2000-01-03,7.25,c\n"
        by_name = parse_text(text, column="precip_mm")
        by_index = parse_text(text, column=1)
        np.testing.assert_array_equal(by_name.values, [1.5, 7.25])
        np.testing.assert_array_equal(by_index.values, by_name.values)
        assert by_name.meta["skipped"] == 1

    def test_semicolon_and_tab(self):
        assert len(parse_text("a;b\n1;2\n3;4\n", column="b")) == 2
        assert list(parse_text("a\tb\n1\t2\n3\t4\n", column="a").values) == [1.0, 3.0]

    def test_missing_and_nonfinite_skipped(self):
        s = parse_text("1\nNA\n\n2\nnan\ninf\n3\n")
        np.testing.assert_array_equal(s.values, [1.0, 2.0, 3.0])
        assert s.meta["skipped"] == 4

    def test_header_only(self):
        with pytest.raises(EmptyDataError):
            parse_text("value\n")
        with pytest.raises(EmptyDataError):
            parse_text("\n\n")

    def test_bad_token_line_number(self):
        with pytest.raises(FormatError) as exc:
            parse_text("value\n1.0\n2.0\nabc\n")
        assert exc.value.line == 4
        assert "line 4" in str(exc.value)

    def test_ambiguous_column(self):
        with pytest.raises(FormatError):
            parse_text("a,b\n1,2\n")
        with pytest.raises(FormatError):
            parse_text("a,b\n1,2\n", column="c")

    def test_fixture_file(self, rainfall_csv):
        s = ingest(rainfall_csv, column="precip_mm")
        assert len(s) == 200 and s.min >= 0


@pytest.fixture(scope="module")
def selected():
    x = gpd_sample(GpdParams(0.1, 1.0), 3000, seed=5)
    return x, select_threshold(x, 0.0, 1.5, BoConfig(n_init=3, n_iter=4, seed=1))


class TestReport:
    def test_fit_report_round_trip(self, selected):
        x, trace = selected
        r = FitReport.from_fit(trace.best.fit, len(x), score=trace.best.score, trace=trace, config={"seed": 1})
        back = FitReport.loads(r.dumps())
        assert back == r
        assert back.dumps() == r.dumps()
        assert json.loads(r.dumps())["search_range"] == [0.0, 1.5]

    def test_sigma_star_and_counts(self, selected):
        x, trace = selected
        f = trace.best.fit
        r = FitReport.from_fit(f, len(x))
        assert r.sigma_star == pytest.approx(f.sigma - f.threshold * f.xi)
        assert r.zeta_u == pytest.approx(f.exceed_count / len(x))
        assert r.trace == () and r.search_range is None

    def test_nonfinite_round_trip(self):
        row = TraceRow(iter=0, u=5.0, score=math.inf, error="too few excesses")
        d = row.to_json()
        assert d["score"] is None
        assert TraceRow.from_json(json.loads(json.dumps(d))) == row
        f = fit_gpd(ExcessSet(0.0, np.linspace(0.1, 3.0, 40), 40))
        r = FitReport.from_fit(f, 40)
        r2 = FitReport(**{**r.__dict__, "se_xi": math.nan})
        back = FitReport.loads(r2.dumps())
        assert math.isnan(back.se_xi)

    def test_trace_csv(self, tmp_path, selected):
        _, trace = selected
        p = write_trace(tmp_path / "trace.csv", trace)
        lines = p.read_text().splitlines()
        assert lines[0] == ",".join(TRACE_COLUMNS)
        assert len(lines) == 1 + len(trace.evaluations)
        u = float(lines[1].split(",")[1])
        assert u == trace.evaluations[0].threshold

    def test_fmt_round_trips(self):
        for v in (0.1, 1 / 3, 1e-300, 123456.789):
            assert float(fmt(v)) == v
        assert fmt(7) == "7"
