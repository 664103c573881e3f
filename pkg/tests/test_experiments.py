"""Sweep drivers, scaling fit, CSV emission, and the CLI front end."""

import dataclasses
import math
import os

import pytest

from vacuumbell import (
    QuadConfig,
    gap_study_pair,
    gaussian_pair,
)
from vacuumbell.cli import ConfigError, main, parse_config_text
from vacuumbell.experiments import (
    CSV_COLUMNS,
    NPolicy,
    ResultRow,
    RunConfig,
    SweepKind,
    compute_row,
    emit_results,
    fit_scaling,
    read_results,
    render_csv,
    render_summary,
    run_sweep,
    scaling_check,
    single_point,
    sweep_gap,
    single_point as _single_point,
)

QUAD = QuadConfig()

_HEADER = (
    "L_over_T,T,N,k,q,R,m,eps0_A,eps0_B,Omega_A,Omega_B,X0,nEA2,nEB2,EAB,nX2,"
    "negativity,negativity_approx,M,eta_opt,M_filtered,chsh_max_filtered,"
    "eq11_lhs,eq11_rhs,success_prob,error_budget,status"
)


@pytest.fixture(scope="module")
def gap_template():
    return gap_study_pair(quad=QUAD)


@pytest.fixture(scope="module")
def gap_sweep_rows(gap_template):
    cfg = RunConfig(
        pair=gap_template,
        sweep="gap",
        sweep_values=(1.0, 2.0, 4.0, 8.0, 16.0, 32.0),
        quad=QUAD,
    )
    return cfg, sweep_gap(cfg)


def _synthetic_row(L_over_T, negativity, status="ok"):
    return ResultRow(
        sweep="separation",
        sweep_value=L_over_T,
        L_over_T=L_over_T,
        T=1.0,
        N=4.0,
        k=6.0,
        q=2.0,
        R=0.01,
        m=0.0,
        eps0_A=1e-3,
        eps0_B=1e-3,
        Omega_A=5.0,
        Omega_B=3.0,
        X0=1e-10,
        nEA2=1e-13,
        nEB2=1e-6,
        EAB=-5e-11,
        nX2=1e-19,
        negativity=negativity,
        negativity_approx=negativity,
        M=1.0,
        eta_opt=1e-5,
        M_filtered=1.5,
        chsh_max_filtered=2.449,
        filter_condition_lhs=5.0,
        filter_condition_rhs=4.0,
        success_prob=1e-10,
        error_budget=1e-18,
        status=status,
    )


class TestNPolicy:
    def test_squared_ratio(self):
        pol = NPolicy.SQUARED_RATIO
        assert pol.index_for(2.0, 1.0, fallback=0.0) == 4.0
        assert pol.index_for(2.5, 1.0, fallback=0.0) == 7.0
        assert pol.index_for(3.0, 1.0, fallback=0.0) == 9.0

    def test_linear_ratio(self):
        assert NPolicy.LINEAR_RATIO.index_for(2.5, 1.0, fallback=0.0) == 3.0
        assert NPolicy.LINEAR_RATIO.index_for(2.0, 1.0, fallback=0.0) == 2.0

    def test_fixed(self):
        assert NPolicy.FIXED.index_for(2.5, 1.0, fallback=11.0) == 11.0


class TestRunConfigValidation:
    def test_empty_values(self, gap_template):
        with pytest.raises(ValueError):
            RunConfig(pair=gap_template, sweep="gap", sweep_values=())

    def test_non_increasing(self, gap_template):
        with pytest.raises(ValueError):
            RunConfig(pair=gap_template, sweep="gap", sweep_values=(2.0, 2.0))

    def test_non_finite(self, gap_template):
        with pytest.raises(ValueError):
            RunConfig(pair=gap_template, sweep="gap", sweep_values=(1.0, math.inf))

    def test_separation_below_window(self, gap_template):
        with pytest.raises(ValueError):
            RunConfig(pair=gap_template, sweep="separation", sweep_values=(0.5, 2.0))

    def test_gap_scale_floor(self, gap_template):
        with pytest.raises(ValueError):
            RunConfig(pair=gap_template, sweep="gap", sweep_values=(0.5, 1.0))

    def test_eta_range(self, gap_template):
        with pytest.raises(ValueError):
            RunConfig(pair=gap_template, sweep="filter_eta", sweep_values=(0.5, 1.5))

    def test_index_sweep_needs_oscillatory_window(self):
        with pytest.raises(ValueError):
            RunConfig(
                pair=gaussian_pair(quad=QUAD),
                sweep="superosc_index",
                sweep_values=(4.0, 9.0),
            )

    def test_string_kind_coerced(self, gap_template):
        cfg = RunConfig(pair=gap_template, sweep="gap", sweep_values=(1.0, 2.0))
        assert cfg.sweep is SweepKind.GAP
        assert cfg.n_policy is NPolicy.SQUARED_RATIO


class TestComputeRow:
    def test_ok_row(self, gap_template):
        row = compute_row(gap_template, QUAD, "gap", 1.0)
        assert row.status == "ok"
        assert row.L_over_T == pytest.approx(1.2)
        assert row.Omega_A == 3.0 and row.Omega_B == 3.0
        assert row.k == 6.0 and row.N == 0.0
        assert row.chsh_max_filtered == pytest.approx(
            2.0 * math.sqrt(row.M_filtered), rel=1e-15
        )

    def test_failure_becomes_tagged_row(self):
        hot = gaussian_pair(quad=QUAD)
        hot = dataclasses.replace(
            hot,
            detA=dataclasses.replace(hot.detA, eps0=0.5),
            detB=dataclasses.replace(hot.detB, eps0=0.5),
        )
        row = compute_row(hot, QUAD, "point", 2.0)
        assert row.status == "failed:ValueError"
        assert math.isnan(row.X0) and math.isnan(row.M_filtered)
        # the input half of the row survives for the audit trail
        assert row.eps0_A == 0.5 and row.Omega_A == 0.0


class TestSweepConsistency:
    def test_rows_match_single_point_bitwise(self, gap_sweep_rows):
        cfg, rows = gap_sweep_rows
        for row in rows:
            scaled = dataclasses.replace(
                cfg.pair,
                detA=dataclasses.replace(
                    cfg.pair.detA, gap=cfg.pair.detA.gap * row.sweep_value
                ),
                detB=dataclasses.replace(
                    cfg.pair.detB, gap=cfg.pair.detB.gap * row.sweep_value
                ),
            )
            point = single_point(scaled, cfg.quad)
            assert render_csv([point]) == render_csv([row])

    def test_scale_one_is_template_point(self, gap_sweep_rows):
        cfg, rows = gap_sweep_rows
        point = _single_point(cfg.pair, cfg.quad)
        assert render_csv([point]) == render_csv([rows[0]])


class TestCrossoverShape:
    def test_filtered_violation_grows_as_negativity_falls(self, gap_sweep_rows):
        _, rows = gap_sweep_rows
        assert all(r.status == "ok" for r in rows)
        mf = [r.M_filtered for r in rows]
        assert all(b > a for a, b in zip(mf, mf[1:]))
        assert all(m <= 2.0 + 1e-12 for m in mf)
        neg = [r.negativity for r in rows]
        onset = 2  # scales 1 and 2 sit below the entanglement threshold
        assert all(n == 0.0 for n in neg[:onset])
        assert all(n > 0.0 for n in neg[onset:])
        assert all(b < a for a, b in zip(neg[onset:], neg[onset + 1 :]))
        assert rows[4].M_filtered == pytest.approx(1.8911222024415948, rel=1e-9)


class TestScalingFit:
    def test_pure_exponential(self):
        xs = (2.25, 4.0, 6.25, 9.0)
        fit = fit_scaling([(x, -x) for x in xs])
        assert fit.slope == pytest.approx(-1.0, abs=1e-9)
        assert fit.intercept == pytest.approx(0.0, abs=1e-9)
        assert max(abs(r) for r in fit.residuals) < 1e-12

    def test_too_few_points(self):
        with pytest.raises(ValueError):
            fit_scaling([(1.0, -1.0)])

    def _cfg(self):
        return RunConfig(
            pair=gap_study_pair(quad=QUAD),
            sweep="separation",
            sweep_values=(1.5, 2.0, 2.5, 3.0),
            quad=QUAD,
        )

    def test_check_passes_on_slow_decay(self):
        rows = [_synthetic_row(x, math.exp(-(x * x))) for x in (1.5, 2.0, 2.5, 3.0)]
        report = scaling_check(self._cfg(), rows=rows)
        assert report.status == "pass"
        assert report.slope == pytest.approx(-1.0, abs=1e-9)

    def test_check_fails_on_cubic_decay(self):
        rows = [_synthetic_row(x, math.exp(-((x * x) ** 3))) for x in (1.5, 2.0, 2.5, 3.0)]
        report = scaling_check(self._cfg(), rows=rows)
        assert report.status == "fail"
        assert report.slope < -1.3

    def test_check_inconclusive_below_three_survivors(self):
        rows = [
            _synthetic_row(1.5, math.exp(-2.25)),
            _synthetic_row(2.0, math.exp(-4.0)),
            _synthetic_row(2.5, 0.0),
            _synthetic_row(3.0, float("nan"), status="failed:ValueError"),
        ]
        report = scaling_check(self._cfg(), rows=rows)
        assert report.status == "inconclusive"
        assert len(report.excluded) == 2

    def test_check_requires_separation_sweep(self, ):
        cfg = RunConfig(
            pair=gap_study_pair(quad=QUAD), sweep="gap", sweep_values=(1.0, 2.0, 4.0, 8.0)
        )
        with pytest.raises(ValueError):
            scaling_check(cfg, rows=[])


class TestCsv:
    def test_header_verbatim(self, gap_sweep_rows):
        _, rows = gap_sweep_rows
        assert render_csv(rows).splitlines()[0] == _HEADER
        assert ",".join(CSV_COLUMNS) == _HEADER

    def test_filter_condition_columns(self, gap_sweep_rows):
        _, rows = gap_sweep_rows
        line = render_csv([rows[4]]).splitlines()[1].split(",")
        lhs_col = CSV_COLUMNS.index("eq11_lhs")
        assert float(line[lhs_col]) == rows[4].filter_condition_lhs
        assert float(line[lhs_col + 1]) == rows[4].filter_condition_rhs

    def test_roundtrip_exact(self, gap_sweep_rows, tmp_path):
        cfg, rows = gap_sweep_rows
        path = str(tmp_path / "out.csv")
        csv_path, summary_path = emit_results(rows, path, cfg)
        assert os.path.exists(csv_path) and os.path.exists(summary_path)
        back = read_results(csv_path)
        assert len(back) == len(rows)
        for rec, row in zip(back, rows):
            assert rec["negativity"] == row.negativity
            assert rec["M_filtered"] == row.M_filtered
            assert rec["X0"] == row.X0
            assert rec["eq11_lhs"] == row.filter_condition_lhs
            assert rec["status"] == "ok"

    def test_nan_cells_read_back_as_nan(self, tmp_path):
        row = _synthetic_row(2.0, float("nan"), status="failed:ValueError")
        path = str(tmp_path / "bad.csv")
        emit_results([row], path)
        rec = read_results(path)[0]
        assert math.isnan(rec["negativity"])
        assert rec["status"] == "failed:ValueError"

    def test_byte_determinism(self, gap_sweep_rows, tmp_path):
        cfg, rows = gap_sweep_rows
        p1, p2 = str(tmp_path / "a.csv"), str(tmp_path / "b.csv")
        emit_results(rows, p1, cfg)
        emit_results(rows, p2, cfg)
        assert open(p1, "rb").read() == open(p2, "rb").read()
        assert (
            open(p1.replace(".csv", ".summary.txt"), "rb").read()
            == open(p2.replace(".csv", ".summary.txt"), "rb").read()
        )

    def test_summary_config_echo_isolates_one_change(self, gap_template):
        cfg1 = RunConfig(pair=gap_template, sweep="gap", sweep_values=(1.0, 2.0), quad=QUAD)
        heavier = dataclasses.replace(gap_template, field_mass=0.25)
        cfg2 = dataclasses.replace(cfg1, pair=heavier)
        rows = [_synthetic_row(1.2, 1e-11)]
        s1 = render_summary(rows, cfg1).splitlines()
        s2 = render_summary(rows, cfg2).splitlines()
        diff = [(a, b) for a, b in zip(s1, s2) if a != b]
        assert len(s1) == len(s2)
        assert diff == [("pair.field_mass = 0.0", "pair.field_mass = 0.25")]

    def test_read_rejects_foreign_header(self, tmp_path):
        path = tmp_path / "alien.csv"
        path.write_text("a,b,c\n1,2,3\n")
        with pytest.raises(ValueError):
            read_results(str(path))

    def test_read_rejects_short_row(self, tmp_path):
        path = tmp_path / "short.csv"
        path.write_text(_HEADER + "\n1,2,3\n")
        with pytest.raises(ValueError):
            read_results(str(path))

    def test_emit_needs_rows(self, tmp_path):
        with pytest.raises(ValueError):
            emit_results([], str(tmp_path / "x.csv"))

    def test_emit_unwritable_leaves_nothing(self, tmp_path):
        target = tmp_path / "missing-dir" / "x.csv"
        with pytest.raises(OSError):
            emit_results([_synthetic_row(2.0, 1e-11)], str(target))
        assert not target.exists()


class TestConfigParsing:
    def test_comments_and_blanks(self):
        text = "# full line\npreset = gaussian  # trailing\n\nT = 1.0\n"
        assert parse_config_text(text) == {"preset": "gaussian", "T": "1.0"}

    def test_unknown_key(self):
        with pytest.raises(ConfigError):
            parse_config_text("bogus = 1\n")

    def test_duplicate_key(self):
        with pytest.raises(ConfigError):
            parse_config_text("T = 1\nT = 2\n")

    def test_missing_value(self):
        with pytest.raises(ConfigError):
            parse_config_text("T =\n")


class TestCli:
    def _write(self, tmp_path, text, name="run.cfg"):
        p = tmp_path / name
        p.write_text(text)
        return str(p)

    def test_selftest(self, capsys):
        assert main(["selftest"]) == 0
        out = capsys.readouterr().out
        assert "selftest: OK" in out and "FAIL" not in out

    def test_point_gap_study(self, tmp_path, capsys):
        cfg = self._write(tmp_path, "preset = gap-study\n")
        out = str(tmp_path / "point.csv")
        assert main(["point", "--config", cfg, "--out", out]) == 0
        recs = read_results(out)
        assert len(recs) == 1 and recs[0]["status"] == "ok"
        assert "negativity=" in capsys.readouterr().out

    def test_sweep_gap(self, tmp_path):
        cfg = self._write(
            tmp_path, "preset = gap-study\nsweep_values = 1, 4\n"
        )
        out = str(tmp_path / "sweep.csv")
        assert main(["sweep-gap", "--config", cfg, "--out", out]) == 0
        recs = read_results(out)
        assert len(recs) == 2
        assert recs[1]["M_filtered"] > recs[0]["M_filtered"]

    def test_identical_runs_identical_bytes(self, tmp_path):
        cfg = self._write(tmp_path, "preset = gap-study\nsweep_values = 1, 4\n")
        out1, out2 = str(tmp_path / "r1.csv"), str(tmp_path / "r2.csv")
        assert main(["sweep-gap", "--config", cfg, "--out", out1]) == 0
        assert main(["sweep-gap", "--config", cfg, "--out", out2]) == 0
        assert open(out1, "rb").read() == open(out2, "rb").read()

    def test_failed_point_exit_two(self, tmp_path):
        cfg = self._write(
            tmp_path, "preset = gaussian\neps0_A = 0.5\neps0_B = 0.5\n"
        )
        out = str(tmp_path / "hot.csv")
        assert main(["point", "--config", cfg, "--out", out]) == 2
        assert read_results(out)[0]["status"] == "failed:ValueError"

    def test_missing_config_exit_three(self, tmp_path, capsys):
        code = main(["point", "--config", str(tmp_path / "absent.cfg")])
        assert code == 3
        assert "config error" in capsys.readouterr().err

    def test_unknown_key_exit_three(self, tmp_path, capsys):
        cfg = self._write(tmp_path, "bogus = 1\n")
        assert main(["point", "--config", cfg]) == 3

    def test_bad_preset_exit_three(self, tmp_path, capsys):
        cfg = self._write(tmp_path, "preset = nonexistent\n")
        assert main(["point", "--config", cfg]) == 3

    def test_oracle_check_gaussian(self, tmp_path, capsys):
        cfg = self._write(tmp_path, "preset = gaussian\n")
        code = main(["oracle-check", "--config", cfg, "--oracle-modes", "4000"])
        out = capsys.readouterr().out
        assert code == 0
        assert "oracle check: PASS" in out
