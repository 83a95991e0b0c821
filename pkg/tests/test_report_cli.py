"""Report assembly, artifact determinism, and the command-line interface."""

import json

import pytest

from crowdmetrics.cli import main
from crowdmetrics.events import build_snapshot
from crowdmetrics.ingest import format_timestamp, write_events_csv
from crowdmetrics.report import (
    ARTIFACT_NAMES,
    PLOT_ARTIFACT_NAMES,
    TABLE_ARTIFACT_NAMES,
    ReportOptions,
    build_report,
    config_fingerprint,
    render_summary,
    report_to_dict,
    write_report,
)
from crowdmetrics.synth import SynthConfig, generate
from crowdmetrics.volunteers import PlatformClass
from testkit import ev


@pytest.fixture(scope="module")
def synth_snapshot():
    events, _ = generate(SynthConfig(seed=21, volunteer_count=120, project_count=9))
    return build_snapshot(events)


fast = ReportOptions(bootstrap_resamples=300)


class TestFingerprint:
    def test_stable_for_identical_inputs(self, synth_snapshot):
        assert config_fingerprint(synth_snapshot, fast) == config_fingerprint(
            synth_snapshot, fast
        )

    @pytest.mark.parametrize(
        "options",
        [
            ReportOptions(bootstrap_resamples=301),
            ReportOptions(bootstrap_resamples=300, seed=1),
            ReportOptions(bootstrap_resamples=300, availability="all"),
            ReportOptions(bootstrap_resamples=300, confidence_level=0.9),
        ],
    )
    def test_sensitive_to_analysis_options(self, synth_snapshot, options):
        assert config_fingerprint(synth_snapshot, options) != config_fingerprint(
            synth_snapshot, fast
        )

    def test_sensitive_to_exclusions_and_window(self, synth_snapshot):
        base = config_fingerprint(synth_snapshot, fast)
        trimmed = build_snapshot(synth_snapshot.events, exclusions=["p0000"])
        assert config_fingerprint(trimmed, fast) != base


class TestBuildReport:
    def test_groups_partition_platform_regulars(self, synth_snapshot):
        report = build_report(synth_snapshot, fast)
        regulars = sum(
            1 for m in report.volunteers if m.platform_class is PlatformClass.REGULAR
        )
        assert sum(g.volunteer_count for g in report.activity_groups) == regulars
        assert report.distribution.total == len(report.volunteers)

    def test_each_group_ci_brackets_its_mean(self, synth_snapshot):
        report = build_report(synth_snapshot, fast)
        for group in report.activity_groups:
            if group.ci is not None:
                assert group.ci.lower <= group.ci.estimate <= group.ci.upper

    def test_empty_group_has_no_interval(self):
        # single volunteer, single day: no platform regulars at all
        snap = build_snapshot([ev("v", "t1", "p1", "2014-01-01T10:00")])
        report = build_report(snap, fast)
        assert all(g.ci is None and g.volunteer_count == 0 for g in report.activity_groups)

    def test_single_project_platform_has_no_finite_balances(self):
        events = [
            ev("v", "t1", "p1", "2014-01-01T10:00"),
            ev("w", "t2", "p1", "2014-01-02T10:00"),
        ]
        report = build_report(build_snapshot(events), fast)
        # everyone is recruited by the only project: both balances unbounded
        assert report.ecdf_recruitment is None
        assert report.ecdf_computing is None
        doc = report_to_dict(report)
        assert doc["platform"]["ecdf"]["recruitment"] is None
        assert doc["projects"][0]["balance_recruitment"] == "unbounded-"

    def test_ginis_defined_on_normal_platforms(self, synth_snapshot):
        report = build_report(synth_snapshot, fast)
        assert 0.0 <= report.gini_recruitment <= 1.0
        assert 0.0 <= report.gini_computing <= 1.0

    def test_volunteers_and_projects_sorted(self, synth_snapshot):
        report = build_report(synth_snapshot, fast)
        volunteer_ids = [m.volunteer_id for m in report.volunteers]
        project_ids = [b.project_id for b in report.projects]
        assert volunteer_ids == sorted(volunteer_ids)
        assert project_ids == sorted(project_ids)


class TestSerialization:
    def test_report_dict_is_json_clean(self, synth_snapshot):
        doc = report_to_dict(build_report(synth_snapshot, fast))
        text = json.dumps(doc, sort_keys=True)
        assert "platform_regular" in text
        assert doc["metadata"]["observation_end"] == format_timestamp(
            synth_snapshot.observation_end
        )

    def test_percentages_rounded_and_summing(self, synth_snapshot):
        doc = report_to_dict(build_report(synth_snapshot, fast))
        platform = doc["platform"]["classes"]["platform"]
        assert sum(entry["percent"] for entry in platform.values()) == pytest.approx(100.0, abs=0.01)
        project = doc["platform"]["classes"]["project"]
        assert sum(entry["percent"] for entry in project.values()) == pytest.approx(100.0, abs=0.01)

    def test_write_report_deterministic(self, synth_snapshot, tmp_path):
        report = build_report(synth_snapshot, fast)
        first = write_report(report, tmp_path / "a")
        second = write_report(report, tmp_path / "b")
        assert set(first) == set(ARTIFACT_NAMES)
        for name in ARTIFACT_NAMES:
            assert first[name].read_bytes() == second[name].read_bytes()

    def test_json_report_round_trips(self, synth_snapshot, tmp_path):
        report = build_report(synth_snapshot, fast)
        paths = write_report(report, tmp_path)
        reread = json.loads(paths["report.json"].read_text(encoding="utf-8"))
        assert reread == report_to_dict(report)

    def test_volunteers_csv_has_row_per_volunteer(self, synth_snapshot, tmp_path):
        report = build_report(synth_snapshot, fast)
        paths = write_report(report, tmp_path)
        lines = paths["volunteers.csv"].read_text().splitlines()
        assert len(lines) == len(report.volunteers) + 1
        assert lines[0].startswith("volunteer_id,available_projects")

    def test_summary_mentions_key_numbers(self, synth_snapshot):
        report = build_report(synth_snapshot, fast)
        text = render_summary(report)
        assert f"volunteers          {report.distribution.total}" in text
        assert "platform_transient" in text
        assert "relative activity duration" in text


def run_cli(*argv):
    return main(list(argv))


@pytest.fixture(scope="module")
def event_csv(tmp_path_factory):
    events, _ = generate(SynthConfig(seed=33, volunteer_count=60, project_count=6))
    path = tmp_path_factory.mktemp("data") / "events.csv"
    write_events_csv(events, path)
    return path


class TestCli:
    def test_report_writes_artifacts(self, event_csv, tmp_path, capsys):
        out = tmp_path / "out"
        code = run_cli(
            "report",
            "--input", str(event_csv),
            "--bootstrap-resamples", "200",
            "--out", str(out),
        )
        assert code == 0
        for name in ARTIFACT_NAMES:
            assert (out / name).is_file()
        stdout = capsys.readouterr().out
        assert "wrote 7 artifacts" in stdout
        assert "volunteers          60" in stdout

    def test_metrics_writes_tables_but_no_plot_data(self, event_csv, tmp_path, capsys):
        out = tmp_path / "tables"
        code = run_cli(
            "metrics", "--input", str(event_csv), "--bootstrap-resamples", "100",
            "--out", str(out),
        )
        assert code == 0
        for name in TABLE_ARTIFACT_NAMES:
            assert (out / name).is_file()
        for name in PLOT_ARTIFACT_NAMES:
            assert not (out / name).exists()
        stdout = capsys.readouterr().out
        assert "gini recruitment" in stdout
        assert "wrote 4 artifacts" in stdout

    def test_ingest_normalizes_to_canonical_csv(self, event_csv, tmp_path, capsys):
        out = tmp_path / "normalized.csv"
        assert run_cli("ingest", "--input", str(event_csv), "--out", str(out)) == 0
        header = out.read_text().splitlines()[0]
        assert header == "volunteer_id,task_id,project_id,timestamp"

    def test_validate_ok(self, event_csv, capsys):
        assert run_cli("validate", "--input", str(event_csv)) == 0
        assert "ok:" in capsys.readouterr().out

    def test_validate_rejects_malformed(self, tmp_path, capsys):
        bad = tmp_path / "bad.csv"
        bad.write_text(
            "volunteer_id,task_id,project_id,timestamp\nu1,t1,p1,whenever\n",
            encoding="utf-8",
        )
        assert run_cli("validate", "--input", str(bad)) == 2
        assert "error:" in capsys.readouterr().err

    def test_synth_roundtrip(self, tmp_path, capsys):
        out = tmp_path / "synthdata"
        assert run_cli(
            "synth", "--seed", "4", "--volunteers", "40", "--projects", "5",
            "--out", str(out),
        ) == 0
        assert (out / "events.csv").is_file() and (out / "labels.csv").is_file()
        assert run_cli("validate", "--input", str(out / "events.csv")) == 0

    def test_exclude_project_shrinks_platform(self, event_csv, tmp_path, capsys):
        assert run_cli(
            "metrics", "--input", str(event_csv), "--bootstrap-resamples", "100",
            "--out", str(tmp_path / "full"),
        ) == 0
        full = capsys.readouterr().out
        assert run_cli(
            "metrics", "--input", str(event_csv), "--bootstrap-resamples", "100",
            "--exclude-project", "p0000",
            "--out", str(tmp_path / "trimmed"),
        ) == 0
        trimmed = capsys.readouterr().out
        assert "projects            6" in full
        assert "projects            5" in trimmed

    def test_registration_dates_shift_join_instants(self, event_csv, tmp_path, capsys):
        args = ("metrics", "--input", str(event_csv), "--bootstrap-resamples", "100")
        assert run_cli(*args, "--out", str(tmp_path / "plain")) == 0
        plain = json.loads((tmp_path / "plain" / "report.json").read_text())
        # pick someone whose activity span is a strict part of their tenure
        target = next(
            row for row in plain["volunteers"] if row["relative_activity_duration"] < 1.0
        )
        sidecar = tmp_path / "registrations.csv"
        sidecar.write_text(
            f"volunteer_id,registered_at\n{target['volunteer_id']},2012-01-01T00:00:00Z\n",
            encoding="utf-8",
        )
        assert run_cli(
            *args, "--registration-dates", str(sidecar), "--out", str(tmp_path / "shifted")
        ) == 0
        shifted = json.loads((tmp_path / "shifted" / "report.json").read_text())
        rows = {row["volunteer_id"]: row for row in shifted["volunteers"]}
        moved = rows.pop(target["volunteer_id"])
        # a longer tenure with the same activity span pushes the ratio toward 1
        assert moved["relative_activity_duration"] > target["relative_activity_duration"]
        untouched = [r for r in plain["volunteers"] if r["volunteer_id"] != target["volunteer_id"]]
        assert untouched == [rows[r["volunteer_id"]] for r in untouched]
        capsys.readouterr()

    def test_postdated_registration_is_data_error(self, event_csv, tmp_path, capsys):
        sidecar = tmp_path / "registrations.csv"
        sidecar.write_text(
            "volunteer_id,registered_at\nv000000,2030-01-01T00:00:00Z\n", encoding="utf-8"
        )
        code = run_cli(
            "metrics", "--input", str(event_csv), "--registration-dates", str(sidecar),
            "--bootstrap-resamples", "100", "--out", str(tmp_path / "out"),
        )
        assert code == 2
        assert "postdates" in capsys.readouterr().err

    def test_missing_file_is_data_error(self, tmp_path, capsys):
        assert run_cli("report", "--input", str(tmp_path / "ghost.csv"), "--out", str(tmp_path)) == 2
        assert "error:" in capsys.readouterr().err

    def test_usage_error_exits_one(self, event_csv):
        with pytest.raises(SystemExit) as err:
            run_cli("report", "--out", "somewhere")  # no source
        assert err.value.code == 1
        with pytest.raises(SystemExit) as err:
            run_cli("report", "--input", "x", "--api-url", "y", "--out", "z")
        assert err.value.code == 1
        with pytest.raises(SystemExit) as err:
            run_cli("metrics", "--input", "x", "--availability", "never")
        assert err.value.code == 1

    def test_bad_observation_end_is_usage_error(self, event_csv):
        with pytest.raises(SystemExit) as err:
            run_cli("metrics", "--input", str(event_csv), "--observation-end", "someday")
        assert err.value.code == 1

    def test_version_flag(self, capsys):
        with pytest.raises(SystemExit) as err:
            run_cli("--version")
        assert err.value.code == 0
        assert "crowdmetrics" in capsys.readouterr().out

    def test_observation_end_before_events_is_data_error(self, event_csv, tmp_path, capsys):
        code = run_cli(
            "metrics", "--input", str(event_csv),
            "--observation-end", "2000-01-01T00:00:00Z",
            "--out", str(tmp_path / "early"),
        )
        assert code == 2

    def test_csv_and_jsonl_routes_agree_byte_for_byte(self, tmp_path, capsys):
        events, _ = generate(SynthConfig(seed=55, volunteer_count=50, project_count=5))
        csv_path = tmp_path / "events.csv"
        write_events_csv(events, csv_path)
        jsonl_path = tmp_path / "events.jsonl"
        with jsonl_path.open("w", encoding="utf-8") as handle:
            for event in events:
                handle.write(json.dumps({
                    "user_id": event.volunteer_id,
                    "task_id": event.task_id,
                    "project_id": event.project_id,
                    "finish_time": format_timestamp(event.timestamp),
                }) + "\n")

        out_csv, out_jsonl = tmp_path / "from_csv", tmp_path / "from_jsonl"
        common = ["--bootstrap-resamples", "200", "--seed", "9"]
        assert run_cli("report", "--input", str(csv_path), *common, "--out", str(out_csv)) == 0
        assert run_cli(
            "report", "--input", str(jsonl_path), "--format", "jsonl", *common,
            "--out", str(out_jsonl),
        ) == 0
        for name in ARTIFACT_NAMES:
            assert (out_csv / name).read_bytes() == (out_jsonl / name).read_bytes()
