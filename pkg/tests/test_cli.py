"""CLI subcommands, config validation, exit codes, determinism."""

import hashlib
import json
from pathlib import Path

import pytest

from postsched.cli import main, parse_config
from postsched.errors import ConfigError

MONDAY = 1420416000


def run(args):
    return main([str(a) for a in args])


def write_config(path, **kv):
    lines = [f"{k}={v}" for k, v in kv.items()]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def synth_config(tmp_path, **extra):
    out = tmp_path / "run"
    kv = dict(
        out=out,
        seed=5,
        synth_authors=3,
        synth_followers=4,
        synth_span_days=21,
        synth_follower_peak_rate=1.0,
        synth_follower_base_rate=0.002,
        synth_author_base_rate=0.4,
        synth_reaction_probability=0.9,
        derivation_days=14,
        evaluation_days=7,
        ranks=4,
        sample_budget=200,
    )
    kv.update(extra)
    return write_config(tmp_path / "base.config", **kv), out


def digest_dir(out):
    digests = {}
    for p in sorted(Path(out).glob("*")):
        if p.is_file():
            digests[p.name] = hashlib.sha256(p.read_bytes()).hexdigest()
    return digests


class TestConfigParsing:
    def test_unknown_key_rejected(self, tmp_path):
        cfg = write_config(tmp_path / "c", posts="x.tsv", bogus_key=1)
        with pytest.raises(ConfigError, match="bogus_key"):
            parse_config(cfg)

    def test_bad_type_names_field(self, tmp_path):
        cfg = write_config(tmp_path / "c", ranks="many")
        with pytest.raises(ConfigError, match="ranks"):
            parse_config(cfg)

    def test_iso_dates_accepted(self, tmp_path):
        cfg = parse_config(write_config(tmp_path / "c",
                                        derivation_start="2015-01-05"))
        assert cfg.derivation_start == MONDAY

    def test_overlapping_windows_name_both_fields(self, tmp_path):
        cfg = write_config(tmp_path / "c",
                           derivation_start=MONDAY, derivation_days=63,
                           evaluation_start=MONDAY + 86400,
                           evaluation_days=7)
        with pytest.raises(ConfigError) as exc:
            parse_config(cfg)
        assert "derivation_start" in str(exc.value)
        assert "evaluation_start" in str(exc.value)

    def test_comments_and_blanks(self, tmp_path):
        p = tmp_path / "c"
        p.write_text("# comment\n\nseed=9\n", encoding="utf-8")
        assert parse_config(p).seed == 9

    def test_evaluation_defaults_to_adjacent_window(self, tmp_path):
        cfg = parse_config(write_config(tmp_path / "c",
                                        derivation_start=MONDAY,
                                        derivation_days=63))
        assert cfg.evaluation_window.start == MONDAY + 63 * 86400
        assert not cfg.evaluation_window.overlaps(cfg.derivation_window)


class TestExitCodes:
    def test_bad_config_returns_one(self, tmp_path, capsys):
        cfg = write_config(tmp_path / "c", network="ZZ")
        assert run(["ptr", "--config", cfg]) == 1
        assert "network" in capsys.readouterr().err

    def test_missing_input_file_names_field(self, tmp_path, capsys):
        cfg = write_config(tmp_path / "c", posts="nope.tsv",
                           reactions="nope2.tsv", out=tmp_path / "o")
        assert run(["ptr", "--config", cfg]) == 1
        assert "posts" in capsys.readouterr().err

    def test_missing_upstream_artifact_returns_two(self, tmp_path, capsys):
        cfg, out = synth_config(tmp_path)
        assert run(["synth", "--config", cfg]) == 0
        assert run(["evaluate", "--config", out / "synth.config"]) == 2
        assert "schedule" in capsys.readouterr().err

    def test_empty_evaluation_window_diagnostic(self, tmp_path, capsys):
        cfg, out = synth_config(tmp_path)
        assert run(["synth", "--config", cfg]) == 0
        assert run(["schedule", "--config", out / "synth.config"]) == 0
        # An evaluation window far beyond the synthetic span has no posts.
        kv = {line.split("=")[0]: line.split("=", 1)[1]
              for line in (out / "synth.config").read_text().splitlines()}
        kv["evaluation_start"] = MONDAY + 10 * 365 * 86400
        far = write_config(tmp_path / "far.config", **kv)
        assert run(["evaluate", "--config", far]) == 2
        assert "evaluation" in capsys.readouterr().err
        assert not (out / "gain_by_rank.csv").exists()


class TestSynthStage:
    def test_writes_canonical_files_and_config(self, tmp_path):
        cfg, out = synth_config(tmp_path)
        assert run(["synth", "--config", cfg]) == 0
        for name in ("posts.tsv", "reactions.tsv", "edges.tsv", "users.tsv",
                     "truth.tsv", "synth.config", "manifest.json"):
            assert (out / name).exists(), name

    def test_delta_kernel_ptr_roundtrip(self, tmp_path):
        cfg, out = synth_config(tmp_path, synth_kernel="delta:0")
        assert run(["synth", "--config", cfg]) == 0
        assert run(["ptr", "--config", out / "synth.config"]) == 0
        lines = (out / "delay_kernel.tsv").read_text().strip().split("\n")
        rows = [l.split("\t") for l in lines if not l.startswith("#")]
        assert float(rows[0][1]) == 1.0
        assert all(float(r[1]) == 0.0 for r in rows[1:])


class TestFullChain:
    def test_all_runs_and_is_deterministic(self, tmp_path):
        cfg, out = synth_config(tmp_path)
        assert run(["synth", "--config", cfg]) == 0
        assert run(["all", "--config", out / "synth.config"]) == 0
        for name in ("ingest_report.json", "delay_kernel.tsv",
                     "cumulative_curve.csv", "delay_quantiles.tsv",
                     "schedules.tsv", "baselines.tsv", "recommended.tsv",
                     "ranked_times.tsv", "gain_report.tsv", "gain_by_rank.csv",
                     "cohort_series.csv", "metric_distributions.csv",
                     "manifest.json"):
            assert (out / name).exists(), name
        first = digest_dir(out)
        assert run(["all", "--config", out / "synth.config"]) == 0
        assert digest_dir(out) == first

    def test_manifest_lists_inputs_and_outputs(self, tmp_path):
        cfg, out = synth_config(tmp_path)
        assert run(["synth", "--config", cfg]) == 0
        assert run(["all", "--config", out / "synth.config"]) == 0
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["subcommand"] == "all"
        assert any(p.endswith("posts.tsv") for p in manifest["inputs"])
        assert any(p.endswith("gain_report.tsv") for p in manifest["outputs"])
        assert manifest["parameters"]["seed"] == 5

    def test_rerun_from_manifest_parameters_reproduces_digests(self, tmp_path):
        from postsched.cli import RunConfig, _run

        cfg, out = synth_config(tmp_path)
        assert run(["synth", "--config", cfg]) == 0
        assert run(["all", "--config", out / "synth.config"]) == 0
        manifest = json.loads((out / "manifest.json").read_text())
        before = digest_dir(out)
        rebuilt = RunConfig(**manifest["parameters"])
        _run("all", rebuilt)
        assert digest_dir(out) == before

    def test_gain_report_shape(self, tmp_path):
        cfg, out = synth_config(tmp_path)
        assert run(["synth", "--config", cfg]) == 0
        assert run(["all", "--config", out / "synth.config"]) == 0
        lines = (out / "gain_by_rank.csv").read_text().strip().split("\n")
        header, rows = lines[0], lines[1:]
        assert header == "schedule,rank,rg_avg,users,posts"
        schedules = {r.split(",")[0] for r in rows}
        assert {"S1", "S2", "S1w", "S2w", "MFU", "AFD"} <= schedules
        for sched in schedules:
            assert sum(1 for r in rows if r.startswith(sched + ",")) == 4

    def test_cumulative_curve_ends_at_one(self, tmp_path):
        cfg, out = synth_config(tmp_path)
        assert run(["synth", "--config", cfg]) == 0
        assert run(["ptr", "--config", out / "synth.config"]) == 0
        last = (out / "cumulative_curve.csv").read_text().strip().split("\n")[-1]
        assert float(last.split(",")[-1]) == pytest.approx(1.0, abs=1e-9)

    def test_seed_flag_overrides_config(self, tmp_path):
        cfg, out = synth_config(tmp_path)
        assert run(["synth", "--config", cfg]) == 0
        posts_a = (out / "posts.tsv").read_bytes()
        assert run(["synth", "--config", cfg, "--seed", "99"]) == 0
        assert (out / "posts.tsv").read_bytes() != posts_a
