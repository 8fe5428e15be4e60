import numpy as np
import pytest

from feature_exporter import ExportJob, export
from feature_exporter.cli import main as cli_main
from feature_exporter.errors import UnknownKind
from feature_exporter.export import job_from_dir


class TestJob:
    def test_unknown_kind_rejected(self, clips, tmp_path):
        with pytest.raises(UnknownKind):
            ExportJob([clips / "tone.wav"], "spectrogram", tmp_path)

    def test_manifest_lists_every_input_once(self, clips, tmp_path):
        job = job_from_dir(clips, "mfcc", tmp_path / "out")
        rows = export(job)
        assert len(rows) == 3
        assert sorted(r.path for r in rows) == sorted(str(p) for p in job.audio_paths)
        assert all(r.status == "ok" for r in rows)
        manifest = (tmp_path / "out" / "manifest.tsv").read_text().splitlines()
        assert manifest[0] == "path\tstatus\tframes"
        assert len(manifest) == 4

    def test_bad_file_recorded_and_job_continues(self, clips, tmp_path):
        bad = tmp_path / "broken.wav"
        bad.write_bytes(b"nope")
        job = ExportJob([clips / "tone.wav", bad], "mfcc", tmp_path / "out")
        rows = export(job)
        by_path = {r.path: r for r in rows}
        assert by_path[str(bad)].status == "AudioDecodeError"
        assert by_path[str(clips / "tone.wav")].status == "ok"
        assert not (tmp_path / "out" / "broken.mfcc.afm").exists()

    def test_ssl_without_model_records_modelloaderror(self, clips, tmp_path, monkeypatch):
        # point at a nonexistent local dir so no hub access is attempted
        job = ExportJob([clips / "tone.wav"], "ssl", tmp_path / "out",
                        model_dir=str(tmp_path / "nomodel"))
        rows = export(job)
        assert rows[0].status == "ModelLoadError"

    def test_no_tmp_files_left_behind(self, clips, tmp_path):
        export(job_from_dir(clips, "mcep", tmp_path / "out"))
        assert not list((tmp_path / "out").glob("*.tmp"))

    def test_same_file_exported_twice_identical_bytes(self, clips, tmp_path):
        export(ExportJob([clips / "chirp.wav"], "mfcc", tmp_path / "a"))
        export(ExportJob([clips / "chirp.wav"], "mfcc", tmp_path / "b"))
        assert (tmp_path / "a" / "chirp.mfcc.afm").read_bytes() == \
               (tmp_path / "b" / "chirp.mfcc.afm").read_bytes()


class TestCli:
    def test_export_cli_runs(self, clips, tmp_path):
        assert cli_main(["--kind", "mfcc", "--audio-dir", str(clips),
                         "--out", str(tmp_path / "out")]) == 0
        assert (tmp_path / "out" / "manifest.tsv").exists()

    def test_bad_kind_exits_two(self, clips, tmp_path):
        with pytest.raises(SystemExit) as exc:
            cli_main(["--kind", "nope", "--audio-dir", str(clips),
                      "--out", str(tmp_path)])
        assert exc.value.code == 2

    def test_missing_dir_exits_two(self, tmp_path):
        assert cli_main(["--kind", "mfcc", "--audio-dir", str(tmp_path / "none"),
                         "--out", str(tmp_path / "out")]) == 2

    def test_all_failures_exit_one(self, tmp_path):
        d = tmp_path / "bad"
        d.mkdir()
        (d / "junk.wav").write_bytes(b"xx")
        assert cli_main(["--kind", "mfcc", "--audio-dir", str(d),
                         "--out", str(tmp_path / "out")]) == 1
