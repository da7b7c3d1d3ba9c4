import numpy as np
import pytest

from conftest import write_snapshot
from pfcviz import cli
from pfcviz.render import SnapshotFormatError, SnapshotHandle, render_contour_overlay, render_costs, render_field


class TestSnapshotHandle:
    def test_header_parsed_lazily(self, wave_snapshot):
        snap = SnapshotHandle(wave_snapshot)
        assert snap.N == 24
        assert snap.L == pytest.approx(2 * np.pi)
        assert snap.t == 1.5
        assert snap._values is None
        assert snap.values.shape == (24, 24)

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "bad.bin"
        path.write_bytes(b"WRONGMAG" + b"\x00" * 48)
        with pytest.raises(SnapshotFormatError, match="magic"):
            SnapshotHandle(path)

    def test_truncated_payload(self, tmp_path):
        path = write_snapshot(tmp_path / "short.bin", np.zeros((8, 8)))
        path.write_bytes(path.read_bytes()[:-24])
        with pytest.raises(SnapshotFormatError, match="expected"):
            _ = SnapshotHandle(path).values


class TestRenderField:
    def test_heatmap_written(self, wave_snapshot, tmp_path):
        out = render_field(wave_snapshot, tmp_path / "f.png", style="heatmap")
        assert out.exists() and out.stat().st_size > 0

    def test_constant_field_heatmap(self, tmp_path):
        snap = write_snapshot(tmp_path / "c.bin", np.full((8, 8), 0.7))
        out = render_field(snap, tmp_path / "c.png")
        assert out.exists()

    def test_zero_level_contour_on_sign_change(self, wave_snapshot, tmp_path):
        out = render_field(wave_snapshot, tmp_path / "z.png", style="contour", level=0.0)
        assert out.exists() and out.stat().st_size > 0

    def test_bad_style_rejected(self, wave_snapshot, tmp_path):
        with pytest.raises(ValueError, match="style"):
            render_field(wave_snapshot, tmp_path / "x.png", style="surface")

    def test_byte_stable(self, wave_snapshot, tmp_path):
        a = render_field(wave_snapshot, tmp_path / "a.png", style="heatmap")
        b = render_field(wave_snapshot, tmp_path / "b.png", style="heatmap")
        assert a.read_bytes() == b.read_bytes()

    def test_input_not_mutated(self, wave_snapshot, tmp_path):
        before = wave_snapshot.read_bytes()
        render_field(wave_snapshot, tmp_path / "f.png")
        assert wave_snapshot.read_bytes() == before


class TestOverlay:
    def test_two_run_comparison(self, tmp_path):
        n = 24
        x = np.linspace(0, 2 * np.pi, n, endpoint=False)
        base = np.cos(x)[:, None] * np.cos(x)[None, :] - 0.01
        s1 = write_snapshot(tmp_path / "r1.bin", base, L=2 * np.pi, t=18.0)
        s2 = write_snapshot(tmp_path / "r2.bin", np.roll(base, 1, axis=0),
                            L=2 * np.pi, t=18.0)
        out = render_contour_overlay([s1, s2], tmp_path / "cmp.png", level=-0.01,
                                     labels=["tight", "loose"])
        assert out.exists() and out.stat().st_size > 0

    def test_empty_list_rejected(self, tmp_path):
        with pytest.raises(ValueError, match="at least one"):
            render_contour_overlay([], tmp_path / "x.png")


class TestRenderCosts:
    def test_three_panels(self, cost_csv, tmp_path):
        outs = render_costs(cost_csv, tmp_path / "charts")
        assert len(outs) == 3
        names = sorted(p.name for p in outs)
        assert names == ["cost_clock.png", "cost_cpu.png", "cost_fft.png"]
        assert all(p.stat().st_size > 0 for p in outs)

    def test_single_row(self, tmp_path):
        path = tmp_path / "one.csv"
        path.write_text(
            "Prob,Scheme,Step tol.,Point value,Obj. err.,FFT,Clock (sec),CPU (sec)\n"
            "fch1,mp,0.001,0.25,1e-06,1200,10.5,9.8\n")
        outs = render_costs(path, tmp_path / "charts")
        assert len(outs) == 3

    def test_missing_column_is_schema_error(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("Prob,Scheme,FFT\nfch1,mp,12\n")
        with pytest.raises(ValueError, match="missing columns"):
            render_costs(path, tmp_path / "charts")

    def test_empty_table_rejected(self, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text(
            "Prob,Scheme,Step tol.,Point value,Obj. err.,FFT,Clock (sec),CPU (sec)\n")
        with pytest.raises(ValueError, match="no data"):
            render_costs(path, tmp_path / "charts")

    def test_byte_stable(self, cost_csv, tmp_path):
        a = render_costs(cost_csv, tmp_path / "a")
        b = render_costs(cost_csv, tmp_path / "b")
        for pa, pb in zip(a, b):
            assert pa.read_bytes() == pb.read_bytes()


class TestCli:
    def test_field_command(self, wave_snapshot, tmp_path):
        out = tmp_path / "f.png"
        assert cli.main(["field", str(wave_snapshot), "--out", str(out)]) == 0
        assert out.exists()

    def test_costs_command(self, cost_csv, tmp_path):
        assert cli.main(["costs", str(cost_csv), "--outdir", str(tmp_path / "c")]) == 0

    def test_malformed_snapshot_diagnostic(self, tmp_path, capsys):
        bad = tmp_path / "bad.bin"
        bad.write_bytes(b"garbage")
        rc = cli.main(["field", str(bad), "--out", str(tmp_path / "x.png")])
        assert rc == 1
        assert "error:" in capsys.readouterr().err
