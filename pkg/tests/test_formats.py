import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rsmix import formats, mixing
from rsmix.errors import FormatError
from rsmix.mixing import MixParams, mix_pair, normalize_unit_sphere


def cloud(seed, n=64):
    rng = np.random.default_rng(seed)
    # round-trip through float32 so on-disk precision is already exact
    return rng.standard_normal((n, 3)).astype(np.float32).astype(np.float64)


class TestXyz:
    def test_round_trip_exact_for_float32_values(self, tmp_path):
        pts = cloud(0)
        path = tmp_path / "a.xyz"
        formats.write_xyz(path, pts)
        back = formats.read_xyz(path)
        assert back.astype(np.float32).tobytes() == pts.astype(np.float32).tobytes()

    def test_round_trip_tolerance_for_float64(self, tmp_path):
        pts = np.random.default_rng(1).standard_normal((128, 3))
        path = tmp_path / "b.xyz"
        formats.write_xyz(path, pts)
        back = formats.read_xyz(path)
        assert np.abs(back - pts).max() < 1e-6

    def test_empty_file_rejected(self, tmp_path):
        path = tmp_path / "empty.xyz"
        path.write_text("")
        with pytest.raises(FormatError, match="empty input"):
            formats.read_xyz(path)

    def test_short_row_rejected(self, tmp_path):
        path = tmp_path / "bad.xyz"
        path.write_text("1 2 3\n4 5\n")
        with pytest.raises(FormatError, match="line 2"):
            formats.read_xyz(path)


class TestPly:
    def test_binary_round_trip_bitwise(self, tmp_path):
        pts = cloud(2, 1024)
        path = tmp_path / "c.ply"
        formats.write_ply(path, pts, binary=True)
        back = formats.read_ply(path)
        assert back.tobytes() == pts.tobytes()
        # and the file itself round-trips byte for byte
        path2 = tmp_path / "c2.ply"
        formats.write_ply(path2, back, binary=True)
        assert path.read_bytes() == path2.read_bytes()

    def test_ascii_round_trip(self, tmp_path):
        pts = cloud(3)
        path = tmp_path / "d.ply"
        formats.write_ply(path, pts, binary=False)
        back = formats.read_ply(path)
        assert np.abs(back - pts).max() < 1e-6

    def test_vertex_colors_ignored_geometry_kept(self, tmp_path):
        pts = cloud(4, 16).astype(np.float32)
        lines = [
            "ply", "format ascii 1.0", "element vertex 16",
            "property float x", "property float y", "property float z",
            "property uchar red", "property uchar green", "property uchar blue",
            "end_header",
        ]
        for i, (x, y, z) in enumerate(pts):
            lines.append(f"{x} {y} {z} {i % 256} 0 255")
        path = tmp_path / "e.ply"
        path.write_text("\n".join(lines) + "\n")
        back = formats.read_ply(path)
        assert np.array_equal(back.astype(np.float32), pts)

    def test_binary_with_extra_properties(self, tmp_path):
        import struct

        pts = cloud(5, 8).astype(np.float32)
        header = (
            "ply\nformat binary_little_endian 1.0\nelement vertex 8\n"
            "property float x\nproperty float y\nproperty float z\n"
            "property uchar red\nproperty uchar green\nproperty uchar blue\n"
            "end_header\n"
        )
        body = b"".join(
            struct.pack("<fffBBB", *p, 10, 20, 30) for p in pts.tolist()
        )
        path = tmp_path / "f.ply"
        path.write_bytes(header.encode() + body)
        back = formats.read_ply(path)
        assert np.array_equal(back.astype(np.float32), pts)

    def test_truncated_binary(self, tmp_path):
        pts = cloud(6, 32)
        path = tmp_path / "g.ply"
        formats.write_ply(path, pts, binary=True)
        data = path.read_bytes()
        path.write_bytes(data[:-10])
        with pytest.raises(FormatError, match="truncated"):
            formats.read_ply(path)

    def test_not_a_ply(self, tmp_path):
        path = tmp_path / "h.ply"
        path.write_bytes(b"OFF\n3 0 0\n")
        with pytest.raises(FormatError, match="not a PLY"):
            formats.read_ply(path)


class TestColoredExport:
    def _mix(self, seed, mode="knn", apply_prob=1.0):
        a = normalize_unit_sphere(np.random.default_rng(seed).standard_normal((1024, 3)))
        b = normalize_unit_sphere(np.random.default_rng(seed + 1).standard_normal((1024, 3)))
        params = MixParams(neighbor_mode=mode, apply_prob=apply_prob)
        return mix_pair(a, np.eye(4)[0], b, np.eye(4)[1], params, np.random.default_rng(seed))

    def test_passthrough_single_color(self, tmp_path):
        res = self._mix(7, apply_prob=0.0)
        path = tmp_path / "skip.ply"
        formats.export_colored_ply(res, path)
        body = path.read_text().split("end_header\n")[1].strip().splitlines()
        colors = {tuple(line.split()[3:6]) for line in body}
        assert len(colors) == 1

    def test_partner_vertex_count_matches_subset(self, tmp_path):
        res = self._mix(8)
        path = tmp_path / "mix.ply"
        formats.export_colored_ply(res, path)
        body = path.read_text().split("end_header\n")[1].strip().splitlines()
        assert len(body) == res.mixed.shape[0]
        partner_rows = [l for l in body if tuple(map(int, l.split()[3:6])) != (148, 103, 189)]
        assert len(partner_rows) == int((res.provenance == mixing.FROM_PARTNER).sum())

    def test_reparse_geometry(self, tmp_path):
        res = self._mix(9)
        path = tmp_path / "reload.ply"
        formats.export_colored_ply(res, path)
        back = formats.read_ply(path)
        assert np.abs(back - res.mixed).max() < 1e-6

    def test_exact_partner_color_count(self, tmp_path):
        # a knn-style result with exactly 100 inserted points out of 1024
        rng = np.random.default_rng(10)
        mixed = rng.standard_normal((1024, 3))
        provenance = np.zeros(1024, dtype=np.uint8)
        provenance[-100:] = mixing.FROM_PARTNER
        res = mixing.MixResult(
            mixed=mixed,
            lam=100 / 1024,
            label=np.eye(2)[0],
            provenance=provenance,
            source_index=np.arange(1024),
            applied=True,
            k=100,
        )
        path = tmp_path / "k100.ply"
        formats.export_colored_ply(res, path)
        body = path.read_text().split("end_header\n")[1].strip().splitlines()
        partner_rows = [l for l in body if tuple(map(int, l.split()[3:6])) == (255, 187, 0)]
        assert len(partner_rows) == 100


class TestBatch:
    def test_round_trip_bitwise(self, tmp_path):
        rng = np.random.default_rng(10)
        clouds = rng.standard_normal((10, 64, 3))
        labels = rng.random((10, 7))
        labels /= labels.sum(axis=1, keepdims=True)
        lams = rng.random(10)
        path = tmp_path / "batch.rsmx"
        formats.write_batch(path, clouds, labels, lams)
        back = formats.read_batch(path)
        assert back.clouds.astype(np.float32).tobytes() == clouds.astype(np.float32).tobytes()
        assert back.labels.astype(np.float32).tobytes() == labels.astype(np.float32).tobytes()
        assert back.lams.astype(np.float32).tobytes() == lams.astype(np.float32).tobytes()
        # file-level round trip
        path2 = tmp_path / "batch2.rsmx"
        formats.write_batch(path2, back.clouds, back.labels, back.lams)
        assert path.read_bytes() == path2.read_bytes()

    def test_header_layout(self, tmp_path):
        path = tmp_path / "one.rsmx"
        formats.write_batch(path, np.zeros((2, 5, 3)), np.zeros((2, 3)), np.zeros(2))
        data = path.read_bytes()
        assert data[:5] == b"RSMX1"
        assert len(data) == 5 + 12 + 2 * (5 * 3 + 3 + 1) * 4

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "bad.rsmx"
        path.write_bytes(b"XXXXX" + b"\x00" * 40)
        with pytest.raises(FormatError, match="bad magic"):
            formats.read_batch(path)

    def test_truncated(self, tmp_path):
        path = tmp_path / "trunc.rsmx"
        formats.write_batch(path, np.zeros((2, 5, 3)), np.zeros((2, 3)), np.zeros(2))
        path.write_bytes(path.read_bytes()[:-4])
        with pytest.raises(FormatError, match="inconsistent counts"):
            formats.read_batch(path)

    def test_lambda_out_of_range_rejected_on_write(self, tmp_path):
        with pytest.raises(ValueError, match=r"\[0, 1\]"):
            formats.write_batch(
                tmp_path / "x.rsmx", np.zeros((1, 4, 3)), np.zeros((1, 2)), np.array([1.5])
            )


class TestLabelsCsv:
    def test_basic(self, tmp_path):
        path = tmp_path / "labels.csv"
        path.write_text("a.xyz,3\nb.xyz,0\n")
        assert formats.read_labels_csv(path) == {"a.xyz": 3, "b.xyz": 0}

    def test_duplicate_rejected(self, tmp_path):
        path = tmp_path / "labels.csv"
        path.write_text("a.xyz,3\na.xyz,1\n")
        with pytest.raises(FormatError, match="duplicate"):
            formats.read_labels_csv(path)

    def test_bad_class(self, tmp_path):
        path = tmp_path / "labels.csv"
        path.write_text("a.xyz,chair\n")
        with pytest.raises(FormatError, match="bad class"):
            formats.read_labels_csv(path)


@settings(deadline=None, max_examples=80)
@given(blob=st.binary(min_size=0, max_size=400))
def test_parsers_fail_closed_on_garbage(blob):
    # parsers may reject garbage but must only ever raise FormatError
    import tempfile
    from pathlib import Path

    with tempfile.TemporaryDirectory() as tmp:
        path = Path(tmp) / "fuzz.bin"
        path.write_bytes(blob)
        for reader in (formats.read_batch, formats.read_ply, formats.read_xyz):
            try:
                reader(path)
            except FormatError:
                pass
