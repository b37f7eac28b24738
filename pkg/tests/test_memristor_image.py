import io

import numpy as np
import pytest

from src.digest_schedule import CellSelector
from src.errors import ImageFormatError, ImageIoError, ImageValueError
from src.memristor_image import (
    MemristorImage,
    generate_image,
    load_image,
    load_image_file,
    read_cell,
    save_image,
    splitmix64,
)

MASK = (1 << 64) - 1


def reference_splitmix64(seed: int, index: int) -> int:
    z = (seed + (index + 1) * 0x9E3779B97F4A7C15) & MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK
    return z ^ (z >> 31)


def reference_cell(seed: int, address: int, current: int) -> float:
    u = reference_splitmix64(seed, 8 * address + current)
    return 100.0 + 900.0 * ((u >> 11) * 2.0 ** -53)


def test_splitmix64_published_first_output():
    assert int(splitmix64(0, 1)[0]) == 0xE220A8397B1DCDAF


@pytest.mark.parametrize("seed", [0, 1, 0x0123456789ABCDEF, MASK])
def test_splitmix64_matches_reference(seed):
    draws = splitmix64(seed, 1024)
    for i in (0, 1, 511, 1023):
        assert int(draws[i]) == reference_splitmix64(seed, i)


def test_seed_zero_first_cell():
    image = generate_image(0)
    expected = 100.0 + 900.0 * ((0xE220A8397B1DCDAF >> 11) * 2.0 ** -53)
    assert image.cells[0, 0] == expected


@pytest.mark.parametrize("seed", [0, 42, MASK])
def test_cells_match_reference(seed):
    image = generate_image(seed)
    for address, current in [(0, 0), (0, 7), (64, 3), (127, 7)]:
        assert image.cells[address, current] == reference_cell(seed, address, current)


def test_cells_in_range():
    cells = generate_image(123).cells
    assert cells.shape == (128, 8)
    assert np.all(cells >= 100.0) and np.all(cells < 1000.0)


def test_generation_is_deterministic():
    assert generate_image(99) == generate_image(99)


def test_distinct_seeds_give_distinct_tables():
    for seed in range(100):
        assert generate_image(seed) != generate_image(seed + 1000)


def test_image_is_immutable(image):
    with pytest.raises(ValueError):
        image.cells[0, 0] = 1.0


def test_read_cell(image):
    assert read_cell(image, CellSelector(0, 0, 0)) == image.cells[0, 0]
    assert read_cell(image, CellSelector(127, 7, 0)) == image.cells[127, 7]
    assert read_cell(image, CellSelector(5, 3, 0)) == read_cell(image, CellSelector(5, 3, 99))


def test_read_cell_repeatable(image):
    sel = CellSelector(77, 2, 5)
    before = image.cells.copy()
    assert read_cell(image, sel) == read_cell(image, sel)
    assert np.array_equal(before, image.cells)


def test_save_load_round_trip_bitwise():
    image = generate_image(2024)
    buf = io.BytesIO()
    size = save_image(image, buf)
    assert size == len(buf.getvalue())
    loaded = load_image(io.BytesIO(buf.getvalue()))
    assert loaded.cells.tobytes() == image.cells.tobytes()


def test_saved_format(image):
    buf = io.BytesIO()
    save_image(image, buf)
    lines = buf.getvalue().decode("utf-8").splitlines()
    data = [line for line in lines if not line.startswith("#")]
    assert len(data) == 128
    assert all(len(line.split(",")) == 8 for line in data)
    assert lines[0].startswith("#")


def _text(image, skip_rows=0) -> bytes:
    buf = io.BytesIO()
    save_image(image, buf)
    lines = buf.getvalue().decode("utf-8").splitlines()
    return ("\n".join(lines[:len(lines) - skip_rows]) + "\n").encode("utf-8")


def test_comments_ignored(image):
    text = b"# extra metadata\n# more\n" + _text(image)
    assert load_image(io.BytesIO(text)) == image


def test_missing_row_rejected(image):
    with pytest.raises(ImageFormatError):
        load_image(io.BytesIO(_text(image, skip_rows=1)))


def test_wrong_column_count_rejected(image):
    lines = _text(image).decode("utf-8").splitlines()
    lines[-1] = lines[-1] + ",500.0"
    with pytest.raises(ImageFormatError):
        load_image(io.BytesIO("\n".join(lines).encode("utf-8")))


@pytest.mark.parametrize("bad", ["-5.0", "0.0", "nan", "inf"])
def test_bad_value_rejected(image, bad):
    lines = _text(image).decode("utf-8").splitlines()
    fields = lines[-1].split(",")
    fields[3] = bad
    lines[-1] = ",".join(fields)
    with pytest.raises(ImageValueError):
        load_image(io.BytesIO("\n".join(lines).encode("utf-8")))


def test_unparsable_value_rejected(image):
    lines = _text(image).decode("utf-8").splitlines()
    lines[-1] = lines[-1].replace(",", ",ohm", 1)
    with pytest.raises(ImageFormatError):
        load_image(io.BytesIO("\n".join(lines).encode("utf-8")))


def test_non_utf8_rejected():
    with pytest.raises(ImageIoError):
        load_image(io.BytesIO(b"\xff\xfe\x00"))


def test_constructor_validates_shape_and_values():
    with pytest.raises(ImageFormatError):
        MemristorImage(np.ones((127, 8)))
    cells = np.ones((128, 8))
    cells[3, 3] = -1.0
    with pytest.raises(ImageValueError):
        MemristorImage(cells)


def test_load_image_file_records_path(tmp_path, image):
    path = tmp_path / "lut.csv"
    with open(path, "wb") as f:
        save_image(image, f)
    loaded = load_image_file(path)
    assert loaded.source == str(path)
    assert loaded == image


def test_source_is_read_only(image):
    with pytest.raises(AttributeError):
        image.source = "elsewhere"


def test_load_image_name():
    buf = io.BytesIO()
    save_image(generate_image(5), buf)
    assert load_image(io.BytesIO(buf.getvalue()), name="bench").source == "bench"
