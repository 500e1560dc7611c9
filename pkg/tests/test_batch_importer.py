from main_logic.batch_importer import BatchImporter
from main_logic.skies import Event


def test_generate_template_into_directory(tmp_path):
    importer = BatchImporter(str(tmp_path / "template"))
    path = importer.generate_pairs_template()
    assert path.endswith("pairs_template.txt")
    result = importer.import_pairs(path)
    assert result["success"] == 3
    assert result["failed"] == 0
    assert [line for line, _, _ in result["pairs"]] == [2, 3, 4]


def test_generate_template_to_explicit_path(tmp_path):
    target = tmp_path / "pairs.txt"
    assert BatchImporter(str(tmp_path)).generate_pairs_template(str(target)) == str(target)
    assert target.read_text(encoding="utf-8").startswith("#")


def test_import_skips_comments_and_reports_bad_lines(tmp_path):
    source = tmp_path / "pairs.txt"
    source.write_text(
        "# header\n"
        "\n"
        "0,0,0;0,0,1\n"
        "0,0,0;1,1\n"
        "   \n"
        "a,b,c;0,0,1\n"
        "1,2,3 ; 4,5,6\n",
        encoding="utf-8",
    )
    result = BatchImporter(str(tmp_path)).import_pairs(str(source))
    assert result["success"] == 2
    assert result["failed"] == 2
    assert [record["line"] for record in result["failed_records"]] == [4, 6]
    assert result["failed_records"][0]["row"] == "0,0,0;1,1"
    line, x, y = result["pairs"][1]
    assert line == 7
    assert x == Event((1.0, 2.0), 3.0)
    assert y == Event((4.0, 5.0), 6.0)


def test_import_handles_bom(tmp_path):
    source = tmp_path / "bom.txt"
    source.write_bytes("\ufeff0,0,0;3,0,1\r\n0,0,0;0.5,0,1\r\n".encode("utf-8"))
    result = BatchImporter(str(tmp_path)).import_pairs(str(source))
    assert result["success"] == 2
    assert result["pairs"][0][2] == Event((3.0, 0.0), 1.0)


def test_import_missing_file(tmp_path):
    result = BatchImporter(str(tmp_path)).import_pairs(str(tmp_path / "missing.txt"))
    assert result["success"] == 0
    assert result["pairs"] == []
    assert "error" in result
