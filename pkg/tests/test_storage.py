"""Tests for output files and document formats."""

import json
import unittest
from fractions import Fraction
from pathlib import Path

import pytest


@pytest.mark.unit
class TestRationals(unittest.TestCase):
    """Test cases for rational formatting and parsing."""

    def test_format(self):
        """Test p/q output with and without the compact form."""
        from satake.storage import format_rational

        self.assertEqual(format_rational(Fraction(6, 4)), "3/2")
        self.assertEqual(format_rational(2), "2/1")
        self.assertEqual(format_rational(2, compact=True), "2")
        self.assertEqual(format_rational(Fraction(-1, 3), compact=True), "-1/3")

    def test_parse(self):
        """Test strings and integers are read exactly."""
        from satake.storage import parse_rational

        self.assertEqual(parse_rational("3/6"), Fraction(1, 2))
        self.assertEqual(parse_rational(" 4 "), 4)
        self.assertEqual(parse_rational(7), 7)

    def test_parse_rejects(self):
        """Test booleans, floats and garbage are refused."""
        from satake.errors import ValidationError
        from satake.storage import parse_rational

        for text in [True, 0.5, "abc", "1/0", None]:
            with self.subTest(text=text):
                with self.assertRaises(ValidationError):
                    parse_rational(text)

    def test_format_float_round_trips(self):
        """Test the shortest repr is used."""
        from satake.storage import format_float

        self.assertEqual(format_float(0.1), "0.1")
        self.assertEqual(float(format_float(1 / 3)), 1 / 3)


@pytest.mark.unit
class TestJsonable(unittest.TestCase):
    """Test cases for to_jsonable."""

    def test_exponent_triple(self):
        """Test triples carry a, b and the I labels."""
        from satake.storage import to_jsonable
        from satake.strata import ExponentTriple, StratumIndex

        triple = ExponentTriple(Fraction(6), 1, StratumIndex.of([0]))
        self.assertEqual(
            to_jsonable(triple), {"a": "6/1", "b": 1, "I": ["alpha_1"]}
        )
        self.assertEqual(to_jsonable(triple, compact=True)["a"], "6")

    def test_nested_values(self):
        """Test mappings, weights and sets convert recursively."""
        from satake.rootlat import Weight
        from satake.storage import to_jsonable

        data = {1: Weight((Fraction(1, 2), 3)), "s": {"b", "a"}, "x": (1, 2.5)}
        self.assertEqual(
            to_jsonable(data),
            {"1": ["1/2", "3/1"], "s": ["a", "b"], "x": [1, 2.5]},
        )


class TestFiles(unittest.TestCase):
    """Test cases for CSV and JSON files."""

    def setUp(self):
        """Set up test fixtures."""
        import tempfile

        self.temp_dir = Path(tempfile.mkdtemp())

    def tearDown(self):
        """Clean up test fixtures."""
        import shutil

        shutil.rmtree(self.temp_dir)

    def test_csv_format(self):
        """Test CRLF endings and cell rendering."""
        from satake.storage import write_csv

        path = write_csv(
            self.temp_dir / "out" / "t.csv",
            ["a", "b", "c", "d"],
            [[True, None, Fraction(1, 2), 0.25], ["x,y", 3, False, 1e20]],
        )
        raw = path.read_bytes()
        self.assertEqual(
            raw, b'a,b,c,d\r\ntrue,,1/2,0.25\r\n"x,y",3,false,1e+20\r\n'
        )

    def test_csv_row_width(self):
        """Test ragged rows are refused."""
        from satake.errors import ValidationError
        from satake.storage import write_csv

        with self.assertRaises(ValidationError):
            write_csv(self.temp_dir / "t.csv", ["a", "b"], [[1]])

    def test_json_sorted_with_newline(self):
        """Test keys are sorted and the file ends with a newline."""
        from satake.storage import read_json, write_json

        path = write_json(self.temp_dir / "d.json", {"b": 1, "a": Fraction(1, 3)})
        text = path.read_text(encoding="utf-8")
        self.assertTrue(text.endswith("}\n"))
        self.assertLess(text.index('"a"'), text.index('"b"'))
        self.assertEqual(read_json(path), {"a": "1/3", "b": 1})

    def test_read_json_errors(self):
        """Test missing and malformed files."""
        from satake.errors import ValidationError
        from satake.storage import read_json

        with self.assertRaises(ValidationError):
            read_json(self.temp_dir / "missing.json")
        bad = self.temp_dir / "bad.json"
        bad.write_text("{nope", encoding="utf-8")
        with self.assertRaises(ValidationError):
            read_json(bad)

    def test_exp_map_file(self):
        """Test an exponential map document loads from disk."""
        from satake.rootlat import Weight
        from satake.storage import load_exp_map

        path = self.temp_dir / "map.json"
        path.write_text(
            json.dumps(
                {
                    "terms": [
                        {"weight": ["1", "1"], "vector": [1.0, 0.0]},
                        {"weight": ["1", "0"], "vector": [0.0, 1.0]},
                    ],
                    "lead": 0,
                    "chi": ["2", "1"],
                }
            ),
            encoding="utf-8",
        )
        spec = load_exp_map(path)
        self.assertEqual(spec.rank, 2)
        self.assertEqual(spec.chi, Weight((2, 1)))

    def test_exp_map_written_and_reloaded(self):
        """Test an exponential map written as JSON loads back unchanged."""
        from satake.rootlat import Weight
        from satake.storage import exp_map_to_json, load_exp_map, write_json
        from satake.volasym import ExpMapSpec

        spec = ExpMapSpec(
            (
                (Weight((Fraction(3, 2), 1)), (1.0, 0.0)),
                (Weight((Fraction(1, 2), 0)), (0.25, 2.0)),
            ),
            0,
            Weight((2, Fraction(1, 3))),
        )
        doc = exp_map_to_json(spec)
        self.assertEqual(doc["chi"], ["2", "1/3"])
        path = write_json(self.temp_dir / "map.json", spec)
        self.assertEqual(load_exp_map(path), spec)

    def test_root_system_round_trip(self):
        """Test root systems survive a JSON file."""
        from satake.rootlat import build_root_system
        from satake.storage import read_json, root_system_from_json, write_json

        rs = build_root_system("B", 2, (1, 0))
        path = write_json(self.temp_dir / "rs.json", rs)
        self.assertEqual(root_system_from_json(read_json(path)), rs)


if __name__ == "__main__":
    unittest.main()
