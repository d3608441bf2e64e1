"""
Tests for the command-line interface and its exit codes.
"""
import io
import json
import os
import shutil
import tempfile
import unittest
import xml.etree.ElementTree as ET
from unittest.mock import patch

from src.cli import (
    EXIT_INPUT_ERROR, EXIT_OK, EXIT_VERIFICATION_FAILED, LaceForgeCLI, build_parser, log_configuration_health, main,
)
from src.config_manager import ConfigManager
from src.data_manager import DataManager, document_from_drawing, parse_document, serialize_document
from tests.test_fixtures import TestFixtures


class TestLaceForgeCLI(unittest.TestCase):

    def setUp(self):
        self.temp_dir = tempfile.mkdtemp()
        self.stdout = io.StringIO()
        self.cli = LaceForgeCLI(ConfigManager(), DataManager(self.temp_dir), stdout=self.stdout)

    def tearDown(self):
        shutil.rmtree(self.temp_dir, ignore_errors=True)

    def path(self, name: str) -> str:
        return os.path.join(self.temp_dir, name)

    def write_doc(self, name: str, doc) -> str:
        with open(self.path(name), "w", encoding="utf-8") as fh:
            fh.write(serialize_document(doc))
        return self.path(name)

    def grid_doc(self) -> str:
        return self.write_doc("grid.json", document_from_drawing(
            TestFixtures.create_square_grid(), {"generator": "multigrid-n", "seed": 1}))

    def read_doc(self, name: str):
        with open(self.path(name), encoding="utf-8") as fh:
            return parse_document(fh.read())

    def test_generate_then_verify(self):
        code = self.cli.run(["generate", "bigrid", "--radius", "8", "--level", "10", "-o", self.path("b.json")])
        self.assertEqual(code, EXIT_OK)
        self.assertEqual(self.read_doc("b.json").kind, "bigrid")

        code = self.cli.run(["verify", self.path("b.json"), "--report", self.path("report.json")])
        self.assertEqual(code, EXIT_OK)
        self.assertTrue(json.loads(self.stdout.getvalue())["passed"])
        with open(self.path("report.json"), encoding="utf-8") as fh:
            self.assertTrue(json.load(fh)["passed"])

    def test_generate_with_embedded_report(self):
        code = self.cli.run(["generate", "p3-deflate", "--seed-patch", "thin", "--steps", "1",
                             "--verify", "-o", self.path("d.json")])
        self.assertEqual(code, EXIT_OK)
        self.assertIn("passed", self.read_doc("d.json").verification)

    def test_verify_failure_exit_code(self):
        code = self.cli.run(["verify", self.grid_doc(), "--s-max", "0.1"])
        self.assertEqual(code, EXIT_VERIFICATION_FAILED)
        self.assertFalse(json.loads(self.stdout.getvalue())["passed"])

    def test_verify_without_bound_fails(self):
        code = self.cli.run(["generate", "p3-gdm", "--radius", "4", "-o", self.path("g.json")])
        self.assertEqual(code, EXIT_OK)
        code = self.cli.run(["verify", self.path("g.json")])
        self.assertEqual(code, EXIT_VERIFICATION_FAILED)
        report = json.loads(self.stdout.getvalue())
        self.assertIsNone(report["c4"])
        self.assertIn("C4 skipped: no s_max bound given", report["errors"])

    def test_verify_annotate(self):
        code = self.cli.run(["verify", self.grid_doc(), "--annotate", "-o", self.path("annotated.json")])
        self.assertEqual(code, EXIT_OK)
        self.assertTrue(self.read_doc("annotated.json").verification["passed"])
        self.assertIsNone(self.read_doc("grid.json").verification)

    def test_truncated_document(self):
        text = serialize_document(TestFixtures.create_diamond_document())
        with open(self.path("bad.json"), "w", encoding="utf-8") as fh:
            fh.write(text[:40])
        self.assertEqual(self.cli.run(["verify", self.path("bad.json")]), EXIT_INPUT_ERROR)

    def test_missing_file(self):
        self.assertEqual(self.cli.run(["stats", self.path("absent.json")]), EXIT_INPUT_ERROR)

    def test_bad_arguments(self):
        self.assertEqual(self.cli.run(["generate"]), EXIT_INPUT_ERROR)
        self.assertEqual(self.cli.run(["generate", "hexagonal", "-o", self.path("x.json")]), EXIT_INPUT_ERROR)
        self.assertEqual(self.cli.run(["generate", "bigrid", "--radius", "-1", "-o", self.path("x.json")]),
                         EXIT_INPUT_ERROR)
        self.assertEqual(self.cli.run(["render", self.grid_doc(), "--viewport", "1,2", "-o", self.path("x.svg")]),
                         EXIT_INPUT_ERROR)
        self.assertFalse(os.path.exists(self.path("x.json")))

    def test_partition(self):
        self.assertEqual(self.cli.run(["partition", self.grid_doc(), "-o", self.path("p.json")]), EXIT_OK)
        doc = self.read_doc("p.json")
        self.assertEqual(len(doc.edge_to_path), len(doc.edges))

    def test_partition_c1_violation(self):
        doc = document_from_drawing(TestFixtures.create_degree_three_drawing(), {"generator": "manual"})
        source = self.write_doc("tripod.json", doc)
        self.assertEqual(self.cli.run(["partition", source, "-o", self.path("p.json")]), EXIT_VERIFICATION_FAILED)
        self.assertFalse(os.path.exists(self.path("p.json")))

    def test_braid_with_derived_map(self):
        code = self.cli.run(["braid", self.grid_doc(), "--twists", "1", "--save-map", self.path("map.json"),
                             "-o", self.path("braided.json")])
        self.assertEqual(code, EXIT_OK)
        doc = self.read_doc("braided.json")
        self.assertEqual(set(doc.vertex_words.values()), {"CTCLR"})
        self.assertEqual(set(doc.edge_twists), {1})
        with open(self.path("map.json"), encoding="utf-8") as fh:
            saved = json.load(fh)
        self.assertEqual({entry["word"] for entry in saved["classes"]}, {"CTCLR"})

    def test_braid_with_map_file(self):
        with open(self.path("map.json"), "w", encoding="utf-8") as fh:
            json.dump(TestFixtures.create_braid_map_dict(), fh)
        code = self.cli.run(["braid", self.grid_doc(), "--map", self.path("map.json"), "-o", self.path("b.json")])
        self.assertEqual(code, EXIT_OK)
        self.assertEqual(set(self.read_doc("b.json").vertex_words.values()), {"CTC"})

    def test_negative_twists(self):
        code = self.cli.run(["braid", self.grid_doc(), "--twists", "-1", "-o", self.path("b.json")])
        self.assertEqual(code, EXIT_INPUT_ERROR)

    def test_render(self):
        code = self.cli.run(["render", self.grid_doc(), "--color-paths", "--scale", "10", "-o", self.path("g.svg")])
        self.assertEqual(code, EXIT_OK)
        root = ET.parse(self.path("g.svg")).getroot()
        self.assertEqual(root.tag, "{http://www.w3.org/2000/svg}svg")

    def test_stats(self):
        self.assertEqual(self.cli.run(["stats", self.grid_doc()]), EXIT_OK)
        stats = json.loads(self.stdout.getvalue())
        self.assertEqual(stats["generator"], "multigrid-n")
        self.assertEqual(stats["vertexClasses"], 1)

    def test_stats_over_a_directory(self):
        library = os.path.join(self.temp_dir, "library")
        manager = DataManager(library)
        manager.write_document(TestFixtures.create_diamond_document(), os.path.join(library, "diamond.json"))
        manager.write_document(document_from_drawing(TestFixtures.create_square_grid(), {"generator": "multigrid-n"}),
                               os.path.join(library, "grid.json"))
        self.assertEqual(self.cli.run(["stats", library]), EXIT_OK)
        payload = json.loads(self.stdout.getvalue())
        self.assertEqual(payload["summary"]["available_documents"], ["diamond", "grid"])
        self.assertEqual(payload["summary"]["documents_by_kind"], {"manual": 1, "multigrid-n": 1})
        self.assertEqual(payload["documents"]["grid"]["vertexClasses"], 1)

    def test_stats_over_a_directory_with_broken_files(self):
        library = os.path.join(self.temp_dir, "library")
        DataManager(library).write_document(TestFixtures.create_diamond_document(),
                                            os.path.join(library, "diamond.json"))
        with open(os.path.join(library, "broken.json"), "w", encoding="utf-8") as fh:
            fh.write("{")
        self.assertEqual(self.cli.run(["stats", library]), EXIT_INPUT_ERROR)
        payload = json.loads(self.stdout.getvalue())
        self.assertEqual(sorted(payload["documents"]), ["diamond"])
        self.assertEqual(payload["summary"]["errors"][0]["file"], "broken.json")

    def test_ignore_config_restores_defaults(self):
        self.cli.config_manager.set_radius(4.0)
        code = self.cli.run(["--ignore-config", "generate", "bigrid", "--level", "8", "-o", self.path("b.json")])
        self.assertEqual(code, EXIT_OK)
        radius = self.read_doc("b.json").metadata["parameters"]["radius"]
        self.assertEqual(radius, ConfigManager.DEFAULT_RADIUS)


class TestParser(unittest.TestCase):

    def test_offsets_are_parsed(self):
        args = build_parser().parse_args(["generate", "p3-dual", "--offsets", "0.1,0.2,-0.3,0,0", "-o", "x.json"])
        self.assertEqual(args.offsets, [0.1, 0.2, -0.3, 0.0, 0.0])
        self.assertEqual(args.steps, 4)
        self.assertFalse(args.perturb)


class TestMain(unittest.TestCase):
    """Startup: configuration entries and the configuration health check."""

    @patch.dict(os.environ, {}, clear=True)
    @patch("src.cli.LaceForgeCLI.run", return_value=EXIT_OK)
    def test_health_warnings_are_logged(self, run):
        with self.assertLogs("src.cli", level="WARNING") as logs:
            code = main(["stats", "x.json"], {"generation": {"radius": 200}, "verification": {"margin": 0.5}})
        self.assertEqual(code, EXIT_OK)
        run.assert_called_once_with(["stats", "x.json"])
        self.assertTrue(any("Large radius" in line for line in logs.output))
        self.assertTrue(any("Small margin" in line for line in logs.output))

    @patch("src.cli.LaceForgeCLI.run", return_value=EXIT_OK)
    def test_rejected_entries_are_logged(self, run):
        with self.assertLogs("src.cli", level="WARNING") as logs:
            main(["stats", "x.json"], {"generation": {"radius": -5}})
        self.assertTrue(any("Ignoring configuration entry generation.radius" in line for line in logs.output))

    def test_settings_summary_at_debug(self):
        with self.assertLogs("src.cli", level="DEBUG") as logs:
            health = log_configuration_health(ConfigManager())
        self.assertTrue(health["healthy"])
        self.assertTrue(any("Generation Settings:" in line for line in logs.output))


if __name__ == '__main__':
    unittest.main()
