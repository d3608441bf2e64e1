"""
Unit tests for ConfigManager class.
"""
import os
import unittest
from unittest.mock import patch

from src.config_manager import SEED_ENV_VAR, ConfigManager
from src.models import GOLDEN_RATIO


class TestConfigManager(unittest.TestCase):
    """Test cases for ConfigManager functionality."""

    def setUp(self):
        """Set up test fixtures."""
        self.config_manager = ConfigManager()

    def test_initialization_with_defaults(self):
        """Test that ConfigManager initializes with correct default values."""
        settings = self.config_manager.get_generation_settings()
        self.assertEqual(settings.seed, 1)
        self.assertEqual(settings.radius, 15.0)
        self.assertEqual(settings.alpha_degrees, 60.0)
        self.assertEqual(settings.len_s, 1.0)
        self.assertAlmostEqual(settings.len_l, GOLDEN_RATIO)
        self.assertFalse(settings.perturb)
        self.assertEqual(self.config_manager.get_verification_thresholds().margin, 2.0)
        self.assertEqual(self.config_manager.get_output_directory(), "./patterns/")

    def test_set_radius_valid_values(self):
        for radius in (0.5, 15, 42.5, 500):
            result = self.config_manager.set_radius(radius)
            self.assertTrue(result['success'], radius)
            self.assertIn("✅", result['user_message'])
            self.assertEqual(self.config_manager.get_generation_settings().radius, float(radius))

    def test_set_radius_invalid_values(self):
        for radius in (0, 0.1, 501, -3, float('inf'), float('nan'), "10", None, True):
            result = self.config_manager.set_radius(radius)
            self.assertFalse(result['success'], radius)
            self.assertIn('error', result)
            self.assertIn("❌", result['user_message'])
        self.assertEqual(self.config_manager.get_generation_settings().radius, 15.0)

    def test_set_alpha_degrees(self):
        self.assertTrue(self.config_manager.set_alpha_degrees(90)['success'])
        self.assertTrue(self.config_manager.set_alpha_degrees(30.5)['success'])
        self.assertFalse(self.config_manager.set_alpha_degrees(0)['success'])
        self.assertFalse(self.config_manager.set_alpha_degrees(90.1)['success'])
        self.assertEqual(self.config_manager.get_generation_settings().alpha_degrees, 30.5)

    def test_set_spacing_lengths(self):
        self.assertTrue(self.config_manager.set_spacing_lengths(1.0, 2.0)['success'])
        result = self.config_manager.set_spacing_lengths(2.0, 2.0)
        self.assertFalse(result['success'])
        self.assertIn("len_l", result['error'])
        self.assertFalse(self.config_manager.set_spacing_lengths(0.0, 2.0)['success'])
        settings = self.config_manager.get_generation_settings()
        self.assertEqual((settings.len_s, settings.len_l), (1.0, 2.0))

    def test_set_fibonacci_level(self):
        self.assertTrue(self.config_manager.set_fibonacci_level(0)['success'])
        self.assertEqual(self.config_manager.get_generation_settings().fibonacci_level, 0)
        self.assertTrue(self.config_manager.set_fibonacci_level(12)['success'])
        for level in (-1, 26, 3.0, "5"):
            self.assertFalse(self.config_manager.set_fibonacci_level(level)['success'], level)
        self.assertEqual(self.config_manager.get_generation_settings().fibonacci_level, 12)

    def test_set_seed(self):
        self.assertTrue(self.config_manager.set_seed(0)['success'])
        self.assertTrue(self.config_manager.set_seed(2 ** 32 - 1)['success'])
        self.assertFalse(self.config_manager.set_seed(-1)['success'])
        self.assertFalse(self.config_manager.set_seed(2 ** 32)['success'])
        self.assertFalse(self.config_manager.set_seed(1.5)['success'])

    def test_set_gp_tolerance_and_perturb(self):
        self.assertTrue(self.config_manager.set_gp_tolerance(1e-9)['success'])
        self.assertFalse(self.config_manager.set_gp_tolerance(0.1)['success'])
        self.assertTrue(self.config_manager.set_perturb(True)['success'])
        self.assertFalse(self.config_manager.set_perturb("yes")['success'])
        settings = self.config_manager.get_generation_settings()
        self.assertEqual(settings.gp_tolerance, 1e-9)
        self.assertTrue(settings.perturb)

    def test_set_s_max(self):
        self.assertTrue(self.config_manager.set_s_max("ammann", 12.0)['success'])
        self.assertEqual(self.config_manager.get_verification_thresholds().s_max_ammann, 12.0)
        self.assertFalse(self.config_manager.set_s_max("ammann", 0)['success'])
        self.assertFalse(self.config_manager.set_s_max("bigrid", 1.0)['success'])

    def test_set_render_option(self):
        self.assertTrue(self.config_manager.set_render_option("scale", 5)['success'])
        self.assertTrue(self.config_manager.set_render_option("margin", 0)['success'])
        self.assertFalse(self.config_manager.set_render_option("stroke_width", 0)['success'])
        self.assertFalse(self.config_manager.set_render_option("colour", 1)['success'])
        self.assertEqual(self.config_manager.get_render_options().scale, 5.0)


class TestSeedResolution(unittest.TestCase):

    def setUp(self):
        self.config_manager = ConfigManager()
        self.config_manager.set_seed(5)

    @patch.dict(os.environ, {}, clear=True)
    def test_configured_seed_is_fallback(self):
        self.assertEqual(self.config_manager.resolve_seed(), 5)
        self.assertEqual(self.config_manager.resolve_seed(9), 9)

    @patch.dict(os.environ, {SEED_ENV_VAR: "77"})
    def test_environment_overrides(self):
        self.assertEqual(self.config_manager.resolve_seed(9), 77)

    @patch.dict(os.environ, {SEED_ENV_VAR: "not-a-number"})
    def test_invalid_environment_ignored(self):
        self.assertEqual(self.config_manager.resolve_seed(9), 9)

    @patch.dict(os.environ, {SEED_ENV_VAR: "-4"})
    def test_out_of_range_environment_ignored(self):
        self.assertEqual(self.config_manager.resolve_seed(), 5)


class TestApplyConfig(unittest.TestCase):

    def setUp(self):
        self.config_manager = ConfigManager()

    def test_valid_sections(self):
        result = self.config_manager.apply_config({
            "generation": {"seed": 3, "radius": 20, "len_s": 1.0, "len_l": 2.0, "output_directory": "out/"},
            "verification": {"margin": 3.0, "s_max_multigrid": 8.0, "tolerance": 1e-8},
            "render": {"scale": 12},
        })
        self.assertTrue(result['success'])
        self.assertEqual(result['errors'], [])
        self.assertIn("generation.radius", result['applied'])
        self.assertEqual(self.config_manager.get_generation_settings().len_l, 2.0)
        thresholds = self.config_manager.get_verification_thresholds()
        self.assertEqual((thresholds.margin, thresholds.s_max_multigrid, thresholds.tolerance), (3.0, 8.0, 1e-8))
        self.assertEqual(self.config_manager.get_output_directory(), "out/")

    def test_invalid_entries_are_reported_and_skipped(self):
        result = self.config_manager.apply_config({
            "generation": {"radius": -1, "alpha_degrees": 45, "output_directory": ""},
            "verification": {"tolerance": 0},
        })
        self.assertFalse(result['success'])
        self.assertEqual(len(result['errors']), 3)
        self.assertEqual(result['applied'], ["generation.alpha_degrees"])
        self.assertEqual(self.config_manager.get_generation_settings().radius, 15.0)

    def test_empty_config(self):
        result = self.config_manager.apply_config({})
        self.assertTrue(result['success'])
        self.assertEqual(result['applied'], [])


class TestValidationAndHealth(unittest.TestCase):

    def setUp(self):
        self.config_manager = ConfigManager()

    def test_defaults_are_valid(self):
        self.assertEqual(self.config_manager.validate_settings(), {"valid": True, "issues": []})

    def test_corrupted_settings_detected(self):
        self.config_manager._generation.radius = -5
        self.config_manager._verification.s_max_p3_dual = 0.0
        result = self.config_manager.validate_settings()
        self.assertFalse(result['valid'])
        self.assertEqual(len(result['issues']), 2)

    def test_reset_to_defaults(self):
        self.config_manager.set_radius(99)
        self.config_manager.set_margin(0.5)
        self.config_manager.reset_to_defaults()
        self.assertEqual(self.config_manager.get_generation_settings().radius, 15.0)
        self.assertEqual(self.config_manager.get_verification_thresholds().margin, 2.0)

    def test_getters_return_copies(self):
        settings = self.config_manager.get_generation_settings()
        settings.radius = 400.0
        self.assertEqual(self.config_manager.get_generation_settings().radius, 15.0)

    def test_settings_summary(self):
        summary = self.config_manager.get_settings_summary()
        self.assertIn("Generation Settings:", summary)
        self.assertIn("• Radius: 15.0", summary)
        self.assertIn("Output Directory", summary)

    @patch.dict(os.environ, {}, clear=True)
    def test_health_check(self):
        health = self.config_manager.get_configuration_health_check()
        self.assertTrue(health['healthy'])
        self.assertEqual(health['warnings'], [])
        self.config_manager.set_radius(200)
        self.config_manager.set_margin(0.5)
        health = self.config_manager.get_configuration_health_check()
        self.assertTrue(health['healthy'])
        self.assertEqual(len(health['warnings']), 2)
        self.assertEqual(len(health['recommendations']), 2)

    def test_health_check_reports_invalid_settings(self):
        self.config_manager._generation.len_l = 0.5
        health = self.config_manager.get_configuration_health_check()
        self.assertFalse(health['healthy'])
        self.assertTrue(all(e.startswith("❌") for e in health['errors']))


if __name__ == '__main__':
    unittest.main()
