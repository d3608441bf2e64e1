"""
Configuration manager for generation, verification and rendering settings.
"""
import logging
import math
import os
from dataclasses import replace
from typing import Any, Dict, List, Optional

from .models import GOLDEN_RATIO, GenerationSettings, RenderOptions, VerificationThresholds

SEED_ENV_VAR = "LACEFORGE_SEED"


class ConfigManager:
    """Manages generator parameters, verification thresholds and render options."""

    # Default configuration values
    DEFAULT_SEED = 1
    DEFAULT_RADIUS = 15.0
    DEFAULT_ALPHA_DEGREES = 60.0
    DEFAULT_LEN_S = 1.0
    DEFAULT_LEN_L = GOLDEN_RATIO
    DEFAULT_FIBONACCI_LEVEL = 10
    DEFAULT_GP_TOLERANCE = 1e-7
    DEFAULT_MARGIN = 2.0
    DEFAULT_OUTPUT_DIRECTORY = "./patterns/"

    # Validation limits
    MIN_RADIUS = 0.5
    MAX_RADIUS = 500.0
    MIN_ALPHA_DEGREES = 0.0
    MAX_ALPHA_DEGREES = 90.0
    MIN_FIBONACCI_LEVEL = 0
    MAX_FIBONACCI_LEVEL = 25
    MIN_GP_TOLERANCE = 1e-12
    MAX_GP_TOLERANCE = 1e-3
    MIN_SEED = 0
    MAX_SEED = 2 ** 32 - 1

    S_MAX_KINDS = ("p3_dual", "ammann", "multigrid")

    def __init__(self):
        """Initialize ConfigManager with default settings."""
        self.logger = logging.getLogger(__name__)
        self._generation = GenerationSettings()
        self._verification = VerificationThresholds()
        self._render = RenderOptions()
        self._output_directory = self.DEFAULT_OUTPUT_DIRECTORY

    def get_generation_settings(self) -> GenerationSettings:
        return replace(self._generation)

    def get_verification_thresholds(self) -> VerificationThresholds:
        return replace(self._verification)

    def get_render_options(self) -> RenderOptions:
        return replace(self._render)

    def get_output_directory(self) -> str:
        return self._output_directory

    def _reject(self, error_msg: str, user_message: str) -> Dict[str, Any]:
        self.logger.error(error_msg)
        return {'success': False, 'error': error_msg, 'user_message': f"❌ {user_message}"}

    def _accept(self, message: str) -> Dict[str, Any]:
        self.logger.info(message)
        return {'success': True, 'message': message, 'user_message': f"✅ {message}"}

    def _check_number(self, name: str, value: Any, low: float, high: float,
                      open_low: bool = False, integer: bool = False) -> Optional[Dict[str, Any]]:
        """Result dict describing why value is unacceptable, or None when it is fine."""
        if isinstance(value, bool) or not isinstance(value, (int, float) if not integer else int):
            expected = "an integer" if integer else "a number"
            return self._reject(f"{name} must be {expected}, got {type(value).__name__}",
                                f"Invalid input: expected {expected} for {name}")
        if not math.isfinite(value):
            return self._reject(f"{name} must be finite, got {value}", f"{name} must be finite")
        if value < low or (open_low and value == low):
            bound = "greater than" if open_low else "at least"
            return self._reject(f"{name} must be {bound} {low}", f"{name} too small: must be {bound} {low}")
        if value > high:
            return self._reject(f"{name} cannot exceed {high}", f"{name} too large: maximum is {high}")
        return None

    def set_seed(self, seed: int) -> Dict[str, Any]:
        """
        Set the random seed used for default offsets and perturbation.

        Args:
            seed: Non-negative integer seed

        Returns:
            Dictionary with success status, error message, and user-friendly message
        """
        problem = self._check_number("seed", seed, self.MIN_SEED, self.MAX_SEED, integer=True)
        if problem:
            return problem
        self._generation.seed = seed
        return self._accept(f"Seed set to {seed}")

    def resolve_seed(self, cli_seed: Optional[int] = None) -> int:
        """
        Effective seed: the LACEFORGE_SEED environment variable, then the
        command-line value, then the configured seed.
        """
        env_value = os.getenv(SEED_ENV_VAR)
        if env_value is not None and env_value.strip():
            try:
                seed = int(env_value)
                if self.MIN_SEED <= seed <= self.MAX_SEED:
                    return seed
                self.logger.warning(f"{SEED_ENV_VAR}={env_value} is out of range; ignoring it")
            except ValueError:
                self.logger.warning(f"{SEED_ENV_VAR}={env_value!r} is not an integer; ignoring it")
        if cli_seed is not None:
            return cli_seed
        return self._generation.seed

    def set_radius(self, radius: float) -> Dict[str, Any]:
        """Set the half-width of the square clip region."""
        problem = self._check_number("radius", radius, self.MIN_RADIUS, self.MAX_RADIUS)
        if problem:
            return problem
        self._generation.radius = float(radius)
        return self._accept(f"Radius set to {radius}")

    def set_alpha_degrees(self, alpha: float) -> Dict[str, Any]:
        """Set the bigrid crossing angle in degrees, in (0, 90]."""
        problem = self._check_number("alpha", alpha, self.MIN_ALPHA_DEGREES, self.MAX_ALPHA_DEGREES, open_low=True)
        if problem:
            return problem
        self._generation.alpha_degrees = float(alpha)
        return self._accept(f"Bigrid angle set to {alpha} degrees")

    def set_spacing_lengths(self, len_s: float, len_l: float) -> Dict[str, Any]:
        """
        Set the short and long gap lengths of word spacings.

        Args:
            len_s: Short gap, positive
            len_l: Long gap, strictly greater than len_s
        """
        for name, value in (("len_s", len_s), ("len_l", len_l)):
            problem = self._check_number(name, value, 0.0, 1e6, open_low=True)
            if problem:
                return problem
        if len_l <= len_s:
            return self._reject(f"len_l ({len_l}) must exceed len_s ({len_s})",
                                "Long gap must be longer than the short gap")
        self._generation.len_s = float(len_s)
        self._generation.len_l = float(len_l)
        return self._accept(f"Gap lengths set to S={len_s}, L={len_l}")

    def set_fibonacci_level(self, level: int) -> Dict[str, Any]:
        problem = self._check_number("fibonacci level", level, self.MIN_FIBONACCI_LEVEL,
                                     self.MAX_FIBONACCI_LEVEL, integer=True)
        if problem:
            return problem
        self._generation.fibonacci_level = level
        return self._accept(f"Fibonacci level set to {level}")

    def set_gp_tolerance(self, tolerance: float) -> Dict[str, Any]:
        problem = self._check_number("general-position tolerance", tolerance, self.MIN_GP_TOLERANCE,
                                     self.MAX_GP_TOLERANCE)
        if problem:
            return problem
        self._generation.gp_tolerance = float(tolerance)
        return self._accept(f"General-position tolerance set to {tolerance:g}")

    def set_perturb(self, perturb: bool) -> Dict[str, Any]:
        if not isinstance(perturb, bool):
            return self._reject(f"perturb must be a boolean, got {type(perturb).__name__}",
                                "Invalid input: expected true/false for perturb")
        self._generation.perturb = perturb
        return self._accept(f"Perturb-on-degeneracy {'enabled' if perturb else 'disabled'}")

    def set_margin(self, margin: float) -> Dict[str, Any]:
        """Set the boundary margin excluded from the C0 feature-size checks."""
        problem = self._check_number("margin", margin, 0.0, self.MAX_RADIUS)
        if problem:
            return problem
        self._verification.margin = float(margin)
        return self._accept(f"Verification margin set to {margin}")

    def set_s_max(self, kind: str, value: float) -> Dict[str, Any]:
        """
        Set the frozen C4 bound for one generator kind.

        Args:
            kind: One of p3_dual, ammann, multigrid
            value: Positive bound on path deviation
        """
        if kind not in self.S_MAX_KINDS:
            return self._reject(f"Unknown sMax kind '{kind}'",
                                f"Unknown sMax kind '{kind}' (expected one of {', '.join(self.S_MAX_KINDS)})")
        problem = self._check_number(f"s_max_{kind}", value, 0.0, 1e6, open_low=True)
        if problem:
            return problem
        setattr(self._verification, f"s_max_{kind}", float(value))
        return self._accept(f"sMax for {kind} set to {value}")

    def set_render_option(self, name: str, value: Any) -> Dict[str, Any]:
        """Set one of stroke_width, vertex_radius, margin or scale on the render options."""
        if name not in ("stroke_width", "vertex_radius", "margin", "scale"):
            return self._reject(f"Unknown render option '{name}'", f"Unknown render option '{name}'")
        problem = self._check_number(name, value, 0.0, 1e4, open_low=name != "margin")
        if problem:
            return problem
        setattr(self._render, name, float(value))
        return self._accept(f"Render {name} set to {value}")

    def apply_config(self, config: Dict[str, Any]) -> Dict[str, Any]:
        """
        Apply the generation, verification and render sections of config.json.

        Invalid entries are skipped and reported; valid ones still apply.

        Returns:
            Dictionary with success flag, applied keys and errors
        """
        applied: List[str] = []
        errors: List[str] = []

        def record(key: str, result: Dict[str, Any]) -> None:
            if result['success']:
                applied.append(key)
            else:
                errors.append(f"{key}: {result['error']}")

        generation = config.get("generation", {}) or {}
        setters = {
            "seed": self.set_seed,
            "radius": self.set_radius,
            "alpha_degrees": self.set_alpha_degrees,
            "fibonacci_level": self.set_fibonacci_level,
            "gp_tolerance": self.set_gp_tolerance,
            "perturb": self.set_perturb,
        }
        for key, setter in setters.items():
            if key in generation:
                record(f"generation.{key}", setter(generation[key]))
        if "len_s" in generation or "len_l" in generation:
            record("generation.len_s/len_l", self.set_spacing_lengths(
                generation.get("len_s", self._generation.len_s), generation.get("len_l", self._generation.len_l)))
        if "output_directory" in generation:
            directory = generation["output_directory"]
            if isinstance(directory, str) and directory.strip():
                self._output_directory = directory
                applied.append("generation.output_directory")
            else:
                errors.append("generation.output_directory: must be a non-empty string")

        verification = config.get("verification", {}) or {}
        if "margin" in verification:
            record("verification.margin", self.set_margin(verification["margin"]))
        if "tolerance" in verification:
            problem = self._check_number("tolerance", verification["tolerance"], 0.0, 1.0, open_low=True)
            if problem:
                errors.append(f"verification.tolerance: {problem['error']}")
            else:
                self._verification.tolerance = float(verification["tolerance"])
                applied.append("verification.tolerance")
        for kind in self.S_MAX_KINDS:
            key = f"s_max_{kind}"
            if key in verification:
                record(f"verification.{key}", self.set_s_max(kind, verification[key]))

        render = config.get("render", {}) or {}
        for name in ("stroke_width", "vertex_radius", "margin", "scale"):
            if name in render:
                record(f"render.{name}", self.set_render_option(name, render[name]))

        if errors:
            self.logger.warning(f"Configuration applied with {len(errors)} rejected entries")
        return {'success': not errors, 'applied': applied, 'errors': errors}

    def reset_to_defaults(self) -> None:
        """Reset all settings to their default values."""
        self._generation = GenerationSettings(
            seed=self.DEFAULT_SEED,
            radius=self.DEFAULT_RADIUS,
            alpha_degrees=self.DEFAULT_ALPHA_DEGREES,
            len_s=self.DEFAULT_LEN_S,
            len_l=self.DEFAULT_LEN_L,
            fibonacci_level=self.DEFAULT_FIBONACCI_LEVEL,
            gp_tolerance=self.DEFAULT_GP_TOLERANCE,
        )
        self._verification = VerificationThresholds(margin=self.DEFAULT_MARGIN)
        self._render = RenderOptions()
        self._output_directory = self.DEFAULT_OUTPUT_DIRECTORY
        self.logger.info("All settings reset to default values")

    def validate_settings(self) -> Dict[str, Any]:
        """
        Validate current settings and return validation results.

        Returns:
            Dictionary with validation results and any issues found
        """
        issues = []
        g = self._generation
        if not self.MIN_RADIUS <= g.radius <= self.MAX_RADIUS:
            issues.append(f"Invalid radius: {g.radius}")
        if not self.MIN_ALPHA_DEGREES < g.alpha_degrees <= self.MAX_ALPHA_DEGREES:
            issues.append(f"Invalid alpha: {g.alpha_degrees}")
        if not 0 < g.len_s < g.len_l:
            issues.append(f"Invalid gap lengths: S={g.len_s}, L={g.len_l}")
        if not self.MIN_FIBONACCI_LEVEL <= g.fibonacci_level <= self.MAX_FIBONACCI_LEVEL:
            issues.append(f"Invalid fibonacci level: {g.fibonacci_level}")
        if not self.MIN_GP_TOLERANCE <= g.gp_tolerance <= self.MAX_GP_TOLERANCE:
            issues.append(f"Invalid general-position tolerance: {g.gp_tolerance}")
        if self._verification.margin < 0:
            issues.append(f"Invalid margin: {self._verification.margin}")
        for kind in self.S_MAX_KINDS:
            value = getattr(self._verification, f"s_max_{kind}")
            if not value > 0:
                issues.append(f"Invalid sMax for {kind}: {value}")
        issues.extend(f"Invalid render option: {issue}" for issue in self._render.validate())
        return {"valid": not issues, "issues": issues}

    def get_settings_summary(self) -> str:
        """
        Get a formatted summary of current settings.

        Returns:
            Human-readable string describing current settings
        """
        g, v = self._generation, self._verification
        return (
            f"Generation Settings:\n"
            f"• Seed: {g.seed}\n"
            f"• Radius: {g.radius}\n"
            f"• Bigrid angle: {g.alpha_degrees} degrees\n"
            f"• Gaps: S={g.len_s}, L={g.len_l:.6f}\n"
            f"• Fibonacci level: {g.fibonacci_level}\n"
            f"• Perturb on degeneracy: {'yes' if g.perturb else 'no'}\n"
            f"Verification:\n"
            f"• Margin: {v.margin}\n"
            f"• sMax: p3-dual {v.s_max_p3_dual}, ammann {v.s_max_ammann}, multigrid {v.s_max_multigrid}\n"
            f"• Output Directory: {self._output_directory}"
        )

    def get_configuration_health_check(self) -> Dict[str, Any]:
        """
        Perform a health check of the configuration.

        Returns:
            Dictionary with health status and recommendations
        """
        health_check = {'healthy': True, 'warnings': [], 'errors': [], 'recommendations': []}
        try:
            validation_result = self.validate_settings()
            if not validation_result['valid']:
                health_check['healthy'] = False
                health_check['errors'].extend(f"❌ {issue}" for issue in validation_result['issues'])

            g = self._generation
            if g.radius > 100:
                health_check['warnings'].append(f"⚠️ Large radius ({g.radius}) produces very large patterns")
                health_check['recommendations'].append("Consider a radius of 50 or less for interactive use.")
            if g.gp_tolerance > 1e-5:
                health_check['warnings'].append(
                    f"⚠️ Coarse general-position tolerance ({g.gp_tolerance:g}) may reject valid grids")
            if self._verification.margin < 1.0:
                health_check['warnings'].append(
                    f"⚠️ Small margin ({self._verification.margin}) lets clipped faces into the C0 metrics")
                health_check['recommendations'].append("Use a margin of at least 2 tile edges.")
            if os.getenv(SEED_ENV_VAR):
                health_check['warnings'].append(f"⚠️ {SEED_ENV_VAR} is set and overrides the configured seed")
            return health_check
        except Exception as e:
            self.logger.error(f"Error during configuration health check: {e}")
            return {
                'healthy': False,
                'warnings': [],
                'errors': [f"❌ Health check failed: {e}"],
                'recommendations': ["Please check the configuration and try again."],
            }
