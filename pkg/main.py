#!/usr/bin/env python3
"""
LaceForge - Main Entry Point

Generates, verifies and renders quasiperiodic bobbin lace grounds.

Usage:
    python main.py generate bigrid --word fibonacci --level 12 -o bigrid.json
    python main.py verify bigrid.json
    python main.py render bigrid.json --color-paths -o bigrid.svg

Configuration:
    Defaults for generation, verification and rendering live in config.json.
    Command-line flags override them.

Environment Variables:
    LACEFORGE_SEED: Random seed (overrides --seed and config.json)
    LACEFORGE_CONFIG: Alternative path to the configuration file
"""

import json
import logging
import os
import sys
from pathlib import Path


def load_config():
    """Load configuration from config.json, or an empty config when it is absent."""
    config_path = Path(os.getenv('LACEFORGE_CONFIG', 'config.json'))

    if not config_path.exists():
        return {}

    try:
        with open(config_path, 'r', encoding='utf-8') as f:
            return json.load(f)
    except json.JSONDecodeError as e:
        print(f"❌ Error: Invalid JSON in {config_path}: {e}", file=sys.stderr)
        sys.exit(3)
    except OSError as e:
        print(f"❌ Error loading {config_path}: {e}", file=sys.stderr)
        sys.exit(3)


def setup_logging_from_config(config):
    """Set up logging based on configuration."""
    log_config = config.get('logging', {})
    log_level = getattr(logging, log_config.get('level', 'INFO').upper(), logging.INFO)
    handlers = [logging.StreamHandler(sys.stderr)]

    log_directory = log_config.get('log_directory')
    if log_directory:
        log_directory = Path(log_directory)
        log_directory.mkdir(parents=True, exist_ok=True)
        handlers.append(logging.FileHandler(log_directory / "laceforge.log", encoding='utf-8'))

    logging.basicConfig(
        level=log_level,
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        handlers=handlers
    )


if __name__ == "__main__":
    config = load_config()
    setup_logging_from_config(config)

    from src.cli import main
    try:
        sys.exit(main(sys.argv[1:], config))
    except KeyboardInterrupt:
        print("\n👋 Stopped by user", file=sys.stderr)
        sys.exit(130)
