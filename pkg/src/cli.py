"""
Command-line interface: generate, verify, partition, braid, render and stats.

Each subcommand is a cmd_* method returning a result dictionary with an
exit code: 0 on success or pass, 2 on verification failure, 3 on input
errors.
"""
import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from .braid import EdgeTwistLabel, derive_braid_map
from .config_manager import ConfigManager
from .data_manager import DataManager, drawing_from_document
from .errors import C1Violation, InvalidParams, IoError, LaceForgeError
from .p3 import SEED_NAMES
from .pattern_engine import (
    GENERATOR_KINDS, GenerationRequest, PatternEngine, braid_document, document_stats,
    partition_document, verify_document,
)
from .render import write_svg

EXIT_OK = 0
EXIT_VERIFICATION_FAILED = 2
EXIT_INPUT_ERROR = 3

logger = logging.getLogger(__name__)


def _float_list(text: str) -> List[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got '{text}'")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="laceforge", description="Quasiperiodic bobbin lace grounds")
    parser.add_argument("--log-level", default=None, help="Override the configured log level")
    parser.add_argument("--ignore-config", action="store_true", help="Use default settings instead of config.json")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="Generate a pattern document")
    gen.add_argument("kind", choices=GENERATOR_KINDS)
    gen.add_argument("--radius", type=float)
    gen.add_argument("--alpha", type=float, help="Bigrid crossing angle in degrees")
    gen.add_argument("--word", default="fibonacci",
                     help="fibonacci, octonacci, thue-morse, counterexample:<m> or custom:<SL-string>")
    gen.add_argument("--level", type=int, help="Substitution level of generated words")
    gen.add_argument("--len-s", type=float)
    gen.add_argument("--len-l", type=float)
    gen.add_argument("--offsets", type=_float_list)
    gen.add_argument("--families", type=int, default=4, help="Number of families for multigrid-n")
    gen.add_argument("--seed-patch", choices=SEED_NAMES, default="sun")
    gen.add_argument("--steps", type=int, default=4, help="Deflation steps for p3-deflate")
    gen.add_argument("--seed", type=int)
    gen.add_argument("--perturb", action="store_true")
    gen.add_argument("--verify", action="store_true", help="Embed a verification report")
    gen.add_argument("-o", "--output", required=True)

    ver = sub.add_parser("verify", help="Check conditions C0-C4")
    ver.add_argument("input")
    ver.add_argument("--s-max", type=float)
    ver.add_argument("--margin", type=float)
    ver.add_argument("--report")
    ver.add_argument("--annotate", action="store_true", help="Embed the report into the document")
    ver.add_argument("-o", "--output", help="Where to write the annotated document (default: input)")

    part = sub.add_parser("partition", help="Annotate edges with their osculating path")
    part.add_argument("input")
    part.add_argument("-o", "--output", required=True)

    braid = sub.add_parser("braid", help="Assign braid words to vertices")
    braid.add_argument("input")
    braid.add_argument("--map", help="Braid map JSON; derived from edge twists when omitted")
    braid.add_argument("--base", default="CTC", help="Base word when deriving a map")
    braid.add_argument("--twists", type=int, help="Uniform twist count per edge")
    braid.add_argument("--save-map", help="Write the derived braid map here")
    braid.add_argument("-o", "--output", required=True)

    render = sub.add_parser("render", help="Render a document to SVG")
    render.add_argument("input")
    render.add_argument("--color-paths", action="store_true")
    render.add_argument("--glyphs", action="store_true")
    render.add_argument("--scale", type=float)
    render.add_argument("--viewport", type=_float_list, help="xmin,ymin,xmax,ymax")
    render.add_argument("-o", "--output", required=True)

    stats = sub.add_parser("stats", help="Count face shapes and vertex classes")
    stats.add_argument("input", help="A pattern document, or a directory of them")
    stats.add_argument("--all-faces", action="store_true", help="Include faces touching the boundary")
    return parser


class LaceForgeCLI:
    """Orchestrates the subcommands over a config manager and a data manager."""

    def __init__(self, config_manager: Optional[ConfigManager] = None,
                 data_manager: Optional[DataManager] = None, stdout=None):
        self.config_manager = config_manager or ConfigManager()
        self.data_manager = data_manager or DataManager(self.config_manager.get_output_directory())
        self.stdout = stdout or sys.stdout
        self.logger = logging.getLogger(__name__)

    def _emit(self, payload: Dict[str, Any]) -> None:
        self.stdout.write(json.dumps(payload, indent=2, sort_keys=True) + "\n")

    def _require(self, result: Dict[str, Any]) -> None:
        if not result['success']:
            raise InvalidParams(result['error'])

    def cmd_generate(self, args: argparse.Namespace) -> Dict[str, Any]:
        cm = self.config_manager
        if args.radius is not None:
            self._require(cm.set_radius(args.radius))
        if args.alpha is not None:
            self._require(cm.set_alpha_degrees(args.alpha))
        if args.len_s is not None or args.len_l is not None:
            settings = cm.get_generation_settings()
            self._require(cm.set_spacing_lengths(
                settings.len_s if args.len_s is None else args.len_s,
                settings.len_l if args.len_l is None else args.len_l))
        if args.level is not None:
            self._require(cm.set_fibonacci_level(args.level))
        if args.perturb:
            self._require(cm.set_perturb(True))

        seed = cm.resolve_seed(args.seed)
        request = GenerationRequest(
            kind=args.kind, word=args.word, level=args.level, offsets=args.offsets,
            seed_patch=args.seed_patch, steps=args.steps, families=args.families,
        )
        doc = PatternEngine(cm.get_generation_settings()).generate(request, seed)
        if args.verify:
            _, doc = verify_document(doc, cm.get_verification_thresholds(), annotate=True)
        self.data_manager.write_document(doc, args.output)
        return {'success': True, 'exit_code': EXIT_OK,
                'message': f"Generated {doc.kind} pattern with {len(doc.vertices)} vertices -> {args.output}"}

    def cmd_verify(self, args: argparse.Namespace) -> Dict[str, Any]:
        doc = self.data_manager.load_document(args.input)
        thresholds = self.config_manager.get_verification_thresholds()
        if args.margin is not None:
            thresholds = replace(thresholds, margin=args.margin)
        if args.s_max is not None:
            thresholds = replace(thresholds, s_max=args.s_max)
        report, annotated = verify_document(doc, thresholds, annotate=args.annotate)
        payload = report.to_dict()
        self._emit(payload)
        if args.report:
            try:
                Path(args.report).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
            except OSError as e:
                raise IoError(f"cannot write report to {args.report}: {e}")
        if args.annotate:
            self.data_manager.write_document(annotated, args.output or args.input)
        exit_code = EXIT_OK if report.passed else EXIT_VERIFICATION_FAILED
        return {'success': report.passed, 'exit_code': exit_code,
                'message': f"Verification {'passed' if report.passed else 'failed'}"}

    def cmd_partition(self, args: argparse.Namespace) -> Dict[str, Any]:
        doc = partition_document(self.data_manager.load_document(args.input))
        self.data_manager.write_document(doc, args.output)
        paths = len(set(doc.edge_to_path or []))
        return {'success': True, 'exit_code': EXIT_OK, 'message': f"Annotated {paths} osculating paths"}

    def cmd_braid(self, args: argparse.Namespace) -> Dict[str, Any]:
        doc = self.data_manager.load_document(args.input)
        if args.twists is not None:
            if args.twists < 0:
                raise InvalidParams(f"twist count must be non-negative, got {args.twists}")
            doc = replace(doc, edge_twists=[args.twists] * len(doc.edges))
        if args.map:
            braid_map = self.data_manager.load_braid_map(args.map)
        else:
            twists = doc.edge_twists if doc.edge_twists is not None else [0] * len(doc.edges)
            braid_map = derive_braid_map(drawing_from_document(doc),
                                         EdgeTwistLabel(np.asarray(twists, dtype=np.int64)), args.base)
            if args.save_map:
                try:
                    Path(args.save_map).write_text(json.dumps(braid_map.to_dict(), indent=2, sort_keys=True) + "\n",
                                                   encoding="utf-8")
                except OSError as e:
                    raise IoError(f"cannot write braid map to {args.save_map}: {e}")
        doc = braid_document(doc, braid_map)
        self.data_manager.write_document(doc, args.output)
        return {'success': True, 'exit_code': EXIT_OK,
                'message': f"Assigned braid words to {len(doc.vertex_words or {})} vertices"}

    def cmd_render(self, args: argparse.Namespace) -> Dict[str, Any]:
        doc = self.data_manager.load_document(args.input)
        options = self.config_manager.get_render_options()
        options = replace(options, color_paths=args.color_paths, glyphs=args.glyphs)
        if args.scale is not None:
            options = replace(options, scale=args.scale)
        if args.viewport is not None:
            if len(args.viewport) != 4:
                raise InvalidParams(f"viewport needs 4 numbers, got {len(args.viewport)}")
            options = replace(options, viewport=tuple(args.viewport))
        write_svg(doc, args.output, options)
        return {'success': True, 'exit_code': EXIT_OK, 'message': f"Rendered {args.output}"}

    def cmd_stats(self, args: argparse.Namespace) -> Dict[str, Any]:
        if Path(args.input).is_dir():
            return self._library_stats(args)
        doc = self.data_manager.load_document(args.input)
        stats = document_stats(doc, interior_only=not args.all_faces)
        self._emit(stats)
        return {'success': True, 'exit_code': EXIT_OK, 'message': "Statistics written"}

    def _library_stats(self, args: argparse.Namespace) -> Dict[str, Any]:
        """Statistics for every document in a directory; unreadable files are listed under the summary."""
        library = DataManager(args.input)
        library.load_pattern_files()
        summary = library.get_loading_summary()
        documents = {name: document_stats(library.get_document(name), interior_only=not args.all_faces)
                     for name in summary['available_documents']}
        self._emit({'summary': summary, 'documents': documents})
        if summary['has_errors']:
            return {'success': False, 'exit_code': EXIT_INPUT_ERROR,
                    'message': f"{summary['error_count']} of {summary['error_count'] + summary['total_documents']} "
                               f"files in {args.input} could not be loaded"}
        return {'success': True, 'exit_code': EXIT_OK,
                'message': f"Statistics written for {summary['total_documents']} documents"}

    def run(self, argv: Optional[Sequence[str]] = None) -> int:
        """Parse argv, run the subcommand and return its exit code."""
        parser = build_parser()
        try:
            args = parser.parse_args(argv)
        except SystemExit as e:
            return EXIT_OK if e.code == 0 else EXIT_INPUT_ERROR
        if args.log_level:
            logging.getLogger().setLevel(getattr(logging, args.log_level.upper(), logging.INFO))
        if args.ignore_config:
            self.config_manager.reset_to_defaults()

        handler = getattr(self, f"cmd_{args.command}")
        try:
            result = handler(args)
        except C1Violation as e:
            self.logger.error(str(e))
            return EXIT_VERIFICATION_FAILED
        except LaceForgeError as e:
            self.logger.error(f"{type(e).__name__}: {e}")
            return e.exit_code
        self.logger.info(result['message'])
        return result['exit_code']


def log_configuration_health(config_manager: ConfigManager) -> Dict[str, Any]:
    health = config_manager.get_configuration_health_check()
    for error in health['errors']:
        logger.error(error)
    for warning in health['warnings']:
        logger.warning(warning)
    for recommendation in health['recommendations']:
        logger.info(recommendation)
    logger.debug(config_manager.get_settings_summary())
    return health


def main(argv: Optional[Sequence[str]] = None, config: Optional[Dict[str, Any]] = None) -> int:
    config_manager = ConfigManager()
    if config:
        outcome = config_manager.apply_config(config)
        for error in outcome['errors']:
            logger.warning(f"Ignoring configuration entry {error}")
    log_configuration_health(config_manager)
    return LaceForgeCLI(config_manager).run(argv)


if __name__ == "__main__":
    sys.exit(main())
