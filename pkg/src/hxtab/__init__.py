"""Tableau reasoning for hybrid XPath with data comparisons."""

from .semantics import DataModel, check_node, check_path, frame_of
from .syntax import parse_node, parse_path, print_node, print_path, size
from .tableau import FrameClass, Sat, Unknown, Unsat, extract_model, saturate

__all__ = ["DataModel", "FrameClass", "Sat", "Unknown", "Unsat", "check_node", "check_path",
           "extract_model", "frame_of", "parse_node", "parse_path", "print_node",
           "print_path", "saturate", "size"]
