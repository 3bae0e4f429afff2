"""Siegel disks, bubbles and multi-angles for quadratic and cubic polynomials with a
bounded-type rotation number, and the parameter map from cubics to the quadratic model."""
from .errors import DomainError, EscapeError, PoleError, PullbackError, UnresolvedError
from .rotation import RotationNumber, parse_rotation
from .multiangle import IllegalMultiAngle, MultiAngle, MultiAngleStream, pi_orbit, pi_step, validate
from .dynamics import CubicMap, FigOneMap, PolynomialMap, QuadraticMap
from .siegel import SiegelModel, build_model
from .bubbles import Bubble, BubbleTree, build_bubble_tree, bubble_chain, trace_bubble_ray
from .model import ModelPoint, ModelTrees, eta_eval, locate_point, phi, quotient_project, symmetry_residual
from .render import RenderConfig, Raster, render_dynamical_plane, render_parameter_plane, write_ppm

__version__ = "0.1.0"
