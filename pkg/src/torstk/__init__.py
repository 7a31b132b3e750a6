"""Exact lattice, fan and Euler-characteristic computations for toric stacks."""

from .lattice import FinAbGroup, LatticeMap, cokernel_group, kernel_basis, saturate, smith_normal_form
from .polyhedra import LCRegion, arrangement_cells
from .cones import (
    Cone,
    Fan,
    FanMorphism,
    complete_fan,
    cone_from_rays,
    dual_cone,
    fan_morphism,
    fan_relate,
    fan_validate,
    is_complete,
    is_proper,
    smooth_refine,
    star_quotient,
)
from .stacky import (
    StackyFan,
    StackyMorphism,
    abc_factorization,
    classify,
    factor_group_change,
    gs_convert,
    stacky_morphism,
    torus_data,
    validate_stacky,
)
from .skeleton import (
    CovectorPoint,
    Skeleton,
    decide_left_functorial,
    decide_right_functorial,
    fltz_skeleton,
    pushforward_skeleton,
    skeleton_member,
    skeleton_subset,
)
from .euler import ConFun, SheafSymbol, confun_convolve, confun_equal, confun_pushforward, region_chi, unit_chi

__version__ = "0.1.0"
