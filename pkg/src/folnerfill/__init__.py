"""Folner filling for the uniform boundary condition on bar complexes of Z^d."""
from .chains import (QQ, ZZ, Chain, ChainError, MeasuredSet, Ring, StepFunction, chain_add,
                     chain_scale, cross_product, l1_norm, linf)
from .groups import FiniteSubset, FreeAbelian, Odometer, coset_reps, folner_box, s_boundary
from .barcomplex import BarBackend, bar, cone, fill_boundary, full_lift, lift, project, translate, zd

__version__ = "0.1.0"
