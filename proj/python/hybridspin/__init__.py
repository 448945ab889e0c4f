"""Spin physics of NV / V_B- hybrid sensors."""

from ._core import *  # noqa: F401,F403
from ._core import HybridSpinError, __version__

NV = dict(name="nv", d_gs_mhz=2870.0, d_es_mhz=1420.0, gamma_e_mhz_per_mt=28.025, axis=(1.0, 1.0, 1.0))
VB = dict(name="vb", d_gs_mhz=3470.0, d_es_mhz=2100.0, gamma_e_mhz_per_mt=28.025, axis=(0.0, 0.0, 1.0))
