"""Certification engine: partitions, rate constants, splittings and band certificates."""

from .partition import SegmentPartition, mirror_labels, partition_orbit
from .rates import EpsSweepReport, RateCertificate, certify_rates, sweep_epsilon
from .splitting import SplittingField, estimate_splitting
from .certificate import PHCertificate, certify_flow_ph, certify_ph, ph_sample_points
from .gluing import SeamReport, seam_check

__all__ = [
    "SegmentPartition", "mirror_labels", "partition_orbit",
    "EpsSweepReport", "RateCertificate", "certify_rates", "sweep_epsilon",
    "SplittingField", "estimate_splitting",
    "PHCertificate", "certify_flow_ph", "certify_ph", "ph_sample_points",
    "SeamReport", "seam_check",
]
