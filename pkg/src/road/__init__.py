"""Shared road input generation."""
from .jdp import JdpParams, RoadRealization, generate_road, road_profile, export_csv, n_samples_for

__all__ = ['JdpParams', 'RoadRealization', 'generate_road', 'road_profile', 'export_csv', 'n_samples_for']
