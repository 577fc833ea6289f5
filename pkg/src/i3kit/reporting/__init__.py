from .geo import (
    CityResult,
    GazetteerEntry,
    Gazetteer,
    GeocodeLookup,
    GeoFormat,
    MapNode,
    Overlay,
    city_results,
    emit_geo_overlay,
    node_size,
)
from .pajek import emit_pajek
from .tables import emit_cores, emit_edges, emit_rank_table, emit_ri3r, emit_ztest, write_indicators

__all__ = [
    "CityResult",
    "GazetteerEntry",
    "Gazetteer",
    "GeocodeLookup",
    "GeoFormat",
    "MapNode",
    "Overlay",
    "city_results",
    "emit_cores",
    "emit_edges",
    "emit_geo_overlay",
    "emit_pajek",
    "emit_rank_table",
    "emit_ri3r",
    "emit_ztest",
    "node_size",
    "write_indicators",
]
