"""City overlays for map viewers: GeoJSON (primary) and KML.

Coordinates come from a local gazetteer CSV keyed by (city, country) as
produced by the address parser.  Anything implementing `GeocodeLookup` can
stand in for it.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, Optional, Protocol, Sequence
from xml.sax.saxutils import escape

from ..errors import GazetteerMissing, MalformedRow, MissingHeaderTag
from ..indicators import RI3R_MIN_N
from ..inference import Flag, FlaggedResult, flag_for

SIZE_MIN, SIZE_MAX = 4.0, 24.0
PROPERTIES = ("city", "country", "n_papers", "z", "flag", "size", "color")


class Overlay(str, Enum):
    ZTEST = "ztest"
    RI3R = "ri3r"


class GeoFormat(str, Enum):
    GEOJSON = "geojson"
    KML = "kml"


class Color(str, Enum):
    GREEN = "green"
    RED = "red"
    GRAY = "gray"


# KML colours are aabbggrr
_KML_COLORS = {Color.GREEN: "ff00c000", Color.RED: "ff0000ff", Color.GRAY: "ff808080"}


@dataclass(frozen=True)
class GazetteerEntry:
    city: str
    country: str
    latitude: float
    longitude: float

    def __post_init__(self):
        if not -90 <= self.latitude <= 90:
            raise ValueError(f"latitude {self.latitude} out of range")
        if not -180 <= self.longitude <= 180:
            raise ValueError(f"longitude {self.longitude} out of range")


class GeocodeLookup(Protocol):
    def locate(self, city: str, country: str) -> Optional[tuple[float, float]]:
        ...


class Gazetteer:
    def __init__(self, entries: Iterable[GazetteerEntry] = ()):
        self._entries = {}
        for e in entries:
            key = (e.city, e.country)
            if key in self._entries:
                raise ValueError(f"duplicate gazetteer entry {key}")
            self._entries[key] = e

    def __len__(self):
        return len(self._entries)

    def locate(self, city, country):
        e = self._entries.get((city, country))
        return None if e is None else (e.latitude, e.longitude)

    @classmethod
    def load(cls, path) -> "Gazetteer":
        path = Path(path)
        if not path.is_file():
            raise GazetteerMissing(f"gazetteer not found: {path}")
        with open(path, newline="", encoding="utf-8-sig") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None or not {"city", "country", "lat", "lon"} <= set(reader.fieldnames):
                raise MissingHeaderTag("city,country,lat,lon")
            entries = []
            for lineno, row in enumerate(reader, start=2):
                try:
                    entries.append(GazetteerEntry(row["city"].strip(), row["country"].strip(),
                                                  float(row["lat"]), float(row["lon"])))
                except ValueError as exc:
                    raise MalformedRow(lineno, str(exc)) from None
        return cls(entries)


@dataclass(frozen=True)
class CityResult:
    city_key: str
    n_papers: float
    z: float
    flag: Flag


@dataclass(frozen=True)
class MapNode:
    city: str
    country: str
    latitude: float
    longitude: float
    n_papers: float
    z: float
    flag: Flag
    size: float
    color: Color


def node_size(n_papers: float, n_max: float) -> float:
    """Marker size growing with log10(1 + papers), from 4 (none) to 24 (largest)."""
    if n_max <= 0:
        return SIZE_MIN
    return SIZE_MIN + (SIZE_MAX - SIZE_MIN) * math.log10(1 + n_papers) / math.log10(1 + n_max)


def node_color(flag: Flag) -> Color:
    if flag.above:
        return Color.GREEN
    if flag.below:
        return Color.RED
    return Color.GRAY


def split_city_key(key: str) -> tuple[str, str]:
    city, _, country = key.partition(", ")
    return city, country


def city_results(flagged: Sequence[FlaggedResult], overlay=Overlay.ZTEST,
                 min_n: int = RI3R_MIN_N) -> tuple[list[CityResult], list[tuple[str, str]]]:
    """Pick the z feeding the overlay; RI3R mode drops cities below `min_n` papers."""
    overlay = Overlay(overlay)
    out, skipped = [], []
    for f in flagged:
        r = f.result
        if overlay is Overlay.ZTEST:
            out.append(CityResult(r.unit_id, r.n_papers, f.i3_test.z, f.i3_test.flag))
        elif r.ri3r_z is None or r.n_papers < min_n:
            skipped.append((r.unit_id, f"fewer than {min_n} papers"))
        else:
            out.append(CityResult(r.unit_id, r.n_papers, r.ri3r_z, flag_for(r.ri3r_z)))
    return out, skipped


def map_nodes(results: Sequence[CityResult], lookup: GeocodeLookup) -> tuple[list[MapNode], list[tuple[str, str]]]:
    n_max = max((c.n_papers for c in results), default=0)
    nodes, skipped = [], []
    for c in sorted(results, key=lambda c: c.city_key):
        city, country = split_city_key(c.city_key)
        where = lookup.locate(city, country)
        if where is None:
            skipped.append((c.city_key, "not in gazetteer"))
            continue
        nodes.append(MapNode(city, country, where[0], where[1], c.n_papers, c.z, c.flag,
                             node_size(c.n_papers, n_max), node_color(c.flag)))
    return nodes, skipped


def _n(x: float):
    return int(round(x)) if abs(x - round(x)) < 1e-9 else round(x, 4)


def geojson(nodes: Sequence[MapNode]) -> dict:
    features = []
    for n in nodes:
        features.append({
            "type": "Feature",
            "geometry": {"type": "Point", "coordinates": [n.longitude, n.latitude]},
            "properties": {
                "city": n.city,
                "country": n.country,
                "n_papers": _n(n.n_papers),
                "z": round(n.z, 3),
                "flag": str(n.flag),
                "size": round(n.size, 3),
                "color": n.color.value,
            },
        })
    return {"type": "FeatureCollection", "features": features}


def kml(nodes: Sequence[MapNode], name: str = "i3 overlay") -> str:
    lines = ['<?xml version="1.0" encoding="UTF-8"?>',
             '<kml xmlns="http://www.opengis.net/kml/2.2">',
             "<Document>",
             f"  <name>{escape(name)}</name>"]
    for n in nodes:
        label = escape(f"{n.city}, {n.country}")
        lines += [
            "  <Placemark>",
            f"    <name>{label}</name>",
            f"    <description>papers={_n(n.n_papers)} z={n.z:.3f} flag={escape(str(n.flag))}</description>",
            "    <Style><IconStyle>",
            f"      <color>{_KML_COLORS[n.color]}</color>",
            f"      <scale>{n.size / 8:.3f}</scale>",
            "    </IconStyle></Style>",
            f"    <Point><coordinates>{n.longitude},{n.latitude},0</coordinates></Point>",
            "  </Placemark>",
        ]
    lines += ["</Document>", "</kml>"]
    return "\n".join(lines) + "\n"


def emit_geo_overlay(results: Sequence[CityResult], lookup: Optional[GeocodeLookup], path,
                     format=GeoFormat.GEOJSON, skip_path=None) -> tuple[list[MapNode], list[tuple[str, str]]]:
    if lookup is None:
        raise GazetteerMissing("no gazetteer loaded")
    nodes, skipped = map_nodes(results, lookup)
    if GeoFormat(format) is GeoFormat.GEOJSON:
        text = json.dumps(geojson(nodes), indent=2, ensure_ascii=False) + "\n"
    else:
        text = kml(nodes)
    Path(path).write_text(text, encoding="utf-8")
    if skip_path is not None:
        write_geo_skips(skipped, skip_path)
    return nodes, skipped


def write_geo_skips(skipped: Sequence[tuple[str, str]], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["city", "reason"])
        w.writerows(skipped)
