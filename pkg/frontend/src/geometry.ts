import type { Feature, Geometry } from "./types.js";

/** Plate-carree projection of GeoJSON polygons into an SVG viewport.
 * The boundary fixture is already in lon/lat; nothing fancier is needed
 * for county-scale choropleths. */

export interface Projection {
  scale: number;
  offsetX: number;
  offsetY: number;
  maxLat: number;
}

function eachPosition(geometry: Geometry, visit: (lon: number, lat: number) => void): void {
  const polygons = geometry.type === "Polygon"
    ? [geometry.coordinates]
    : geometry.coordinates;
  for (const polygon of polygons) {
    for (const ring of polygon) {
      for (const [lon, lat] of ring) {
        visit(lon, lat);
      }
    }
  }
}

export function fitProjection(features: Feature[], width: number, height: number,
                              padding = 8): Projection {
  let minLon = Infinity, maxLon = -Infinity, minLat = Infinity, maxLat = -Infinity;
  for (const feature of features) {
    if (!feature.geometry) {
      continue;
    }
    eachPosition(feature.geometry, (lon, lat) => {
      minLon = Math.min(minLon, lon);
      maxLon = Math.max(maxLon, lon);
      minLat = Math.min(minLat, lat);
      maxLat = Math.max(maxLat, lat);
    });
  }
  if (!isFinite(minLon)) {
    return { scale: 1, offsetX: 0, offsetY: 0, maxLat: 0 };
  }
  const spanLon = Math.max(maxLon - minLon, 1e-9);
  const spanLat = Math.max(maxLat - minLat, 1e-9);
  const scale = Math.min((width - 2 * padding) / spanLon,
                         (height - 2 * padding) / spanLat);
  return {
    scale,
    offsetX: padding - minLon * scale,
    offsetY: padding,
    maxLat,
  };
}

export function project(projection: Projection,
                        lon: number, lat: number): [number, number] {
  return [
    lon * projection.scale + projection.offsetX,
    (projection.maxLat - lat) * projection.scale + projection.offsetY,
  ];
}

/** SVG path string for one feature under the projection. */
export function featurePath(feature: Feature, projection: Projection): string {
  if (!feature.geometry) {
    return "";
  }
  const polygons = feature.geometry.type === "Polygon"
    ? [feature.geometry.coordinates]
    : feature.geometry.coordinates;
  const parts: string[] = [];
  for (const polygon of polygons) {
    for (const ring of polygon) {
      const commands = ring.map(([lon, lat], i) => {
        const [x, y] = project(projection, lon, lat);
        return `${i === 0 ? "M" : "L"}${round2(x)},${round2(y)}`;
      });
      parts.push(commands.join("") + "Z");
    }
  }
  return parts.join("");
}

function round2(x: number): number {
  return Math.round(x * 100) / 100;
}
