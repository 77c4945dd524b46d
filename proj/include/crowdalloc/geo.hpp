#pragma once

#include <cmath>

#include "crowdalloc/errors.hpp"
#include "crowdalloc/geometry.hpp"

namespace crowdalloc {

struct BoundingBox {
  double min_lat = 0.0;
  double min_lon = 0.0;
  double max_lat = 0.0;
  double max_lon = 0.0;

  bool contains(double lat, double lon) const {
    return lat >= min_lat && lat <= max_lat && lon >= min_lon && lon <= max_lon;
  }
  double center_lat() const { return (min_lat + max_lat) / 2.0; }
  double center_lon() const { return (min_lon + max_lon) / 2.0; }
};

// Local equirectangular projection about the box center. The study regions
// span well under a degree, where the distortion is negligible; distances in
// the projected plane are plain Euclidean meters.
class Projection {
 public:
  explicit Projection(const BoundingBox& box)
      : lat0_(box.center_lat()),
        lon0_(box.center_lon()),
        meters_per_lon_(std::cos(lat0_ * kDegToRad) * 111320.0) {}

  PlanarPoint to_plane(double lat, double lon) const {
    double mx = (lon - lon0_) * meters_per_lon_;
    double my = (lat - lat0_) * kMetersPerLat;
    return point_from_meters(mx, my);
  }

  // Inverse of to_plane up to quantization; used when emitting canonical CSVs
  // so that re-ingesting them lands on the same grid cells.
  void to_geo(const PlanarPoint& p, double& lat, double& lon) const {
    double mx = static_cast<double>(p.x) / kUnitsPerMeter;
    double my = static_cast<double>(p.y) / kUnitsPerMeter;
    lon = lon0_ + mx / meters_per_lon_;
    lat = lat0_ + my / kMetersPerLat;
  }

 private:
  static constexpr double kDegToRad = 0.017453292519943295;
  static constexpr double kMetersPerLat = 110540.0;
  double lat0_;
  double lon0_;
  double meters_per_lon_;
};

}  // namespace crowdalloc
