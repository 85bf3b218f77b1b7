#pragma once

#include <cstdint>
#include <vector>

#include "core/vec2.hpp"

namespace intentsim::ptrack {

using SensorId = std::uint32_t;
using TrackId = std::uint32_t;

/// One weighted sample of a tracked object's planar state.
struct Particle {
  Vec2 position;
  Vec2 velocity;
  double weight = 0.0;
};

/// One Gaussian of a belief mixture. Position and velocity blocks are kept
/// as separate 2x2 covariances; the wire format carries no cross terms.
/// The appearance signature travels with the component so a receiver can
/// tell corroboration of its own object from evidence of a second one.
struct GmmComponent {
  TrackId trackId = 0;
  double weight = 0.0;
  Vec2 meanPosition;
  Vec2 meanVelocity;
  Sym2 covPosition = Sym2::isotropic(1.0);
  Sym2 covVelocity = Sym2::isotropic(1.0);
  std::vector<double> appearance;

  /// Density of the position block at p.
  double position_density(const Vec2& p) const;
};

/// The belief one sensor broadcasts: a GMM over object states.
/// Valid when weights sum to 1, covariances are SPD and track ids are unique.
struct GmmBelief {
  SensorId sensor = 0;
  double time = 0.0;
  std::vector<GmmComponent> components;

  bool valid(double weightTol = 1e-6) const;
};

/// Serializes a belief as a length-prefixed little-endian record:
/// u32 payload length, then sensor u32, time f64, component count u16, and
/// per component trackId u32, weight f64, mean 4xf64, covariance upper
/// triangles 3xf64 (position) + 3xf64 (velocity), appearance value count
/// u16 then one f64 per value.
std::vector<std::uint8_t> encode_belief(const GmmBelief& belief);

/// Inverse of encode_belief. Throws Error::Code::Parse on any malformed,
/// truncated or trailing-garbage buffer.
GmmBelief decode_belief(const std::vector<std::uint8_t>& buffer);

}  // namespace intentsim::ptrack
