#include "ptrack/gmm.hpp"

#include <bit>
#include <cmath>
#include <numbers>
#include <unordered_set>

#include "core/error.hpp"

namespace intentsim::ptrack {

namespace {

constexpr std::size_t kHeaderBytes = 4 + 8 + 2;
constexpr std::size_t kComponentFixedBytes = 4 + 8 + 4 * 8 + 3 * 8 + 3 * 8 + 2;

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_f64(std::vector<std::uint8_t>& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
}

struct Reader {
  const std::vector<std::uint8_t>& buf;
  std::size_t pos = 0;

  void need(std::size_t n) const {
    if (pos + n > buf.size())
      throw Error(Error::Code::Parse, "belief record truncated");
  }
  std::uint16_t u16() {
    need(2);
    const std::uint16_t v =
        static_cast<std::uint16_t>(buf[pos] | (buf[pos + 1] << 8));
    pos += 2;
    return v;
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(buf[pos + i]) << (8 * i);
    pos += 4;
    return v;
  }
  double f64() {
    need(8);
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(buf[pos + i]) << (8 * i);
    pos += 8;
    return std::bit_cast<double>(bits);
  }
};

bool finite(const Vec2& v) { return std::isfinite(v.x) && std::isfinite(v.y); }
bool finite(const Sym2& m) {
  return std::isfinite(m.xx) && std::isfinite(m.xy) && std::isfinite(m.yy);
}

}  // namespace

double GmmComponent::position_density(const Vec2& p) const {
  const Sym2 inv = covPosition.inverse();
  const double q = inv.quad(p - meanPosition);
  return std::exp(-0.5 * q) /
         (2.0 * std::numbers::pi * std::sqrt(covPosition.determinant()));
}

bool GmmBelief::valid(double weightTol) const {
  if (!std::isfinite(time)) return false;
  double sum = 0.0;
  std::unordered_set<TrackId> ids;
  for (const GmmComponent& c : components) {
    if (!(c.weight >= 0.0) || !std::isfinite(c.weight)) return false;
    if (!finite(c.meanPosition) || !finite(c.meanVelocity)) return false;
    if (!finite(c.covPosition) || !finite(c.covVelocity)) return false;
    if (!c.covPosition.spd() || !c.covVelocity.spd()) return false;
    if (!ids.insert(c.trackId).second) return false;
    sum += c.weight;
  }
  if (!components.empty() && std::abs(sum - 1.0) > weightTol) return false;
  return true;
}

std::vector<std::uint8_t> encode_belief(const GmmBelief& belief) {
  if (belief.components.size() > 0xFFFF)
    throw Error(Error::Code::InvalidArgument, "belief has too many components to encode");
  std::size_t payload = kHeaderBytes + kComponentFixedBytes * belief.components.size();
  for (const GmmComponent& c : belief.components) {
    if (c.appearance.size() > 0xFFFF)
      throw Error(Error::Code::InvalidArgument, "component appearance too long to encode");
    payload += 8 * c.appearance.size();
  }
  std::vector<std::uint8_t> out;
  out.reserve(4 + payload);
  put_u32(out, static_cast<std::uint32_t>(payload));
  put_u32(out, belief.sensor);
  put_f64(out, belief.time);
  put_u16(out, static_cast<std::uint16_t>(belief.components.size()));
  for (const GmmComponent& c : belief.components) {
    put_u32(out, c.trackId);
    put_f64(out, c.weight);
    put_f64(out, c.meanPosition.x);
    put_f64(out, c.meanPosition.y);
    put_f64(out, c.meanVelocity.x);
    put_f64(out, c.meanVelocity.y);
    put_f64(out, c.covPosition.xx);
    put_f64(out, c.covPosition.xy);
    put_f64(out, c.covPosition.yy);
    put_f64(out, c.covVelocity.xx);
    put_f64(out, c.covVelocity.xy);
    put_f64(out, c.covVelocity.yy);
    put_u16(out, static_cast<std::uint16_t>(c.appearance.size()));
    for (double v : c.appearance) put_f64(out, v);
  }
  return out;
}

GmmBelief decode_belief(const std::vector<std::uint8_t>& buffer) {
  Reader r{buffer};
  const std::uint32_t payload = r.u32();
  if (buffer.size() != 4u + payload)
    throw Error(Error::Code::Parse, "belief length prefix does not match buffer size");

  GmmBelief b;
  b.sensor = r.u32();
  b.time = r.f64();
  const std::uint16_t count = r.u16();
  if (payload < kHeaderBytes + kComponentFixedBytes * count)
    throw Error(Error::Code::Parse, "belief component count does not match payload size");
  b.components.reserve(count);
  for (std::uint16_t i = 0; i < count; ++i) {
    GmmComponent c;
    c.trackId = r.u32();
    c.weight = r.f64();
    c.meanPosition = {r.f64(), r.f64()};
    c.meanVelocity = {r.f64(), r.f64()};
    c.covPosition = {r.f64(), r.f64(), r.f64()};
    c.covVelocity = {r.f64(), r.f64(), r.f64()};
    const std::uint16_t appearanceCount = r.u16();
    c.appearance.reserve(appearanceCount);
    for (std::uint16_t k = 0; k < appearanceCount; ++k) c.appearance.push_back(r.f64());
    b.components.push_back(std::move(c));
  }
  if (r.pos != buffer.size())
    throw Error(Error::Code::Parse, "belief record has trailing bytes");
  return b;
}

}  // namespace intentsim::ptrack
