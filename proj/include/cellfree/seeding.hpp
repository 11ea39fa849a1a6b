#pragma once

#include <cstdint>
#include <random>

namespace cellfree {

using Rng = std::mt19937_64;

enum class Purpose : std::uint32_t {
  Geometry = 1,       // UE placement and shadowing of a drop
  Channel = 2,        // (H[t-d], H[t]) pair of a realization
  PiSampling = 3,     // conditional samples for Π estimation
  LocalMeans = 4,     // marginal samples for the local team stages
  Perturbation = 5,   // verification perturbations
  Bootstrap = 6,
};

/// Identifies one independent random stream. Streams are derived from the
/// whole tuple at once, never by advancing a parent generator, so a stream's
/// contents do not depend on which other streams were drawn or in what order.
struct SeedPath {
  std::uint64_t master_seed = 0;
  std::uint64_t drop_id = 0;
  std::uint64_t realization_id = 0;
  std::uint64_t ap_id = 0;
  Purpose purpose = Purpose::Channel;

  SeedPath with_ap(std::uint64_t ap) const {
    SeedPath s = *this;
    s.ap_id = ap;
    return s;
  }
  SeedPath with_purpose(Purpose p) const {
    SeedPath s = *this;
    s.purpose = p;
    return s;
  }
  SeedPath with_realization(std::uint64_t r) const {
    SeedPath s = *this;
    s.realization_id = r;
    return s;
  }
};

Rng derive_stream(const SeedPath& path);

}  // namespace cellfree
