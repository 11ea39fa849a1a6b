#include "cellfree/seeding.hpp"

#include <array>

namespace cellfree {

Rng derive_stream(const SeedPath& path) {
  auto lo = [](std::uint64_t v) { return static_cast<std::uint32_t>(v); };
  auto hi = [](std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); };
  // Fixed domain tag first so a zero tuple still seeds a non-trivial state.
  const std::array<std::uint32_t, 10> words = {
      0x63666d6du,  // "cfmm"
      lo(path.master_seed),    hi(path.master_seed),
      lo(path.drop_id),        hi(path.drop_id),
      lo(path.realization_id), hi(path.realization_id),
      lo(path.ap_id),          hi(path.ap_id),
      static_cast<std::uint32_t>(path.purpose)};
  std::seed_seq seq(words.begin(), words.end());
  return Rng(seq);
}

}  // namespace cellfree
