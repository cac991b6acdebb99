#pragma once

#include <map>

#include "pss/synth.hpp"

namespace pss::bench {

inline const TriangleMesh& tile(int ground_size) {
  static std::map<int, TriangleMesh> cache;
  auto it = cache.find(ground_size);
  if (it == cache.end()) {
    SynthParams p;
    p.ground_size = ground_size;
    p.boxes = ground_size / 12;
    p.trees = ground_size / 12;
    p.vehicles = ground_size / 24;
    it = cache.emplace(ground_size, synth_tile(p).mesh).first;
  }
  return it->second;
}

}  // namespace pss::bench
