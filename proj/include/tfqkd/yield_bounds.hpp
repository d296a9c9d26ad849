// Copyright 2026 The tfqkd Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <compare>
#include <map>
#include <string>
#include <string_view>
#include <utility>

#include "tfqkd/error.hpp"

namespace tfqkd {

struct YieldIndex {
  int n = 0;
  int m = 0;

  auto operator<=>(const YieldIndex&) const = default;

  YieldIndex swapped() const { return {m, n}; }
};

// The nine yields with analytical upper bounds.
inline constexpr YieldIndex kBoundedYields[] = {
    {0, 0}, {1, 1}, {2, 2}, {0, 2}, {2, 0}, {0, 4}, {4, 0}, {1, 3}, {3, 1}};

enum class BoundSource {
  three_decoy,
  three_decoy_subset,
  four_decoy,
  four_decoy_degenerate,
  theoretical,
  external,
};

inline std::string_view to_string(BoundSource s) {
  switch (s) {
    case BoundSource::three_decoy: return "three-decoy";
    case BoundSource::three_decoy_subset: return "three-decoy-subset";
    case BoundSource::four_decoy: return "four-decoy";
    case BoundSource::four_decoy_degenerate: return "four-decoy-degenerate";
    case BoundSource::theoretical: return "theoretical";
    case BoundSource::external: return "external";
  }
  return "unknown";
}

template <class Real = double>
struct BoundEntry {
  Real value = 1;  // clamped to [0,1]
  Real raw = 1;    // formula value before clamping
  BoundSource source = BoundSource::external;
  std::string detail;
};

// Sparse upper bounds on Y_nm; every index that is not stored is bounded
// by 1.
template <class Real = double>
class YieldBounds {
 public:
  using Entry = BoundEntry<Real>;

  // Stores raw after clamping to [0,1].
  void set(YieldIndex idx, Real raw, BoundSource source,
           std::string detail = {}) {
    Entry e;
    e.raw = raw;
    e.value = raw < Real(0) ? Real(0) : (raw > Real(1) ? Real(1) : raw);
    e.source = source;
    e.detail = std::move(detail);
    entries_[idx] = std::move(e);
  }

  Real get(int n, int m) const {
    auto it = entries_.find({n, m});
    return it == entries_.end() ? Real(1) : it->second.value;
  }
  Real operator()(int n, int m) const { return get(n, m); }

  bool contains(YieldIndex idx) const { return entries_.count(idx) != 0; }

  const Entry& entry(YieldIndex idx) const {
    auto it = entries_.find(idx);
    require(it != entries_.end(), ErrorCode::invalid_argument,
            "no bound stored for the requested index");
    return it->second;
  }

  const std::map<YieldIndex, Entry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }

  YieldBounds swapped() const {
    YieldBounds out;
    for (const auto& [k, v] : entries_) out.entries_[k.swapped()] = v;
    return out;
  }

 private:
  std::map<YieldIndex, Entry> entries_;
};

}  // namespace tfqkd
