#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include "timedeq/errors.hpp"

namespace timedeq {

// Equivalence relation on {0..n-1} in canonical form: blocks are numbered in
// order of their least member.
struct Partition {
  std::vector<int> block;
  int n_blocks = 0;

  static Partition trivial(int n) {
    Partition p;
    p.block.assign(static_cast<size_t>(n), 0);
    p.n_blocks = n > 0 ? 1 : 0;
    return p;
  }

  static Partition discrete(int n) {
    Partition p;
    p.block.resize(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) p.block[static_cast<size_t>(i)] = i;
    p.n_blocks = n;
    return p;
  }

  int size() const { return static_cast<int>(block.size()); }

  void canonicalize() {
    std::map<int, int> renumber;
    int next = 0;
    for (int b : block)
      if (!renumber.count(b)) renumber[b] = next++;
    for (auto& b : block) b = renumber[b];
    n_blocks = next;
  }

  // Group states by equal keys.
  template <class Key>
  static Partition from_keys(const std::vector<Key>& keys) {
    Partition p;
    p.block.resize(keys.size());
    std::map<Key, int> ids;
    for (size_t i = 0; i < keys.size(); ++i) {
      auto [it, fresh] = ids.emplace(keys[i], static_cast<int>(ids.size()));
      p.block[i] = it->second;
    }
    p.canonicalize();
    return p;
  }

  bool same_block(int a, int b) const {
    return block[static_cast<size_t>(a)] == block[static_cast<size_t>(b)];
  }

  // Every block of this partition is contained in a block of `coarser`.
  bool refines(const Partition& coarser) const {
    if (coarser.block.size() != block.size()) return false;
    std::map<int, int> image;
    for (size_t i = 0; i < block.size(); ++i) {
      auto [it, fresh] = image.emplace(block[i], coarser.block[i]);
      if (!fresh && it->second != coarser.block[i]) return false;
    }
    return true;
  }

  // Intersection refinement: split by an additional key family.
  template <class Key>
  Partition refine_by(const std::vector<Key>& keys) const {
    Partition p;
    p.block.resize(block.size());
    std::map<std::pair<int, Key>, int> ids;
    for (size_t i = 0; i < block.size(); ++i) {
      auto [it, fresh] =
          ids.emplace(std::make_pair(block[i], keys[i]), static_cast<int>(ids.size()));
      p.block[i] = it->second;
    }
    p.canonicalize();
    return p;
  }

  Partition merge_blocks(int a, int b) const {
    Partition p = *this;
    for (auto& v : p.block)
      if (v == b) v = a;
    p.canonicalize();
    return p;
  }

  std::vector<std::vector<int>> blocks() const {
    std::vector<std::vector<int>> out(static_cast<size_t>(n_blocks));
    for (size_t i = 0; i < block.size(); ++i)
      out[static_cast<size_t>(block[i])].push_back(static_cast<int>(i));
    return out;
  }

  friend bool operator==(const Partition& a, const Partition& b) {
    return a.block == b.block;
  }
};

}  // namespace timedeq
