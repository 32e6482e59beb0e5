#pragma once

#include <compare>
#include <string>
#include <vector>

namespace lcft {

// Non-increasing sequence of positive integers. The empty diagram is the
// unique partition of 0.
class YoungDiagram {
 public:
  YoungDiagram() = default;
  explicit YoungDiagram(std::vector<int> parts);

  const std::vector<int>& parts() const { return parts_; }
  int size() const { return size_; }
  int length() const { return static_cast<int>(parts_.size()); }
  bool empty() const { return parts_.empty(); }
  int last() const { return parts_.back(); }
  int multiplicity(int k) const;

  // (nu_1, ..., nu_k, n); requires n <= last part.
  YoungDiagram append(int n) const;
  // Drops the last (smallest) part.
  YoungDiagram pop() const;
  // Inserts n at its sorted position (multiset semantics).
  YoungDiagram insert(int n) const;
  // Removes one copy of n; requires multiplicity(n) > 0.
  YoungDiagram remove(int n) const;

  std::string str() const;

  bool operator==(const YoungDiagram& o) const { return parts_ == o.parts_; }
  std::strong_ordering operator<=>(const YoungDiagram& o) const {
    return parts_ <=> o.parts_;
  }

 private:
  std::vector<int> parts_;
  int size_ = 0;
};

// All partitions of n, lexicographically decreasing: (n), (n-1,1), ...
std::vector<YoungDiagram> enumerate(int n);

}  // namespace lcft
