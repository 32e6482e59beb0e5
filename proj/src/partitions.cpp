#include "lcft/partitions.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <stdexcept>

namespace lcft {

YoungDiagram::YoungDiagram(std::vector<int> parts) : parts_(std::move(parts)) {
  for (std::size_t i = 0; i < parts_.size(); ++i) {
    if (parts_[i] < 1) throw std::invalid_argument("YoungDiagram: parts must be positive");
    if (i > 0 && parts_[i] > parts_[i - 1])
      throw std::invalid_argument("YoungDiagram: parts must be non-increasing");
  }
  size_ = std::accumulate(parts_.begin(), parts_.end(), 0);
}

int YoungDiagram::multiplicity(int k) const {
  return static_cast<int>(std::count(parts_.begin(), parts_.end(), k));
}

YoungDiagram YoungDiagram::append(int n) const {
  if (n < 1) throw std::invalid_argument("append: part must be positive");
  if (!parts_.empty() && n > parts_.back())
    throw std::invalid_argument("append: " + std::to_string(n) + " exceeds last part of " + str());
  YoungDiagram r = *this;
  r.parts_.push_back(n);
  r.size_ += n;
  return r;
}

YoungDiagram YoungDiagram::pop() const {
  if (parts_.empty()) throw std::logic_error("pop on empty diagram");
  YoungDiagram r = *this;
  r.size_ -= r.parts_.back();
  r.parts_.pop_back();
  return r;
}

YoungDiagram YoungDiagram::insert(int n) const {
  if (n < 1) throw std::invalid_argument("insert: part must be positive");
  YoungDiagram r = *this;
  auto it = std::upper_bound(r.parts_.begin(), r.parts_.end(), n, std::greater<int>());
  r.parts_.insert(it, n);
  r.size_ += n;
  return r;
}

YoungDiagram YoungDiagram::remove(int n) const {
  YoungDiagram r = *this;
  auto it = std::find(r.parts_.begin(), r.parts_.end(), n);
  if (it == r.parts_.end()) throw std::logic_error("remove: part not present");
  r.parts_.erase(it);
  r.size_ -= n;
  return r;
}

std::string YoungDiagram::str() const {
  std::string s = "(";
  for (std::size_t i = 0; i < parts_.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(parts_[i]);
  }
  return s + ")";
}

namespace {
void fill(int remaining, int max_part, std::vector<int>& cur, std::vector<YoungDiagram>& out) {
  if (remaining == 0) {
    out.emplace_back(cur);
    return;
  }
  for (int k = std::min(remaining, max_part); k >= 1; --k) {
    cur.push_back(k);
    fill(remaining - k, k, cur, out);
    cur.pop_back();
  }
}
}  // namespace

std::vector<YoungDiagram> enumerate(int n) {
  if (n < 0) throw std::invalid_argument("enumerate: n must be non-negative");
  std::vector<YoungDiagram> out;
  std::vector<int> cur;
  fill(n, n, cur, out);
  return out;
}

}  // namespace lcft
