#include "minid/partitions.hpp"

#include <algorithm>
#include <stdexcept>

namespace minid {

int block_count(const Rgs& r) {
  int m = -1;
  for (int v : r) m = std::max(m, v);
  return m + 1;
}

Rgs canonicalize(const std::vector<int>& labels) {
  Rgs out(labels.size());
  std::vector<int> seen; // original label -> canonical index, in first-use order
  for (std::size_t k = 0; k < labels.size(); ++k) {
    auto it = std::find(seen.begin(), seen.end(), labels[k]);
    if (it == seen.end()) {
      seen.push_back(labels[k]);
      out[k] = static_cast<int>(seen.size()) - 1;
    } else {
      out[k] = static_cast<int>(it - seen.begin());
    }
  }
  return out;
}

std::vector<std::vector<int>> blocks_of(const Rgs& r) {
  std::vector<std::vector<int>> out(block_count(r));
  for (std::size_t k = 0; k < r.size(); ++k) out[r[k]].push_back(static_cast<int>(k));
  return out;
}

namespace {

void recurse(Rgs& r, int k, int maxlbl, const std::function<void(const Rgs&)>& visit) {
  if (k == static_cast<int>(r.size())) {
    visit(r);
    return;
  }
  for (int v = 0; v <= maxlbl + 1; ++v) {
    r[k] = v;
    recurse(r, k + 1, std::max(maxlbl, v), visit);
  }
}

} // namespace

void for_each_partition(int n, const std::function<void(const Rgs&)>& visit) {
  if (n <= 0) return;
  Rgs r(n, 0);
  recurse(r, 1, 0, visit);
}

void for_each_partition_of(const std::vector<int>& items,
                           const std::function<void(const std::vector<std::vector<int>>&)>& visit) {
  const int n = static_cast<int>(items.size());
  if (n == 0) return;
  for_each_partition(n, [&](const Rgs& r) {
    auto idx = blocks_of(r);
    std::vector<std::vector<int>> mapped(idx.size());
    for (std::size_t b = 0; b < idx.size(); ++b)
      for (int k : idx[b]) mapped[b].push_back(items[k]);
    visit(mapped);
  });
}

std::uint64_t bell_number(int n) {
  if (n < 0 || n > 25) throw std::invalid_argument("bell_number: n out of range");
  // Bell triangle.
  std::vector<std::uint64_t> prev{1}, cur;
  for (int row = 1; row <= n; ++row) {
    cur.assign(1, prev.back());
    for (std::size_t k = 0; k + 1 < static_cast<std::size_t>(row); ++k)
      cur.push_back(cur[k] + prev[k]);
    if (row < n) prev = cur;
  }
  return n == 0 ? 1 : cur.back();
}

std::string rgs_to_string(const Rgs& r) {
  std::string s;
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(r[i]);
  }
  return s;
}

Rgs rgs_from_string(const std::string& s) {
  Rgs out;
  std::size_t pos = 0;
  while (pos < s.size()) {
    std::size_t next = s.find(',', pos);
    if (next == std::string::npos) next = s.size();
    out.push_back(std::stoi(s.substr(pos, next - pos)));
    pos = next + 1;
  }
  // Reject non-canonical strings early; every producer emits canonical form.
  int maxlbl = -1;
  for (std::size_t k = 0; k < out.size(); ++k) {
    if (out[k] < 0 || out[k] > maxlbl + 1)
      throw std::invalid_argument("partition string is not in restricted-growth form");
    maxlbl = std::max(maxlbl, out[k]);
  }
  return out;
}

} // namespace minid
