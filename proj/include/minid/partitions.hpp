#pragma once

// Set partitions in restricted-growth form.  A labels vector r of length n is
// canonical when r[0] == 0 and r[k] <= 1 + max(r[0..k-1]); blocks are the
// label classes.  Canonical form is the stored and serialized representation
// of hitting scenarios.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace minid {

using Rgs = std::vector<int>;

// Number of blocks of a canonical string.
int block_count(const Rgs& r);

// Relabel arbitrary block labels into canonical restricted-growth form.
Rgs canonicalize(const std::vector<int>& labels);

// Member lists per block, in label order.
std::vector<std::vector<int>> blocks_of(const Rgs& r);

// Visit every partition of {0..n-1} in canonical form.  Bell(n) visits.
void for_each_partition(int n, const std::function<void(const Rgs&)>& visit);

// Visit every partition of the given items (values are passed through).
void for_each_partition_of(const std::vector<int>& items,
                           const std::function<void(const std::vector<std::vector<int>>&)>& visit);

// Bell numbers; n <= 25 supported.
std::uint64_t bell_number(int n);

// "0,0,1,2" <-> labels, used by the posterior dump format.
std::string rgs_to_string(const Rgs& r);
Rgs rgs_from_string(const std::string& s);

} // namespace minid
