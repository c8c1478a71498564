#include "revfield/combinatorics.hpp"

#include <algorithm>
#include <functional>

#include "revfield/error.hpp"

namespace revfield {

namespace {

void check_shape(const Involution& tau) {
  if (tau.k < 0) fail(ErrorCode::Validation, "involution: k must be nonnegative");
  if (tau.map.size() != static_cast<std::size_t>(tau.k) + 1)
    fail(ErrorCode::Validation, "involution: map must have k+1 entries");
  for (int v : tau.map)
    if (v < 0 || v > tau.k) fail(ErrorCode::Validation, "involution: entry out of range");
}

void require_valid(const Involution& tau) {
  if (!is_valid_involution(tau)) fail(ErrorCode::Validation, "involution: not a valid combinatorial invariant");
}

}  // namespace

std::string DispersedDyckPath::str() const {
  std::string out;
  out.reserve(steps.size());
  for (Step s : steps) out.push_back(static_cast<char>(s));
  return out;
}

DispersedDyckPath DispersedDyckPath::parse(std::string_view text) {
  DispersedDyckPath path;
  for (char ch : text) {
    switch (ch) {
      case 'U': case 'u': path.steps.push_back(Step::Up); break;
      case 'D': case 'd': path.steps.push_back(Step::Down); break;
      case 'F': case 'f': path.steps.push_back(Step::Flat); break;
      default: fail(ErrorCode::Validation, std::string("path: unexpected character '") + ch + "'");
    }
  }
  return path;
}

bool is_valid_involution(const Involution& tau) {
  check_shape(tau);
  const auto& t = tau.map;
  const int n = tau.k + 1;
  for (int i = 0; i < n; ++i)
    if (t[t[i]] != i) return false;
  for (int i = 0; i < n; ++i) {
    if (t[i] <= i) continue;
    for (int j = i + 1; j < t[i]; ++j) {
      if (t[j] == j) return false;          // fixed point inside an arc
      if (t[j] > t[i] || t[j] < i) return false;  // crossing arcs
    }
  }
  return true;
}

DispersedDyckPath involution_to_dyck(const Involution& tau) {
  require_valid(tau);
  DispersedDyckPath path;
  path.steps.reserve(tau.map.size());
  for (int j = 0; j <= tau.k; ++j) {
    const int image = tau.map[j];
    path.steps.push_back(image > j ? Step::Up : image < j ? Step::Down : Step::Flat);
  }
  return path;
}

Involution dyck_to_involution(const DispersedDyckPath& path) {
  if (path.steps.empty()) fail(ErrorCode::Validation, "path: empty path has no involution");
  Involution tau{static_cast<int>(path.steps.size()) - 1, std::vector<int>(path.steps.size())};
  std::vector<int> open;  // Up steps awaiting their Down step, one per height level
  for (int j = 0; j <= tau.k; ++j) {
    switch (path.steps[j]) {
      case Step::Flat:
        if (!open.empty()) fail(ErrorCode::Validation, "path: flat step at positive height");
        tau.map[j] = j;
        break;
      case Step::Up:
        open.push_back(j);
        break;
      case Step::Down:
        if (open.empty()) fail(ErrorCode::Validation, "path: negative height");
        tau.map[j] = open.back();
        tau.map[open.back()] = j;
        open.pop_back();
        break;
    }
  }
  if (!open.empty()) fail(ErrorCode::Validation, "path: does not return to height 0");
  return tau;
}

Involution involution_from_string(std::string_view udf) {
  return dyck_to_involution(DispersedDyckPath::parse(udf));
}

std::vector<Involution> enumerate_strata(int k, int max_k) {
  if (k < 0) fail(ErrorCode::Validation, "enumerate_strata: k must be nonnegative");
  if (k > max_k) fail(ErrorCode::Capacity, "enumerate_strata: k exceeds configured maximum " + std::to_string(max_k));
  const int n = k + 1;
  std::vector<Involution> out;
  out.reserve(count_dispersed_dyck(n));
  DispersedDyckPath path;
  path.steps.reserve(n);
  std::function<void(int, int)> grow = [&](int pos, int height) {
    const int remaining = n - pos;
    if (remaining == 0) {
      if (height == 0) out.push_back(dyck_to_involution(path));
      return;
    }
    if (height > remaining) return;
    if (height == 0) {
      path.steps.push_back(Step::Flat);
      grow(pos + 1, 0);
      path.steps.pop_back();
    }
    if (height + 1 <= remaining - 1) {
      path.steps.push_back(Step::Up);
      grow(pos + 1, height + 1);
      path.steps.pop_back();
    }
    if (height > 0) {
      path.steps.push_back(Step::Down);
      grow(pos + 1, height - 1);
      path.steps.pop_back();
    }
  };
  grow(0, 0);
  std::sort(out.begin(), out.end(), [](const Involution& x, const Involution& y) { return x.map < y.map; });
  return out;
}

std::uint64_t binomial(int n, int r) {
  if (n < 0 || r < 0 || r > n) return 0;
  r = std::min(r, n - r);
  unsigned __int128 acc = 1;
  for (int i = 0; i < r; ++i) {
    acc = acc * static_cast<unsigned>(n - i) / static_cast<unsigned>(i + 1);
    if (acc > UINT64_MAX) fail(ErrorCode::Capacity, "binomial: result exceeds 64 bits");
  }
  return static_cast<std::uint64_t>(acc);
}

std::uint64_t count_strata(int k) {
  if (k < -1) fail(ErrorCode::Domain, "count_strata: k must be >= -1");
  if (k > 60) fail(ErrorCode::Capacity, "count_strata: k must be <= 60");
  return binomial(k + 1, (k + 1) / 2);
}

std::uint64_t count_dispersed_dyck(int n) {
  if (n < 0) fail(ErrorCode::Domain, "count_dispersed_dyck: n must be nonnegative");
  return binomial(n, n / 2);
}

std::uint64_t count_des_strata(int k) {
  if (k < 0) fail(ErrorCode::Domain, "count_des_strata: k must be nonnegative");
  // C(k) = binom(2k, k) - binom(2k, k+1) avoids the division.
  return binomial(2 * k, k) - binomial(2 * k, k + 1);
}

StratumSignature signature(const Involution& tau) {
  require_valid(tau);
  StratumSignature sig;
  int j = 0;
  while (j <= tau.k) {
    // Non-crossing and interval preservation make [j, tau(j)] the minimal
    // ordered invariant block starting at j.
    const int end = std::max(j, tau.map[j]);
    std::vector<int> block;
    for (int i = j; i <= end; ++i) block.push_back(i);
    if (block.size() == 1) ++sig.m;
    sig.blocks.push_back(std::move(block));
    j = end + 1;
  }
  sig.h = static_cast<int>(sig.blocks.size()) - 1;
  sig.a = sig.h;
  sig.b = sig.h + 1 - sig.m;
  sig.c = (tau.k - 2 * sig.h + sig.m - 1) / 2;
  return sig;
}

AttachmentData attachment(const Involution& tau) {
  const StratumSignature sig = signature(tau);
  AttachmentData data;
  for (std::size_t q = 1; q < sig.blocks.size(); ++q) data.homoclinic_indices.push_back(sig.blocks[q].front());
  for (const auto& block : sig.blocks) {
    if (block.size() == 1) continue;
    BlockAttachment att{block.front(), block.back(), {}};
    const int lo = att.first + 1;
    const int hi = att.last;
    std::vector<bool> seen(static_cast<std::size_t>(hi - lo + 1), false);
    for (int start = lo; start <= hi; ++start) {
      if (seen[start - lo]) continue;
      std::vector<int> cycle;
      int h = start;
      while (!seen[h - lo]) {
        seen[h - lo] = true;
        cycle.push_back(h);
        h = tau.map[h - 1];
        if (h < lo || h > hi) fail(ErrorCode::Consistency, "attachment: landing permutation leaves its block");
      }
      std::sort(cycle.begin(), cycle.end());
      att.classes.push_back(std::move(cycle));
    }
    data.blocks.push_back(std::move(att));
  }
  return data;
}

}  // namespace revfield
