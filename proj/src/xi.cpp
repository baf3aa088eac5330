#include "sci/xi.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sci {

namespace {
std::uint64_t checked_add(std::uint64_t a, std::uint64_t b) {
  if (a > UINT64_MAX - b) throw std::overflow_error("TupleCodec: overflow");
  return a + b;
}
}  // namespace

std::uint64_t TupleCodec::pair(std::uint64_t a, std::uint64_t b) const {
  const std::uint64_t s = checked_add(a, b);
  if (s > 4294967290ULL) throw std::overflow_error("TupleCodec: pairing overflow");
  return s * (s + 1) / 2 + b;
}

std::pair<std::uint64_t, std::uint64_t> TupleCodec::unpair(std::uint64_t n) const {
  // s = floor((sqrt(8n+1)-1)/2), corrected for floating rounding.
  std::uint64_t s = static_cast<std::uint64_t>(
      (std::sqrt(8.0 * static_cast<double>(n) + 1.0) - 1.0) / 2.0);
  while (s * (s + 1) / 2 > n) --s;
  while ((s + 1) * (s + 2) / 2 <= n) ++s;
  const std::uint64_t b = n - s * (s + 1) / 2;
  return {s - b, b};
}

std::uint64_t TupleCodec::encode(const std::vector<std::uint64_t>& tuple) const {
  if (tuple.empty()) throw std::invalid_argument("TupleCodec: empty tuple");
  std::uint64_t acc = tuple[0];
  for (std::size_t i = 1; i < tuple.size(); ++i) acc = pair(acc, tuple[i]);
  return acc;
}

std::vector<std::uint64_t> TupleCodec::decode(std::uint64_t n, int m) const {
  if (m < 1) throw std::invalid_argument("TupleCodec: m >= 1 required");
  std::vector<std::uint64_t> tuple(static_cast<std::size_t>(m));
  for (int i = m - 1; i >= 1; --i) {
    auto [a, b] = unpair(n);
    tuple[static_cast<std::size_t>(i)] = b;
    n = a;
  }
  tuple[0] = n;
  return tuple;
}

std::pair<std::uint64_t, std::uint64_t> TupleCodec::encode_tuple(
    const std::vector<std::uint64_t>& tuple) const {
  return unpair(encode(tuple));
}

std::vector<std::uint64_t> TupleCodec::decode_entry(std::uint64_t i, std::uint64_t j,
                                                    int m) const {
  return decode(pair(i, j), m);
}

MatrixOracle::MatrixOracle(EntryFn entry, std::string kind)
    : entry_(std::move(entry)), kind_(std::move(kind)) {}

int MatrixOracle::entry(std::uint64_t i, std::uint64_t j) const {
  std::lock_guard<std::mutex> lk(mu_);
  const auto key = std::make_pair(i, j);
  auto it = memo_.find(key);
  if (it != memo_.end()) return it->second;
  const int v = entry_(i, j);
  if (v != 0 && v != 1) throw std::logic_error("MatrixOracle: entries must be 0/1");
  memo_.emplace(key, v);
  log_.push_back(key);
  return v;
}

std::vector<std::pair<std::uint64_t, std::uint64_t>> MatrixOracle::query_log() const {
  std::lock_guard<std::mutex> lk(mu_);
  return log_;
}

std::size_t MatrixOracle::query_count() const {
  std::lock_guard<std::mutex> lk(mu_);
  return log_.size();
}

ThresholdedOracle make_thresholded(int m, int T,
                                   std::function<int(const std::vector<std::uint64_t>&)> base,
                                   const TupleCodec& codec) {
  if (m < 1 || T < 0) throw std::invalid_argument("make_thresholded: need m >= 1, T >= 0");
  ThresholdedOracle inst;
  inst.m = m;
  inst.T = T;
  inst.base = base;
  const std::uint64_t clamp = static_cast<std::uint64_t>(T) + 1;
  inst.oracle = std::make_shared<MatrixOracle>(
      [m, clamp, base, codec](std::uint64_t i, std::uint64_t j) {
        auto tuple = codec.decode_entry(i, j, m);
        for (auto& c : tuple) {
          if (c == 0) return 0;  // outside the quantifier range n >= 1
          c = std::min(c, clamp);
        }
        return base(tuple);
      },
      "thresholded");
  return inst;
}

namespace {

int quantifier_value(const std::function<int(const std::vector<std::uint64_t>&)>& atom, int m,
                     const std::vector<std::uint64_t>& bounds) {
  std::vector<std::uint64_t> tuple(static_cast<std::size_t>(m));
  // level r is existential when odd (1-based): Q1 = exists.
  std::function<int(int)> rec = [&](int r) -> int {
    const bool exists = (r % 2) == 1;
    int acc = exists ? 0 : 1;
    for (std::uint64_t v = 1; v <= bounds[static_cast<std::size_t>(r - 1)]; ++v) {
      tuple[static_cast<std::size_t>(r - 1)] = v;
      const int inner = (r == m) ? atom(tuple) : rec(r + 1);
      if (exists) acc = std::max(acc, inner);
      else acc = std::min(acc, inner);
      if (exists && acc == 1) break;
      if (!exists && acc == 0) break;
    }
    return acc;
  };
  return rec(1);
}

}  // namespace

int xi_exact(const ThresholdedOracle& inst) {
  if (!inst.base) throw std::domain_error("xi_exact: ground truth needs a thresholded oracle");
  const std::uint64_t clamp = static_cast<std::uint64_t>(inst.T) + 1;
  const std::vector<std::uint64_t> bounds(static_cast<std::size_t>(inst.m), clamp);
  return quantifier_value(inst.base, inst.m, bounds);
}

int xi_tower_cell(const MatrixOracle& A, int m, const std::vector<std::uint64_t>& bounds,
                  const TupleCodec& codec) {
  if (static_cast<int>(bounds.size()) != m)
    throw std::invalid_argument("xi_tower_cell: one bound per quantifier level");
  for (auto b : bounds)
    if (b < 1) throw std::invalid_argument("xi_tower_cell: bounds must be >= 1");
  // Query every cell entry first (the information-based budget is exactly
  // prod N_r), then evaluate the alternation on the memoized values. The
  // codec must stay injective on every queried tuple.
  std::vector<std::uint64_t> tuple(static_cast<std::size_t>(m), 1);
  std::map<std::pair<std::uint64_t, std::uint64_t>, std::vector<std::uint64_t>> seen;
  std::function<void(int)> touch = [&](int r) {
    for (std::uint64_t v = 1; v <= bounds[static_cast<std::size_t>(r - 1)]; ++v) {
      tuple[static_cast<std::size_t>(r - 1)] = v;
      if (r == m) {
        const auto key = codec.encode_tuple(tuple);
        auto [it, fresh] = seen.emplace(key, tuple);
        if (!fresh && it->second != tuple)
          throw std::logic_error("xi_tower_cell: codec collision on queried tuples");
        A.entry(key.first, key.second);
      } else {
        touch(r + 1);
      }
    }
  };
  touch(1);
  auto atom = [&](const std::vector<std::uint64_t>& t) {
    const auto [i, j] = codec.encode_tuple(t);
    return A.entry(i, j);
  };
  return quantifier_value(atom, m, bounds);
}

XiTowerResult run_xi_tower(const MatrixOracle& A, int m,
                           const std::vector<std::vector<std::uint64_t>>& schedule, int window,
                           const TupleCodec& codec) {
  if (static_cast<int>(schedule.size()) != m)
    throw std::invalid_argument("run_xi_tower: one index list per quantifier level");
  for (const auto& lst : schedule) {
    if (lst.empty()) throw std::invalid_argument("run_xi_tower: empty index list");
    for (std::size_t i = 1; i < lst.size(); ++i)
      if (lst[i] <= lst[i - 1])
        throw std::invalid_argument("run_xi_tower: index lists must increase");
  }
  XiTowerResult res;
  std::vector<std::uint64_t> fixed(static_cast<std::size_t>(m), 1);

  // eval(r): empirical limit over schedule[r-1] of the level-(r+1) limits,
  // with bounds above level r frozen in `fixed`.
  std::function<int(int)> eval = [&](int r) -> int {
    int last = 0;
    int run = 0;
    bool stable = false;
    for (std::size_t idx = 0; idx < schedule[static_cast<std::size_t>(r - 1)].size(); ++idx) {
      fixed[static_cast<std::size_t>(r - 1)] = schedule[static_cast<std::size_t>(r - 1)][idx];
      int v;
      if (r == m) {
        v = xi_tower_cell(A, m, fixed, codec);
      } else {
        v = eval(r + 1);
      }
      const bool flipped = idx > 0 && v != last;
      res.trace.push_back(
          XiTraceEntry{r, schedule[static_cast<std::size_t>(r - 1)][idx], v, flipped});
      if (idx == 0 || flipped) run = 1;
      else ++run;
      last = v;
      if (run >= window) { stable = true; }
    }
    if (!stable) res.stabilized = false;
    return last;
  };
  res.value = eval(1);
  return res;
}

std::shared_ptr<MatrixOracle> embed_universal(
    std::function<int(const std::vector<std::uint64_t>&)> x, int m, const TupleCodec& codec) {
  return std::make_shared<MatrixOracle>(
      [x, m, codec](std::uint64_t i, std::uint64_t j) {
        auto tuple = codec.decode_entry(i, j, m);
        for (auto c : tuple)
          if (c == 0) return 0;  // off the embedded support
        return x(tuple);
      },
      "embedded");
}

GeneratedInstance instance_generator(const InstanceSpec& spec, const TupleCodec& codec) {
  GeneratedInstance out;
  switch (spec.kind) {
    case InstanceSpec::Kind::constant: {
      const int b = spec.bit;
      out.thresholded = make_thresholded(spec.m, 0, [b](const std::vector<std::uint64_t>&) {
        return b;
      }, codec);
      out.has_ground_truth = true;
      out.ground_truth = b;
      return out;
    }
    case InstanceSpec::Kind::witness_at: {
      if (static_cast<int>(spec.witness.size()) != spec.m)
        throw std::invalid_argument("instance_generator: witness arity mismatch");
      std::uint64_t maxc = 1;
      for (auto w : spec.witness) maxc = std::max(maxc, w);
      const auto target = spec.witness;
      out.thresholded = make_thresholded(
          spec.m, static_cast<int>(maxc),
          [target](const std::vector<std::uint64_t>& t) { return t == target ? 1 : 0; }, codec);
      out.has_ground_truth = true;
      out.ground_truth = xi_exact(out.thresholded);
      return out;
    }
    case InstanceSpec::Kind::threshold_random: {
      // Deterministic table over the clamped box, splitmix-style from the seed.
      const int m = spec.m, T = spec.T;
      const std::uint64_t seed = spec.seed;
      auto bit_at = [m, T, seed](const std::vector<std::uint64_t>& t) {
        std::uint64_t h = seed ^ 0x9e3779b97f4a7c15ULL;
        for (auto c : t) {
          h ^= c + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
          h *= 0xbf58476d1ce4e5b9ULL;
          h ^= h >> 27;
        }
        (void)T;
        return static_cast<int>((h >> 33) & 1u);
      };
      out.thresholded = make_thresholded(m, T, bit_at, codec);
      out.has_ground_truth = true;
      out.ground_truth = xi_exact(out.thresholded);
      return out;
    }
    case InstanceSpec::Kind::delayed: {
      // Scripted non-stabilization: the witness is parked at a large
      // outermost coordinate and holds for every inner assignment, so the
      // tower flips exactly when N_1 passes flip_index.
      if (spec.flip_index < 1)
        throw std::invalid_argument("instance_generator: flip_index >= 1 required");
      const std::uint64_t flip = spec.flip_index;
      out.thresholded = make_thresholded(
          spec.m, static_cast<int>(flip),
          [flip](const std::vector<std::uint64_t>& t) { return t[0] == flip ? 1 : 0; }, codec);
      out.has_ground_truth = true;
      out.ground_truth = 1;
      return out;
    }
  }
  throw std::invalid_argument("instance_generator: unknown spec kind");
}

}  // namespace sci
