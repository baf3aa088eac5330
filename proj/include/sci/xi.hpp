#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

namespace sci {

/// Tuple coding for the Cantor matrix world: the Cantor pairing
/// <a,b> = (a+b)(a+b+1)/2 + b, left-nested for m-tuples, and iota = its
/// inverse mapping N to N^2. Overflow throws instead of wrapping.
class TupleCodec {
 public:
  std::uint64_t pair(std::uint64_t a, std::uint64_t b) const;
  std::pair<std::uint64_t, std::uint64_t> unpair(std::uint64_t n) const;

  /// <n_1,...,n_m> left-nested.
  std::uint64_t encode(const std::vector<std::uint64_t>& tuple) const;
  std::vector<std::uint64_t> decode(std::uint64_t n, int m) const;

  /// iota_m(tuple) = iota(<tuple>) with iota = unpair.
  std::pair<std::uint64_t, std::uint64_t> encode_tuple(
      const std::vector<std::uint64_t>& tuple) const;
  /// Inverse of encode_tuple (total: the codec is bijective).
  std::vector<std::uint64_t> decode_entry(std::uint64_t i, std::uint64_t j, int m) const;
};

/// Lazily queried {0,1} matrix with a deterministic entry rule, memoization
/// and an append-only log of distinct queried coordinates.
class MatrixOracle {
 public:
  using EntryFn = std::function<int(std::uint64_t, std::uint64_t)>;

  MatrixOracle(EntryFn entry, std::string kind);

  int entry(std::uint64_t i, std::uint64_t j) const;
  const std::string& kind() const { return kind_; }
  std::vector<std::pair<std::uint64_t, std::uint64_t>> query_log() const;
  std::size_t query_count() const;

 private:
  EntryFn entry_;
  std::string kind_;
  mutable std::mutex mu_;
  mutable std::map<std::pair<std::uint64_t, std::uint64_t>, int> memo_;
  mutable std::vector<std::pair<std::uint64_t, std::uint64_t>> log_;
};

/// Thresholded instance: entry at iota_m(n) = base(min(n_1,T+1),...,min(n_m,T+1))
/// for tuples with all coordinates >= 1; entries at tuples containing a zero
/// coordinate are 0. base receives clamped coordinates in [1, T+1].
struct ThresholdedOracle {
  std::shared_ptr<MatrixOracle> oracle;
  int m = 1;
  int T = 0;
  std::function<int(const std::vector<std::uint64_t>&)> base;  // clamped tuples
};

ThresholdedOracle make_thresholded(int m, int T,
                                   std::function<int(const std::vector<std::uint64_t>&)> base,
                                   const TupleCodec& codec = {});

/// Exact value of the alternating-quantifier predicate on a thresholded
/// instance: brute force over {1..T+1}^m (lossless by the clamping invariant).
int xi_exact(const ThresholdedOracle& inst);

/// Bounded-quantifier tower cell: alternates max/min over 1..N_r, querying
/// exactly prod N_r entries of the oracle.
int xi_tower_cell(const MatrixOracle& A, int m, const std::vector<std::uint64_t>& bounds,
                  const TupleCodec& codec = {});

struct XiTraceEntry {
  int level;            // 1-based quantifier level being swept
  std::uint64_t index;  // bound value
  int value;            // cell/limit value at this index
  bool flipped;         // value changed from the previous index at this level
};

struct XiTowerResult {
  int value = 0;
  bool stabilized = true;  // every level's sweep was eventually constant
  std::vector<XiTraceEntry> trace;
};

/// Empirical nested-limit sweep, innermost limits resolved first. Discrete
/// target: a level counts as stabilized when the last `window` sweep values
/// are equal.
XiTowerResult run_xi_tower(const MatrixOracle& A, int m,
                           const std::vector<std::vector<std::uint64_t>>& schedule,
                           int window = 3, const TupleCodec& codec = {});

/// Universal-set embedding Psi_m: entry at iota_m(n) = x(n) for tuples with
/// all coordinates >= 1, and 0 on all other entries.
std::shared_ptr<MatrixOracle> embed_universal(
    std::function<int(const std::vector<std::uint64_t>&)> x, int m,
    const TupleCodec& codec = {});

/// Deterministic instance corpus with exact ground truth where defined.
struct InstanceSpec {
  enum class Kind { constant, witness_at, threshold_random, delayed };
  Kind kind = Kind::constant;
  int m = 1;
  int bit = 0;                           // constant
  std::vector<std::uint64_t> witness;    // witness_at coordinates
  int T = 0;                             // threshold_random clamp
  std::uint64_t seed = 0;                // threshold_random
  std::uint64_t flip_index = 1;          // delayed: outermost bound where the value flips
};

struct GeneratedInstance {
  ThresholdedOracle thresholded;  // oracle always set; T/base meaningful when thresholded
  bool has_ground_truth = false;
  int ground_truth = 0;
};

GeneratedInstance instance_generator(const InstanceSpec& spec, const TupleCodec& codec = {});

}  // namespace sci
