#pragma once

#include <cstdint>
#include <json.hpp>
#include <vector>

#include "phlab/maps.hpp"
#include "phlab/torus.hpp"

namespace phlab {

struct BranchChooser;

// Finite backward orbit x_0, x_{-1}, ..., x_{-depth}. Branch k selects x_{-k-1} among the
// inverse images of x_{-k}, indexed as in Endomorphism::inverse_branches.
class PastWord {
 public:
  PastWord() = default;
  explicit PastWord(TorusPoint base) : pts_{base} {}

  // Recomputes the cached points from the branch sequence.
  static PastWord from_branches(const Endomorphism& f, TorusPoint base, std::vector<int> branches);
  // Takes x_0, x_{-1}, ... and infers the branch indices; throws ConfigError if inconsistent.
  static PastWord from_points(const Endomorphism& f, std::vector<TorusPoint> points);

  TorusPoint base() const { return pts_.front(); }
  int depth() const { return static_cast<int>(br_.size()); }
  const std::vector<int>& branches() const { return br_; }
  // x_{-k} for k in [0, depth].
  TorusPoint at(int k) const { return pts_.at(static_cast<std::size_t>(k)); }
  const std::vector<TorusPoint>& points() const { return pts_; }

  PastWord truncated(int depth) const;
  // Largest torus_distance(f(x_{-k-1}), x_{-k}).
  double consistency_residual(const Endomorphism& f) const;

 private:
  std::vector<TorusPoint> pts_;
  std::vector<int> br_;
  friend PastWord shift(const Endomorphism&, const PastWord&);
  friend PastWord deepen(const Endomorphism&, const PastWord&, int, const BranchChooser&);
};

struct Disc {
  TorusPoint center;
  double radius = 0.0;
};

struct BranchChooser {
  enum class Kind { uniform_random, fixed_index, trap_in_set };
  Kind kind = Kind::uniform_random;
  std::uint64_t seed = 0;
  int index = 0;
  std::vector<Disc> trap;

  static BranchChooser uniform(std::uint64_t seed) { return {Kind::uniform_random, seed, 0, {}}; }
  static BranchChooser fixed(int index) { return {Kind::fixed_index, 0, index, {}}; }
  static BranchChooser trap_in(std::vector<Disc> set) {
    return {Kind::trap_in_set, 0, 0, std::move(set)};
  }
  // Throws NumericalError when a trap chooser finds no branch in its set.
  int choose(const Endomorphism& f, TorusPoint p, int level) const;
};

PastWord extend_past(const Endomorphism& f, TorusPoint p, const BranchChooser& chooser, int depth);
// Appends `extra` further levels below the deepest point; the chooser sees absolute levels.
PastWord deepen(const Endomorphism& f, const PastWord& w, int extra, const BranchChooser& chooser);
PastWord shift(const Endomorphism& f, const PastWord& w);
PastWord shift(const Endomorphism& f, const PastWord& w, int n);

// Past of y that shadows the reference past: each level takes the local inverse of f near
// the reference point. This is the past of y on the local unstable leaf of the reference.
PastWord match_past(const Endomorphism& f, const PastWord& reference, TorusPoint y);

struct NeDistance {
  double value = 1.0;
  int n = 0;
  // True when the words agree on every available coordinate: the true n may be larger,
  // so n is a lower bound and value an upper bound on the inverse-limit distance.
  bool truncated = false;
};

NeDistance ne_distance(const PastWord& w1, const PastWord& w2, double tol = 1e-9);

struct FiberSample {
  TorusPoint base;
  int depth = 0;
  std::vector<PastWord> words;
};

// `count` distinct branch sequences drawn uniformly without replacement.
FiberSample fiber_sample(const Endomorphism& f, TorusPoint p, int depth, int count, std::uint64_t seed);

nlohmann::json to_json(const PastWord& w);
PastWord past_word_from_json(const Endomorphism& f, const nlohmann::json& j);

}  // namespace phlab
