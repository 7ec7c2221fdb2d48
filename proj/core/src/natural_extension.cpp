#include "phlab/natural_extension.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "phlab/errors.hpp"
#include "phlab/rng.hpp"

namespace phlab {

PastWord PastWord::from_branches(const Endomorphism& f, TorusPoint base, std::vector<int> branches) {
  PastWord w(base);
  w.pts_.reserve(branches.size() + 1);
  for (int b : branches) w.pts_.push_back(f.inverse_branch(w.pts_.back(), b));
  w.br_ = std::move(branches);
  return w;
}

PastWord PastWord::from_points(const Endomorphism& f, std::vector<TorusPoint> points) {
  if (points.empty()) throw ConfigError("PastWord::from_points: empty point list");
  PastWord w;
  w.pts_ = std::move(points);
  w.br_.reserve(w.pts_.size() - 1);
  for (std::size_t k = 0; k + 1 < w.pts_.size(); ++k) {
    if (torus_distance(f.evaluate(w.pts_[k + 1]), w.pts_[k]) > 1e-10) {
      throw ConfigError("PastWord::from_points: inconsistent orbit at level " + std::to_string(k));
    }
    w.br_.push_back(f.branch_index(w.pts_[k + 1], w.pts_[k]));
  }
  return w;
}

PastWord PastWord::truncated(int depth) const {
  if (depth < 0 || depth > this->depth()) throw ConfigError("PastWord::truncated: bad depth");
  PastWord w;
  w.pts_.assign(pts_.begin(), pts_.begin() + depth + 1);
  w.br_.assign(br_.begin(), br_.begin() + depth);
  return w;
}

double PastWord::consistency_residual(const Endomorphism& f) const {
  double r = 0.0;
  for (std::size_t k = 0; k + 1 < pts_.size(); ++k) {
    r = std::max(r, torus_distance(f.evaluate(pts_[k + 1]), pts_[k]));
  }
  return r;
}

int BranchChooser::choose(const Endomorphism& f, TorusPoint p, int level) const {
  const int d = f.degree();
  switch (kind) {
    case Kind::uniform_random: {
      CounterRng rng = CounterRng(seed).substream(static_cast<std::uint64_t>(level));
      return static_cast<int>(rng.below(static_cast<std::uint64_t>(d)));
    }
    case Kind::fixed_index:
      if (index < 0 || index >= d) throw ConfigError("fixed branch index out of range");
      return index;
    case Kind::trap_in_set: {
      for (int k = 0; k < d; ++k) {
        const TorusPoint z = f.inverse_branch(p, k);
        for (const Disc& disc : trap) {
          if (torus_distance(z, disc.center) <= disc.radius) return k;
        }
      }
      throw NumericalError("trap-in-set chooser: no inverse branch lands in the set at level " +
                           std::to_string(level));
    }
  }
  return 0;
}

PastWord deepen(const Endomorphism& f, const PastWord& w, int extra, const BranchChooser& chooser) {
  if (extra < 0) throw ConfigError("deepen: negative depth");
  PastWord out = w;
  out.pts_.reserve(out.pts_.size() + static_cast<std::size_t>(extra));
  for (int k = 0; k < extra; ++k) {
    const TorusPoint p = out.pts_.back();
    const int b = chooser.choose(f, p, out.depth());
    out.br_.push_back(b);
    out.pts_.push_back(f.inverse_branch(p, b));
  }
  return out;
}

PastWord extend_past(const Endomorphism& f, TorusPoint p, const BranchChooser& chooser, int depth) {
  if (depth < 0) throw ConfigError("extend_past: depth >= 0 required");
  return deepen(f, PastWord(p), depth, chooser);
}

PastWord shift(const Endomorphism& f, const PastWord& w) {
  PastWord out;
  const TorusPoint img = f.evaluate(w.base());
  out.pts_.reserve(w.pts_.size() + 1);
  out.pts_.push_back(img);
  out.pts_.insert(out.pts_.end(), w.pts_.begin(), w.pts_.end());
  out.br_.reserve(w.br_.size() + 1);
  out.br_.push_back(f.branch_index(w.base(), img));
  out.br_.insert(out.br_.end(), w.br_.begin(), w.br_.end());
  return out;
}

PastWord shift(const Endomorphism& f, const PastWord& w, int n) {
  PastWord out = w;
  for (int i = 0; i < n; ++i) out = shift(f, out);
  return out;
}

PastWord match_past(const Endomorphism& f, const PastWord& reference, TorusPoint y) {
  std::vector<TorusPoint> pts{y};
  pts.reserve(static_cast<std::size_t>(reference.depth()) + 1);
  for (int k = 0; k < reference.depth(); ++k) {
    const Vec2 X = reference.at(k + 1).coords();
    const Vec2 FX = f.lift(X);
    const Vec2 target = nearest_lift(pts.back(), FX);
    const Vec2 seed = X + f.derivative_at(X).inverse() * (target - FX);
    pts.push_back(TorusPoint::wrap(f.lifted_preimage(target, seed)));
  }
  return PastWord::from_points(f, std::move(pts));
}

NeDistance ne_distance(const PastWord& w1, const PastWord& w2, double tol) {
  NeDistance d;
  if (torus_distance(w1.base(), w2.base()) > tol) return d;
  // equal bases force equal futures, so only the pasts can disagree
  const int avail = std::min(w1.depth(), w2.depth());
  int n = 1;
  while (n <= avail && torus_distance(w1.at(n), w2.at(n)) <= tol) ++n;
  d.n = n;
  d.truncated = n > avail;
  d.value = std::ldexp(1.0, -n);
  return d;
}

FiberSample fiber_sample(const Endomorphism& f, TorusPoint p, int depth, int count, std::uint64_t seed) {
  if (depth < 0 || count < 0) throw ConfigError("fiber_sample: negative depth or count");
  const auto d = static_cast<std::uint64_t>(f.degree());
  // total number of words, saturating
  std::uint64_t total = 1;
  bool small = true;
  for (int k = 0; k < depth; ++k) {
    if (total > (std::uint64_t{1} << 62) / d) {
      small = false;
      break;
    }
    total *= d;
  }
  if (small && static_cast<std::uint64_t>(count) > total) {
    throw ConfigError("fiber_sample: count exceeds |det|^depth = " + std::to_string(total));
  }
  CounterRng rng(seed);
  std::vector<std::vector<int>> seqs;
  if (small) {
    // Floyd's algorithm: uniform subset of [0, total)
    std::set<std::uint64_t> chosen;
    for (std::uint64_t j = total - static_cast<std::uint64_t>(count); j < total; ++j) {
      const std::uint64_t t = rng.below(j + 1);
      if (!chosen.insert(t).second) chosen.insert(j);
    }
    for (std::uint64_t code : chosen) {
      std::vector<int> s(static_cast<std::size_t>(depth));
      for (int k = 0; k < depth; ++k) {
        s[static_cast<std::size_t>(k)] = static_cast<int>(code % d);
        code /= d;
      }
      seqs.push_back(std::move(s));
    }
  } else {
    std::set<std::vector<int>> chosen;
    while (chosen.size() < static_cast<std::size_t>(count)) {
      std::vector<int> s(static_cast<std::size_t>(depth));
      for (auto& b : s) b = static_cast<int>(rng.below(d));
      chosen.insert(std::move(s));
    }
    seqs.assign(chosen.begin(), chosen.end());
  }
  FiberSample out{p, depth, {}};
  out.words.reserve(seqs.size());
  for (auto& s : seqs) out.words.push_back(PastWord::from_branches(f, p, std::move(s)));
  return out;
}

nlohmann::json to_json(const PastWord& w) {
  return {{"base", {w.base().x(), w.base().y()}}, {"branches", w.branches()}};
}

PastWord past_word_from_json(const Endomorphism& f, const nlohmann::json& j) {
  try {
    const auto& b = j.at("base");
    const TorusPoint base = wrap(b.at(0).get<double>(), b.at(1).get<double>());
    return PastWord::from_branches(f, base, j.at("branches").get<std::vector<int>>());
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("past word: ") + e.what());
  }
}

}  // namespace phlab
