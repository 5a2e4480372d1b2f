#include "ehg/tree.hpp"

#include <algorithm>
#include <numeric>

#include "ehg/errors.hpp"
#include "ehg/random.hpp"

namespace ehg {

std::size_t RegressionTree::leaf_of(const Eigen::Ref<const Eigen::RowVectorXd>& row) const {
  std::size_t i = 0;
  while (nodes[i].feature >= 0) {
    const auto& n = nodes[i];
    i = static_cast<std::size_t>(row(n.feature) <= n.threshold ? n.left : n.right);
  }
  return i;
}

std::size_t RegressionTree::depth() const {
  std::vector<std::size_t> d(nodes.size(), 0);
  std::size_t best = 0;
  // Children are always appended after their parent.
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    best = std::max(best, d[i]);
    if (nodes[i].feature >= 0) {
      d[static_cast<std::size_t>(nodes[i].left)] = d[i] + 1;
      d[static_cast<std::size_t>(nodes[i].right)] = d[i] + 1;
    }
  }
  return best;
}

std::size_t RegressionTree::leaf_count() const {
  return static_cast<std::size_t>(std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.feature < 0; }));
}

void RegressionTree::write(ByteWriter& w) const {
  w.u64(nodes.size());
  for (const auto& n : nodes) {
    w.i32(n.feature);
    w.f64(n.threshold);
    w.i32(n.left);
    w.i32(n.right);
    w.f64(n.value);
  }
}

RegressionTree RegressionTree::read(ByteReader& r, std::size_t n_features) {
  RegressionTree t;
  const auto count = r.count(4 + 8 + 4 + 4 + 8);
  if (count == 0) throw ValidationError("model container: empty tree");
  t.nodes.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    auto& n = t.nodes[i];
    n.feature = r.i32();
    n.threshold = r.f64();
    n.left = r.i32();
    n.right = r.i32();
    n.value = r.f64();
    if (n.feature >= 0) {
      const auto ok = [&](std::int32_t c) { return c > static_cast<std::int32_t>(i) && static_cast<std::size_t>(c) < count; };
      if (static_cast<std::size_t>(n.feature) >= n_features || !ok(n.left) || !ok(n.right)) {
        throw ValidationError("model container: corrupt tree node");
      }
    }
  }
  return t;
}

namespace {

class Grower {
 public:
  Grower(const Eigen::MatrixXd& x, std::span<const double> target, std::span<const double> weight,
         const TreeGrowOptions& opts)
      : x_(x), target_(target), weight_(weight), opts_(opts), rng_(opts.seed) {
    const auto n = static_cast<std::size_t>(x.rows());
    const auto d = static_cast<std::size_t>(x.cols());
    std::vector<std::uint32_t> active;
    for (std::size_t i = 0; i < n; ++i) {
      if (weight[i] > 0.0) active.push_back(static_cast<std::uint32_t>(i));
    }
    if (active.empty()) throw ValidationError("grow_tree: no rows with positive weight");
    order_.resize(d);
    for (std::size_t f = 0; f < d; ++f) {
      auto& o = order_[f];
      o = active;
      std::stable_sort(o.begin(), o.end(), [&](std::uint32_t a, std::uint32_t b) {
        return x(a, static_cast<Eigen::Index>(f)) < x(b, static_cast<Eigen::Index>(f));
      });
    }
    goes_left_.assign(n, 0);
    scratch_.resize(active.size());
    features_.resize(d);
    std::iota(features_.begin(), features_.end(), std::size_t{0});
  }

  RegressionTree run() {
    build(0, order_.empty() ? 0 : order_[0].size(), 0);
    return std::move(tree_);
  }

 private:
  struct Best {
    bool found = false;
    double proxy = 0.0;
    std::size_t feature = 0;
    double threshold = 0.0;
  };

  double side_proxy(double w, double sy) const {
    if (opts_.criterion == SplitCriterion::Gini) return (sy * sy + (w - sy) * (w - sy)) / w;
    return sy * sy / w;
  }

  bool better(const Best& b, double proxy, std::size_t f, double thr) const {
    if (!b.found || proxy > b.proxy) return true;
    if (proxy < b.proxy) return false;
    return f < b.feature || (f == b.feature && thr < b.threshold);
  }

  // Scans one feature; returns false when it is constant within the node.
  bool scan(std::size_t f, std::size_t lo, std::size_t hi, double w_total, double sy_total, Best& best) const {
    const auto& o = order_[f];
    const auto fi = static_cast<Eigen::Index>(f);
    if (x_(o[lo], fi) == x_(o[hi - 1], fi)) return false;
    double lw = 0.0, lsy = 0.0;
    for (std::size_t p = lo; p + 1 < hi; ++p) {
      const auto id = o[p];
      lw += weight_[id];
      lsy += weight_[id] * target_[id];
      const double v = x_(id, fi);
      const double next = x_(o[p + 1], fi);
      if (!(v < next)) continue;
      const double proxy = side_proxy(lw, lsy) + side_proxy(w_total - lw, sy_total - lsy);
      double thr = 0.5 * (v + next);
      if (thr >= next) thr = v;
      if (better(best, proxy, f, thr)) best = {true, proxy, f, thr};
    }
    return true;
  }

  std::int32_t build(std::size_t lo, std::size_t hi, std::size_t depth) {
    const auto& o0 = order_[0];
    double w = 0.0, sy = 0.0;
    double tmin = target_[o0[lo]], tmax = tmin;
    for (std::size_t p = lo; p < hi; ++p) {
      const auto id = o0[p];
      w += weight_[id];
      sy += weight_[id] * target_[id];
      tmin = std::min(tmin, target_[id]);
      tmax = std::max(tmax, target_[id]);
    }
    const auto index = static_cast<std::int32_t>(tree_.nodes.size());
    tree_.nodes.push_back({});
    tree_.nodes.back().value = sy / w;

    if (depth >= opts_.max_depth || hi - lo < opts_.min_samples_split || tmin == tmax) return index;

    Best best;
    const std::size_t d = features_.size();
    if (opts_.max_features == 0 || opts_.max_features >= d) {
      for (std::size_t f = 0; f < d; ++f) scan(f, lo, hi, w, sy, best);
    } else {
      rng_.shuffle(std::span<std::size_t>(features_));
      std::size_t informative = 0;
      for (std::size_t k = 0; k < d && informative < opts_.max_features; ++k) {
        if (scan(features_[k], lo, hi, w, sy, best)) ++informative;
      }
    }
    if (!best.found) return index;

    const auto bf = static_cast<Eigen::Index>(best.feature);
    std::size_t n_left = 0;
    for (std::size_t p = lo; p < hi; ++p) {
      const auto id = o0[p];
      goes_left_[id] = x_(id, bf) <= best.threshold ? 1 : 0;
      n_left += goes_left_[id];
    }
    for (auto& o : order_) {
      std::size_t l = lo, r = 0;
      for (std::size_t p = lo; p < hi; ++p) {
        if (goes_left_[o[p]]) {
          o[l++] = o[p];
        } else {
          scratch_[r++] = o[p];
        }
      }
      std::copy(scratch_.begin(), scratch_.begin() + static_cast<std::ptrdiff_t>(r), o.begin() + static_cast<std::ptrdiff_t>(l));
    }

    const auto left = build(lo, lo + n_left, depth + 1);
    const auto right = build(lo + n_left, hi, depth + 1);
    auto& node = tree_.nodes[static_cast<std::size_t>(index)];
    node.feature = static_cast<std::int32_t>(best.feature);
    node.threshold = best.threshold;
    node.left = left;
    node.right = right;
    return index;
  }

  const Eigen::MatrixXd& x_;
  std::span<const double> target_;
  std::span<const double> weight_;
  TreeGrowOptions opts_;
  Rng rng_;
  std::vector<std::vector<std::uint32_t>> order_;
  std::vector<std::uint8_t> goes_left_;
  std::vector<std::uint32_t> scratch_;
  std::vector<std::size_t> features_;
  RegressionTree tree_;
};

}  // namespace

RegressionTree grow_tree(const Eigen::MatrixXd& x, std::span<const double> target, std::span<const double> weight,
                         const TreeGrowOptions& opts) {
  const auto n = static_cast<std::size_t>(x.rows());
  if (target.size() != n || weight.size() != n) throw ShapeError("grow_tree: target/weight length mismatch");
  if (x.cols() == 0) throw ShapeError("grow_tree: no features");
  return Grower(x, target, weight, opts).run();
}

}  // namespace ehg
