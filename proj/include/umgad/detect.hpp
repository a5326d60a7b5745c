#pragma once

#include <algorithm>
#include <cmath>
#include <future>
#include <numeric>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "umgad/io.hpp"
#include "umgad/model.hpp"

namespace umgad {

struct AnomalyScores {
  std::vector<double> original;
  std::vector<double> attr_aug;
  std::vector<double> sub_aug;
  std::vector<double> fused;
};

struct ScoreOptions {
  std::uint64_t score_seed = 0;
  unsigned threads = 1;
};

/// Per-node residuals of one reconstructed view:
/// eps * mean_r |sigmoid(X~ X~^T)(i,.) - A^r(i,.)|_1 + (1 - eps) |x~(i) - x(i)|_2.
inline std::vector<double> view_scores(const MultiplexGraph& g, const Matrix& x_tilde, double epsilon) {
  const std::size_t n = g.node_count();
  const Matrix& x = g.attributes;
  const Matrix a_tilde = subgraph_struct_matrix(x_tilde);
  std::vector<double> out(n);
  for (NodeId i = 0; i < n; ++i) {
    double row_sum = 0.0;
    for (NodeId j = 0; j < n; ++j) row_sum += a_tilde(i, j);
    double structure = 0.0;
    for (const auto& rel : g.relations) {
      // entries with A = 1 contribute 1 - a~ instead of a~
      double resid = row_sum;
      for (NodeId j : rel.neighbors(i)) resid += 1.0 - 2.0 * a_tilde(i, j);
      structure += resid;
    }
    structure /= static_cast<double>(g.relation_count());
    double attr = 0.0;
    for (std::size_t c = 0; c < x.cols(); ++c) attr += (x_tilde(i, c) - x(i, c)) * (x_tilde(i, c) - x(i, c));
    out[i] = epsilon * structure + (1.0 - epsilon) * std::sqrt(attr);
  }
  return out;
}

inline bool params_untrained(const ModelParams& p) {
  for (const auto& t : p.tensors())
    if (t.name.starts_with("enc/"))
      for (double v : t.value.values())
        if (v != 0.0) return false;
  return true;
}

/// Anomaly scores from fresh inference plans (mean over K). The fused score
/// averages the views that were trained (all three unless ablated).
inline AnomalyScores score_nodes(const MultiplexGraph& g, const ModelParams& params, const ModelConfig& mcfg, const MaskConfig& maskcfg,
                                 const RwrConfig& rwrcfg, const LossWeights& w, const Ablation& abl, const ScoreOptions& opt) {
  if (params_untrained(params)) throw UntrainedParams("all encoder weights are zero; train or load a checkpoint first");
  if (params.relations() != g.relation_count() || params.feature_dim() != g.feature_dim())
    throw ShapeMismatch("parameters do not match the graph's relations or feature dimension");
  MaskConfig mc = maskcfg;
  mc.repeats = params.repeats();
  const ModelContext ctx(g, mcfg);
  const EpochPlan plan = make_epoch_plan(g, ctx.full_adj, mc, rwrcfg, abl.no_mask, opt.score_seed, "score");

  const std::array<bool, kViews> active{abl.original_active(), abl.attr_aug_active(), abl.sub_aug_active()};
  std::array<std::vector<double>, kViews> per_view;
  auto run = [&](std::size_t v) { per_view[v] = view_scores(g, reconstruct_view(ctx, params, plan, static_cast<View>(v)), w.epsilon); };
  if (opt.threads > 1) {
    std::vector<std::future<void>> jobs;
    for (std::size_t v = 0; v < kViews; ++v)
      if (active[v]) jobs.push_back(std::async(std::launch::async, run, v));
    for (auto& j : jobs) j.get();
  } else {
    for (std::size_t v = 0; v < kViews; ++v)
      if (active[v]) run(v);
  }

  const std::size_t n = g.node_count();
  AnomalyScores s;
  for (std::size_t v = 0; v < kViews; ++v)
    if (!active[v]) per_view[v].assign(n, 0.0);
  s.original = std::move(per_view[0]);
  s.attr_aug = std::move(per_view[1]);
  s.sub_aug = std::move(per_view[2]);
  const double views = static_cast<double>(active[0] + active[1] + active[2]);
  s.fused.resize(n);
  for (std::size_t i = 0; i < n; ++i) s.fused[i] = (s.original[i] + s.attr_aug[i] + s.sub_aug[i]) / views;
  return s;
}

/// Ranked anomaly-score curve.
struct ScoreCurve {
  std::vector<double> scores;    // descending
  std::vector<double> smoothed;  // min-max normalized, moving-average smoothed
  std::size_t window = 0;
};

struct ThresholdResult {
  std::size_t knee_index = 0;
  double threshold = 0.0;
  std::size_t flagged_count = 0;
  std::string method;
};

inline std::size_t smoothing_window(std::size_t n) {
  std::size_t w = std::max<std::size_t>(5, static_cast<std::size_t>(std::floor(static_cast<double>(n) / 200.0 + 0.5)));
  return w % 2 == 0 ? w + 1 : w;
}

/// Centered moving average; near the ends the window shrinks symmetrically so
/// straight lines stay straight.
inline std::vector<double> centered_moving_average(std::span<const double> y, std::size_t window) {
  const std::size_t n = y.size();
  const std::size_t half = window / 2;
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t h = std::min({half, i, n - 1 - i});
    double s = 0.0;
    for (std::size_t j = i - h; j <= i + h; ++j) s += y[j];
    out[i] = s / static_cast<double>(2 * h + 1);
  }
  return out;
}

/// Vertical distance below the chord from (0, y_0) to (1, y_{n-1}) of a
/// descending curve normalized to [1, 0], on the grid x_i = i / (n - 1).
inline std::vector<double> chord_gap(std::span<const double> y) {
  const std::size_t n = y.size();
  std::vector<double> d(n, 0.0);
  if (n < 2) return d;
  for (std::size_t i = 0; i < n; ++i) d[i] = 1.0 - static_cast<double>(i) / static_cast<double>(n - 1) - y[i];
  return d;
}

/// First index in [lo, hi] attaining the maximum, with a relative tie band
/// absorbing rounding noise.
inline std::size_t first_argmax(std::span<const double> v, std::size_t lo, std::size_t hi) {
  double best = v[lo];
  for (std::size_t i = lo; i <= hi; ++i) best = std::max(best, v[i]);
  const double tol = 1e-9 * std::max(1.0, std::abs(best));
  for (std::size_t i = lo; i <= hi; ++i)
    if (v[i] >= best - tol) return i;
  return lo;
}

inline ScoreCurve ranked_curve(std::span<const double> fused) {
  ScoreCurve c;
  c.scores.assign(fused.begin(), fused.end());
  std::sort(c.scores.begin(), c.scores.end(), std::greater<>());
  const std::size_t n = c.scores.size();
  c.window = smoothing_window(n);
  std::vector<double> y(n, 0.0);
  if (n > 0) {
    const double hi = c.scores.front(), lo = c.scores.back();
    for (std::size_t i = 0; i < n; ++i) y[i] = hi > lo ? (c.scores[i] - lo) / (hi - lo) : 0.0;
  }
  c.smoothed = centered_moving_average(y, c.window);
  return c;
}

/// Knee of the descending ranked-score curve.
///
/// Both axes are min-max normalized. The coarse knee is the point of the
/// smoothed curve lying farthest below the chord joining its endpoints; it is
/// then snapped to the largest drop between consecutive raw scores within half
/// a window of it. Nodes ranked before the knee are flagged; threshold is the
/// lowest flagged score and ties with it are flagged.
inline ThresholdResult select_threshold(std::span<const double> fused) {
  const std::size_t n = fused.size();
  if (n < 10) throw UsageError("threshold selection needs at least 10 scores");
  const ScoreCurve c = ranked_curve(fused);
  if (c.scores.front() == c.scores.back()) return ThresholdResult{0, c.scores.front(), 0, "degenerate"};

  const std::size_t coarse = first_argmax(chord_gap(c.smoothed), 1, n - 2);
  const std::size_t half = c.window / 2;
  const std::size_t lo_i = coarse > half ? std::max<std::size_t>(1, coarse - half) : 1;
  const std::size_t hi_i = std::min(n - 2, coarse + half);
  std::vector<double> drop(n, 0.0);
  const double span = c.scores.front() - c.scores.back();
  for (std::size_t i = 1; i < n; ++i) drop[i] = (c.scores[i - 1] - c.scores[i]) / span;
  const std::size_t knee = first_argmax(drop, lo_i, hi_i);

  ThresholdResult t;
  t.knee_index = knee;
  t.threshold = c.scores[knee - 1];
  t.flagged_count = static_cast<std::size_t>(std::count_if(fused.begin(), fused.end(), [&](double s) { return s >= t.threshold; }));
  t.method = "knee";
  return t;
}

/// Flags from a threshold result (score >= threshold) or the top-k scores
/// (ties broken by ascending node index). Exactly one selector must be given.
inline std::vector<int> classify(std::span<const double> fused, const std::optional<ThresholdResult>& t, std::optional<std::size_t> top_k) {
  if (t.has_value() == top_k.has_value()) throw ConflictingSelectors("classify needs exactly one of a threshold or top-k");
  const std::size_t n = fused.size();
  std::vector<int> flags(n, 0);
  if (t) {
    if (t->flagged_count == 0) return flags;
    for (std::size_t i = 0; i < n; ++i) flags[i] = fused[i] >= t->threshold ? 1 : 0;
    return flags;
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fused[a] > fused[b]; });
  for (std::size_t i = 0; i < std::min(*top_k, n); ++i) flags[order[i]] = 1;
  return flags;
}

inline void write_scores_csv(std::ostream& out, const AnomalyScores& s, std::span<const int> flags) {
  out.precision(17);
  out << "node_id,score_original,score_attr_aug,score_sub_aug,score_fused,flag\n";
  for (std::size_t i = 0; i < s.fused.size(); ++i)
    out << i << ',' << s.original[i] << ',' << s.attr_aug[i] << ',' << s.sub_aug[i] << ',' << s.fused[i] << ',' << flags[i] << '\n';
}

inline void write_curve_csv(std::ostream& out, const ScoreCurve& c) {
  out.precision(17);
  out << "rank,score,smoothed\n";
  for (std::size_t i = 0; i < c.scores.size(); ++i) out << i + 1 << ',' << c.scores[i] << ',' << c.smoothed[i] << '\n';
}

struct ScoreTable {
  AnomalyScores scores;
  std::vector<int> flags;
};

/// Reads a file produced by write_scores_csv. Rows must be in node order.
inline ScoreTable read_scores_csv(const std::filesystem::path& path) {
  auto in = io_detail::open_in(path);
  const std::string where = path.string();
  std::string line;
  if (!std::getline(in, line) || io_detail::trim(line) != "node_id,score_original,score_attr_aug,score_sub_aug,score_fused,flag")
    throw ParseError(where, 1, "unexpected header");
  ScoreTable t;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    const auto s = io_detail::trim(line);
    if (s.empty()) continue;
    std::vector<std::string_view> cells;
    std::size_t b = 0;
    while (true) {
      const auto c = s.find(',', b);
      cells.push_back(s.substr(b, c == std::string_view::npos ? std::string_view::npos : c - b));
      if (c == std::string_view::npos) break;
      b = c + 1;
    }
    if (cells.size() != 6) throw ParseError(where, lineno, "expected 6 columns");
    std::size_t id = 0;
    double v[4];
    int flag = 0;
    if (!io_detail::parse_number(cells[0], id) || id != t.flags.size()) throw ParseError(where, lineno, "node ids must be 0..n-1 in order");
    for (int k = 0; k < 4; ++k)
      if (!io_detail::parse_number(cells[k + 1], v[k])) throw ParseError(where, lineno, "bad score");
    if (!io_detail::parse_number(cells[5], flag) || (flag != 0 && flag != 1)) throw ParseError(where, lineno, "flag must be 0 or 1");
    t.scores.original.push_back(v[0]);
    t.scores.attr_aug.push_back(v[1]);
    t.scores.sub_aug.push_back(v[2]);
    t.scores.fused.push_back(v[3]);
    t.flags.push_back(flag);
  }
  return t;
}

}  // namespace umgad
