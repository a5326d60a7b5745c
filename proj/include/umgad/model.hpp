#pragma once

// Simplified-GCN masked autoencoders over three views of a multiplex graph,
// relation aggregation, and the reconstruction / contrastive objectives.
//
// Views:
//   original  - attribute-masked branch (per-relation, per-repeat) and an
//               edge-masked branch used for link reconstruction;
//   attr-aug  - swapped-and-masked attribute rows;
//   sub-aug   - RWR subgraphs with their nodes masked and induced edges removed.

#include <algorithm>
#include <array>
#include <cmath>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "umgad/autodiff.hpp"
#include "umgad/graph.hpp"
#include "umgad/masking.hpp"
#include "umgad/rng.hpp"

namespace umgad {

enum class ClDenominator { Negatives, InfoNce };
enum class AugTarget { Original, Donor };

struct ModelConfig {
  std::size_t hidden_dim = 32;
  int enc_layers = 2;
  int dec_layers = 1;
  double eta = 2.0;
  ClDenominator cl_denominator = ClDenominator::Negatives;
  AugTarget aug_target = AugTarget::Original;

  void validate() const {
    if (hidden_dim == 0) throw ConfigError("hidden_dim must be >= 1");
    if (enc_layers < 1 || dec_layers < 1) throw ConfigError("layer counts must be >= 1");
    if (!(eta >= 1.0)) throw ConfigError("eta must be >= 1");
  }
};

struct LossWeights {
  double alpha = 0.5;
  double beta = 0.4;
  double lambda = 0.3;
  double mu = 0.3;
  double theta = 0.1;
  double epsilon = 0.5;

  void validate() const {
    auto unit = [](double v) { return v >= 0.0 && v <= 1.0; };
    if (!unit(alpha) || !unit(beta) || !unit(epsilon)) throw ConfigError("alpha, beta, epsilon must lie in [0, 1]");
    if (!(lambda >= 0.0 && mu >= 0.0 && theta >= 0.0)) throw ConfigError("lambda, mu, theta must be >= 0");
  }
};

/// Table-3 style ablation switches.
struct Ablation {
  bool no_mask = false;      // plain autoencoders: nothing hidden from the encoders
  bool no_original = false;  // drop the original view (and the contrastive anchor)
  bool no_attr_aug = false;
  bool no_sub_aug = false;
  bool no_dcl = false;

  bool original_active() const { return !no_original; }
  bool attr_aug_active() const { return !no_attr_aug; }
  bool sub_aug_active() const { return !no_sub_aug; }
  bool cl_active() const { return !no_dcl && !no_original && (attr_aug_active() || sub_aug_active()); }
  bool any_active() const { return original_active() || attr_aug_active() || sub_aug_active(); }
};

enum class Branch : std::size_t { OriginalAttr = 0, OriginalStruct = 1, AttrAug = 2, SubAug = 3 };
enum class View : std::size_t { Original = 0, AttrAug = 1, SubAug = 2 };
inline constexpr std::size_t kBranches = 4;
inline constexpr std::size_t kViews = 3;

inline const char* branch_name(Branch b) {
  static constexpr std::array<const char*, kBranches> names{"orig_attr", "orig_struct", "attr_aug", "sub_aug"};
  return names[static_cast<std::size_t>(b)];
}
inline const char* view_name(View v) {
  static constexpr std::array<const char*, kViews> names{"original", "attr_aug", "sub_aug"};
  return names[static_cast<std::size_t>(v)];
}

/// Every trainable tensor, stored flat with index helpers.
///
/// Layout: for branch b, relation r, repeat k an encoder (f x d_h) and a
/// decoder (d_h x f); then the 1 x f MASK token; then per view a 1 x R
/// attribute-aggregation logit row and a 1 x R structure-aggregation row.
class ModelParams {
 public:
  ModelParams() = default;
  ModelParams(std::size_t relations, std::size_t repeats, std::size_t feature_dim, std::size_t hidden_dim)
      : relations_(relations), repeats_(repeats), feature_dim_(feature_dim), hidden_dim_(hidden_dim) {
    for (std::size_t b = 0; b < kBranches; ++b)
      for (std::size_t r = 0; r < relations; ++r)
        for (std::size_t k = 0; k < repeats; ++k) {
          const std::string suffix = std::string(branch_name(static_cast<Branch>(b))) + "/r" + std::to_string(r) + "/k" + std::to_string(k);
          tensors_.emplace_back("enc/" + suffix, Matrix(feature_dim, hidden_dim));
          tensors_.emplace_back("dec/" + suffix, Matrix(hidden_dim, feature_dim));
        }
    tensors_.emplace_back("mask_token", Matrix(1, feature_dim));
    for (std::size_t v = 0; v < kViews; ++v) {
      tensors_.emplace_back(std::string("agg/") + view_name(static_cast<View>(v)) + "/attr", Matrix(1, relations));
      tensors_.emplace_back(std::string("agg/") + view_name(static_cast<View>(v)) + "/struct", Matrix(1, relations));
    }
  }

  std::size_t relations() const noexcept { return relations_; }
  std::size_t repeats() const noexcept { return repeats_; }
  std::size_t feature_dim() const noexcept { return feature_dim_; }
  std::size_t hidden_dim() const noexcept { return hidden_dim_; }

  ParamTensor& enc(Branch b, std::size_t r, std::size_t k) { return tensors_[weight_index(b, r, k)]; }
  ParamTensor& dec(Branch b, std::size_t r, std::size_t k) { return tensors_[weight_index(b, r, k) + 1]; }
  const ParamTensor& enc(Branch b, std::size_t r, std::size_t k) const { return tensors_[weight_index(b, r, k)]; }
  const ParamTensor& dec(Branch b, std::size_t r, std::size_t k) const { return tensors_[weight_index(b, r, k) + 1]; }
  ParamTensor& mask_token() { return tensors_[token_index()]; }
  const ParamTensor& mask_token() const { return tensors_[token_index()]; }
  ParamTensor& attr_logits(View v) { return tensors_[token_index() + 1 + 2 * static_cast<std::size_t>(v)]; }
  ParamTensor& struct_logits(View v) { return tensors_[token_index() + 2 + 2 * static_cast<std::size_t>(v)]; }
  const ParamTensor& attr_logits(View v) const { return tensors_[token_index() + 1 + 2 * static_cast<std::size_t>(v)]; }
  const ParamTensor& struct_logits(View v) const { return tensors_[token_index() + 2 + 2 * static_cast<std::size_t>(v)]; }

  std::vector<ParamTensor>& tensors() noexcept { return tensors_; }
  const std::vector<ParamTensor>& tensors() const noexcept { return tensors_; }

  std::vector<ParamTensor*> pointers() {
    std::vector<ParamTensor*> out;
    for (auto& t : tensors_) out.push_back(&t);
    return out;
  }

  void zero_grad() {
    for (auto& t : tensors_) t.zero_grad();
  }

  /// Xavier-uniform weights, zero logits, MASK token = mean attribute row.
  void initialize(const Matrix& attributes, std::uint64_t seed) {
    for (auto& t : tensors_) {
      if (t.name.starts_with("enc/") || t.name.starts_with("dec/")) {
        RngStream s(seed, "init/" + t.name);
        const double limit = std::sqrt(6.0 / static_cast<double>(t.value.rows() + t.value.cols()));
        for (double& v : t.value.values()) v = s.uniform(-limit, limit);
      } else {
        t.value.fill(0.0);
      }
    }
    Matrix& token = mask_token().value;
    for (std::size_t i = 0; i < attributes.rows(); ++i)
      for (std::size_t j = 0; j < attributes.cols(); ++j) token(0, j) += attributes(i, j);
    token *= 1.0 / static_cast<double>(attributes.rows());
    zero_grad();
  }

  bool operator==(const ModelParams& o) const {
    if (relations_ != o.relations_ || repeats_ != o.repeats_ || feature_dim_ != o.feature_dim_ || hidden_dim_ != o.hidden_dim_ ||
        tensors_.size() != o.tensors_.size())
      return false;
    for (std::size_t i = 0; i < tensors_.size(); ++i)
      if (tensors_[i].name != o.tensors_[i].name || !(tensors_[i].value == o.tensors_[i].value)) return false;
    return true;
  }

 private:
  std::size_t weight_index(Branch b, std::size_t r, std::size_t k) const {
    return ((static_cast<std::size_t>(b) * relations_ + r) * repeats_ + k) * 2;
  }
  std::size_t token_index() const { return kBranches * relations_ * repeats_ * 2; }

  std::size_t relations_ = 0;
  std::size_t repeats_ = 0;
  std::size_t feature_dim_ = 0;
  std::size_t hidden_dim_ = 0;
  std::vector<ParamTensor> tensors_;
};

using AdjPtr = std::shared_ptr<const SparseMatrix>;

/// Everything one forward pass needs besides parameters: plans, the
/// normalized adjacencies of the edge-reduced graphs, and RNG coordinates for
/// dropout.
struct EpochPlan {
  MaskPlan mask;
  AugmentPlan aug;
  std::vector<NodeId> cl_negatives;               // [i] -> j != i
  std::vector<std::vector<AdjPtr>> edge_masked;   // [r][k]
  std::vector<std::vector<AdjPtr>> subgraph_cut;  // [r][k]
  std::vector<std::vector<NodeId>> subgraph_union;  // [k] union over r of RWR nodes
  bool no_mask = false;
  std::uint64_t seed = 0;
  std::string label;
};

/// Normalized adjacency of every relation of `g`.
inline std::vector<AdjPtr> normalized_relations(const MultiplexGraph& g) {
  std::vector<AdjPtr> out;
  for (const auto& rel : g.relations) out.push_back(std::make_shared<const SparseMatrix>(normalize_adjacency(rel)));
  return out;
}

/// Build masks, augmentations and contrastive negatives from (seed, label).
/// With no_mask every node and edge becomes a reconstruction target and no
/// edge is removed from the encoder graph.
inline EpochPlan make_epoch_plan(const MultiplexGraph& g, const std::vector<AdjPtr>& full_adj, const MaskConfig& mcfg,
                                 const RwrConfig& rcfg, bool no_mask, std::uint64_t seed, const std::string& label) {
  EpochPlan p;
  p.no_mask = no_mask;
  p.seed = seed;
  p.label = label;
  const RngStream base(seed, label);
  MaskConfig orig = mcfg;
  if (no_mask) orig.mask_ratio = 1.0;
  p.mask = plan_masks(g, orig, substream(base, "mask"));
  p.aug = plan_augmentations(g, mcfg, rcfg, substream(base, "aug"));

  const std::size_t n = g.node_count();
  if (n >= 2) {
    RngStream s = substream(base, "cl");
    p.cl_negatives.resize(n);
    for (NodeId i = 0; i < n; ++i) {
      NodeId j = s.uniform_index(n - 1);
      p.cl_negatives[i] = j >= i ? j + 1 : j;
    }
  }

  const std::size_t R = g.relation_count(), K = mcfg.repeats;
  p.edge_masked.assign(R, {});
  p.subgraph_cut.assign(R, {});
  p.subgraph_union.assign(K, {});
  for (std::size_t r = 0; r < R; ++r)
    for (std::size_t k = 0; k < K; ++k) {
      if (no_mask) {
        p.edge_masked[r].push_back(full_adj[r]);
        p.subgraph_cut[r].push_back(full_adj[r]);
      } else {
        p.edge_masked[r].push_back(
            std::make_shared<const SparseMatrix>(normalize_adjacency(without_edges(g.relations[r], p.mask.masked_edges[r][k].edges))));
        p.subgraph_cut[r].push_back(
            std::make_shared<const SparseMatrix>(normalize_adjacency(without_edges(g.relations[r], p.aug.subgraphs[r][k].induced.edges))));
      }
    }
  for (std::size_t k = 0; k < K; ++k) {
    std::vector<char> in(n, 0);
    for (std::size_t r = 0; r < R; ++r)
      for (NodeId v : p.aug.subgraphs[r][k].nodes)
        if (!in[v]) {
          in[v] = 1;
          p.subgraph_union[k].push_back(v);
        }
    std::sort(p.subgraph_union[k].begin(), p.subgraph_union[k].end());
  }
  return p;
}

/// X_hat = Â^dec (Â^enc (X W_enc)) W_dec : linear SGC stacks.
inline Var encode_decode(Var input, const AdjPtr& a_hat, Var enc_w, Var dec_w, const ModelConfig& cfg) {
  Var h = ad::propagate(a_hat, ad::matmul(input, enc_w), cfg.enc_layers);
  return ad::matmul(ad::propagate(a_hat, h, cfg.dec_layers), dec_w);
}

/// sum_r softmax(logits)_r * M_r.
inline Var aggregate_relations(std::span<const Var> per_relation, Var logits) {
  if (per_relation.empty()) throw ShapeMismatch("aggregate_relations: empty list");
  return ad::weighted_sum(per_relation, ad::softmax(logits));
}

/// Negative log-likelihood of each masked edge against its negatives, summed.
/// Scores are inner products of the embedding rows.
inline Var edge_reconstruction_nll(Var emb, const EdgeMask& m) {
  const std::size_t group = 1 + (m.negatives.empty() ? 0 : m.negatives.front().size());
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  std::vector<ad::NllGroup> groups;
  pairs.reserve(m.edges.size() * group);
  for (std::size_t e = 0; e < m.edges.size(); ++e) {
    const auto [v, u] = m.edges[e];
    ad::NllGroup gr{pairs.size(), {}};
    gr.denom.push_back(pairs.size());
    pairs.emplace_back(v, u);
    for (NodeId neg : m.negatives[e]) {
      gr.denom.push_back(pairs.size());
      pairs.emplace_back(v, neg);
    }
    groups.push_back(std::move(gr));
  }
  return ad::grouped_nll(ad::pair_dots(emb, emb, std::move(pairs)), std::move(groups));
}

inline Var zero_scalar(Tape& t) { return t.constant(Matrix(1, 1, 0.0)); }

/// sum_k mean_{i in rows_k} (1 - cos(x_tilde_k(i), target(i)))^eta, skipping empty k.
inline Var attr_recon_loss(std::span<const Var> per_k, const Matrix& target, std::span<const std::vector<NodeId>> rows, double eta) {
  Tape& t = *per_k.front().tape;
  std::vector<Var> terms;
  for (std::size_t k = 0; k < per_k.size(); ++k)
    if (!rows[k].empty()) terms.push_back(ad::scaled_cosine_loss(per_k[k], target, rows[k], eta));
  return terms.empty() ? zero_scalar(t) : ad::sum_of(terms);
}

/// sum_r b^r sum_k edge NLL; `emb[r][k]` are the per-(r, k) decoder outputs.
inline Var struct_recon_loss(const std::vector<std::vector<Var>>& emb, const std::vector<std::vector<const EdgeMask*>>& masks,
                             Var struct_logits) {
  Tape& t = *struct_logits.tape;
  std::vector<Var> per_relation;
  for (std::size_t r = 0; r < emb.size(); ++r) {
    std::vector<Var> terms;
    for (std::size_t k = 0; k < emb[r].size(); ++k)
      if (!masks[r][k]->edges.empty()) terms.push_back(edge_reconstruction_nll(emb[r][k], *masks[r][k]));
    per_relation.push_back(terms.empty() ? zero_scalar(t) : ad::sum_of(terms));
  }
  return ad::weighted_sum(per_relation, ad::softmax(struct_logits));
}

/// sigmoid(X X^T): reconstructed structure from a reconstructed attribute matrix.
inline Matrix subgraph_struct_matrix(const Matrix& x_tilde) {
  Matrix g(x_tilde.rows(), x_tilde.rows());
  gemm_nt_acc(x_tilde, x_tilde, g);
  for (double& v : g.values()) v = sigmoid(v);
  return g;
}

/// One anchor/augmented pair of the dual-view objective over l2-normalized rows:
/// sum_i -log exp(o_i.a_i) / (exp(o_i.o_j) + exp(o_i.a_j)) with the positive
/// optionally added to the denominator.
inline Var contrastive_pair_loss(Var z_orig_n, Var z_aug_n, std::span<const NodeId> negatives, ClDenominator mode) {
  const std::size_t n = z_orig_n.value().rows();
  std::vector<std::pair<std::size_t, std::size_t>> pos, neg_oo, neg_oa;
  for (NodeId i = 0; i < n; ++i) {
    pos.emplace_back(i, i);
    neg_oo.emplace_back(i, negatives[i]);
    neg_oa.emplace_back(i, negatives[i]);
  }
  const std::array<Var, 3> parts{ad::pair_dots(z_orig_n, z_aug_n, std::move(pos)), ad::pair_dots(z_orig_n, z_orig_n, std::move(neg_oo)),
                                 ad::pair_dots(z_orig_n, z_aug_n, std::move(neg_oa))};
  std::vector<ad::NllGroup> groups;
  for (std::size_t i = 0; i < n; ++i) {
    ad::NllGroup g{i, {n + i, 2 * n + i}};
    if (mode == ClDenominator::InfoNce) g.denom.insert(g.denom.begin(), i);
    groups.push_back(std::move(g));
  }
  return ad::grouped_nll(ad::vconcat(parts), std::move(groups));
}

/// L_CL = L(orig, attr_aug) + L(orig, sub_aug); rows normalized first.
/// Either augmented input may be absent (nullptr-tape Var) when its view is ablated.
inline Var contrastive_loss(Var z_orig, const Var* z_attr_aug, const Var* z_sub_aug, std::span<const NodeId> negatives, ClDenominator mode) {
  Var zo = ad::normalize_rows(z_orig);
  std::vector<Var> terms;
  if (z_attr_aug) terms.push_back(contrastive_pair_loss(zo, ad::normalize_rows(*z_attr_aug), negatives, mode));
  if (z_sub_aug) terms.push_back(contrastive_pair_loss(zo, ad::normalize_rows(*z_sub_aug), negatives, mode));
  return terms.empty() ? zero_scalar(*z_orig.tape) : ad::sum_of(terms);
}

/// Loss components of one evaluation. Ablated parts are constant zeros.
struct LossParts {
  Var attr;        // L_A
  Var structure;   // L_S
  Var original;    // L_O
  Var attr_aug;    // L_A_Aug
  Var sub_attr;    // L_sa
  Var sub_struct;  // L_ss
  Var sub_aug;     // L_S_Aug
  Var contrast;    // L_CL
  Var total;
};

/// L = L_O + lambda L_A_Aug + mu L_S_Aug + Theta L_CL.
inline Var total_loss(Var l_o, Var l_a_aug, Var l_s_aug, Var l_cl, const LossWeights& w) {
  const std::array<Var, 4> terms{l_o, ad::scale(l_a_aug, w.lambda), ad::scale(l_s_aug, w.mu), ad::scale(l_cl, w.theta)};
  return ad::sum_of(terms);
}

/// Per-branch reconstructions: per_rk[r][k] raw decoder outputs,
/// aggregated[k] the relation-weighted sum (attribute branches only).
struct BranchOutputs {
  std::vector<std::vector<Var>> per_rk;
  std::vector<Var> aggregated;
};

struct ForwardOptions {
  double dropout = 0.0;  // encoder-input dropout, training only
  bool training = true;
};

/// Shared, read-only inputs for forward passes over one graph.
struct ModelContext {
  const MultiplexGraph* graph = nullptr;
  std::vector<AdjPtr> full_adj;
  ModelConfig cfg;
  AugTarget aug_target = AugTarget::Original;

  ModelContext(const MultiplexGraph& g, const ModelConfig& c) : graph(&g), full_adj(normalized_relations(g)), cfg(c), aug_target(c.aug_target) {}
};

inline Matrix dropout_mask(std::size_t rows, std::size_t cols, double rate, RngStream& s) {
  Matrix m(rows, cols);
  const double keep = 1.0 / (1.0 - rate);
  for (double& v : m.values()) v = s.bernoulli(rate) ? 0.0 : keep;
  return m;
}

/// Encoder input of one (branch, r, k), before dropout.
inline Var branch_input(Tape& t, const ModelContext& ctx, const EpochPlan& plan, Branch b, std::size_t r, std::size_t k, Var token) {
  const Matrix& x = ctx.graph->attributes;
  switch (b) {
    case Branch::OriginalAttr:
      if (plan.no_mask) return t.constant(x);
      return apply_attribute_mask(t, x, plan.mask.masked_nodes[k], token);
    case Branch::OriginalStruct:
      return t.constant(x);
    case Branch::AttrAug: {
      Matrix swapped = x;
      std::vector<NodeId> targets;
      for (auto [target, donor] : plan.aug.swaps[k]) {
        std::copy(x.row(donor).begin(), x.row(donor).end(), swapped.row(target).begin());
        targets.push_back(target);
      }
      if (plan.no_mask) return t.constant(std::move(swapped));
      return apply_attribute_mask(t, swapped, targets, token);
    }
    case Branch::SubAug:
      if (plan.no_mask) return t.constant(x);
      return apply_attribute_mask(t, x, plan.aug.subgraphs[r][k].nodes, token);
  }
  throw ShapeMismatch("unknown branch");
}

inline const AdjPtr& branch_adjacency(const ModelContext& ctx, const EpochPlan& plan, Branch b, std::size_t r, std::size_t k) {
  switch (b) {
    case Branch::OriginalStruct:
      return plan.edge_masked[r][k];
    case Branch::SubAug:
      return plan.subgraph_cut[r][k];
    default:
      return ctx.full_adj[r];
  }
}

inline View branch_view(Branch b) {
  switch (b) {
    case Branch::AttrAug:
      return View::AttrAug;
    case Branch::SubAug:
      return View::SubAug;
    default:
      return View::Original;
  }
}

/// Run every (r, k) autoencoder of one branch.
inline BranchOutputs run_branch(Tape& t, const ModelContext& ctx, ModelParams& params, const EpochPlan& plan, Branch b,
                                const ForwardOptions& opt, Var token) {
  const std::size_t R = params.relations(), K = params.repeats();
  BranchOutputs out;
  out.per_rk.assign(R, {});
  for (std::size_t r = 0; r < R; ++r)
    for (std::size_t k = 0; k < K; ++k) {
      Var in = branch_input(t, ctx, plan, b, r, k, token);
      if (opt.training && opt.dropout > 0.0) {
        RngStream s(plan.seed, plan.label + "/dropout/" + branch_name(b) + "/" + rk_label(r, k));
        in = ad::hadamard_const(in, dropout_mask(in.value().rows(), in.value().cols(), opt.dropout, s));
      }
      out.per_rk[r].push_back(encode_decode(in, branch_adjacency(ctx, plan, b, r, k), t.param(params.enc(b, r, k)),
                                            t.param(params.dec(b, r, k)), ctx.cfg));
    }
  if (b != Branch::OriginalStruct) {
    Var logits = t.param(params.attr_logits(branch_view(b)));
    for (std::size_t k = 0; k < K; ++k) {
      std::vector<Var> per_r;
      for (std::size_t r = 0; r < R; ++r) per_r.push_back(out.per_rk[r][k]);
      out.aggregated.push_back(aggregate_relations(per_r, logits));
    }
  }
  return out;
}

/// Evaluate every active loss term on one plan.
inline LossParts compute_losses(Tape& t, const ModelContext& ctx, ModelParams& params, const EpochPlan& plan, const LossWeights& w,
                                const Ablation& abl, const ForwardOptions& opt) {
  const Matrix& x = ctx.graph->attributes;
  const std::size_t R = params.relations(), K = params.repeats();
  const double eta = ctx.cfg.eta;
  Var token = t.param(params.mask_token());
  LossParts lp;
  lp.attr = lp.structure = lp.original = lp.attr_aug = lp.sub_attr = lp.sub_struct = lp.sub_aug = lp.contrast = zero_scalar(t);

  std::optional<Var> z_orig, z_attr, z_sub;

  if (abl.original_active()) {
    BranchOutputs oa = run_branch(t, ctx, params, plan, Branch::OriginalAttr, opt, token);
    lp.attr = attr_recon_loss(oa.aggregated, x, plan.mask.masked_nodes, eta);
    BranchOutputs os = run_branch(t, ctx, params, plan, Branch::OriginalStruct, opt, token);
    std::vector<std::vector<const EdgeMask*>> masks(R);
    for (std::size_t r = 0; r < R; ++r)
      for (std::size_t k = 0; k < K; ++k) masks[r].push_back(&plan.mask.masked_edges[r][k]);
    lp.structure = struct_recon_loss(os.per_rk, masks, t.param(params.struct_logits(View::Original)));
    const std::array<Var, 2> parts{ad::scale(lp.attr, w.alpha), ad::scale(lp.structure, 1.0 - w.alpha)};
    lp.original = ad::sum_of(parts);
    z_orig = ad::mean_of(oa.aggregated);
  }

  if (abl.attr_aug_active()) {
    BranchOutputs aa = run_branch(t, ctx, params, plan, Branch::AttrAug, opt, token);
    std::vector<std::vector<NodeId>> rows(K);
    Matrix donor_target;
    for (std::size_t k = 0; k < K; ++k)
      for (auto [target, donor] : plan.aug.swaps[k]) rows[k].push_back(target);
    if (ctx.aug_target == AugTarget::Donor) {
      std::vector<Var> terms;
      for (std::size_t k = 0; k < K; ++k) {
        if (rows[k].empty()) continue;
        Matrix tgt = x;
        for (auto [target, donor] : plan.aug.swaps[k]) std::copy(x.row(donor).begin(), x.row(donor).end(), tgt.row(target).begin());
        terms.push_back(ad::scaled_cosine_loss(aa.aggregated[k], tgt, rows[k], eta));
      }
      lp.attr_aug = terms.empty() ? zero_scalar(t) : ad::sum_of(terms);
    } else {
      lp.attr_aug = attr_recon_loss(aa.aggregated, x, rows, eta);
    }
    z_attr = ad::mean_of(aa.aggregated);
  }

  if (abl.sub_aug_active()) {
    BranchOutputs sa = run_branch(t, ctx, params, plan, Branch::SubAug, opt, token);
    lp.sub_attr = attr_recon_loss(sa.aggregated, x, plan.subgraph_union, eta);
    std::vector<std::vector<const EdgeMask*>> masks(R);
    for (std::size_t r = 0; r < R; ++r)
      for (std::size_t k = 0; k < K; ++k) masks[r].push_back(&plan.aug.subgraphs[r][k].induced);
    lp.sub_struct = struct_recon_loss(sa.per_rk, masks, t.param(params.struct_logits(View::SubAug)));
    const std::array<Var, 2> parts{ad::scale(lp.sub_attr, w.beta), ad::scale(lp.sub_struct, 1.0 - w.beta)};
    lp.sub_aug = ad::sum_of(parts);
    z_sub = ad::mean_of(sa.aggregated);
  }

  if (abl.cl_active() && z_orig && plan.cl_negatives.size() == x.rows()) {
    lp.contrast = contrastive_loss(*z_orig, z_attr ? &*z_attr : nullptr, z_sub ? &*z_sub : nullptr, plan.cl_negatives,
                                   ctx.cfg.cl_denominator);
  }

  std::vector<Var> terms;
  if (abl.original_active()) terms.push_back(lp.original);
  if (abl.attr_aug_active()) terms.push_back(ad::scale(lp.attr_aug, w.lambda));
  if (abl.sub_aug_active()) terms.push_back(ad::scale(lp.sub_aug, w.mu));
  if (abl.cl_active()) terms.push_back(ad::scale(lp.contrast, w.theta));
  lp.total = ad::sum_of(terms);
  return lp;
}

/// Mean-over-K aggregated attribute reconstruction of one view, gradients off.
inline Matrix reconstruct_view(const ModelContext& ctx, const ModelParams& params, const EpochPlan& plan, View v) {
  Tape t(false);
  ModelParams p = params;
  Var token = t.param(p.mask_token());
  const Branch b = v == View::Original ? Branch::OriginalAttr : (v == View::AttrAug ? Branch::AttrAug : Branch::SubAug);
  BranchOutputs out = run_branch(t, ctx, p, plan, b, ForwardOptions{0.0, false}, token);
  return ad::mean_of(out.aggregated).value();
}

}  // namespace umgad
