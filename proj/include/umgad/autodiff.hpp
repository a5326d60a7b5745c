#pragma once

// Reverse-accumulation over dense matrices.
//
// A Tape records one forward evaluation. Every op appends a node holding its
// value and a closure that pushes the node's gradient into its inputs. The
// tape is single-use: backward() consumes it. ParamTensor leaves accumulate
// into ParamTensor::grad when backward finishes.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "umgad/errors.hpp"
#include "umgad/matrix.hpp"

namespace umgad {

/// A trainable tensor with its accumulated gradient.
struct ParamTensor {
  std::string name;
  Matrix value;
  Matrix grad;

  ParamTensor() = default;
  ParamTensor(std::string n, Matrix v) : name(std::move(n)), value(std::move(v)), grad(value.rows(), value.cols()) {}

  void zero_grad() {
    if (!grad.same_shape(value)) grad = Matrix(value.rows(), value.cols());
    grad.fill(0.0);
  }
};

class Tape;

/// Handle to a node on a tape.
struct Var {
  Tape* tape = nullptr;
  std::size_t id = 0;

  const Matrix& value() const;
  double scalar() const { return value()(0, 0); }
};

class Tape {
 public:
  using Backward = std::function<void(Tape&, std::size_t self)>;

  Tape() = default;
  /// With gradients disabled, parameters enter as constants and no closures are kept.
  explicit Tape(bool grad_enabled) : grad_enabled_(grad_enabled) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Matrix v) { return push(std::move(v), false, {}); }

  Var param(ParamTensor& p) {
    Var v = push(p.value, grad_enabled_, {});
    nodes_[v.id].param = &p;
    return v;
  }

  /// Record an op result. `inputs` decide whether the result needs a gradient.
  Var record(Matrix value, std::initializer_list<Var> inputs, Backward bw) {
    bool needs = false;
    for (const Var& in : inputs) needs = needs || requires_grad(in);
    return push(std::move(value), needs, needs ? std::move(bw) : Backward{});
  }
  Var record_n(Matrix value, std::span<const Var> inputs, Backward bw) {
    bool needs = false;
    for (const Var& in : inputs) needs = needs || requires_grad(in);
    return push(std::move(value), needs, needs ? std::move(bw) : Backward{});
  }

  const Matrix& value(std::size_t id) const { return nodes_[id].value; }
  const Matrix& grad(std::size_t id) const { return nodes_[id].grad; }
  bool requires_grad(const Var& v) const { return nodes_[v.id].requires_grad; }

  /// grad(id) += g, skipping nodes that do not need a gradient.
  void accumulate(std::size_t id, const Matrix& g) {
    Node& n = nodes_[id];
    if (!n.requires_grad) return;
    if (n.grad.empty()) n.grad = Matrix(n.value.rows(), n.value.cols());
    n.grad += g;
  }
  /// Direct mutable access for ops that scatter into the gradient.
  Matrix* grad_slot(std::size_t id) {
    Node& n = nodes_[id];
    if (!n.requires_grad) return nullptr;
    if (n.grad.empty()) n.grad = Matrix(n.value.rows(), n.value.cols());
    return &n.grad;
  }

  std::size_t size() const noexcept { return nodes_.size(); }

  /// Propagate d(loss)/d(node) for every node reachable from a 1x1 loss.
  void backward(Var loss) {
    if (consumed_) throw GraphConsumed();
    consumed_ = true;
    Node& root = nodes_[loss.id];
    if (root.value.rows() != 1 || root.value.cols() != 1) throw ShapeMismatch("backward needs a 1x1 loss");
    if (!root.requires_grad) return;
    root.grad = Matrix(1, 1, 1.0);
    for (std::size_t i = loss.id + 1; i-- > 0;) {
      Node& n = nodes_[i];
      if (n.grad.empty()) continue;
      if (n.backward) {
        n.backward(*this, i);
      } else if (n.param != nullptr) {
        n.param->grad += n.grad;
      }
    }
  }

  bool consumed() const noexcept { return consumed_; }

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    Backward backward;
    ParamTensor* param = nullptr;
    bool requires_grad = false;
  };

  Var push(Matrix v, bool needs_grad, Backward bw) {
    if (!v.all_finite()) throw NumericalError("non-finite value produced on tape (node " + std::to_string(nodes_.size()) + ")");
    nodes_.push_back(Node{std::move(v), Matrix{}, std::move(bw), nullptr, needs_grad});
    return Var{this, nodes_.size() - 1};
  }

  std::vector<Node> nodes_;
  bool consumed_ = false;
  bool grad_enabled_ = true;
};

inline const Matrix& Var::value() const { return tape->value(id); }

namespace ad {

inline Var matmul(Var a, Var b) {
  Tape& t = *a.tape;
  Matrix out = multiply(a.value(), b.value());
  return t.record(std::move(out), {a, b}, [a, b](Tape& tp, std::size_t self) {
    const Matrix& g = tp.grad(self);
    if (Matrix* ga = tp.grad_slot(a.id)) gemm_nt_acc(g, tp.value(b.id), *ga);
    if (Matrix* gb = tp.grad_slot(b.id)) gemm_tn_acc(tp.value(a.id), g, *gb);
  });
}

/// a_hat^hops * h, a_hat held constant.
inline Var propagate(std::shared_ptr<const SparseMatrix> a_hat, Var h, int hops) {
  Tape& t = *h.tape;
  if (a_hat->rows != a_hat->cols || a_hat->cols != h.value().rows()) throw ShapeMismatch("propagate: shape mismatch");
  if (hops <= 0) return h;
  Matrix out = h.value();
  for (int i = 0; i < hops; ++i) out = spmm(*a_hat, out);
  return t.record(std::move(out), {h}, [a_hat, h, hops](Tape& tp, std::size_t self) {
    Matrix g = tp.grad(self);
    for (int i = 0; i < hops; ++i) g = spmm_t(*a_hat, g);
    tp.accumulate(h.id, g);
  });
}

inline Var add(Var a, Var b) {
  if (!a.value().same_shape(b.value())) throw ShapeMismatch("add: shape mismatch");
  Matrix out = a.value();
  out += b.value();
  return a.tape->record(std::move(out), {a, b}, [a, b](Tape& tp, std::size_t self) {
    tp.accumulate(a.id, tp.grad(self));
    tp.accumulate(b.id, tp.grad(self));
  });
}

inline Var scale(Var a, double s) {
  Matrix out = a.value();
  out *= s;
  return a.tape->record(std::move(out), {a}, [a, s](Tape& tp, std::size_t self) {
    Matrix g = tp.grad(self);
    g *= s;
    tp.accumulate(a.id, g);
  });
}

/// Sum of same-shaped terms.
inline Var sum_of(std::span<const Var> terms) {
  if (terms.empty()) throw ShapeMismatch("sum_of: empty list");
  Matrix out = terms[0].value();
  for (std::size_t i = 1; i < terms.size(); ++i) out += terms[i].value();
  std::vector<Var> ins(terms.begin(), terms.end());
  return terms[0].tape->record_n(std::move(out), terms, [ins](Tape& tp, std::size_t self) {
    for (const Var& v : ins) tp.accumulate(v.id, tp.grad(self));
  });
}

inline Var mean_of(std::span<const Var> terms) { return scale(sum_of(terms), 1.0 / static_cast<double>(terms.size())); }

/// Sum of all entries -> 1x1.
inline Var sum(Var a) {
  double s = 0.0;
  for (double v : a.value().values()) s += v;
  return a.tape->record(Matrix(1, 1, s), {a}, [a](Tape& tp, std::size_t self) {
    const double g = tp.grad(self)(0, 0);
    const Matrix& av = tp.value(a.id);
    tp.accumulate(a.id, Matrix(av.rows(), av.cols(), g));
  });
}

/// Elementwise product with a constant matrix (dropout masks).
inline Var hadamard_const(Var a, Matrix mask) {
  if (!a.value().same_shape(mask)) throw ShapeMismatch("hadamard: shape mismatch");
  Matrix out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out.values()[i] *= mask.values()[i];
  auto m = std::make_shared<const Matrix>(std::move(mask));
  return a.tape->record(std::move(out), {a}, [a, m](Tape& tp, std::size_t self) {
    Matrix g = tp.grad(self);
    for (std::size_t i = 0; i < g.size(); ++i) g.values()[i] *= m->values()[i];
    tp.accumulate(a.id, g);
  });
}

/// Copy of x with the listed rows replaced by the 1 x f token.
inline Var replace_rows(Var x, std::span<const std::size_t> rows, Var token) {
  const Matrix& xv = x.value();
  const Matrix& tv = token.value();
  if (tv.rows() != 1 || tv.cols() != xv.cols()) throw ShapeMismatch("replace_rows: token must be 1 x f");
  Matrix out = xv;
  for (std::size_t r : rows) std::copy(tv.values().begin(), tv.values().end(), out.row(r).begin());
  std::vector<std::size_t> idx(rows.begin(), rows.end());
  std::vector<char> is_masked(xv.rows(), 0);
  for (std::size_t r : idx) is_masked[r] = 1;
  return x.tape->record(std::move(out), {x, token}, [x, token, idx, is_masked](Tape& tp, std::size_t self) {
    const Matrix& g = tp.grad(self);
    if (Matrix* gt = tp.grad_slot(token.id)) {
      for (std::size_t r : idx)
        for (std::size_t j = 0; j < g.cols(); ++j) (*gt)(0, j) += g(r, j);
    }
    if (Matrix* gx = tp.grad_slot(x.id)) {
      for (std::size_t r = 0; r < g.rows(); ++r) {
        if (is_masked[r]) continue;
        for (std::size_t j = 0; j < g.cols(); ++j) (*gx)(r, j) += g(r, j);
      }
    }
  });
}

/// Softmax over all entries of a 1 x R row.
inline Var softmax(Var logits) {
  const Matrix& l = logits.value();
  const double mx = *std::max_element(l.values().begin(), l.values().end());
  Matrix out(l.rows(), l.cols());
  double z = 0.0;
  for (std::size_t i = 0; i < l.size(); ++i) z += (out.values()[i] = std::exp(l.values()[i] - mx));
  out *= 1.0 / z;
  return logits.tape->record(std::move(out), {logits}, [logits](Tape& tp, std::size_t self) {
    const Matrix& s = tp.value(self);
    const Matrix& g = tp.grad(self);
    double gs = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) gs += g.values()[i] * s.values()[i];
    Matrix gl(s.rows(), s.cols());
    for (std::size_t i = 0; i < s.size(); ++i) gl.values()[i] = s.values()[i] * (g.values()[i] - gs);
    tp.accumulate(logits.id, gl);
  });
}

/// sum_r weights[r] * terms[r]; weights is a 1 x R row.
inline Var weighted_sum(std::span<const Var> terms, Var weights) {
  const Matrix& w = weights.value();
  if (terms.empty() || w.size() != terms.size()) throw ShapeMismatch("weighted_sum: weight count mismatch");
  Matrix out(terms[0].value().rows(), terms[0].value().cols());
  for (std::size_t r = 0; r < terms.size(); ++r) {
    const Matrix& m = terms[r].value();
    if (!m.same_shape(out)) throw ShapeMismatch("weighted_sum: term shape mismatch");
    for (std::size_t i = 0; i < m.size(); ++i) out.values()[i] += w.values()[r] * m.values()[i];
  }
  std::vector<Var> ins(terms.begin(), terms.end());
  ins.push_back(weights);
  return weights.tape->record_n(std::move(out), ins, [ins](Tape& tp, std::size_t self) {
    const Matrix& g = tp.grad(self);
    const Var weights = ins.back();
    const Matrix& w = tp.value(weights.id);
    Matrix* gw = tp.grad_slot(weights.id);
    for (std::size_t r = 0; r + 1 < ins.size(); ++r) {
      const Matrix& m = tp.value(ins[r].id);
      if (gw) {
        double s = 0.0;
        for (std::size_t i = 0; i < m.size(); ++i) s += g.values()[i] * m.values()[i];
        gw->values()[r] += s;
      }
      if (Matrix* gm = tp.grad_slot(ins[r].id)) {
        const double wr = w.values()[r];
        for (std::size_t i = 0; i < m.size(); ++i) gm->values()[i] += wr * g.values()[i];
      }
    }
  });
}

/// Rows scaled to unit l2 norm (norm floored at 1e-12).
inline Var normalize_rows(Var a) {
  const Matrix& av = a.value();
  Matrix out = av;
  std::vector<double> norms(av.rows());
  for (std::size_t r = 0; r < av.rows(); ++r) {
    norms[r] = std::max(norm2(av.row(r)), 1e-12);
    for (double& v : out.row(r)) v /= norms[r];
  }
  return a.tape->record(std::move(out), {a}, [a, norms](Tape& tp, std::size_t self) {
    const Matrix& y = tp.value(self);
    const Matrix& g = tp.grad(self);
    Matrix ga(y.rows(), y.cols());
    for (std::size_t r = 0; r < y.rows(); ++r) {
      const double gy = dot(g.row(r), y.row(r));
      for (std::size_t j = 0; j < y.cols(); ++j) ga(r, j) = (g(r, j) - y(r, j) * gy) / norms[r];
    }
    tp.accumulate(a.id, ga);
  });
}

/// Column of row dot products: out[p] = a.row(pairs[p].first) . b.row(pairs[p].second).
inline Var pair_dots(Var a, Var b, std::vector<std::pair<std::size_t, std::size_t>> pairs) {
  const Matrix& av = a.value();
  const Matrix& bv = b.value();
  if (av.cols() != bv.cols()) throw ShapeMismatch("pair_dots: column mismatch");
  Matrix out(pairs.size(), 1);
  for (std::size_t p = 0; p < pairs.size(); ++p) out(p, 0) = dot(av.row(pairs[p].first), bv.row(pairs[p].second));
  auto ps = std::make_shared<const std::vector<std::pair<std::size_t, std::size_t>>>(std::move(pairs));
  return a.tape->record(std::move(out), {a, b}, [a, b, ps](Tape& tp, std::size_t self) {
    const Matrix& g = tp.grad(self);
    const Matrix& av = tp.value(a.id);
    const Matrix& bv = tp.value(b.id);
    Matrix* ga = tp.grad_slot(a.id);
    Matrix* gb = tp.grad_slot(b.id);
    for (std::size_t p = 0; p < ps->size(); ++p) {
      const double gp = g(p, 0);
      if (gp == 0.0) continue;
      const auto [i, j] = (*ps)[p];
      if (ga)
        for (std::size_t c = 0; c < av.cols(); ++c) (*ga)(i, c) += gp * bv(j, c);
      if (gb)
        for (std::size_t c = 0; c < av.cols(); ++c) (*gb)(j, c) += gp * av(i, c);
    }
  });
}

/// Stack column vectors (n_i x 1) into one.
inline Var vconcat(std::span<const Var> parts) {
  std::size_t total = 0;
  for (const Var& p : parts) {
    if (p.value().cols() != 1) throw ShapeMismatch("vconcat: expects column vectors");
    total += p.value().rows();
  }
  Matrix out(total, 1);
  std::size_t off = 0;
  for (const Var& p : parts) {
    std::copy(p.value().values().begin(), p.value().values().end(), out.values().begin() + static_cast<std::ptrdiff_t>(off));
    off += p.value().rows();
  }
  std::vector<Var> ins(parts.begin(), parts.end());
  return parts[0].tape->record_n(std::move(out), parts, [ins](Tape& tp, std::size_t self) {
    const Matrix& g = tp.grad(self);
    std::size_t off = 0;
    for (const Var& p : ins) {
      const std::size_t n = tp.value(p.id).rows();
      if (Matrix* gp = tp.grad_slot(p.id))
        for (std::size_t i = 0; i < n; ++i) (*gp)(i, 0) += g(off + i, 0);
      off += n;
    }
  });
}

/// One softmax cross-entropy group: -s[target] + log sum_{d in denom} exp(s[d]).
struct NllGroup {
  std::size_t target;
  std::vector<std::size_t> denom;
};

/// Sum of group negative log-likelihoods over a column of scores, with
/// max-subtraction inside each log-sum-exp.
inline Var grouped_nll(Var scores, std::vector<NllGroup> groups) {
  const Matrix& s = scores.value();
  double total = 0.0;
  for (const NllGroup& gr : groups) {
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t d : gr.denom) mx = std::max(mx, s(d, 0));
    double z = 0.0;
    for (std::size_t d : gr.denom) z += std::exp(s(d, 0) - mx);
    total += -s(gr.target, 0) + mx + std::log(z);
  }
  auto gs = std::make_shared<const std::vector<NllGroup>>(std::move(groups));
  return scores.tape->record(Matrix(1, 1, total), {scores}, [scores, gs](Tape& tp, std::size_t self) {
    const double g = tp.grad(self)(0, 0);
    const Matrix& s = tp.value(scores.id);
    Matrix gsc(s.rows(), 1);
    for (const NllGroup& gr : *gs) {
      double mx = -std::numeric_limits<double>::infinity();
      for (std::size_t d : gr.denom) mx = std::max(mx, s(d, 0));
      double z = 0.0;
      for (std::size_t d : gr.denom) z += std::exp(s(d, 0) - mx);
      for (std::size_t d : gr.denom) gsc(d, 0) += g * std::exp(s(d, 0) - mx) / z;
      gsc(gr.target, 0) -= g;
    }
    tp.accumulate(scores.id, gsc);
  });
}

/// mean over `rows` of (1 - cos(x_hat_i, x_i))^eta. x is a constant target.
inline Var scaled_cosine_loss(Var x_hat, const Matrix& x, std::span<const std::size_t> rows, double eta) {
  const Matrix& xh = x_hat.value();
  if (!xh.same_shape(x)) throw ShapeMismatch("scaled_cosine_loss: shape mismatch");
  if (rows.empty()) throw ShapeMismatch("scaled_cosine_loss: empty row set");
  constexpr double kFloor = 1e-12;
  struct RowTerm {
    std::size_t row;
    double na, nb, cos;
  };
  std::vector<RowTerm> terms;
  terms.reserve(rows.size());
  double total = 0.0;
  for (std::size_t r : rows) {
    const double na = norm2(xh.row(r));
    const double nb = norm2(x.row(r));
    if (na < kFloor || nb < kFloor)
      throw DegenerateRow("scaled_cosine_loss: row " + std::to_string(r) + " has near-zero norm");
    const double c = std::clamp(dot(xh.row(r), x.row(r)) / (na * nb), -1.0, 1.0);
    terms.push_back({r, na, nb, c});
    total += std::pow(1.0 - c, eta);
  }
  const double inv = 1.0 / static_cast<double>(rows.size());
  auto target = std::make_shared<const Matrix>(x);
  return x_hat.tape->record(Matrix(1, 1, total * inv), {x_hat}, [x_hat, target, terms, eta, inv](Tape& tp, std::size_t self) {
    const double g = tp.grad(self)(0, 0) * inv;
    const Matrix& xh = tp.value(x_hat.id);
    Matrix* gx = tp.grad_slot(x_hat.id);
    if (!gx) return;
    for (const RowTerm& t : terms) {
      // d/da (1-c)^eta = -eta (1-c)^(eta-1) * (b/(|a||b|) - c a/|a|^2)
      const double one_minus = std::max(1.0 - t.cos, 0.0);
      const double coef = -eta * (eta == 1.0 ? 1.0 : std::pow(one_minus, eta - 1.0)) * g;
      const auto a = xh.row(t.row);
      const auto b = target->row(t.row);
      for (std::size_t j = 0; j < a.size(); ++j)
        (*gx)(t.row, j) += coef * (b[j] / (t.na * t.nb) - t.cos * a[j] / (t.na * t.na));
    }
  });
}

}  // namespace ad

/// Scalar form of the edge softmax objective: for each positive score,
/// -log(exp(s+) / (exp(s+) + sum exp(s-))). Max-subtracted.
inline double edge_softmax_nll(std::span<const double> scores_pos, std::span<const std::vector<double>> scores_neg) {
  if (scores_pos.size() != scores_neg.size()) throw ShapeMismatch("edge_softmax_nll: one negative list per edge");
  double total = 0.0;
  for (std::size_t e = 0; e < scores_pos.size(); ++e) {
    double mx = scores_pos[e];
    for (double s : scores_neg[e]) mx = std::max(mx, s);
    double z = std::exp(scores_pos[e] - mx);
    for (double s : scores_neg[e]) z += std::exp(s - mx);
    total += -(scores_pos[e] - mx) + std::log(z);
  }
  if (!std::isfinite(total)) throw NumericalError("edge_softmax_nll overflow");
  return total;
}

}  // namespace umgad
