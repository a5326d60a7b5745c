#pragma once

#include <chrono>
#include <cmath>
#include <ostream>
#include <string>
#include <vector>

#include "umgad/model.hpp"
#include "umgad/optim.hpp"

namespace umgad {

struct TrainConfig {
  int epochs = 100;
  double lr = 1e-3;
  double weight_decay = 0.01;
  double dropout = 0.1;
  std::uint64_t seed = 0;
  int replan_every = 1;
  Ablation ablation;

  void validate() const {
    if (epochs < 1) throw ConfigError("epochs must be >= 1");
    if (replan_every < 1) throw ConfigError("replan_every must be >= 1");
    if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("dropout must lie in [0, 1)");
    if (!(lr > 0.0) || !(weight_decay >= 0.0)) throw ConfigError("lr must be > 0 and weight_decay >= 0");
    if (!ablation.any_active()) throw ConfigError("every loss term is ablated; nothing to train");
  }
};

struct EpochRecord {
  int epoch = 0;
  double attr = 0, structure = 0, original = 0, attr_aug = 0, sub_attr = 0, sub_struct = 0, sub_aug = 0, contrast = 0, total = 0;
  double wall_ms = 0;
};

struct TrainLog {
  std::vector<EpochRecord> epochs;

  /// Comma-separated table. Wall time is left out so that identical runs
  /// produce identical files.
  void write_csv(std::ostream& out) const {
    out << "epoch,loss_attr,loss_struct,loss_original,loss_attr_aug,loss_sub_attr,loss_sub_struct,loss_sub_aug,loss_contrast,loss_total\n";
    out.precision(17);
    for (const auto& e : epochs)
      out << e.epoch << ',' << e.attr << ',' << e.structure << ',' << e.original << ',' << e.attr_aug << ',' << e.sub_attr << ','
          << e.sub_struct << ',' << e.sub_aug << ',' << e.contrast << ',' << e.total << '\n';
  }
};

/// Trainer state that survives between epochs: parameters and Adam moments.
struct TrainState {
  ModelParams params;
  AdamState adam;
};

inline std::string epoch_label(int epoch) { return "train/epoch=" + std::to_string(epoch); }

/// Plan for a given epoch honoring replan_every: epochs in the same block share a plan.
inline int plan_epoch(int epoch, int replan_every) { return ((epoch - 1) / replan_every) * replan_every + 1; }

/// Callback invoked with each epoch's plan (for --dump-plans).
using PlanObserver = std::function<void(int epoch, const EpochPlan&)>;

/// Full training run. Deterministic in tcfg.seed.
inline std::pair<TrainState, TrainLog> train(const MultiplexGraph& g, const ModelConfig& mcfg, const MaskConfig& maskcfg,
                                             const RwrConfig& rwrcfg, const TrainConfig& tcfg, const LossWeights& w,
                                             const PlanObserver& observe = {}) {
  g.validate();
  mcfg.validate();
  maskcfg.validate();
  rwrcfg.validate(g.node_count());
  tcfg.validate();
  w.validate();

  const ModelContext ctx(g, mcfg);
  TrainState st{ModelParams(g.relation_count(), maskcfg.repeats, g.feature_dim(), mcfg.hidden_dim), {}};
  st.params.initialize(g.attributes, tcfg.seed);
  auto ptrs = st.params.pointers();
  const AdamConfig acfg{tcfg.lr, tcfg.weight_decay};

  TrainLog log;
  EpochPlan plan;
  int planned_for = -1;
  for (int epoch = 1; epoch <= tcfg.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    const int pe = plan_epoch(epoch, tcfg.replan_every);
    if (pe != planned_for) {
      plan = make_epoch_plan(g, ctx.full_adj, maskcfg, rwrcfg, tcfg.ablation.no_mask, tcfg.seed, epoch_label(pe));
      planned_for = pe;
      if (observe) observe(epoch, plan);
    }
    // Dropout masks are redrawn each epoch even when the plan is reused.
    plan.label = epoch_label(pe) + "/e" + std::to_string(epoch);

    st.params.zero_grad();
    Tape tape;
    LossParts lp;
    try {
      lp = compute_losses(tape, ctx, st.params, plan, w, tcfg.ablation, ForwardOptions{tcfg.dropout, true});
    } catch (const NumericalError& e) {
      throw NumericalError("epoch " + std::to_string(epoch) + ": " + e.what());
    }
    if (!std::isfinite(lp.total.scalar())) throw NumericalError("epoch " + std::to_string(epoch) + ": non-finite loss");
    tape.backward(lp.total);
    adam_step(ptrs, st.adam, acfg, epoch);

    EpochRecord rec;
    rec.epoch = epoch;
    rec.attr = lp.attr.scalar();
    rec.structure = lp.structure.scalar();
    rec.original = lp.original.scalar();
    rec.attr_aug = lp.attr_aug.scalar();
    rec.sub_attr = lp.sub_attr.scalar();
    rec.sub_struct = lp.sub_struct.scalar();
    rec.sub_aug = lp.sub_aug.scalar();
    rec.contrast = lp.contrast.scalar();
    rec.total = lp.total.scalar();
    rec.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    log.epochs.push_back(rec);
  }
  return {std::move(st), std::move(log)};
}

}  // namespace umgad
